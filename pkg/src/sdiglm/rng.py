"""Deterministic random stream with serializable state.

Built on numpy's Philox counter generator, whose output sequence is fixed
for a given key across platforms and numpy releases. A stream is fully
described by (seed, internal state), both of which round-trip through JSON
so training can resume bit-exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import require


class RngStream:
    """Seeded generator plus a draw counter."""

    def __init__(self, seed: int):
        require(0 <= int(seed) < 2**64, f"seed must fit in 64 bits, got {seed}")
        self.seed = int(seed)
        self.position = 0
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def normal(self, shape, scale: float = 1.0) -> np.ndarray:
        out = self._gen.standard_normal(size=shape, dtype=np.float64)
        self.position += int(np.prod(shape)) if shape else 1
        return out * scale if scale != 1.0 else out

    def uniform(self, shape, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        out = self._gen.random(size=shape, dtype=np.float64)
        self.position += int(np.prod(shape)) if shape else 1
        return low + (high - low) * out

    def integers(self, low: int, high: int, shape=None):
        out = self._gen.integers(low, high, size=shape)
        self.position += 1 if shape is None else int(np.prod(shape))
        return out

    def permutation(self, n: int) -> np.ndarray:
        out = self._gen.permutation(n)
        self.position += n
        return out

    def spawn(self) -> "RngStream":
        """Derive an independent child stream (one integer draw from self)."""
        return RngStream(int(self.integers(0, 2**63)))

    def state(self) -> dict:
        raw = self._gen.bit_generator.state
        return {
            "seed": self.seed,
            "position": self.position,
            "counter": [int(v) for v in raw["state"]["counter"]],
            "key": [int(v) for v in raw["state"]["key"]],
            "buffer": [int(v) for v in raw["buffer"]],
            "buffer_pos": int(raw["buffer_pos"]),
            "has_uint32": int(raw["has_uint32"]),
            "uinteger": int(raw["uinteger"]),
        }

    @classmethod
    def from_state(cls, state: dict) -> "RngStream":
        stream = cls(state["seed"])
        stream.position = int(state["position"])
        raw = stream._gen.bit_generator.state
        raw["state"]["counter"] = np.array(state["counter"], dtype=np.uint64)
        raw["state"]["key"] = np.array(state["key"], dtype=np.uint64)
        raw["buffer"] = np.array(state["buffer"], dtype=np.uint64)
        raw["buffer_pos"] = state["buffer_pos"]
        raw["has_uint32"] = state["has_uint32"]
        raw["uinteger"] = state["uinteger"]
        stream._gen.bit_generator.state = raw
        return stream
