"""Reverse-accumulation autodiff over a recorded operation tape.

Every differentiable op (see ops.py) computes its value eagerly on float64
arrays and, when a Tape is active, appends a hand-derived adjoint closure.
Tape.backward walks the closures in reverse execution order, which is a
valid topological order by construction. With no active tape, ops are pure
functions and safe to call from multiple threads.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation, NumericError

_ACTIVE_TAPE = None


class Tensor:
    """Dense row-major float64 array; every kernel output is checked finite."""

    __slots__ = ("data", "grad")

    def __init__(self, data, check: bool = True):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if check and not np.all(np.isfinite(arr)):
            raise NumericError(f"non-finite values in tensor of shape {arr.shape}")
        self.data = arr
        self.grad = None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"


class Parameter(Tensor):
    """Learnable tensor: persistent gradient buffer plus a trainable flag."""

    __slots__ = ("trainable",)

    def __init__(self, data, trainable: bool = True):
        super().__init__(data)
        self.grad = np.zeros_like(self.data)
        self.trainable = trainable

    def reset_grad(self):
        self.grad.fill(0.0)

    def __repr__(self):
        return f"Parameter(shape={self.data.shape}, trainable={self.trainable})"


class Tape:
    """Single-threaded record of ops; spent after one backward pass."""

    def __init__(self):
        self._entries = []  # (out, adjoint_fn)
        self._spent = False

    def __enter__(self):
        global _ACTIVE_TAPE
        if _ACTIVE_TAPE is not None:
            raise ContractViolation("tapes do not nest")
        _ACTIVE_TAPE = self
        return self

    def __exit__(self, *exc):
        global _ACTIVE_TAPE
        _ACTIVE_TAPE = None
        return False

    def record(self, out: Tensor, adjoint_fn):
        self._entries.append((out, adjoint_fn))

    def backward(self, loss: Tensor):
        """Seed d(loss)/d(loss)=1 and accumulate grads into trainable leaves."""
        if self._spent:
            raise ContractViolation("tape already consumed by backward")
        if loss.data.size != 1:
            raise ContractViolation(f"backward needs a scalar loss, got shape {loss.shape}")
        self._spent = True
        loss.grad = np.ones_like(loss.data)
        for out, adjoint_fn in reversed(self._entries):
            if out.grad is None:
                continue
            adjoint_fn(out.grad)
        # release intermediate grads; Parameter buffers and leaf-input grads persist
        for out, _ in self._entries:
            if not isinstance(out, Parameter):
                out.grad = None
        self._entries.clear()


def active_tape():
    return _ACTIVE_TAPE


def recording() -> bool:
    return _ACTIVE_TAPE is not None


def wants_grad(t: Tensor) -> bool:
    """Adjoints may skip gradient pieces for frozen parameters."""
    if isinstance(t, Parameter):
        return t.trainable
    return True


def accumulate(t: Tensor, piece: np.ndarray):
    if isinstance(t, Parameter) and not t.trainable:
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += piece
