"""Differentiable kernels: eager forward on float64, hand-derived adjoints.

Reduction orders are fixed (plain numpy, no fastmath), so repeated runs are
bit-identical. Shape violations raise ContractViolation; non-finite outputs
raise NumericError via the Tensor constructor.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .autodiff import Tensor, accumulate, active_tape, wants_grad
from .errors import ContractViolation, require, require_shape

# Gradcheck installs a list here to observe ReLU inputs (kink detection).
_RELU_PROBE = None


def _record(out: Tensor, adjoint_fn):
    tape = active_tape()
    if tape is not None:
        tape.record(out, adjoint_fn)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    """Sum g down to `shape` (inverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def constant(data) -> Tensor:
    return Tensor(np.asarray(data, dtype=np.float64))


def add(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data + b.data)

    def adjoint(g):
        accumulate(a, _unbroadcast(g, a.data.shape))
        accumulate(b, _unbroadcast(g, b.data.shape))

    _record(out, adjoint)
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data * b.data)
    a_data, b_data = a.data, b.data

    def adjoint(g):
        accumulate(a, _unbroadcast(g * b_data, a_data.shape))
        accumulate(b, _unbroadcast(g * a_data, b_data.shape))

    _record(out, adjoint)
    return out


def scale(x: Tensor, c: float) -> Tensor:
    out = Tensor(x.data * c)
    _record(out, lambda g: accumulate(x, g * c))
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    require_shape(
        a.data.ndim == 2 and b.data.ndim == 2 and a.data.shape[1] == b.data.shape[0],
        "matmul", a.data.shape, b.data.shape,
    )
    out = Tensor(a.data @ b.data)
    a_data, b_data = a.data, b.data

    def adjoint(g):
        if wants_grad(a):
            accumulate(a, g @ b_data.T)
        if wants_grad(b):
            accumulate(b, a_data.T @ g)

    _record(out, adjoint)
    return out


def transpose(x: Tensor) -> Tensor:
    require(x.data.ndim == 2, f"transpose expects a matrix, got shape {x.shape}")
    out = Tensor(x.data.T)
    _record(out, lambda g: accumulate(x, g.T))
    return out


def reshape(x: Tensor, shape) -> Tensor:
    out = Tensor(x.data.reshape(shape))
    old = x.data.shape
    _record(out, lambda g: accumulate(x, g.reshape(old)))
    return out


def relu(x: Tensor) -> Tensor:
    if _RELU_PROBE is not None:
        _RELU_PROBE.append(x.data.copy())
    out = Tensor(np.maximum(x.data, 0.0))
    positive = x.data > 0.0
    _record(out, lambda g: accumulate(x, g * positive))
    return out


def sigmoid(x: Tensor) -> Tensor:
    z = x.data
    s = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
    out = Tensor(s)
    _record(out, lambda g: accumulate(x, g * s * (1.0 - s)))
    return out


def softmax_rows(x: Tensor) -> Tensor:
    """Row-stochastic softmax with per-row max subtraction."""
    require(x.data.ndim == 2, f"softmax_rows expects a matrix, got shape {x.shape}")
    shifted = x.data - x.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=1, keepdims=True)
    out = Tensor(s)

    def adjoint(g):
        accumulate(x, s * (g - (g * s).sum(axis=1, keepdims=True)))

    _record(out, adjoint)
    return out


def log_softmax_rows(x: Tensor) -> Tensor:
    require(x.data.ndim == 2, f"log_softmax_rows expects a matrix, got shape {x.shape}")
    shifted = x.data - x.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    out = Tensor(shifted - lse)
    soft = np.exp(out.data)

    def adjoint(g):
        accumulate(x, g - soft * g.sum(axis=1, keepdims=True))

    _record(out, adjoint)
    return out


def layer_norm(x: Tensor, gain: Tensor, offset: Tensor, eps: float = 1e-5) -> Tensor:
    """Per-row normalization over the feature axis, then affine gain/offset."""
    require(x.data.ndim == 2, f"layer_norm expects a matrix, got shape {x.shape}")
    d = x.data.shape[1]
    mu = x.data.mean(axis=1, keepdims=True)
    xc = x.data - mu
    inv = 1.0 / np.sqrt((xc * xc).mean(axis=1, keepdims=True) + eps)
    xhat = xc * inv
    out = Tensor(xhat * gain.data + offset.data)
    gain_data = gain.data

    def adjoint(g):
        dxhat = g * gain_data
        term = dxhat - dxhat.mean(axis=1, keepdims=True) - xhat * (dxhat * xhat).mean(axis=1, keepdims=True)
        accumulate(x, inv * term)
        if wants_grad(gain):
            accumulate(gain, (g * xhat).sum(axis=0))
        if wants_grad(offset):
            accumulate(offset, g.sum(axis=0))

    _record(out, adjoint)
    return out


def conv2d(x: Tensor, w: Tensor) -> Tensor:
    """Same-padded stride-1 cross-correlation; x: HxWxCin, w: kxkxCinxCout."""
    require(x.data.ndim == 3 and w.data.ndim == 4, "conv2d expects HxWxC input and kxkxCixCo kernel")
    k = w.data.shape[0]
    require(k == w.data.shape[1] and k % 2 == 1, f"conv2d kernel must be square with odd side, got {w.shape}")
    require_shape(x.data.shape[2] == w.data.shape[2], "conv2d channels", x.data.shape, w.data.shape)
    out = Tensor(kernels.conv2d_fwd(x.data, w.data))
    x_data, w_data = x.data, w.data

    def adjoint(g):
        g = np.ascontiguousarray(g)
        if wants_grad(x):
            accumulate(x, kernels.tconv2d_fwd(g, np.ascontiguousarray(w_data.transpose(0, 1, 3, 2))))
        if wants_grad(w):
            accumulate(w, kernels.conv2d_grad_w(x_data, g, k))

    _record(out, adjoint)
    return out


def tconv2d(x: Tensor, w: Tensor) -> Tensor:
    """Same-padded stride-1 transposed convolution (scatter of x through w)."""
    require(x.data.ndim == 3 and w.data.ndim == 4, "tconv2d expects HxWxC input and kxkxCixCo kernel")
    k = w.data.shape[0]
    require(k == w.data.shape[1] and k % 2 == 1, f"tconv2d kernel must be square with odd side, got {w.shape}")
    require_shape(x.data.shape[2] == w.data.shape[2], "tconv2d channels", x.data.shape, w.data.shape)
    out = Tensor(kernels.tconv2d_fwd(x.data, w.data))
    x_data, w_data = x.data, w.data

    def adjoint(g):
        g = np.ascontiguousarray(g)
        if wants_grad(x):
            accumulate(x, kernels.conv2d_fwd(g, np.ascontiguousarray(w_data.transpose(0, 1, 3, 2))))
        if wants_grad(w):
            accumulate(w, kernels.conv2d_grad_w(x_data, g, k)[::-1, ::-1].copy())

    _record(out, adjoint)
    return out


def concat_rows(parts) -> Tensor:
    parts = list(parts)
    require(len(parts) > 0, "concat_rows needs at least one part")
    out = Tensor(np.concatenate([p.data for p in parts], axis=0))
    sizes = [p.data.shape[0] for p in parts]

    def adjoint(g):
        offset = 0
        for p, n in zip(parts, sizes):
            accumulate(p, g[offset:offset + n])
            offset += n

    _record(out, adjoint)
    return out


def concat_cols(parts) -> Tensor:
    parts = list(parts)
    require(len(parts) > 0, "concat_cols needs at least one part")
    out = Tensor(np.concatenate([p.data for p in parts], axis=1))
    sizes = [p.data.shape[1] for p in parts]

    def adjoint(g):
        offset = 0
        for p, n in zip(parts, sizes):
            accumulate(p, g[:, offset:offset + n])
            offset += n

    _record(out, adjoint)
    return out


def take_rows(x: Tensor, idx) -> Tensor:
    """Gather rows; adjoint scatter-adds (duplicate indices accumulate)."""
    idx = np.asarray(idx, dtype=np.int64)
    require(idx.ndim == 1, "take_rows expects a flat index array")
    if idx.size and (idx.min() < 0 or idx.max() >= x.data.shape[0]):
        raise ContractViolation(f"take_rows index out of range for {x.data.shape[0]} rows")
    out = Tensor(x.data[idx])
    rows = x.data.shape

    def adjoint(g):
        buf = np.zeros(rows)
        np.add.at(buf, idx, g)
        accumulate(x, buf)

    _record(out, adjoint)
    return out


def gather_elements(x: Tensor, row_idx, col_idx) -> Tensor:
    row_idx = np.asarray(row_idx, dtype=np.int64)
    col_idx = np.asarray(col_idx, dtype=np.int64)
    require(row_idx.shape == col_idx.shape, "gather_elements index arrays must align")
    out = Tensor(x.data[row_idx, col_idx])
    shape = x.data.shape

    def adjoint(g):
        buf = np.zeros(shape)
        np.add.at(buf, (row_idx, col_idx), g)
        accumulate(x, buf)

    _record(out, adjoint)
    return out


def sum_all(x: Tensor) -> Tensor:
    out = Tensor(np.asarray(x.data.sum()))
    shape = x.data.shape
    _record(out, lambda g: accumulate(x, np.broadcast_to(g, shape).copy()))
    return out


def mean_all(x: Tensor) -> Tensor:
    n = x.data.size
    out = Tensor(np.asarray(x.data.mean()))
    shape = x.data.shape
    _record(out, lambda g: accumulate(x, np.broadcast_to(g / n, shape).copy()))
    return out


def bce_with_logits(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean binary cross-entropy against {0,1} targets, stable at large |z|."""
    z = logits.data
    y = np.asarray(targets, dtype=np.float64)
    require_shape(z.shape == y.shape, "bce_with_logits", z.shape, y.shape)
    elem = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    out = Tensor(np.asarray(elem.mean()))
    n = z.size

    def adjoint(g):
        s = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
        accumulate(logits, g * (s - y) / n)

    _record(out, adjoint)
    return out
