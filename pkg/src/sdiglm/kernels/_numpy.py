"""Pure-numpy reference kernels for the convolution hot path.

All kernels use "same" zero padding at stride 1, so spatial extents are
preserved. Layout is H x W x C with kernels k x k x Cin x Cout and odd k.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def _pad(x: np.ndarray, c: int) -> np.ndarray:
    return np.pad(x, ((c, c), (c, c), (0, 0)))


def conv2d_fwd(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Cross-correlation: y[p, co] = sum_e sum_ci x[p+e-c, ci] * w[e, ci, co]."""
    h, wd, _ = x.shape
    k = w.shape[0]
    c = (k - 1) // 2
    xp = _pad(x, c)
    y = np.zeros((h, wd, w.shape[3]))
    for dy in range(k):
        for dx in range(k):
            y += xp[dy:dy + h, dx:dx + wd, :] @ w[dy, dx]
    return y


def tconv2d_fwd(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Transposed convolution in scatter form: y[q+e-c, co] += x[q, ci] * w[e, ci, co]."""
    h, wd, _ = x.shape
    k = w.shape[0]
    c = (k - 1) // 2
    yp = np.zeros((h + 2 * c, wd + 2 * c, w.shape[3]))
    for dy in range(k):
        for dx in range(k):
            yp[dy:dy + h, dx:dx + wd, :] += x @ w[dy, dx]
    return np.ascontiguousarray(yp[c:c + h, c:c + wd, :])


def conv2d_grad_w(x: np.ndarray, gy: np.ndarray, k: int) -> np.ndarray:
    """Weight gradient of conv2d_fwd: gw[e, ci, co] = sum_p x[p+e-c, ci] * gy[p, co]."""
    h, wd, ci = x.shape
    c = (k - 1) // 2
    xp = _pad(x, c)
    gw = np.zeros((k, k, ci, gy.shape[2]))
    for dy in range(k):
        for dx in range(k):
            gw[dy, dx] = np.tensordot(xp[dy:dy + h, dx:dx + wd, :], gy, axes=([0, 1], [0, 1]))
    return gw
