"""Numba-accelerated convolution kernels.

Same contracts as kernels._numpy. Each output element is accumulated by a
single thread in a fixed loop order, so results are bit-identical across
runs and across thread counts. fastmath stays off: no reassociation.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

BACKEND_NAME = "numba"

_OPTS = dict(cache=True, nogil=True, fastmath=False)


@njit(parallel=True, **_OPTS)
def _conv2d_fwd(xp, w, h, wd):
    k = w.shape[0]
    ci_n = w.shape[2]
    co_n = w.shape[3]
    y = np.zeros((h, wd, co_n))
    for i in prange(h):
        for j in range(wd):
            for dy in range(k):
                for dx in range(k):
                    for ci in range(ci_n):
                        v = xp[i + dy, j + dx, ci]
                        for co in range(co_n):
                            y[i, j, co] += v * w[dy, dx, ci, co]
    return y


@njit(parallel=True, **_OPTS)
def _tconv2d_fwd(xp, w, h, wd):
    # gather form of the scatter definition: y[p] = sum_e x[p+c-e] * w[e]
    k = w.shape[0]
    ci_n = w.shape[2]
    co_n = w.shape[3]
    y = np.zeros((h, wd, co_n))
    for i in prange(h):
        for j in range(wd):
            for dy in range(k):
                for dx in range(k):
                    for ci in range(ci_n):
                        v = xp[i + (k - 1) - dy, j + (k - 1) - dx, ci]
                        for co in range(co_n):
                            y[i, j, co] += v * w[dy, dx, ci, co]
    return y


@njit(parallel=True, **_OPTS)
def _conv2d_grad_w(xp, gy, k):
    h, wd, co_n = gy.shape
    ci_n = xp.shape[2]
    gw = np.zeros((k, k, ci_n, co_n))
    for idx in prange(k * k):
        dy = idx // k
        dx = idx % k
        for i in range(h):
            for j in range(wd):
                for ci in range(ci_n):
                    v = xp[i + dy, j + dx, ci]
                    for co in range(co_n):
                        gw[dy, dx, ci, co] += v * gy[i, j, co]
    return gw


def _pad(x: np.ndarray, c: int) -> np.ndarray:
    return np.pad(x, ((c, c), (c, c), (0, 0)))


def conv2d_fwd(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    c = (w.shape[0] - 1) // 2
    return _conv2d_fwd(_pad(x, c), w, x.shape[0], x.shape[1])


def tconv2d_fwd(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    c = (w.shape[0] - 1) // 2
    return _tconv2d_fwd(_pad(x, c), w, x.shape[0], x.shape[1])


def conv2d_grad_w(x: np.ndarray, gy: np.ndarray, k: int) -> np.ndarray:
    c = (k - 1) // 2
    return _conv2d_grad_w(_pad(x, c), np.ascontiguousarray(gy), k)
