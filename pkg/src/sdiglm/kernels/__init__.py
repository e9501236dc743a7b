"""Hot-path convolution kernels with a selectable backend.

SDIGLM_BACKEND=numba (default when numba imports) uses the @njit kernels;
SDIGLM_BACKEND=numpy forces the pure-numpy fallback. SDIGLM_THREADS caps the
numba thread count; 0 or absent means the single-threaded reference mode.
Both backends produce bit-identical results run-to-run; see
benchmarks/bench_kernels.py for a speed comparison.
"""

from __future__ import annotations

import os

_requested = os.environ.get("SDIGLM_BACKEND", "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(f"SDIGLM_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested in ("", "numba"):
    try:
        from . import _numba as _impl

        import numba

        _threads = int(os.environ.get("SDIGLM_THREADS", "0") or "0")
        if _threads <= 0:
            _threads = 1
        numba.set_num_threads(min(_threads, numba.config.NUMBA_NUM_THREADS))
    except ImportError:
        if _requested == "numba":
            raise
        from . import _numpy as _impl
else:
    from . import _numpy as _impl

BACKEND = _impl.BACKEND_NAME

conv2d_fwd = _impl.conv2d_fwd
tconv2d_fwd = _impl.tconv2d_fwd
conv2d_grad_w = _impl.conv2d_grad_w
