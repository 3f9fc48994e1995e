"""Numerical kernels for the 1D convolutional autoencoder.

Two interchangeable backends provide the convolution primitives: a
compiled Cython+BLAS extension and a pure-numpy fallback. The extension
is preferred when importable; set ``RSDENOISE_KERNELS=numpy`` or
``=cython`` to force a backend. ``benchmarks/bench_kernels.py`` compares
the two.

All primitives take channels-last activations ``(batch, length, channels)``
and ``(out_channels, in_channels, kernel)`` weights, and are deterministic
for fixed inputs.
"""

from __future__ import annotations

import os

import numpy as np

from . import _numpy

_requested = os.environ.get("RSDENOISE_KERNELS", "").strip().lower()

if _requested == "numpy":
    _impl = _numpy
    BACKEND = "numpy"
else:
    try:
        from . import _cython as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "RSDENOISE_KERNELS=cython but the compiled extension is "
                "not available; rebuild with Cython installed"
            )
        _impl = _numpy
        BACKEND = "numpy"

conv1d_fwd = _impl.conv1d_fwd
conv1d_bwd = _impl.conv1d_bwd
convtr1d2_fwd = _impl.convtr1d2_fwd
convtr1d2_bwd = _impl.convtr1d2_bwd


def get_backend(name: str):
    """Return the module implementing the named backend ('numpy'/'cython')."""
    if name == "numpy":
        return _numpy
    if name == "cython":
        from . import _cython

        return _cython
    raise ValueError(f"unknown kernel backend {name!r}")


def maxpool2_fwd(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Size-2 stride-2 max pooling; ties resolve to the lower index.

    Returns the pooled array and the argmax index (0 or 1) per window,
    which the backward pass uses to route gradients deterministically.
    """
    b_n, length, channels = x.shape
    if length % 2 != 0:
        raise ValueError("pooling input length must be even")
    lo = x[:, 0::2, :]
    hi = x[:, 1::2, :]
    idx = hi > lo  # strict, so ties pick the lower index
    y = np.where(idx, hi, lo)
    return np.ascontiguousarray(y), idx


def maxpool2_bwd(gy: np.ndarray, idx: np.ndarray) -> np.ndarray:
    b_n, half, channels = gy.shape
    gx = np.empty((b_n, half * 2, channels), dtype=gy.dtype)
    gx[:, 0::2, :] = np.where(idx, 0, gy)
    gx[:, 1::2, :] = np.where(idx, gy, 0)
    return gx
