"""Multilevel discrete wavelet transform with symmetric boundary extension.

Orthonormal families only; analysis correlates with the scaling/wavelet
pair on the symmetrically extended signal, synthesis is its adjoint, which
gives exact reconstruction for the retained (slightly redundant)
coefficient counts. Operates on the last axis, so stacked spectra
transform in one call.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

_SQRT3 = np.sqrt(3.0)

# orthonormal scaling filters (sum = sqrt(2), unit energy); the numeric
# names count filter taps
FAMILIES: dict[str, np.ndarray] = {
    "haar": np.array([1.0, 1.0]) / np.sqrt(2.0),
    "daubechies-4": np.array(
        [1 + _SQRT3, 3 + _SQRT3, 3 - _SQRT3, 1 - _SQRT3]) / (4 * np.sqrt(2.0)),
    "daubechies-8": np.array([
        0.230377813308855230, 0.714846570552541500,
        0.630880767929590400, -0.027983769416983850,
        -0.187034811718881140, 0.030841381835986965,
        0.032883011666982945, -0.010597401784997278,
    ]),
    "symlet-8": np.array([
        -0.075765714789273330, -0.029635527645998855,
        0.497618667632015450, 0.803738751805916100,
        0.297857795605277360, -0.099219543576847220,
        -0.012603967262037833, 0.032223100604042702,
    ]),
}


def scaling_filter(family: str) -> np.ndarray:
    try:
        return FAMILIES[family]
    except KeyError:
        raise ValueError(
            f"unknown wavelet family {family!r}; choose from {sorted(FAMILIES)}"
        ) from None


def qmf(h: np.ndarray) -> np.ndarray:
    """Quadrature-mirror high-pass filter of a scaling filter."""
    k = np.arange(len(h))
    return ((-1.0) ** k) * h[::-1]


def max_level(n: int) -> int:
    return int(np.floor(np.log2(n))) if n > 1 else 0


def dwt_single(x: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One analysis level along the last axis: (approx, detail)."""
    flen = len(h)
    n = x.shape[-1]
    n_coeff = (n + flen - 2) // 2 + 1
    pad = [(0, 0)] * (x.ndim - 1) + [(flen - 1, flen - 1)]
    ext = np.pad(x, pad, mode="symmetric")
    win = sliding_window_view(ext, flen, axis=-1)[..., ::2, :][..., :n_coeff, :]
    return win @ h, win @ qmf(h)


def idwt_single(a: np.ndarray, d: np.ndarray, h: np.ndarray,
                n: int) -> np.ndarray:
    """Adjoint synthesis of one level, cropped to the original length."""
    flen = len(h)
    g = qmf(h)
    n_coeff = a.shape[-1]
    rec_len = 2 * (n_coeff - 1) + flen
    rec = np.zeros(a.shape[:-1] + (rec_len,), dtype=np.result_type(a, d))
    for k in range(flen):
        rec[..., k:k + 2 * n_coeff:2] += a * h[k] + d * g[k]
    return rec[..., flen - 1:flen - 1 + n]


def wavedec(x: np.ndarray, family: str, level: int):
    """Multilevel decomposition: (approx, [detail_1..detail_level], lengths).

    detail_1 is the finest band; ``lengths`` records the pre-transform
    length at each level for exact reconstruction.
    """
    h = scaling_filter(family)
    n = x.shape[-1]
    if level < 1:
        raise ValueError("level must be >= 1")
    if level > max_level(n):
        raise ValueError(
            f"level {level} too deep for length {n} (max {max_level(n)})"
        )
    approx = np.asarray(x, dtype=np.float64)
    details, lengths = [], []
    for _ in range(level):
        lengths.append(approx.shape[-1])
        approx, detail = dwt_single(approx, h)
        details.append(detail)
    return approx, details, lengths


def waverec(approx: np.ndarray, details: list[np.ndarray],
            lengths: list[int], family: str) -> np.ndarray:
    h = scaling_filter(family)
    x = approx
    for detail, n in zip(reversed(details), reversed(lengths)):
        x = idwt_single(x, detail, h, n)
    return x
