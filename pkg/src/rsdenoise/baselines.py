"""Classical denoisers used as benchmarks: Savitzky-Golay smoothing,
Fourier low-pass filtering and wavelet thresholding, plus the grid search
that picks each method's hyperparameters by minimizing RMSE on a random
subset of the training data.

All filters accept a single spectrum (1D) or stacked spectra (2D, one row
per spectrum) and operate along the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import wavelets
from .core import AcquisitionSet, HyperMap

_TAG_TUNE = 173

WAVELET_FAMILIES = ("haar", "daubechies-4", "daubechies-8", "symlet-8")
FOURIER_SHAPES = ("hard", "raised-cosine")
WAVELET_STRATEGIES = ("soft-universal", "hard-universal")


@dataclass(frozen=True)
class BaselineSpec:
    """One classical-denoiser configuration."""

    method: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        p = dict(self.params)
        if self.method == "savgol":
            if p["window"] % 2 != 1:
                raise ValueError("savgol window must be odd")
            if not p["order"] < p["window"]:
                raise ValueError("savgol order must be < window")
        elif self.method == "fourier":
            if not 0 < p["cutoff"] <= 1:
                raise ValueError("fourier cutoff must be in (0, 1]")
            if p["shape"] not in FOURIER_SHAPES:
                raise ValueError(f"unknown fourier shape {p['shape']!r}")
        elif self.method == "wavelet":
            if p["family"] not in WAVELET_FAMILIES:
                raise ValueError(f"unknown wavelet family {p['family']!r}")
            if p["level"] < 1:
                raise ValueError("wavelet level must be >= 1")
            if p["strategy"] not in WAVELET_STRATEGIES:
                raise ValueError(f"unknown strategy {p['strategy']!r}")
        else:
            raise ValueError(f"unknown baseline method {self.method!r}")
        object.__setattr__(self, "params", p)

    def to_json_dict(self) -> dict:
        return {"method": self.method, **self.params}


def _atleast_2d(x):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim == 2:
        return arr, False
    raise ValueError("expected a spectrum (1D) or stacked spectra (2D)")


def savgol_coefficients(window: int, order: int) -> np.ndarray:
    """Least-squares smoothing coefficients for the centered window."""
    half = window // 2
    positions = np.arange(-half, half + 1, dtype=np.float64)
    design = np.vander(positions, order + 1, increasing=True)
    return np.linalg.pinv(design)[0]


def savgol(spectrum, window: int, order: int):
    """Savitzky-Golay smoothing.

    Interior points apply the precomputed convolution coefficients; each
    edge point refits the polynomial on its truncated window.
    """
    x, squeeze = _atleast_2d(spectrum)
    n = x.shape[1]
    if window % 2 != 1:
        raise ValueError("window must be odd")
    if not order < window:
        raise ValueError("order must be < window")
    if window > n:
        raise ValueError(f"window {window} exceeds spectrum length {n}")
    half = window // 2
    coeffs = savgol_coefficients(window, order)
    win = sliding_window_view(x, window, axis=1)
    out = np.empty_like(x)
    out[:, half:n - half] = win @ coeffs
    for i in range(half):
        for pos, lo, hi in ((i, 0, i + half + 1),
                            (n - 1 - i, n - 1 - i - half, n)):
            rel = np.arange(lo, hi, dtype=np.float64) - pos
            design = np.vander(rel, order + 1, increasing=True)
            row = np.linalg.pinv(design)[0]
            out[:, pos] = x[:, lo:hi] @ row
    return out[0] if squeeze else out


def fourier_filter(spectrum, cutoff: float, shape: str = "hard",
                   rolloff_frac: float = 0.1):
    """Low-pass filtering in the real Fourier domain.

    ``cutoff`` is a fraction of the Nyquist frequency; the raised-cosine
    shape rolls gain from 1 to 0 over the final ``rolloff_frac * cutoff``
    of the passband, while ``hard`` zeroes everything above the cutoff.
    """
    if not 0 < cutoff <= 1:
        raise ValueError("cutoff must be in (0, 1]")
    if shape not in FOURIER_SHAPES:
        raise ValueError(f"unknown filter shape {shape!r}")
    x, squeeze = _atleast_2d(spectrum)
    n = x.shape[1]
    frac = np.fft.rfftfreq(n) / 0.5  # fraction of Nyquist in [0, 1]
    if shape == "hard":
        gain = (frac <= cutoff).astype(np.float64)
    else:
        lo = cutoff * (1.0 - rolloff_frac)
        gain = np.ones_like(frac)
        gain[frac > cutoff] = 0.0
        band = (frac > lo) & (frac <= cutoff)
        gain[band] = 0.5 * (1.0 + np.cos(np.pi * (frac[band] - lo) / (cutoff - lo)))
    out = np.fft.irfft(np.fft.rfft(x, axis=1) * gain[None, :], n=n, axis=1)
    return out[0] if squeeze else out


def wavelet_denoise(spectrum, family: str, level: int,
                    strategy: str = "soft-universal"):
    """Universal-threshold wavelet shrinkage.

    The noise scale is the median absolute deviation of the finest detail
    band divided by 0.6745, the threshold sigma*sqrt(2 ln n); detail bands
    are soft- or hard-thresholded and the signal reconstructed.
    """
    if strategy not in WAVELET_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    x, squeeze = _atleast_2d(spectrum)
    n = x.shape[1]
    approx, details, lengths = wavelets.wavedec(x, family, level)
    sigma = np.median(np.abs(details[0]), axis=-1) / 0.6745
    threshold = (sigma * np.sqrt(2.0 * np.log(n)))[:, None]
    shrunk = []
    for d in details:
        if strategy == "soft-universal":
            shrunk.append(np.sign(d) * np.maximum(np.abs(d) - threshold, 0.0))
        else:
            shrunk.append(np.where(np.abs(d) > threshold, d, 0.0))
    out = wavelets.waverec(approx, shrunk, lengths, family)
    return out[0] if squeeze else out


def apply_baseline(spec: BaselineSpec, spectra):
    p = spec.params
    if spec.method == "savgol":
        return savgol(spectra, p["window"], p["order"])
    if spec.method == "fourier":
        return fourier_filter(spectra, p["cutoff"], p["shape"])
    return wavelet_denoise(spectra, p["family"], p["level"], p["strategy"])


def default_grid(method: str, n_channels: int | None = None) -> list[BaselineSpec]:
    """Conventional search ranges for each method family."""
    specs: list[BaselineSpec] = []
    if method == "savgol":
        for window in range(5, 52, 2):
            for order in (2, 3, 4, 5):
                if order < window:
                    specs.append(BaselineSpec("savgol",
                                              {"window": window, "order": order}))
    elif method == "fourier":
        for cutoff in np.arange(0.02, 0.501, 0.02):
            for shape in FOURIER_SHAPES:
                specs.append(BaselineSpec("fourier",
                                          {"cutoff": round(float(cutoff), 4),
                                           "shape": shape}))
    elif method == "wavelet":
        for family in WAVELET_FAMILIES:
            for level in range(2, 7):
                if n_channels is not None and level > wavelets.max_level(n_channels):
                    continue
                for strategy in WAVELET_STRATEGIES:
                    specs.append(BaselineSpec("wavelet",
                                              {"family": family, "level": level,
                                               "strategy": strategy}))
    else:
        raise ValueError(f"unknown baseline method {method!r}")
    return specs


def tune_baseline(method: str, train_noisy: AcquisitionSet,
                  train_reference: HyperMap,
                  grid: list[BaselineSpec] | None = None, seed: int = 0,
                  subset_frac: float = 0.25) -> BaselineSpec:
    """Exhaustive grid search minimizing mean RMSE on a seeded random
    subset of the training points; ties break toward the earlier grid
    entry."""
    if train_reference.n_points != train_noisy.n_points:
        raise ValueError("reference not aligned with noisy set")
    if grid is None:
        grid = default_grid(method, train_noisy.n_channels)
    if not grid:
        raise ValueError("empty search grid")
    if any(s.method != method for s in grid):
        raise ValueError("grid contains specs of a different method")
    rng = np.random.default_rng(np.random.SeedSequence([seed, _TAG_TUNE]))
    n_points = train_noisy.n_points
    n_sub = max(1, int(round(subset_frac * n_points)))
    subset = np.sort(rng.choice(n_points, size=n_sub, replace=False))
    noisy = train_noisy.data[subset].astype(np.float64)
    noisy = noisy.reshape(-1, train_noisy.n_channels)
    ref = np.repeat(train_reference.data[subset], train_noisy.repetitions,
                    axis=0)
    best_spec, best_rmse = None, np.inf
    for spec in grid:
        filtered = apply_baseline(spec, noisy)
        score = float(np.sqrt(np.mean((filtered - ref) ** 2, axis=1)).mean())
        if score < best_rmse:
            best_spec, best_rmse = spec, score
    return best_spec
