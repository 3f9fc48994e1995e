"""Spectrum preprocessing: crop/standardize, iterative despiking, polynomial
baseline correction with iterative clipping, L2 norm bookkeeping, per-point
averaged references and repetition downsampling.

All operations are pure per spectrum; the set-level helpers map them over
an :class:`~rsdenoise.core.AcquisitionSet` without shared state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import AcquisitionSet, HyperMap, Spectrum

_TAG_DOWNSAMPLE = 53


@dataclass(frozen=True)
class DespikeParams:
    """Cosmic-ray spike detection parameters.

    A spike is a run of at most ``max_width`` contiguous channels whose
    positive amplitude exceeds ``amp_threshold`` times the local standard
    deviation, estimated over ``window`` channels centered on the run and
    excluding it.
    """

    window: int = 40
    amp_threshold: float = 5.0
    max_width: int = 2
    max_iterations: int = 10

    def __post_init__(self):
        if self.window < 8:
            raise ValueError("window must be >= 8")
        if not self.amp_threshold > 0:
            raise ValueError("amp_threshold must be > 0")
        if self.max_width < 1 or self.max_iterations < 1:
            raise ValueError("max_width and max_iterations must be >= 1")


@dataclass(frozen=True)
class BaselineParams:
    """Iteratively clipped polynomial baseline fit (degree 4 by default)."""

    degree: int = 4
    clip_iterations: int = 20
    clip_factor: float = 0.0

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        if self.clip_iterations < 1:
            raise ValueError("clip_iterations must be >= 1")


def standardize(spectrum: Spectrum, crop_lo: int, crop_hi: int,
                target_len: int) -> Spectrum:
    """Crop both ends, then resample to ``target_len`` channels.

    Resampling is linear interpolation on the cropped axis; when the crop
    already leaves exactly ``target_len`` channels the data pass through
    untouched.
    """
    n = len(spectrum)
    if crop_lo < 0 or crop_hi < 0:
        raise ValueError("crop amounts must be nonnegative")
    remaining = n - crop_lo - crop_hi
    if remaining < target_len:
        raise ValueError(
            f"crop leaves {remaining} channels, need at least {target_len}"
        )
    axis = spectrum.shift_axis[crop_lo:n - crop_hi]
    intens = spectrum.intensities[crop_lo:n - crop_hi]
    if remaining == target_len:
        return Spectrum(axis, intens, spectrum.norm_original)
    new_axis = np.linspace(axis[0], axis[-1], target_len)
    return Spectrum(new_axis, np.interp(new_axis, axis, intens),
                    spectrum.norm_original)


def _local_stats_excluding_self(x: np.ndarray, window: int):
    """Mean/std over a centered window of ``window`` channels, excluding the
    center channel; the window shrinks at the spectrum edges."""
    n = x.shape[0]
    half = window // 2
    csum = np.concatenate([[0.0], np.cumsum(x)])
    csq = np.concatenate([[0.0], np.cumsum(x * x)])
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, n)
    cnt = (hi - lo).astype(np.float64) - 1.0
    s = csum[hi] - csum[lo] - x
    q = csq[hi] - csq[lo] - x * x
    mean = s / cnt
    var = np.maximum(q / cnt - mean**2, 0.0)
    return mean, np.sqrt(var)


def _run_stats_excluding(x: np.ndarray, start: int, end: int, window: int):
    """Mean/std over ``window`` channels centered on the run [start, end),
    excluding the run itself."""
    n = x.shape[0]
    half = window // 2
    center = (start + end - 1) // 2
    lo = max(center - half, 0)
    hi = min(center + half + 1, n)
    mask = np.ones(hi - lo, dtype=bool)
    mask[max(start, lo) - lo:max(min(end, hi) - lo, 0)] = False
    vals = x[lo:hi][mask]
    if vals.size < 2:
        return float("inf"), float("inf")
    return float(vals.mean()), float(vals.std())


def _flagged_runs(flags: np.ndarray):
    """Contiguous [start, end) runs of True entries."""
    padded = np.concatenate([[False], flags, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return list(zip(edges[0::2], edges[1::2]))


def _interpolate_run(x: np.ndarray, start: int, end: int) -> None:
    n = x.shape[0]
    left = start - 1
    right = end
    if left < 0 and right >= n:
        return
    if left < 0:
        x[start:end] = x[right]
        return
    if right >= n:
        x[start:end] = x[left]
        return
    span = right - left
    t = np.arange(1, end - start + 1) / span
    x[start:end] = x[left] + t * (x[right] - x[left])


def despike(spectrum: Spectrum,
            params: DespikeParams = DespikeParams()) -> tuple[Spectrum, np.ndarray]:
    """Iteratively remove narrow positive spikes by linear interpolation.

    Detection runs on the current (partially cleaned) spectrum each
    iteration and stops at a fixpoint or after ``max_iterations``. Returns
    the cleaned spectrum and the sorted channel indices that were replaced.
    """
    n = len(spectrum)
    if n <= params.window:
        raise ValueError(f"spectrum length {n} must exceed window {params.window}")
    x = spectrum.intensities.copy()
    replaced: set[int] = set()
    for _ in range(params.max_iterations):
        mean, std = _local_stats_excluding_self(x, params.window)
        amp = x - mean
        flags = amp > params.amp_threshold * std
        changed = False
        for start, end in _flagged_runs(flags):
            if end - start > params.max_width:
                continue
            mu, sigma = _run_stats_excluding(x, start, end, params.window)
            if not np.isfinite(mu):
                continue
            run_amp = float(x[start:end].max()) - mu
            if run_amp > params.amp_threshold * sigma:
                _interpolate_run(x, start, end)
                replaced.update(range(start, end))
                changed = True
        if not changed:
            break
    positions = np.array(sorted(replaced), dtype=np.intp)
    return Spectrum(spectrum.shift_axis, x, spectrum.norm_original), positions


def baseline_correct(spectrum: Spectrum,
                     params: BaselineParams = BaselineParams()) -> Spectrum:
    """Subtract an iteratively clipped least-squares polynomial baseline.

    Each round fits a degree-``degree`` polynomial, then replaces every
    point above fit + clip_factor * residual-std with the fit value, which
    progressively excludes peaks from the baseline estimate.
    """
    n = len(spectrum)
    if n <= params.degree + 1:
        raise ValueError("spectrum too short for the requested degree")
    axis = spectrum.shift_axis
    # rescale the abscissa to [-1, 1] to keep the quartic fit conditioned
    t = 2.0 * (axis - axis[0]) / (axis[-1] - axis[0]) - 1.0
    y = spectrum.intensities
    work = y.copy()
    for _ in range(params.clip_iterations):
        coeffs = np.polynomial.polynomial.polyfit(t, work, params.degree)
        fit = np.polynomial.polynomial.polyval(t, coeffs)
        resid_std = float(np.std(work - fit))
        work = np.where(work > fit + params.clip_factor * resid_std, fit, work)
    coeffs = np.polynomial.polynomial.polyfit(t, work, params.degree)
    baseline = np.polynomial.polynomial.polyval(t, coeffs)
    return Spectrum(axis, y - baseline, spectrum.norm_original)


def l2_normalize(spectrum: Spectrum) -> Spectrum:
    """Scale to unit L2 norm, recording the original norm for later rescale."""
    norm = float(np.linalg.norm(spectrum.intensities))
    if norm == 0.0:
        raise ValueError("zero-norm spectrum")
    return Spectrum(spectrum.shift_axis, spectrum.intensities / norm, norm)


def rescale(spectrum: Spectrum) -> Spectrum:
    """Undo :func:`l2_normalize` using the recorded original norm."""
    if spectrum.norm_original is None:
        raise ValueError("spectrum has no recorded original norm")
    return Spectrum(spectrum.shift_axis,
                    spectrum.intensities * spectrum.norm_original, None)


def l2_normalize_rows(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise unit normalization for spectra stacked as a matrix."""
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero-norm spectrum in matrix")
    return matrix / norms[:, None], norms


def preprocess_set(aset: AcquisitionSet,
                   despike_params: DespikeParams | None = None,
                   baseline_params: BaselineParams | None = None) -> AcquisitionSet:
    """Apply despiking and baseline correction to every acquisition."""
    if despike_params is None and baseline_params is None:
        return aset
    out = np.empty_like(aset.data)
    for p in range(aset.n_points):
        for r in range(aset.repetitions):
            spec = aset.spectrum(p, r)
            if despike_params is not None:
                spec, _ = despike(spec, despike_params)
            if baseline_params is not None:
                spec = baseline_correct(spec, baseline_params)
            out[p, r] = spec.intensities.astype(np.float32)
    return aset.with_data(out)


def averaged_reference(aset: AcquisitionSet,
                       despike_params: DespikeParams | None = None,
                       baseline_params: BaselineParams | None = None) -> HyperMap:
    """Per-point arithmetic mean over repetitions.

    When despike/baseline parameters are given, each repetition is cleaned
    before averaging; with both omitted and R=1 this is the identity map.
    """
    cleaned = preprocess_set(aset, despike_params, baseline_params)
    mean = cleaned.data.astype(np.float64).mean(axis=1)
    return HyperMap(grid_shape=aset.grid_shape, shift_axis=aset.shift_axis,
                    data=mean)


def downsample_repetitions(aset: AcquisitionSet, keep: int,
                           seed: int) -> AcquisitionSet:
    """Retain a seeded random subset of repetitions per point (no replacement).

    Selected repetitions keep their temporal order; keep == R is identity.
    """
    r = aset.repetitions
    if keep > r:
        raise ValueError(f"cannot keep {keep} of {r} repetitions")
    if keep < 1:
        raise ValueError("keep must be >= 1")
    if keep == r:
        return aset
    out = np.empty((aset.n_points, keep, aset.n_channels), dtype=np.float32)
    for p in range(aset.n_points):
        rng = np.random.default_rng(
            np.random.SeedSequence([seed, _TAG_DOWNSAMPLE, p]))
        sel = np.sort(rng.choice(r, size=keep, replace=False))
        out[p] = aset.data[p, sel]
    return replace(aset, data=out)
