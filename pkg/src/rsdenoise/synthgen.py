"""Synthetic hyperspectral map generator with controllable phase structure.

Produces Lorentzian-peak phase templates, blobby spatial phase maps with
ground-truth labels, and repeated noisy acquisitions with shot, read and
optional 1/f (flicker) noise, so every downstream stage can be verified at
desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import AcquisitionSet, HyperMap, Spectrum

DEFAULT_CHANNELS = 736

# rng stream tags, so substreams for different purposes never collide
_TAG_LIBRARY = 11
_TAG_BLOBS = 23
_TAG_POINT = 37


def default_axis(channels: int = DEFAULT_CHANNELS, lo: float = 100.0,
                 hi: float = 1800.0) -> np.ndarray:
    """Standard strictly increasing Raman-shift axis in cm^-1."""
    return np.linspace(lo, hi, channels)


def lorentzian(axis: np.ndarray, center: float, width: float,
               amplitude: float) -> np.ndarray:
    """Lorentzian line with peak height ``amplitude`` and HWHM ``width``."""
    return amplitude * width**2 / ((axis - center) ** 2 + width**2)


@dataclass(frozen=True)
class PhaseLibrary:
    """Clean spectral templates, one per phase, on a shared axis."""

    shift_axis: np.ndarray
    templates: np.ndarray  # (n_phases, channels), nonnegative
    peaks: list = field(default_factory=list)  # per phase: [(center, width, amp), ...]

    @property
    def n_phases(self) -> int:
        return self.templates.shape[0]

    def spectrum(self, phase: int) -> Spectrum:
        return Spectrum(self.shift_axis, self.templates[phase])


@dataclass(frozen=True)
class NoiseModel:
    """Physically motivated acquisition noise parameters.

    shot_scale scales Poisson counting noise (variance = shot_scale*signal),
    read_sigma is the signal-independent Gaussian readout std, flicker_amp
    the per-sample std of a 1/f component correlated across repetitions.
    """

    shot_scale: float = 0.0
    read_sigma: float = 0.0
    flicker_amp: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.shot_scale < 0 or self.read_sigma < 0 or self.flicker_amp < 0:
            raise ValueError("noise amplitudes must be nonnegative")


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


def gen_phase_library(n_phases: int, peaks_per_phase: int, seed: int,
                      axis: np.ndarray | None = None,
                      max_similarity: float = 0.99,
                      max_retries: int = 200) -> PhaseLibrary:
    """Draw random Lorentzian-sum templates with distinguishable phases.

    Deterministic for a fixed seed. Raises if the pairwise cosine
    similarity constraint cannot be met within ``max_retries`` redraws.
    """
    if n_phases < 2:
        raise ValueError("need >= 2 phases")
    if peaks_per_phase < 1:
        raise ValueError("need >= 1 peak per phase")
    if axis is None:
        axis = default_axis()
    rng = np.random.default_rng(np.random.SeedSequence([seed, _TAG_LIBRARY]))
    lo, hi = axis[0], axis[-1]
    margin = 0.03 * (hi - lo)

    templates: list[np.ndarray] = []
    peak_lists: list[list[tuple[float, float, float]]] = []
    attempts = 0
    while len(templates) < n_phases:
        if attempts > max_retries:
            raise RuntimeError(
                f"could not draw {n_phases} phases with pairwise cosine "
                f"similarity < {max_similarity} in {max_retries} attempts"
            )
        attempts += 1
        peaks = []
        spec = np.zeros_like(axis)
        for _ in range(peaks_per_phase):
            center = rng.uniform(lo + margin, hi - margin)
            width = rng.uniform(4.0, 30.0)
            amp = rng.uniform(0.2, 1.0)
            peaks.append((center, width, amp))
            spec += lorentzian(axis, center, width, amp)
        if any(cosine_similarity(spec, t) >= max_similarity for t in templates):
            continue
        templates.append(spec)
        peak_lists.append(peaks)
    return PhaseLibrary(axis, np.array(templates), peak_lists)


def gen_phase_map(library: PhaseLibrary, grid_shape, blob_count: int,
                  seed: int) -> tuple[HyperMap, np.ndarray]:
    """Partition the grid into contiguous blobs and assign phases to them.

    Each blob is a Voronoi cell of a random seed point, which keeps regions
    spatially contiguous. When blob_count >= n_phases, every phase is used
    at least once. Returns the clean map and the per-point true labels.
    """
    rows, cols = grid_shape
    n_cells = rows * cols
    if n_cells < 1:
        raise ValueError("grid must be nonempty")
    if blob_count < 1:
        raise ValueError("blob_count must be >= 1")
    blob_count = min(blob_count, n_cells)
    rng = np.random.default_rng(np.random.SeedSequence([seed, _TAG_BLOBS]))

    seed_cells = rng.choice(n_cells, size=blob_count, replace=False)
    seed_rc = np.stack([seed_cells // cols, seed_cells % cols], axis=1)
    rr, cc = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    cells = np.stack([rr.ravel(), cc.ravel()], axis=1)
    # nearest seed, ties broken toward the lower blob index via argmin
    d2 = ((cells[:, None, :] - seed_rc[None, :, :]) ** 2).sum(axis=2)
    blob_of_cell = np.argmin(d2, axis=1)

    n_phases = library.n_phases
    blob_phase = np.empty(blob_count, dtype=np.intp)
    head = min(blob_count, n_phases)
    blob_phase[:head] = rng.permutation(n_phases)[:head]
    if blob_count > head:
        blob_phase[head:] = rng.integers(0, n_phases, size=blob_count - head)

    labels = blob_phase[blob_of_cell]
    data = library.templates[labels]
    return HyperMap(grid_shape=(rows, cols), shift_axis=library.shift_axis,
                    data=data), labels.astype(np.int64)


def add_polynomial_background(hmap: HyperMap, amplitude: float, degree: int,
                              seed: int) -> HyperMap:
    """Add a smooth nonnegative per-point polynomial background.

    Emulates fluorescence-like baselines so the baseline-correction stage
    has something to remove; coefficients are seeded per point.
    """
    if amplitude < 0 or degree < 1:
        raise ValueError("amplitude must be >= 0 and degree >= 1")
    if amplitude == 0:
        return hmap
    t = np.linspace(0.0, 1.0, hmap.n_channels)
    data = hmap.data.copy()
    for p in range(hmap.n_points):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 61, p]))
        coeffs = rng.uniform(-1.0, 1.0, size=degree + 1)
        curve = np.polynomial.polynomial.polyval(t, coeffs)
        curve -= curve.min()
        peak = curve.max()
        if peak > 0:
            curve *= amplitude / peak
        data[p] += curve
    return HyperMap(hmap.grid_shape, hmap.shift_axis, data, norms=hmap.norms)


def _flicker_series(rng: np.random.Generator, n_channels: int,
                    repetitions: int, amp: float) -> np.ndarray:
    """1/f-correlated series along the repetition axis, per channel.

    White noise is shaped in the frequency domain with amplitude ~ f^-1/2;
    the DC bin is zeroed so the component stays zero-mean. The gain vector
    is normalized so the per-sample std equals ``amp``.
    """
    if repetitions < 2:
        return np.zeros((repetitions, n_channels))
    freqs = np.fft.rfftfreq(repetitions)
    gain = np.zeros_like(freqs)
    gain[1:] = freqs[1:] ** -0.5
    # expected per-sample variance of irfft(gain * rfft(white)), via Parseval
    sym = np.full_like(gain, 2.0)
    sym[0] = 1.0
    if repetitions % 2 == 0:
        sym[-1] = 1.0
    expected_var = float(np.sum(sym * gain**2)) / repetitions
    gain *= amp / np.sqrt(expected_var)
    white = rng.standard_normal((n_channels, repetitions))
    shaped = np.fft.irfft(np.fft.rfft(white, axis=1) * gain[None, :],
                          n=repetitions, axis=1)
    return shaped.T


def synthesize_acquisitions(clean: HyperMap, model: NoiseModel,
                            repetitions: int,
                            integration_time_ms: float) -> AcquisitionSet:
    """Simulate repeated noisy acquisitions of a clean map.

    The expected value of every acquisition is the integration-time-scaled
    clean spectrum; shot/read noise is independent between repetitions
    while the flicker component is correlated along the repetition axis.
    Poisson shot noise uses a Gaussian approximation where
    shot_scale*signal > 20 and exact sampling otherwise.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if not integration_time_ms > 0:
        raise ValueError("integration_time_ms must be positive")
    if np.any(clean.data < 0):
        raise ValueError("clean intensities must be nonnegative")

    n_points, n_channels = clean.data.shape
    out = np.empty((n_points, repetitions, n_channels), dtype=np.float32)
    for p in range(n_points):
        signal = clean.data[p] * integration_time_ms
        rng = np.random.default_rng(
            np.random.SeedSequence([model.seed, _TAG_POINT, p]))
        acq = np.broadcast_to(signal, (repetitions, n_channels)).copy()
        if model.shot_scale > 0:
            var = model.shot_scale * signal
            gauss_mask = var > 20.0
            noise = np.where(
                gauss_mask[None, :],
                rng.normal(0.0, np.sqrt(np.maximum(var, 1e-300)),
                           size=(repetitions, n_channels)),
                model.shot_scale
                * rng.poisson(np.maximum(signal, 0.0) / model.shot_scale,
                              size=(repetitions, n_channels))
                - signal[None, :],
            )
            acq += noise
        if model.read_sigma > 0:
            acq += rng.normal(0.0, model.read_sigma,
                              size=(repetitions, n_channels))
        if model.flicker_amp > 0:
            acq += _flicker_series(rng, n_channels, repetitions,
                                   model.flicker_amp)
        out[p] = acq.astype(np.float32)
    return AcquisitionSet(
        grid_shape=clean.grid_shape,
        integration_time_ms=integration_time_ms,
        shift_axis=clean.shift_axis,
        data=out,
    )
