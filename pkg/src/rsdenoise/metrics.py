"""Spectral-fidelity and task-oriented metrics.

RMSE, linear SNR (signal power over residual power), one-dimensional SSIM
over sliding windows, minimum-cost assignment for label matching,
clustering accuracy, and the workflow speedup arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import Spectrum

SSIM_WINDOW = 11


def _values(x) -> np.ndarray:
    if isinstance(x, Spectrum):
        return x.intensities
    return np.asarray(x, dtype=np.float64)


def rmse(reference, test) -> float:
    """Root mean squared pointwise deviation."""
    ref, t = _values(reference), _values(test)
    if ref.shape != t.shape:
        raise ValueError(f"length mismatch: {ref.shape} vs {t.shape}")
    return float(np.sqrt(np.mean((t - ref) ** 2)))


def snr(reference, test) -> float:
    """Linear signal-to-noise ratio: mean squared reference intensity over
    mean squared residual. Returns +inf for a zero residual."""
    ref, t = _values(reference), _values(test)
    if ref.shape != t.shape:
        raise ValueError(f"length mismatch: {ref.shape} vs {t.shape}")
    p_signal = float(np.mean(ref**2))
    p_noise = float(np.mean((t - ref) ** 2))
    if p_noise == 0.0:
        if p_signal > 0.0:
            return math.inf
        raise ValueError("zero reference and zero residual")
    return p_signal / p_noise


def ssim(reference, test, window: int = SSIM_WINDOW) -> float:
    """Mean structural similarity over uniform sliding windows.

    The dynamic range is taken from the reference argument only, so the
    metric is asymmetric in its arguments by construction.
    """
    ref, t = _values(reference), _values(test)
    if ref.shape != t.shape:
        raise ValueError(f"length mismatch: {ref.shape} vs {t.shape}")
    n = ref.shape[0]
    if n < window:
        raise ValueError(f"need at least {window} channels, got {n}")
    dyn = float(ref.max() - ref.min())
    if dyn == 0.0:
        raise ValueError("degenerate dynamic range: constant reference")
    c1 = (0.01 * dyn) ** 2
    c2 = (0.03 * dyn) ** 2
    rw = sliding_window_view(ref, window)
    tw = sliding_window_view(t, window)
    mu_r = rw.mean(axis=1)
    mu_t = tw.mean(axis=1)
    var_r = rw.var(axis=1)
    var_t = tw.var(axis=1)
    cov = (rw * tw).mean(axis=1) - mu_r * mu_t
    num = (2 * mu_r * mu_t + c1) * (2 * cov + c2)
    den = (mu_r**2 + mu_t**2 + c1) * (var_r + var_t + c2)
    return float(np.mean(num / den))


def hungarian(cost) -> np.ndarray:
    """Minimum-cost assignment on a square matrix.

    Returns the permutation ``perm`` minimizing ``sum(cost[i, perm[i]])``,
    via the O(n^3) potentials/augmenting-path formulation. Negative
    entries are fine.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError(f"cost matrix must be square, got {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix must be finite")
    n = cost.shape[0]
    inf = math.inf
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.intp)  # p[j] = row matched to column j
    way = np.zeros(n + 1, dtype=np.intp)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            p[j0] = p[way[j0]]
            j0 = way[j0]
    perm = np.empty(n, dtype=np.intp)
    for j in range(1, n + 1):
        perm[p[j] - 1] = j - 1
    return perm


def clustering_accuracy(labels_a, labels_b, k: int) -> float:
    """Best label-permutation agreement between two k-clusterings.

    Builds the k x k confusion matrix and matches labels by minimum-cost
    assignment on negated counts, absorbing the arbitrariness of cluster
    label order on either side.
    """
    a = np.asarray(labels_a, dtype=np.intp)
    b = np.asarray(labels_b, dtype=np.intp)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("label sequences must be 1D of equal length")
    if a.size == 0:
        raise ValueError("empty label sequences")
    for name, lab in (("labels_a", a), ("labels_b", b)):
        if lab.min() < 0 or lab.max() >= k:
            raise ValueError(f"{name} outside [0, {k})")
    confusion = np.zeros((k, k), dtype=np.float64)
    np.add.at(confusion, (a, b), 1.0)
    perm = hungarian(-confusion)
    matched = confusion[np.arange(k), perm].sum()
    return float(matched / a.size)


def workflow_speedup(map_points: int, short_ms: float, long_ms: float,
                     train_seconds: float, validation_seconds: float,
                     compute_seconds: float) -> float:
    """Total-workflow acquisition speedup of the short-exposure strategy.

    Ratio of the long-exposure map acquisition time to the short-exposure
    map time plus training/validation acquisition and compute overheads.
    """
    if min(map_points, short_ms, long_ms, train_seconds,
           validation_seconds, compute_seconds) <= 0:
        raise ValueError("all inputs must be positive")
    long_total = map_points * long_ms / 1000.0
    short_total = (map_points * short_ms / 1000.0 + train_seconds
                   + validation_seconds + compute_seconds)
    return long_total / short_total


@dataclass
class MetricsReport:
    """Mean spectral metrics for one evaluation, Table-style."""

    rmse: float
    snr: float
    ssim: float
    kmeans_accuracy: float | None = None
    n_spectra: int = 0
    label: str = ""

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "rmse": self.rmse,
            "snr": self.snr,
            "ssim": self.ssim,
            "kmeans_accuracy": self.kmeans_accuracy,
            "n_spectra": self.n_spectra,
        }


def map_metrics(reference: np.ndarray, test: np.ndarray,
                window: int = SSIM_WINDOW, label: str = "") -> MetricsReport:
    """Mean of per-spectrum rmse/snr/ssim over matched rows."""
    reference = np.asarray(reference, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if reference.shape != test.shape:
        raise ValueError("reference/test shape mismatch")
    rmses, snrs, ssims = [], [], []
    for ref_row, t_row in zip(reference, test):
        rmses.append(rmse(ref_row, t_row))
        snrs.append(snr(ref_row, t_row))
        ssims.append(ssim(ref_row, t_row, window))
    return MetricsReport(
        rmse=float(np.mean(rmses)),
        snr=float(np.mean(snrs)),
        ssim=float(np.mean(ssims)),
        n_spectra=reference.shape[0],
        label=label,
    )


def mean_reports(reports: list[MetricsReport], label: str = "mean") -> MetricsReport:
    accs = [r.kmeans_accuracy for r in reports if r.kmeans_accuracy is not None]
    return MetricsReport(
        rmse=float(np.mean([r.rmse for r in reports])),
        snr=float(np.mean([r.snr for r in reports])),
        ssim=float(np.mean([r.ssim for r in reports])),
        kmeans_accuracy=float(np.mean(accs)) if accs else None,
        n_spectra=int(sum(r.n_spectra for r in reports)),
        label=label,
    )
