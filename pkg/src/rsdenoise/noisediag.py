"""Block-averaging noise diagnostics: noise versus total averaging time,
white-noise slope fitting and flicker-floor departure detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AcquisitionSet


@dataclass(frozen=True)
class AveragingCurve:
    """Noise estimate per total averaging time, for one integration time."""

    points: tuple  # ((total_time_s, noise_estimate), ...)
    integration_time_ms: float
    aggregation: str = "rms-channels,mean-points"

    def times(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    def noises(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


def block_average_curve(aset: AcquisitionSet,
                        block_sizes) -> AveragingCurve:
    """Noise after averaging m consecutive repetitions, per block size m.

    Repetitions are partitioned into floor(R/m) consecutive blocks (order
    preserved, so temporal correlations survive); the noise estimate is
    the std across block means, taken root-mean-square over channels and
    then averaged over points.
    """
    r = aset.repetitions
    if r < 2:
        raise ValueError("need at least 2 repetitions")
    block_sizes = [int(m) for m in block_sizes]
    if not block_sizes:
        raise ValueError("no block sizes given")
    data = aset.data.astype(np.float64)
    points = []
    for m in sorted(block_sizes):
        if m < 1 or m > r:
            raise ValueError(f"block size {m} outside [1, {r}]")
        n_blocks = r // m
        if n_blocks < 2:
            raise ValueError(
                f"block size {m} leaves {n_blocks} block(s); need >= 2"
            )
        blocks = data[:, :n_blocks * m, :].reshape(
            aset.n_points, n_blocks, m, aset.n_channels)
        means = blocks.mean(axis=2)
        std = means.std(axis=1, ddof=1)  # (points, channels)
        per_point = np.sqrt(np.mean(std**2, axis=1))
        noise = float(per_point.mean())
        points.append((m * aset.integration_time_ms / 1000.0, noise))
    return AveragingCurve(points=tuple(points),
                          integration_time_ms=aset.integration_time_ms)


def fit_loglog_slope(curve: AveragingCurve) -> tuple[float, float, float]:
    """Ordinary least squares on (log T, log noise).

    Returns (slope, intercept, residual_std); white noise averages down
    with slope -1/2.
    """
    times = curve.times()
    noises = curve.noises()
    if times.size < 3:
        raise ValueError("need at least 3 curve points")
    if np.any(times <= 0) or np.any(noises <= 0):
        raise ValueError("times and noise estimates must be positive")
    lt = np.log(times)
    ln = np.log(noises)
    slope, intercept = np.polyfit(lt, ln, 1)
    resid = ln - (slope * lt + intercept)
    return float(slope), float(intercept), float(resid.std())


def flicker_departure(curve: AveragingCurve,
                      head: int | None = None) -> tuple[float, float]:
    """Departure of the last curve point from the white-noise extrapolation.

    Fits the log-log line on the first ``head`` points (all but the last
    two by default) and returns (excess, residual_std), where excess is
    the last point's log-noise above the extrapolated line. A flicker
    floor shows up as excess of several residual stds.
    """
    n = len(curve.points)
    if head is None:
        head = n - 2
    if not 3 <= head < n:
        raise ValueError(f"head must be in [3, {n - 1}]")
    head_curve = AveragingCurve(points=curve.points[:head],
                                integration_time_ms=curve.integration_time_ms)
    slope, intercept, resid_std = fit_loglog_slope(head_curve)
    t_last, n_last = curve.points[-1]
    predicted = slope * np.log(t_last) + intercept
    excess = float(np.log(n_last) - predicted)
    return excess, resid_std
