import numpy as np
import pytest

from rsdenoise import noisediag as nd
from rsdenoise import synthgen as sg
from rsdenoise.core import AcquisitionSet, HyperMap


def white_set(reps=1024, sigma=1.0, seed=5, channels=32):
    axis = sg.default_axis(channels)
    clean = HyperMap((1, 2), axis, np.full((2, channels), 4.0))
    model = sg.NoiseModel(read_sigma=sigma, seed=seed)
    return sg.synthesize_acquisitions(clean, model, reps, 5.0)


class TestBlockAverageCurve:
    def test_block_size_one_is_raw_std(self):
        aset = white_set(reps=64)
        curve = nd.block_average_curve(aset, [1])
        data = aset.data.astype(np.float64)
        std = data.std(axis=1, ddof=1)
        expected = float(np.sqrt((std**2).mean(axis=1)).mean())
        assert curve.noises()[0] == pytest.approx(expected, rel=1e-12)

    def test_white_noise_slope(self):
        aset = white_set()
        curve = nd.block_average_curve(aset, [1, 2, 4, 8, 16, 32, 64, 128, 256])
        slope, _, _ = nd.fit_loglog_slope(curve)
        assert slope == pytest.approx(-0.5, abs=0.05)

    def test_flicker_floor_departure(self):
        axis = sg.default_axis(32)
        clean = HyperMap((1, 2), axis, np.full((2, 32), 4.0))
        model = sg.NoiseModel(read_sigma=1.0, flicker_amp=0.25, seed=5)
        aset = sg.synthesize_acquisitions(clean, model, 1024, 5.0)
        curve = nd.block_average_curve(aset, [1, 2, 4, 8, 16, 32, 64, 128, 256])
        excess, resid_std = nd.flicker_departure(curve)
        assert excess >= 3.0 * resid_std

    def test_block_size_larger_than_r(self):
        aset = white_set(reps=16)
        with pytest.raises(ValueError, match="outside"):
            nd.block_average_curve(aset, [32])

    def test_too_few_blocks(self):
        aset = white_set(reps=16)
        with pytest.raises(ValueError, match="block"):
            nd.block_average_curve(aset, [12])

    def test_deterministic(self):
        aset = white_set(reps=64)
        a = nd.block_average_curve(aset, [1, 2, 4]).noises()
        b = nd.block_average_curve(aset, [1, 2, 4]).noises()
        assert np.array_equal(a, b)

    def test_nonincreasing_for_white_noise(self):
        # statistical over seeds with one-sided tolerance
        violations = 0
        for seed in range(50):
            aset = white_set(reps=256, seed=seed, channels=8)
            noises = nd.block_average_curve(aset, [1, 4, 16, 64]).noises()
            if not np.all(np.diff(noises) <= 0.05 * noises[:-1]):
                violations += 1
        assert violations <= 2


class TestFitLogLogSlope:
    def test_exact_power_law(self):
        times = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
        curve = nd.AveragingCurve(
            points=tuple((t, 3.0 * t**-0.5) for t in times),
            integration_time_ms=5.0)
        slope, intercept, resid = nd.fit_loglog_slope(curve)
        assert slope == pytest.approx(-0.5, abs=1e-12)
        assert np.exp(intercept) == pytest.approx(3.0)
        assert resid < 1e-12

    def test_constant_curve(self):
        curve = nd.AveragingCurve(
            points=tuple((t, 2.0) for t in (1.0, 2.0, 4.0)),
            integration_time_ms=5.0)
        slope, _, _ = nd.fit_loglog_slope(curve)
        assert slope == pytest.approx(0.0, abs=1e-12)

    def test_two_regime_has_large_residual(self):
        times = np.array([1, 2, 4, 8, 16, 32, 64, 128], dtype=float)
        white = times**-0.5
        flat = np.maximum(white, 0.35)
        c_white = nd.AveragingCurve(
            points=tuple(zip(times, white)), integration_time_ms=5.0)
        c_mixed = nd.AveragingCurve(
            points=tuple(zip(times, flat)), integration_time_ms=5.0)
        _, _, resid_white = nd.fit_loglog_slope(c_white)
        _, _, resid_mixed = nd.fit_loglog_slope(c_mixed)
        assert resid_mixed > 5 * max(resid_white, 1e-9)

    def test_needs_three_points(self):
        curve = nd.AveragingCurve(points=((1.0, 1.0), (2.0, 0.7)),
                                  integration_time_ms=5.0)
        with pytest.raises(ValueError, match="3"):
            nd.fit_loglog_slope(curve)

    def test_positive_values_required(self):
        curve = nd.AveragingCurve(points=((1.0, 1.0), (2.0, 0.0), (4.0, 0.5)),
                                  integration_time_ms=5.0)
        with pytest.raises(ValueError, match="positive"):
            nd.fit_loglog_slope(curve)
