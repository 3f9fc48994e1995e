import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsdenoise import preprocess as pp
from rsdenoise import synthgen as sg
from rsdenoise.core import AcquisitionSet, Spectrum


def spectrum(values, lo=100.0, hi=200.0):
    values = np.asarray(values, dtype=np.float64)
    return Spectrum(np.linspace(lo, hi, values.size), values)


class TestStandardize:
    def test_identity_when_already_target(self):
        s = spectrum(np.arange(736.0))
        out = pp.standardize(s, 0, 0, 736)
        assert np.array_equal(out.intensities, s.intensities)
        assert np.array_equal(out.shift_axis, s.shift_axis)

    def test_exact_truncation_no_interpolation(self):
        s = spectrum(np.arange(800.0))
        out = pp.standardize(s, 32, 32, 736)
        assert np.array_equal(out.intensities, s.intensities[32:768])

    def test_linear_ramp_preserved(self):
        s = spectrum(np.linspace(2.0, 7.0, 1000))
        out = pp.standardize(s, 0, 0, 736)
        expected = 2.0 + (out.shift_axis - s.shift_axis[0]) \
            / (s.shift_axis[-1] - s.shift_axis[0]) * 5.0
        assert np.abs(out.intensities - expected).max() < 1e-12

    def test_too_aggressive_crop(self):
        s = spectrum(np.arange(100.0))
        with pytest.raises(ValueError, match="at least"):
            pp.standardize(s, 40, 40, 736)


class TestDespike:
    def test_flat_spectrum_untouched(self):
        s = spectrum(np.ones(200))
        out, spikes = pp.despike(s)
        assert np.array_equal(out.intensities, s.intensities)
        assert spikes.size == 0

    def test_single_spike_replaced_by_neighbor_mean(self):
        g = np.random.default_rng(0)
        base = 10.0 + g.normal(0, 1.0, 300)
        x = base.copy()
        x[150] += 50.0
        out, spikes = pp.despike(spectrum(x))
        assert 150 in spikes
        expected = 0.5 * (x[149] + x[151])
        assert abs(out.intensities[150] - expected) < 1e-9
        untouched = np.delete(np.arange(300), spikes)
        assert np.array_equal(out.intensities[untouched], x[untouched])

    def test_two_channel_spike_removed(self):
        g = np.random.default_rng(1)
        x = 5.0 + g.normal(0, 1.0, 300)
        x[100] += 60.0
        x[101] += 45.0
        out, spikes = pp.despike(spectrum(x))
        assert {100, 101} <= set(spikes.tolist())
        assert out.intensities[100] < 10.0 and out.intensities[101] < 10.0

    def test_broad_peak_untouched(self):
        axis = np.linspace(100.0, 500.0, 300)
        x = 1.0 + sg.lorentzian(axis, 300.0, 20.0 * (axis[1] - axis[0]), 100.0)
        out, spikes = pp.despike(Spectrum(axis, x))
        assert spikes.size == 0
        assert np.array_equal(out.intensities, x)

    def test_idempotent(self):
        g = np.random.default_rng(2)
        x = 10.0 + g.normal(0, 1.0, 256)
        x[[40, 120, 200]] += np.array([30.0, 80.0, 55.0])
        once, _ = pp.despike(spectrum(x))
        twice, again = pp.despike(once)
        assert np.array_equal(once.intensities, twice.intensities)
        assert again.size == 0

    def test_length_precondition(self):
        with pytest.raises(ValueError, match="exceed"):
            pp.despike(spectrum(np.ones(30)), pp.DespikeParams(window=40))


class TestBaseline:
    def test_pure_quartic_annihilated(self):
        axis = np.linspace(100.0, 1800.0, 736)
        t = (axis - axis[0]) / (axis[-1] - axis[0])
        y = 5.0 + 3 * t - 2 * t**2 + 0.5 * t**3 + 4 * t**4
        out = pp.baseline_correct(Spectrum(axis, y))
        assert np.abs(out.intensities).max() < 1e-6 * np.abs(y).max()

    def test_zero_spectrum_stays_zero(self):
        out = pp.baseline_correct(spectrum(np.zeros(64)))
        assert np.abs(out.intensities).max() < 1e-12

    def test_peaks_recovered_over_quartic(self):
        axis = np.linspace(100.0, 1800.0, 736)
        t = (axis - axis[0]) / (axis[-1] - axis[0])
        background = 20.0 + 10 * t - 8 * t**2 + 3 * t**4
        peaks = [(400.0, 8.0, 5.0), (900.0, 12.0, 8.0), (1500.0, 6.0, 4.0)]
        signal = np.zeros_like(axis)
        for c, w, a in peaks:
            signal += sg.lorentzian(axis, c, w, a)
        out = pp.baseline_correct(Spectrum(axis, background + signal))
        for c, w, a in peaks:
            idx = np.argmin(np.abs(axis - c))
            assert out.intensities[idx] == pytest.approx(signal[idx], rel=0.05)

    def test_polynomial_shift_invariance(self):
        axis = np.linspace(100.0, 1800.0, 736)
        t = (axis - axis[0]) / (axis[-1] - axis[0])
        signal = sg.lorentzian(axis, 700.0, 10.0, 6.0)
        poly = 3.0 - 2 * t + t**2 + 0.3 * t**3 - 0.1 * t**4
        a = pp.baseline_correct(Spectrum(axis, signal))
        b = pp.baseline_correct(Spectrum(axis, signal + poly))
        scale = np.abs(signal).max()
        assert np.abs(a.intensities - b.intensities).max() < 1e-6 * scale


class TestNormalizeRescale:
    def test_three_four_five(self):
        s = spectrum([3.0, 4.0])
        out = pp.l2_normalize(s)
        assert np.allclose(out.intensities, [0.6, 0.8], atol=1e-15)
        assert out.norm_original == pytest.approx(5.0)

    def test_unit_vector_unchanged(self):
        s = spectrum([1.0, 0.0, 0.0])
        out = pp.l2_normalize(s)
        assert np.allclose(out.intensities, s.intensities)
        assert out.norm_original == pytest.approx(1.0)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError, match="zero-norm"):
            pp.l2_normalize(spectrum(np.zeros(4)))

    def test_rescale_requires_norm(self):
        with pytest.raises(ValueError, match="norm"):
            pp.rescale(spectrum([1.0, 2.0]))

    def test_rescale_sets_norm(self):
        s = Spectrum([1.0, 2.0], [0.6, 0.8], norm_original=2.5)
        out = pp.rescale(s)
        assert np.linalg.norm(out.intensities) == pytest.approx(2.5)
        assert out.norm_original is None

    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=50))
    @settings(max_examples=50, deadline=None)
    def test_inverse_pair(self, values):
        arr = np.asarray(values)
        if np.linalg.norm(arr) < 1e-9:
            return
        s = spectrum(arr, lo=0.0, hi=1.0)
        back = pp.rescale(pp.l2_normalize(s))
        assert np.abs(back.intensities - arr).max() < 1e-10 * max(
            1.0, np.abs(arr).max())


class TestAveragedReference:
    def test_single_rep_identity(self, small_noisy_set):
        one = AcquisitionSet(small_noisy_set.grid_shape, 5.0,
                             small_noisy_set.shift_axis,
                             small_noisy_set.data[:, :1, :])
        ref = pp.averaged_reference(one)
        assert np.allclose(ref.data,
                           one.data[:, 0, :].astype(np.float64), atol=0)

    def test_two_rep_mean(self):
        data = np.zeros((1, 2, 3), dtype=np.float32)
        data[0, 0] = 1.0
        data[0, 1] = 3.0
        aset = AcquisitionSet((1, 1), 5.0, [1.0, 2.0, 3.0], data)
        ref = pp.averaged_reference(aset)
        assert np.allclose(ref.data, 2.0)

    def test_lln_bound(self):
        axis = sg.default_axis(32)
        from rsdenoise.core import HyperMap
        clean = HyperMap((1, 1), axis, np.full((1, 32), 4.0))
        model = sg.NoiseModel(read_sigma=1.0, seed=21)
        aset = sg.synthesize_acquisitions(clean, model, 1500, 1.0)
        ref = pp.averaged_reference(aset)
        assert np.abs(ref.data - 4.0).max() < 4.0 / np.sqrt(1500)

    def test_commutes_with_scaling(self, small_noisy_set):
        ref1 = pp.averaged_reference(small_noisy_set)
        scaled = small_noisy_set.with_data(small_noisy_set.data * 2.0)
        ref2 = pp.averaged_reference(scaled)
        assert np.allclose(ref2.data, 2.0 * ref1.data, rtol=1e-6)


class TestDownsample:
    def test_keep_all_identity(self, small_noisy_set):
        out = pp.downsample_repetitions(small_noisy_set,
                                        small_noisy_set.repetitions, seed=1)
        assert np.array_equal(out.data, small_noisy_set.data)

    def test_membership_and_count(self, small_noisy_set):
        out = pp.downsample_repetitions(small_noisy_set, 3, seed=5)
        assert out.repetitions == 3
        for p in range(out.n_points):
            pool = {tuple(row) for row in small_noisy_set.data[p]}
            for r in range(3):
                assert tuple(out.data[p, r]) in pool

    def test_seeded_determinism(self, small_noisy_set):
        a = pp.downsample_repetitions(small_noisy_set, 4, seed=9)
        b = pp.downsample_repetitions(small_noisy_set, 4, seed=9)
        assert np.array_equal(a.data, b.data)

    def test_keep_too_many(self, small_noisy_set):
        with pytest.raises(ValueError, match="cannot keep"):
            pp.downsample_repetitions(small_noisy_set, 99, seed=0)
