import json

import numpy as np
import pytest

from rsdenoise import core
from rsdenoise import synthgen as sg


def make_set(points=4, reps=3, channels=16, seed=0):
    g = np.random.default_rng(seed)
    return core.AcquisitionSet(
        grid_shape=(2, points // 2),
        integration_time_ms=5.0,
        shift_axis=np.linspace(100.0, 200.0, channels),
        data=g.random((points, reps, channels), dtype=np.float32),
    )


class TestSpectrum:
    def test_invariants(self):
        s = core.Spectrum([1.0, 2.0, 3.0], [0.0, 1.0, 2.0])
        assert len(s) == 3

    def test_axis_must_increase(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            core.Spectrum([1.0, 1.0, 3.0], [0.0, 1.0, 2.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            core.Spectrum([1.0, 2.0], [0.0, 1.0, 2.0])

    def test_norm_positive(self):
        with pytest.raises(ValueError, match="norm_original"):
            core.Spectrum([1.0, 2.0], [0.0, 1.0], norm_original=0.0)


class TestBinaryRoundTrip:
    def test_save_load_bit_identical(self, tmp_path):
        aset = make_set()
        core.save_dataset(aset, tmp_path / "d")
        loaded = core.load_dataset(tmp_path / "d")
        assert np.array_equal(loaded.data, aset.data)
        assert np.array_equal(loaded.shift_axis, aset.shift_axis)
        assert loaded.grid_shape == aset.grid_shape
        assert loaded.integration_time_ms == aset.integration_time_ms

    def test_two_saves_byte_identical(self, tmp_path):
        aset = make_set()
        core.save_dataset(aset, tmp_path / "a")
        core.save_dataset(aset, tmp_path / "b")
        for name in (core.MANIFEST_NAME, core.PAYLOAD_NAME):
            assert (tmp_path / "a" / name).read_bytes() == \
                (tmp_path / "b" / name).read_bytes()

    def test_axis_shared_after_load(self, tmp_path):
        aset = make_set()
        core.save_dataset(aset, tmp_path / "d")
        loaded = core.load_dataset(tmp_path / "d")
        specs = [loaded.spectrum(p, r) for p in range(2) for r in range(2)]
        for s in specs[1:]:
            assert np.array_equal(s.shift_axis, specs[0].shift_axis)

    def test_large_synthetic_round_trip(self, tmp_path):
        # compact stand-in for the full-map scale check: many spectra
        lib = sg.gen_phase_library(2, 2, seed=1, axis=sg.default_axis(64))
        clean, _ = sg.gen_phase_map(lib, (20, 20), 6, seed=2)
        aset = sg.synthesize_acquisitions(
            clean, sg.NoiseModel(read_sigma=0.3, seed=3), 4, 5.0)
        core.save_dataset(aset, tmp_path / "d")
        loaded = core.load_dataset(tmp_path / "d")
        assert np.array_equal(loaded.data, aset.data)


class TestManifestErrors:
    def test_missing_manifest(self, tmp_path):
        with pytest.raises(core.DatasetError, match="missing manifest"):
            core.load_dataset(tmp_path)

    def test_payload_size_mismatch(self, tmp_path):
        aset = make_set(channels=16)
        core.save_dataset(aset, tmp_path / "d")
        payload = (tmp_path / "d" / core.PAYLOAD_NAME).read_bytes()
        (tmp_path / "d" / core.PAYLOAD_NAME).write_bytes(payload[:-4])
        with pytest.raises(core.DatasetError, match="payload size mismatch"):
            core.load_dataset(tmp_path / "d")

    def test_unsupported_version(self, tmp_path):
        aset = make_set()
        core.save_dataset(aset, tmp_path / "d")
        mpath = tmp_path / "d" / core.MANIFEST_NAME
        doc = json.loads(mpath.read_text())
        doc["version"] = 99
        mpath.write_text(json.dumps(doc))
        with pytest.raises(core.DatasetError, match="version"):
            core.load_dataset(tmp_path / "d")

    def test_non_increasing_axis(self, tmp_path):
        aset = make_set()
        core.save_dataset(aset, tmp_path / "d")
        mpath = tmp_path / "d" / core.MANIFEST_NAME
        doc = json.loads(mpath.read_text())
        doc["axis"] = doc["axis"][::-1]
        mpath.write_text(json.dumps(doc))
        with pytest.raises(core.DatasetError, match="increasing"):
            core.load_dataset(tmp_path / "d")

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            core.AcquisitionSet((0, 0), 5.0, [1.0], np.zeros((0, 1, 1)))


class TestCsv:
    def test_hand_built_fixture(self, tmp_path):
        # 2 points, 3 reps, 4 channels
        lines = ["shift," + ",".join(f"s{i}" for i in range(6))]
        for c in range(4):
            vals = [100.0 + c] + [10.0 * i + c for i in range(6)]
            lines.append(",".join(str(v) for v in vals))
        path = tmp_path / "toy.csv"
        path.write_text("\n".join(lines) + "\n")
        aset = core.load_csv(path, grid_shape=(1, 2), repetitions=3,
                             integration_time_ms=5.0)
        assert aset.n_points == 2
        assert aset.repetitions == 3
        assert aset.n_channels == 4
        assert aset.data.shape == (2, 3, 4)
        # column s4 = point 1, rep 1
        assert aset.data[1, 1, 0] == pytest.approx(40.0)

    def test_round_trip(self, tmp_path):
        aset = make_set()
        core.save_csv(aset, tmp_path / "t.csv")
        loaded = core.load_csv(tmp_path / "t.csv", aset.grid_shape,
                               aset.repetitions, aset.integration_time_ms)
        assert np.allclose(loaded.data, aset.data, atol=0)

    def test_wrong_spectrum_count(self, tmp_path):
        aset = make_set()
        core.save_csv(aset, tmp_path / "t.csv")
        with pytest.raises(core.DatasetError, match="expected"):
            core.load_csv(tmp_path / "t.csv", (3, 3), 5, 5.0)


class TestMapRoundTrip:
    def test_map_with_norms(self, tmp_path):
        g = np.random.default_rng(1)
        hmap = core.HyperMap((2, 2), np.linspace(0, 1, 8),
                             g.random((4, 8)), norms=g.random(4) + 0.5)
        core.save_map(hmap, tmp_path / "m")
        loaded = core.load_map(tmp_path / "m")
        assert np.array_equal(loaded.data, hmap.data)
        assert np.array_equal(loaded.norms, hmap.norms)
