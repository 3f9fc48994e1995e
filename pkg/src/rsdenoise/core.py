"""Shared data model and dataset I/O for 1D hyperspectral acquisitions.

A dataset on disk is a directory holding ``manifest.json`` plus a raw
little-endian float32 payload (``data.f32le``) in (point, repetition,
channel) order. The shift axis is stored once in the manifest, never per
spectrum. Small human-auditable fixtures use CSV instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"
PAYLOAD_NAME = "data.f32le"


class DatasetError(Exception):
    """Raised on malformed or inconsistent dataset files."""


def _as_axis(values) -> np.ndarray:
    axis = np.asarray(values, dtype=np.float64)
    if axis.ndim != 1 or axis.size < 1:
        raise ValueError("shift axis must be a nonempty 1D sequence")
    if axis.size > 1 and not np.all(np.diff(axis) > 0):
        raise ValueError("shift axis must be strictly increasing")
    return axis


@dataclass(frozen=True)
class Spectrum:
    """One intensity trace on a shared Raman-shift axis.

    ``norm_original`` records the L2 norm a spectrum had before
    normalization, so it can be rescaled back for physical interpretation.
    """

    shift_axis: np.ndarray
    intensities: np.ndarray
    norm_original: float | None = None

    def __post_init__(self):
        axis = _as_axis(self.shift_axis)
        intens = np.asarray(self.intensities, dtype=np.float64)
        if intens.ndim != 1:
            raise ValueError("intensities must be 1D")
        if intens.shape[0] != axis.shape[0]:
            raise ValueError(
                f"axis/intensity length mismatch: {axis.shape[0]} vs {intens.shape[0]}"
            )
        if self.norm_original is not None and not self.norm_original > 0:
            raise ValueError("norm_original must be > 0 when present")
        object.__setattr__(self, "shift_axis", axis)
        object.__setattr__(self, "intensities", intens)

    def __len__(self) -> int:
        return self.intensities.shape[0]

    def with_intensities(self, values, norm_original=None) -> Spectrum:
        return Spectrum(self.shift_axis, values, norm_original)


@dataclass(frozen=True)
class AcquisitionSet:
    """Grid of spatial points x repeated acquisitions at one integration time.

    ``data`` has shape (points, repetitions, channels) and dtype float32,
    matching the on-disk payload so that save/load round-trips are
    bit-exact. Numeric processing upcasts to float64 on access.
    """

    grid_shape: tuple[int, int]
    integration_time_ms: float
    shift_axis: np.ndarray
    data: np.ndarray
    point_coords: np.ndarray | None = None

    def __post_init__(self):
        rows, cols = self.grid_shape
        if rows < 1 or cols < 1:
            raise ValueError("grid_shape must be positive")
        if not self.integration_time_ms > 0:
            raise ValueError("integration_time_ms must be positive")
        axis = _as_axis(self.shift_axis)
        data = np.ascontiguousarray(self.data, dtype=np.float32)
        if data.ndim != 3:
            raise ValueError("data must have shape (points, repetitions, channels)")
        if data.shape[0] != rows * cols:
            raise ValueError(
                f"data holds {data.shape[0]} points, grid needs {rows * cols}"
            )
        if data.shape[2] != axis.shape[0]:
            raise ValueError(
                f"channel count {data.shape[2]} does not match axis length {axis.shape[0]}"
            )
        object.__setattr__(self, "grid_shape", (int(rows), int(cols)))
        object.__setattr__(self, "shift_axis", axis)
        object.__setattr__(self, "data", data)

    @property
    def n_points(self) -> int:
        return self.data.shape[0]

    @property
    def repetitions(self) -> int:
        return self.data.shape[1]

    @property
    def n_channels(self) -> int:
        return self.data.shape[2]

    def spectrum(self, point: int, rep: int) -> Spectrum:
        return Spectrum(self.shift_axis, self.data[point, rep].astype(np.float64))

    def intensity_matrix(self) -> np.ndarray:
        """All spectra as a float64 matrix of shape (points*reps, channels)."""
        return self.data.reshape(-1, self.n_channels).astype(np.float64)

    def subset_points(self, indices) -> AcquisitionSet:
        """New set holding only the given points, reshaped to a 1xN grid."""
        idx = np.asarray(indices, dtype=np.intp)
        if idx.size == 0:
            raise ValueError("empty point subset")
        coords = self.point_coords[idx] if self.point_coords is not None else None
        return AcquisitionSet(
            grid_shape=(1, idx.size),
            integration_time_ms=self.integration_time_ms,
            shift_axis=self.shift_axis,
            data=self.data[idx],
            point_coords=coords,
        )

    def with_data(self, data) -> AcquisitionSet:
        return replace(self, data=np.asarray(data, dtype=np.float32))


@dataclass(frozen=True)
class HyperMap:
    """One spectrum per grid point (a repetitions=1 view of an acquisition).

    Unlike :class:`AcquisitionSet` this holds processed float64 intensities
    plus optional per-point original norms for rescaling.
    """

    grid_shape: tuple[int, int]
    shift_axis: np.ndarray
    data: np.ndarray
    norms: np.ndarray | None = None

    def __post_init__(self):
        rows, cols = self.grid_shape
        axis = _as_axis(self.shift_axis)
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] != rows * cols:
            raise ValueError(
                f"data must have shape ({rows * cols}, channels), got {data.shape}"
            )
        if data.shape[1] != axis.shape[0]:
            raise ValueError("channel count does not match axis length")
        norms = self.norms
        if norms is not None:
            norms = np.asarray(norms, dtype=np.float64)
            if norms.shape != (data.shape[0],):
                raise ValueError("norms must hold one value per point")
        object.__setattr__(self, "grid_shape", (int(rows), int(cols)))
        object.__setattr__(self, "shift_axis", axis)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "norms", norms)

    @property
    def n_points(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    def spectrum(self, point: int) -> Spectrum:
        norm = float(self.norms[point]) if self.norms is not None else None
        return Spectrum(self.shift_axis, self.data[point], norm)


@dataclass(frozen=True)
class DatasetManifest:
    """Typed view of ``manifest.json``."""

    version: int
    rows: int
    cols: int
    repetitions: int
    integration_time_ms: float
    channels: int
    axis: np.ndarray
    payload: str = PAYLOAD_NAME
    order: str = "point,rep,channel"
    extra: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        doc = {
            "version": self.version,
            "rows": self.rows,
            "cols": self.cols,
            "repetitions": self.repetitions,
            "integration_time_ms": self.integration_time_ms,
            "channels": self.channels,
            "axis": [float(v) for v in self.axis],
            "payload": self.payload,
            "order": self.order,
        }
        doc.update(self.extra)
        return doc


def _read_manifest(path: Path) -> DatasetManifest:
    manifest_path = path / MANIFEST_NAME
    if not manifest_path.is_file():
        raise DatasetError(f"missing manifest: {manifest_path}")
    doc = json.loads(manifest_path.read_text())
    try:
        version = int(doc["version"])
        if version != FORMAT_VERSION:
            raise DatasetError(f"unsupported format version {version}")
        known = {
            "version", "rows", "cols", "repetitions", "integration_time_ms",
            "channels", "axis", "payload", "order",
        }
        manifest = DatasetManifest(
            version=version,
            rows=int(doc["rows"]),
            cols=int(doc["cols"]),
            repetitions=int(doc["repetitions"]),
            integration_time_ms=float(doc["integration_time_ms"]),
            channels=int(doc["channels"]),
            axis=_as_axis(doc["axis"]),
            payload=str(doc["payload"]),
            order=str(doc["order"]),
            extra={k: v for k, v in doc.items() if k not in known},
        )
    except KeyError as exc:
        raise DatasetError(f"manifest missing field {exc}") from exc
    except ValueError as exc:
        raise DatasetError(str(exc)) from exc
    if manifest.channels != manifest.axis.shape[0]:
        raise DatasetError(
            f"manifest declares {manifest.channels} channels but axis has "
            f"{manifest.axis.shape[0]} entries"
        )
    if manifest.order != "point,rep,channel":
        raise DatasetError(f"unsupported payload order {manifest.order!r}")
    return manifest


def save_dataset(aset: AcquisitionSet, path) -> None:
    """Write manifest + float32 payload. Deterministic bytes for equal input."""
    if aset.n_points == 0 or aset.repetitions == 0 or aset.n_channels == 0:
        raise DatasetError("empty dataset")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    rows, cols = aset.grid_shape
    manifest = DatasetManifest(
        version=FORMAT_VERSION,
        rows=rows,
        cols=cols,
        repetitions=aset.repetitions,
        integration_time_ms=float(aset.integration_time_ms),
        channels=aset.n_channels,
        axis=aset.shift_axis,
    )
    text = json.dumps(manifest.to_json_dict(), sort_keys=True, indent=1)
    (path / MANIFEST_NAME).write_text(text + "\n")
    payload = aset.data.astype("<f4", copy=False)
    (path / PAYLOAD_NAME).write_bytes(payload.tobytes())


def load_dataset(path) -> AcquisitionSet:
    """Load a manifest + payload directory written by :func:`save_dataset`."""
    path = Path(path)
    manifest = _read_manifest(path)
    payload_path = path / manifest.payload
    if not payload_path.is_file():
        raise DatasetError(f"missing payload: {payload_path}")
    raw = payload_path.read_bytes()
    expected = manifest.rows * manifest.cols * manifest.repetitions * manifest.channels
    if len(raw) != expected * 4:
        raise DatasetError(
            f"payload size mismatch: expected {expected * 4} bytes "
            f"({expected} float32 values), found {len(raw)}"
        )
    data = np.frombuffer(raw, dtype="<f4").reshape(
        manifest.rows * manifest.cols, manifest.repetitions, manifest.channels
    )
    return AcquisitionSet(
        grid_shape=(manifest.rows, manifest.cols),
        integration_time_ms=manifest.integration_time_ms,
        shift_axis=manifest.axis,
        data=data,
    )


def save_map(hmap: HyperMap, path) -> None:
    """Persist a HyperMap using the dataset format with repetitions=1.

    Per-point norms, when present, are carried in the manifest.
    """
    if hmap.n_points == 0 or hmap.n_channels == 0:
        raise DatasetError("empty dataset")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    rows, cols = hmap.grid_shape
    extra = {}
    if hmap.norms is not None:
        extra["norms"] = [float(v) for v in hmap.norms]
    manifest = DatasetManifest(
        version=FORMAT_VERSION,
        rows=rows,
        cols=cols,
        repetitions=1,
        integration_time_ms=1.0,
        channels=hmap.n_channels,
        axis=hmap.shift_axis,
        extra=extra,
    )
    text = json.dumps(manifest.to_json_dict(), sort_keys=True, indent=1)
    (path / MANIFEST_NAME).write_text(text + "\n")
    payload = hmap.data.astype("<f8", copy=False)
    (path / PAYLOAD_NAME).write_bytes(payload.tobytes())


def load_map(path) -> HyperMap:
    path = Path(path)
    manifest = _read_manifest(path)
    payload_path = path / manifest.payload
    if not payload_path.is_file():
        raise DatasetError(f"missing payload: {payload_path}")
    raw = payload_path.read_bytes()
    n_points = manifest.rows * manifest.cols
    expected = n_points * manifest.channels
    if len(raw) != expected * 8:
        raise DatasetError(
            f"payload size mismatch: expected {expected * 8} bytes, found {len(raw)}"
        )
    data = np.frombuffer(raw, dtype="<f8").reshape(n_points, manifest.channels)
    norms = manifest.extra.get("norms")
    if norms is not None:
        norms = np.asarray(norms, dtype=np.float64)
    return HyperMap(
        grid_shape=(manifest.rows, manifest.cols),
        shift_axis=manifest.axis,
        data=data,
        norms=norms,
    )


def save_csv(aset: AcquisitionSet, path) -> None:
    """CSV export for small fixtures: header ``shift,s0,s1,...``.

    Columns are point-major: column ``s{p*R + r}`` is point p, repetition r.
    """
    path = Path(path)
    n = aset.n_points * aset.repetitions
    matrix = aset.data.reshape(n, aset.n_channels)
    with path.open("w") as fh:
        fh.write("shift," + ",".join(f"s{i}" for i in range(n)) + "\n")
        for c in range(aset.n_channels):
            row = [repr(float(aset.shift_axis[c]))]
            row += [repr(float(matrix[i, c])) for i in range(n)]
            fh.write(",".join(row) + "\n")


def load_csv(path, grid_shape, repetitions, integration_time_ms) -> AcquisitionSet:
    """CSV import; grid and repetition structure cannot be inferred from the file."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
        if not header.startswith("shift"):
            raise DatasetError("CSV must start with a 'shift,...' header row")
        body = np.loadtxt(fh, delimiter=",", ndmin=2, dtype=np.float64)
    axis = body[:, 0]
    matrix = body[:, 1:].T
    rows, cols = grid_shape
    expected = rows * cols * repetitions
    if matrix.shape[0] != expected:
        raise DatasetError(
            f"CSV holds {matrix.shape[0]} spectra, expected {expected}"
        )
    data = matrix.reshape(rows * cols, repetitions, axis.shape[0])
    return AcquisitionSet(
        grid_shape=(rows, cols),
        integration_time_ms=integration_time_ms,
        shift_axis=axis,
        data=data,
    )


def save_map_csv(hmap: HyperMap, path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        fh.write("shift," + ",".join(f"s{i}" for i in range(hmap.n_points)) + "\n")
        for c in range(hmap.n_channels):
            row = [repr(float(hmap.shift_axis[c]))]
            row += [repr(float(hmap.data[i, c])) for i in range(hmap.n_points)]
            fh.write(",".join(row) + "\n")
