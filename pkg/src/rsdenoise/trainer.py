"""Noise2Noise training: dynamic pairing of repeated acquisitions,
mean-squared loss, Adam, grouped k-fold cross-validation and full-map
inference with norm restoration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import autoencoder as ae
from .clustering import kmeans
from .core import AcquisitionSet, HyperMap
from .metrics import MetricsReport, clustering_accuracy, map_metrics, mean_reports
from .preprocess import l2_normalize_rows

_TAG_PAIRS = 149
_TAG_SHUFFLE = 151
_TAG_FOLDS = 157


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during optimization."""


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer, pairing, fold and precision settings for one run."""

    learning_rate: float = 5e-4
    batch_size: int = 128
    epochs: int = 500
    folds: int = 5
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    pairing: str = "dynamic"
    dtype: str = "float64"  # "float32" trades precision for speed
    arch: ae.Architecture = ae.DEFAULT_ARCHITECTURE

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.pairing != "dynamic":
            raise ValueError(f"unknown pairing scheme {self.pairing!r}")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")


@dataclass
class TrainHistory:
    epoch_losses: list[float] = field(default_factory=list)
    wall_seconds: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {"epoch_losses": self.epoch_losses,
                "wall_seconds": self.wall_seconds}


def grouped_kfold(point_ids, k: int, seed: int) -> list[np.ndarray]:
    """Shuffled partition of spatial points into k folds, sizes within 1.

    All repetitions of a point follow it into its fold, which is what
    prevents train/validation leakage at the spatial-point level.
    """
    ids = np.asarray(point_ids)
    if ids.ndim != 1 or np.unique(ids).size != ids.size:
        raise ValueError("point_ids must be unique 1D ids")
    if k > ids.size:
        raise ValueError(f"cannot split {ids.size} points into {k} folds")
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(np.random.SeedSequence([seed, _TAG_FOLDS]))
    order = rng.permutation(ids.size)
    return [ids[np.sort(chunk)] for chunk in np.array_split(order, k)]


def sample_pairs(aset: AcquisitionSet, epoch: int, seed: int) -> np.ndarray:
    """Per-point derangement pairing for one epoch.

    Returns an array of shape (points, R, 2) where each row (i, j) pairs
    repetition i as input with repetition j != i as target; every
    repetition serves as input exactly once per epoch, and the pairing is
    resampled per epoch ("dynamic pairing").
    """
    r = aset.repetitions
    if r < 2:
        raise ValueError("need at least 2 repetitions to form pairs")
    pairs = np.empty((aset.n_points, r, 2), dtype=np.intp)
    pairs[:, :, 0] = np.arange(r)[None, :]
    for p in range(aset.n_points):
        rng = np.random.default_rng(
            np.random.SeedSequence([seed, _TAG_PAIRS, epoch, p]))
        perm = rng.permutation(r)
        while np.any(perm == np.arange(r)):
            perm = rng.permutation(r)
        pairs[p, :, 1] = perm
    return pairs


class AdamState:
    """First/second moment accumulators for one parameter list."""

    def __init__(self, arrays: list[np.ndarray], dtype):
        self.m = [np.zeros_like(a, dtype=dtype) for a in arrays]
        self.v = [np.zeros_like(a, dtype=dtype) for a in arrays]
        self.t = 0


def adam_step(values: list[np.ndarray], grads: list[np.ndarray],
              state: AdamState, lr: float, beta1: float, beta2: float,
              eps: float) -> None:
    """One bias-corrected Adam update, in place."""
    state.t += 1
    correction1 = 1.0 - beta1**state.t
    correction2 = 1.0 - beta2**state.t
    for value, grad, m, v in zip(values, grads, state.m, state.v):
        grad = np.asarray(grad, dtype=value.dtype)
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad**2
        m_hat = m / correction1
        v_hat = v / correction2
        value -= lr * m_hat / (np.sqrt(v_hat) + eps)


def _check_unit_rows(matrix: np.ndarray) -> None:
    norms = np.linalg.norm(matrix, axis=1)
    if not np.allclose(norms, 1.0, atol=1e-3):
        raise ValueError("training spectra must be L2-normalized")


def train(aset: AcquisitionSet, config: TrainConfig) -> tuple[ae.ModelParams, TrainHistory]:
    """Minimize the MSE between model(input) and the paired noisy target.

    Expects a preprocessed, L2-normalized acquisition set with R >= 2 and
    spectrum length divisible by the architecture's pooling factor.
    Deterministic for a fixed config seed.
    """
    if aset.repetitions < 2:
        raise ValueError("Noise2Noise training needs R >= 2")
    dtype = np.dtype(config.dtype)
    flat = np.ascontiguousarray(
        aset.data.reshape(-1, aset.n_channels), dtype=dtype)
    _check_unit_rows(flat)
    if aset.n_channels % config.arch.length_divisor != 0:
        raise ValueError(
            f"spectrum length {aset.n_channels} not divisible by "
            f"{config.arch.length_divisor}"
        )

    t_start = time.perf_counter()
    master = ae.build(config.arch, config.seed)
    work = ae.ModelParams(
        config.arch, config.seed,
        [w.astype(dtype) for w in master.weights],
        [b.astype(dtype) for b in master.biases],
    )
    tensors = work.weights + work.biases
    state = AdamState(tensors, dtype)
    r = aset.repetitions
    history = TrainHistory()
    for epoch in range(config.epochs):
        pairs = sample_pairs(aset, epoch, config.seed)
        in_idx = (np.arange(aset.n_points)[:, None] * r + pairs[:, :, 0]).ravel()
        tgt_idx = (np.arange(aset.n_points)[:, None] * r + pairs[:, :, 1]).ravel()
        rng = np.random.default_rng(
            np.random.SeedSequence([config.seed, _TAG_SHUFFLE, epoch]))
        order = rng.permutation(in_idx.size)
        in_idx, tgt_idx = in_idx[order], tgt_idx[order]
        sq_sum = 0.0
        count = 0
        for start in range(0, in_idx.size, config.batch_size):
            sel = slice(start, start + config.batch_size)
            xb = flat[in_idx[sel]]
            tb = flat[tgt_idx[sel]]
            out, cache = ae.forward(work, xb, record_cache=True)
            diff = out - tb
            gout = (2.0 / diff.size) * diff
            gw, gb = ae.backward(work, cache, gout.astype(dtype))
            adam_step(tensors, gw + gb, state, config.learning_rate,
                      config.adam_beta1, config.adam_beta2, config.adam_eps)
            sq_sum += float(np.sum(diff.astype(np.float64) ** 2))
            count += diff.size
        epoch_loss = sq_sum / count
        if not np.isfinite(epoch_loss):
            raise TrainingDiverged(
                f"non-finite loss {epoch_loss} at epoch {epoch}; "
                "reduce the learning rate or check the input scale"
            )
        history.epoch_losses.append(epoch_loss)
    final = ae.ModelParams(
        config.arch, config.seed,
        [w.astype(np.float64) for w in work.weights],
        [b.astype(np.float64) for b in work.biases],
    )
    history.wall_seconds["train"] = time.perf_counter() - t_start
    return final, history


def denoise_matrix(params: ae.ModelParams, matrix: np.ndarray,
                   batch_size: int = 256,
                   dtype: str = "float64") -> np.ndarray:
    """Forward pass over stacked spectra in bounded-memory batches."""
    matrix = np.asarray(matrix, dtype=np.dtype(dtype))
    out = np.empty(matrix.shape, dtype=np.float64)
    for start in range(0, matrix.shape[0], batch_size):
        sel = slice(start, start + batch_size)
        y, _ = ae.forward(params, matrix[sel])
        out[sel] = y.astype(np.float64)
    return out


def denoise_map(params: ae.ModelParams, hmap: HyperMap,
                restore_norms: bool = True, batch_size: int = 256) -> HyperMap:
    """Denoise every spectrum of a normalized map.

    With ``restore_norms`` each output is multiplied by its recorded
    original norm (for visualization/physical scale); otherwise outputs
    stay at unit training scale for clustering.
    """
    if restore_norms and hmap.norms is None:
        raise ValueError("map carries no recorded norms to restore")
    out = denoise_matrix(params, hmap.data, batch_size=batch_size)
    if restore_norms:
        out = out * hmap.norms[:, None]
        return HyperMap(hmap.grid_shape, hmap.shift_axis, out, norms=None)
    return HyperMap(hmap.grid_shape, hmap.shift_axis, out, norms=hmap.norms)


@dataclass
class FoldReport:
    fold: int
    noisy: MetricsReport
    denoised: MetricsReport
    train_seconds: float
    val_points: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "fold": self.fold,
            "noisy": self.noisy.to_json_dict(),
            "denoised": self.denoised.to_json_dict(),
            "train_seconds": self.train_seconds,
            "val_points": [int(i) for i in self.val_points],
        }


@dataclass
class CrossValReport:
    folds: list[FoldReport]
    mean_noisy: MetricsReport
    mean_denoised: MetricsReport
    # held-out per-point mean of unit-scale denoised spectra, (points, channels)
    denoised_unit_mean: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        return {
            "folds": [f.to_json_dict() for f in self.folds],
            "mean_noisy": self.mean_noisy.to_json_dict(),
            "mean_denoised": self.mean_denoised.to_json_dict(),
        }


def cross_validate(aset: AcquisitionSet, reference: HyperMap,
                   config: TrainConfig,
                   n_clusters: int | None = None) -> CrossValReport:
    """Grouped k-fold Noise2Noise evaluation against a reference map.

    The acquisition set is expected despiked/baseline-corrected at the
    reference's intensity scale. Per fold, the model trains on the other
    folds' normalized spectra; held-out spectra are evaluated raw and
    denoised (rescaled back to their original norms) against the
    reference. K-means accuracy compares held-out clusterings of denoised
    versus reference spectra when ``n_clusters`` is given.
    """
    if reference.n_points != aset.n_points:
        raise ValueError("reference is not aligned with the acquisition set")
    points = np.arange(aset.n_points)
    folds = grouped_kfold(points, config.folds, config.seed)
    raw = aset.data.astype(np.float64)  # (P, R, C)
    p_n, r_n, c_n = raw.shape
    normalized, norms = l2_normalize_rows(raw.reshape(-1, c_n))
    normalized = normalized.reshape(p_n, r_n, c_n)
    norms = norms.reshape(p_n, r_n)
    ref_unit, _ = l2_normalize_rows(reference.data)

    reports: list[FoldReport] = []
    denoised_unit_mean = np.zeros((p_n, c_n))
    for fold_idx, val_points in enumerate(folds):
        train_points = np.setdiff1d(points, val_points)
        if np.intersect1d(train_points, val_points).size:
            raise RuntimeError("leakage: train and validation points overlap")
        train_set = AcquisitionSet(
            grid_shape=(1, train_points.size),
            integration_time_ms=aset.integration_time_ms,
            shift_axis=aset.shift_axis,
            data=normalized[train_points].astype(np.float32),
        )
        params, history = train(train_set, config)

        ref_rows = np.repeat(reference.data[val_points], r_n, axis=0)
        noisy_rows = raw[val_points].reshape(-1, c_n)
        noisy_report = map_metrics(ref_rows, noisy_rows, label="noisy")
        den_unit = denoise_matrix(
            params, normalized[val_points].reshape(-1, c_n),
            dtype=config.dtype)
        den_rows = den_unit * norms[val_points].reshape(-1)[:, None]
        den_report = map_metrics(ref_rows, den_rows, label="denoised")
        denoised_unit_mean[val_points] = den_unit.reshape(
            val_points.size, r_n, c_n).mean(axis=1)

        if n_clusters is not None:
            ref_labels = kmeans(ref_unit[val_points], n_clusters,
                                seed=config.seed).labels
            noisy_mean = normalized[val_points].mean(axis=1)
            noisy_labels = kmeans(noisy_mean, n_clusters,
                                  seed=config.seed).labels
            den_labels = kmeans(denoised_unit_mean[val_points], n_clusters,
                                seed=config.seed).labels
            noisy_report.kmeans_accuracy = clustering_accuracy(
                ref_labels, noisy_labels, n_clusters)
            den_report.kmeans_accuracy = clustering_accuracy(
                ref_labels, den_labels, n_clusters)

        reports.append(FoldReport(
            fold=fold_idx,
            noisy=noisy_report,
            denoised=den_report,
            train_seconds=history.wall_seconds.get("train", 0.0),
            val_points=val_points,
        ))
    return CrossValReport(
        folds=reports,
        mean_noisy=mean_reports([r.noisy for r in reports], label="noisy"),
        mean_denoised=mean_reports([r.denoised for r in reports],
                                   label="denoised"),
        denoised_unit_mean=denoised_unit_mean,
    )
