"""K-means phase clustering with seeded k-means++ starts, restarts and an
elbow scan whose inertia is non-increasing in k by construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TAG_KMEANS = 131


@dataclass(frozen=True)
class ClusterResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations_run: int


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # ||x - c||^2, clipped: cancellation can drive tiny values negative
    d = (points**2).sum(axis=1)[:, None] - 2.0 * points @ centroids.T
    d += (centroids**2).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def _kmeanspp_init(points: np.ndarray, k: int,
                   rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    closest = _sq_dists(points, centroids[:1]).ravel()
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=closest / total)
        centroids[j] = points[idx]
        closest = np.minimum(closest, _sq_dists(points, centroids[j:j + 1]).ravel())
    return centroids


def _lloyd(points: np.ndarray, centroids: np.ndarray, max_iter: int,
           tol: float) -> ClusterResult:
    k = centroids.shape[0]
    centroids = centroids.copy()
    labels = np.zeros(points.shape[0], dtype=np.intp)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        d = _sq_dists(points, centroids)
        labels = np.argmin(d, axis=1)
        new_centroids = centroids.copy()
        dmin = d[np.arange(points.shape[0]), labels]
        for j in range(k):
            members = labels == j
            if members.any():
                new_centroids[j] = points[members].mean(axis=0)
            else:
                # re-seed an empty cluster on the worst-served point
                new_centroids[j] = points[int(np.argmax(dmin))]
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if shift < tol:
            break
    d = _sq_dists(points, centroids)
    labels = np.argmin(d, axis=1)
    inertia = float(d[np.arange(points.shape[0]), labels].sum())
    return ClusterResult(labels=labels, centroids=centroids, inertia=inertia,
                         iterations_run=iterations)


def kmeans(spectra: np.ndarray, k: int, seed: int = 0, restarts: int = 10,
           max_iter: int = 300, tol: float = 1e-6) -> ClusterResult:
    """Best-of-restarts Lloyd iterations from k-means++ seeding.

    Deterministic for a fixed seed; ties between restarts break toward the
    lower restart index.
    """
    points = np.asarray(spectra, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("spectra must be a nonempty (n, channels) matrix")
    if not 1 <= k <= points.shape[0]:
        raise ValueError(f"k={k} must be in [1, {points.shape[0]}]")
    best: ClusterResult | None = None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, _TAG_KMEANS, r]))
        init = _kmeanspp_init(points, k, rng)
        result = _lloyd(points, init, max_iter, tol)
        if best is None or result.inertia < best.inertia:
            best = result
    return best


def elbow_scan(spectra: np.ndarray, k_min: int, k_max: int, seed: int = 0,
               restarts: int = 10, max_iter: int = 300,
               tol: float = 1e-6) -> list[tuple[int, float]]:
    """Inertia per k over [k_min, k_max], non-increasing in k.

    Besides fresh restarts, each k also warm-starts from the previous best
    centroids plus the worst-served point, which guarantees
    inertia(k+1) <= inertia(k).
    """
    points = np.asarray(spectra, dtype=np.float64)
    if not 1 <= k_min <= k_max <= points.shape[0]:
        raise ValueError(
            f"need 1 <= k_min <= k_max <= {points.shape[0]}, "
            f"got [{k_min}, {k_max}]"
        )
    curve: list[tuple[int, float]] = []
    prev: ClusterResult | None = None
    for k in range(k_min, k_max + 1):
        result = kmeans(points, k, seed=seed, restarts=restarts,
                        max_iter=max_iter, tol=tol)
        if prev is not None:
            d = _sq_dists(points, prev.centroids)
            worst = int(np.argmax(d[np.arange(points.shape[0]), prev.labels]))
            warm_init = np.vstack([prev.centroids, points[worst]])
            warm = _lloyd(points, warm_init, max_iter, tol)
            if warm.inertia < result.inertia:
                result = warm
        curve.append((k, result.inertia))
        prev = result
    return curve


def knee_index(curve: list[tuple[int, float]]) -> int:
    """k at the maximum second difference of the log-inertia curve.

    The log scale makes the knee invariant to the overall inertia scale;
    on raw inertia the second difference peaks one step early whenever
    between-cluster distances are hierarchical.
    """
    if len(curve) < 3:
        return curve[0][0]
    inertia = np.log(np.maximum([c[1] for c in curve], 1e-300))
    second = inertia[:-2] - 2 * inertia[1:-1] + inertia[2:]
    return curve[int(np.argmax(second)) + 1][0]
