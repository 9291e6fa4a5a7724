import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from schemas.clustering import ClusterAlgorithm, ClusterConfig
from utils.decorators.timing import log_stage
from utils.exceptions.io import InputOutputException
from utils.exceptions.learning import ClusteringException
from utils.exceptions.numerics import DimensionMismatchException

logger = logging.getLogger(__name__)

LLOYD_MAX_ITERS = 300


@dataclass(frozen=True, eq=False)
class ClusterState:
    """Centroids mu and per-centroid update counts v[c]"""
    centroids: np.ndarray
    counts: np.ndarray

    @property
    def n_clusters(self) -> int:
        return int(self.centroids.shape[0])


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    labels: np.ndarray
    n_clusters: int

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_clusters)

    @property
    def empty_clusters(self) -> np.ndarray:
        return np.flatnonzero(self.sizes == 0)

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster)


def _as_points(points) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2:
        raise DimensionMismatchException(f"points must be an n x d matrix, got shape {points.shape}",
                                         expected="n x d", actual=points.shape)
    return points


def _check_k(K: int, n: int) -> None:
    if K < 1 or K > n:
        raise ClusteringException(f"cannot form {K} clusters from {n} points",
                                  details={"n_clusters": K, "n_samples": n})


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def nearest_centroid(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return np.argmin(cdist(points, centroids, "sqeuclidean"), axis=1)


def kmeanspp_init(points, K: int, seed: int) -> ClusterState:
    """
    K-Means++ seeding: the first centroid uniformly, each next one with
    probability proportional to the squared distance to the nearest chosen
    centroid. Centroids are distinct points; update counts start at 1.
    """
    points = _as_points(points)
    n = points.shape[0]
    _check_k(K, n)
    rng = _rng(seed, 0)

    chosen = [int(rng.integers(n))]
    d2 = cdist(points, points[chosen], "sqeuclidean").ravel()
    while len(chosen) < K:
        total = float(d2.sum())
        if total <= 0.0:
            # remaining points coincide with chosen ones
            unchosen = np.setdiff1d(np.arange(n), chosen)
            pick = int(rng.choice(unchosen))
        else:
            pick = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            if pick >= n or d2[pick] <= 0.0:
                pick = int(np.flatnonzero(d2 > 0)[-1])
        chosen.append(pick)
        d2 = np.minimum(d2, cdist(points, points[[pick]], "sqeuclidean").ravel())

    return ClusterState(centroids=points[chosen].copy(), counts=np.ones(K, dtype=np.int64))


def update_centroids(state: ClusterState, batch: np.ndarray, nearest: np.ndarray) -> ClusterState:
    """
    Per-point gradient steps in batch order: v[c] += 1, eta = 1/v[c],
    c <- (1 - eta) c + eta x.
    """
    centroids = state.centroids.copy()
    counts = state.counts.copy()
    for x, c in zip(_as_points(batch), nearest):
        counts[c] += 1
        eta = 1.0 / counts[c]
        centroids[c] = (1.0 - eta) * centroids[c] + eta * x
    return ClusterState(centroids=centroids, counts=counts)


def repair_empty_clusters(points: np.ndarray, state: ClusterState,
                          labels: np.ndarray) -> Tuple[ClusterState, np.ndarray, int]:
    """
    Move each empty cluster's centroid to the point farthest from its own
    centroid and reassign, for at most K rounds. Clusters still empty after
    that (coincident points) take a point directly from an oversized cluster.
    """
    K = state.n_clusters
    centroids = state.centroids.copy()
    repairs = 0
    for _ in range(K):
        empty = np.flatnonzero(np.bincount(labels, minlength=K) == 0)
        if empty.size == 0:
            break
        spread = ((points - centroids[labels]) ** 2).sum(axis=1)
        for c in empty:
            far = int(np.argmax(spread))
            centroids[c] = points[far]
            spread[far] = -1.0
            repairs += 1
        labels = nearest_centroid(points, centroids)

    sizes = np.bincount(labels, minlength=K)
    if np.any(sizes == 0):
        labels = labels.copy()
        for c in np.flatnonzero(sizes == 0):
            donors = np.flatnonzero(sizes[labels] > 1)
            spread = ((points[donors] - centroids[labels[donors]]) ** 2).sum(axis=1)
            p = int(donors[np.argmax(spread)])
            sizes[labels[p]] -= 1
            labels[p] = c
            sizes[c] += 1
            centroids[c] = points[p]
            repairs += 1

    return ClusterState(centroids=centroids, counts=state.counts.copy()), labels, repairs


def _resolve_algorithm(cfg: ClusterConfig, n: int) -> ClusterAlgorithm:
    if cfg.algorithm == ClusterAlgorithm.AUTO:
        return ClusterAlgorithm.LLOYD if n <= cfg.lloyd_threshold else ClusterAlgorithm.MINIBATCH
    return cfg.algorithm


def _finish(points: np.ndarray, state: ClusterState, algorithm: str,
            iterations: int) -> Tuple[ClusterState, ClusterAssignment]:
    labels = nearest_centroid(points, state.centroids)
    state, labels, repairs = repair_empty_clusters(points, state, labels)
    logger.debug("Clustering finished",
                 extra={"amg_data": {"algorithm": algorithm, "iterations": iterations,
                                     "n_clusters": state.n_clusters, "repairs": repairs}})
    return state, ClusterAssignment(labels=labels.astype(np.int64), n_clusters=state.n_clusters)


def lloyd_kmeans(points, cfg: ClusterConfig) -> Tuple[ClusterState, ClusterAssignment]:
    """Full-batch K-Means from K-Means++ seeds"""
    points = _as_points(points)
    n = points.shape[0]
    K = _required_k(cfg)
    _check_k(K, n)
    state = kmeanspp_init(points, K, cfg.seed)
    centroids = state.centroids.copy()
    max_iters = cfg.max_iters if cfg.max_iters is not None else LLOYD_MAX_ITERS

    iteration = 0
    sizes = np.ones(K, dtype=np.int64)
    for iteration in range(1, max_iters + 1):
        labels = nearest_centroid(points, centroids)
        sizes = np.bincount(labels, minlength=K)
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, points)
        updated = centroids.copy()
        filled = sizes > 0
        updated[filled] = sums[filled] / sizes[filled, None]
        shift = float(np.max(np.linalg.norm(updated - centroids, axis=1)))
        centroids = updated
        if shift < cfg.centroid_tol:
            break

    return _finish(points, ClusterState(centroids=centroids, counts=sizes.astype(np.int64)), "lloyd", iteration)


def _required_k(cfg: ClusterConfig) -> int:
    if cfg.n_clusters is None:
        raise ClusteringException("n_clusters must be set before clustering")
    return cfg.n_clusters


@log_stage("clustering")
def minibatch_kmeans(points, cfg: ClusterConfig) -> Tuple[ClusterState, ClusterAssignment]:
    """
    Mini-Batch K-Means.

    Each iteration samples ``batch_size`` points without replacement, caches
    the index of the nearest centroid for every sampled point, then applies
    update_centroids in batch order. Stops after ``max_iters`` iterations or
    once no centroid moves more than ``centroid_tol``. Final labels are the
    nearest centroids, with empty clusters repaired.

    ``cfg.algorithm`` set to lloyd (or auto below the threshold) runs
    lloyd_kmeans instead.
    """
    points = _as_points(points)
    n = points.shape[0]
    K = _required_k(cfg)
    _check_k(K, n)
    if _resolve_algorithm(cfg, n) == ClusterAlgorithm.LLOYD:
        return lloyd_kmeans(points, cfg)

    batch_size = min(n, cfg.batch_size or max(1, n // 15))
    max_iters = cfg.max_iters if cfg.max_iters is not None else 15 * math.ceil(n / batch_size)
    state = kmeanspp_init(points, K, cfg.seed)
    rng = _rng(cfg.seed, 1)

    iteration = 0
    for iteration in range(1, max_iters + 1):
        sample = rng.choice(n, size=batch_size, replace=False)
        batch = points[sample]
        nearest = nearest_centroid(batch, state.centroids)
        updated = update_centroids(state, batch, nearest)
        shift = float(np.max(np.linalg.norm(updated.centroids - state.centroids, axis=1)))
        state = updated
        if shift < cfg.centroid_tol:
            break

    return _finish(points, state, "minibatch", iteration)


def kmeans_objective(points, state: ClusterState, assignment: ClusterAssignment) -> float:
    """Sum of squared distances from each point to its assigned centroid"""
    points = _as_points(points)
    if assignment.labels.shape != (points.shape[0],):
        raise DimensionMismatchException("one label per point required",
                                         expected=(points.shape[0],), actual=assignment.labels.shape)
    return float(((points - state.centroids[assignment.labels]) ** 2).sum())


def export_assignment(assignment: ClusterAssignment, path: Union[str, Path]) -> None:
    """One 'node cluster' pair per line"""
    path = Path(path)
    try:
        with path.open("w") as handle:
            for node, cluster in enumerate(assignment.labels):
                handle.write(f"{node} {int(cluster)}\n")
    except OSError as e:
        raise InputOutputException(f"cannot write cluster assignment: {e}", path=path, original_exception=e)
