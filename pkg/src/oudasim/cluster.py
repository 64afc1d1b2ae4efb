"""DBSCAN pseudo-labelling and cluster quality against ground truth."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sds import COSINE, EUCLIDEAN, _prepare

NOISE = -1


@dataclass(frozen=True)
class ClusterLabels:
    labels: np.ndarray
    eps: float
    min_pts: int
    metric: str
    core: np.ndarray

    @property
    def num_clusters(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size and self.labels.max() >= 0 else 0

    @property
    def num_noise(self) -> int:
        return int(np.count_nonzero(self.labels == NOISE))


def _neighbourhoods(x: np.ndarray, eps: float, metric: str, block: int = 1024) -> list[np.ndarray]:
    n = x.shape[0]
    out: list[np.ndarray] = []
    sq = np.einsum("ij,ij->i", x, x)
    for lo in range(0, n, block):
        chunk = x[lo:lo + block]
        if metric == COSINE:
            d = 1.0 - chunk @ x.T
        else:
            gram = chunk @ x.T
            d2 = sq[lo:lo + block, None] + sq[None, :] - 2.0 * gram
            d = np.sqrt(np.maximum(d2, 0.0))
        # The Gram-matrix form is only a prefilter; candidates near the boundary
        # are re-checked with the exact difference norm.
        slack = 1e-7 * max(1.0, eps)
        for r in range(chunk.shape[0]):
            cand = np.flatnonzero(d[r] <= eps + slack)
            near_edge = cand[d[r, cand] >= eps - slack]
            if near_edge.size:
                i = lo + r
                if metric == COSINE:
                    exact = 1.0 - x[near_edge] @ x[i]
                else:
                    exact = np.linalg.norm(x[near_edge] - x[i], axis=1)
                drop = near_edge[exact > eps]
                if drop.size:
                    cand = np.setdiff1d(cand, drop, assume_unique=True)
            out.append(cand)
    return out


def dbscan(points, eps: float = 0.6, min_pts: int = 4, metric: str = EUCLIDEAN) -> ClusterLabels:
    """Density-based clustering with an inclusive ``eps`` radius.

    A point is core when at least ``min_pts`` points (itself included) lie within
    ``eps``. Clusters grow from unvisited core points in index order, so a border
    point reachable from several clusters joins the one created first.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    x = _prepare(points, metric) if len(points) else np.zeros((0, 1))
    n = x.shape[0]
    labels = np.full(n, NOISE, dtype=np.int64)
    if n == 0:
        return ClusterLabels(labels, eps, min_pts, metric, np.zeros(0, dtype=bool))
    neigh = _neighbourhoods(x, eps, metric)
    core = np.array([nb.size >= min_pts for nb in neigh], dtype=bool)

    cluster = 0
    for i in range(n):
        if labels[i] != NOISE or not core[i]:
            continue
        labels[i] = cluster
        queue = deque([i])
        while queue:
            p = queue.popleft()
            for q in neigh[p]:
                if labels[q] == NOISE:
                    labels[q] = cluster
                    if core[q]:
                        queue.append(q)
        cluster += 1
    return ClusterLabels(labels, eps, min_pts, metric, core)


def cluster_purity(labels: Sequence[int] | np.ndarray | ClusterLabels,
                   gt_identities: Sequence[int]) -> float:
    """Fraction of clustered (non-noise) points that share their cluster's majority identity."""
    lab = labels.labels if isinstance(labels, ClusterLabels) else np.asarray(labels)
    gt = np.asarray(gt_identities)
    if lab.shape != gt.shape:
        raise ValueError("labels and ground truth must have the same length")
    mask = lab != NOISE
    if not mask.any():
        raise ValueError("no clustered points to score")
    by_cluster: dict[int, Counter] = {}
    for c, g in zip(lab[mask].tolist(), gt[mask].tolist()):
        by_cluster.setdefault(c, Counter())[g] += 1
    majority = sum(cnt.most_common(1)[0][1] for cnt in by_cluster.values())
    return majority / int(mask.sum())
