"""Subset selection by greedy farthest-first traversal (max-min dispersion).

``greedy_kcenter`` picks a subset whose minimum pairwise distance is within a
factor two of the best achievable; ``brute_force_dispersion`` finds the optimum
by enumeration and exists to check it.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

EUCLIDEAN = "euclidean"
COSINE = "cosine"
METRICS = (EUCLIDEAN, COSINE)

BRUTE_FORCE_LIMIT = 10**6


def _prepare(points: np.ndarray | Sequence, metric: str) -> np.ndarray:
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"points must be a 2-D array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("points must be finite")
    if metric == COSINE:
        norms = np.linalg.norm(x, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise ValueError("cosine distance is undefined for zero vectors")
        x = x / norms
    elif metric != EUCLIDEAN:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    return x


def distances_to(x: np.ndarray, y: np.ndarray, metric: str = EUCLIDEAN) -> np.ndarray:
    """Distances from every row of ``x`` to the single point ``y``.

    Rows are assumed already normalized when ``metric`` is cosine.
    """
    if metric == COSINE:
        return np.clip(1.0 - x @ y, 0.0, 2.0)
    return np.linalg.norm(x - y, axis=1)


def pairwise_distances(points, metric: str = EUCLIDEAN) -> np.ndarray:
    x = _prepare(points, metric)
    n = x.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        out[i] = distances_to(x, x[i], metric)
    np.fill_diagonal(out, 0.0)
    return np.minimum(out, out.T)


def min_pairwise_distance(points, metric: str = EUCLIDEAN) -> float:
    x = _prepare(points, metric)
    n = x.shape[0]
    if n < 2:
        raise ValueError("min_pairwise_distance needs at least two points")
    best = math.inf
    for i in range(n - 1):
        best = min(best, float(distances_to(x[i + 1:], x[i], metric).min()))
    return best


@dataclass
class SubsetSelection:
    """Selected indices (in selection order) and the achieved dispersion.

    ``objective`` is the minimum pairwise distance within the selection, or
    ``None`` when fewer than two points were selected.
    """

    indices: list[int]
    objective: float | None
    per_camera: dict[int, "SubsetSelection"] = field(default_factory=dict)
    wall_time_s: float = 0.0
    distance_evals: int = 0
    requested: int = 0
    available: int = 0

    @property
    def size(self) -> int:
        return len(self.indices)


def greedy_kcenter(points, k_sel: int, metric: str = EUCLIDEAN) -> SubsetSelection:
    """Farthest-first traversal.

    Starts from the point farthest from the mean, then repeatedly adds the point
    farthest from its nearest selected point. Ties go to the lowest index.
    """
    if k_sel < 0:
        raise ValueError("k_sel must be >= 0")
    start = time.perf_counter()
    x = _prepare(points, metric) if len(points) else np.zeros((0, 1))
    n = x.shape[0]
    m = min(k_sel, n)
    if m == 0:
        return SubsetSelection([], None, wall_time_s=time.perf_counter() - start,
                               requested=k_sel, available=n)

    center = x.mean(axis=0)
    if metric == COSINE:
        c_norm = np.linalg.norm(center)
        center = center / c_norm if c_norm > 0 else center
    first = int(np.argmax(distances_to(x, center, metric)))
    evals = n
    selected = [first]
    nearest = distances_to(x, x[first], metric)
    evals += n
    nearest[first] = -np.inf
    objective = math.inf
    for _ in range(1, m):
        nxt = int(np.argmax(nearest))
        # The distance at insertion time is the new point's closest selected
        # neighbour, so the running minimum is the subset's min pairwise distance.
        objective = min(objective, float(nearest[nxt]))
        selected.append(nxt)
        np.minimum(nearest, distances_to(x, x[nxt], metric), out=nearest)
        evals += n
        nearest[selected] = -np.inf
    return SubsetSelection(
        indices=selected,
        objective=objective if m >= 2 else None,
        wall_time_s=time.perf_counter() - start,
        distance_evals=evals,
        requested=k_sel,
        available=n,
    )


def brute_force_dispersion(points, k_sel: int, metric: str = EUCLIDEAN) -> SubsetSelection:
    """Exact max-min dispersion by enumerating every ``k_sel``-subset.

    Ties resolve to the lexicographically smallest index set.
    """
    x = _prepare(points, metric)
    n = x.shape[0]
    if k_sel < 0:
        raise ValueError("k_sel must be >= 0")
    m = min(k_sel, n)
    if math.comb(n, m) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"C({n}, {m}) exceeds the brute-force limit {BRUTE_FORCE_LIMIT}")
    if m < 2:
        return SubsetSelection(list(range(m)), None, requested=k_sel, available=n)
    dist = pairwise_distances(x, metric)
    combos = np.array(list(itertools.combinations(range(n), m)), dtype=np.int64)
    worst = np.full(len(combos), np.inf)
    for a, b in itertools.combinations(range(m), 2):
        np.minimum(worst, dist[combos[:, a], combos[:, b]], out=worst)
    best = int(np.argmax(worst))
    return SubsetSelection(
        indices=[int(i) for i in combos[best]],
        objective=float(worst[best]),
        requested=k_sel,
        available=n,
    )


def per_camera_sds(
    features_by_camera: Mapping[int, np.ndarray],
    budgets: Mapping[int, int],
    metric: str = EUCLIDEAN,
    workers: int = 1,
) -> SubsetSelection:
    """Run greedy selection independently per camera and combine the results.

    Indices in the combined selection are positions within each camera's array;
    the per-camera breakdown keeps them apart. ``workers > 1`` runs cameras in a
    thread pool; results are assembled in camera order either way.
    """
    start = time.perf_counter()
    cams = sorted(features_by_camera)

    def run(cam: int) -> SubsetSelection:
        feats = features_by_camera[cam]
        return greedy_kcenter(feats, int(budgets.get(cam, 0)), metric)

    if workers > 1 and len(cams) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, cams))
    else:
        results = [run(c) for c in cams]

    per_cam = dict(zip(cams, results))
    objectives = [s.objective for s in results if s.objective is not None]
    combined = SubsetSelection(
        indices=[i for s in results for i in s.indices],
        objective=min(objectives) if objectives else None,
        per_camera=per_cam,
        distance_evals=sum(s.distance_evals for s in results),
        requested=sum(s.requested for s in results),
        available=sum(s.available for s in results),
    )
    combined.wall_time_s = time.perf_counter() - start
    return combined
