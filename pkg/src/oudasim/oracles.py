"""Slow, obviously-correct reference routines used to cross-check the fast paths."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cluster import NOISE, dbscan
from .sds import brute_force_dispersion, greedy_kcenter


def naive_dbscan(points: Sequence[Sequence[float]], eps: float, min_pts: int) -> list[int]:
    """Textbook DBSCAN with pure-Python Euclidean distances and index-order expansion."""
    pts = [tuple(float(v) for v in p) for p in points]
    n = len(pts)
    neigh = [[j for j in range(n) if math.dist(pts[i], pts[j]) <= eps] for i in range(n)]
    core = [len(nb) >= min_pts for nb in neigh]
    labels = [NOISE] * n
    cluster = 0
    for i in range(n):
        if labels[i] != NOISE or not core[i]:
            continue
        labels[i] = cluster
        stack = [i]
        while stack:
            p = stack.pop()
            for q in neigh[p]:
                if labels[q] == NOISE:
                    labels[q] = cluster
                    if core[q]:
                        stack.append(q)
        cluster += 1
    return labels


def as_partition(labels: Sequence[int]) -> set[frozenset[int]]:
    """Labels as a set of clusters plus one singleton block per noise point."""
    blocks: dict[int, set[int]] = {}
    out: set[frozenset[int]] = set()
    for i, lab in enumerate(labels):
        if lab == NOISE:
            out.add(frozenset({-(i + 1)}))
        else:
            blocks.setdefault(int(lab), set()).add(i)
    out.update(frozenset(b) for b in blocks.values())
    return out


def general_position_points(rng: np.random.Generator, n: int, dim: int,
                            min_gap: float = 1e-6) -> np.ndarray:
    """Random points whose pairwise distances are all distinct by at least ``min_gap``."""
    while True:
        pts = rng.random((n, dim))
        d = [math.dist(pts[i], pts[j]) for i, j in itertools.combinations(range(n), 2)]
        d.sort()
        if all(b - a > min_gap for a, b in zip(d, d[1:])) and (not d or d[0] > min_gap):
            return pts


@dataclass
class OracleReport:
    name: str
    instances: int
    violations: int
    worst_ratio: float | None
    seconds: float

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = f" worst_ratio={self.worst_ratio:.4f}" if self.worst_ratio is not None else ""
        return (f"{status} {self.name}: {self.instances} instances, "
                f"{self.violations} violations{extra} ({self.seconds:.2f}s)")


def check_greedy_vs_brute_force(instances: int = 1000, seed: int = 0,
                                max_n: int = 12, max_k: int = 5) -> OracleReport:
    """Greedy dispersion must reach at least half of the exact optimum."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    violations = 0
    worst = math.inf
    for _ in range(instances):
        n = int(rng.integers(2, max_n + 1))
        k = int(rng.integers(2, min(max_k, n) + 1))
        dim = int(rng.integers(1, 4))
        pts = general_position_points(rng, n, dim)
        greedy = greedy_kcenter(pts, k).objective
        best = brute_force_dispersion(pts, k).objective
        ratio = greedy / best
        worst = min(worst, ratio)
        if greedy < 0.5 * best:
            violations += 1
    return OracleReport("greedy >= 0.5 * optimal dispersion", instances, violations,
                        worst, time.perf_counter() - start)


def check_dbscan_vs_naive(instances: int = 200, seed: int = 0, max_n: int = 500) -> OracleReport:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    violations = 0
    for _ in range(instances):
        n = int(rng.integers(1, max_n + 1))
        dim = int(rng.integers(1, 5))
        centers = rng.random((int(rng.integers(1, 6)), dim)) * 4.0
        pts = centers[rng.integers(0, len(centers), n)] + rng.normal(0, 0.3, (n, dim))
        eps = float(rng.uniform(0.05, 0.8))
        min_pts = int(rng.integers(1, 8))
        fast = dbscan(pts, eps, min_pts).labels.tolist()
        ref = naive_dbscan(pts.tolist(), eps, min_pts)
        if as_partition(fast) != as_partition(ref):
            violations += 1
    return OracleReport("dbscan partitions == naive reference", instances, violations,
                        None, time.perf_counter() - start)
