"""Subset size and per-camera, per-segment crop budgets.

Standard mode gives camera ``i`` in segment ``t`` the share ``k * n[i][t] / N`` of
the subset size ``k``; memory mode gives ``k * sum_{eta<=t} n[i][eta] / N`` so the
segment-``t`` subset is drawn from everything still in memory and the final
segment's subset has exactly ``k`` crops.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

STANDARD = "standard"
MEMORY = "memory"
ORACLE = "oracle"
CAUSAL = "causal"


@dataclass(frozen=True)
class CropCounts:
    """Filter-passing crop counts, indexed ``n[camera][segment]``."""

    n: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.n, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError(f"counts must be a 2-D matrix, got shape {arr.shape}")
        if np.any(arr < 0):
            raise ValueError("counts must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "n", arr)

    @classmethod
    def from_nested(cls, rows: Sequence[Sequence[int]]) -> "CropCounts":
        return cls(np.asarray(rows, dtype=np.int64))

    @property
    def num_cameras(self) -> int:
        return self.n.shape[0]

    @property
    def num_segments(self) -> int:
        return self.n.shape[1]

    @property
    def total(self) -> int:
        return int(self.n.sum())

    def camera_share(self) -> np.ndarray:
        """Fraction of all crops that came from each camera."""
        return self.n.sum(axis=1) / self.total

    def segment_share(self) -> np.ndarray:
        """Per camera, the fraction of its crops that arrived in each segment."""
        per_cam = self.n.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            share = np.where(per_cam > 0, self.n / np.maximum(per_cam, 1), 0.0)
        return share


@dataclass(frozen=True)
class BudgetMatrix:
    fractional: np.ndarray
    b: np.ndarray
    mode: str
    k: int

    def camera_budget(self, camera: int, segment: int) -> int:
        return int(self.b[camera, segment])

    def segment_total(self, segment: int) -> int:
        return int(self.b[:, segment].sum())


def subset_size(instances_per_identity: int, num_identities: int) -> int:
    if instances_per_identity < 1 or num_identities < 1:
        raise ValueError("instances_per_identity and num_identities must be >= 1")
    return instances_per_identity * num_identities


def round_conserving(fractional: Sequence[float] | np.ndarray, target: int) -> np.ndarray:
    """Largest-remainder rounding of ``fractional`` to integers summing to ``target``.

    Works on any shape (the whole array is one group). Remainder ties go to the
    lowest flat index. Values must be non-negative and ``target`` must be
    reachable, i.e. ``sum(floor(f)) <= target <= sum(ceil(f))``.
    """
    f = np.asarray(fractional, dtype=np.float64)
    if np.any(f < 0):
        raise ValueError("fractional values must be non-negative")
    flat = f.ravel()
    base = np.floor(flat)
    # Absorb float noise such as 2.9999999999 -> 3.
    near = np.isclose(flat, np.round(flat), rtol=0.0, atol=1e-9)
    base[near] = np.round(flat[near])
    rem = np.where(near, 0.0, flat - base)
    deficit = int(target) - int(base.sum())
    if deficit < 0 or deficit > int(np.count_nonzero(rem > 0)):
        raise ValueError(
            f"target {target} unreachable by rounding values summing to {flat.sum():.6f}"
        )
    order = np.argsort(-rem, kind="stable")
    out = base.astype(np.int64)
    out[order[:deficit]] += 1
    return out.reshape(f.shape)


def round_columns(fractional: np.ndarray, column_targets: Sequence[int]) -> np.ndarray:
    """Round each column independently to its own integer target."""
    out = np.zeros(fractional.shape, dtype=np.int64)
    for t, target in enumerate(column_targets):
        out[:, t] = round_conserving(fractional[:, t], int(target))
    return out


def _standard_fractional(counts: CropCounts, k: int, mode: str) -> np.ndarray:
    n = counts.n.astype(np.float64)
    if mode == ORACLE:
        # P(C_i) * P(C_i and tau_t) = (n_i / N) * (n_it / n_i) = n_it / N
        return k * counts.camera_share()[:, None] * counts.segment_share()
    if mode == CAUSAL:
        # Segment targets split k evenly; cameras share a segment's target by the
        # running camera totals observed so far.
        running = np.cumsum(n, axis=1)
        seg_targets = _causal_segment_targets(counts, k)
        frac = np.zeros_like(n)
        for t in range(counts.num_segments):
            col = running[:, t]
            if col.sum() > 0:
                frac[:, t] = seg_targets[t] * col / col.sum()
        return frac
    raise ValueError(f"unknown budget mode {mode!r}")


def _check(counts: CropCounts, k: int) -> None:
    if counts.total <= 0:
        raise ValueError("cannot budget with zero total crops")
    if k < 0:
        raise ValueError("k must be >= 0")


def _causal_segment_targets(counts: CropCounts, k: int) -> np.ndarray:
    """Integer share of k per segment; segments before any data arrives get none."""
    T = counts.num_segments
    targets = round_conserving(np.full(T, k / T), k)
    seen = np.cumsum(counts.n.sum(axis=0)) > 0
    return np.where(seen, targets, 0)


def _round_standard(frac: np.ndarray, k: int, counts: CropCounts, mode: str) -> np.ndarray:
    if mode == ORACLE:
        return round_conserving(frac, k)
    # Causal rounding only uses information available at each segment.
    return round_columns(frac, _causal_segment_targets(counts, k))


def budget_standard(counts: CropCounts, k: int, mode: str = ORACLE) -> BudgetMatrix:
    _check(counts, k)
    frac = _standard_fractional(counts, k, mode)
    return BudgetMatrix(frac, _round_standard(frac, k, counts, mode), STANDARD, k)


def budget_memory(counts: CropCounts, k: int, mode: str = ORACLE) -> BudgetMatrix:
    """Cumulative per-camera budgets; ``b[i][t]`` sizes the subset drawn at segment t.

    The integer matrix is the running sum of the rounded standard budgets, which
    keeps every camera non-decreasing in ``t`` and the final column summing to k.
    """
    _check(counts, k)
    std = _standard_fractional(counts, k, mode)
    frac = np.cumsum(std, axis=1)
    b = np.cumsum(_round_standard(std, k, counts, mode), axis=1)
    return BudgetMatrix(frac, b, MEMORY, k)


def compute_budget(counts: CropCounts, k: int, memory: bool, mode: str = ORACLE) -> BudgetMatrix:
    return budget_memory(counts, k, mode) if memory else budget_standard(counts, k, mode)


@dataclass(frozen=True)
class ClampResult:
    b: np.ndarray
    shortfall: np.ndarray
    redistributed: np.ndarray


def clamp_to_available(
    b: np.ndarray, available: np.ndarray, redistribute: bool = False
) -> ClampResult:
    """Cap budgets at the crops actually available.

    ``shortfall`` is what each cell could not supply. With ``redistribute`` the
    shortfall of a segment (column) is moved to same-segment cameras that have
    spare crops, in proportion to their spare count; whatever cannot be placed
    remains in ``shortfall``.
    """
    b = np.asarray(b, dtype=np.int64)
    available = np.asarray(available, dtype=np.int64)
    if b.shape != available.shape:
        raise ValueError(f"shape mismatch {b.shape} vs {available.shape}")
    clamped = np.minimum(b, available)
    shortfall = b - clamped
    extra = np.zeros_like(b)
    if redistribute:
        for t in range(b.shape[1]):
            need = int(shortfall[:, t].sum())
            if need == 0:
                continue
            slack = available[:, t] - clamped[:, t]
            total_slack = int(slack.sum())
            if total_slack == 0:
                continue
            moved = min(need, total_slack)
            extra[:, t] = round_conserving(moved * slack / total_slack, moved)
            # Remaining shortfall is reported against the cameras that caused it.
            placed = moved
            for i in range(b.shape[0]):
                take = min(placed, int(shortfall[i, t]))
                shortfall[i, t] -= take
                placed -= take
        clamped = clamped + extra
    return ClampResult(clamped, shortfall, extra)
