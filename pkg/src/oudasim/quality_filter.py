"""Crop quality gating: overlap rejection, pose confidence, and frame subsampling."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .stream_model import NUM_KEYPOINTS, BBox, CropRecord


@dataclass(frozen=True)
class FilterConfig:
    iou_reject_threshold: float = 0.3
    min_keypoints: int = 15
    min_kp_confidence: float = 0.5
    sample_every_n_frames: int = 60
    # "drop_both" removes every member of an overlapping pair, "keep_larger" spares
    # the largest box of each overlap group.
    overlap_policy: str = "drop_both"

    def __post_init__(self) -> None:
        if not 0.0 <= self.iou_reject_threshold <= 1.0:
            raise ValueError("iou_reject_threshold must be in [0, 1]")
        if not 0 <= self.min_keypoints <= NUM_KEYPOINTS:
            raise ValueError(f"min_keypoints must be in [0, {NUM_KEYPOINTS}]")
        if not 0.0 <= self.min_kp_confidence <= 1.0:
            raise ValueError("min_kp_confidence must be in [0, 1]")
        if self.sample_every_n_frames < 1:
            raise ValueError("sample_every_n_frames must be >= 1")
        if self.overlap_policy not in ("drop_both", "keep_larger"):
            raise ValueError(f"unknown overlap_policy {self.overlap_policy!r}")


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two ``(x, y, w, h)`` boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    iw = min(ax + aw, bx + bw) - max(ax, bx)
    ih = min(ay + ah, by + bh) - max(ay, by)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    return min(1.0, inter / union)


def overlap_filter(crops: Sequence[CropRecord], cfg: FilterConfig = FilterConfig()) -> list[CropRecord]:
    """Drop crops that overlap another crop of the same frame at IoU >= threshold.

    All crops must come from one frame of one camera. Output keeps input order.
    """
    if not crops:
        return []
    key = (crops[0].frame_index, crops[0].camera_id)
    for c in crops:
        if (c.frame_index, c.camera_id) != key:
            raise ValueError("overlap_filter expects crops from a single frame and camera")
    n = len(crops)
    overlapping = [False] * n
    partners: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if iou(crops[i].bbox, crops[j].bbox) >= cfg.iou_reject_threshold:
                overlapping[i] = overlapping[j] = True
                partners[i].append(j)
                partners[j].append(i)
    if cfg.overlap_policy == "keep_larger":
        keep = []
        for i in range(n):
            area = crops[i].bbox[2] * crops[i].bbox[3]
            keep.append(all(area > crops[j].bbox[2] * crops[j].bbox[3] for j in partners[i]))
        return [c for c, k in zip(crops, keep) if k]
    return [c for c, bad in zip(crops, overlapping) if not bad]


def pose_pass(crop: CropRecord, cfg: FilterConfig = FilterConfig()) -> bool:
    confident = sum(1 for kp in crop.keypoints if kp[2] >= cfg.min_kp_confidence)
    return confident >= cfg.min_keypoints


def sample_frames(stream: Iterable[CropRecord], cfg: FilterConfig = FilterConfig()) -> list[CropRecord]:
    n = cfg.sample_every_n_frames
    return [r for r in stream if r.frame_index % n == 0]


def group_by_frame(stream: Iterable[CropRecord]) -> dict[tuple[int, int], list[CropRecord]]:
    groups: dict[tuple[int, int], list[CropRecord]] = defaultdict(list)
    for r in stream:
        groups[(r.camera_id, r.frame_index)].append(r)
    return groups


@dataclass
class FilterStats:
    total: int = 0
    after_overlap: int = 0
    after_pose: int = 0
    after_sampling: int = 0


def apply_filters(
    stream: Sequence[CropRecord],
    cfg: FilterConfig = FilterConfig(),
    sample: bool = True,
    stats: FilterStats | None = None,
) -> list[CropRecord]:
    """Run overlap -> pose -> frame sampling over a whole stream, preserving order.

    ``sample=False`` gives the re-identification path, which sees every frame.
    """
    dropped: set[int] = set()
    for group in group_by_frame(stream).values():
        if len(group) < 2:
            continue
        kept = {id(c) for c in overlap_filter(group, cfg)}
        dropped.update(id(c) for c in group if id(c) not in kept)
    after_overlap = [r for r in stream if id(r) not in dropped]
    after_pose = [r for r in after_overlap if pose_pass(r, cfg)]
    out = sample_frames(after_pose, cfg) if sample else after_pose
    if stats is not None:
        stats.total += len(stream)
        stats.after_overlap += len(after_overlap)
        stats.after_pose += len(after_pose)
        stats.after_sampling += len(out)
    return out
