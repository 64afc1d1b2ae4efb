"""Three-stage pipelined execution (collect -> select -> train) over simulated time.

While segment ``t`` is being collected, selection runs on segment ``t-1`` and
training on the subset from ``t-2``. A model trained on segment ``t`` goes live
at the start of segment ``t+3``, two segments after its data finished arriving.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import queue
import threading
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .budget import BudgetMatrix, CropCounts, clamp_to_available, compute_budget
from .cluster import NOISE, cluster_purity, dbscan
from .config import STRICT, CostModel, PipelineConfig, flatten_config
from .matching import Gallery, global_match
from .quality_filter import FilterStats, apply_filters
from .sds import SubsetSelection, per_camera_sds
from .segmenter import (
    MemoryBuffer,
    TimeSegment,
    assign_segment,
    make_segments,
)
from .stream_model import CropRecord, StreamHeader, feature_matrix
from .trainer import CostModelTrainer, Trainer, TrainJob

log = logging.getLogger(__name__)

COLLECT = "collect"
SELECT = "sds"
TRAIN = "train"


# ---------------------------------------------------------------------------
# Schedule


@dataclass(frozen=True)
class StageRun:
    segment: int
    stage: str
    start_s: float
    end_s: float
    duration_s: float
    deadline_ok: bool


@dataclass(frozen=True)
class ModelLineage:
    segment: int
    model_token: str | None
    ready_s: float
    live_from_s: float

    def live_segment(self, tau_s: float) -> int:
        return int(round(self.live_from_s / tau_s))


@dataclass
class PipelineSchedule:
    tau_minutes: float
    constraint: str
    max_depth: int
    stages: list[StageRun]
    segment_ok: list[bool]
    lineage: list[ModelLineage]

    @property
    def tau_s(self) -> float:
        return self.tau_minutes * 60.0

    @property
    def num_segments(self) -> int:
        return len(self.segment_ok)

    @property
    def passed(self) -> bool:
        return all(self.segment_ok)

    def stage(self, segment: int, stage: str) -> StageRun:
        for s in self.stages:
            if s.segment == segment and s.stage == stage:
                return s
        raise KeyError((segment, stage))


def build_schedule(
    sds_durations: Sequence[float],
    train_durations: Sequence[float],
    tau_minutes: float,
    constraint: str = STRICT,
    max_depth: int = 4,
    trained: Sequence[bool] | None = None,
    tokens: Sequence[str | None] | None = None,
) -> PipelineSchedule:
    """Lay the per-segment stage durations onto the pipeline's time slots.

    In strict mode every stage starts at its slot boundary: selection for
    segment t at ``(t+1)*tau`` and training at ``(t+2)*tau``. In relaxed mode a
    stage also waits for its own previous run and for its input, so overruns
    push later work back instead of being flagged outright.
    """
    T = len(sds_durations)
    if len(train_durations) != T:
        raise ValueError("sds and train duration lists differ in length")
    trained = list(trained) if trained is not None else [True] * T
    tokens = list(tokens) if tokens is not None else [None] * T
    tau = tau_minutes * 60.0
    stages: list[StageRun] = []
    lineage: list[ModelLineage] = []
    sds_free = train_free = 0.0
    for t in range(T):
        stages.append(StageRun(t, COLLECT, t * tau, (t + 1) * tau, tau, True))
        d_sds, d_train = float(sds_durations[t]), float(train_durations[t])
        if constraint == STRICT:
            sds_start = (t + 1) * tau
            train_start = (t + 2) * tau
        else:
            sds_start = max((t + 1) * tau, sds_free)
            train_start = max((t + 2) * tau, sds_start + d_sds, train_free)
        sds_end, train_end = sds_start + d_sds, train_start + d_train
        sds_free, train_free = sds_end, train_end
        stages.append(StageRun(t, SELECT, sds_start, sds_end, d_sds, False))
        stages.append(StageRun(t, TRAIN, train_start, train_end, d_train, False))
        if trained[t]:
            live = max((t + 3) * tau, math.ceil(train_end / tau - 1e-9) * tau)
            lineage.append(ModelLineage(t, tokens[t], train_end, live))
    sched = PipelineSchedule(tau_minutes, constraint, max_depth, stages, [True] * T, lineage)
    verdict = check_time_constraint(sched, tau_minutes)
    sched.segment_ok = verdict.segment_ok
    sched.stages = [
        dataclasses.replace(s, deadline_ok=_stage_ok(sched, s, tau)) if s.stage != COLLECT else s
        for s in stages
    ]
    return sched


def _stage_ok(sched: PipelineSchedule, s: StageRun, tau: float) -> bool:
    if sched.constraint == STRICT:
        return s.duration_s <= tau
    # Relaxed: selection must leave training its last in-flight slot.
    depth = sched.max_depth - 1 if s.stage == SELECT else sched.max_depth
    return s.end_s <= (s.segment + depth) * tau


@dataclass(frozen=True)
class ConstraintVerdict:
    segment_ok: list[bool]
    passed: bool

    @property
    def disqualified(self) -> bool:
        return not self.passed

    @property
    def failed_segments(self) -> list[int]:
        return [t for t, ok in enumerate(self.segment_ok) if not ok]


def check_time_constraint(schedule: PipelineSchedule, tau_minutes: float | None = None) -> ConstraintVerdict:
    """Per-segment deadline verdicts.

    Strict: segment t passes when its selection and its training each take at
    most one segment length. Relaxed: segment t passes when its training ends by
    ``(t + max_depth) * tau``, i.e. the pipeline never holds more than
    ``max_depth`` segments in flight.
    """
    tau = (tau_minutes if tau_minutes is not None else schedule.tau_minutes) * 60.0
    by_seg: dict[int, dict[str, StageRun]] = defaultdict(dict)
    for s in schedule.stages:
        by_seg[s.segment][s.stage] = s
    ok = []
    for t in sorted(by_seg):
        runs = by_seg[t]
        if schedule.constraint == STRICT:
            ok.append(runs[SELECT].duration_s <= tau and runs[TRAIN].duration_s <= tau)
        else:
            ok.append(runs[TRAIN].end_s <= (t + schedule.max_depth) * tau)
    return ConstraintVerdict(ok, all(ok))


@dataclass(frozen=True)
class Latency:
    segments: float
    minutes: float


def inference_latency(schedule: PipelineSchedule) -> Latency:
    """Time from the end of a segment's collection to its model going live.

    Reported as the worst case over trained segments; a passing strict schedule
    always gives exactly two segments.
    """
    if not schedule.passed:
        raise ValueError("latency is only defined for schedules that meet the time constraint")
    if not schedule.lineage:
        raise ValueError("no segment produced a trained model")
    tau = schedule.tau_s
    worst = max(m.live_from_s - (m.segment + 1) * tau for m in schedule.lineage)
    return Latency(worst / tau, worst / 60.0)


def training_throughput(schedule: PipelineSchedule) -> list[int]:
    """Trainings completed in each slot, from the first to the last training slot.

    Slot ``s`` covers ``(s*tau, (s+1)*tau]``; a zero-length training ending
    exactly on its start boundary counts toward the slot it was scheduled in.
    """
    tau = schedule.tau_s
    trained = {m.segment for m in schedule.lineage}
    slots: list[int] = []
    for s in schedule.stages:
        if s.stage != TRAIN or s.segment not in trained:
            continue
        slot = max(int(math.ceil(s.end_s / tau - 1e-9)) - 1, int(round(s.start_s / tau)))
        slots.append(slot)
    if not slots:
        return []
    counts = [0] * (max(slots) - min(slots) + 1)
    for slot in slots:
        counts[slot - min(slots)] += 1
    return counts


# ---------------------------------------------------------------------------
# Segment processing


@dataclass
class SegmentOutcome:
    segment: int
    start_ms: int
    end_ms: int
    partial: bool
    collected: int = 0
    sds_input: int = 0
    evicted: int = 0
    budget_fractional: list[float] = field(default_factory=list)
    budget: list[int] = field(default_factory=list)
    available: list[int] = field(default_factory=list)
    granted: list[int] = field(default_factory=list)
    shortfall: list[int] = field(default_factory=list)
    selected: list[int] = field(default_factory=list)
    selected_cameras: list[int] = field(default_factory=list)
    objective: float | None = None
    camera_objectives: dict[int, float | None] = field(default_factory=dict)
    distance_evals: int = 0
    sds_wall_s: float = 0.0
    sds_duration_s: float = 0.0
    labels: list[int] = field(default_factory=list)
    num_clusters: int = 0
    num_noise: int = 0
    purity: float | None = None
    match_queries: int = 0
    match_identities: int = 0
    match_purity: float | None = None
    train_duration_s: float = 0.0
    model_token: str | None = None

    @property
    def trained(self) -> bool:
        return self.model_token is not None


def _purity_or_none(labels: Sequence[int], gts: Sequence[int | None]) -> float | None:
    if not labels or any(g is None for g in gts):
        return None
    if all(l == NOISE for l in labels):
        return None
    return cluster_purity(np.asarray(labels), np.asarray(gts))


@dataclass
class PreparedStream:
    """Filtered, segmented view of a stream shared by every configuration with the same tau."""

    header: StreamHeader
    records: list[CropRecord]
    segments: list[TimeSegment]
    collection: dict[int, list[int]]  # segment -> stream indices (sampled path)
    reid: dict[int, list[int]]        # segment -> stream indices (unsampled path)
    counts: CropCounts
    filter_stats: FilterStats


def prepare_stream(header: StreamHeader, records: Sequence[CropRecord], config: PipelineConfig) -> PreparedStream:
    records = list(records)
    index = {id(r): i for i, r in enumerate(records)}
    stats = FilterStats()
    collection_recs = apply_filters(records, config.filter, sample=True, stats=stats)
    if config.filter_reid_path:
        reid_recs = apply_filters(records, config.filter, sample=False)
    else:
        reid_recs = records
    last_ts = max((r.timestamp_ms for r in records), default=-1)
    duration = max(header.duration_ms, last_ts + 1)
    segments = make_segments(duration, config.tau_minutes)
    T = len(segments)

    def bucket(recs: Sequence[CropRecord]) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {t: [] for t in range(T)}
        for r in recs:
            out[assign_segment(r.timestamp_ms, config.tau_minutes)].append(index[id(r)])
        return out

    collection = bucket(collection_recs)
    counts = np.zeros((header.num_cameras, T), dtype=np.int64)
    for t, idxs in collection.items():
        for i in idxs:
            counts[records[i].camera_id, t] += 1
    return PreparedStream(header, records, segments, collection, bucket(reid_recs),
                          CropCounts(counts), stats)


class _Stages:
    """Per-run state and the three stage bodies.

    Each stage owns its own state (the gallery belongs to collection, the
    memory buffer to selection), so stages can run on separate threads.
    """

    def __init__(self, prep: PreparedStream, config: PipelineConfig, cost_model: CostModel,
                 trainer: Trainer, budget: BudgetMatrix):
        self.prep = prep
        self.config = config
        self.cost_model = cost_model
        self.trainer = trainer
        self.budget = budget
        self.gallery = Gallery(prep.header.feature_dim)
        self._index = {id(r): i for i, r in enumerate(prep.records)}
        self.buffer = MemoryBuffer(config.tau_minutes,
                                   config.retention_minutes if config.memory else config.tau_minutes)

    def collect(self, t: int) -> tuple[SegmentOutcome, list[int]]:
        seg = self.prep.segments[t]
        out = SegmentOutcome(t, seg.start_ms, seg.end_ms, seg.partial)
        idxs = self.prep.collection[t]
        out.collected = len(idxs)
        if self.config.match:
            reid = [self.prep.records[i] for i in self.prep.reid[t]]
            if reid:
                ids = global_match(feature_matrix(reid), self.gallery,
                                   self.config.match_threshold, self.config.match_momentum,
                                   self.config.metric)
                out.match_queries = len(ids)
                out.match_purity = _purity_or_none(ids, [r.gt_identity for r in reid])
            out.match_identities = len(self.gallery)
        return out, idxs

    def select(self, out: SegmentOutcome, idxs: list[int]) -> SegmentOutcome:
        t = out.segment
        recs = self.prep.records
        self.buffer.add_segment(t, [recs[i] for i in idxs])
        out.evicted = self.buffer.evict(t)
        pool = self.buffer.view(t)
        pool_idx = [self._index[id(r)] for r in pool]
        out.sds_input = len(pool_idx)

        C = self.prep.header.num_cameras
        by_cam: dict[int, list[int]] = {c: [] for c in range(C)}
        for i in pool_idx:
            by_cam[recs[i].camera_id].append(i)
        available = np.array([len(by_cam[c]) for c in range(C)], dtype=np.int64)
        wanted = self.budget.b[:, t]
        clamp = clamp_to_available(wanted[:, None], available[:, None], self.config.redistribute)
        granted = clamp.b[:, 0]
        out.budget_fractional = [float(v) for v in self.budget.fractional[:, t]]
        out.budget = [int(v) for v in wanted]
        out.available = [int(v) for v in available]
        out.granted = [int(v) for v in granted]
        out.shortfall = [int(v) for v in clamp.shortfall[:, 0]]

        feats = {c: feature_matrix([recs[i] for i in by_cam[c]]) for c in range(C) if by_cam[c]}
        selection: SubsetSelection = per_camera_sds(
            feats, {c: int(granted[c]) for c in feats}, self.config.metric, self.config.sds_workers)
        for c in sorted(selection.per_camera):
            for pos in selection.per_camera[c].indices:
                out.selected.append(by_cam[c][pos])
                out.selected_cameras.append(c)
        out.objective = selection.objective
        out.camera_objectives = {c: s.objective for c, s in selection.per_camera.items()}
        out.distance_evals = selection.distance_evals
        out.sds_wall_s = selection.wall_time_s
        if self.config.measure == "real":
            out.sds_duration_s = self.cost_model.sds_overhead_s + selection.wall_time_s
        else:
            out.sds_duration_s = self.cost_model.sds_duration(selection.distance_evals)
        return out

    def cluster(self, out: SegmentOutcome) -> SegmentOutcome:
        recs = self.prep.records
        if out.selected:
            chosen = [recs[i] for i in out.selected]
            lab = dbscan(feature_matrix(chosen), self.config.eps, self.config.min_pts, self.config.metric)
            out.labels = [int(v) for v in lab.labels]
            out.num_clusters = lab.num_clusters
            out.num_noise = lab.num_noise
            out.purity = _purity_or_none(out.labels, [r.gt_identity for r in chosen])
        return out

    def train(self, out: SegmentOutcome) -> SegmentOutcome:
        if not out.selected:
            out.train_duration_s = 0.0
            out.model_token = None
            return out
        recs = self.prep.records
        job = TrainJob(
            segment=out.segment,
            record_keys=tuple((recs[i].camera_id, recs[i].frame_index, i) for i in out.selected),
            pseudo_labels=tuple(out.labels),
            epochs=self.config.E,
            iterations=self.config.I,
        )
        result = self.trainer.train(job)
        out.train_duration_s = result.duration_s
        out.model_token = result.model_token
        return out


def _run_sequential(stages: _Stages, T: int) -> list[SegmentOutcome]:
    outs = []
    for t in range(T):
        out, idxs = stages.collect(t)
        out = stages.select(out, idxs)
        out = stages.cluster(out)
        outs.append(stages.train(out))
    return outs


_DONE = object()


def _run_threaded(stages: _Stages, T: int) -> list[SegmentOutcome]:
    """Each stage on its own thread, handing segments downstream through queues."""
    to_select: queue.Queue = queue.Queue()
    to_train: queue.Queue = queue.Queue()
    results: dict[int, SegmentOutcome] = {}
    sink_lock = threading.Lock()
    errors: list[BaseException] = []

    def guard(fn: Callable[[], None], downstream: queue.Queue | None) -> Callable[[], None]:
        def body() -> None:
            try:
                fn()
            except BaseException as exc:  # surfaced after join
                errors.append(exc)
                if downstream is not None:
                    downstream.put(_DONE)
        return body

    def collector() -> None:
        for t in range(T):
            to_select.put(stages.collect(t))
        to_select.put(_DONE)

    def selector() -> None:
        while (item := to_select.get()) is not _DONE:
            out, idxs = item
            to_train.put(stages.select(out, idxs))
        to_train.put(_DONE)

    def trainer() -> None:
        while (item := to_train.get()) is not _DONE:
            out = stages.train(stages.cluster(item))
            with sink_lock:
                results[out.segment] = out

    threads = [threading.Thread(target=guard(collector, to_select), name="collect"),
               threading.Thread(target=guard(selector, to_train), name="sds"),
               threading.Thread(target=guard(trainer, None), name="train")]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    if errors:
        raise errors[0]
    return [results[t] for t in range(T)]


@dataclass
class PipelineResult:
    header: StreamHeader
    config: PipelineConfig
    cost_model: CostModel
    counts: CropCounts
    budget: BudgetMatrix
    filter_stats: FilterStats
    segments: list[SegmentOutcome]
    schedule: PipelineSchedule
    verdict: ConstraintVerdict
    records: list[CropRecord] = field(repr=False, default_factory=list)

    @property
    def latency(self) -> Latency | None:
        if not self.verdict.passed or not self.schedule.lineage:
            return None
        return inference_latency(self.schedule)

    @property
    def disqualified(self) -> bool:
        return self.verdict.disqualified


def _schedule_for(outcomes: Sequence[SegmentOutcome], config: PipelineConfig) -> PipelineSchedule:
    return build_schedule(
        [o.sds_duration_s for o in outcomes],
        [o.train_duration_s for o in outcomes],
        config.tau_minutes,
        config.constraint,
        config.max_depth,
        trained=[o.trained for o in outcomes],
        tokens=[o.model_token for o in outcomes],
    )


def selection_key(config: PipelineConfig) -> tuple:
    """Config fields that influence collection, selection and clustering."""
    flat = flatten_config(config)
    for name in ("E", "I", "constraint", "max_depth", "executor"):
        flat.pop(name)
    return tuple(sorted(flat.items()))


def simulate_pipeline(
    header: StreamHeader,
    records: Sequence[CropRecord],
    config: PipelineConfig,
    cost_model: CostModel | None = None,
    trainer: Trainer | None = None,
    prepared: PreparedStream | None = None,
    selection_cache: dict | None = None,
) -> PipelineResult:
    """Run collection, selection, clustering and (simulated) training per segment.

    ``prepared`` reuses filtering/segmentation across configurations with the
    same tau and filter settings. ``selection_cache`` reuses the selection and
    clustering results across configurations that differ only in training
    parameters; only the sequential executor consults it.
    """
    cost_model = cost_model or CostModel()
    trainer = trainer or CostModelTrainer(cost_model)
    prep = prepared or prepare_stream(header, records, config)
    if prep.counts.total == 0:
        raise ValueError("no crops survive filtering; nothing to budget")
    budget = compute_budget(prep.counts, config.k, config.memory, config.budget_mode)
    stages = _Stages(prep, config, cost_model, trainer, budget)
    T = len(prep.segments)

    key = selection_key(config) if selection_cache is not None else None
    if key is not None and key in selection_cache:
        outcomes = [stages.train(dataclasses.replace(o)) for o in selection_cache[key]]
    elif config.executor == "threaded":
        outcomes = _run_threaded(stages, T)
    else:
        if key is not None:
            selected = []
            for t in range(T):
                out, idxs = stages.collect(t)
                selected.append(stages.cluster(stages.select(out, idxs)))
            selection_cache[key] = [dataclasses.replace(o) for o in selected]
            outcomes = [stages.train(o) for o in selected]
        else:
            outcomes = _run_sequential(stages, T)

    schedule = _schedule_for(outcomes, config)
    verdict = check_time_constraint(schedule)
    log.debug("simulated %d segments, passed=%s", T, verdict.passed)
    return PipelineResult(header, config, cost_model, prep.counts, budget, prep.filter_stats,
                          outcomes, schedule, verdict, prep.records)


# ---------------------------------------------------------------------------
# Row views used by the grid runner and the report writer


def _mean(vals: Sequence[float]) -> float | None:
    return float(np.mean(vals)) if vals else None


def experiment_row(result: PipelineResult) -> dict[str, Any]:
    cfg = result.config
    segs = result.segments
    purities = [s.purity for s in segs if s.purity is not None]
    objectives = [s.objective for s in segs if s.objective is not None]
    latency = result.latency
    return {
        "tau": cfg.tau_minutes,
        "K": cfg.K,
        "I": cfg.I,
        "E": cfg.E,
        "memory": cfg.memory,
        "budget_mode": cfg.budget_mode,
        "k": cfg.k,
        "num_segments": len(segs),
        "subset_sizes": ";".join(str(len(s.selected)) for s in segs),
        "shortfall": sum(sum(s.shortfall) for s in segs),
        "purity_mean": _mean(purities),
        "purity_min": min(purities) if purities else None,
        "objective_min": min(objectives) if objectives else None,
        "sds_max_s": max((s.sds_duration_s for s in segs), default=0.0),
        "train_max_s": max((s.train_duration_s for s in segs), default=0.0),
        "failed_segments": ";".join(str(t) for t in result.verdict.failed_segments),
        "passed": result.verdict.passed,
        "disqualified": result.verdict.disqualified,
        "latency_segments": latency.segments if latency else None,
        "latency_min": latency.minutes if latency else None,
    }


EXPERIMENT_COLUMNS = [
    "tau", "K", "I", "E", "memory", "budget_mode", "k", "num_segments", "subset_sizes",
    "shortfall", "purity_mean", "purity_min", "objective_min", "sds_max_s", "train_max_s",
    "failed_segments", "passed", "disqualified", "latency_segments", "latency_min",
]


def segment_rows(result: PipelineResult) -> list[dict[str, Any]]:
    cfg = result.config
    rows = []
    for s, ok in zip(result.segments, result.verdict.segment_ok):
        rows.append({
            "tau": cfg.tau_minutes,
            "K": cfg.K,
            "I": cfg.I,
            "E": cfg.E,
            "memory": cfg.memory,
            "segment": s.segment,
            "time_min": (s.segment + 3) * cfg.tau_minutes,
            "partial": s.partial,
            "collected": s.collected,
            "sds_input": s.sds_input,
            "budget": sum(s.budget),
            "selected": len(s.selected),
            "shortfall": sum(s.shortfall),
            "objective": s.objective,
            "num_clusters": s.num_clusters,
            "num_noise": s.num_noise,
            "purity": s.purity,
            "match_purity": s.match_purity,
            "sds_s": s.sds_duration_s,
            "train_s": s.train_duration_s,
            "deadline_ok": ok,
            "disqualified": result.verdict.disqualified,
        })
    return rows


SEGMENT_COLUMNS = [
    "tau", "K", "I", "E", "memory", "segment", "time_min", "partial", "collected", "sds_input",
    "budget", "selected", "shortfall", "objective", "num_clusters", "num_noise", "purity",
    "match_purity", "sds_s", "train_s", "deadline_ok", "disqualified",
]


def schedule_rows(schedule: PipelineSchedule) -> list[dict[str, Any]]:
    return [{
        "segment": s.segment,
        "stage": s.stage,
        "start_s": s.start_s,
        "end_s": s.end_s,
        "duration_s": s.duration_s,
        "deadline_ok": s.deadline_ok,
    } for s in schedule.stages]


SCHEDULE_COLUMNS = ["segment", "stage", "start_s", "end_s", "duration_s", "deadline_ok"]


def subset_rows(result: PipelineResult) -> list[dict[str, Any]]:
    rows = []
    for s in result.segments:
        for rank, (i, label) in enumerate(zip(s.selected, s.labels or [None] * len(s.selected))):
            r = result.records[i]
            rows.append({
                "segment": s.segment,
                "camera": r.camera_id,
                "rank": rank,
                "record": i,
                "frame": r.frame_index,
                "ts_ms": r.timestamp_ms,
                "pseudo_label": label,
                "gt": r.gt_identity,
            })
    return rows


SUBSET_COLUMNS = ["segment", "camera", "rank", "record", "frame", "ts_ms", "pseudo_label", "gt"]


def budget_rows(result: PipelineResult) -> list[dict[str, Any]]:
    rows = []
    for s in result.segments:
        for c in range(len(s.budget)):
            rows.append({
                "segment": s.segment,
                "camera": c,
                "fractional": s.budget_fractional[c],
                "integer": s.budget[c],
                "available": s.available[c],
                "granted": s.granted[c],
                "shortfall": s.shortfall[c],
            })
    return rows


BUDGET_COLUMNS = ["segment", "camera", "fractional", "integer", "available", "granted", "shortfall"]


def run_summary(result: PipelineResult) -> dict[str, Any]:
    latency = result.latency
    fs = result.filter_stats
    return {
        "config": {k: v for k, v in flatten_config(result.config).items()},
        "cost_model": dataclasses.asdict(result.cost_model),
        "num_segments": len(result.segments),
        "partial_segments": [s.segment for s in result.segments if s.partial],
        "filter": dataclasses.asdict(fs),
        "passed": result.verdict.passed,
        "disqualified": result.verdict.disqualified,
        "segment_ok": result.verdict.segment_ok,
        "latency_segments": latency.segments if latency else None,
        "latency_minutes": latency.minutes if latency else None,
        "throughput_per_slot": training_throughput(result.schedule),
        "models": [
            {"segment": m.segment, "token": m.model_token, "ready_s": m.ready_s,
             "live_from_s": m.live_from_s}
            for m in result.schedule.lineage
        ],
    }
