"""Streaming crop selection and pipelined-adaptation scheduling for multi-camera re-identification."""

from .budget import (
    BudgetMatrix,
    CropCounts,
    budget_memory,
    budget_standard,
    clamp_to_available,
    round_conserving,
    subset_size,
)
from .cluster import NOISE, ClusterLabels, cluster_purity, dbscan
from .config import CostModel, PipelineConfig
from .grid import FULL_GRID, enumerate_grid, grid_run
from .matching import Gallery, global_match
from .pipeline import (
    PipelineResult,
    PipelineSchedule,
    build_schedule,
    check_time_constraint,
    inference_latency,
    simulate_pipeline,
)
from .quality_filter import FilterConfig, iou, overlap_filter, pose_pass, sample_frames
from .report import Table, emit, five_number_summary, group_summaries
from .sds import (
    SubsetSelection,
    brute_force_dispersion,
    greedy_kcenter,
    min_pairwise_distance,
    per_camera_sds,
)
from .segmenter import MemoryBuffer, TimeSegment, assign_segment, memory_view
from .stream_model import (
    CropRecord,
    StreamHeader,
    SynthSpec,
    normalize_feature,
    parse_stream,
    serialize_stream,
    synth_stream,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetMatrix",
    "CropCounts",
    "budget_memory",
    "budget_standard",
    "clamp_to_available",
    "round_conserving",
    "subset_size",
    "PipelineResult",
    "PipelineSchedule",
    "build_schedule",
    "check_time_constraint",
    "inference_latency",
    "simulate_pipeline",
    "SubsetSelection",
    "brute_force_dispersion",
    "greedy_kcenter",
    "min_pairwise_distance",
    "per_camera_sds",
    "CropRecord",
    "StreamHeader",
    "SynthSpec",
    "normalize_feature",
    "parse_stream",
    "serialize_stream",
    "synth_stream",
    "NOISE",
    "ClusterLabels",
    "cluster_purity",
    "dbscan",
    "CostModel",
    "PipelineConfig",
    "FULL_GRID",
    "enumerate_grid",
    "grid_run",
    "Gallery",
    "global_match",
    "FilterConfig",
    "iou",
    "overlap_filter",
    "pose_pass",
    "sample_frames",
    "Table",
    "emit",
    "five_number_summary",
    "group_summaries",
    "MemoryBuffer",
    "TimeSegment",
    "assign_segment",
    "memory_view",
]
