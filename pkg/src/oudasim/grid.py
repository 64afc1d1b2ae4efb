"""Experiment grids: enumerate configurations, simulate each, collect result tables."""

from __future__ import annotations

import dataclasses
import itertools
import os
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

from .config import CostModel, PipelineConfig, pipeline_config, read_flat_config
from .pipeline import (
    EXPERIMENT_COLUMNS,
    SEGMENT_COLUMNS,
    PreparedStream,
    experiment_row,
    prepare_stream,
    segment_rows,
    simulate_pipeline,
)
from .report import Table
from .stream_model import CropRecord, StreamHeader
from .trainer import Trainer

# Ranges explored for the real-time experiments: 6 K x 6 I x 4 E x 3 tau x 2 modes.
FULL_GRID: dict[str, list[Any]] = {
    "tau_minutes": [15, 20, 30],
    "memory": [False, True],
    "K": [18, 20, 25, 30, 40, 50],
    "E": [1, 2, 3, 5],
    "I": [100, 250, 500, 750, 1000, 1500],
}


def enumerate_grid(grid: Mapping[str, Sequence[Any]],
                   base: PipelineConfig | None = None) -> list[PipelineConfig]:
    """Cartesian product of ``grid`` over ``base``; the first key varies slowest."""
    base = base or PipelineConfig()
    keys = list(grid)
    configs = []
    for combo in itertools.product(*(list(grid[k]) for k in keys)):
        configs.append(pipeline_config(dict(zip(keys, combo)), base))
    return configs


def load_grid(path: str | os.PathLike[str]) -> tuple[dict[str, list[str]], dict[str, str]]:
    """Read a grid file: comma-separated values are swept, single values fix the base config.

    ``grid = full`` pulls in the full 864-configuration ranges before any other key.
    """
    flat = read_flat_config(path)
    grid: dict[str, list[Any]] = {}
    base: dict[str, str] = {}
    if flat.pop("grid", "").strip().lower() == "full":
        grid.update({k: list(v) for k, v in FULL_GRID.items()})
    for key, val in flat.items():
        if "," in val:
            grid[key] = [v.strip() for v in val.split(",") if v.strip()]
        else:
            base[key] = val
    return grid, base


@dataclass
class GridResult:
    experiments: Table
    segments: Table
    configs: list[PipelineConfig]


def _prep_key(cfg: PipelineConfig) -> tuple:
    return (cfg.tau_minutes, cfg.filter, cfg.filter_reid_path)


def grid_run(
    grid: Mapping[str, Sequence[Any]] | Sequence[PipelineConfig],
    header: StreamHeader,
    records: Sequence[CropRecord],
    cost_model: CostModel | None = None,
    base: PipelineConfig | None = None,
    trainer_factory: Callable[[CostModel], Trainer] | None = None,
    progress: Callable[[int, int, PipelineConfig], None] | None = None,
) -> GridResult:
    """Simulate every configuration and tabulate one row per configuration.

    Rows follow the enumeration order. Filtering is shared across configurations
    with the same tau and filter settings, and selection/clustering across
    configurations that only differ in training parameters.
    """
    cost_model = cost_model or CostModel()
    if isinstance(grid, Mapping):
        configs = enumerate_grid(grid, base)
    else:
        configs = list(grid)
    prepared: dict[tuple, PreparedStream] = {}
    selections: dict = {}
    experiments = Table(list(EXPERIMENT_COLUMNS))
    segments = Table(list(SEGMENT_COLUMNS))
    for n, cfg in enumerate(configs):
        cfg = dataclasses.replace(cfg, executor="sequential")
        key = _prep_key(cfg)
        if key not in prepared:
            prepared[key] = prepare_stream(header, records, cfg)
        trainer = trainer_factory(cost_model) if trainer_factory else None
        result = simulate_pipeline(header, records, cfg, cost_model, trainer,
                                   prepared=prepared[key], selection_cache=selections)
        experiments.append(experiment_row(result))
        for row in segment_rows(result):
            segments.append(row)
        if progress:
            progress(n + 1, len(configs), cfg)
    return GridResult(experiments, segments, configs)
