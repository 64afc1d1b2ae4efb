"""Pipeline configuration, stage cost model, and the flat ``key = value`` file format.

A config file holds one ``key = value`` pair per line; ``#`` starts a comment.
Values are coerced to the type of the matching dataclass field, so booleans
accept ``true/false/yes/no/1/0``.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Any, Mapping, TypeVar

from .cluster import EUCLIDEAN
from .quality_filter import FilterConfig
from .sds import METRICS

STRICT = "strict"
RELAXED = "relaxed"


@dataclass(frozen=True)
class CostModel:
    """Maps stage workloads to simulated durations in seconds.

    SDS takes ``sds_overhead_s + sds_cost_per_eval * distance_evaluations``;
    training takes ``train_overhead_s + train_cost_per_iteration * E * I +
    train_cost_per_crop * subset_size``.
    """

    sds_cost_per_eval: float = 2e-6
    sds_overhead_s: float = 0.0
    train_cost_per_iteration: float = 0.45
    train_cost_per_crop: float = 0.02
    train_overhead_s: float = 0.0

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be >= 0")

    def sds_duration(self, distance_evals: int) -> float:
        return self.sds_overhead_s + self.sds_cost_per_eval * distance_evals

    def train_duration(self, epochs: int, iterations: int, subset_size: int) -> float:
        return (self.train_overhead_s
                + self.train_cost_per_iteration * epochs * iterations
                + self.train_cost_per_crop * subset_size)

    @classmethod
    def zero(cls) -> "CostModel":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class PipelineConfig:
    tau_minutes: float = 20.0
    K: int = 20
    E: int = 1
    I: int = 100
    memory: bool = False
    num_identities: int = 702
    metric: str = EUCLIDEAN
    budget_mode: str = "oracle"
    retention_minutes: float = 60.0
    redistribute: bool = False
    eps: float = 0.6
    min_pts: int = 4
    filter: FilterConfig = field(default_factory=FilterConfig)
    filter_reid_path: bool = True
    match: bool = True
    match_threshold: float = 0.5
    match_momentum: float = 0.9
    constraint: str = STRICT
    max_depth: int = 4
    measure: str = "model"
    executor: str = "sequential"
    sds_workers: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.tau_minutes > 0:
            raise ValueError("tau_minutes must be > 0")
        for name in ("K", "E", "I", "num_identities"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.budget_mode not in ("oracle", "causal"):
            raise ValueError("budget_mode must be 'oracle' or 'causal'")
        if self.constraint not in (STRICT, RELAXED):
            raise ValueError("constraint must be 'strict' or 'relaxed'")
        if self.max_depth < 3:
            raise ValueError("max_depth must be >= 3 (collect, select, train)")
        if self.measure not in ("model", "real"):
            raise ValueError("measure must be 'model' or 'real'")
        if self.executor not in ("sequential", "threaded"):
            raise ValueError("executor must be 'sequential' or 'threaded'")
        if not self.eps > 0 or self.min_pts < 1:
            raise ValueError("eps must be > 0 and min_pts >= 1")
        if not 0.0 <= self.match_momentum <= 1.0:
            raise ValueError("match_momentum must be in [0, 1]")

    @property
    def k(self) -> int:
        return self.K * self.num_identities


_FILTER_KEYS = {f.name for f in dataclasses.fields(FilterConfig)}

T = TypeVar("T")


def _coerce(value: Any, annotation: str) -> Any:
    if not isinstance(value, str):
        return value
    text = value.strip()
    if annotation == "bool":
        low = text.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if annotation == "int":
        return int(text)
    if annotation == "float":
        return float(text)
    return text


def _build(cls: type[T], values: Mapping[str, Any], base: T | None = None) -> T:
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, val in values.items():
        if key not in types:
            raise KeyError(f"unknown {cls.__name__} key {key!r}")
        kwargs[key] = _coerce(val, str(types[key]))
    if base is None:
        return cls(**kwargs)
    return dataclasses.replace(base, **kwargs)


def read_flat_config(path: str | os.PathLike[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in text.split("=", 1))
            out[key] = val
    return out


def pipeline_config(values: Mapping[str, Any], base: PipelineConfig | None = None) -> PipelineConfig:
    """Build a PipelineConfig from flat keys; filter keys land in the nested FilterConfig."""
    base = base or PipelineConfig()
    top = {k: v for k, v in values.items() if k not in _FILTER_KEYS}
    flt = {k: v for k, v in values.items() if k in _FILTER_KEYS}
    cfg = _build(PipelineConfig, top, base)
    if flt:
        cfg = dataclasses.replace(cfg, filter=_build(FilterConfig, flt, cfg.filter))
    return cfg


def cost_model(values: Mapping[str, Any], base: CostModel | None = None) -> CostModel:
    return _build(CostModel, values, base)


def load_pipeline_config(path: str | os.PathLike[str]) -> PipelineConfig:
    return pipeline_config(read_flat_config(path))


def load_cost_model(path: str | os.PathLike[str]) -> CostModel:
    return cost_model(read_flat_config(path))


def flatten_config(cfg: PipelineConfig) -> dict[str, Any]:
    """Inverse of :func:`pipeline_config`: one flat dict including filter keys."""
    out = {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg) if f.name != "filter"}
    out.update(dataclasses.asdict(cfg.filter))
    return out
