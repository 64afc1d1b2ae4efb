"""Command line entry point: ``oudasim run|grid|report|oracle``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import report
from .config import (
    CostModel,
    PipelineConfig,
    load_cost_model,
    pipeline_config,
    read_flat_config,
)
from .grid import FULL_GRID, grid_run, load_grid
from .oracles import check_dbscan_vs_naive, check_greedy_vs_brute_force
from .pipeline import (
    BUDGET_COLUMNS,
    EXPERIMENT_COLUMNS,
    SCHEDULE_COLUMNS,
    SEGMENT_COLUMNS,
    SUBSET_COLUMNS,
    PipelineResult,
    budget_rows,
    experiment_row,
    run_summary,
    schedule_rows,
    segment_rows,
    simulate_pipeline,
    subset_rows,
)
from .stream_model import load_streams, parse_synth_spec, synth_stream
from .trainer import SubprocessTrainer

log = logging.getLogger("oudasim")

# flag dest -> config key
_FLAG_KEYS = {
    "tau": "tau_minutes",
    "K": "K",
    "E": "E",
    "I": "I",
    "memory": "memory",
    "budget_mode": "budget_mode",
    "metric": "metric",
    "eps": "eps",
    "min_pts": "min_pts",
    "num_identities": "num_identities",
    "constraint": "constraint",
    "max_depth": "max_depth",
    "measure": "measure",
    "executor": "executor",
    "seed": "seed",
    "retention": "retention_minutes",
}


def _add_input_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--stream", nargs="+", metavar="PATH",
                     help="stream file(s); several files are merged by timestamp")
    src.add_argument("--synth", metavar="SPEC",
                     help="synthetic stream: a key=value file or inline 'k=v,k=v'")
    p.add_argument("--config", metavar="PATH", help="flat key = value pipeline config")
    p.add_argument("--cost-model", metavar="PATH", help="flat key = value cost model")
    p.add_argument("--out", metavar="DIR", default="out", help="output directory")
    p.add_argument("--seed", type=int, help="rng seed (also reseeds --synth streams)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--E", type=int)
    p.add_argument("--I", type=int)
    p.add_argument("--memory", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--budget-mode", choices=["oracle", "causal"])
    p.add_argument("--metric", choices=["euclidean", "cosine"])
    p.add_argument("--eps", type=float)
    p.add_argument("--min-pts", type=int)
    p.add_argument("--num-identities", type=int)
    p.add_argument("--constraint", choices=["strict", "relaxed"])
    p.add_argument("--max-depth", type=int)
    p.add_argument("--measure", choices=["model", "real"])
    p.add_argument("--executor", choices=["sequential", "threaded"])
    p.add_argument("--retention", type=float, help="memory retention in minutes")
    p.add_argument("--trainer-cmd", help="external trainer command (JSON over stdin/stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oudasim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one pipeline configuration")
    _add_input_args(run)
    _add_config_flags(run)

    grid = sub.add_parser("grid", help="simulate every configuration of a grid")
    _add_input_args(grid)
    grid.add_argument("--grid", required=True, metavar="PATH",
                      help="grid file (comma-separated values are swept) or 'full'")

    rep = sub.add_parser("report", help="five-number summaries over a grid's segment table")
    rep.add_argument("--in", dest="indir", required=True, metavar="DIR")
    rep.add_argument("--format", choices=["csv", "json"], default="csv")
    rep.add_argument("--metric", default="purity")
    rep.add_argument("--group", default="tau,segment,memory")
    rep.add_argument("--include-disqualified", action="store_true")
    rep.add_argument("--out", metavar="DIR", help="defaults to --in")

    orc = sub.add_parser("oracle", help="run the brute-force cross-checks")
    orc.add_argument("--instances", type=int, default=1000)
    orc.add_argument("--dbscan-instances", type=int, default=200)
    orc.add_argument("--seed", type=int, default=0)
    return parser


def _load_input(args: argparse.Namespace):
    if args.stream:
        return load_streams(args.stream)
    text = Path(args.synth).read_text() if os.path.exists(args.synth) else args.synth
    spec = parse_synth_spec(text)
    if args.seed is not None:
        spec = dataclasses.replace(spec, rng_seed=args.seed)
    return synth_stream(spec)


def _config_from_args(args: argparse.Namespace, extra: dict[str, Any] | None = None) -> PipelineConfig:
    values: dict[str, Any] = {}
    if args.config:
        values.update(read_flat_config(args.config))
    values.update(extra or {})
    for dest, key in _FLAG_KEYS.items():
        val = getattr(args, dest, None)
        if val is not None:
            values[key] = val
    for item in args.set:
        key, _, val = item.partition("=")
        values[key.strip()] = val.strip()
    return pipeline_config(values)


def _cost_model(args: argparse.Namespace) -> CostModel:
    return load_cost_model(args.cost_model) if args.cost_model else CostModel()


def write_run_outputs(result: PipelineResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    report.emit(report.Table.from_rows(schedule_rows(result.schedule), SCHEDULE_COLUMNS), "csv",
                out / "schedule.csv")
    report.emit(report.Table.from_rows(subset_rows(result), SUBSET_COLUMNS), "csv", out / "subsets.csv")
    report.emit(report.Table.from_rows(budget_rows(result), BUDGET_COLUMNS), "csv", out / "budgets.csv")
    report.emit(report.Table.from_rows([experiment_row(result)], EXPERIMENT_COLUMNS), "csv",
                out / "experiments.csv")
    report.emit(report.Table.from_rows(segment_rows(result), SEGMENT_COLUMNS), "csv", out / "segments.csv")
    (out / "summary.json").write_text(json.dumps(run_summary(result), indent=1, default=str) + "\n")


def cmd_run(args: argparse.Namespace) -> int:
    header, records = _load_input(args)
    cfg = _config_from_args(args)
    trainer = SubprocessTrainer(args.trainer_cmd.split()) if args.trainer_cmd else None
    result = simulate_pipeline(header, records, cfg, _cost_model(args), trainer)
    out = Path(args.out)
    write_run_outputs(result, out)
    summary = run_summary(result)
    print(f"segments={summary['num_segments']} passed={summary['passed']} "
          f"latency_min={summary['latency_minutes']} -> {out}")
    return 0


def cmd_grid(args: argparse.Namespace) -> int:
    header, records = _load_input(args)
    if args.grid == "full":
        grid, base_vals = dict(FULL_GRID), {}
    else:
        grid, base_vals = load_grid(args.grid)
    base = _config_from_args(args, base_vals)

    def progress(done: int, total: int, cfg: PipelineConfig) -> None:
        log.info("grid %d/%d tau=%s K=%s E=%s I=%s memory=%s",
                 done, total, cfg.tau_minutes, cfg.K, cfg.E, cfg.I, cfg.memory)

    result = grid_run(grid, header, records, _cost_model(args), base, progress=progress)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.emit(result.experiments, "csv", out / "experiments.csv")
    report.emit(result.segments, "csv", out / "segments.csv")
    failed = sum(1 for r in result.experiments.rows if r["disqualified"])
    print(f"configurations={len(result.experiments)} disqualified={failed} -> {out}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    indir = Path(args.indir)
    out = Path(args.out) if args.out else indir
    out.mkdir(parents=True, exist_ok=True)
    table = report.read_table(indir / "segments.csv")
    keys = [k.strip() for k in args.group.split(",") if k.strip()]
    rows = report.group_summaries(table, args.metric, keys, args.include_disqualified)
    summary = report.summaries_table(rows, keys, args.metric)
    n = report.emit(summary, args.format, out / f"summary_{args.metric}.{args.format}")
    curves = report.best_over_time(table, args.metric,
                                   include_disqualified=args.include_disqualified)
    for (tau, memory), series in curves.items():
        name = f"best_{args.metric}_tau{report.format_value(tau)}_{'memory' if memory else 'standard'}.csv"
        report.write_series(series, out / name)
    print(f"{len(rows)} summary rows ({n} bytes), {len(curves)} curves -> {out}")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    reports = [
        check_greedy_vs_brute_force(args.instances, args.seed),
        check_dbscan_vs_naive(args.dbscan_instances, args.seed),
    ]
    for r in reports:
        print(r.line())
    return 0 if all(r.ok for r in reports) else 1


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": cmd_run, "grid": cmd_grid, "report": cmd_report, "oracle": cmd_oracle}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
