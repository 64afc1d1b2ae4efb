"""Tables, five-number summaries, and deterministic CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import re
from dataclasses import dataclass, field
from typing import IO, Any, Iterable, Sequence

QUANTILE_RULE = "linear interpolation between order statistics (type 7)"
SUMMARY_FIELDS = ("min", "q1", "median", "q3", "max")


@dataclass
class Table:
    columns: list[str]
    rows: list[dict[str, Any]] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[Any]:
        if name not in self.columns:
            raise KeyError(f"unknown column {name!r}")
        return [r.get(name) for r in self.rows]

    def append(self, row: dict[str, Any]) -> None:
        extra = set(row) - set(self.columns)
        if extra:
            raise KeyError(f"row has columns not in table: {sorted(extra)}")
        self.rows.append(row)

    @classmethod
    def from_rows(cls, rows: Sequence[dict[str, Any]], columns: Sequence[str] | None = None) -> "Table":
        if columns is None:
            columns = []
            for r in rows:
                columns.extend(c for c in r if c not in columns)
        table = cls(list(columns))
        for r in rows:
            table.append(dict(r))
        return table


def five_number_summary(values: Iterable[float]) -> tuple[float, float, float, float, float]:
    """(min, Q1, median, Q3, max) using linear interpolation between order statistics."""
    xs = sorted(float(v) for v in values)
    if not xs:
        raise ValueError("five_number_summary needs at least one value")

    def q(p: float) -> float:
        h = (len(xs) - 1) * p
        lo = math.floor(h)
        hi = min(lo + 1, len(xs) - 1)
        return xs[lo] + (h - lo) * (xs[hi] - xs[lo])

    return xs[0], q(0.25), q(0.5), q(0.75), xs[-1]


@dataclass(frozen=True)
class SummaryRow:
    keys: tuple[Any, ...]
    count: int
    min: float
    q1: float
    median: float
    q3: float
    max: float


def group_summaries(
    table: Table,
    metric: str,
    group_keys: Sequence[str] = ("tau", "segment", "memory"),
    include_disqualified: bool = False,
) -> list[SummaryRow]:
    """One five-number summary of ``metric`` per group, sorted by the group keys.

    Rows with ``disqualified`` true are skipped unless ``include_disqualified``.
    Rows whose metric is empty are skipped.
    """
    for name in (metric, *group_keys):
        if name not in table.columns:
            raise KeyError(f"unknown column {name!r}")
    groups: dict[tuple, list[float]] = {}
    for row in table.rows:
        if not include_disqualified and row.get("disqualified"):
            continue
        val = row.get(metric)
        if val is None or val == "":
            continue
        groups.setdefault(tuple(row[k] for k in group_keys), []).append(float(val))
    out = []
    for key in sorted(groups):
        vals = groups[key]
        out.append(SummaryRow(key, len(vals), *five_number_summary(vals)))
    return out


def summaries_table(rows: Sequence[SummaryRow], group_keys: Sequence[str], metric: str) -> Table:
    table = Table([*group_keys, "count", *SUMMARY_FIELDS],
                  metadata={"metric": metric, "quantile_rule": QUANTILE_RULE})
    for r in rows:
        row = dict(zip(group_keys, r.keys))
        row.update(count=r.count, min=r.min, q1=r.q1, median=r.median, q3=r.q3, max=r.max)
        table.append(row)
    return table


def best_over_time(table: Table, metric: str, curve_keys: Sequence[str] = ("tau", "memory"),
                   time_key: str = "time_min", include_disqualified: bool = False
                   ) -> dict[tuple, list[tuple[float, float]]]:
    """Per curve, the best ``metric`` at each time point, as sorted (x, y) pairs."""
    best: dict[tuple, dict[float, float]] = {}
    for row in table.rows:
        if not include_disqualified and row.get("disqualified"):
            continue
        val = row.get(metric)
        if val is None or val == "":
            continue
        curve = best.setdefault(tuple(row[k] for k in curve_keys), {})
        x = float(row[time_key])
        curve[x] = max(curve.get(x, -math.inf), float(val))
    return {k: sorted(v.items()) for k, v in sorted(best.items())}


# ---------------------------------------------------------------------------
# Serialization


def format_value(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.6g}"
    return str(v)


_INT = re.compile(r"^-?\d+$")


def parse_value(text: str) -> Any:
    if text == "":
        return None
    if text == "true":
        return True
    if text == "false":
        return False
    if _INT.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def _json_value(v: Any) -> Any:
    if isinstance(v, float):
        if not math.isfinite(v):
            return format_value(v)
        return float(f"{v:.6g}")
    return v


def to_bytes(table: Table, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_value(row.get(c)) for c in table.columns])
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        doc = {
            "columns": table.columns,
            "rows": [[_json_value(row.get(c)) for c in table.columns] for row in table.rows],
            "metadata": {k: _json_value(v) for k, v in sorted(table.metadata.items())},
        }
        return (json.dumps(doc, indent=1, sort_keys=False) + "\n").encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}; expected 'csv' or 'json'")


def emit(table: Table, fmt: str, destination: str | os.PathLike[str] | IO[bytes]) -> int:
    """Write ``table`` as csv or json; returns the number of bytes written."""
    data = to_bytes(table, fmt)
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "wb") as fh:
            fh.write(data)
    else:
        destination.write(data)
    return len(data)


def parse_table(data: bytes, fmt: str = "csv") -> Table:
    text = data.decode("utf-8")
    if fmt == "csv":
        reader = csv.reader(io.StringIO(text))
        try:
            columns = next(reader)
        except StopIteration:
            raise ValueError("empty CSV: missing header") from None
        rows = [dict(zip(columns, (parse_value(v) for v in rec))) for rec in reader if rec]
        return Table(columns, rows)
    if fmt == "json":
        doc = json.loads(text)
        columns = list(doc["columns"])
        rows = [dict(zip(columns, rec)) for rec in doc["rows"]]
        return Table(columns, rows, dict(doc.get("metadata", {})))
    raise ValueError(f"unknown format {fmt!r}")


def read_table(path: str | os.PathLike[str]) -> Table:
    fmt = "json" if str(path).endswith(".json") else "csv"
    with open(path, "rb") as fh:
        return parse_table(fh.read(), fmt)


def write_series(series: Sequence[tuple[float, float]], destination: str | os.PathLike[str]) -> int:
    table = Table(["x", "y"], [{"x": x, "y": y} for x, y in series])
    return emit(table, "csv", destination)
