"""Result rows and their CSV/JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..errors import ConfigurationError, DistFregError
from ..evaluation import METRIC_NAMES

__all__ = ["ResultRow", "COLUMNS", "SCHEMA_ID", "emit_results", "rows_to_csv", "rows_to_json", "read_results_csv"]

SCHEMA_ID = "distfreg.results/1"


@dataclass(frozen=True)
class ResultRow:
    """One table cell: a metric averaged over replications.

    ``n_test`` is ``None`` for training-sample metrics and ``alpha`` is
    ``None`` for point and coefficient metrics.
    """

    experiment: str
    model: str
    K: int
    block_size: int
    n_train: int
    n_test: Optional[int]
    alpha: Optional[float]
    metric: str
    value: float
    mc_se: Optional[float]
    reps: int
    mean_block_seconds: Optional[float] = None
    response: str = ""
    covariate: str = ""
    flag: str = ""

    def __post_init__(self):
        if self.metric not in METRIC_NAMES:
            raise ConfigurationError(f"unknown metric name {self.metric!r}")


COLUMNS = tuple(f.name for f in fields(ResultRow))


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([_cell(v) for v in astuple(r)])
    return buf.getvalue()


def rows_to_json(rows: Sequence[ResultRow]) -> str:
    doc = {
        "schema": SCHEMA_ID,
        "columns": list(COLUMNS),
        "rows": [{c: _json_value(v) for c, v in zip(COLUMNS, astuple(r))} for r in rows],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def emit_results(rows: Iterable[ResultRow], path, fmt: str = "csv", timing: bool = True) -> Path:
    """Write rows to ``path`` as CSV or JSON.

    With ``timing=False`` the wall-clock column is blanked so that files from
    repeated runs compare byte for byte.
    """
    rows = list(rows)
    if not rows:
        raise DistFregError("no result rows to write")
    if not timing:
        rows = [r.__class__(**{**r.__dict__, "mean_block_seconds": None}) for r in rows]
    if fmt == "csv":
        text = rows_to_csv(rows)
    elif fmt == "json":
        text = rows_to_json(rows)
    else:
        raise ConfigurationError(f"format must be 'csv' or 'json', got {fmt!r}")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def read_results_csv(path) -> list:
    """Read a results CSV back as a list of dicts with string values."""
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
