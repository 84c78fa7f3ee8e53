"""Tecator spectra: canonical CSV reader/writer and the repeated-split experiment.

Canonical file: header ``X1,...,X100,fat,protein,moisture`` followed by one
row per meat sample, UTF-8 with LF line endings. Absorbances are on a
uniform grid of 100 wavelengths from 850 nm to 1050 nm.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from ..dgp import stream_seed
from ..distributed import fit_global
from ..errors import DistFregError, ExperimentError, PartitionError, TecatorParseError
from ..fdcore import CurveSet, Dataset, Grid
from .config import TecatorConfig
from .simulation import evaluate_model, summarize

__all__ = [
    "TecatorRecord",
    "TECATOR_HEADER",
    "N_CHANNELS",
    "tecator_grid",
    "default_tecator_path",
    "load_tecator",
    "write_tecator",
    "tecator_arrays",
    "split_tecator",
    "run_tecator",
]

N_CHANNELS = 100
CONTENTS = ("fat", "protein", "moisture")
TECATOR_HEADER = tuple(f"X{i}" for i in range(1, N_CHANNELS + 1)) + CONTENTS
N_TEST = 65


@dataclass(frozen=True)
class TecatorRecord:
    absorbance: np.ndarray
    fat: float
    protein: float
    moisture: float

    def __eq__(self, other):
        if not isinstance(other, TecatorRecord):
            return NotImplemented
        return (
            np.array_equal(self.absorbance, other.absorbance)
            and (self.fat, self.protein, self.moisture) == (other.fat, other.protein, other.moisture)
        )

    __hash__ = None


def tecator_grid() -> Grid:
    return Grid.uniform(850.0, 1050.0, N_CHANNELS)


def default_tecator_path() -> Path:
    return Path(str(resources.files("distfreg") / "data" / "tecator.csv"))


def _check_header(header: List[str]) -> None:
    seen = set()
    for name in header:
        if name in seen:
            raise TecatorParseError(f"duplicate header column {name!r}", line=1)
        seen.add(name)
    missing = [c for c in TECATOR_HEADER if c not in seen]
    if missing:
        raise TecatorParseError(f"missing column {missing[0]!r}", line=1)
    extra = [c for c in header if c not in TECATOR_HEADER]
    if extra:
        raise TecatorParseError(f"unexpected column {extra[0]!r}", line=1)
    if tuple(header) != TECATOR_HEADER:
        raise TecatorParseError("columns are out of order", line=1)


def load_tecator(path=None) -> List[TecatorRecord]:
    """Read a canonical tecator CSV (the bundled copy when ``path`` is None)."""
    path = default_tecator_path() if path is None else Path(path)
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TecatorParseError("empty file", line=1) from None
        _check_header([h.strip() for h in header])
        width = len(TECATOR_HEADER)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != width:
                raise TecatorParseError(f"expected {width} fields, got {len(row)}", line=line)
            vals = np.empty(width)
            for j, cell in enumerate(row):
                try:
                    vals[j] = float(cell)
                except ValueError:
                    raise TecatorParseError(
                        f"non-numeric value {cell!r} in column {TECATOR_HEADER[j]}", line=line
                    ) from None
            if not np.all(np.isfinite(vals)):
                raise TecatorParseError("non-finite value", line=line)
            contents = vals[N_CHANNELS:]
            if np.any((contents < 0) | (contents > 100)):
                raise TecatorParseError("contents must lie in [0, 100] percent", line=line)
            absorb = vals[:N_CHANNELS].copy()
            absorb.setflags(write=False)
            records.append(TecatorRecord(absorb, float(contents[0]), float(contents[1]), float(contents[2])))
    if not records:
        raise TecatorParseError("no data rows", line=2)
    return records


def write_tecator(records: Sequence[TecatorRecord], path) -> Path:
    """Write records in the canonical format (values via ``repr``, so a re-read is exact)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TECATOR_HEADER)
        for rec in records:
            a = np.asarray(rec.absorbance, dtype=float)
            if a.size != N_CHANNELS:
                raise TecatorParseError(f"record has {a.size} channels, expected {N_CHANNELS}")
            writer.writerow([repr(float(v)) for v in a] + [repr(float(rec.fat)), repr(float(rec.protein)), repr(float(rec.moisture))])
    return path


def tecator_arrays(records: Sequence[TecatorRecord]):
    """``(curves, contents)`` where ``contents`` maps fat/protein/moisture to arrays."""
    x = np.stack([r.absorbance for r in records])
    contents = {name: np.array([getattr(r, name) for r in records]) for name in CONTENTS}
    return CurveSet(tecator_grid(), x), contents


def split_tecator(n_total: int, n_train: int, seed: int, rep: int):
    """Random train/test index split for resample ``rep``."""
    rng = np.random.default_rng(stream_seed(seed, "tecator", rep, 0))
    perm = rng.permutation(n_total)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def _run_resample(cfg: TecatorConfig, curves: CurveSet, contents, rep: int):
    tr, te = split_tecator(curves.n, cfg.n_train, cfg.seed, rep)
    y, z = contents[cfg.response], contents[cfg.covariate]
    train = Dataset(curves.subset(tr), y[tr], z[tr])
    test = Dataset(curves.subset(te), y[te], z[te])
    out = {}
    for kind in cfg.models:
        mcfg = replace(cfg.model_config, kind=kind)
        cells = []
        for K in cfg.k:
            try:
                model = fit_global(train, K, mcfg, alpha=cfg.alpha[0])
                cells.append(evaluate_model(model, train, test, cfg.alpha, (test.n,)))
            except DistFregError as exc:
                raise ExperimentError(rep, K, exc) from exc
        out[kind] = cells
    return out


def run_tecator(cfg: TecatorConfig, records: Optional[Sequence[TecatorRecord]] = None, return_reports: bool = False):
    """Repeated random splits; every requested model at every K on each split."""
    for K in cfg.k:
        if K < 1 or cfg.n_train % K:
            raise PartitionError(f"K={K} does not divide the training size {cfg.n_train}")
    if records is None:
        records = load_tecator(cfg.data_path)
    curves, contents = tecator_arrays(records)
    if not 0 < cfg.n_train < curves.n:
        raise DistFregError(f"training size {cfg.n_train} leaves no test data out of {curves.n}")
    reps = range(cfg.reps)
    if cfg.threads > 1 and cfg.reps > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            per_rep = list(pool.map(lambda r: _run_resample(cfg, curves, contents, r), reps))
    else:
        per_rep = [_run_resample(cfg, curves, contents, r) for r in reps]
    n_test = curves.n - cfg.n_train
    rows = []
    for kind in cfg.models:
        reports = [pr[kind] for pr in per_rep]
        rows.extend(summarize(reports, "tecator", cfg.alpha, (n_test,), response=cfg.response, covariate=cfg.covariate))
    if not cfg.timing:
        rows = [r.__class__(**{**r.__dict__, "mean_block_seconds": None}) for r in rows]
    return (rows, per_rep) if return_reports else rows
