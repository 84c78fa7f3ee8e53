"""Experiment driver, tecator data and command-line interface."""

from .config import PROFILES, TECATOR_PAIRINGS, ExperimentConfig, TecatorConfig, read_config_file
from .io import COLUMNS, SCHEMA_ID, ResultRow, emit_results, read_results_csv, rows_to_csv, rows_to_json
from .simulation import evaluate_model, run_replication, run_simulation, summarize
from .tecator import TecatorRecord, load_tecator, run_tecator, tecator_arrays, write_tecator

__all__ = [
    "PROFILES",
    "TECATOR_PAIRINGS",
    "ExperimentConfig",
    "TecatorConfig",
    "read_config_file",
    "COLUMNS",
    "SCHEMA_ID",
    "ResultRow",
    "emit_results",
    "read_results_csv",
    "rows_to_csv",
    "rows_to_json",
    "evaluate_model",
    "run_replication",
    "run_simulation",
    "summarize",
    "TecatorRecord",
    "load_tecator",
    "run_tecator",
    "tecator_arrays",
    "write_tecator",
]
