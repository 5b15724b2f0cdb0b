"""
Harness Monte-Carlo per modrec.

Fornisce:
- Result types tipizzati (Cell, TrialReport, CellSummary, SweepTable)
- Configurazione degli esperimenti (ExperimentConfig, ConfigLoader)
- Logging factory (LoggerFactory)
- Trial deterministici e servizio di sweep (run_trial, SweepService, run_sweep)
- Persistenza CSV (save_table, load_table, ...)

Usage:
    from modrec.workflows import ConfigLoader, run_sweep, save_table

    config = ConfigLoader.load("fig3", preset="desk")
    table = run_sweep(config, parallelism=4)
    save_table(table, "fig3.csv")
"""

from .result_types import Cell, CellSummary, SweepTable, TrialReport
from .config import ConfigLoader, ConfigurationError, ExperimentConfig
from .logging import LoggerFactory
from .trial import TrialData, prepare_trial, run_trial, signal_seed, simulate_signal, trial_seed
from .service import SweepService, run_sweep
from .storage import (
    SignalFile,
    load_reports,
    load_table,
    read_signal,
    save_reports,
    save_table,
    write_recovery,
    write_signal,
)

__all__ = [
    "Cell",
    "CellSummary",
    "SweepTable",
    "TrialReport",
    "ConfigLoader",
    "ConfigurationError",
    "ExperimentConfig",
    "LoggerFactory",
    "TrialData",
    "prepare_trial",
    "run_trial",
    "signal_seed",
    "simulate_signal",
    "trial_seed",
    "SweepService",
    "run_sweep",
    "SignalFile",
    "load_reports",
    "load_table",
    "read_signal",
    "save_reports",
    "save_table",
    "write_recovery",
    "write_signal",
]
