"""Experiment configuration, execution, trace I/O, slope fits and verification suites."""
from .config import ExperimentConfig, config_from_dict, load_config
from .runner import OUTPUT_ENV, RunResult, compare, execute, output_dir, run
from .slopes import SlopeFit, fit_slope
from .traceio import read_trace_csv, write_metadata, write_trace_csv
from .verify import SUITES, Check, SuiteReport, run_suites

__all__ = [
    "ExperimentConfig", "config_from_dict", "load_config", "OUTPUT_ENV", "RunResult", "compare",
    "execute", "output_dir", "run", "SlopeFit", "fit_slope", "read_trace_csv", "write_metadata",
    "write_trace_csv", "SUITES", "Check", "SuiteReport", "run_suites",
]
