from .config import (DEFAULT_THRESHOLDS, EXPERIMENTS, ExperimentConfig, config_from_dict,
                     dump_config, load_config, parse_config)
from .plotting import PLOT_KINDS, emit_plot
from .runner import HEADERS, ResultRecord, RunResult, run_experiment

__all__ = [
    "DEFAULT_THRESHOLDS", "EXPERIMENTS", "ExperimentConfig", "config_from_dict", "dump_config",
    "load_config", "parse_config", "PLOT_KINDS", "emit_plot", "HEADERS", "ResultRecord",
    "RunResult", "run_experiment",
]
