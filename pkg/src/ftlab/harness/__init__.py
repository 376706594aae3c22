"""Experiment orchestration: configs, runners, reports and the CLI."""
from .config import EXPERIMENTS, ExperimentConfig
from .experiments import RUNNERS, check_system, default_config, run_experiment
from .report import ExperimentReport, fit

__all__ = ["EXPERIMENTS", "ExperimentConfig", "ExperimentReport", "RUNNERS", "check_system", "default_config",
           "fit", "run_experiment"]
