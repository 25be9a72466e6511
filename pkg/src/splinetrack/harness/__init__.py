"""Experiment harness: scenario configs, runners, writers and the CLI."""

from .config import DEFAULTS, ConfigError, ScenarioConfig
from .experiments import run_bench, run_classification, run_tracking

__all__ = ["DEFAULTS", "ConfigError", "ScenarioConfig", "run_bench", "run_classification", "run_tracking"]
