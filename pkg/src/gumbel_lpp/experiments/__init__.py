"""Config-driven experiments with reproducible reports."""
from .config import EXPERIMENTS, ConfigError, ExperimentConfig, parse_config, validate
from .report import emit_report, emit_reports, load_manifest
from .runner import Case, ExperimentReport, run

__all__ = ["EXPERIMENTS", "ConfigError", "ExperimentConfig", "parse_config", "validate",
           "emit_report", "emit_reports", "load_manifest", "Case", "ExperimentReport", "run"]
