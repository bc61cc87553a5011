"""Config parsing and the ``iscc-sim`` command line."""

from iscc_sim.runner.cli import main, run, run_experiment
from iscc_sim.runner.config import SCHEMA, ExperimentConfig, default_config, parse_config, parse_config_text

__all__ = ["SCHEMA", "ExperimentConfig", "default_config", "main", "parse_config", "parse_config_text",
           "run", "run_experiment"]
