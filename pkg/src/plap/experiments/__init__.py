"""Command-line experiments: sampling, solving, the one-dimensional interpolation figure and the sweeps."""
from .commands import COMMANDS, CommandError
from .config import ConfigError, ExperimentConfig

__all__ = ["COMMANDS", "CommandError", "ConfigError", "ExperimentConfig"]
