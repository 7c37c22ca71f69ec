"""Batch experiment harness: configs, drivers, run storage and the CLI."""
from .config import RunConfig, from_dict, load
from .experiments import RunOutcome, run

__all__ = ["RunConfig", "RunOutcome", "from_dict", "load", "run"]
