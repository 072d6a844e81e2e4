"""Search for the smallest actor and critic networks that still solve a task."""

import json

from ._core import (
    ConfigError,
    ContractError,
    EnvStep,
    Environment,
    IoError,
    SpecError,
    binary_search_min,
    make_env,
    param_count,
    pendulum_step,
    reduction_percent,
    standard_ladder,
)
from . import _core

__all__ = [
    "ConfigError",
    "ContractError",
    "EnvStep",
    "Environment",
    "IoError",
    "SpecError",
    "binary_search_min",
    "make_env",
    "param_count",
    "pendulum_step",
    "reduction_percent",
    "report",
    "search",
    "standard_ladder",
    "train",
]


def train(env, algo, actor=(), critic=(), seed=0, **overrides):
    """Train one agent and return its run record as a dict.

    Keyword overrides use the same names as the config file, e.g.
    ``total_steps=5000`` or ``alpha="auto"``.
    """
    return _core.train(env, algo, list(actor), list(critic), seed, json.dumps(overrides))


def search(config):
    """Run a full size search. `config` is a dict or a JSON string."""
    if not isinstance(config, str):
        config = json.dumps(config)
    return _core.search(config)


def report(output_dir, env, format="markdown"):
    """Rebuild the results table from the ledgers under `output_dir`."""
    return _core.report(str(output_dir), env, format)
