"""Janus-artifact simulator for score distillation."""

from ._januslab import (
    ConfigError,
    InvalidArgument,
    KeyLookupError,
    Scenario,
    clip_score,
    debias_prompt,
    default_config_text,
    dynamic_threshold,
    pmi,
    view_prompt,
)

__all__ = [
    "ConfigError",
    "InvalidArgument",
    "KeyLookupError",
    "Scenario",
    "clip_score",
    "debias_prompt",
    "default_config_text",
    "dynamic_threshold",
    "pmi",
    "view_prompt",
]

__version__ = "0.1.0"
