"""Hysteretic structural models and bi-fidelity DeepONet surrogates."""

from ._core import (
    ConfigError,
    DeepOnet,
    DivergenceError,
    Error,
    IoError,
    bouc_wen_rate,
    cost_equalized_size,
    kanai_tajimi_psd,
    kanai_tajimi_realize,
    load_run_config,
    rel_rmse,
    sensor_indices,
    simulate,
)

__all__ = [
    "ConfigError",
    "DeepOnet",
    "DivergenceError",
    "Error",
    "IoError",
    "bouc_wen_rate",
    "cost_equalized_size",
    "kanai_tajimi_psd",
    "kanai_tajimi_realize",
    "load_run_config",
    "rel_rmse",
    "sensor_indices",
    "simulate",
]
