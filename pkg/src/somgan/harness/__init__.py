"""Configuration, dataset persistence, CLI and experiment orchestration."""
from .config import (
    ExperimentConfig,
    apply_overrides,
    config_from_dict,
    config_hash,
    data_hash,
    load_config,
)
from .dataset import (
    calibrate_signal_amplitude,
    default_roi,
    default_signal_spec,
    load_domain,
    read_manifest,
    simulate_dataset,
)
from .gridviz import style_mix_fields, style_mix_grid, within_between_correlation
from .pipeline import evaluate_run, run_pipeline, train_config_from

__all__ = [
    "ExperimentConfig",
    "apply_overrides",
    "calibrate_signal_amplitude",
    "config_from_dict",
    "config_hash",
    "data_hash",
    "default_roi",
    "default_signal_spec",
    "evaluate_run",
    "load_config",
    "load_domain",
    "read_manifest",
    "run_pipeline",
    "simulate_dataset",
    "style_mix_fields",
    "style_mix_grid",
    "train_config_from",
    "within_between_correlation",
]
