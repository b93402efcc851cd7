"""Adversarial training: losses, schedules, and the ambient loop."""
from .loop import Trainer, TrainConfig, TrainResult, prepare_targets, train
from .losses import (
    discriminator_loss,
    generator_loss,
    r1_penalty,
    wasserstein_gradient_penalty,
)
from .ops import ambient_fake_batch, measure_and_reconstruct
from .schedule import StageSchedule, fade_alpha

__all__ = [
    "StageSchedule",
    "TrainConfig",
    "TrainResult",
    "Trainer",
    "ambient_fake_batch",
    "discriminator_loss",
    "fade_alpha",
    "generator_loss",
    "measure_and_reconstruct",
    "prepare_targets",
    "r1_penalty",
    "train",
    "wasserstein_gradient_penalty",
]
