"""Progressive-growing schedule arithmetic, counted in images seen."""
from dataclasses import dataclass

from ..errors import ParameterError


def fade_alpha(step_in_stage, fade_end) -> float:
    """Linear ramp 0 -> 1 over the first fade_end steps, then 1."""
    if step_in_stage < 0:
        raise ParameterError(f"step_in_stage must be >= 0, got {step_in_stage}")
    if fade_end <= 0:
        return 1.0
    return min(1.0, step_in_stage / fade_end)


@dataclass(frozen=True)
class StageSchedule:
    """Stage layout for progressive training.

    Stage s runs for images_per_stage images; growth fires exactly when the
    cumulative count crosses a stage boundary.  Stage 0 never fades.
    """

    n_stages: int
    images_per_stage: int
    fade_fraction: float = 0.5

    def __post_init__(self):
        if self.n_stages < 1:
            raise ParameterError("need at least one stage")
        if self.images_per_stage < 1:
            raise ParameterError("images_per_stage must be positive")
        if not 0.0 <= self.fade_fraction <= 1.0:
            raise ParameterError(f"fade_fraction must be in [0,1], got {self.fade_fraction}")

    @property
    def total_images(self):
        return self.n_stages * self.images_per_stage

    def stage_at(self, images_seen) -> int:
        return min(images_seen // self.images_per_stage, self.n_stages - 1)

    def alpha_at(self, images_seen) -> float:
        stage = self.stage_at(images_seen)
        if stage == 0:
            return 1.0
        in_stage = images_seen - stage * self.images_per_stage
        return fade_alpha(in_stage, self.fade_fraction * self.images_per_stage)

    def grow_points(self):
        return [s * self.images_per_stage for s in range(1, self.n_stages)]
