"""Adversarial training loop with the measurement operator in the fake branch.

In ambient mode the dataset holds complex k-space measurements, which are
reconstructed once at load (the reconstruction operator is deterministic)
and cached as the real targets; generated objects pass through the
measurement + reconstruction chain with fresh noise per sample per step, so
the discriminator only ever sees reconstruction-domain images.  In baseline
mode the dataset holds (typically noisy) reconstructed images and generator
outputs go to the discriminator directly.

Reproducibility: module initialization uses the global torch RNG seeded
from the config; batch indices, latents and measurement noise come from a
dedicated torch.Generator.  Both states are checkpointed, so a resumed run
continues the exact metric trajectory of an uninterrupted one.  Adam
moments are reset when a new stage is grown (new parameter groups appear);
optimizer states are checkpointed as-is between growth events.
"""
import copy
import json
import os
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import ConfigError
from ..imaging import ImagingConfig, reconstruct
from ..nets import (
    ProgressiveDiscriminator,
    ProgressiveGenerator,
    StyledGenerator,
    read_sidecar,
    save_checkpoint,
)
from .losses import (
    LOSS_KINDS,
    discriminator_loss,
    generator_loss,
    r1_penalty,
    wasserstein_gradient_penalty,
)
from .ops import measure_and_reconstruct
from .schedule import StageSchedule

MODES = ("ambient", "baseline")
ARCHS = ("plain", "progressive", "styled")


@dataclass(frozen=True)
class TrainConfig:
    mode: str = "ambient"
    arch: str = "progressive"
    loss: str = "logistic"
    dims: int = 2
    final_stage: int = 4
    latent_dim: int = 64
    base_channels: int = 32
    max_channels: int = 128
    batch_size: object = 16            # int, or one int per stage
    images_per_stage: int = 40_000
    fade_fraction: float = 0.5
    total_images: int = 0              # plain/styled only
    lr_g: float = 1e-3
    lr_d: float = 1e-3
    adam_beta1: float = 0.0
    adam_beta2: float = 0.99
    r1_gamma: float = 10.0
    r1_interval: int = 16
    gp_weight: float = 10.0
    ema_decay: float = 0.0
    seed: int = 0
    imaging: ImagingConfig = field(default=None)
    mapping_depth: int = 4
    noise_scale_init: float = 0.1
    pixelnorm: bool = True
    minibatch_stddev: bool = True
    equalized_lr: bool = True
    padding_mode: str = "circular"
    log_interval: int = 50
    checkpoint_interval: int = 0       # steps; 0 = final checkpoint only
    config_hash: str = ""

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.arch not in ARCHS:
            raise ConfigError(f"arch must be one of {ARCHS}, got {self.arch!r}")
        if self.loss not in LOSS_KINDS:
            raise ConfigError(f"loss must be one of {LOSS_KINDS}, got {self.loss!r}")
        if not 0.0 <= self.fade_fraction <= 1.0:
            raise ConfigError(f"fade_fraction must be in [0,1], got {self.fade_fraction}")
        if min(self._batch_sizes()) < 1:
            raise ConfigError("batch sizes must be positive")
        if min(self.lr_g, self.lr_d) <= 0:
            raise ConfigError("learning rates must be positive")
        if self.imaging is None:
            object.__setattr__(self, "imaging",
                               ImagingConfig(dims=self.dims, noise_std=0.0))
        if self.imaging.dims != self.dims:
            raise ConfigError(
                f"imaging dims {self.imaging.dims} does not match model dims {self.dims}")
        if self.arch in ("plain", "styled") and self.total_images <= 0:
            raise ConfigError(f"{self.arch} training requires total_images > 0")

    def _batch_sizes(self):
        if np.isscalar(self.batch_size):
            return [int(self.batch_size)] * (self.final_stage + 1)
        sizes = [int(b) for b in self.batch_size]
        if len(sizes) != self.final_stage + 1:
            raise ConfigError(
                f"need {self.final_stage + 1} per-stage batch sizes, got {len(sizes)}")
        return sizes

    def batch_size_at(self, stage):
        return self._batch_sizes()[stage]

    @property
    def progressive(self):
        return self.arch == "progressive"

    @property
    def schedule(self):
        if self.progressive:
            return StageSchedule(self.final_stage + 1, self.images_per_stage,
                                 self.fade_fraction)
        return None

    @property
    def run_images(self):
        return self.schedule.total_images if self.progressive else self.total_images

    @property
    def final_resolution(self):
        return 4 * 2**self.final_stage


@dataclass
class TrainResult:
    checkpoint_path: str
    metrics_path: str
    step: int
    images_seen: int
    sidecar: dict


def prepare_targets(data, cfg: TrainConfig) -> np.ndarray:
    """Validate the dataset against the config and return real-image targets."""
    data = np.asarray(data)
    if data.ndim != cfg.dims + 1 or data.shape[0] == 0:
        raise ConfigError(f"dataset shape {data.shape} does not match dims {cfg.dims}")
    res = cfg.final_resolution
    if data.shape[1:] != (res,) * cfg.dims:
        raise ConfigError(
            f"dataset spatial shape {data.shape[1:]} does not match final resolution {res}")
    if cfg.mode == "ambient":
        if not np.iscomplexobj(data):
            raise ConfigError("ambient mode expects complex k-space measurements")
        return reconstruct(data, dims=cfg.dims).astype(np.float32)
    if np.iscomplexobj(data):
        raise ConfigError("baseline mode expects real reconstructed images")
    return data.astype(np.float32)


class Trainer:
    def __init__(self, data, cfg: TrainConfig, out_dir, resume=None):
        self.cfg = cfg
        self.out_dir = os.fspath(out_dir)
        os.makedirs(os.path.join(self.out_dir, "checkpoints"), exist_ok=True)
        targets = prepare_targets(data, cfg)
        self.targets = torch.from_numpy(np.ascontiguousarray(targets))

        torch.manual_seed(cfg.seed)
        start_stage = cfg.final_stage if not cfg.progressive else 0
        if cfg.arch == "styled":
            self.gen = StyledGenerator(
                dims=cfg.dims, latent_dim=cfg.latent_dim, max_stage=cfg.final_stage,
                base_channels=cfg.base_channels, max_channels=cfg.max_channels,
                mapping_depth=cfg.mapping_depth, noise_scale_init=cfg.noise_scale_init,
                padding_mode=cfg.padding_mode, equalized_lr=cfg.equalized_lr)
        else:
            self.gen = ProgressiveGenerator(
                dims=cfg.dims, latent_dim=cfg.latent_dim, max_stage=cfg.final_stage,
                base_channels=cfg.base_channels, max_channels=cfg.max_channels,
                pixelnorm=cfg.pixelnorm, padding_mode=cfg.padding_mode,
                equalized_lr=cfg.equalized_lr, start_stage=start_stage)
            self.gen.mode = cfg.arch
        self.disc = ProgressiveDiscriminator(
            dims=cfg.dims, max_stage=cfg.final_stage, base_channels=cfg.base_channels,
            max_channels=cfg.max_channels, minibatch_stddev=cfg.minibatch_stddev,
            padding_mode=cfg.padding_mode, equalized_lr=cfg.equalized_lr,
            start_stage=cfg.final_stage if not cfg.progressive else 0)

        self.loop_rng = torch.Generator().manual_seed(cfg.seed + 1)
        self.step = 0
        self.images_seen = 0
        self.metric_buffer = deque(maxlen=256)
        self.gen_ema = copy.deepcopy(self.gen) if cfg.ema_decay > 0 else None
        self._build_optimizers()
        self._stage_targets_cache = (None, None)

        if resume is not None:
            self._restore(resume)
        self._metrics_file = open(os.path.join(self.out_dir, "metrics.ndjson"), "a")

    # -- construction helpers -------------------------------------------------

    def _build_optimizers(self):
        betas = (self.cfg.adam_beta1, self.cfg.adam_beta2)
        self.opt_g = torch.optim.Adam(self.gen.parameters(), lr=self.cfg.lr_g, betas=betas)
        self.opt_d = torch.optim.Adam(self.disc.parameters(), lr=self.cfg.lr_d, betas=betas)

    def _restore(self, checkpoint_path):
        sidecar = read_sidecar(checkpoint_path)
        if self.cfg.config_hash and sidecar["config_hash"] != self.cfg.config_hash:
            raise ConfigError(
                f"resume hash mismatch: checkpoint {sidecar['config_hash']!r} "
                f"vs config {self.cfg.config_hash!r}")
        blob = torch.load(checkpoint_path, map_location="cpu", weights_only=True)
        while self.gen.stage < sidecar["stage"]:
            self.gen.grow()
            self.disc.grow()
        self.gen.load_state_dict(blob["generator"])
        self.disc.load_state_dict(blob["discriminator"])
        self.gen.alpha = self.disc.alpha = sidecar["alpha"]
        self._build_optimizers()
        self.opt_g.load_state_dict(blob["opt_g"])
        self.opt_d.load_state_dict(blob["opt_d"])
        self.loop_rng.set_state(blob["loop_rng"])
        torch.set_rng_state(blob["torch_rng"])
        self.step = sidecar["step"]
        self.images_seen = blob["images_seen"]
        if self.gen_ema is not None and "generator_ema" in blob:
            self.gen_ema.load_state_dict(blob["generator_ema"])

    # -- data ------------------------------------------------------------------

    def _targets_at_stage(self, stage):
        cached_stage, cached = self._stage_targets_cache
        if cached_stage == stage:
            return cached
        x = self.targets[:, None]
        for _ in range(self.cfg.final_stage - stage):
            x = torch.nn.functional.avg_pool2d(x, 2) if self.cfg.dims == 2 \
                else torch.nn.functional.avg_pool3d(x, 2)
        self._stage_targets_cache = (stage, x)
        return x

    def _real_batch(self, batch, stage):
        pool = self._targets_at_stage(stage)
        idx = torch.randint(0, pool.shape[0], (batch,), generator=self.loop_rng)
        return pool[idx]

    def _fake_batch(self, batch, track_w=False):
        cfg = self.cfg
        z = torch.randn(batch, cfg.latent_dim, generator=self.loop_rng)
        if cfg.arch == "styled":
            w = self.gen.map_latent(z)
            if track_w:
                self.gen.update_w_avg(w)
            fields = self.gen.synthesize(w, self.gen.draw_noise(batch, generator=self.loop_rng))
        else:
            fields = self.gen(z)
        if cfg.mode == "ambient":
            fields = measure_and_reconstruct(fields, cfg.imaging.noise_std,
                                             generator=self.loop_rng)
        return fields

    # -- schedule ---------------------------------------------------------------

    def _sync_schedule(self):
        cfg = self.cfg
        if not cfg.progressive:
            return
        sched = cfg.schedule
        target_stage = sched.stage_at(self.images_seen)
        while self.gen.stage < target_stage:
            self.gen.grow()
            self.disc.grow()
            self._build_optimizers()  # new parameter groups; moments reset
            if self.gen_ema is not None:
                self.gen_ema = copy.deepcopy(self.gen)
        alpha = sched.alpha_at(self.images_seen)
        self.gen.alpha = self.disc.alpha = alpha

    # -- updates -----------------------------------------------------------------

    def _d_step(self, real, fake):
        cfg = self.cfg
        real_scores = self.disc(real)
        fake_scores = self.disc(fake)
        loss = discriminator_loss(real_scores, fake_scores, cfg.loss)
        if cfg.loss == "logistic" and cfg.r1_gamma > 0 and self.step % cfg.r1_interval == 0:
            real_grad = real.detach().requires_grad_(True)
            pen = r1_penalty(real_grad, self.disc(real_grad))
            loss = loss + cfg.r1_gamma * cfg.r1_interval * pen
        elif cfg.loss == "wasserstein-gp" and self.step % cfg.r1_interval == 0:
            pen = wasserstein_gradient_penalty(self.disc, real, fake, self.disc.stage,
                                               self.disc.alpha, generator=self.loop_rng)
            loss = loss + cfg.gp_weight * cfg.r1_interval * pen
        self.opt_d.zero_grad(set_to_none=True)
        loss.backward()
        self.opt_d.step()
        return (float(loss.detach()), float(real_scores.detach().mean()),
                float(fake_scores.detach().mean()))

    def _g_step(self, batch):
        fake = self._fake_batch(batch, track_w=True)
        loss = generator_loss(self.disc(fake), self.cfg.loss)
        self.opt_g.zero_grad(set_to_none=True)
        loss.backward()
        self.opt_g.step()
        if self.gen_ema is not None:
            with torch.no_grad():
                d = self.cfg.ema_decay
                for p_ema, p in zip(self.gen_ema.parameters(), self.gen.parameters()):
                    p_ema.mul_(d).add_(p, alpha=1.0 - d)
        return float(loss.detach())

    # -- loop ---------------------------------------------------------------------

    def run_step(self):
        self._sync_schedule()
        batch = self.cfg.batch_size_at(self.gen.stage)
        real = self._real_batch(batch, self.gen.stage)
        with torch.no_grad():
            fake = self._fake_batch(batch)
        d_loss, real_mean, fake_mean = self._d_step(real, fake)
        g_loss = self._g_step(batch)
        self.step += 1
        self.images_seen += batch
        if self.step % self.cfg.log_interval == 0 or self.images_seen >= self.cfg.run_images:
            self._log(d_loss, g_loss, real_mean, fake_mean)
        if self.cfg.checkpoint_interval and self.step % self.cfg.checkpoint_interval == 0:
            self.save(os.path.join(self.out_dir, "checkpoints", f"step{self.step:08d}.pt"))

    def _log(self, d_loss, g_loss, real_mean, fake_mean):
        row = {
            "step": self.step,
            "images": self.images_seen,
            "stage": self.gen.stage,
            "alpha": round(float(self.gen.alpha), 8),
            "d_loss": d_loss,
            "g_loss": g_loss,
            "real_mean": real_mean,
            "fake_mean": fake_mean,
            "wall": time.time(),
            "config_hash": self.cfg.config_hash,
        }
        self.metric_buffer.append(row)
        self._metrics_file.write(json.dumps(row, sort_keys=True) + "\n")
        self._metrics_file.flush()

    def save(self, path):
        extra_state = {
            "opt_g": self.opt_g.state_dict(),
            "opt_d": self.opt_d.state_dict(),
            "loop_rng": self.loop_rng.get_state(),
            "torch_rng": torch.get_rng_state(),
            "images_seen": self.images_seen,
        }
        if self.gen_ema is not None:
            extra_state["generator_ema"] = self.gen_ema.state_dict()
        return save_checkpoint(path, self.gen, disc=self.disc, step=self.step,
                               config_hash=self.cfg.config_hash, extra_state=extra_state,
                               extra_meta={"train_mode": self.cfg.mode})

    def run(self, max_steps=None):
        while self.images_seen < self.cfg.run_images:
            if max_steps is not None and self.step >= max_steps:
                break
            self.run_step()
        final = os.path.join(self.out_dir, "checkpoints", "final.pt")
        sidecar = self.save(final)
        self._metrics_file.close()
        return TrainResult(checkpoint_path=final,
                           metrics_path=os.path.join(self.out_dir, "metrics.ndjson"),
                           step=self.step, images_seen=self.images_seen, sidecar=sidecar)


def train(data, cfg: TrainConfig, out_dir, resume=None, max_steps=None) -> TrainResult:
    """Full training run; see Trainer for the reproducibility contract."""
    return Trainer(data, cfg, out_dir, resume=resume).run(max_steps=max_steps)
