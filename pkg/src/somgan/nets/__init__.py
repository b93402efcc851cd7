"""Generator and discriminator networks with numpy-facing convenience ops.

The torch modules are the source of truth; the functions below wrap them
for callers that live in numpy land (evaluation, harness).  All wrappers
are deterministic given the model parameters and their explicit inputs.
"""
import numpy as np
import torch

from ..errors import ModeError, ScheduleError
from .checkpoint import (
    build_discriminator,
    build_generator,
    generator_metadata,
    load_checkpoint,
    read_sidecar,
    save_checkpoint,
    sidecar_path,
)
from .progressive import ProgressiveDiscriminator, ProgressiveGenerator
from .styled import MappingNetwork, StyledGenerator, StyleInputs, require_styled

__all__ = [
    "MappingNetwork",
    "ProgressiveDiscriminator",
    "ProgressiveGenerator",
    "StyleInputs",
    "StyledGenerator",
    "build_discriminator",
    "build_generator",
    "discriminate",
    "generate",
    "generate_styled",
    "generator_metadata",
    "grow",
    "load_checkpoint",
    "map_latent",
    "read_sidecar",
    "require_styled",
    "sample_fields",
    "save_checkpoint",
    "sidecar_path",
]


def _to_tensor(x, model):
    dtype = next(model.parameters()).dtype
    return torch.as_tensor(np.asarray(x), dtype=dtype)


def generate(gen, z) -> np.ndarray:
    """One object field from one latent vector (styled models use zero noise)."""
    z_t = _to_tensor(z, gen).reshape(1, -1)
    with torch.no_grad():
        if gen.mode == "styled":
            img = gen.synthesize(gen.map_latent(z_t), gen.zero_noise(1))
        else:
            img = gen(z_t)
    return img[0, 0].numpy()


def map_latent(gen, z) -> np.ndarray:
    require_styled(gen)
    with torch.no_grad():
        w = gen.map_latent(_to_tensor(z, gen).reshape(1, -1))
    return w[0].numpy()


def generate_styled(gen, inputs: StyleInputs) -> np.ndarray:
    require_styled(gen)
    with torch.no_grad():
        if inputs.w is not None:
            w = _to_tensor(inputs.w, gen).reshape(1, -1)
        else:
            w = gen.map_latent(_to_tensor(inputs.z, gen).reshape(1, -1))
        w = gen.truncate(w, inputs.truncation)
        noise = [None if n is None else _to_tensor(n, gen).reshape(1, 1, *np.shape(n))
                 for n in inputs.noise_maps]
        img = gen.synthesize(w, noise)
    return img[0, 0].numpy()


def discriminate(disc, x) -> float | np.ndarray:
    """Score a field or a stack of fields at the discriminator's current stage."""
    x_t = _to_tensor(x, disc)
    single = x_t.ndim == disc.dims
    if single:
        x_t = x_t[None]
    with torch.no_grad():
        scores = disc(x_t[:, None])
    return float(scores[0]) if single else scores.numpy()


def grow(gen, disc):
    """Advance the shared progressive schedule by one stage."""
    if gen.mode == "styled":
        raise ModeError("styled generators do not grow")
    if gen.stage != disc.stage:
        raise ScheduleError(f"generator stage {gen.stage} != discriminator stage {disc.stage}")
    gen.grow()
    disc.grow()
    return gen, disc


def sample_fields(gen, n, seed, batch=32, truncation=1.0) -> np.ndarray:
    """Deterministically sample n fields; styled models draw fresh noise maps."""
    g = torch.Generator().manual_seed(int(seed))
    out = []
    with torch.no_grad():
        remaining = n
        while remaining > 0:
            b = min(batch, remaining)
            z = torch.randn(b, gen.latent_dim, generator=g,
                            dtype=next(gen.parameters()).dtype)
            if gen.mode == "styled":
                w = gen.truncate(gen.map_latent(z), truncation)
                img = gen.synthesize(w, gen.draw_noise(b, generator=g))
            else:
                img = gen(z)
            out.append(img[:, 0].numpy().astype(np.float32))
            remaining -= b
    return np.concatenate(out, axis=0)
