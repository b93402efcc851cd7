"""Style-mix grids: rows share a mapped style, columns vary the noise maps.

The PNG is a display rendering (affine normalization recorded in a JSON
sidecar, 2-pixel gutters between tiles); the raw float32 fields are always
co-emitted so quantitative checks never touch the rendering.
"""
import json
import os

import numpy as np
import torch
from PIL import Image

from ..errors import ModeError, ParameterError
from ..nets import load_checkpoint, require_styled

GUTTER = 2


def grid_dimensions(rows, cols, res):
    """Tile layout: rows*res + (rows-1)*GUTTER high, cols*res + ... wide."""
    return (rows * res + (rows - 1) * GUTTER, cols * res + (cols - 1) * GUTTER)


def render_grid(fields: np.ndarray) -> tuple:
    """(uint8 image, normalization record) from a (rows, cols, h, w) stack."""
    if fields.ndim != 4:
        raise ParameterError(f"expected (rows, cols, h, w) fields, got {fields.shape}")
    rows, cols, h, w = fields.shape
    lo, hi = float(fields.min()), float(fields.max())
    scale = 255.0 / (hi - lo) if hi > lo else 1.0
    height, width = grid_dimensions(rows, cols, h)
    canvas = np.full((height, width), 255, dtype=np.uint8)
    for i in range(rows):
        for j in range(cols):
            tile = np.clip((fields[i, j] - lo) * scale, 0, 255).astype(np.uint8)
            y, x = i * (h + GUTTER), j * (w + GUTTER)
            canvas[y:y + h, x:x + w] = tile
    return canvas, {"lo": lo, "hi": hi, "scale": scale}


def style_mix_fields(gen, n_latents, n_noise, seed, zero_noise=False) -> np.ndarray:
    """(n_latents, n_noise, *res) fields; row i shares w_i, columns vary noise."""
    require_styled(gen)
    if gen.dims != 2:
        raise ModeError("style-mix grids render 2-d models only")
    g = torch.Generator().manual_seed(int(seed))
    dtype = next(gen.parameters()).dtype
    out = []
    with torch.no_grad():
        for _ in range(n_latents):
            z = torch.randn(1, gen.latent_dim, generator=g, dtype=dtype)
            w = gen.map_latent(z)
            row = []
            for _ in range(n_noise):
                noise = (gen.zero_noise(1) if zero_noise
                         else gen.draw_noise(1, generator=g))
                row.append(gen.synthesize(w, noise)[0, 0].numpy().astype(np.float32))
            out.append(np.stack(row))
    return np.stack(out)


def style_mix_grid(checkpoint_path, n_latents, n_noise, out_png, seed=0,
                   zero_noise=False):
    """Emit grid PNG + raw fields (.npy) + render metadata; returns the fields."""
    gen = load_checkpoint(checkpoint_path)["generator"]
    fields = style_mix_fields(gen, n_latents, n_noise, seed, zero_noise=zero_noise)
    canvas, norm = render_grid(fields)
    Image.fromarray(canvas, mode="L").save(out_png)
    base, _ = os.path.splitext(os.fspath(out_png))
    np.save(base + "_fields.npy", fields)
    with open(base + "_render.json", "w") as f:
        json.dump({"rows": n_latents, "cols": n_noise, "seed": seed,
                   "normalization": norm, "gutter": GUTTER}, f, indent=1)
    return fields


def _downsample(fields, factor):
    n, h, w = fields.shape
    if h % factor or w % factor:
        raise ParameterError(f"fields of shape {(h, w)} not divisible by {factor}")
    return fields.reshape(n, h // factor, factor, w // factor, factor).mean(axis=(2, 4))


def within_between_correlation(fields: np.ndarray, factor=8):
    """Mean Pearson correlation of downsampled tiles within vs between rows."""
    rows, cols = fields.shape[:2]
    flat = _downsample(fields.reshape(rows * cols, *fields.shape[2:]), factor)
    flat = flat.reshape(rows, cols, -1)
    flat = flat - flat.mean(axis=2, keepdims=True)
    norms = np.linalg.norm(flat, axis=2)
    within, between = [], []
    for i in range(rows):
        for j in range(cols):
            for k in range(i, rows):
                for l in range(cols):
                    if k == i and l <= j:
                        continue
                    r = float(flat[i, j] @ flat[k, l] / (norms[i, j] * norms[k, l] + 1e-12))
                    (within if k == i else between).append(r)
    return float(np.mean(within)), float(np.mean(between))
