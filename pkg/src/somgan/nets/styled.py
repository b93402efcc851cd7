"""Style-based generator: mapping network, per-level noise, weight demodulation.

The synthesis network starts from a learned constant at 4 per axis and adds
one modulated conv + noise injection per resolution level, accumulating the
output through per-level linear heads on an upsampled skip path.  Styles are
produced by a small feed-forward mapping network from the normalized latent.
A running average of mapped styles supports optional truncation at sampling
time.  Unlike the progressive pair, the styled generator is built directly
at its final resolution.
"""
from dataclasses import dataclass, field

import torch
from torch import nn

from ..errors import ModeError, ParameterError
from .layers import EqualizedLinear, ModulatedConv, NoiseInjection, PixelNorm, upsample_nn


@dataclass
class StyleInputs:
    """Latent (or pre-mapped style) plus one noise map per resolution level."""

    z: object = None
    w: object = None
    noise_maps: list = field(default_factory=list)
    truncation: float = 1.0

    def __post_init__(self):
        if (self.z is None) == (self.w is None):
            raise ParameterError("provide exactly one of z (latent) or w (style)")
        if not 0.0 < self.truncation <= 1.0:
            raise ParameterError(f"truncation must be in (0, 1], got {self.truncation}")


class MappingNetwork(nn.Module):
    def __init__(self, latent_dim, depth=4, equalized=True):
        super().__init__()
        self.norm = PixelNorm()
        layers = []
        for _ in range(depth):
            layers += [EqualizedLinear(latent_dim, latent_dim, equalized=equalized),
                       nn.LeakyReLU(0.2)]
        self.net = nn.Sequential(*layers)

    def forward(self, z):
        return self.net(self.norm(z))


class _StyleLevel(nn.Module):
    def __init__(self, dims, in_ch, out_ch, style_dim, noise_init, padding_mode, equalized):
        super().__init__()
        self.conv = ModulatedConv(dims, in_ch, out_ch, 3, style_dim,
                                  padding_mode=padding_mode, equalized=equalized)
        self.noise = NoiseInjection(noise_init)
        self.bias = nn.Parameter(torch.zeros(out_ch))
        self.act = nn.LeakyReLU(0.2)
        self.head = ModulatedConv(dims, out_ch, 1, 1, style_dim, demodulate=False,
                                  padding_mode=padding_mode, equalized=equalized)

    def forward(self, x, w, noise):
        x = self.conv(x, w)
        x = self.noise(x, noise)
        x = self.act(x + self.bias.reshape(1, -1, *([1] * (x.ndim - 2))))
        return x, self.head(x, w)


class StyledGenerator(nn.Module):
    mode = "styled"

    def __init__(self, dims, latent_dim, max_stage, base_channels=32, max_channels=256,
                 mapping_depth=4, noise_scale_init=0.1, padding_mode="circular",
                 equalized_lr=True):
        super().__init__()
        self.dims = dims
        self.latent_dim = latent_dim
        self.max_stage = max_stage
        self.stage = max_stage  # fixed-resolution synthesis
        self.alpha = 1.0
        self.base_channels = base_channels
        self.max_channels = max_channels
        self.mapping_depth = mapping_depth
        self.noise_scale_init = noise_scale_init
        self.padding_mode = padding_mode
        self.equalized_lr = equalized_lr

        self.mapping = MappingNetwork(latent_dim, mapping_depth, equalized=equalized_lr)
        chans = [min(max_channels, base_channels * 2 ** (max_stage - s))
                 for s in range(max_stage + 1)]
        self.constant = nn.Parameter(torch.randn(1, chans[0], *(4,) * dims))
        self.levels = nn.ModuleList(
            _StyleLevel(dims, chans[max(0, s - 1)], chans[s], latent_dim,
                        noise_scale_init, padding_mode, equalized_lr)
            for s in range(max_stage + 1))
        self.register_buffer("w_avg", torch.zeros(latent_dim))

    @property
    def n_levels(self):
        return self.max_stage + 1

    def level_resolution(self, level):
        return 4 * 2**level

    def noise_shapes(self):
        return [(self.level_resolution(s),) * self.dims for s in range(self.n_levels)]

    def map_latent(self, z):
        if z.ndim != 2 or z.shape[1] != self.latent_dim:
            raise ParameterError(
                f"latent batch must be (n, {self.latent_dim}), got {tuple(z.shape)}")
        return self.mapping(z)

    def draw_noise(self, batch, generator=None, device=None):
        return [torch.randn(batch, 1, *shape, generator=generator, device=device)
                for shape in self.noise_shapes()]

    def zero_noise(self, batch, device=None):
        return [torch.zeros(batch, 1, *shape, device=device)
                for shape in self.noise_shapes()]

    def _check_noise(self, noise_maps, batch):
        if len(noise_maps) != self.n_levels:
            raise ParameterError(
                f"expected {self.n_levels} noise maps, got {len(noise_maps)}")
        for level, (n, shape) in enumerate(zip(noise_maps, self.noise_shapes())):
            if n is not None and tuple(n.shape) != (batch, 1, *shape):
                raise ParameterError(
                    f"noise map {level} has shape {tuple(n.shape)}, "
                    f"expected {(batch, 1, *shape)}")

    def truncate(self, w, truncation):
        if truncation >= 1.0:
            return w
        return self.w_avg + truncation * (w - self.w_avg)

    def update_w_avg(self, w, beta=0.995):
        with torch.no_grad():
            self.w_avg.mul_(beta).add_(w.detach().mean(dim=0), alpha=1.0 - beta)

    def synthesize(self, w, noise_maps):
        self._check_noise(noise_maps, w.shape[0])
        x = self.constant.expand(w.shape[0], -1, *self.constant.shape[2:])
        img = None
        for level, block in enumerate(self.levels):
            if level > 0:
                x = upsample_nn(x)
                img = upsample_nn(img)
            x, out = block(x, w, noise_maps[level])
            img = out if img is None else img + out
        return img

    def forward(self, z, noise_maps=None, generator=None):
        w = self.map_latent(z)
        if noise_maps is None:
            noise_maps = self.draw_noise(z.shape[0], generator=generator, device=z.device)
        return self.synthesize(w, noise_maps)


def require_styled(model):
    if getattr(model, "mode", None) != "styled":
        raise ModeError(f"operation requires a styled generator, got mode "
                        f"{getattr(model, 'mode', None)!r}")
    return model
