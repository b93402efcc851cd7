"""Building blocks shared by the 2-D and 3-D network paths.

One code path serves both dimensionalities: every layer takes `dims` and
dispatches to the matching torch conv/pool primitive.  Equalized learning
rate (runtime He rescaling of unit-variance weights), pixel-wise feature
normalization and the minibatch-stddev feature follow the progressive-GAN
recipe and can each be disabled.

Convolutions default to circular padding: the measurement operator is a
DFT, so the object statistics are toroidally stationary and periodic
boundary handling is the geometry-consistent choice.  It also makes
axis-constancy an exact invariant of the conv stack, which the test suite
exploits as a broadcast sanity check of the shared 2D/3D path.
"""
import math

import torch
import torch.nn.functional as F
from torch import nn

from ..errors import ParameterError


def conv_op(dims):
    if dims == 2:
        return F.conv2d
    if dims == 3:
        return F.conv3d
    raise ParameterError(f"dims must be 2 or 3, got {dims}")


def upsample_nn(x):
    return F.interpolate(x, scale_factor=2, mode="nearest")


def downsample_avg(x):
    return F.avg_pool2d(x, 2) if x.ndim == 4 else F.avg_pool3d(x, 2)


def _pad_same(x, k, mode):
    if k == 1:
        return x
    p = k // 2
    pad = (p, p) * (x.ndim - 2)
    if mode == "zeros":
        return F.pad(x, pad)
    return F.pad(x, pad, mode=mode)


class EqualizedLinear(nn.Module):
    def __init__(self, in_features, out_features, gain=math.sqrt(2), lr_mul=1.0,
                 bias_init=0.0, equalized=True):
        super().__init__()
        if equalized:
            self.weight = nn.Parameter(torch.randn(out_features, in_features) / lr_mul)
            self.scale = gain / math.sqrt(in_features) * lr_mul
        else:
            w = torch.randn(out_features, in_features) * (gain / math.sqrt(in_features))
            self.weight = nn.Parameter(w)
            self.scale = 1.0
        self.bias = nn.Parameter(torch.full((out_features,), float(bias_init)))
        self.lr_mul = lr_mul

    def forward(self, x):
        return F.linear(x, self.weight * self.scale, self.bias * self.lr_mul)


class EqualizedConv(nn.Module):
    def __init__(self, dims, in_channels, out_channels, kernel_size,
                 gain=math.sqrt(2), padding_mode="circular", equalized=True):
        super().__init__()
        self.dims = dims
        self.kernel_size = kernel_size
        self.padding_mode = padding_mode
        shape = (out_channels, in_channels) + (kernel_size,) * dims
        fan_in = in_channels * kernel_size**dims
        if equalized:
            self.weight = nn.Parameter(torch.randn(shape))
            self.scale = gain / math.sqrt(fan_in)
        else:
            self.weight = nn.Parameter(torch.randn(shape) * (gain / math.sqrt(fan_in)))
            self.scale = 1.0
        self.bias = nn.Parameter(torch.zeros(out_channels))

    def forward(self, x):
        x = _pad_same(x, self.kernel_size, self.padding_mode)
        return conv_op(self.dims)(x, self.weight * self.scale, self.bias)


class PixelNorm(nn.Module):
    def forward(self, x):
        return x * torch.rsqrt(x.pow(2).mean(dim=1, keepdim=True) + 1e-8)


class MinibatchStdDev(nn.Module):
    """Appends one channel holding the mean per-group feature std."""

    def __init__(self, group_size=4):
        super().__init__()
        self.group_size = group_size

    def forward(self, x):
        n = x.shape[0]
        g = min(self.group_size, n)
        while n % g:
            g -= 1
        y = x.reshape(g, n // g, *x.shape[1:])
        y = y - y.mean(dim=0, keepdim=True)
        y = y.pow(2).mean(dim=0).add(1e-8).sqrt()
        y = y.mean(dim=tuple(range(1, y.ndim)), keepdim=True)
        y = y.repeat_interleave(g, dim=0)
        y = y.expand(n, 1, *x.shape[2:])
        return torch.cat([x, y], dim=1)


class ModulatedConv(nn.Module):
    """Style-modulated convolution with optional weight demodulation."""

    def __init__(self, dims, in_channels, out_channels, kernel_size, style_dim,
                 demodulate=True, padding_mode="circular", equalized=True):
        super().__init__()
        self.dims = dims
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.demodulate = demodulate
        self.padding_mode = padding_mode
        shape = (out_channels, in_channels) + (kernel_size,) * dims
        fan_in = in_channels * kernel_size**dims
        if equalized:
            self.weight = nn.Parameter(torch.randn(shape))
            self.scale = 1.0 / math.sqrt(fan_in)
        else:
            self.weight = nn.Parameter(torch.randn(shape) / math.sqrt(fan_in))
            self.scale = 1.0
        # style affine: bias 1 so an untrained mapping is a pass-through
        self.to_style = EqualizedLinear(style_dim, in_channels, gain=1.0, bias_init=1.0,
                                        equalized=equalized)

    def forward(self, x, w):
        b = x.shape[0]
        s = self.to_style(w)  # (b, in)
        weight = self.weight * self.scale
        weight = weight.unsqueeze(0) * s.reshape(b, 1, -1, *([1] * self.dims))
        if self.demodulate:
            denom = torch.rsqrt(weight.pow(2).sum(dim=tuple(range(2, weight.ndim)),
                                                  keepdim=True) + 1e-8)
            weight = weight * denom
        # grouped conv computes a per-sample kernel in one call
        x = _pad_same(x, self.kernel_size, self.padding_mode)
        x = x.reshape(1, -1, *x.shape[2:])
        weight = weight.reshape(b * self.out_channels, self.in_channels,
                                *weight.shape[3:])
        out = conv_op(self.dims)(x, weight, groups=b)
        return out.reshape(b, self.out_channels, *out.shape[2:])


class NoiseInjection(nn.Module):
    """Adds a single-channel noise map scaled by a learned scalar.

    The scale starts at a small nonzero value so the noise path is live from
    initialization; a zero init would make same-latent samples identical
    until training happens to move the scale.
    """

    def __init__(self, init=0.1):
        super().__init__()
        self.scale = nn.Parameter(torch.tensor(float(init)))

    def forward(self, x, noise):
        if noise is None:
            return x
        return x + self.scale * noise


def channel_schedule(stage, max_stage, base_channels, max_channels):
    """min(max_channels, base_channels * 2**(max_stage - stage))."""
    return int(min(max_channels, base_channels * 2 ** (max_stage - stage)))
