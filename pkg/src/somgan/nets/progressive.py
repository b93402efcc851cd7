"""Progressively growing generator and discriminator.

Resolution starts at 4 per axis (stage 0) and doubles per stage, so the
side length is 4 * 2**stage.  grow() appends the next block and output
head without touching existing parameters and resets the fade blend to 0.

The fade is a linear image-space blend: at stage s with blend alpha the
output is (1 - alpha) * upsample(head_{s-1}(x_{s-1})) + alpha * head_s(x_s),
with nearest-neighbor upsampling on the skip branch.  At alpha = 0 the
output therefore equals the previous stage's output upsampled through the
new head path, and the output is linear (hence continuous) in alpha.
"plain" models are the same networks built directly at their final stage
with no growth schedule.
"""
import torch
from torch import nn

from ..errors import ParameterError, ScheduleError
from .layers import (
    EqualizedConv,
    EqualizedLinear,
    MinibatchStdDev,
    PixelNorm,
    channel_schedule,
    downsample_avg,
    upsample_nn,
)


class _GenBlock(nn.Module):
    def __init__(self, dims, in_ch, out_ch, pixelnorm, padding_mode, equalized):
        super().__init__()
        self.conv1 = EqualizedConv(dims, in_ch, out_ch, 3, padding_mode=padding_mode,
                                   equalized=equalized)
        self.conv2 = EqualizedConv(dims, out_ch, out_ch, 3, padding_mode=padding_mode,
                                   equalized=equalized)
        self.act = nn.LeakyReLU(0.2)
        self.norm = PixelNorm() if pixelnorm else nn.Identity()

    def forward(self, x):
        x = self.norm(self.act(self.conv1(upsample_nn(x))))
        return self.norm(self.act(self.conv2(x)))


class ProgressiveGenerator(nn.Module):
    mode = "progressive"

    def __init__(self, dims, latent_dim, max_stage, base_channels=32, max_channels=256,
                 pixelnorm=True, padding_mode="circular", equalized_lr=True,
                 start_stage=0):
        super().__init__()
        self.dims = dims
        self.latent_dim = latent_dim
        self.max_stage = max_stage
        self.base_channels = base_channels
        self.max_channels = max_channels
        self.pixelnorm = pixelnorm
        self.padding_mode = padding_mode
        self.equalized_lr = equalized_lr
        self.stage = 0
        self.alpha = 1.0

        ch0 = self.channels(0)
        self.input_norm = PixelNorm() if pixelnorm else nn.Identity()
        self.input_linear = EqualizedLinear(latent_dim, ch0 * 4**dims,
                                            equalized=equalized_lr)
        self.input_conv = EqualizedConv(dims, ch0, ch0, 3, padding_mode=padding_mode,
                                        equalized=equalized_lr)
        self.act = nn.LeakyReLU(0.2)
        self.norm = PixelNorm() if pixelnorm else nn.Identity()
        self.blocks = nn.ModuleList()
        self.heads = nn.ModuleList([self._make_head(0)])
        for _ in range(start_stage):
            self.grow()
            self.alpha = 1.0

    def channels(self, stage):
        return channel_schedule(stage, self.max_stage, self.base_channels,
                                self.max_channels)

    def resolution(self, stage=None):
        return 4 * 2 ** (self.stage if stage is None else stage)

    def _make_head(self, stage):
        return EqualizedConv(self.dims, self.channels(stage), 1, 1, gain=1.0,
                             padding_mode=self.padding_mode, equalized=self.equalized_lr)

    def grow(self):
        if self.stage + 1 > self.max_stage:
            raise ScheduleError(f"cannot grow past final stage {self.max_stage}")
        new_stage = self.stage + 1
        self.blocks.append(_GenBlock(self.dims, self.channels(new_stage - 1),
                                     self.channels(new_stage), self.pixelnorm,
                                     self.padding_mode, self.equalized_lr))
        self.heads.append(self._make_head(new_stage))
        self.stage = new_stage
        self.alpha = 0.0

    def features(self, z, stage):
        if z.ndim != 2 or z.shape[1] != self.latent_dim:
            raise ParameterError(
                f"latent batch must be (n, {self.latent_dim}), got {tuple(z.shape)}")
        x = self.input_linear(self.input_norm(z))
        x = x.reshape(z.shape[0], self.channels(0), *(4,) * self.dims)
        x = self.norm(self.act(x))
        x = self.norm(self.act(self.input_conv(x)))
        trace = [x]
        for s in range(1, stage + 1):
            x = self.blocks[s - 1](x)
            trace.append(x)
        return trace

    def forward(self, z, stage=None, alpha=None):
        stage = self.stage if stage is None else stage
        alpha = self.alpha if alpha is None else alpha
        trace = self.features(z, stage)
        img = self.heads[stage](trace[stage])
        if stage > 0 and alpha < 1.0:
            skip = upsample_nn(self.heads[stage - 1](trace[stage - 1]))
            img = (1.0 - alpha) * skip + alpha * img
        return img


class _DiscBlock(nn.Module):
    def __init__(self, dims, in_ch, out_ch, padding_mode, equalized):
        super().__init__()
        self.conv1 = EqualizedConv(dims, in_ch, in_ch, 3, padding_mode=padding_mode,
                                   equalized=equalized)
        self.conv2 = EqualizedConv(dims, in_ch, out_ch, 3, padding_mode=padding_mode,
                                   equalized=equalized)
        self.act = nn.LeakyReLU(0.2)

    def forward(self, x):
        x = self.act(self.conv1(x))
        x = self.act(self.conv2(x))
        return downsample_avg(x)


class ProgressiveDiscriminator(nn.Module):
    def __init__(self, dims, max_stage, base_channels=32, max_channels=256,
                 minibatch_stddev=True, padding_mode="circular", equalized_lr=True,
                 start_stage=0):
        super().__init__()
        self.dims = dims
        self.max_stage = max_stage
        self.base_channels = base_channels
        self.max_channels = max_channels
        self.minibatch_stddev = minibatch_stddev
        self.padding_mode = padding_mode
        self.equalized_lr = equalized_lr
        self.stage = 0
        self.alpha = 1.0

        ch0 = self.channels(0)
        self.act = nn.LeakyReLU(0.2)
        self.mbstd = MinibatchStdDev() if minibatch_stddev else nn.Identity()
        extra = 1 if minibatch_stddev else 0
        self.final_conv = EqualizedConv(dims, ch0 + extra, ch0, 3,
                                        padding_mode=padding_mode, equalized=equalized_lr)
        self.final_dense = EqualizedLinear(ch0 * 4**dims, ch0, equalized=equalized_lr)
        self.final_score = EqualizedLinear(ch0, 1, gain=1.0, equalized=equalized_lr)
        self.from_input = nn.ModuleList([self._make_head(0)])
        self.blocks = nn.ModuleList()
        for _ in range(start_stage):
            self.grow()
            self.alpha = 1.0

    def channels(self, stage):
        return channel_schedule(stage, self.max_stage, self.base_channels,
                                self.max_channels)

    def resolution(self, stage=None):
        return 4 * 2 ** (self.stage if stage is None else stage)

    def _make_head(self, stage):
        return EqualizedConv(self.dims, 1, self.channels(stage), 1,
                             padding_mode=self.padding_mode, equalized=self.equalized_lr)

    def grow(self):
        if self.stage + 1 > self.max_stage:
            raise ScheduleError(f"cannot grow past final stage {self.max_stage}")
        new_stage = self.stage + 1
        self.from_input.append(self._make_head(new_stage))
        self.blocks.append(_DiscBlock(self.dims, self.channels(new_stage),
                                      self.channels(new_stage - 1), self.padding_mode,
                                      self.equalized_lr))
        self.stage = new_stage
        self.alpha = 0.0

    def forward(self, x, stage=None, alpha=None):
        stage = self.stage if stage is None else stage
        alpha = self.alpha if alpha is None else alpha
        res = self.resolution(stage)
        if x.shape[1] != 1 or x.shape[2:] != (res,) * self.dims:
            raise ParameterError(
                f"input shape {tuple(x.shape)} does not match stage resolution {res}")
        h = self.act(self.from_input[stage](x))
        if stage > 0:
            h = self.blocks[stage - 1](h)
            if alpha < 1.0:
                skip = self.act(self.from_input[stage - 1](downsample_avg(x)))
                h = (1.0 - alpha) * skip + alpha * h
            for s in range(stage - 1, 0, -1):
                h = self.blocks[s - 1](h)
        h = self.mbstd(h)
        h = self.act(self.final_conv(h))
        h = self.act(self.final_dense(h.reshape(h.shape[0], -1)))
        return self.final_score(h).squeeze(1)
