"""Differentiable measurement/reconstruction chain for the generator branch.

Same operators as somgan.imaging but on torch tensors so gradients flow
through O(H f + n) back to the generator.  H and O are linear and the noise
is additive, so the chain is exactly differentiable.  At noise_std = 0 the
composition O(H f) is the identity for real fields and is bypassed exactly
(no FFT round-off, no RNG consumption).
"""
import torch

from ..errors import ParameterError


def measure_and_reconstruct(fields, noise_std, generator=None, noise=None):
    """O(H(fields) + n) for a (b, 1, *spatial) batch; fresh noise per sample.

    `noise` may pass an explicit complex k-space tensor (for gradient checks);
    otherwise two real normal draws (real then imaginary) are taken from
    `generator`.
    """
    if fields.ndim not in (4, 5):
        raise ParameterError(f"expected a (b, 1, spatial...) batch, got {fields.ndim} axes")
    if noise_std == 0 and noise is None:
        return fields
    axes = tuple(range(2, fields.ndim))
    k = torch.fft.fftn(fields, dim=axes, norm="ortho")
    if noise is None:
        re = torch.randn(fields.shape, generator=generator, dtype=fields.dtype,
                         device=fields.device)
        im = torch.randn(fields.shape, generator=generator, dtype=fields.dtype,
                         device=fields.device)
        noise = noise_std * torch.complex(re, im)
    k = k + noise
    return torch.fft.ifftn(k, dim=axes, norm="ortho").real


def ambient_fake_batch(gen, batch_size, noise_std, generator=None, z=None,
                       stage=None, alpha=None, styled_noise=None):
    """z ~ N(0, I) -> G(z) -> O(H(.) + n); differentiable w.r.t. generator weights."""
    if z is None:
        z = torch.randn(batch_size, gen.latent_dim, generator=generator,
                        dtype=next(gen.parameters()).dtype)
    if gen.mode == "styled":
        if styled_noise is None:
            styled_noise = gen.draw_noise(z.shape[0], generator=generator)
        w = gen.map_latent(z)
        fields = gen.synthesize(w, styled_noise)
    else:
        fields = gen(z, stage=stage, alpha=alpha)
    return measure_and_reconstruct(fields, noise_std, generator=generator)
