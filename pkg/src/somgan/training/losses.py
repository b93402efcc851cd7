"""Adversarial losses.

Default is the non-saturating logistic pair with an R1 gradient penalty on
real inputs; a Wasserstein + gradient-penalty variant is available behind
the same interface.  Penalties are computed separately from the score
losses because they need gradients with respect to the images.
"""
import torch
import torch.nn.functional as F

from ..errors import ParameterError

LOSS_KINDS = ("logistic", "wasserstein-gp")


def _scores(x):
    t = torch.as_tensor(x, dtype=torch.get_default_dtype()) if not torch.is_tensor(x) else x
    if t.numel() == 0:
        raise ParameterError("empty score batch")
    return t


def discriminator_loss(real_scores, fake_scores, kind="logistic"):
    real, fake = _scores(real_scores), _scores(fake_scores)
    if kind == "logistic":
        return F.softplus(-real).mean() + F.softplus(fake).mean()
    if kind == "wasserstein-gp":
        return fake.mean() - real.mean()
    raise ParameterError(f"unknown loss kind {kind!r}")


def generator_loss(fake_scores, kind="logistic"):
    fake = _scores(fake_scores)
    if kind == "logistic":
        return F.softplus(-fake).mean()
    if kind == "wasserstein-gp":
        return -fake.mean()
    raise ParameterError(f"unknown loss kind {kind!r}")


def r1_penalty(real_images, real_scores):
    """0.5 * E[|grad_x D(x)|^2]; multiply by gamma (and the lazy interval)."""
    (grad,) = torch.autograd.grad(real_scores.sum(), real_images, create_graph=True)
    return 0.5 * grad.pow(2).reshape(grad.shape[0], -1).sum(dim=1).mean()


def wasserstein_gradient_penalty(disc, real, fake, stage, alpha, generator=None):
    """(|grad D(x_hat)| - 1)^2 on random interpolates."""
    eps_shape = (real.shape[0],) + (1,) * (real.ndim - 1)
    eps = torch.rand(eps_shape, generator=generator, dtype=real.dtype, device=real.device)
    x_hat = (eps * real + (1 - eps) * fake.detach()).requires_grad_(True)
    scores = disc(x_hat, stage=stage, alpha=alpha)
    (grad,) = torch.autograd.grad(scores.sum(), x_hat, create_graph=True)
    norms = grad.reshape(grad.shape[0], -1).norm(dim=1)
    return ((norms - 1.0) ** 2).mean()
