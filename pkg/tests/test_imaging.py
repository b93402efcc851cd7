"""Measurement-operator tests: unitarity, noise statistics, round trips."""
import numpy as np
import pytest

from somgan.errors import ParameterError
from somgan.imaging import ImagingConfig, dft_forward, measure, reconstruct


def test_delta_gives_flat_spectrum():
    f = np.zeros((4, 4))
    f[0, 0] = 1.0
    g = dft_forward(f)
    assert np.allclose(g, 0.25 + 0.0j, atol=1e-14)


def test_constant_field_is_pure_dc():
    c, shape = 0.37, (8, 8)
    g = dft_forward(np.full(shape, c))
    assert g[0, 0] == pytest.approx(c * np.sqrt(np.prod(shape)), rel=1e-12)
    g[0, 0] = 0
    assert np.abs(g).max() < 1e-12


def test_parseval(rng):
    f = rng.standard_normal((32, 32))
    g = dft_forward(f)
    power_f = (f**2).sum()
    power_g = (np.abs(g) ** 2).sum()
    assert abs(power_g - power_f) / power_f < 1e-10


def test_linearity(rng):
    cfg = ImagingConfig(dims=2, noise_std=0.0)
    f1, f2 = rng.standard_normal((2, 16, 16))
    a, b = 1.7, -0.4
    lhs = measure(a * f1 + b * f2, cfg, rng)
    rhs = a * measure(f1, cfg, rng) + b * measure(f2, cfg, rng)
    assert np.abs(lhs - rhs).max() / np.abs(lhs).max() < 1e-10


def test_conjugate_symmetry(rng):
    f = rng.standard_normal((16, 16))
    g = dft_forward(f)
    # F(-k) = conj(F(k)) for real fields
    flipped = g[np.ix_(-np.arange(16) % 16, -np.arange(16) % 16)]
    assert np.abs(flipped - np.conj(g)).max() < 1e-10


def test_zero_noise_measure_equals_dft(rng):
    f = rng.standard_normal((16, 16))
    cfg = ImagingConfig(dims=2, noise_std=0.0)
    assert np.array_equal(measure(f, cfg, rng), dft_forward(f))


def test_measure_determinism(rng):
    f = rng.standard_normal((16, 16))
    cfg = ImagingConfig(dims=2, noise_std=0.5)
    g1 = measure(f, cfg, np.random.default_rng(5))
    g2 = measure(f, cfg, np.random.default_rng(5))
    assert np.array_equal(g1, g2)


def test_measure_dims_mismatch(rng):
    cfg = ImagingConfig(dims=3, noise_std=0.0)
    with pytest.raises(ParameterError):
        measure(np.zeros((8, 8)), cfg, rng)


def test_noise_component_statistics(rng):
    # 1e5 draws of 16x16: component variance within 1%, mean within 3 SE
    sigma = 0.7
    cfg = ImagingConfig(dims=2, noise_std=sigma)
    batch = np.zeros((100_000, 4, 4))  # zero fields: g is pure noise
    g = measure(batch, cfg, rng)
    comp = g.real.ravel()
    n = comp.size
    assert abs(comp.var() - sigma**2) / sigma**2 < 0.01
    se = comp.std() / np.sqrt(n)
    assert abs(comp.mean()) < 3 * se
    imag = g.imag.ravel()
    assert abs(imag.var() - sigma**2) / sigma**2 < 0.01


def test_roundtrip_identity(rng):
    f = rng.standard_normal((64, 64))
    r = reconstruct(dft_forward(f))
    assert np.abs(r - f).max() < 1e-5


def test_reconstruct_zero():
    assert np.array_equal(reconstruct(np.zeros((8, 8), dtype=complex)), np.zeros((8, 8)))


def test_reconstruction_noise_variance(rng):
    # complex k-space noise with per-component std sigma lands in the image
    # domain as real noise of variance sigma^2 (unitary transform preserves
    # the circularly-symmetric covariance; the real part takes half of 2*sigma^2)
    sigma = 0.45
    cfg = ImagingConfig(dims=2, noise_std=sigma)
    batch = np.zeros((100_000, 4, 4))
    noise_img = reconstruct(measure(batch, cfg, rng), dims=2)
    v = noise_img.ravel().var()
    assert abs(v - sigma**2) / sigma**2 < 0.01


def test_reconstruction_noise_whiteness(rng):
    # off-diagonal covariance of image-domain noise is zero within MC error
    sigma = 1.0
    cfg = ImagingConfig(dims=2, noise_std=sigma)
    n = 20_000
    noise_img = reconstruct(measure(np.zeros((n, 8, 8)), cfg, rng), dims=2)
    x = noise_img.reshape(n, -1)
    k = np.cov(x, rowvar=False)
    off = k - np.diag(np.diag(k))
    # entries are ~N(0, sigma^4/n); bound by 6 standard errors
    assert np.abs(off).max() < 6 * sigma**2 / np.sqrt(n)


def test_3d_roundtrip(rng):
    f = rng.standard_normal((16, 16, 16))
    cfg = ImagingConfig(dims=3, noise_std=0.0)
    assert np.abs(reconstruct(measure(f, cfg, rng), dims=3) - f).max() < 1e-5
