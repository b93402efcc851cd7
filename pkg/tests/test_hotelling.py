"""Hotelling-observer tests against closed forms and Monte-Carlo oracles.

Closed forms used:
  K = sigma^2 I with a uniform sphere signal of amplitude a on V support
  voxels gives SNR = a*sqrt(V)/sigma; V = 33 (3D, radius 2), 13 (2D).
  Diagonal K gives SNR = sqrt(sum s_i^2 / k_i).
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from somgan.errors import NumericalError, ParameterError
from somgan.evaluation import (
    ROISpec,
    estimate_covariance,
    extract_roi,
    hotelling_snr,
    signal_roi_vector,
    snr_study,
)
from somgan.objects import LumpyParams, SignalSpec, sample_ensemble


def test_extract_roi_lengths(rng):
    f3 = rng.random((16, 16, 16))
    assert extract_roi(f3, ROISpec(center=(8, 8, 8), side=8)).shape == (512,)
    f2 = rng.random((16, 16))
    assert extract_roi(f2, ROISpec(center=(8, 8), side=8)).shape == (64,)


def test_extract_roi_constant_field():
    f = np.full((16, 16), 0.3)
    v = extract_roi(f, ROISpec(center=(8, 8), side=8))
    assert np.all(v == 0.3)


def test_roi_bounds():
    from somgan.errors import BoundsError

    f = np.zeros((16, 16))
    with pytest.raises(BoundsError):
        extract_roi(f, ROISpec(center=(2, 8), side=8))
    with pytest.raises(BoundsError):
        extract_roi(f, ROISpec(center=(8, 13), side=8))


def test_covariance_iid_oracle(rng):
    sigma = 1.3
    x = rng.normal(0, sigma, size=(100_000, 64))
    est = estimate_covariance(x)
    k = est.matrix
    diag = np.diag(k)
    assert np.abs(diag - sigma**2).max() / sigma**2 < 0.02
    off = k - np.diag(diag)
    assert np.abs(off).max() < 6 * sigma**2 / np.sqrt(x.shape[0])


def test_covariance_identical_samples():
    x = np.tile(np.arange(5.0), (10, 1))
    est = estimate_covariance(x)
    assert est.ridge_eps == 0.0
    assert np.array_equal(est.matrix, np.zeros((5, 5)))


def test_covariance_exactly_symmetric(rng):
    est = estimate_covariance(rng.random((50, 12)))
    assert np.abs(est.matrix - est.matrix.T).max() == 0.0


def test_covariance_order_invariant(rng):
    x = rng.random((40, 6))
    a = estimate_covariance(x).matrix
    b = estimate_covariance(x[::-1]).matrix
    assert np.allclose(a, b, atol=1e-12)


def test_covariance_needs_two_samples():
    with pytest.raises(ParameterError):
        estimate_covariance(np.zeros((1, 4)))


def test_snr_sphere_closed_form_3d():
    # K = sigma^2 I, a=1, sigma=2, 33 support voxels -> sqrt(33)/2 = 2.8722813233
    sig = SignalSpec(center=(8, 8, 8), radius=2.0, amplitude=1.0)
    roi = ROISpec(center=(8, 8, 8), side=8)
    s = signal_roi_vector(sig, roi, (16, 16, 16))
    assert s.sum() == pytest.approx(33.0)
    snr = hotelling_snr(s, 4.0 * np.eye(512))
    assert snr == pytest.approx(2.8722813232690143, abs=1e-6)


def test_snr_sphere_closed_form_2d():
    sig = SignalSpec(center=(8, 8), radius=2.0, amplitude=0.7)
    roi = ROISpec(center=(8, 8), side=8)
    s = signal_roi_vector(sig, roi, (16, 16))
    sigma = 0.5
    snr = hotelling_snr(s, sigma**2 * np.eye(64))
    assert snr == pytest.approx(0.7 * np.sqrt(13) / sigma, abs=1e-6)


def test_snr_zero_signal():
    assert hotelling_snr(np.zeros(8), np.eye(8)) == 0.0


def test_snr_diagonal_closed_form(rng):
    s = rng.random(10)
    k = rng.random(10) + 0.5
    expected = np.sqrt((s**2 / k).sum())
    assert hotelling_snr(s, np.diag(k)) == pytest.approx(expected, rel=1e-10)


def test_snr_not_positive_definite():
    with pytest.raises(NumericalError):
        hotelling_snr(np.ones(3), np.zeros((3, 3)))


@given(power=st.integers(min_value=-2, max_value=3))
@settings(max_examples=6, deadline=None)
def test_snr_scale_laws_exact(power):
    # dyadic scalings commute exactly with the Cholesky solve
    rng = np.random.default_rng(0)
    a = rng.random((30, 6))
    k = estimate_covariance(a).matrix + np.eye(6)
    s = rng.random(6)
    base = hotelling_snr(s, k)
    c = 2.0**power
    assert hotelling_snr(c * s, k) == c * base
    assert hotelling_snr(s, c**2 * k) == base / c


def test_snr_permutation_invariance(rng):
    x = rng.random((100, 8))
    k = estimate_covariance(x).matrix + 0.1 * np.eye(8)
    s = rng.random(8)
    perm = rng.permutation(8)
    snr_a = hotelling_snr(s, k)
    snr_b = hotelling_snr(s[perm], k[np.ix_(perm, perm)])
    assert snr_b == pytest.approx(snr_a, rel=1e-10)


def test_snr_study_no_object_variability():
    # a single repeated object: K -> sigma^2 I, SNR -> a*sqrt(13)/sigma (2D)
    obj = np.full((1, 32, 32), 0.5)
    a, sigma = 1.0, 2.0
    sig = SignalSpec(center=(16, 16), radius=2.0, amplitude=a)
    roi = ROISpec(center=(16, 16), side=8)
    study = snr_study(obj, sig, sigma, roi, np.random.default_rng(0),
                      draws_per_object=10_000)
    expected = a * np.sqrt(13) / sigma
    assert abs(study.snr - expected) / expected < 0.05
    assert study.covariance.n_samples == 10_000


def test_snr_study_decreases_with_noise():
    params = LumpyParams(field_shape=(32, 32), mean_count=15, amplitude=1.0, width=2.0)
    objects = sample_ensemble(params, 400, seed=3).astype(float)
    sig = SignalSpec(center=(16, 16), radius=2.0, amplitude=1.0)
    roi = ROISpec(center=(16, 16), side=8)
    snrs = [snr_study(objects, sig, s, roi, np.random.default_rng(1), draws_per_object=4).snr
            for s in (0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(snrs, snrs[1:]))


def test_snr_study_self_consistency():
    # two independently regenerated ensembles from identical parameters agree
    params = LumpyParams(field_shape=(32, 32), mean_count=15, amplitude=1.0, width=2.0)
    sig = SignalSpec(center=(16, 16), radius=2.0, amplitude=1.0)
    roi = ROISpec(center=(16, 16), side=8)
    snrs = []
    for seed in (101, 202):
        objects = sample_ensemble(params, 10_000, seed=seed).astype(float)
        snrs.append(snr_study(objects, sig, 1.0, roi, np.random.default_rng(seed)).snr)
    assert abs(snrs[0] - snrs[1]) / snrs[0] < 0.03


def test_snr_study_decomposed_close(rng):
    params = LumpyParams(field_shape=(32, 32), mean_count=15, amplitude=1.0, width=2.0)
    objects = sample_ensemble(params, 3000, seed=9).astype(float)
    sig = SignalSpec(center=(16, 16), radius=2.0, amplitude=1.0)
    roi = ROISpec(center=(16, 16), side=8)
    study = snr_study(objects, sig, 1.0, roi, rng, draws_per_object=3, decompose=True)
    assert study.snr_decomposed == pytest.approx(study.snr, rel=0.1)


def test_snr_study_requires_centered_roi(rng):
    obj = np.zeros((4, 16, 16))
    sig = SignalSpec(center=(8, 8), radius=2.0, amplitude=1.0)
    with pytest.raises(ParameterError):
        snr_study(obj, sig, 1.0, ROISpec(center=(7, 8), side=8), rng)
