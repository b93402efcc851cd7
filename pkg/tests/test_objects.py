"""Object-model tests: lumpy fields, clustered fields, detection signals.

Monte-Carlo expectations come from Campbell's theorem for a Poisson
superposition of toroidal Gaussian blobs with continuous uniform centers:
mean = Nbar*a*(2*pi*w^2)^(d/2)/M and var = Nbar*a^2*(pi*w^2)^(d/2)/M.
For the 2D reference case (Nbar=20, a=1, w=3, 64x64) these are
0.2761165418 and 0.1380582709.  Sphere voxel counts at radius 2 come from
enumerating integer lattice offsets: 13 in 2D, 33 in 3D.
"""
import numpy as np
import pytest

from somgan.errors import BoundsError, ParameterError
from somgan.objects import (
    ClusteredLumpyParams,
    LumpyParams,
    SignalSpec,
    draw_clustered_centers,
    insert_signal,
    sample_clustered_lumpy,
    sample_ensemble,
    sample_lumpy,
    signal_field,
    sphere_offsets,
)

LUMPY_2D = LumpyParams(field_shape=(64, 64), mean_count=20, amplitude=1.0, width=3.0)


def test_lumpy_param_validation():
    with pytest.raises(ParameterError):
        LumpyParams(field_shape=(64, 64), mean_count=0.0)
    with pytest.raises(ParameterError):
        LumpyParams(field_shape=(64, 64), mean_count=5.0, width=-1.0)
    with pytest.raises(ParameterError):
        LumpyParams(field_shape=(64,), mean_count=5.0)


def test_lumpy_empty_sum_limit():
    # mean_count -> 0 limit: the Poisson draw is 0 and the field is the empty sum
    p = LumpyParams(field_shape=(32, 32), mean_count=1e-12)
    f = sample_lumpy(p, np.random.default_rng(7))
    assert np.all(f == 0.0)


def test_lumpy_seed_determinism():
    a = sample_lumpy(LUMPY_2D, np.random.default_rng(99))
    b = sample_lumpy(LUMPY_2D, np.random.default_rng(99))
    assert a.tobytes() == b.tobytes()


def test_lumpy_nonnegative_and_finite(rng):
    for _ in range(20):
        f = sample_lumpy(LUMPY_2D, rng)
        assert np.all(np.isfinite(f))
        assert f.min() >= 0.0


def test_lumpy_ensemble_moments_match_analytic():
    # frozen closed-form oracle values for Nbar=20, a=1, w=3, 64x64
    analytic_mean = 0.2761165418194154
    analytic_var = 0.1380582709097077
    assert LUMPY_2D.analytic_mean() == pytest.approx(analytic_mean, rel=1e-12)
    assert LUMPY_2D.analytic_variance() == pytest.approx(analytic_var, rel=1e-12)

    n = 10_000
    ens = sample_ensemble(LUMPY_2D, n, seed=2024).astype(float)
    field_means = ens.mean(axis=(1, 2))
    se_mean = field_means.std(ddof=1) / np.sqrt(n)
    assert abs(field_means.mean() - analytic_mean) < 3 * se_mean

    # per-pixel variance must be taken across the ensemble (the within-field
    # spatial variance is biased low by the variance of the field mean);
    # estimate the standard error from independent sample groups
    groups = ens.reshape(10, n // 10, 64, 64)
    group_vars = groups.var(axis=1, ddof=1).mean(axis=(1, 2))
    se_var = group_vars.std(ddof=1) / np.sqrt(len(group_vars))
    assert abs(group_vars.mean() - analytic_var) < 4 * se_var


def test_lumpy_3d_mean():
    p = LumpyParams(field_shape=(16, 16, 16), mean_count=30, amplitude=0.5, width=1.5)
    n = 3000
    ens = sample_ensemble(p, n, seed=5).astype(float)
    field_means = ens.mean(axis=(1, 2, 3))
    se = field_means.std(ddof=1) / np.sqrt(n)
    assert abs(field_means.mean() - p.analytic_mean()) < 3 * se


def test_clustered_zero_cluster_limit():
    p = ClusteredLumpyParams(field_shape=(32, 32), mean_cluster_count=1e-12,
                             mean_blobs_per_cluster=5, cluster_spread=2.0)
    f = sample_clustered_lumpy(p, np.random.default_rng(3))
    assert np.all(f == 0.0)


def test_clustered_degenerate_spread():
    # spread -> 0: every blob center coincides with its cluster center
    p = ClusteredLumpyParams(field_shape=(32, 32), mean_cluster_count=8,
                             mean_blobs_per_cluster=4, cluster_spread=1e-12)
    clusters, blobs = draw_clustered_centers(p, np.random.default_rng(11))
    assert len(blobs) > 0
    dists = np.linalg.norm(blobs[:, None, :] - clusters[None, :, :], axis=2).min(axis=1)
    assert dists.max() < 1e-6


def test_clustered_ensemble_mean():
    p = ClusteredLumpyParams(field_shape=(32, 32), mean_cluster_count=6,
                             mean_blobs_per_cluster=5, cluster_spread=3.0,
                             amplitude=1.0, width=2.0)
    analytic = p.mean_cluster_count * p.mean_blobs_per_cluster * 2 * np.pi * p.width**2 / 1024
    assert p.analytic_mean() == pytest.approx(analytic, rel=1e-12)
    n = 4000
    ens = sample_ensemble(p, n, seed=17).astype(float)
    field_means = ens.mean(axis=(1, 2))
    se = field_means.std(ddof=1) / np.sqrt(n)
    assert abs(field_means.mean() - analytic) < 3 * se


def test_sphere_offsets_lattice_counts():
    assert len(sphere_offsets(2.0, 2)) == 13
    assert len(sphere_offsets(2.0, 3)) == 33


def test_insert_signal_zero_amplitude_identity(rng):
    f = rng.random((16, 16))
    out = insert_signal(f, SignalSpec(center=(8, 8), radius=2.0, amplitude=0.0))
    assert np.array_equal(out, f)
    assert out is not f


def test_insert_signal_sum_increment_3d(rng):
    f = rng.random((16, 16, 16))
    a = 0.7
    out = insert_signal(f, SignalSpec(center=(8, 8, 8), radius=2.0, amplitude=a))
    assert out.sum() - f.sum() == pytest.approx(33 * a, rel=1e-10)


def test_insert_signal_sum_increment_2d(rng):
    f = rng.random((32, 32))
    a = 1.3
    out = insert_signal(f, SignalSpec(center=(10, 20), radius=2.0, amplitude=a))
    assert out.sum() - f.sum() == pytest.approx(13 * a, rel=1e-10)


def test_insert_signal_additivity(rng):
    f = rng.random((24, 24))
    s1 = SignalSpec(center=(8, 8), radius=2.0, amplitude=0.4)
    s2 = SignalSpec(center=(9, 9), radius=3.0, amplitude=0.2)
    twice = insert_signal(insert_signal(f, s1), s2)
    direct = (f + signal_field(s1, f.shape)) + signal_field(s2, f.shape)
    assert np.array_equal(twice, direct)


def test_insert_signal_bounds():
    f = np.zeros((16, 16))
    with pytest.raises(BoundsError):
        insert_signal(f, SignalSpec(center=(0, 8), radius=2.0, amplitude=1.0))
    with pytest.raises(BoundsError):
        insert_signal(f, SignalSpec(center=(8, 15), radius=2.0, amplitude=1.0))
    # touching the edge exactly is fine
    insert_signal(f, SignalSpec(center=(2, 13), radius=2.0, amplitude=1.0))


def test_ensemble_determinism():
    a = sample_ensemble(LUMPY_2D, 8, seed=42)
    b = sample_ensemble(LUMPY_2D, 8, seed=42)
    assert a.tobytes() == b.tobytes()
    c = sample_ensemble(LUMPY_2D, 8, seed=43)
    assert a.tobytes() != c.tobytes()
