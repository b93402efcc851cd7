"""Lumpy and clustered-lumpy stochastic object models.

A lumpy field is a superposition of a Poisson number of identical isotropic
Gaussian blobs with continuous uniform centers; the clustered variant first
draws Poisson cluster centers, then a Poisson number of blobs per cluster,
displaced by isotropic Gaussian offsets.  Placement is toroidal, so the
ensemble is strictly stationary and its moments have closed forms
(Campbell's theorem):

    mean      = mean_count * amplitude * (2*pi*width^2)^(d/2) / n_voxels
    variance  = mean_count * amplitude^2 * (pi*width^2)^(d/2) / n_voxels

with mean_count replaced by mean_cluster_count * mean_blobs_per_cluster for
the clustered model (offsets do not change either moment on the torus).

Randomness comes from an explicit numpy Generator; the draw order (count,
then centers, then offsets) is part of the reproducibility contract.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from . import kernels

# window truncation for blob deposits; exp(-8^2/2) ~ 1.3e-14 of the peak
CUTOFF_SIGMAS = 8.0


def _check_shape(field_shape):
    shape = tuple(int(s) for s in field_shape)
    if len(shape) not in (2, 3):
        raise ParameterError(f"field must be 2- or 3-dimensional, got shape {shape}")
    if any(s <= 0 for s in shape):
        raise ParameterError(f"field shape must be positive, got {shape}")
    return shape


@dataclass(frozen=True)
class LumpyParams:
    """Poisson-Gaussian superposition parameters.

    mean_count: expected number of blobs per field.
    amplitude:  blob peak value.
    width:      blob standard deviation in voxels.
    """

    field_shape: tuple
    mean_count: float
    amplitude: float = 1.0
    width: float = 3.0

    def __post_init__(self):
        object.__setattr__(self, "field_shape", _check_shape(self.field_shape))
        if not self.mean_count > 0:
            raise ParameterError(f"mean_count must be > 0, got {self.mean_count}")
        if not self.amplitude > 0:
            raise ParameterError(f"amplitude must be > 0, got {self.amplitude}")
        if not self.width > 0:
            raise ParameterError(f"width must be > 0, got {self.width}")

    @property
    def dims(self):
        return len(self.field_shape)

    def analytic_mean(self):
        m = float(np.prod(self.field_shape))
        return self.mean_count * self.amplitude * (2.0 * np.pi * self.width**2) ** (self.dims / 2.0) / m

    def analytic_variance(self):
        m = float(np.prod(self.field_shape))
        return self.mean_count * self.amplitude**2 * (np.pi * self.width**2) ** (self.dims / 2.0) / m


@dataclass(frozen=True)
class ClusteredLumpyParams:
    """Two-level Poisson process: clusters of Gaussian blobs."""

    field_shape: tuple
    mean_cluster_count: float
    mean_blobs_per_cluster: float
    cluster_spread: float
    amplitude: float = 1.0
    width: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "field_shape", _check_shape(self.field_shape))
        for name in ("mean_cluster_count", "mean_blobs_per_cluster", "cluster_spread",
                     "amplitude", "width"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")

    @property
    def dims(self):
        return len(self.field_shape)

    def analytic_mean(self):
        m = float(np.prod(self.field_shape))
        blobs = self.mean_cluster_count * self.mean_blobs_per_cluster
        return blobs * self.amplitude * (2.0 * np.pi * self.width**2) ** (self.dims / 2.0) / m


def draw_lump_centers(params: LumpyParams, rng: np.random.Generator) -> np.ndarray:
    """Poisson count, then continuous uniform centers over the field; (n, d)."""
    n = int(rng.poisson(params.mean_count))
    if n == 0:
        return np.empty((0, params.dims))
    high = np.asarray(params.field_shape, dtype=float)
    return rng.uniform(0.0, high, size=(n, params.dims))


def draw_clustered_centers(params: ClusteredLumpyParams, rng: np.random.Generator):
    """Returns (cluster_centers (k, d), blob_centers (n, d))."""
    d = params.dims
    k = int(rng.poisson(params.mean_cluster_count))
    if k == 0:
        return np.empty((0, d)), np.empty((0, d))
    high = np.asarray(params.field_shape, dtype=float)
    cluster_centers = rng.uniform(0.0, high, size=(k, d))
    counts = rng.poisson(params.mean_blobs_per_cluster, size=k)
    total = int(counts.sum())
    if total == 0:
        return cluster_centers, np.empty((0, d))
    offsets = rng.normal(0.0, params.cluster_spread, size=(total, d))
    blob_centers = np.repeat(cluster_centers, counts, axis=0) + offsets
    return cluster_centers, blob_centers


def _deposit(field, centers, amplitude, width):
    if field.ndim == 2:
        kernels.deposit_gaussians_2d(field, centers, amplitude, width, CUTOFF_SIGMAS)
    else:
        kernels.deposit_gaussians_3d(field, centers, amplitude, width, CUTOFF_SIGMAS)


def sample_lumpy(params: LumpyParams, rng: np.random.Generator) -> np.ndarray:
    """One lumpy field (float64, row-major), deterministic given the rng state."""
    field = np.zeros(params.field_shape)
    centers = draw_lump_centers(params, rng)
    if len(centers):
        _deposit(field, np.ascontiguousarray(centers), params.amplitude, params.width)
    return field


def sample_clustered_lumpy(params: ClusteredLumpyParams, rng: np.random.Generator) -> np.ndarray:
    field = np.zeros(params.field_shape)
    _, blob_centers = draw_clustered_centers(params, rng)
    if len(blob_centers):
        _deposit(field, np.ascontiguousarray(blob_centers), params.amplitude, params.width)
    return field


def sample_ensemble(params, count, seed, progress=None):
    """Stack of `count` fields, one independent child stream per sample.

    Uses SeedSequence.spawn so samples are reproducible independently of how
    generation is batched or parallelized.
    """
    sampler = sample_lumpy if isinstance(params, LumpyParams) else sample_clustered_lumpy
    out = np.empty((count, *params.field_shape), dtype=np.float32)
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(count)):
        out[i] = sampler(params, np.random.default_rng(child))
        if progress is not None:
            progress(i)
    return out
