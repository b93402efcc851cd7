"""Detection signals: uniform spheres (disks in 2D) on the voxel lattice.

A voxel belongs to the signal when the Euclidean distance from its center to
the signal center is <= radius.  For radius 2 that is 13 lattice points in
2D and 33 in 3D.  Signals do not wrap: the support must fit in the field.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import BoundsError, ParameterError


@dataclass(frozen=True)
class SignalSpec:
    center: tuple
    radius: float
    amplitude: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(int(c) for c in self.center))
        if len(self.center) not in (2, 3):
            raise ParameterError(f"signal center must be 2- or 3-dimensional, got {self.center}")
        if not self.radius > 0:
            raise ParameterError(f"radius must be > 0, got {self.radius}")
        if self.amplitude < 0:
            raise ParameterError(f"amplitude must be >= 0, got {self.amplitude}")


def sphere_offsets(radius: float, dims: int) -> np.ndarray:
    """Integer lattice offsets with |offset| <= radius; shape (n, dims)."""
    m = int(np.floor(radius))
    axes = [np.arange(-m, m + 1)] * dims
    grids = np.meshgrid(*axes, indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=1)
    keep = (offs.astype(float) ** 2).sum(axis=1) <= radius**2
    return offs[keep]


def signal_support(sig: SignalSpec, field_shape) -> tuple:
    """Voxel index arrays of the signal support; raises if outside the field."""
    if len(sig.center) != len(field_shape):
        raise ParameterError(
            f"signal center {sig.center} does not match field shape {tuple(field_shape)}")
    voxels = np.asarray(sig.center) + sphere_offsets(sig.radius, len(sig.center))
    if voxels.min() < 0 or (voxels >= np.asarray(field_shape)).any():
        raise BoundsError(
            f"signal at {sig.center} with radius {sig.radius} exceeds field {tuple(field_shape)}")
    return tuple(voxels.T)


def signal_field(sig: SignalSpec, field_shape) -> np.ndarray:
    """The signal as a full field: amplitude on the support, zero elsewhere."""
    s = np.zeros(field_shape)
    s[signal_support(sig, field_shape)] = sig.amplitude
    return s


def insert_signal(field: np.ndarray, sig: SignalSpec) -> np.ndarray:
    """field + signal; the input is not modified."""
    out = field.copy()
    out[signal_support(sig, field.shape)] += sig.amplitude
    return out
