"""Region-of-interest extraction for detection statistics.

The ROI is an axis-aligned block of `side` voxels per axis whose start is
center - side // 2, so for the default side 8 the nominal center voxel sits
at local index 4 on every axis.  Vectors are row-major flattenings.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import BoundsError, ParameterError
from ..objects.signals import SignalSpec, signal_field


@dataclass(frozen=True)
class ROISpec:
    center: tuple
    side: tuple = 8

    def __post_init__(self):
        center = tuple(int(c) for c in self.center)
        side = self.side
        if np.isscalar(side):
            side = (int(side),) * len(center)
        else:
            side = tuple(int(s) for s in side)
        if len(side) != len(center):
            raise ParameterError(f"side {side} does not match center {center}")
        if any(s <= 0 for s in side):
            raise ParameterError(f"ROI sides must be positive, got {side}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "side", side)

    @property
    def n_voxels(self):
        return int(np.prod(self.side))

    def slices(self, field_shape) -> tuple:
        if len(field_shape) != len(self.center):
            raise ParameterError(
                f"ROI center {self.center} does not match field shape {tuple(field_shape)}")
        out = []
        for c, s, n in zip(self.center, self.side, field_shape):
            start = c - s // 2
            if start < 0 or start + s > n:
                raise BoundsError(
                    f"ROI {self.center}/{self.side} exceeds field {tuple(field_shape)}")
            out.append(slice(start, start + s))
        return tuple(out)


def extract_roi(x: np.ndarray, roi: ROISpec) -> np.ndarray:
    """Flattened ROI voxels of a single field."""
    return x[roi.slices(x.shape)].reshape(-1).copy()


def extract_roi_batch(x: np.ndarray, roi: ROISpec) -> np.ndarray:
    """(n, roi.n_voxels) matrix of ROI vectors from a stack of fields."""
    sl = roi.slices(x.shape[1:])
    return x[(slice(None), *sl)].reshape(x.shape[0], -1).copy()


def signal_roi_vector(sig: SignalSpec, roi: ROISpec, field_shape) -> np.ndarray:
    """The detection signal restricted to the ROI, flattened.

    Uses the same voxel-membership rule as insert_signal, so the template and
    the inserted signal always agree voxel for voxel.
    """
    return extract_roi(signal_field(sig, field_shape), roi)
