"""Stylized MR measurement and reconstruction operators.

Measurement: unitary d-dimensional DFT of the object plus i.i.d. complex
Gaussian noise, where noise_std is the standard deviation of *each* of the
real and imaginary components per k-space sample (stated explicitly to avoid
the factor-sqrt(2) ambiguity).  Reconstruction: real part of the unitary
inverse DFT; with unitary normalization the reconstruction noise has the
same per-voxel variance noise_std**2 as each k-space component.

All functions operate on the trailing `dims` axes, so arrays with extra
leading axes are treated as batches.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True, eq=False)
class ImagingConfig:
    dims: int
    noise_std: float
    # hook for undersampled acquisitions; default full sampling (untested beyond shape)
    sample_mask: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.dims not in (2, 3):
            raise ParameterError(f"dims must be 2 or 3, got {self.dims}")
        if self.noise_std < 0:
            raise ParameterError(f"noise_std must be >= 0, got {self.noise_std}")
        if self.sample_mask is not None and self.sample_mask.ndim != self.dims:
            raise ParameterError("sample_mask dimensionality does not match dims")


def _field_axes(a: np.ndarray, dims: int) -> tuple:
    if a.ndim < dims:
        raise ParameterError(f"array with {a.ndim} axes cannot hold a {dims}-d field")
    return tuple(range(a.ndim - dims, a.ndim))


def dft_forward(f: np.ndarray, dims: int | None = None) -> np.ndarray:
    """Unitary DFT over the trailing field axes; Parseval holds exactly."""
    f = np.asarray(f)
    dims = f.ndim if dims is None else dims
    return np.fft.fftn(f, axes=_field_axes(f, dims), norm="ortho")


def measure(f: np.ndarray, cfg: ImagingConfig, rng: np.random.Generator) -> np.ndarray:
    """g = H f + n with fresh complex Gaussian noise (real drawn before imag).

    Accepts a single field (ndim == dims) or a batch (ndim == dims + 1).
    """
    f = np.asarray(f)
    if f.ndim not in (cfg.dims, cfg.dims + 1):
        raise ParameterError(f"{f.ndim}-axis array does not match imaging dims={cfg.dims}")
    g = dft_forward(f, cfg.dims)
    if cfg.noise_std > 0:
        g = g + rng.normal(0.0, cfg.noise_std, g.shape) \
              + 1j * rng.normal(0.0, cfg.noise_std, g.shape)
    if cfg.sample_mask is not None:
        g = g * cfg.sample_mask
    return g


def reconstruct(g: np.ndarray, dims: int | None = None) -> np.ndarray:
    """Real part of the unitary inverse DFT (objects are real-valued)."""
    g = np.asarray(g)
    dims = g.ndim if dims is None else dims
    return np.fft.ifftn(g, axes=_field_axes(g, dims), norm="ortho").real
