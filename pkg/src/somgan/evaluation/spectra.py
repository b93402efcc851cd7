"""Power-spectrum diagnostics for residual measurement noise.

White reconstruction noise is flat in spatial frequency while the lumpy
backgrounds fall off quickly, so the mean power in the top radial-frequency
band separates noise-carrying ensembles from clean ones.
"""
import numpy as np

from ..errors import ParameterError


def mean_power_spectrum(ens: np.ndarray) -> np.ndarray:
    """Mean |unitary DFT|^2 over a stack of fields."""
    ens = np.asarray(ens)
    if ens.ndim not in (3, 4):
        raise ParameterError(f"expected a stack of 2-d or 3-d fields, got shape {ens.shape}")
    axes = tuple(range(1, ens.ndim))
    spec = np.fft.fftn(ens, axes=axes, norm="ortho")
    return (spec.real**2 + spec.imag**2).mean(axis=0)


def radial_frequencies(shape) -> np.ndarray:
    """Radial frequency magnitude in cycles/voxel for each DFT bin."""
    grids = np.meshgrid(*[np.fft.fftfreq(n) for n in shape], indexing="ij", sparse=True)
    return np.sqrt(sum(g**2 for g in grids))


def band_mean_power(power: np.ndarray, lo_frac: float = 0.75) -> float:
    """Mean spectral power over bins with radial frequency >= lo_frac * Nyquist.

    lo_frac=0.75 selects the top quartile of the per-axis frequency range.
    """
    if not 0.0 <= lo_frac < 1.0:
        raise ParameterError(f"lo_frac must be in [0, 1), got {lo_frac}")
    r = radial_frequencies(power.shape)
    mask = r >= lo_frac * 0.5
    return float(power[mask].mean())


def highband_power(ens: np.ndarray, lo_frac: float = 0.75) -> float:
    return band_mean_power(mean_power_spectrum(ens), lo_frac)
