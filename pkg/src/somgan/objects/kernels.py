"""Deposition-kernel backend selection.

The compiled extension is used when available; set SOMGAN_KERNEL=numpy (or
=cython) to force a backend.  The active backend name is exported so dataset
manifests can record it: the two backends agree to ~1e-15 relative but are
not guaranteed bit-identical, so payload hashes are reproducible per backend.
"""
import os

from ..errors import ConfigError
from . import _kernels_np

try:
    from . import _kernels_c
except ImportError:  # pragma: no cover - depends on the build environment
    _kernels_c = None

_FORCED = os.environ.get("SOMGAN_KERNEL", "").strip().lower()

if _FORCED == "numpy":
    _impl = _kernels_np
    BACKEND = "numpy"
elif _FORCED == "cython":
    if _kernels_c is None:
        raise ConfigError("SOMGAN_KERNEL=cython but the compiled extension is not built")
    _impl = _kernels_c
    BACKEND = "cython"
elif _FORCED:
    raise ConfigError(f"unknown SOMGAN_KERNEL value {_FORCED!r} (use 'cython' or 'numpy')")
elif _kernels_c is not None:
    _impl = _kernels_c
    BACKEND = "cython"
else:
    _impl = _kernels_np
    BACKEND = "numpy"

deposit_gaussians_2d = _impl.deposit_gaussians_2d
deposit_gaussians_3d = _impl.deposit_gaussians_3d


def available_backends():
    names = ["numpy"]
    if _kernels_c is not None:
        names.insert(0, "cython")
    return names


def get_backend(name):
    """Return (deposit_2d, deposit_3d) for an explicit backend name."""
    if name == "numpy":
        return _kernels_np.deposit_gaussians_2d, _kernels_np.deposit_gaussians_3d
    if name == "cython":
        if _kernels_c is None:
            raise ConfigError("compiled kernel backend is not built")
        return _kernels_c.deposit_gaussians_2d, _kernels_c.deposit_gaussians_3d
    raise ConfigError(f"unknown kernel backend {name!r}")
