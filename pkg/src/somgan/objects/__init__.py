"""Ground-truth stochastic object ensembles.

Object fields are plain numpy arrays: real-valued, row-major, 2-D or 3-D.
"""
from .kernels import BACKEND as KERNEL_BACKEND
from .lumpy import (
    ClusteredLumpyParams,
    LumpyParams,
    draw_clustered_centers,
    draw_lump_centers,
    sample_clustered_lumpy,
    sample_ensemble,
    sample_lumpy,
)
from .signals import SignalSpec, insert_signal, signal_field, signal_support, sphere_offsets

__all__ = [
    "KERNEL_BACKEND",
    "ClusteredLumpyParams",
    "LumpyParams",
    "SignalSpec",
    "draw_clustered_centers",
    "draw_lump_centers",
    "insert_signal",
    "sample_clustered_lumpy",
    "sample_ensemble",
    "sample_lumpy",
    "signal_field",
    "signal_support",
    "sphere_offsets",
]
