# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Gaussian-blob deposition kernels.

Blob centers are continuous voxel coordinates and may lie anywhere
(including outside the field); deposits wrap toroidally, which keeps the
ensemble statistics stationary and the analytic moments exact.  The blob
window is truncated at ``cutoff_sigmas`` standard deviations; everything
beyond contributes less than exp(-cutoff^2/2) of the peak and is far below
the tolerances validated by the test suite.
"""
from libc.math cimport ceil, exp, floor

import numpy as np

cimport numpy as cnp

cnp.import_array()


def deposit_gaussians_2d(double[:, ::1] field, double[:, ::1] centers,
                         double amplitude, double width, double cutoff_sigmas):
    cdef Py_ssize_t nx = field.shape[0]
    cdef Py_ssize_t ny = field.shape[1]
    cdef Py_ssize_t n = centers.shape[0]
    cdef double inv2w2 = 1.0 / (2.0 * width * width)
    cdef double r = cutoff_sigmas * width
    cdef Py_ssize_t i, qx, qy, ix, iy, x0, x1, y0, y1
    cdef double cx, cy, dx, dy, wx

    for i in range(n):
        cx = centers[i, 0]
        cy = centers[i, 1]
        x0 = <Py_ssize_t>ceil(cx - r)
        x1 = <Py_ssize_t>floor(cx + r)
        y0 = <Py_ssize_t>ceil(cy - r)
        y1 = <Py_ssize_t>floor(cy + r)
        for qx in range(x0, x1 + 1):
            dx = qx - cx
            ix = qx % nx
            if ix < 0:
                ix += nx
            wx = amplitude * exp(-dx * dx * inv2w2)
            for qy in range(y0, y1 + 1):
                dy = qy - cy
                iy = qy % ny
                if iy < 0:
                    iy += ny
                field[ix, iy] += wx * exp(-dy * dy * inv2w2)


def deposit_gaussians_3d(double[:, :, ::1] field, double[:, ::1] centers,
                         double amplitude, double width, double cutoff_sigmas):
    cdef Py_ssize_t nx = field.shape[0]
    cdef Py_ssize_t ny = field.shape[1]
    cdef Py_ssize_t nz = field.shape[2]
    cdef Py_ssize_t n = centers.shape[0]
    cdef double inv2w2 = 1.0 / (2.0 * width * width)
    cdef double r = cutoff_sigmas * width
    cdef Py_ssize_t i, qx, qy, qz, ix, iy, iz, x0, x1, y0, y1, z0, z1
    cdef double cx, cy, cz, dx, dy, dz, wx, wxy

    for i in range(n):
        cx = centers[i, 0]
        cy = centers[i, 1]
        cz = centers[i, 2]
        x0 = <Py_ssize_t>ceil(cx - r)
        x1 = <Py_ssize_t>floor(cx + r)
        y0 = <Py_ssize_t>ceil(cy - r)
        y1 = <Py_ssize_t>floor(cy + r)
        z0 = <Py_ssize_t>ceil(cz - r)
        z1 = <Py_ssize_t>floor(cz + r)
        for qx in range(x0, x1 + 1):
            dx = qx - cx
            ix = qx % nx
            if ix < 0:
                ix += nx
            wx = amplitude * exp(-dx * dx * inv2w2)
            for qy in range(y0, y1 + 1):
                dy = qy - cy
                iy = qy % ny
                if iy < 0:
                    iy += ny
                wxy = wx * exp(-dy * dy * inv2w2)
                for qz in range(z0, z1 + 1):
                    dz = qz - cz
                    iz = qz % nz
                    if iz < 0:
                        iz += nz
                    field[ix, iy, iz] += wxy * exp(-dz * dz * inv2w2)
