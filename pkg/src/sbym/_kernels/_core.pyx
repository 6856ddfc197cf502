# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: SU(2)/SL(2,C) link exponentials and ordered products.

Same conventions as the numpy backend: coordinates in the orthonormal basis
e_a = -(i/2) sigma_a, holonomy multiplies earlier links on the left.
"""

import numpy as np

NAME = "cython"

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double complex ccos(double complex)
    double complex csin(double complex)
    double cabs(double complex)

from libc.math cimport sqrt, sin, cos


cdef inline void _exp_real(double c1, double c2, double c3,
                           double complex * out) nogil:
    cdef double theta = sqrt(c1 * c1 + c2 * c2 + c3 * c3)
    cdef double w = 0.5 * theta
    cdef double a0 = cos(w)
    cdef double k
    if w < 1e-6:
        k = 0.5 - w * w / 12.0
    else:
        k = sin(w) / (2.0 * w)
    out[0] = a0 - 1j * k * c3
    out[1] = -k * c2 - 1j * k * c1
    out[2] = k * c2 - 1j * k * c1
    out[3] = a0 + 1j * k * c3


cdef inline void _exp_cplx(double complex c1, double complex c2,
                           double complex c3, double complex * out) nogil:
    cdef double complex w = 0.5 * csqrt(c1 * c1 + c2 * c2 + c3 * c3)
    cdef double complex a0 = ccos(w)
    cdef double complex k
    if cabs(w) < 1e-6:
        k = 0.5 - w * w / 12.0
    else:
        k = csin(w) / (2.0 * w)
    out[0] = a0 - 1j * k * c3
    out[1] = -k * c2 - 1j * k * c1
    out[2] = k * c2 - 1j * k * c1
    out[3] = a0 + 1j * k * c3


def exp_su2(coords):
    """exp of -(i/2)(c.sigma) for real coords (..., 3) -> (..., 2, 2)."""
    arr = np.ascontiguousarray(coords, dtype=np.float64)
    shape = arr.shape[:-1]
    flat = arr.reshape(-1, 3)
    out = np.empty((flat.shape[0], 2, 2), dtype=np.complex128)
    cdef const double[:, ::1] cv = flat
    cdef double complex[:, :, ::1] ov = out
    cdef Py_ssize_t i
    cdef double complex u[4]
    with nogil:
        for i in range(cv.shape[0]):
            _exp_real(cv[i, 0], cv[i, 1], cv[i, 2], u)
            ov[i, 0, 0] = u[0]
            ov[i, 0, 1] = u[1]
            ov[i, 1, 0] = u[2]
            ov[i, 1, 1] = u[3]
    return out.reshape(shape + (2, 2))


def exp_sl2c(coords):
    """exp of -(i/2)(c.sigma) for complex coords (..., 3) -> (..., 2, 2)."""
    arr = np.ascontiguousarray(coords, dtype=np.complex128)
    shape = arr.shape[:-1]
    flat = arr.reshape(-1, 3)
    out = np.empty((flat.shape[0], 2, 2), dtype=np.complex128)
    cdef const double complex[:, ::1] cv = flat
    cdef double complex[:, :, ::1] ov = out
    cdef Py_ssize_t i
    cdef double complex u[4]
    with nogil:
        for i in range(cv.shape[0]):
            _exp_cplx(cv[i, 0], cv[i, 1], cv[i, 2], u)
            ov[i, 0, 0] = u[0]
            ov[i, 0, 1] = u[1]
            ov[i, 1, 0] = u[2]
            ov[i, 1, 1] = u[3]
    return out.reshape(shape + (2, 2))


def holonomy_su2(coords, double scale):
    """Ordered product of exp(scale*A_k) for real coords (M, N, 3)."""
    arr = np.ascontiguousarray(coords, dtype=np.float64)
    cdef const double[:, :, ::1] cv = arr
    out = np.empty((cv.shape[0], 2, 2), dtype=np.complex128)
    cdef double complex[:, :, ::1] ov = out
    cdef Py_ssize_t i, k
    cdef double complex u[4]
    cdef double complex a00, a01, a10, a11, b00, b01, b10, b11
    with nogil:
        for i in range(cv.shape[0]):
            a00 = 1
            a01 = 0
            a10 = 0
            a11 = 1
            for k in range(cv.shape[1]):
                _exp_real(scale * cv[i, k, 0], scale * cv[i, k, 1],
                          scale * cv[i, k, 2], u)
                b00 = a00 * u[0] + a01 * u[2]
                b01 = a00 * u[1] + a01 * u[3]
                b10 = a10 * u[0] + a11 * u[2]
                b11 = a10 * u[1] + a11 * u[3]
                a00 = b00
                a01 = b01
                a10 = b10
                a11 = b11
            ov[i, 0, 0] = a00
            ov[i, 0, 1] = a01
            ov[i, 1, 0] = a10
            ov[i, 1, 1] = a11
    return out


def holonomy_sl2c(coords, double scale):
    """Ordered product of exp(scale*A_k) for complex coords (M, N, 3)."""
    arr = np.ascontiguousarray(coords, dtype=np.complex128)
    cdef const double complex[:, :, ::1] cv = arr
    out = np.empty((cv.shape[0], 2, 2), dtype=np.complex128)
    cdef double complex[:, :, ::1] ov = out
    cdef Py_ssize_t i, k
    cdef double complex u[4]
    cdef double complex a00, a01, a10, a11, b00, b01, b10, b11
    with nogil:
        for i in range(cv.shape[0]):
            a00 = 1
            a01 = 0
            a10 = 0
            a11 = 1
            for k in range(cv.shape[1]):
                _exp_cplx(scale * cv[i, k, 0], scale * cv[i, k, 1],
                          scale * cv[i, k, 2], u)
                b00 = a00 * u[0] + a01 * u[2]
                b01 = a00 * u[1] + a01 * u[3]
                b10 = a10 * u[0] + a11 * u[2]
                b11 = a10 * u[1] + a11 * u[3]
                a00 = b00
                a01 = b01
                a10 = b10
                a11 = b11
            ov[i, 0, 0] = a00
            ov[i, 0, 1] = a01
            ov[i, 1, 0] = a10
            ov[i, 1, 1] = a11
    return out
