"""Vectorized numpy implementation of the hot kernels.

Conventions (shared with the compiled backend):

* algebra coordinates ``c`` are with respect to the orthonormal basis
  ``e_a = -(i/2) sigma_a`` of su(2), so the represented matrix is
  ``-(i/2) (c . sigma)``;
* ``exp(-(i/2) c.sigma) = cos(w) I - i (sin(w)/(2w)) (c.sigma)`` with
  ``w = |c|/2`` (real case) or ``w = sqrt(sum c_a^2)/2`` (complex case;
  branch-independent since cos and sinc are even);
* holonomy multiplies earlier links on the LEFT:
  ``h = U_0 U_1 ... U_{N-1}`` with ``U_k = exp(scale * A_k)``.
"""

import numpy as np

NAME = "numpy"

_SMALL = 1e-6


def _sinc_over_2(w):
    """sin(w)/(2w), stable at w -> 0 (works for real or complex w)."""
    w = np.asarray(w)
    small = np.abs(w) < _SMALL
    safe = np.where(small, 1.0, w)
    out = np.sin(safe) / (2.0 * safe)
    series = 0.5 - w * w / 12.0
    return np.where(small, series, out)


def _assemble(a0, k, c):
    """Matrix cos-part a0 and coefficient k of -(i)(c.sigma)/1: build 2x2."""
    c1, c2, c3 = c[..., 0], c[..., 1], c[..., 2]
    out = np.empty(c.shape[:-1] + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = a0 - 1j * k * c3
    out[..., 0, 1] = -k * c2 - 1j * k * c1
    out[..., 1, 0] = k * c2 - 1j * k * c1
    out[..., 1, 1] = a0 + 1j * k * c3
    return out


def exp_su2(coords):
    """exp of -(i/2)(c.sigma) for real coords (..., 3) -> (..., 2, 2)."""
    coords = np.asarray(coords, dtype=np.float64)
    theta = np.sqrt(np.sum(coords * coords, axis=-1))
    w = 0.5 * theta
    a0 = np.cos(w)
    k = _sinc_over_2(w)
    return _assemble(a0, k, coords)


def exp_sl2c(coords):
    """exp of -(i/2)(c.sigma) for complex coords (..., 3) -> (..., 2, 2)."""
    coords = np.asarray(coords, dtype=np.complex128)
    w = 0.5 * np.sqrt(np.sum(coords * coords, axis=-1))
    a0 = np.cos(w)
    k = _sinc_over_2(w)
    return _assemble(a0, k, coords)


def _ordered_product(mats):
    """Product over axis 1 of (M, N, 2, 2), earlier index on the left."""
    m = mats.shape[0]
    acc = np.empty((m, 2, 2), dtype=np.complex128)
    acc[:] = np.eye(2)
    for k in range(mats.shape[1]):
        u = mats[:, k]
        a00 = acc[:, 0, 0] * u[:, 0, 0] + acc[:, 0, 1] * u[:, 1, 0]
        a01 = acc[:, 0, 0] * u[:, 0, 1] + acc[:, 0, 1] * u[:, 1, 1]
        a10 = acc[:, 1, 0] * u[:, 0, 0] + acc[:, 1, 1] * u[:, 1, 0]
        a11 = acc[:, 1, 0] * u[:, 0, 1] + acc[:, 1, 1] * u[:, 1, 1]
        acc[:, 0, 0] = a00
        acc[:, 0, 1] = a01
        acc[:, 1, 0] = a10
        acc[:, 1, 1] = a11
    return acc


def holonomy_su2(coords, scale):
    """Ordered product of exp(scale*A_k) for real coords (M, N, 3)."""
    coords = np.asarray(coords, dtype=np.float64)
    return _ordered_product(exp_su2(coords * scale))


def holonomy_sl2c(coords, scale):
    """Ordered product of exp(scale*A_k) for complex coords (M, N, 3)."""
    coords = np.asarray(coords, dtype=np.complex128)
    return _ordered_product(exp_sl2c(coords * scale))
