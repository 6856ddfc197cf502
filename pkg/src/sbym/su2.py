"""SU(2) / SL(2,C) group core: algebra coordinates, exp/log, polar
decomposition, and Haar measure (sampling and exact quadrature).

Conventions, fixed once for the whole package:

* Ad-invariant inner product on su(2):  <X, Y> = -2 tr(XY).
* Orthonormal basis e_a = -(i/2) sigma_a, a = 1, 2, 3; an ``AlgebraVector``
  stores the coordinates c with respect to this basis, so the represented
  matrix is -(i/2) (c . sigma) and |X| equals the Euclidean norm of c.
* exp_group(theta * e3) = diag(exp(-i theta/2), exp(i theta/2)); in
  particular exp_group(2*pi*e3) = -I (the double cover) and the principal
  logarithm is defined for |log| < 2*pi, with the cut locus at -I.
* Group elements in the quaternion form U = a0 I + i (a . sigma) with
  a0^2 + |a|^2 = 1; several routines exploit this parametrization.

All values are immutable; the only stateful inputs are explicit numpy
generators passed to the samplers.
"""

import dataclasses
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import CutLocusError

SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=np.complex128)

# Orthonormal basis of su(2) under <X,Y> = -2 tr(XY).
BASIS = -0.5j * SIGMA

IDENTITY2 = np.eye(2, dtype=np.complex128)


@dataclasses.dataclass(frozen=True, eq=False)
class InnerProductConvention:
    """<X,Y> = -scale * tr(XY); scale = 2 makes {-(i/2) sigma_a} orthonormal."""
    scale: float = 2.0


INNER_PRODUCT = InnerProductConvention()


def _freeze(obj, name, arr):
    arr = np.asarray(arr)
    arr.flags.writeable = False
    object.__setattr__(obj, name, arr)


@dataclasses.dataclass(frozen=True, eq=False)
class AlgebraVector:
    """Element of su(2), stored as 3 real coordinates in the basis above."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite algebra coordinates")
        _freeze(self, "coords", c)

    @property
    def matrix(self):
        return np.tensordot(self.coords, BASIS, axes=(0, 0))

    @property
    def norm(self):
        return float(np.linalg.norm(self.coords))

    @classmethod
    def from_matrix(cls, mat):
        mat = np.asarray(mat, dtype=np.complex128)
        # c_a = <X, e_a> = -2 tr(X e_a)
        coords = [(-2.0 * np.trace(mat @ BASIS[a])).real for a in range(3)]
        return cls(np.array(coords))

    def __add__(self, other):
        return AlgebraVector(self.coords + other.coords)

    def __sub__(self, other):
        return AlgebraVector(self.coords - other.coords)

    def __rmul__(self, scalar):
        return AlgebraVector(float(scalar) * self.coords)


@dataclasses.dataclass(frozen=True, eq=False)
class ComplexAlgebraVector:
    """Element of sl(2,C) = su(2) + i su(2), 3 complex coordinates."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=np.complex128).reshape(3)
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite algebra coordinates")
        _freeze(self, "coords", c)

    @property
    def matrix(self):
        return np.tensordot(self.coords, BASIS, axes=(0, 0))

    @property
    def real_part(self):
        return AlgebraVector(self.coords.real)

    @property
    def imag_part(self):
        return AlgebraVector(self.coords.imag)

    @classmethod
    def from_parts(cls, re, im):
        return cls(re.coords + 1j * im.coords)

    def __add__(self, other):
        return ComplexAlgebraVector(self.coords + other.coords)

    def __rmul__(self, scalar):
        return ComplexAlgebraVector(complex(scalar) * self.coords)


@dataclasses.dataclass(frozen=True, eq=False)
class GroupElement:
    """Element of SU(2): a 2x2 unitary matrix with determinant 1."""

    matrix: np.ndarray
    _TOL = 1e-9

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128).reshape(2, 2)
        if abs(np.linalg.det(m) - 1.0) > self._TOL:
            raise ValueError("determinant differs from 1 beyond tolerance")
        if np.max(np.abs(m.conj().T @ m - IDENTITY2)) > self._TOL:
            raise ValueError("matrix is not unitary within tolerance")
        _freeze(self, "matrix", m)

    @property
    def inverse(self):
        return GroupElement(self.matrix.conj().T)

    def __matmul__(self, other):
        return GroupElement(self.matrix @ other.matrix)

    @classmethod
    def identity(cls):
        return cls(IDENTITY2)


@dataclasses.dataclass(frozen=True, eq=False)
class ComplexGroupElement:
    """Element of SL(2,C): a 2x2 complex matrix with determinant 1."""

    matrix: np.ndarray
    _TOL = 1e-9

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128).reshape(2, 2)
        if abs(np.linalg.det(m) - 1.0) > self._TOL * max(1.0, np.abs(m).max() ** 2):
            raise ValueError("determinant differs from 1 beyond tolerance")
        _freeze(self, "matrix", m)

    @property
    def inverse(self):
        m = self.matrix
        adj = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
        return ComplexGroupElement(adj)

    def __matmul__(self, other):
        return ComplexGroupElement(self.matrix @ other.matrix)

    @classmethod
    def identity(cls):
        return cls(IDENTITY2)


def inner(x, y):
    """Ad-invariant inner product of two algebra vectors (real or complex)."""
    return np.sum(x.coords * y.coords)


def adjoint(x, vec):
    """Ad_x(vec) = x vec x^{-1}, an isometry of the algebra."""
    mat = x.matrix @ vec.matrix @ x.matrix.conj().T
    if isinstance(vec, ComplexAlgebraVector):
        coords = [(-2.0 * np.trace(mat @ BASIS[a])) for a in range(3)]
        return ComplexAlgebraVector(np.array(coords))
    return AlgebraVector.from_matrix(mat)


def exp_group(vec):
    """Matrix exponential su(2) -> SU(2) (entire; closed form)."""
    return GroupElement(_kernels.exp_su2(vec.coords))


def exp_complex(vec):
    """Matrix exponential sl(2,C) -> SL(2,C); agrees with exp_group on su(2)."""
    if isinstance(vec, AlgebraVector):
        vec = ComplexAlgebraVector(vec.coords.astype(np.complex128))
    return ComplexGroupElement(_kernels.exp_sl2c(vec.coords))


def _quaternion(mat):
    """(a0, a) with mat = a0 I + i (a . sigma); exact for unitary input."""
    a0 = 0.5 * (mat[0, 0] + mat[1, 1]).real
    a1 = 0.5 * (mat[0, 1] + mat[1, 0]).imag
    a2 = 0.5 * (mat[0, 1] - mat[1, 0]).real
    a3 = 0.5 * (mat[0, 0] - mat[1, 1]).imag
    return a0, np.array([a1, a2, a3])


def log_group(x, tol=1e-12):
    """Principal logarithm SU(2) -> su(2).

    Defined away from the cut locus -I; the result satisfies |log| < 2*pi and
    exp_group(log_group(x)) == x to roundoff.
    """
    a0, a = _quaternion(x.matrix)
    s = np.linalg.norm(a)      # sin(theta/2)
    theta = 2.0 * np.arctan2(s, a0)
    if np.pi * 2.0 - theta < np.sqrt(tol):
        raise CutLocusError("logarithm undefined at the cut locus (-I)")
    if s < 1e-12:
        coords = -2.0 * a      # theta/sin(theta/2) -> 2
    else:
        coords = -a * (theta / s)
    return AlgebraVector(coords)


def log_complex(g, tol=1e-12):
    """Principal logarithm SL(2,C) -> sl(2,C) (plumbing for gauge transport).

    Uses tr(g) = 2 cos(w); the branch Re(w) in [0, pi] is taken.  Raises
    CutLocusError near the w = pi edge (g close to -I), where the inverse is
    ill-conditioned.
    """
    mat = g.matrix
    tau = 0.5 * (mat[0, 0] + mat[1, 1])
    w = np.arccos(complex(tau))
    if np.pi - w.real < np.sqrt(tol):
        raise CutLocusError("complex logarithm too close to the -I branch edge")
    if abs(w) < 1e-6:
        k = 0.5 - w * w / 12.0
    else:
        k = np.sin(w) / (2.0 * w)
    csigma = (mat - np.cos(w) * IDENTITY2) * (1j / k)
    c1 = 0.5 * (csigma[0, 1] + csigma[1, 0])
    c2 = 0.5j * (csigma[0, 1] - csigma[1, 0])
    c3 = csigma[0, 0]
    return ComplexAlgebraVector(np.array([c1, c2, c3]))


def polar_compose(x, y):
    """The phase-space chart (x, Y) -> x * exp(iY) into SL(2,C)."""
    iy = ComplexAlgebraVector(1j * y.coords)
    return ComplexGroupElement(x.matrix @ exp_complex(iy).matrix)


def polar_decompose(g):
    """Inverse of polar_compose: g = x * exp(iY) with x unitary.

    The positive factor p = exp(iY) is the Hermitian square root of g^* g,
    computed in closed form from its quaternion-like decomposition
    p = cosh(mu) I + sinh(mu) (m . sigma).
    """
    mat = g.matrix
    p2 = mat.conj().T @ mat            # positive definite, det 1
    t = 0.5 * np.trace(p2).real        # cosh(2 mu)
    b = np.array([
        0.5 * (p2[0, 1] + p2[1, 0]).real,
        0.5 * (p2[0, 1] - p2[1, 0]).imag * -1.0,
        0.5 * (p2[0, 0] - p2[1, 1]).real,
    ])                                  # sinh(2 mu) * m
    snorm = np.linalg.norm(b)
    mu2 = np.arcsinh(snorm)             # 2 mu
    if snorm < 1e-12:
        coords = b                      # 2 mu * m -> b as mu -> 0
    else:
        coords = b * (mu2 / snorm)
    y = AlgebraVector(coords)           # iY has eigenvalues +-|Y|/2 = +-mu
    p_inv = _kernels.exp_sl2c(-1j * y.coords)
    x_mat = mat @ p_inv
    # the closed form leaves roundoff of order 1e-15; project back to SU(2)
    a0, a = _quaternion(x_mat)
    q = np.array([a0, *a])
    q /= np.linalg.norm(q)
    x = GroupElement(np.array([
        [q[0] + 1j * q[3], q[2] + 1j * q[1]],
        [-q[2] + 1j * q[1], q[0] - 1j * q[3]],
    ]))
    return x, y


def haar_sample(rng):
    """One Haar-uniform element of SU(2) (normalized 4D Gaussian)."""
    return GroupElement(haar_sample_batch(rng, 1)[0])


def haar_sample_batch(rng, count):
    """(count, 2, 2) array of independent Haar-uniform SU(2) matrices."""
    q = rng.standard_normal((count, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    out = np.empty((count, 2, 2), dtype=np.complex128)
    out[:, 0, 0] = q[:, 0] + 1j * q[:, 3]
    out[:, 0, 1] = q[:, 2] + 1j * q[:, 1]
    out[:, 1, 0] = -q[:, 2] + 1j * q[:, 1]
    out[:, 1, 1] = q[:, 0] - 1j * q[:, 3]
    return out


@lru_cache(maxsize=64)
def _haar_rule(band_limit):
    n_ang = band_limit + 1
    n_beta = (band_limit + 3) // 2
    alphas = 2.0 * np.pi * np.arange(n_ang) / n_ang
    gammas = 4.0 * np.pi * np.arange(n_ang) / n_ang
    xs, ws = np.polynomial.legendre.leggauss(n_beta)
    betas = np.arccos(xs)
    # U = z(alpha) y(beta) z(gamma) with z(phi) = diag(e^{-i phi/2}, e^{i phi/2})
    # and y(beta) the real rotation by beta/2; assembled by broadcasting
    half_a = 0.5 * alphas
    half_g = 0.5 * gammas
    cb, sb = np.cos(0.5 * betas), np.sin(0.5 * betas)
    ea = np.exp(-1j * half_a)[:, None, None]
    eg = np.exp(-1j * half_g)[None, None, :]
    cbb = cb[None, :, None]
    sbb = sb[None, :, None]
    u00 = ea * cbb * eg
    u01 = -ea * sbb * np.conj(eg)
    u10 = np.conj(ea) * sbb * eg
    u11 = np.conj(ea) * cbb * np.conj(eg)
    nodes = np.empty(u00.shape + (2, 2), dtype=np.complex128)
    nodes[..., 0, 0] = u00
    nodes[..., 0, 1] = u01
    nodes[..., 1, 0] = u10
    nodes[..., 1, 1] = u11
    weights = np.broadcast_to((ws / 2.0)[None, :, None], u00.shape)
    weights = weights / (n_ang * n_ang)
    nodes = nodes.reshape(-1, 2, 2)
    weights = np.ascontiguousarray(weights.reshape(-1))
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def haar_quadrature(band_limit):
    """Product Euler-angle rule (uniform x Gauss-Legendre x uniform).

    Returns (nodes, weights) with nodes an (Q, 2, 2) array.  The rule
    integrates every matrix coefficient of irreps of dimension <= band_limit
    exactly; weights sum to 1.
    """
    if band_limit < 1:
        raise ValueError("band_limit must be >= 1")
    return _haar_rule(int(band_limit))


def euler_grid(n):
    """(n^3, 2, 2) evaluation grid of Euler-angle products (not a quadrature)."""
    alphas = 2.0 * np.pi * (np.arange(n) + 0.5) / n
    betas = np.pi * (np.arange(n) + 0.5) / n
    gammas = 4.0 * np.pi * (np.arange(n) + 0.5) / n
    ea = np.exp(-0.5j * alphas)[:, None, None]
    eg = np.exp(-0.5j * gammas)[None, None, :]
    cb = np.cos(0.5 * betas)[None, :, None]
    sb = np.sin(0.5 * betas)[None, :, None]
    out = np.empty((n, n, n, 2, 2), dtype=np.complex128)
    out[..., 0, 0] = ea * cb * eg
    out[..., 0, 1] = -ea * sb * np.conj(eg)
    out[..., 1, 0] = np.conj(ea) * sb * eg
    out[..., 1, 1] = np.conj(ea) * cb * np.conj(eg)
    return out.reshape(-1, 2, 2)
