"""Lattice model of connections on the circle.

A connection is N links, each an algebra vector A_k; the holonomy is the
ordered product of link transporters exp(A_k / N) with earlier links
multiplying on the left, h = U_0 U_1 ... U_{N-1} (the spatial circle is
[0, 1] with ends identified, link k covering [k/N, (k+1)/N]).  Constant
connections have holonomy exp(A) for every N, and splitting every link in
two (``refine``) leaves the holonomy exactly unchanged, which the
convergence studies exploit.

Geometry.  The Riemann-sum norm is |A|^2 = (1/N) sum_k |A_k|^2; the
coordinates y_{k,a} = A_{k,a} / sqrt(N) are orthonormal for it, and the
lattice Laplacian and Gaussian measures below are defined with respect to
them.  The lattice *distance* is taken from the bi-invariant metric on the
link group, d(A,B)^2 = N sum_k dist(exp(A_k/N), exp(B_k/N))^2: it agrees
with |A - B| to O(1/N^2) per link and is exactly invariant under the gauge
and path actions (conjugation preserves the bi-invariant metric), which the
flat coordinate distance is not once the transporters stop commuting.

Gauge transforms are site fields g_0 ... g_N on the subdivided circle acting
on links by U_k -> g_k U_k g_{k+1}^{-1} (equivalently A_k -> N log(...)),
which telescopes to h -> g_0 h g_N^{-1} and reproduces the continuum action
Ad_g A - (dg/dtau) g^{-1} to first order in 1/N.  Based loops
(g_0 = g_N = e) preserve the holonomy exactly; a path with free endpoint
w = g_N changes it to h w^{-1}, the inverse endpoint acting on the right
under this ordering convention.

Gaussian measures (derivation in docs/lattice_measures.md): in orthonormal
coordinates the density exp(-|A|^2 / 2s) means y_{k,a} ~ N(0, s), i.e. link
coordinates of variance s N; the link increments A_k / N then carry variance
s / N each, so the holonomy pushforward converges to the heat kernel at time
s.  The complex measure uses variance r/2 = (2s - hbar)/2 for the real and
hbar/2 for the imaginary orthonormal coordinates.
"""

import csv
import dataclasses
import math

import numpy as np

from . import _kernels, su2
from .errors import CutLocusError, InvalidParams, ShapeMismatch
from .report import CheckRow, VerificationReport
from .rng import mc_mean, substream

IDENTITY2 = np.eye(2, dtype=np.complex128)


# ---------------------------------------------------------------------------
# connections
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class LatticeConnection:
    """N links of algebra coordinates, shape (N, 3) real."""

    links: np.ndarray

    def __post_init__(self):
        arr = np.array(self.links, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 1:
            raise ShapeMismatch("links must have shape (N, 3) with N >= 1")
        arr.flags.writeable = False
        object.__setattr__(self, "links", arr)

    @property
    def n_links(self):
        return self.links.shape[0]

    def norm_sq(self):
        """Riemann-sum norm (1/N) sum_k |A_k|^2."""
        return float(np.sum(self.links ** 2) / self.n_links)

    @property
    def norm(self):
        return math.sqrt(self.norm_sq())

    def refine(self, factor=2):
        """Split every link into ``factor`` equal copies (same holonomy)."""
        return type(self)(np.repeat(self.links, factor, axis=0))

    @classmethod
    def zero(cls, n_links):
        return cls(np.zeros((n_links, 3)))

    @classmethod
    def constant(cls, n_links, vec):
        return cls(np.tile(np.asarray(vec.coords), (n_links, 1)))

    @classmethod
    def from_profile(cls, profile, n_links):
        """Sample a smooth coordinate profile tau -> (3,) at the left ends."""
        return cls(np.array([profile(k / n_links) for k in range(n_links)]))

    def __add__(self, other):
        _same_links(self, other)
        return type(self)(self.links + other.links)

    def __sub__(self, other):
        _same_links(self, other)
        return type(self)(self.links - other.links)

    def __rmul__(self, scalar):
        return type(self)(scalar * self.links)


@dataclasses.dataclass(frozen=True, eq=False)
class ComplexLatticeConnection:
    """N links of complexified algebra coordinates Z = A + iP."""

    links: np.ndarray

    def __post_init__(self):
        arr = np.array(self.links, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 1:
            raise ShapeMismatch("links must have shape (N, 3) with N >= 1")
        arr.flags.writeable = False
        object.__setattr__(self, "links", arr)

    @property
    def n_links(self):
        return self.links.shape[0]

    @property
    def real_part(self):
        return LatticeConnection(self.links.real)

    @property
    def imag_part(self):
        return LatticeConnection(self.links.imag)

    @classmethod
    def from_parts(cls, a, p):
        _same_links(a, p)
        return cls(a.links + 1j * p.links)

    def refine(self, factor=2):
        return type(self)(np.repeat(self.links, factor, axis=0))

    def __add__(self, other):
        _same_links(self, other)
        return type(self)(self.links + other.links)


@dataclasses.dataclass(frozen=True, eq=False)
class ClassicalState:
    """Phase-space point (A, P); the momentum is a connection-valued field."""

    a: LatticeConnection
    p: LatticeConnection

    def __post_init__(self):
        _same_links(self.a, self.p)

    def energy(self):
        return 0.5 * self.p.norm_sq()


def _same_links(x, y):
    if x.n_links != y.n_links:
        raise ShapeMismatch(f"link counts differ: {x.n_links} vs {y.n_links}")


# ---------------------------------------------------------------------------
# holonomy
# ---------------------------------------------------------------------------

def holonomy(conn):
    """Ordered product of exp(A_k / N) around the circle, in SU(2)."""
    mat = _kernels.holonomy_su2(conn.links[None], 1.0 / conn.n_links)[0]
    return su2.GroupElement(mat)


def holonomy_complex(conn):
    """Holonomy of a complexified connection, in SL(2,C)."""
    if isinstance(conn, LatticeConnection):
        conn = ComplexLatticeConnection(conn.links.astype(np.complex128))
    mat = _kernels.holonomy_sl2c(conn.links[None], 1.0 / conn.n_links)[0]
    return su2.ComplexGroupElement(mat)


# ---------------------------------------------------------------------------
# distance
# ---------------------------------------------------------------------------

def _angles(mats):
    """Geodesic distance from the identity for a batch of SU(2) matrices."""
    a0 = 0.5 * (mats[..., 0, 0] + mats[..., 1, 1]).real
    s1 = 0.5 * (mats[..., 0, 1] + mats[..., 1, 0]).imag
    s2 = 0.5 * (mats[..., 0, 1] - mats[..., 1, 0]).real
    s3 = 0.5 * (mats[..., 0, 0] - mats[..., 1, 1]).imag
    s = np.sqrt(s1 * s1 + s2 * s2 + s3 * s3)
    return 2.0 * np.arctan2(s, a0)


def lattice_distance(a, b):
    """Bi-invariant lattice distance (see module docstring)."""
    _same_links(a, b)
    n = a.n_links
    ua = _kernels.exp_su2(a.links / n)
    ub = _kernels.exp_su2(b.links / n)
    rel = np.einsum("kba,kbc->kac", np.conj(ub), ua)  # ub^dagger @ ua
    theta = _angles(rel)
    return math.sqrt(n * float(np.sum(theta ** 2)))


# ---------------------------------------------------------------------------
# gauge and path-group actions
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class LatticeGaugeTransform:
    """Site field g_0 ... g_N on the subdivided circle (shape (N+1, 2, 2)).

    Real transforms have unitary sites; complexified ones only det = 1.
    """

    sites: np.ndarray

    def __post_init__(self):
        arr = np.array(self.sites, dtype=np.complex128)
        if arr.ndim != 3 or arr.shape[1:] != (2, 2) or arr.shape[0] < 2:
            raise ShapeMismatch("sites must have shape (N+1, 2, 2)")
        dets = arr[:, 0, 0] * arr[:, 1, 1] - arr[:, 0, 1] * arr[:, 1, 0]
        if np.max(np.abs(dets - 1.0)) > 1e-9:
            raise ValueError("site determinants differ from 1")
        arr.flags.writeable = False
        object.__setattr__(self, "sites", arr)

    @property
    def n_links(self):
        return self.sites.shape[0] - 1

    @property
    def is_unitary(self):
        uu = np.einsum("kba,kbc->kac", np.conj(self.sites), self.sites)
        return bool(np.max(np.abs(uu - IDENTITY2)) < 1e-9)

    def starts_at_identity(self, tol=1e-12):
        return bool(np.max(np.abs(self.sites[0] - IDENTITY2)) <= tol)

    def is_based(self, tol=1e-12):
        return (self.starts_at_identity(tol)
                and bool(np.max(np.abs(self.sites[-1] - IDENTITY2)) <= tol))

    @property
    def endpoint(self):
        return su2.GroupElement(self.sites[-1])

    @classmethod
    def from_elements(cls, elements):
        return cls(np.array([g.matrix for g in elements]))

    @classmethod
    def based_loop_from_profile(cls, profile, n_links, complexified=False):
        """Sites exp(xi(k/N)) for a coordinate path xi with xi(0) = xi(1) = 0."""
        taus = np.arange(n_links + 1) / n_links
        coords = np.array([profile(t) for t in taus])
        exp = _kernels.exp_sl2c if complexified else _kernels.exp_su2
        return cls(exp(coords))

    @classmethod
    def random_based_loop(cls, n_links, rng, scale=0.5):
        coords = rng.normal(0.0, scale, size=(n_links + 1, 3))
        coords[0] = 0.0
        coords[-1] = 0.0
        return cls(_kernels.exp_su2(coords))

    @classmethod
    def random_path(cls, n_links, rng, scale=0.5):
        coords = rng.normal(0.0, scale, size=(n_links + 1, 3))
        coords[0] = 0.0
        return cls(_kernels.exp_su2(coords))


def _log_su2_batch(mats, tol=1e-12):
    a0 = 0.5 * (mats[..., 0, 0] + mats[..., 1, 1]).real
    a = np.stack([
        0.5 * (mats[..., 0, 1] + mats[..., 1, 0]).imag,
        0.5 * (mats[..., 0, 1] - mats[..., 1, 0]).real,
        0.5 * (mats[..., 0, 0] - mats[..., 1, 1]).imag,
    ], axis=-1)
    s = np.linalg.norm(a, axis=-1)
    theta = 2.0 * np.arctan2(s, a0)
    if np.any(2.0 * np.pi - theta < math.sqrt(tol)):
        raise CutLocusError("a transported link crossed the cut locus")
    factor = np.where(s < 1e-12, 2.0, theta / np.where(s < 1e-12, 1.0, s))
    return -factor[..., None] * a


def _log_sl2c_batch(mats, tol=1e-12):
    tau = 0.5 * (mats[..., 0, 0] + mats[..., 1, 1])
    w = np.arccos(tau.astype(np.complex128))
    if np.any(np.pi - w.real < math.sqrt(tol)):
        raise CutLocusError("a transported link crossed the -I branch edge")
    small = np.abs(w) < 1e-6
    wsafe = np.where(small, 1.0, w)
    k = np.where(small, 0.5 - w * w / 12.0, np.sin(wsafe) / (2.0 * wsafe))
    p = (mats - np.cos(w)[..., None, None] * IDENTITY2) * (1j / k)[..., None, None]
    return np.stack([
        0.5 * (p[..., 0, 1] + p[..., 1, 0]),
        0.5j * (p[..., 0, 1] - p[..., 1, 0]),
        p[..., 0, 0],
    ], axis=-1)


def _transported(transform, conn, exp, log):
    if transform.n_links != conn.n_links:
        raise ShapeMismatch(
            f"transform has {transform.n_links} links, connection {conn.n_links}")
    n = conn.n_links
    u = exp(conn.links / n)
    g = transform.sites
    g_inv = np.conj(np.swapaxes(g, -1, -2)) if transform.is_unitary else \
        np.stack([
            np.stack([g[:, 1, 1], -g[:, 0, 1]], axis=-1),
            np.stack([-g[:, 1, 0], g[:, 0, 0]], axis=-1),
        ], axis=-2)
    moved = np.einsum("kab,kbc,kcd->kad", g[:-1], u, g_inv[1:])
    return type(conn)(n * log(moved))


def gauge_act(transform, conn):
    """Action of a based loop on a connection; preserves holonomy exactly.

    Links transform as U_k -> g_k U_k g_{k+1}^{-1}; for smooth site fields
    the coordinate action reproduces the continuum formula
    Ad_g A - (dg/dtau) g^{-1} to first order in 1/N.
    """
    if not transform.is_based():
        raise ValueError("gauge_act requires a based loop (g_0 = g_N = e); "
                         "use path_group_act for free endpoints")
    return _transported(transform, conn, _kernels.exp_su2, _log_su2_batch)


def path_group_act(transform, conn):
    """Action of a path with g_0 = e and free endpoint w = g_N.

    The holonomy transforms as h -> h w^{-1} (inverse endpoint on the right
    under the earlier-links-on-the-left ordering); locked by test.
    """
    if not transform.starts_at_identity():
        raise ValueError("path_group_act requires g_0 = e")
    return _transported(transform, conn, _kernels.exp_su2, _log_su2_batch)


def gauge_act_complex(transform, conn):
    """Complexified based gauge action on a complexified connection."""
    if not transform.is_based():
        raise ValueError("gauge_act_complex requires a based loop")
    return _transported(transform, conn, _kernels.exp_sl2c, _log_sl2c_batch)


# ---------------------------------------------------------------------------
# Gaussian measures
# ---------------------------------------------------------------------------

def _link_std_ps(n_links, s):
    if s <= 0:
        raise InvalidParams("s must be positive")
    return math.sqrt(s * n_links)


def ps_chunk(rng, count, n_links, s):
    """(count, N, 3) of link coordinates under the lattice P_s."""
    return rng.normal(0.0, _link_std_ps(n_links, s), size=(count, n_links, 3))


def sample_Ps(n_links, s, seed):
    """One draw from the lattice Gaussian P_s (variance s per orthonormal
    coordinate, i.e. s*N per link coordinate)."""
    return LatticeConnection(ps_chunk(substream(seed, 0, 0), 1, n_links, s)[0])


def msh_chunk(rng, count, n_links, s, hbar):
    """(count, N, 3) complex link coordinates under the lattice M_{s, hbar}."""
    if hbar <= 0 or not s > hbar / 2:
        raise InvalidParams("need hbar > 0 and s > hbar/2")
    r = 2.0 * s - hbar
    re = rng.normal(0.0, math.sqrt(r * n_links / 2.0), size=(count, n_links, 3))
    im = rng.normal(0.0, math.sqrt(hbar * n_links / 2.0), size=(count, n_links, 3))
    return re + 1j * im


def sample_Msh(n_links, s, hbar, seed):
    """One draw of Z = A + iP from the lattice M_{s, hbar}."""
    z = msh_chunk(substream(seed, 0, 0), 1, n_links, s, hbar)[0]
    return ComplexLatticeConnection(z)


# ---------------------------------------------------------------------------
# classical dynamics
# ---------------------------------------------------------------------------

def free_flow(state, t):
    """(A, P) -> (A + tP, P); energy 0.5 |P|^2 is conserved exactly."""
    return ClassicalState(state.a + float(t) * state.p, state.p)


# ---------------------------------------------------------------------------
# cylinder functions, Laplacian, heat evolution
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class CylinderFunction:
    """phi composed with the (complexified) holonomy, with fast batch paths."""

    phi: object  # BandLimitedFunction
    n_links: int

    def evaluate_coords_batch(self, coords):
        """Values for a stack (M, N, 3) of real or complex link coordinates."""
        coords = np.asarray(coords)
        scale = 1.0 / self.n_links
        if np.iscomplexobj(coords):
            mats = _kernels.holonomy_sl2c(coords, scale)
        else:
            mats = _kernels.holonomy_su2(coords, scale)
        return self.phi.evaluate_batch(mats)

    def __call__(self, conn):
        return complex(self.evaluate_coords_batch(conn.links[None])[0])


def lattice_laplacian(f, conn, step=1e-3):
    """Central-difference Laplacian over all 3N orthonormal coordinates.

    ``f`` is a function of the connection; CylinderFunction inputs take a
    vectorized path.  The orthonormal step translates to sqrt(N)*step on the
    link coordinates.
    """
    n = conn.n_links
    h_link = step * math.sqrt(n)
    base = conn.links
    dim = 3 * n
    stack = np.broadcast_to(base, (2 * dim + 1, n, 3)).copy()
    for idx in range(dim):
        k, a = divmod(idx, 3)
        stack[1 + 2 * idx, k, a] += h_link
        stack[2 + 2 * idx, k, a] -= h_link
    if isinstance(f, CylinderFunction):
        vals = f.evaluate_coords_batch(stack)
    else:
        vals = np.array([complex(f(LatticeConnection(c))) for c in stack])
    center = vals[0]
    plus = vals[1::2]
    minus = vals[2::2]
    total = np.sum(plus + minus - 2.0 * center)
    return float(np.real(total)) / step ** 2


def heat_evolve_mc(f, z, hbar, samples, seed, antithetic=False, threads=1,
                   stream=0):
    """Monte Carlo heat evolution followed by continuation, at Z.

    Averages f over real Gaussian shifts of per-orthonormal-coordinate
    variance hbar (per-link variance hbar*N); for cylinder functions of the
    complexified holonomy this realizes the transform at desk scale.
    Returns (mean, stderr).
    """
    if hbar <= 0:
        raise InvalidParams("hbar must be positive")
    n = z.n_links
    sd = math.sqrt(hbar * n)
    base = z.links[None]

    def batch(rng, m):
        w = rng.normal(0.0, sd, size=(m, n, 3))
        vals = f.evaluate_coords_batch(base + w)
        if antithetic:
            vals = 0.5 * (vals + f.evaluate_coords_batch(base - w))
        return vals

    return mc_mean(batch, samples, seed, stream=stream, threads=threads)


# ---------------------------------------------------------------------------
# quotient-Laplacian demonstration
# ---------------------------------------------------------------------------

def submersion_demo(f, r0, step=1e-4, label="f", tol=1e-6):
    """Compare three computations of the radial Laplacian at radius r0:

    (i)   the 2D Laplacian of f(sqrt(x^2+y^2)) by central differences,
    (ii)  the radial form f'' + f'/r,
    (iii) f'' plus the orbit-volume correction (d/dr log(2 pi r)) f'.

    All three must agree: the first-order term is exactly the gradient of the
    log orbit volume, which is why the quotient Laplacian differs from the
    ambient one unless orbit volumes are constant.
    """
    if r0 <= 0:
        raise InvalidParams("r0 must be positive")
    h = step

    def radial(x, y):
        return f(math.hypot(x, y))

    lap2d = (radial(r0 + h, 0.0) + radial(r0 - h, 0.0)
             + radial(r0, h) + radial(r0, -h) - 4.0 * radial(r0, 0.0)) / h ** 2
    d1 = (f(r0 + h) - f(r0 - h)) / (2.0 * h)
    d2 = (f(r0 + h) + f(r0 - h) - 2.0 * f(r0)) / h ** 2
    radial_form = d2 + d1 / r0
    dlogvol = (math.log(2.0 * math.pi * (r0 + h))
               - math.log(2.0 * math.pi * (r0 - h))) / (2.0 * h)
    corrected = d2 + dlogvol * d1

    checks = [
        CheckRow(name=f"{label}: 2d-vs-radial", estimate=lap2d,
                 target=radial_form, error=tol,
                 z_or_resid=abs(lap2d - radial_form),
                 passed=abs(lap2d - radial_form) < tol, kind="abs"),
        CheckRow(name=f"{label}: 2d-vs-volume-corrected", estimate=lap2d,
                 target=corrected, error=tol,
                 z_or_resid=abs(lap2d - corrected),
                 passed=abs(lap2d - corrected) < tol, kind="abs"),
        CheckRow(name=f"{label}: radial-vs-volume-corrected",
                 estimate=radial_form, target=corrected, error=tol,
                 z_or_resid=abs(radial_form - corrected),
                 passed=abs(radial_form - corrected) < tol, kind="abs"),
    ]
    return VerificationReport(
        experiment="submersion-demo",
        inputs={"r0": r0, "step": step, "profile": label},
        seed=0, checks=checks)


# ---------------------------------------------------------------------------
# ensemble export
# ---------------------------------------------------------------------------

def export_ensemble_csv(path, coords, holonomies, seed):
    """Write one row per sample: seed index, link coordinates, holonomy.

    ``coords`` is (M, N, 3) (real or complex) and ``holonomies`` (M, 2, 2).
    """
    coords = np.asarray(coords)
    holonomies = np.asarray(holonomies)
    m, n, _ = coords.shape
    is_complex = np.iscomplexobj(coords)
    header = ["seed", "sample"]
    for k in range(n):
        for a in range(1, 4):
            if is_complex:
                header += [f"a{k}_{a}_re", f"a{k}_{a}_im"]
            else:
                header += [f"a{k}_{a}"]
    for i in range(2):
        for j in range(2):
            header += [f"h{i}{j}_re", f"h{i}{j}_im"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for idx in range(m):
            row = [seed, idx]
            for k in range(n):
                for a in range(3):
                    v = coords[idx, k, a]
                    if is_complex:
                        row += [repr(float(v.real)), repr(float(v.imag))]
                    else:
                        row += [repr(float(v))]
            for i in range(2):
                for j in range(2):
                    h = holonomies[idx, i, j]
                    row += [repr(float(h.real)), repr(float(h.imag))]
            writer.writerow(row)
    return path
