"""Harmonic analysis on SU(2): holomorphic irreps, characters, Casimir
eigenvalues, band-limited functions, and the heat kernel with certified
truncation.

An irrep is labeled by its dimension ``n`` (spin (n-1)/2).  It is realized on
homogeneous polynomials of degree n-1 in two variables with the substitution
action ``(pi(g) p)(z) = p(z g)`` for a row vector z, in the orthonormal
monomial basis ``u^{n-1-k} v^k / sqrt((n-1-k)! k!)``.  This action is
polynomial (hence entire) in the matrix entries of g, multiplicative, and
unitary on SU(2); characters are evaluated through the trace recurrence
``chi_{n+1} = tr(g) chi_n - chi_{n-1}``, which is likewise polynomial in
tr(g) and therefore safe to use anywhere on SL(2,C).

The heat kernel at time t is the character series

    rho_t(g) = sum_{n >= 1} n exp(-t c(n)/2) chi_n(g),

where c(n) is the Casimir eigenvalue of -Laplacian on irrep n under the
inner product <X,Y> = -2 tr(XY).  Under that convention c(n) = (n^2-1)/4;
the value is *computed* from the generator action (``casimir``) and the
closed form is only used for tail bounds, where it is needed for n beyond
any computed cutoff.  For g = x exp(iY) the character bound
|chi_n(g)| <= n exp((n-1)|Y|/2) certifies the truncation error.
"""

import dataclasses
import math
from functools import lru_cache

import numpy as np

from . import su2
from .errors import TruncationError

MAX_CUTOFF = 4096


# ---------------------------------------------------------------------------
# irreps and characters
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _irrep_terms(n):
    """Expansion data for the dimension-n irrep matrix.

    Returns a list of rows ((k, l), [(coeff, pa, pc, pb, pd), ...]) meaning
    pi(g)[k, l] = sum coeff * a^pa * c^pc * b^pb * d^pd  for g = [[a, b], [c, d]].
    """
    deg = n - 1
    w = [math.factorial(k) * math.factorial(deg - k) for k in range(n)]
    rows = []
    for k in range(n):
        for l in range(n):
            terms = []
            norm = math.sqrt(w[k] / w[l])
            for j in range(max(0, k - (deg - l)), min(l, k) + 1):
                coeff = (math.comb(deg - l, k - j) * math.comb(l, j)) * norm
                terms.append((float(coeff), deg - l - (k - j), k - j, l - j, j))
            rows.append(((k, l), terms))
    return rows


def _as_matrix(g):
    if isinstance(g, (su2.GroupElement, su2.ComplexGroupElement)):
        return g.matrix
    return np.asarray(g, dtype=np.complex128)


def irrep_matrix_batch(n, mats):
    """(M, n, n) irrep matrices for a batch of 2x2 matrices (M, 2, 2)."""
    mats = np.asarray(mats, dtype=np.complex128)
    a, b = mats[:, 0, 0], mats[:, 0, 1]
    c, d = mats[:, 1, 0], mats[:, 1, 1]
    deg = n - 1
    pow_a = np.array([a ** p for p in range(deg + 1)])
    pow_b = np.array([b ** p for p in range(deg + 1)])
    pow_c = np.array([c ** p for p in range(deg + 1)])
    pow_d = np.array([d ** p for p in range(deg + 1)])
    out = np.zeros((mats.shape[0], n, n), dtype=np.complex128)
    for (k, l), terms in _irrep_terms(n):
        acc = 0.0
        for coeff, ea, ec, eb, ed in terms:
            acc = acc + coeff * pow_a[ea] * pow_c[ec] * pow_b[eb] * pow_d[ed]
        out[:, k, l] = acc
    return out


def irrep_matrix(n, g):
    """The n x n irrep matrix at g (entire in the entries of g)."""
    if n < 1:
        raise ValueError("irrep dimension must be >= 1")
    mat = _as_matrix(g)
    return irrep_matrix_batch(n, mat[None])[0]


def character_batch(n, traces):
    """chi_n for a batch given traces tr(g); Chebyshev-type recurrence."""
    traces = np.asarray(traces)
    prev = np.zeros_like(traces)
    cur = np.ones_like(traces)
    for _ in range(n - 1):
        prev, cur = cur, traces * cur - prev
    return cur


def character(n, g):
    """chi_n(g) = tr pi_n(g); a class function, entire on SL(2,C)."""
    if n < 1:
        raise ValueError("irrep dimension must be >= 1")
    mat = _as_matrix(g)
    tau = mat[0, 0] + mat[1, 1]
    val = character_batch(n, np.array([tau]))[0]
    if isinstance(g, su2.GroupElement):
        return complex(val).real
    return complex(val)


# ---------------------------------------------------------------------------
# Casimir
# ---------------------------------------------------------------------------

def _generator_matrix(n, xmat):
    """d/dt pi_n(exp(t X)) at t=0, from the substitution action on monomials."""
    deg = n - 1
    w = [math.factorial(k) * math.factorial(deg - k) for k in range(n)]
    out = np.zeros((n, n), dtype=np.complex128)
    for l in range(n):
        p, q = deg - l, l
        out[l, l] += p * xmat[0, 0] + q * xmat[1, 1]
        if l + 1 < n:
            out[l + 1, l] += p * xmat[1, 0] * math.sqrt(w[l + 1] / w[l])
        if l - 1 >= 0:
            out[l - 1, l] += q * xmat[0, 1] * math.sqrt(w[l - 1] / w[l])
    return out


@lru_cache(maxsize=512)
def casimir(n):
    """Eigenvalue c(n) of -Laplacian on the dimension-n irrep.

    Computed once from the orthonormal generator actions: the operator
    sum_a dpi(e_a)^2 is checked to be scalar and equal to -c(n) I.
    """
    if n < 1:
        raise ValueError("irrep dimension must be >= 1")
    total = np.zeros((n, n), dtype=np.complex128)
    for a in range(3):
        gen = _generator_matrix(n, su2.BASIS[a])
        total += gen @ gen
    value = -total[0, 0].real + 0.0  # +0.0 normalizes -0.0
    if np.max(np.abs(total + value * np.eye(n))) > 1e-9 * max(1.0, value):
        raise AssertionError("Casimir action is not scalar; generator bug")
    return float(value)


def _casimir_closed(n):
    # (n^2 - 1) / 4 under the scale-2 inner product; used only inside tail
    # bounds where n exceeds any computed cutoff.  Locked to casimir() by test.
    return (n * n - 1) / 4.0


# ---------------------------------------------------------------------------
# band-limited functions
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class BandLimitedFunction:
    """Function on SU(2) with finitely many Peter-Weyl coefficients.

    ``coeffs`` maps (n, row, col) to the coefficient of the orthonormal
    function sqrt(n) pi^n_{row,col}.  The same table defines the holomorphic
    continuation to SL(2,C), since each matrix coefficient is a polynomial
    in the entries.
    """

    coeffs: dict

    def __post_init__(self):
        clean = {}
        for (n, i, j), v in self.coeffs.items():
            if not (1 <= n and 0 <= i < n and 0 <= j < n):
                raise ValueError(f"bad coefficient index {(n, i, j)}")
            v = complex(v)
            if v != 0:
                clean[(int(n), int(i), int(j))] = v
        object.__setattr__(self, "coeffs", clean)

    @property
    def cutoff(self):
        return max((n for (n, _, _) in self.coeffs), default=1)

    @classmethod
    def constant(cls, value=1.0):
        return cls({(1, 0, 0): value})

    @classmethod
    def character_fn(cls, n):
        return cls({(n, i, i): 1.0 / math.sqrt(n) for i in range(n)})

    @classmethod
    def matrix_unit(cls, n, row, col, value=1.0):
        return cls({(n, row, col): value})

    def _by_irrep(self):
        table = {}
        for (n, i, j), v in self.coeffs.items():
            table.setdefault(n, np.zeros((n, n), dtype=np.complex128))[i, j] = v
        return table

    def evaluate_batch(self, mats):
        mats = np.asarray(mats, dtype=np.complex128)
        out = np.zeros(mats.shape[0], dtype=np.complex128)
        char_terms = {}
        for n, cmat in self._by_irrep().items():
            # scalar multiples of characters ride one shared trace recurrence
            diag = np.diag(np.full(n, cmat[0, 0]))
            if n > 1 and np.array_equal(cmat, diag):
                char_terms[n] = math.sqrt(n) * cmat[0, 0]
                continue
            pi = irrep_matrix_batch(n, mats)
            out += math.sqrt(n) * np.einsum("mij,ij->m", pi, cmat)
        if char_terms:
            traces = mats[:, 0, 0] + mats[:, 1, 1]
            prev = np.zeros_like(traces)
            cur = np.ones_like(traces)
            top = max(char_terms)
            for n in range(2, top + 1):
                prev, cur = cur, traces * cur - prev
                coeff = char_terms.get(n)
                if coeff is not None:
                    out = out + coeff * cur
        return out

    def evaluate(self, g):
        mat = _as_matrix(g)
        return complex(self.evaluate_batch(mat[None])[0])

    def heat_evolved(self, t):
        if t < 0:
            raise ValueError("heat time must be >= 0")
        return BandLimitedFunction({
            key: v * math.exp(-t * casimir(key[0]) / 2.0)
            for key, v in self.coeffs.items()
        })

    def norm_sq(self):
        """L2(Haar) norm squared = coefficient-table norm squared (Parseval)."""
        return float(sum(abs(v) ** 2 for v in self.coeffs.values()))

    def __add__(self, other):
        out = dict(self.coeffs)
        for key, v in other.coeffs.items():
            out[key] = out.get(key, 0.0) + v
        return BandLimitedFunction(out)

    def __rmul__(self, scalar):
        return BandLimitedFunction({k: scalar * v for k, v in self.coeffs.items()})


def heat_semigroup(phi, t):
    """exp(t Laplacian / 2) phi: multiplies each level-n coefficient."""
    return phi.heat_evolved(t)


def evaluate(phi, g):
    """Evaluate phi (or its holomorphic continuation) at g."""
    return phi.evaluate(g)


def haar_inner_product(phi, psi):
    """Exact integral of phi * conj(psi) over Haar measure (Parseval)."""
    out = 0.0
    for key, v in phi.coeffs.items():
        w = psi.coeffs.get(key)
        if w is not None:
            out += v * np.conj(w)
    return complex(out)


# ---------------------------------------------------------------------------
# heat kernel
# ---------------------------------------------------------------------------

def tail_bound(t, cutoff, im_norm=0.0):
    """Certified bound on the dropped part of the heat-kernel series.

    Bounds sum_{n > cutoff} n^2 exp(-t c(n)/2) exp((n-1) |Y|/2) using
    |chi_n(x exp(iY))| <= n exp((n-1)|Y|/2); the terms decay like a Gaussian
    in n, so the numerical sum below is summed to exhaustion and padded with
    twice its last term.
    """
    if t <= 0:
        raise ValueError("heat time must be > 0")
    b = 0.5 * float(im_norm)
    total = 0.0
    n = cutoff + 1
    while n < 10 * MAX_CUTOFF:
        log_term = 2.0 * math.log(n) - t * _casimir_closed(n) / 2.0 + (n - 1) * b
        term = math.exp(min(log_term, 700.0))
        total += term
        # past the peak the ratio of consecutive terms is < exp(-t(2n+1)/8)
        if t * (2 * n + 1) / 8.0 > b + math.log(2.0) and term < 1e-300 + 1e-18 * total:
            return total + 2.0 * term
        n += 1
    raise TruncationError("heat-kernel tail bound did not converge", bound=total)


def auto_cutoff(t, im_norm=0.0, tol=1e-10):
    """Smallest cutoff whose certified tail bound is below tol."""
    cutoff = 2
    while cutoff <= MAX_CUTOFF:
        if tail_bound(t, cutoff, im_norm) <= tol:
            while cutoff > 2 and tail_bound(t, cutoff - 1, im_norm) <= tol:
                cutoff -= 1
            return cutoff
        cutoff = max(cutoff + 1, int(cutoff * 1.5))
    raise TruncationError(
        f"no cutoff below {MAX_CUTOFF} certifies tolerance {tol} "
        f"at t={t}, |Y|={im_norm}", tolerance=tol)


@dataclasses.dataclass(frozen=True, eq=False)
class HeatKernelSeries:
    """Truncated character expansion of the heat kernel rho_t.

    ``coefficients[n-1] = n exp(-t c(n)/2)``; the n = 1 coefficient is 1
    exactly, which is the statement that rho_t integrates to 1.
    """

    t: float
    cutoff: int
    coefficients: np.ndarray

    @classmethod
    def build(cls, t, cutoff=None, im_norm=0.0, tol=1e-10):
        if t <= 0:
            raise ValueError("heat time must be > 0")
        if cutoff is None:
            cutoff = auto_cutoff(t, im_norm, tol)
        else:
            bound = tail_bound(t, cutoff, im_norm)
            if bound > tol:
                raise TruncationError(
                    f"certified tail {bound:.3e} exceeds tolerance {tol:.3e}",
                    bound=bound, tolerance=tol)
        ns = np.arange(1, cutoff + 1)
        coeffs = ns * np.exp(-t * np.array([casimir(int(n)) for n in ns]) / 2.0)
        coeffs.flags.writeable = False
        return cls(float(t), int(cutoff), coeffs)

    def evaluate_traces(self, traces):
        """Series value for a batch of traces tr(g)."""
        traces = np.asarray(traces)
        prev = np.zeros_like(traces)
        cur = np.ones_like(traces)
        out = self.coefficients[0] * cur
        for n in range(2, self.cutoff + 1):
            prev, cur = cur, traces * cur - prev
            out = out + self.coefficients[n - 1] * cur
        return out

    def evaluate_batch(self, mats):
        mats = np.asarray(mats)
        return self.evaluate_traces(mats[..., 0, 0] + mats[..., 1, 1])

    def evaluate(self, g):
        mat = _as_matrix(g)
        tau = mat[0, 0] + mat[1, 1]
        if isinstance(g, su2.GroupElement) or abs(tau.imag) == 0.0:
            return float(self.evaluate_traces(np.array([tau.real]))[0])
        return complex(self.evaluate_traces(np.array([tau]))[0])

    def as_band_limited(self):
        """rho_t as a BandLimitedFunction (coefficient of sqrt(n) pi_{ii})."""
        coeffs = {}
        for n in range(1, self.cutoff + 1):
            value = self.coefficients[n - 1] / math.sqrt(n)
            for i in range(n):
                coeffs[(n, i, i)] = value
        return BandLimitedFunction(coeffs)


def heat_kernel_gaussian_image(t, traces, images=4):
    """Heat kernel on SU(2) in the Gaussian-image (Poisson-resummed) form.

    With a = t/8 and u = arccos(tr/2) in [0, pi],

        rho_t = e^{t/8} sqrt(pi/a) / (4a sin u)
                * sum_k (u + 2 pi k) exp(-(u + 2 pi k)^2 / 4a).

    Valid on the real group only.  This form is independent of the character
    series and free of its antipodal cancellation, so it resolves the sign of
    the kernel where the series result is below double-precision noise (the
    images decay like exp(-(2 pi k)^2/4a); ``images`` = 4 is far beyond
    double precision for t <= 8).
    """
    if t <= 0:
        raise ValueError("heat time must be > 0")
    a = t / 8.0
    u = np.arccos(np.clip(np.real(np.asarray(traces)) / 2.0, -1.0, 1.0))
    total = np.zeros_like(u)
    dtotal = np.zeros_like(u)  # derivative form for the u -> 0 limit
    for k in range(-images, images + 1):
        shifted = u + 2.0 * np.pi * k
        gauss = np.exp(-shifted * shifted / (4.0 * a))
        total = total + shifted * gauss
        dtotal = dtotal + (1.0 - shifted * shifted / (2.0 * a)) * gauss
    small = u < 1e-6
    ratio = np.where(small, dtotal, total / np.where(small, 1.0, np.sin(u)))
    pref = math.exp(t / 8.0) * math.sqrt(math.pi / a) / (4.0 * a)
    return pref * ratio


def heat_kernel(t, g, cutoff=None, tol=1e-10):
    """rho_t evaluated at g in SU(2) (real, positive) or SL(2,C) (complex).

    The cutoff is chosen so the certified tail at the argument's polar radius
    |Y| is below tol; passing an insufficient explicit cutoff raises
    TruncationError.
    """
    im_norm = 0.0
    if isinstance(g, su2.ComplexGroupElement):
        _, y = su2.polar_decompose(g)
        im_norm = y.norm
    series = HeatKernelSeries.build(t, cutoff, im_norm, tol)
    return series.evaluate(g)


def heat_convolution_quadrature(t, phi, g, tol=1e-10):
    """integral of rho_t(g x^{-1}) phi(x) dx by exact Haar quadrature.

    For g in SU(2) this is the heat evolution of phi at g; for
    g = x exp(iY) it is the holomorphic continuation.  The quadrature rule is
    exact for the truncated integrand, so the only error is the certified
    heat-kernel tail (< tol).
    """
    gmat = _as_matrix(g)
    im_norm = 0.0
    if isinstance(g, su2.ComplexGroupElement):
        _, y = su2.polar_decompose(g)
        im_norm = y.norm
    series = HeatKernelSeries.build(t, None, im_norm, tol)
    band = series.cutoff + phi.cutoff - 1
    nodes, weights = su2.haar_quadrature(band)
    # x^{-1} = conjugate transpose on the unitary nodes
    inv = np.conj(np.swapaxes(nodes, -1, -2))
    prod = np.einsum("ab,qbc->qac", gmat, inv)
    rho_vals = series.evaluate_batch(prod)
    phi_vals = phi.evaluate_batch(nodes)
    return complex(np.sum(weights * rho_vals * phi_vals))


def inner_product_rho_s(phi, psi, s, tol=1e-10):
    """integral of phi conj(psi) rho_s dHaar by exact quadrature.

    ``s = inf`` gives the plain Haar inner product (the weight tends to 1).
    """
    if s != np.inf and s <= 0:
        raise ValueError("s must be positive or inf")
    if s == np.inf:
        band = phi.cutoff + psi.cutoff - 1
        nodes, weights = su2.haar_quadrature(band)
        vals = phi.evaluate_batch(nodes) * np.conj(psi.evaluate_batch(nodes))
        return complex(np.sum(weights * vals))
    series = HeatKernelSeries.build(s, None, 0.0, tol)
    band = phi.cutoff + psi.cutoff + series.cutoff - 2
    nodes, weights = su2.haar_quadrature(band)
    vals = (phi.evaluate_batch(nodes) * np.conj(psi.evaluate_batch(nodes))
            * series.evaluate_batch(nodes))
    return complex(np.sum(weights * vals))
