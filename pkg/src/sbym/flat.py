"""Finite-dimensional heat transforms on R^d and their Gaussian measures.

The transform is heat evolution for time hbar followed by analytic
continuation; it is evaluated in closed form on two families where the heat
semigroup acts exactly:

* exponentials  prefactor * exp(a.x)  (evolution multiplies the prefactor by
  exp(hbar |a|^2 / 2)), and
* polynomials  (evolution is the finite sum  sum_k (hbar/2)^k Lap^k / k!).

Measures (all products of independent 1D Gaussians in suitable coordinates):

* ``P_s``      on R^d: density (2 pi s)^{-d/2} exp(-x^2 / 2s);
* ``M_{s,h}``  on C^d: density (pi h)^{-d/2} (pi r)^{-d/2}
               exp(-x^2/r) exp(-p^2/h) with r = 2s - h, z = x + ip;
* ``nu_h``     on C^d: (pi h)^{-d/2} exp(-p^2/h) times Lebesgue in x
               (an infinite measure; norms against it exist only for
               functions decaying in the real directions).

Monte Carlo paths use the package-wide counter-based substreams, so every
estimate is bit-reproducible for a given seed.
"""

import dataclasses
import math

import numpy as np

from .errors import InvalidParams, NonIntegrableError
from .report import CheckRow, VerificationReport
from .rng import mc_mean


@dataclasses.dataclass(frozen=True)
class MeasureParams:
    """Dimension and the (s, hbar) pair; requires s > hbar/2 so r > 0."""

    d: int
    s: float
    hbar: float

    def __post_init__(self):
        if self.d < 1:
            raise InvalidParams("dimension must be >= 1")
        if self.hbar <= 0:
            raise InvalidParams("hbar must be positive")
        if not self.s > self.hbar / 2:
            raise InvalidParams("need s > hbar/2")

    @property
    def r(self):
        return 2.0 * self.s - self.hbar


@dataclasses.dataclass(frozen=True, eq=False)
class ExponentialFunction:
    """f(x) = prefactor * exp(a . x) with a real; entire on C^d."""

    a: np.ndarray
    prefactor: complex = 1.0

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64).reshape(-1)
        a.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "prefactor", complex(self.prefactor))

    @property
    def d(self):
        return self.a.shape[0]

    def __call__(self, x):
        x = np.asarray(x)
        return self.prefactor * np.exp(x @ self.a)

    def heat_evolved(self, hbar):
        scale = math.exp(hbar * float(self.a @ self.a) / 2.0)
        return ExponentialFunction(self.a, self.prefactor * scale)

    def shifted_rotated(self, rot, shift):
        """The member representing x -> f(rot @ x + shift); stays in-family."""
        rot = np.asarray(rot, dtype=np.float64)
        shift = np.asarray(shift, dtype=np.float64)
        pref = self.prefactor * np.exp(self.a @ shift)
        return ExponentialFunction(rot.T @ self.a, pref)


@dataclasses.dataclass(frozen=True, eq=False)
class PolynomialFunction:
    """Finitely supported multi-index coefficient table over d variables."""

    coeffs: dict
    d: int

    def __post_init__(self):
        clean = {}
        for key, v in self.coeffs.items():
            key = tuple(int(k) for k in key)
            if len(key) != self.d or any(k < 0 for k in key):
                raise ValueError(f"bad multi-index {key}")
            v = complex(v)
            if v != 0:
                clean[key] = v
        object.__setattr__(self, "coeffs", clean)

    @property
    def degree(self):
        return max((sum(k) for k in self.coeffs), default=0)

    def __call__(self, x):
        x = np.asarray(x)
        out = np.zeros(x.shape[:-1], dtype=np.complex128)
        for key, v in self.coeffs.items():
            term = np.full(x.shape[:-1], v, dtype=np.complex128)
            for i, k in enumerate(key):
                if k:
                    term = term * x[..., i] ** k
            out = out + term
        return out

    def laplacian(self):
        out = {}
        for key, v in self.coeffs.items():
            for i, k in enumerate(key):
                if k >= 2:
                    down = list(key)
                    down[i] -= 2
                    down = tuple(down)
                    out[down] = out.get(down, 0.0) + v * k * (k - 1)
        return PolynomialFunction(out, self.d)

    def heat_evolved(self, hbar):
        total = dict(self.coeffs)
        term = self
        factor = 1.0
        for k in range(1, self.degree // 2 + 1):
            term = term.laplacian()
            factor *= hbar / (2.0 * k)
            for key, v in term.coeffs.items():
                total[key] = total.get(key, 0.0) + factor * v
        return PolynomialFunction(total, self.d)


def heat_evolved(f, hbar):
    """Exact heat evolution exp(hbar Lap / 2) within a closed-form family."""
    if hbar < 0:
        raise InvalidParams("hbar must be >= 0")
    return f.heat_evolved(hbar)


def c_transform(f, hbar, z):
    """Gaussian-convolution transform at z: heat evolution then continuation."""
    return complex(heat_evolved(f, hbar)(np.asarray(z, dtype=np.complex128)))


def s_transform(f, params, z):
    """Two-parameter transform; the evolution rule is independent of s."""
    return c_transform(f, params.hbar, z)


# ---------------------------------------------------------------------------
# closed-form Gaussian moments
# ---------------------------------------------------------------------------

def _even_moment(k, var):
    # E[x^k] for x ~ N(0, var): (k-1)!! var^{k/2} for even k, else 0
    if k % 2:
        return 0.0
    out = 1.0
    for m in range(k - 1, 0, -2):
        out *= m
    return out * var ** (k // 2)


def _poly_mean_sq(poly, variances):
    """E[|poly|^2] under independent centered Gaussians with given variances."""
    total = 0.0
    for ka, va in poly.coeffs.items():
        for kb, vb in poly.coeffs.items():
            prod = va * np.conj(vb)
            for i, var in enumerate(variances):
                prod *= _even_moment(ka[i] + kb[i], var)
                if prod == 0:
                    break
            total += prod
    return float(np.real(total))


def _poly_on_xy(poly):
    """Rewrite poly(z) with z = x + ip as a table over 2d real variables."""
    d = poly.d
    out = {}
    for key, v in poly.coeffs.items():
        table = {(0,) * (2 * d): v}
        for i, k in enumerate(key):
            if k == 0:
                continue
            step = {}
            for j in range(k + 1):
                coeff = math.comb(k, j) * (1j) ** (k - j)
                step[(i, j, k - j)] = coeff
            expand = {}
            for mono, c0 in table.items():
                for (i2, jx, jp), c1 in step.items():
                    m = list(mono)
                    m[i2] += jx
                    m[d + i2] += jp
                    m = tuple(m)
                    expand[m] = expand.get(m, 0.0) + c0 * c1
            table = expand
        for mono, c in table.items():
            out[mono] = out.get(mono, 0.0) + c
    return PolynomialFunction(out, 2 * d)


@dataclasses.dataclass(frozen=True)
class NormEstimate:
    """A squared norm with its standard error (0 for closed forms)."""

    value: float
    stderr: float
    method: str


def _mc_mean(fn, samples, seed, stream):
    """Deterministic Monte Carlo mean of a real-valued batch fn."""
    mean, stderr = mc_mean(fn, samples, seed, stream=stream)
    return mean.real, stderr


def norm_sq_Ps(f, params, samples=100_000, seed=0):
    """Squared L2 norm under P_s; closed form on families, MC on callables."""
    if isinstance(f, ExponentialFunction):
        value = abs(f.prefactor) ** 2 * math.exp(2.0 * params.s * float(f.a @ f.a))
        return NormEstimate(value, 0.0, "closed-form")
    if isinstance(f, PolynomialFunction):
        value = _poly_mean_sq(f, [params.s] * params.d)
        return NormEstimate(value, 0.0, "closed-form")
    sd = math.sqrt(params.s)

    def batch(rng, m):
        x = rng.normal(0.0, sd, size=(m, params.d))
        return np.abs(f(x)) ** 2

    mean, stderr = _mc_mean(batch, samples, seed, 0)
    return NormEstimate(mean, stderr, "monte-carlo")


def norm_sq_Msh(F, params, samples=100_000, seed=0):
    """Squared norm under M_{s, hbar} of a holomorphic function on C^d."""
    if isinstance(F, ExponentialFunction):
        value = abs(F.prefactor) ** 2 * math.exp(params.r * float(F.a @ F.a))
        return NormEstimate(value, 0.0, "closed-form")
    if isinstance(F, PolynomialFunction):
        xy = _poly_on_xy(F)
        variances = [params.r / 2.0] * params.d + [params.hbar / 2.0] * params.d
        return NormEstimate(_poly_mean_sq(xy, variances), 0.0, "closed-form")
    sx = math.sqrt(params.r / 2.0)
    sp = math.sqrt(params.hbar / 2.0)

    def batch(rng, m):
        x = rng.normal(0.0, sx, size=(m, params.d))
        p = rng.normal(0.0, sp, size=(m, params.d))
        return np.abs(F(x + 1j * p)) ** 2

    mean, stderr = _mc_mean(batch, samples, seed, 1)
    return NormEstimate(mean, stderr, "monte-carlo")


def norm_sq_nu(F, hbar, d, proposal_std=2.0, samples=100_000, seed=0):
    """Squared norm under nu_hbar (flat in x, Gaussian in p).

    The measure is infinite in the real directions, so the closed-form
    families are never integrable and raise NonIntegrableError; callables are
    integrated by importance sampling of the x directions against a centered
    normal proposal of width ``proposal_std``.
    """
    if isinstance(F, (ExponentialFunction, PolynomialFunction)):
        raise NonIntegrableError(
            "exp/polynomial families do not decay in the real directions; "
            "nu-norms exist only for decaying evaluators")
    sp = math.sqrt(hbar / 2.0)
    log_norm = 0.5 * d * math.log(2.0 * math.pi * proposal_std ** 2)

    def batch(rng, m):
        x = rng.normal(0.0, proposal_std, size=(m, d))
        p = rng.normal(0.0, sp, size=(m, d))
        logw = log_norm + np.sum(x * x, axis=-1) / (2.0 * proposal_std ** 2)
        return np.abs(F(x + 1j * p)) ** 2 * np.exp(logw)

    mean, stderr = _mc_mean(batch, samples, seed, 2)
    return NormEstimate(mean, stderr, "monte-carlo-importance")


def pairing_Ps(f, g, params):
    """Closed-form <f, g> under P_s for two exponentials."""
    a, b = f.a, g.a
    pref = f.prefactor * np.conj(g.prefactor)
    return complex(pref * math.exp(params.s * float((a + b) @ (a + b)) / 2.0))


def pairing_Msh(F, G, params):
    """Closed-form <F, G> under M_{s, hbar} for two exponential images."""
    a, b = F.a, G.a
    pref = F.prefactor * np.conj(G.prefactor)
    plus = float((a + b) @ (a + b))
    minus = float((a - b) @ (a - b))
    return complex(pref * math.exp(params.r * plus / 4.0 - params.hbar * minus / 4.0))


# ---------------------------------------------------------------------------
# measure densities (used by the large-s rescaling checks)
# ---------------------------------------------------------------------------

def density_Ps(x, params):
    x = np.asarray(x, dtype=np.float64)
    q = np.sum(x * x, axis=-1)
    return (2.0 * math.pi * params.s) ** (-params.d / 2.0) * np.exp(-q / (2.0 * params.s))


def density_Msh(z, params):
    z = np.asarray(z, dtype=np.complex128)
    qx = np.sum(z.real ** 2, axis=-1)
    qp = np.sum(z.imag ** 2, axis=-1)
    norm = (math.pi * params.hbar) ** (-params.d / 2.0) * (math.pi * params.r) ** (-params.d / 2.0)
    return norm * np.exp(-qx / params.r - qp / params.hbar)


def density_nu(z, hbar, d):
    z = np.asarray(z, dtype=np.complex128)
    qp = np.sum(z.imag ** 2, axis=-1)
    return (math.pi * hbar) ** (-d / 2.0) * np.exp(-qp / hbar)


# ---------------------------------------------------------------------------
# Bargmann-convention conversion (hbar = 1)
# ---------------------------------------------------------------------------

def to_bargmann(f, w):
    """Value of the Bargmann-convention transform A f at w, from C_1 f."""
    w = np.asarray(w, dtype=np.complex128)
    d = w.shape[-1] if w.ndim else 1
    w2 = np.sum(w * w, axis=-1)
    return complex((4.0 * math.pi) ** (d / 4.0) * np.exp(w2 / 2.0)
                   * c_transform(f, 1.0, math.sqrt(2.0) * w))


def from_bargmann(af, z):
    """Value of C_1 f at z given the Bargmann-convention transform A f."""
    z = np.asarray(z, dtype=np.complex128)
    d = z.shape[-1] if z.ndim else 1
    z2 = np.sum(z * z, axis=-1)
    return complex((4.0 * math.pi) ** (-d / 4.0) * np.exp(-z2 / 4.0)
                   * af(z / math.sqrt(2.0)))


# ---------------------------------------------------------------------------
# Monte Carlo unitarity check
# ---------------------------------------------------------------------------

def mc_isometry_check(f, params, samples, seed, inner=32, name="f"):
    """Monte Carlo comparison of |f| under P_s with |transform f| under M.

    ``f`` must be vectorized and defined at complex arguments (entire), since
    the transform side is estimated as a Gaussian smoothing
    E[f(z + sqrt(hbar) xi)].  Each complex sample uses two independent inner
    batches so the squared-modulus estimator is unbiased.
    """
    sd = math.sqrt(params.s)
    sx = math.sqrt(params.r / 2.0)
    sp = math.sqrt(params.hbar / 2.0)
    sh = math.sqrt(params.hbar)

    def p_side(rng, m):
        x = rng.normal(0.0, sd, size=(m, params.d))
        return np.abs(f(x)) ** 2

    def m_side(rng, m):
        x = rng.normal(0.0, sx, size=(m, params.d))
        p = rng.normal(0.0, sp, size=(m, params.d))
        z = x + 1j * p
        xi1 = rng.normal(0.0, sh, size=(inner, m, params.d))
        xi2 = rng.normal(0.0, sh, size=(inner, m, params.d))
        est1 = np.mean(f(z[None] + xi1), axis=0)
        est2 = np.mean(f(z[None] + xi2), axis=0)
        return np.real(est1 * np.conj(est2))

    mean_p, se_p = _mc_mean(p_side, samples, seed, 0)
    mean_m, se_m = _mc_mean(m_side, samples, seed, 1)
    denom = math.hypot(se_p, se_m)
    diff = mean_p - mean_m
    z_score = 0.0 if (denom == 0.0 and diff == 0.0) else diff / max(denom, 1e-300)
    row = CheckRow(
        name=f"isometry[{name}]", estimate=mean_m, target=mean_p,
        error=denom, z_or_resid=z_score, passed=abs(z_score) < 4.0, kind="z")
    return VerificationReport(
        experiment="flat-isometry",
        inputs={"d": params.d, "s": params.s, "hbar": params.hbar,
                "samples": samples, "inner": inner, "name": name},
        seed=seed, checks=[row])
