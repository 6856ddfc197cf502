import numpy as np
import pytest
import scipy.linalg

from sbym import su2
from sbym.errors import CutLocusError

RNG = np.random.default_rng(20240811)


def random_algebra(rng, scale=1.0):
    return su2.AlgebraVector(rng.normal(0.0, scale, size=3))


class TestAlgebra:
    def test_basis_orthonormal(self):
        # <e_a, e_b> = -2 tr(e_a e_b) must be the identity matrix
        gram = np.array([[-2.0 * np.trace(su2.BASIS[a] @ su2.BASIS[b]).real
                          for b in range(3)] for a in range(3)])
        assert np.allclose(gram, np.eye(3), atol=1e-15)

    def test_matrix_traceless_skew(self):
        x = random_algebra(RNG)
        m = x.matrix
        assert abs(np.trace(m)) < 1e-15
        assert np.max(np.abs(m + m.conj().T)) < 1e-15

    def test_norm_matches_coords(self):
        x = random_algebra(RNG, 2.0)
        assert x.norm == pytest.approx(np.linalg.norm(x.coords))

    def test_from_matrix_roundtrip(self):
        x = random_algebra(RNG)
        assert np.allclose(su2.AlgebraVector.from_matrix(x.matrix).coords, x.coords)

    def test_complex_parts(self):
        z = su2.ComplexAlgebraVector(RNG.normal(size=3) + 1j * RNG.normal(size=3))
        assert np.max(np.abs(z.matrix.trace())) < 1e-15
        re, im = z.real_part, z.imag_part
        assert np.allclose(re.coords + 1j * im.coords, z.coords)


class TestExpLog:
    def test_exp_identity(self):
        assert np.allclose(su2.exp_group(su2.AlgebraVector([0, 0, 0])).matrix,
                           np.eye(2))

    def test_exp_double_cover(self):
        # rotation by 2*pi lands on -I, by 4*pi back on I
        minus = su2.exp_group(su2.AlgebraVector([0, 0, 2 * np.pi]))
        assert np.max(np.abs(minus.matrix + np.eye(2))) < 1e-14
        plus = su2.exp_group(su2.AlgebraVector([0, 0, 4 * np.pi]))
        assert np.max(np.abs(plus.matrix - np.eye(2))) < 1e-13

    @pytest.mark.parametrize("scale", [0.1, 1.0, 3.0, 8.0])
    def test_exp_matches_eigendecomposition_oracle(self, scale):
        x = random_algebra(np.random.default_rng(int(scale * 10)), scale)
        expected = scipy.linalg.expm(x.matrix)
        assert np.max(np.abs(su2.exp_group(x).matrix - expected)) < 1e-12

    def test_exp_group_invariants_sweep(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            x = random_algebra(rng, 10.0 / 3.0)
            if x.norm > 10:
                continue
            u = su2.exp_group(x).matrix
            assert abs(np.linalg.det(u) - 1.0) < 1e-12
            assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-12

    def test_log_identity(self):
        assert np.allclose(su2.log_group(su2.GroupElement.identity()).coords, 0.0)

    def test_log_roundtrip(self):
        x = su2.AlgebraVector([0.3, 0, 0])
        assert np.allclose(su2.log_group(su2.exp_group(x)).coords, x.coords)

    def test_log_cut_locus(self):
        with pytest.raises(CutLocusError):
            su2.log_group(su2.GroupElement(-np.eye(2)))

    def test_exp_complex_identity(self):
        z = su2.ComplexAlgebraVector([0, 0, 0])
        assert np.allclose(su2.exp_complex(z).matrix, np.eye(2))

    def test_exp_complex_positive_diagonal(self):
        # exp(i * 0.5 e3) is diag(e^{1/4}, e^{-1/4})
        z = su2.ComplexAlgebraVector([0, 0, 0.5j])
        expected = np.diag([np.exp(0.25), np.exp(-0.25)])
        assert np.max(np.abs(su2.exp_complex(z).matrix - expected)) < 1e-14

    def test_exp_complex_agrees_on_reals(self):
        x = random_algebra(RNG)
        a = su2.exp_group(x).matrix
        b = su2.exp_complex(x).matrix
        assert np.max(np.abs(a - b)) < 1e-14

    def test_exp_complex_vs_expm(self):
        z = su2.ComplexAlgebraVector(RNG.normal(size=3) + 1j * RNG.normal(size=3))
        assert np.max(np.abs(su2.exp_complex(z).matrix
                             - scipy.linalg.expm(z.matrix))) < 1e-12

    def test_log_complex_roundtrip(self):
        z = su2.ComplexAlgebraVector(0.6 * (RNG.normal(size=3)
                                            + 1j * RNG.normal(size=3)))
        g = su2.exp_complex(z)
        back = su2.log_complex(g)
        assert np.max(np.abs(su2.exp_complex(back).matrix - g.matrix)) < 1e-12


class TestPolar:
    def test_identity_cases(self):
        e = su2.GroupElement.identity()
        zero = su2.AlgebraVector([0, 0, 0])
        assert np.allclose(su2.polar_compose(e, zero).matrix, np.eye(2))
        x = su2.haar_sample(np.random.default_rng(1))
        assert np.max(np.abs(su2.polar_compose(x, zero).matrix - x.matrix)) < 1e-14

    def test_unitary_input(self):
        x = su2.haar_sample(np.random.default_rng(2))
        g = su2.ComplexGroupElement(x.matrix)
        x2, y2 = su2.polar_decompose(g)
        assert np.max(np.abs(x2.matrix - x.matrix)) < 1e-12
        assert y2.norm < 1e-12

    def test_pure_positive_input(self):
        y0 = su2.AlgebraVector([0.4, -0.2, 0.7])
        g = su2.polar_compose(su2.GroupElement.identity(), y0)
        x2, y2 = su2.polar_decompose(g)
        assert np.max(np.abs(x2.matrix - np.eye(2))) < 1e-12
        assert np.allclose(y2.coords, y0.coords, atol=1e-12)

    def test_against_svd_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            x = su2.haar_sample(rng)
            y = random_algebra(rng)
            g = su2.polar_compose(x, y)
            # SVD-based polar factorization: g = (U V*) (V S V*)
            u, s, vh = np.linalg.svd(g.matrix)
            unitary = u @ vh
            positive = vh.conj().T @ np.diag(s) @ vh
            x2, y2 = su2.polar_decompose(g)
            assert np.max(np.abs(x2.matrix - unitary)) < 1e-12
            iy = su2.ComplexAlgebraVector(1j * y2.coords)
            assert np.max(np.abs(su2.exp_complex(iy).matrix - positive)) < 1e-12
            # positive factor has a traceless self-adjoint logarithm
            logp = scipy.linalg.logm(positive)
            assert abs(np.trace(logp)) < 1e-12
            assert np.max(np.abs(logp - logp.conj().T)) < 1e-10

    def test_roundtrip_sweep(self):
        rng = np.random.default_rng(4)
        worst = 0.0
        for _ in range(500):
            x = su2.haar_sample(rng)
            direction = rng.normal(size=3)
            y = su2.AlgebraVector(direction / np.linalg.norm(direction)
                                  * rng.uniform(0, 3.0))
            g = su2.polar_compose(x, y)
            x2, y2 = su2.polar_decompose(g)
            worst = max(worst, np.max(np.abs(
                su2.polar_compose(x2, y2).matrix - g.matrix)))
        assert worst < 1e-10


class TestAdjoint:
    def test_ad_invariance(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            x = su2.haar_sample(rng)
            a, b = random_algebra(rng), random_algebra(rng)
            lhs = su2.inner(su2.adjoint(x, a), su2.adjoint(x, b))
            assert abs(lhs - su2.inner(a, b)) < 1e-12


class TestHaar:
    def test_sample_is_group_element(self):
        g = su2.haar_sample(np.random.default_rng(7))
        assert abs(np.linalg.det(g.matrix) - 1) < 1e-12

    def test_sample_moments(self):
        # character means over 1e6 draws within 4 standard errors of 0
        from sbym import harmonic
        mats = su2.haar_sample_batch(np.random.default_rng(8), 1_000_000)
        tr = (mats[:, 0, 0] + mats[:, 1, 1]).real
        for n in (2, 3, 4):
            vals = harmonic.character_batch(n, tr)
            se = vals.std() / np.sqrt(len(vals))
            assert abs(vals.mean()) < 4 * se

    def test_quadrature_normalization(self):
        _, w = su2.haar_quadrature(6)
        assert abs(w.sum() - 1.0) < 1e-13

    def test_quadrature_kills_characters(self):
        from sbym import harmonic
        nodes, w = su2.haar_quadrature(8)
        tr = nodes[:, 0, 0] + nodes[:, 1, 1]
        for n in (2, 3, 4, 5):
            assert abs(np.sum(w * harmonic.character_batch(n, tr))) < 1e-13

    def test_quadrature_character_norms_vs_brute_force(self):
        # a much finer rule is the brute-force oracle for |chi_n|^2 = 1
        from sbym import harmonic
        for band in (8, 20):
            nodes, w = su2.haar_quadrature(band)
            tr = nodes[:, 0, 0] + nodes[:, 1, 1]
            val = np.sum(w * np.abs(harmonic.character_batch(2, tr)) ** 2)
            assert abs(val - 1.0) < 1e-12

    def test_quadrature_matrix_unit_orthogonality(self):
        from sbym import harmonic
        nodes, w = su2.haar_quadrature(8)
        p2 = harmonic.irrep_matrix_batch(2, nodes)
        p3 = harmonic.irrep_matrix_batch(3, nodes)
        # <sqrt(n) pi^n_ij, sqrt(m) pi^m_kl> = delta
        val = np.sum(w * 2 * p2[:, 0, 1] * np.conj(p2[:, 0, 1]))
        assert abs(val - 1.0) < 1e-13
        val = np.sum(w * np.sqrt(6) * p2[:, 0, 0] * np.conj(p3[:, 1, 1]))
        assert abs(val) < 1e-13

    def test_sampler_and_quadrature_cross_check(self):
        # the two Haar realizations must agree on a smooth test function
        from sbym import harmonic
        nodes, w = su2.haar_quadrature(12)

        def fn(mats):
            tr = mats[:, 0, 0] + mats[:, 1, 1]
            return np.abs(harmonic.character_batch(3, tr)) ** 2 + tr.real

        quad_val = np.sum(w * fn(nodes)).real
        mats = su2.haar_sample_batch(np.random.default_rng(9), 400_000)
        vals = fn(mats).real
        se = vals.std() / np.sqrt(len(vals))
        assert abs(vals.mean() - quad_val) < 4 * se


def test_euler_grid_is_in_group():
    grid = su2.euler_grid(6)
    dets = grid[:, 0, 0] * grid[:, 1, 1] - grid[:, 0, 1] * grid[:, 1, 0]
    assert np.max(np.abs(dets - 1.0)) < 1e-13
    uu = np.einsum("kba,kbc->kac", np.conj(grid), grid)
    assert np.max(np.abs(uu - np.eye(2))) < 1e-13


def test_group_element_validation():
    with pytest.raises(ValueError):
        su2.GroupElement(np.array([[2.0, 0.0], [0.0, 0.5]]))
    with pytest.raises(ValueError):
        su2.ComplexGroupElement(np.array([[2.0, 0.0], [0.0, 2.0]]))
