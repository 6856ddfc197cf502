import csv
import math

import numpy as np
import pytest

from sbym import harmonic, lattice, su2
from sbym.errors import InvalidParams, ShapeMismatch
from sbym.harmonic import BandLimitedFunction
from sbym.lattice import (ClassicalState, ComplexLatticeConnection,
                          CylinderFunction, LatticeConnection,
                          LatticeGaugeTransform)
from sbym.rng import substream


def smooth_profile(c):
    def profile(t):
        return (c[0] * math.sin(2 * math.pi * t),
                c[1] * math.cos(2 * math.pi * t),
                c[2] * math.sin(4 * math.pi * t) + c[0] / 2)
    return profile


class TestHolonomy:
    def test_zero_connection(self):
        h = lattice.holonomy(LatticeConnection.zero(10))
        assert np.array_equal(h.matrix, np.eye(2))

    @pytest.mark.parametrize("n", [1, 4, 17])
    def test_constant_connection_telescopes(self, n):
        x = su2.AlgebraVector([0.7, -0.2, 0.4])
        h = lattice.holonomy(LatticeConnection.constant(n, x))
        assert np.max(np.abs(h.matrix - su2.exp_group(x).matrix)) < 1e-13

    def test_refinement_preserves_holonomy(self):
        conn = LatticeConnection(np.random.default_rng(0).normal(size=(6, 3)))
        h1 = lattice.holonomy(conn)
        h2 = lattice.holonomy(conn.refine(4))
        assert np.max(np.abs(h1.matrix - h2.matrix)) < 1e-13

    def test_smooth_profile_first_order_in_n(self):
        # Richardson comparison against a high-resolution oracle
        profile = smooth_profile([0.8, 0.5, 0.3])
        oracle = lattice.holonomy(LatticeConnection.from_profile(profile, 4096))
        errs = []
        for n in (16, 32, 64, 128):
            h = lattice.holonomy(LatticeConnection.from_profile(profile, n))
            errs.append(np.max(np.abs(h.matrix - oracle.matrix)))
        ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
        assert all(1.5 < r < 2.6 for r in ratios)

    def test_complex_agrees_on_reals(self):
        conn = LatticeConnection(np.random.default_rng(1).normal(size=(8, 3)))
        a = lattice.holonomy(conn).matrix
        b = lattice.holonomy_complex(conn).matrix
        assert np.max(np.abs(a - b)) < 1e-13

    def test_complex_zero_and_constant(self):
        z = ComplexLatticeConnection(np.zeros((5, 3), dtype=complex))
        assert np.array_equal(lattice.holonomy_complex(z).matrix, np.eye(2))
        vec = su2.ComplexAlgebraVector([0.3 + 0.2j, -0.1j, 0.5])
        links = np.tile(vec.coords, (7, 1))
        h = lattice.holonomy_complex(ComplexLatticeConnection(links))
        assert np.max(np.abs(h.matrix - su2.exp_complex(vec).matrix)) < 1e-13

    def test_complex_holonomy_is_holomorphic_per_link(self):
        rng = np.random.default_rng(2)
        base = rng.normal(size=(6, 3)) + 1j * rng.normal(0, 0.2, size=(6, 3))
        h = 1e-5

        def val(w):
            links = base.copy()
            links[2, 1] += w
            return lattice.holonomy_complex(ComplexLatticeConnection(links)).matrix[0, 0]

        dx = (val(h) - val(-h)) / (2 * h)
        dy = (val(1j * h) - val(-1j * h)) / (2 * h)
        assert abs(0.5 * (dx + 1j * dy)) < 1e-6


class TestNormAndDistance:
    def test_riemann_sum_norm_on_constants(self):
        x = su2.AlgebraVector([0.3, 0.4, 0.0])
        for n in (1, 5, 32):
            conn = LatticeConnection.constant(n, x)
            assert conn.norm_sq() == pytest.approx(0.25)

    def test_distance_to_zero_equals_norm(self):
        conn = LatticeConnection(np.random.default_rng(3).normal(0, 0.8, size=(12, 3)))
        d = lattice.lattice_distance(conn, LatticeConnection.zero(12))
        assert d == pytest.approx(conn.norm, rel=1e-12)

    def test_distance_matches_flat_norm_for_colinear_links(self):
        # commuting transporters: the group distance equals |A - B| exactly
        direction = np.array([0.6, -0.3, 0.2])
        a = LatticeConnection(np.outer(np.linspace(0.1, 1.0, 8), direction))
        b = LatticeConnection(np.outer(np.linspace(0.4, 0.7, 8), direction))
        d = lattice.lattice_distance(a, b)
        assert d == pytest.approx((a - b).norm, rel=1e-12)

    def test_shape_mismatch(self):
        a = LatticeConnection.zero(4)
        b = LatticeConnection.zero(5)
        with pytest.raises(ShapeMismatch):
            lattice.lattice_distance(a, b)


class TestGaugeAction:
    def test_identity_transform_fixes_connection(self):
        conn = LatticeConnection(np.random.default_rng(4).normal(size=(8, 3)))
        sites = np.broadcast_to(np.eye(2, dtype=complex), (9, 2, 2)).copy()
        g = LatticeGaugeTransform(sites)
        moved = lattice.gauge_act(g, conn)
        assert np.max(np.abs(moved.links - conn.links)) < 1e-12

    def test_holonomy_invariance_under_based_loops(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            conn = LatticeConnection(rng.normal(size=(16, 3)))
            g = LatticeGaugeTransform.random_based_loop(16, rng)
            moved = lattice.gauge_act(g, conn)
            diff = np.max(np.abs(lattice.holonomy(moved).matrix
                                 - lattice.holonomy(conn).matrix))
            assert diff < 1e-12

    def test_zero_connection_stays_trivial_holonomy(self):
        rng = np.random.default_rng(6)
        g = LatticeGaugeTransform.random_based_loop(12, rng)
        moved = lattice.gauge_act(g, LatticeConnection.zero(12))
        assert np.max(np.abs(lattice.holonomy(moved).matrix - np.eye(2))) < 1e-12

    def test_gauge_isometry(self):
        rng = np.random.default_rng(7)
        a = LatticeConnection(rng.normal(size=(16, 3)))
        b = LatticeConnection(rng.normal(size=(16, 3)))
        g = LatticeGaugeTransform.random_based_loop(16, rng)
        d0 = lattice.lattice_distance(a, b)
        d1 = lattice.lattice_distance(lattice.gauge_act(g, a),
                                      lattice.gauge_act(g, b))
        assert abs(d0 - d1) < 1e-12

    def test_continuum_formula_recovered_at_first_order(self):
        # site field from a smooth based loop: the discrete action approaches
        # Ad_g A - (dg/dtau) g^{-1}
        def xi(t):
            s = math.sin(math.pi * t) ** 2
            return np.array([0.4 * s, -0.3 * s, 0.2 * math.sin(2 * math.pi * t)])

        def a_profile(t):
            return np.array([0.5 * math.cos(2 * math.pi * t),
                             0.2, -0.4 * math.sin(2 * math.pi * t)])

        def continuum_action(t):
            g = su2.exp_group(su2.AlgebraVector(xi(t)))
            a = su2.AlgebraVector(a_profile(t))
            rotated = su2.adjoint(g, a)
            h = 1e-6
            gp = su2.exp_group(su2.AlgebraVector(xi(t + h))).matrix
            gm = su2.exp_group(su2.AlgebraVector(xi(t - h))).matrix
            deriv = (gp - gm) / (2 * h)
            translation = deriv @ g.matrix.conj().T
            return rotated.coords - su2.AlgebraVector.from_matrix(translation).coords

        errs = []
        for n in (32, 64, 128):
            conn = LatticeConnection.from_profile(lambda t: a_profile(t), n)
            g = LatticeGaugeTransform.based_loop_from_profile(xi, n)
            moved = lattice.gauge_act(g, conn)
            expected = np.array([continuum_action(k / n) for k in range(n)])
            errs.append(np.max(np.abs(moved.links - expected)))
        assert errs[0] > errs[1] > errs[2]
        assert errs[0] / errs[2] > 2.5

    def test_requires_based_loop(self):
        rng = np.random.default_rng(8)
        path = LatticeGaugeTransform.random_path(8, rng)
        with pytest.raises(ValueError):
            lattice.gauge_act(path, LatticeConnection.zero(8))

    def test_shape_mismatch(self):
        rng = np.random.default_rng(9)
        g = LatticeGaugeTransform.random_based_loop(8, rng)
        with pytest.raises(ShapeMismatch):
            lattice.gauge_act(g, LatticeConnection.zero(10))


class TestPathGroupAction:
    def test_trivial_endpoint_reduces_to_gauge_action(self):
        rng = np.random.default_rng(10)
        g = LatticeGaugeTransform.random_based_loop(10, rng)
        conn = LatticeConnection(rng.normal(size=(10, 3)))
        a = lattice.path_group_act(g, conn)
        b = lattice.gauge_act(g, conn)
        assert np.array_equal(a.links, b.links)

    def test_inverse_endpoint_multiplies_holonomy_on_the_right(self):
        # ordering convention lock: h -> h w^{-1} with w the endpoint value
        rng = np.random.default_rng(11)
        for _ in range(5):
            conn = LatticeConnection(rng.normal(size=(12, 3)))
            p = LatticeGaugeTransform.random_path(12, rng)
            lhs = lattice.holonomy(lattice.path_group_act(p, conn)).matrix
            rhs = lattice.holonomy(conn).matrix @ p.endpoint.inverse.matrix
            assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_zero_connection_gives_inverse_endpoint(self):
        rng = np.random.default_rng(12)
        p = LatticeGaugeTransform.random_path(10, rng)
        moved = lattice.path_group_act(p, LatticeConnection.zero(10))
        assert np.max(np.abs(lattice.holonomy(moved).matrix
                             - p.endpoint.inverse.matrix)) < 1e-12

    def test_path_isometry(self):
        rng = np.random.default_rng(13)
        a = LatticeConnection(rng.normal(size=(12, 3)))
        b = LatticeConnection(rng.normal(size=(12, 3)))
        p = LatticeGaugeTransform.random_path(12, rng)
        d0 = lattice.lattice_distance(a, b)
        d1 = lattice.lattice_distance(lattice.path_group_act(p, a),
                                      lattice.path_group_act(p, b))
        assert abs(d0 - d1) < 1e-12


class TestComplexGaugeAction:
    def test_holonomy_invariance(self):
        rng = np.random.default_rng(14)
        links = rng.normal(size=(12, 3)) + 1j * rng.normal(0, 0.4, size=(12, 3))
        z = ComplexLatticeConnection(links)

        def xi(t):
            s = math.sin(math.pi * t) ** 2
            return (s * (0.3 + 0.2j), s * (-0.2 + 0.1j), s * 0.25j)

        g = LatticeGaugeTransform.based_loop_from_profile(xi, 12, complexified=True)
        moved = lattice.gauge_act_complex(g, z)
        diff = np.max(np.abs(lattice.holonomy_complex(moved).matrix
                             - lattice.holonomy_complex(z).matrix))
        assert diff < 1e-11


class TestSamplers:
    def test_invalid_params(self):
        with pytest.raises(InvalidParams):
            lattice.sample_Ps(8, -1.0, 0)
        with pytest.raises(InvalidParams):
            lattice.sample_Msh(8, 0.2, 0.5, 0)

    def test_ps_norm_moment_matches_declared_variance(self):
        # E|A|^2 = 3 s N for the orthonormal-coordinate variance s
        n, s = 16, 0.7
        coords = lattice.ps_chunk(substream(0, 0), 40_000, n, s)
        norms = np.sum(coords ** 2, axis=(1, 2)) / n
        se = norms.std() / math.sqrt(len(norms))
        assert abs(norms.mean() - 3 * s * n) < 4 * se

    def test_ps_single_sample_shape(self):
        conn = lattice.sample_Ps(8, 1.0, seed=4)
        assert conn.n_links == 8

    def test_pushforward_matches_heat_kernel_moment(self):
        # E[chi_2(holonomy)] = 2 exp(-s c(2)/2) up to O(1/N) and MC error
        n, s = 64, 1.0
        coords = lattice.ps_chunk(substream(1, 0), 60_000, n, s)
        mats = lattice._kernels.holonomy_su2(coords, 1.0 / n)
        vals = harmonic.character_batch(2, (mats[:, 0, 0] + mats[:, 1, 1]).real)
        se = vals.std() / math.sqrt(len(vals))
        target = 2 * math.exp(-s * harmonic.casimir(2) / 2)
        assert abs(vals.mean() - target) < 4 * se + 2e-3

    def test_pushforward_haar_limit(self):
        # s -> infinity drives the character mean to the Haar value 0
        n = 32
        means = []
        for s in (1.0, 8.0, 64.0):
            coords = lattice.ps_chunk(substream(2, 0), 30_000, n, s)
            mats = lattice._kernels.holonomy_su2(coords, 1.0 / n)
            vals = harmonic.character_batch(2, (mats[:, 0, 0] + mats[:, 1, 1]).real)
            means.append(abs(vals.mean()))
        assert means[0] > means[1] and means[2] < 0.05

    def test_msh_variances(self):
        n, s, hbar = 8, 1.0, 0.5
        z = lattice.msh_chunk(substream(3, 0), 60_000, n, s, hbar)
        r = 2 * s - hbar
        re_var = z.real.var()
        im_var = z.imag.var()
        assert re_var == pytest.approx(r * n / 2, rel=0.05)
        assert im_var == pytest.approx(hbar * n / 2, rel=0.05)


class TestClassicalFlow:
    def test_time_zero_is_identity(self):
        rng = np.random.default_rng(15)
        state = ClassicalState(LatticeConnection(rng.normal(size=(6, 3))),
                               LatticeConnection(rng.normal(size=(6, 3))))
        out = lattice.free_flow(state, 0.0)
        assert np.array_equal(out.a.links, state.a.links)

    def test_energy_conserved_exactly(self):
        rng = np.random.default_rng(16)
        state = ClassicalState(LatticeConnection(rng.normal(size=(6, 3))),
                               LatticeConnection(rng.normal(size=(6, 3))))
        assert lattice.free_flow(state, 7.3).energy() == state.energy()

    def test_flow_is_affine(self):
        rng = np.random.default_rng(17)
        state = ClassicalState(LatticeConnection(rng.normal(size=(6, 3))),
                               LatticeConnection(rng.normal(size=(6, 3))))
        out = lattice.free_flow(state, 2.5)
        assert np.allclose(out.a.links, state.a.links + 2.5 * state.p.links)
        assert np.array_equal(out.p.links, state.p.links)


class TestLatticeLaplacian:
    def test_constant_function_is_harmonic(self):
        conn = LatticeConnection(np.random.default_rng(18).normal(size=(8, 3)))
        val = lattice.lattice_laplacian(lambda c: 1.0, conn)
        assert val == 0.0

    def test_character_at_zero_connection(self):
        # (Lap chi_2)(identity) = -c(2) * 2 = -3/2 under the fixed convention
        cyl = CylinderFunction(BandLimitedFunction.character_fn(2), 16)
        val = lattice.lattice_laplacian(cyl, LatticeConnection.zero(16))
        assert val == pytest.approx(-1.5, abs=1e-6)

    def test_callable_and_cylinder_paths_agree(self):
        conn = LatticeConnection(np.random.default_rng(19).normal(0, 0.5, size=(6, 3)))
        phi = BandLimitedFunction.character_fn(2)
        cyl = CylinderFunction(phi, 6)
        a = lattice.lattice_laplacian(cyl, conn)
        b = lattice.lattice_laplacian(
            lambda c: phi.evaluate(lattice.holonomy(c)), conn)
        assert a == pytest.approx(b, abs=1e-12)

    def test_error_shrinks_with_refinement(self):
        # median over draws; a single connection can sit pre-asymptotically
        rng = np.random.default_rng(20)
        errs_by_n = {8: [], 64: []}
        for _ in range(7):
            conn = LatticeConnection(rng.normal(0, 0.5, size=(8, 3)))
            h = lattice.holonomy(conn)
            target = -harmonic.casimir(2) * harmonic.character(2, h)
            for n in (8, 64):
                cyl = CylinderFunction(BandLimitedFunction.character_fn(2), n)
                lap = lattice.lattice_laplacian(cyl, conn.refine(n // 8))
                errs_by_n[n].append(abs(lap - target))
        assert np.median(errs_by_n[64]) < np.median(errs_by_n[8])


class TestHeatEvolveMc:
    def test_constant_has_zero_stderr(self):
        z = ComplexLatticeConnection(np.zeros((8, 3), dtype=complex))
        cyl = CylinderFunction(BandLimitedFunction.constant(), 8)
        mean, se = lattice.heat_evolve_mc(cyl, z, 0.5, 4000, seed=1)
        assert mean == pytest.approx(1.0)
        assert se == 0.0

    def test_matches_group_side_transform(self):
        # the core commutativity statement at modest statistics
        rng = np.random.default_rng(21)
        n = 64
        links = rng.normal(0, 0.5, size=(n, 3)) + 1j * rng.normal(0, 0.3, size=(n, 3))
        z = ComplexLatticeConnection(links)
        phi = BandLimitedFunction.character_fn(2)
        cyl = CylinderFunction(phi, n)
        hbar = 0.5
        mean, se = lattice.heat_evolve_mc(cyl, z, hbar, 60_000, seed=2)
        spectral = harmonic.heat_semigroup(phi, hbar).evaluate(
            lattice.holonomy_complex(z))
        assert abs(mean - spectral) < 4 * se + 5e-3

    def test_antithetic_flag(self):
        rng = np.random.default_rng(22)
        z = ComplexLatticeConnection(rng.normal(0, 0.4, size=(16, 3)) + 0j)
        cyl = CylinderFunction(BandLimitedFunction.character_fn(2), 16)
        plain, se_p = lattice.heat_evolve_mc(cyl, z, 0.5, 20_000, seed=3)
        anti, se_a = lattice.heat_evolve_mc(cyl, z, 0.5, 20_000, seed=3,
                                            antithetic=True)
        assert abs(plain - anti) < 4 * (se_p + se_a)
        assert se_a <= se_p * 1.2

    def test_threads_do_not_change_values(self):
        rng = np.random.default_rng(23)
        z = ComplexLatticeConnection(rng.normal(0, 0.4, size=(8, 3)) + 0j)
        cyl = CylinderFunction(BandLimitedFunction.character_fn(2), 8)
        a = lattice.heat_evolve_mc(cyl, z, 0.5, 70_000, seed=4, threads=1)
        b = lattice.heat_evolve_mc(cyl, z, 0.5, 70_000, seed=4, threads=3)
        assert a == b


class TestSubmersionDemo:
    def test_quadratic_profile_exact_value(self):
        rep = lattice.submersion_demo(lambda r: r * r, 2.0)
        assert rep.passed
        assert rep.checks[0].estimate == pytest.approx(4.0, abs=1e-6)

    def test_log_profile_harmonic(self):
        rep = lattice.submersion_demo(math.log, 2.0)
        assert rep.passed
        # radial form f'' + f'/r vanishes for log r
        assert rep.checks[2].estimate == pytest.approx(0.0, abs=1e-6)

    def test_cubic_profile_all_routes_agree(self):
        rep = lattice.submersion_demo(lambda r: r ** 3, 2.0)
        assert rep.passed
        assert all(row.z_or_resid < 1e-6 for row in rep.checks)

    def test_invalid_radius(self):
        with pytest.raises(InvalidParams):
            lattice.submersion_demo(lambda r: r, -1.0)


class TestEnsembleExport:
    def test_csv_roundtrip(self, tmp_path):
        rng = np.random.default_rng(24)
        coords = rng.normal(size=(3, 4, 3))
        mats = lattice._kernels.holonomy_su2(coords, 0.25)
        path = tmp_path / "ensemble.csv"
        lattice.export_ensemble_csv(path, coords, mats, seed=9)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0][0] == "seed"
        assert len(rows) == 4
        assert len(rows[1]) == 2 + 4 * 3 + 8
        assert float(rows[1][2]) == coords[0, 0, 0]
        assert float(rows[2][-1]) == mats[1, 1, 1].imag
