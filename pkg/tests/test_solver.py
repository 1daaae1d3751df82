import math

import numpy as np
import pytest

import singnls as s
from conftest import make_problem
from oracles import newton_solve
from singnls.mesh import BoundaryKind, l2_norm
from singnls.solver import (
    Symmetry,
    default_delta_shift,
    map_norm_bound,
    residual_norm,
    symmetry_defect,
    symmetry_project,
)

DIR = BoundaryKind.DIRICHLET
NEU = BoundaryKind.NEUMANN

TIGHT = s.SolverConfig(tol_update=1e-13, tol_residual=1e-11)


class TestFixedPointMap:
    def test_constant_image_when_linear_part_trivial(self):
        g = s.build_grid(s.interval(0, 1), 16)
        t = s.CoefficientTriple(0, 0, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.sin(np.pi * p[:, 0]))
        cfg = s.SolverConfig(delta_shift=0.5)
        u1 = s.fixed_point_map(prob, cfg, 2.0, s.zero_field(g, DIR))
        rng = np.random.default_rng(0)
        u_rand = s.Field(g, rng.standard_normal(16), DIR)
        u2 = s.fixed_point_map(prob, cfg, 2.0, u_rand)
        assert np.allclose(u1.values, u2.values, rtol=1e-14)

    def test_zero_maps_to_zero_without_source(self):
        g = s.build_grid(s.interval(0, 1), 16)
        t = s.CoefficientTriple(1, 1, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.zeros(p.shape[0]))
        out = s.fixed_point_map(prob, s.SolverConfig(delta_shift=0.0), 1.0, s.zero_field(g, DIR))
        assert np.all(out.values == 0.0)

    def test_manufactured_inverse(self):
        g = s.build_grid(s.interval(0, 1), 64)
        t = s.CoefficientTriple(0, 0, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.pi**2 * np.sin(np.pi * p[:, 0]))
        out = s.fixed_point_map(prob, s.SolverConfig(delta_shift=0.0), 1.0, s.zero_field(g, DIR))
        exact = np.sin(np.pi * g.points(DIR)[:, 0])
        err = np.max(np.abs(out.values - exact))
        assert err <= 2 * g.h[0] ** 2

    def test_map_stays_in_schauder_ball(self):
        g = s.build_grid(s.interval(0, 1), 32)
        t = s.CoefficientTriple(1 - 1j, -0.5 - 1j, 0.2 - 0.2j, 0.5)
        V = np.sum(g.points(DIR) ** 2, axis=1)
        prob = make_problem(g, DIR, t, lambda p: np.sin(np.pi * p[:, 0]), V=V)
        cfg = s.SolverConfig(delta_shift=1.0)
        ell = 3.0
        rho = map_norm_bound(prob, 1.0, ell)
        rng = np.random.default_rng(1)
        for _ in range(5):
            u = s.Field(g, 5 * (rng.standard_normal(32) + 1j * rng.standard_normal(32)), DIR)
            image = s.fixed_point_map(prob, cfg, ell, u)
            assert l2_norm(image) <= rho * (1 + 1e-12)


class TestSolve:
    def test_linear_manufactured(self):
        g = s.build_grid(s.interval(0, 1), 64)
        t = s.CoefficientTriple(0, 1, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: (np.pi**2 + 1) * np.sin(np.pi * p[:, 0]))
        res = s.solve(prob, TIGHT)
        assert res.converged
        exact = np.sin(np.pi * g.points(DIR)[:, 0])
        err = l2_norm(s.Field(g, res.u.values - exact, DIR))
        assert err <= 2 * g.h[0] ** 2

    def test_singular_matches_newton_oracle(self):
        g = s.build_grid(s.interval(0, 1), 64)
        t = s.CoefficientTriple(1, 1, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.ones(p.shape[0]))
        res = s.solve(prob, TIGHT)
        assert res.converged
        oracle = newton_solve(prob, tol=1e-12)
        dist = l2_norm(s.Field(g, res.u.values - oracle.values, DIR))
        assert dist <= 1e-8

    def test_zero_source_uniqueness_regime(self):
        g = s.build_grid(s.interval(0, 1), 32)
        t = s.CoefficientTriple(1, 1, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.zeros(p.shape[0]))
        res = s.solve(prob, TIGHT)
        assert res.converged
        assert l2_norm(res.u) <= 1e-12

    def test_neumann_requires_positive_shift(self):
        g = s.build_grid(s.interval(0, 1), 16)
        t = s.CoefficientTriple(0, 1, 0, 0.5)
        prob = make_problem(g, NEU, t, lambda p: np.cos(np.pi * p[:, 0]))
        with pytest.raises(ValueError):
            s.solve(prob, s.SolverConfig(delta_shift=0.0))

    def test_max_iter_reports_not_converged(self):
        g = s.build_grid(s.interval(0, 1), 16)
        t = s.CoefficientTriple(1, 1, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.ones(p.shape[0]))
        res = s.solve(prob, s.SolverConfig(max_iter=1, tol_update=1e-14, tol_residual=1e-12))
        assert not res.converged
        assert res.message
        assert len(res.diagnostics) == 1

    def test_truncation_schedule_grows_until_inactive(self):
        g = s.build_grid(s.interval(0, 1), 32)
        t = s.CoefficientTriple(1, 1, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: 50 * np.sin(np.pi * p[:, 0]))
        res = s.solve(prob, s.SolverConfig(ell0=0.01, tol_update=1e-12, tol_residual=1e-9))
        assert res.converged
        assert not res.truncation_active
        assert res.final_ell > 0.01
        assert np.max(np.abs(res.u.values)) < res.final_ell

    def test_residual_definition(self):
        g = s.build_grid(s.interval(0, 1), 24)
        t = s.CoefficientTriple(1 - 1j, -1j, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.sin(np.pi * p[:, 0]))
        res = s.solve(prob, TIGHT)
        assert res.converged
        assert residual_norm(prob, res.u) == pytest.approx(res.residual, rel=1e-6, abs=1e-14)

    def test_default_shift_rules(self):
        diss = s.NonlinearityParams(coeffs=s.CoefficientTriple(1, -1j, 0, 0.5), V=np.zeros(1))
        assert default_delta_shift(diss, DIR) == 1.0
        pair = s.NonlinearityParams(coeffs=s.CoefficientTriple(1 + 1j, 2 + 1j, 0, 0.5), V=np.zeros(1))
        assert default_delta_shift(pair, DIR) == pytest.approx(0.5)
        plain = s.NonlinearityParams(coeffs=s.CoefficientTriple(-0.5, 0.5, 0, 0.5), V=np.zeros(1))
        assert default_delta_shift(plain, DIR) == 0.0
        assert default_delta_shift(plain, NEU) == 1.0

    def test_iterates_stay_in_twice_schauder_ball(self):
        g = s.build_grid(s.interval(0, 1), 32)
        t = s.CoefficientTriple(1 - 0.5j, -0.2 - 1j, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: 2 * np.sin(np.pi * p[:, 0]))
        cfg = s.SolverConfig(tol_update=1e-12, tol_residual=1e-10)
        res = s.solve(prob, cfg)
        assert res.converged
        # the per-iteration sup stays below 2x the invariant-ball radius of
        # the largest truncation level used
        rho = map_norm_bound(prob, res.delta_shift, res.final_ell)
        for rec in res.diagnostics:
            assert rec["max_abs"] * math.sqrt(g.h[0]) <= 2 * rho + 1e-12


class TestConvergenceOrder:
    @pytest.mark.parametrize("bc", [DIR, NEU])
    def test_second_order_1d(self, bc):
        errs = []
        for n in (16, 32, 64):
            g = s.build_grid(s.interval(0, 1), n)
            fn = np.sin if bc == DIR else np.cos
            t = s.CoefficientTriple(0, 1, 0, 0.5)
            prob = make_problem(g, bc, t, lambda p: (np.pi**2 + 1) * fn(np.pi * p[:, 0]))
            cfg = s.SolverConfig(delta_shift=None if bc == DIR else 1.0,
                                 tol_update=1e-13, tol_residual=1e-11)
            res = s.solve(prob, cfg)
            assert res.converged
            exact = fn(np.pi * g.points(bc)[:, 0])
            errs.append(l2_norm(s.Field(g, res.u.values - exact, bc)))
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert all(1.8 <= o <= 2.2 for o in orders)


class TestSymmetric:
    def test_even_projection_exact(self):
        g = s.build_grid(s.interval(-1, 1), 63)
        t = s.CoefficientTriple(1, 1, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.cos(np.pi * p[:, 0] / 2))
        res = s.solve_symmetric(prob, TIGHT, Symmetry.EVEN1D)
        assert res.converged
        assert symmetry_defect(res.u, Symmetry.EVEN1D) <= 1e-12

    def test_odd_manufactured(self):
        g = s.build_grid(s.interval(-1, 1), 64)
        t = s.CoefficientTriple(0, 1, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: (np.pi**2 + 1) * np.sin(np.pi * p[:, 0]))
        res = s.solve_symmetric(prob, TIGHT, Symmetry.ODD1D)
        assert res.converged
        assert symmetry_defect(res.u, Symmetry.ODD1D) <= 1e-12
        exact = np.sin(np.pi * g.points(DIR)[:, 0])
        assert l2_norm(s.Field(g, res.u.values - exact, DIR)) <= 2 * g.h[0] ** 2

    def test_rejects_asymmetric_source(self):
        g = s.build_grid(s.interval(-1, 1), 32)
        t = s.CoefficientTriple(1, 1, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: p[:, 0] + 0.3)
        with pytest.raises(ValueError):
            s.solve_symmetric(prob, TIGHT, Symmetry.EVEN1D)

    def test_rejects_off_center_interval(self):
        g = s.build_grid(s.interval(0, 1), 32)
        t = s.CoefficientTriple(1, 1, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.ones(p.shape[0]))
        with pytest.raises(ValueError):
            s.solve_symmetric(prob, TIGHT, Symmetry.EVEN1D)

    def test_mirror_2d(self):
        g = s.build_grid(s.rectangle((0, 1), (0, 1)), 15)
        t = s.CoefficientTriple(1, 1, 0, 0.5)
        prob = make_problem(
            g, DIR, t,
            lambda p: np.sin(np.pi * p[:, 0]) * np.sin(np.pi * p[:, 1]) * (1 + 0.5j))
        for sym in (Symmetry.MIRROR_X, Symmetry.MIRROR_Y):
            res = s.solve_symmetric(prob, TIGHT, sym)
            assert res.converged
            assert symmetry_defect(res.u, sym) <= 1e-12

    def test_projection_is_idempotent(self):
        g = s.build_grid(s.interval(-1, 1), 20)
        rng = np.random.default_rng(2)
        u = s.Field(g, rng.standard_normal(20) + 1j * rng.standard_normal(20), DIR)
        p1 = symmetry_project(u, Symmetry.EVEN1D)
        p2 = symmetry_project(p1, Symmetry.EVEN1D)
        assert np.allclose(p1.values, p2.values, rtol=0, atol=1e-15)
        assert symmetry_defect(p1, Symmetry.EVEN1D) <= 1e-15


class TestUniquenessProbe:
    def test_unique_regime_distances_small(self):
        g = s.build_grid(s.interval(0, 1), 32)
        t = s.CoefficientTriple(1, 1, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.sin(np.pi * p[:, 0]))
        cfg = s.SolverConfig(tol_update=1e-11, tol_residual=1e-9, seed=7)
        out = s.uniqueness_probe(prob, cfg, trials=4)
        assert out["converged_trials"] == 4
        assert out["max_pairwise_l2_distance"] <= 10 * cfg.tol_update

    def test_linear_case_always_unique(self):
        g = s.build_grid(s.interval(0, 1), 32)
        t = s.CoefficientTriple(0, -2 + 3j, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.sin(2 * np.pi * p[:, 0]))
        cfg = s.SolverConfig(tol_update=1e-11, tol_residual=1e-9, seed=3)
        out = s.uniqueness_probe(prob, cfg, trials=3)
        assert out["converged_trials"] >= 2
        assert out["max_pairwise_l2_distance"] <= 1e-8

    def test_multiplicity_regime_reports_partial_results(self):
        # real a > 0, b below -lambda1, zero source: nontrivial solutions
        # may coexist with 0; the probe must not crash and must report
        g = s.build_grid(s.interval(0, 1), 24)
        t = s.CoefficientTriple(1, -12.0, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.zeros(p.shape[0]))
        cfg = s.SolverConfig(tol_update=1e-10, tol_residual=1e-8, seed=1, max_iter=800)
        out = s.uniqueness_probe(prob, cfg, trials=3)
        assert out["trials"] == 3
        assert out["converged_trials"] + len(out["failed_trials"]) == 3
        assert out["max_pairwise_l2_distance"] >= 0.0

    def test_requires_two_trials(self):
        g = s.build_grid(s.interval(0, 1), 16)
        t = s.CoefficientTriple(1, 1, 0, 0.5)
        prob = make_problem(g, DIR, t, lambda p: np.ones(p.shape[0]))
        with pytest.raises(ValueError):
            s.uniqueness_probe(prob, s.SolverConfig(), trials=1)
