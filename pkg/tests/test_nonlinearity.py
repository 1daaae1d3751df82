import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import singnls as s
from singnls.mesh import BoundaryKind
from singnls.nonlinearity import (
    NonlinearityParams,
    eval_nonlinearity,
    eval_truncated,
    monotonicity_pairing,
    pairing_constant_lower_bound,
    singular_term,
    truncation_sup_bound,
)

DIR = BoundaryKind.DIRICHLET
NEU = BoundaryKind.NEUMANN

small = st.floats(-10, 10, allow_nan=False)
complexes = st.builds(complex, small, small)


def params(a, b, c, m, delta=0.0, V=0.0):
    return NonlinearityParams(
        coeffs=s.CoefficientTriple(a, b, c, m),
        V=np.asarray(V, dtype=float),
        delta_shift=delta,
    )


class TestEval:
    def test_zero_is_removable(self):
        p = params(1, 2, 3, 0.5, V=1.0)
        assert eval_nonlinearity(p, 0.0, 1.0) == 0.0

    def test_real_quarter_power(self):
        p = params(1, 0, 0, 0.5)
        assert eval_nonlinearity(p, 4.0, 0.0) == pytest.approx(2.0)

    def test_mixed_example(self):
        p = params(1j, 2, 1, 0.5)
        assert eval_nonlinearity(p, 1.0, 3.0) == pytest.approx(11 + 1j)

    @given(complexes, st.floats(0.05, 0.95))
    def test_phase_equivariance(self, u, m):
        p = params(1 + 2j, -1j, 0.5 - 0.5j, m, V=1.0)
        for theta in (0.3, 1.2, 2.9):
            rot = complex(math.cos(theta), math.sin(theta))
            lhs = eval_nonlinearity(p, rot * u, 1.0)
            rhs = rot * eval_nonlinearity(p, u, 1.0)
            assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))


class TestTruncated:
    def test_inner_branch_identity(self):
        p = params(1j, 2, 1, 0.5, delta=0.25)
        u = 1.0 + 0.0j
        expected = eval_nonlinearity(p, u, 3.0) - 0.25 * u
        assert eval_truncated(p, 10.0, u, 3.0) == expected

    def test_outer_branch_value(self):
        p = params(1, 0, 0, 0.5)
        # ell = 1, u = 2: 1^(1/2) * u/|u| = 1
        assert eval_truncated(p, 1.0, 2.0, 0.0) == pytest.approx(1.0)

    def test_continuity_across_clamp(self):
        p = params(1 - 1j, 0.5 + 2j, 0.25, 0.4, delta=0.1)
        ell = 1.7
        for theta in np.linspace(0, 2 * np.pi, 7):
            u = ell * complex(math.cos(theta), math.sin(theta))
            inner = eval_nonlinearity(p, u, 1.5) - 0.1 * u
            outer = eval_truncated(p, ell, u * 1.0000001, 1.5)
            assert abs(inner - outer) <= 1e-5 * max(1.0, abs(inner))

    def test_bitwise_inner_branch_on_arrays(self):
        rng = np.random.default_rng(0)
        p = params(1 - 1j, 0.5 + 2j, 0.25, 0.4, delta=0.1, V=rng.uniform(0, 2, 50))
        u = rng.standard_normal(50) + 1j * rng.standard_normal(50)
        ell = float(np.max(np.abs(u))) * 1.5
        lhs = eval_truncated(p, ell, u)
        rhs = eval_nonlinearity(p, u) - 0.1 * u
        assert np.array_equal(lhs, rhs)

    @given(complexes, st.floats(0.1, 0.9), st.floats(0.1, 50))
    def test_uniform_bound(self, u, m, ell):
        p = params(1 + 2j, -0.5 - 1j, 0.3 + 0.1j, m, delta=0.2, V=1.5)
        val = eval_truncated(p, ell, u, 1.5)
        assert abs(val) <= truncation_sup_bound(p, ell) * (1 + 1e-12)

    def test_rejects_nonpositive_ell(self):
        p = params(1, 0, 0, 0.5)
        with pytest.raises(ValueError):
            eval_truncated(p, 0.0, 1.0, 0.0)


class TestMonotonicityPairing:
    def test_equal_fields(self):
        g = s.build_grid(s.interval(0, 1), 8)
        u = s.Field(g, np.linspace(0.1, 1, 8) + 0j, DIR)
        out = monotonicity_pairing(u, u, 0.5)
        assert out["pairing"] == 0.0
        assert out["lower_integral"] == 0.0

    def test_positive_constants(self):
        g = s.build_grid(s.interval(0, 1), 16)
        p, q, m = 2.0, 0.5, 0.5
        u1 = s.Field(g, np.full(g.num_nodes(NEU), p + 0j), NEU)
        u2 = s.Field(g, np.full(g.num_nodes(NEU), q + 0j), NEU)
        out = monotonicity_pairing(u1, u2, m)
        assert out["pairing"] == pytest.approx((p**m - q**m) * (p - q), rel=1e-12)
        assert out["pairing"] >= 0.0

    @given(st.integers(0, 500))
    def test_accretivity(self, seed):
        g = s.build_grid(s.interval(0, 1), 12)
        rng = np.random.default_rng(seed)
        n = g.num_nodes(DIR)
        u1 = s.Field(g, rng.standard_normal(n) + 1j * rng.standard_normal(n), DIR)
        u2 = s.Field(g, rng.standard_normal(n) + 1j * rng.standard_normal(n), DIR)
        out = monotonicity_pairing(u1, u2, 0.5)
        assert out["pairing"] >= -1e-14

    @pytest.mark.parametrize("m", [0.3, 0.5, 0.7])
    def test_field_pairing_dominates_scaled_lower_integral(self, m):
        C = pairing_constant_lower_bound(m)
        assert 0.0 < C <= 1.0
        g = s.build_grid(s.interval(0, 1), 32)
        rng = np.random.default_rng(42)
        n = g.num_nodes(DIR)
        for _ in range(10):
            u1 = s.Field(g, rng.standard_normal(n) + 1j * rng.standard_normal(n), DIR)
            u2 = s.Field(g, rng.standard_normal(n) + 1j * rng.standard_normal(n), DIR)
            out = monotonicity_pairing(u1, u2, m)
            assert out["pairing"] >= 0.95 * C * out["lower_integral"]

    def test_scalar_oracle_near_diagonal_limit(self):
        # the infimum is approached along real perturbations near the
        # diagonal, where the ratio tends to m * 2^(1-m)
        for m in (0.3, 0.5, 0.7):
            C = pairing_constant_lower_bound(m)
            assert C == pytest.approx(m * 2 ** (1 - m), rel=1e-6)


class TestSingularTerm:
    @given(complexes)
    def test_matches_formula_away_from_zero(self, u):
        if abs(u) < 1e-6:
            return
        m = 0.5
        expected = abs(u) ** (m - 1) * u
        assert abs(singular_term(u, m) - expected) <= 1e-12 * abs(expected)

    def test_array_zero_entries(self):
        vals = singular_term(np.array([0.0, 1.0, 0.0, 4.0]), 0.5)
        assert vals[0] == 0.0 and vals[2] == 0.0
        assert vals[3] == pytest.approx(2.0)
