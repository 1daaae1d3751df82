"""Energy identities and a-priori-bound certificates for computed solutions.

Each certificate evaluates one proved estimate with fully explicit
constants and reports pass/fail with the margins used.  The constants are
the ones produced by following the corresponding derivation literally;
they are reproducible, not sharp.  A certificate never consults the
solver: it only sees the field, the problem data and the grid, so scaling
a solution by 1e6 flips any true verdict with a nonzero source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .coefficients import (
    check_existence_dissipative,
    check_existence_finite_measure,
    combined_bound_constants,
    potential_bound_constants,
    satisfies_pair_condition,
)
from .mesh import (
    BoundaryKind,
    Field,
    h1_seminorm,
    inner,
    l2_norm,
    lp_norm,
    poincare_constant,
)
from .solver import Problem

__all__ = [
    "BoundCertificate",
    "CertificateError",
    "energy_identities",
    "certify_finite_measure_bound",
    "certify_potential_bound",
    "certify_pair_condition_bound",
    "support_measure",
    "largest_root",
    "certificate_slack",
]


class CertificateError(ValueError):
    """Raised when a certificate's hypotheses fail on the given problem."""


@dataclass
class BoundCertificate:
    theorem_id: str
    identity_defect_re: float
    identity_defect_im: float
    bound_lhs: float
    bound_rhs: float
    constants_used: dict
    verdict: bool
    slack: float

    def to_json(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "lhs": self.bound_lhs,
            "rhs": self.bound_rhs,
            "constants_used": self.constants_used,
            "defects": {"re": self.identity_defect_re, "im": self.identity_defect_im},
            "verdict": self.verdict,
            "slack": self.slack,
        }


def certificate_slack(problem: Problem) -> float:
    """5 percent plus an h^2-proportional allowance for quadrature error."""
    return 0.05 + max(problem.grid.h) ** 2


def _norm_pack(u: Field, problem: Problem) -> dict:
    t = problem.params.coeffs
    v_field = u.with_values(problem.params.V * u.values)
    return {
        "l2": l2_norm(u),
        "h1_semi": h1_seminorm(u),
        "lmp1": lp_norm(u, t.m + 1.0),
        "vl2": l2_norm(v_field),
    }


def energy_identities(u: Field, problem: Problem) -> dict:
    """Defects of the real and imaginary energy balances.

    Pairing the equation with the solution itself gives
    |grad u|^2 + Re(a)|u|_{m+1}^{m+1} + Re(b)|u|^2 + Re(c)|Vu|^2 = Re <F, u>
    and the analogous imaginary balance.  For an exact discrete solution
    both defects vanish up to rounding; in general they equal the real and
    imaginary parts of <residual, u> and are bounded by |residual| |u|.
    """
    t = problem.params.coeffs
    np_ = _norm_pack(u, problem)
    pairing = inner(problem.F, u)  # sum w F conj(u)
    lhs = complex(t.a) * np_["lmp1"] ** (t.m + 1.0) + complex(t.b) * np_["l2"] ** 2 \
        + complex(t.c) * np_["vl2"] ** 2
    re_defect = abs(np_["h1_semi"] ** 2 + lhs.real - pairing.real)
    im_defect = abs(lhs.imag - pairing.imag)
    return {"re_defect": re_defect, "im_defect": im_defect}


def largest_root(K1: float, K2: float, m: float) -> float:
    """Largest nonnegative root of s^2 - K1 s^(1+m) - K2 = 0 (K1, K2 >= 0).

    Every s >= 0 satisfying s^2 <= K1 s^(1+m) + K2 lies below this root,
    which is how the scalar steps of the gradient bounds are closed.
    """
    if K1 < 0 or K2 < 0:
        raise ValueError("coefficients must be nonnegative")
    if K1 == 0.0:
        return math.sqrt(K2)
    s_inner = K1 ** (1.0 / (1.0 - m))  # phi(s_inner) = -K2 <= 0
    if K2 == 0.0:
        return s_inner
    s_hi = 2.0 * max((2.0 * K1) ** (1.0 / (1.0 - m)), math.sqrt(2.0 * K2))

    def phi(s):
        return s * s - K1 * s ** (1.0 + m) - K2

    return float(brentq(phi, s_inner, s_hi, xtol=1e-300, rtol=8.9e-16, maxiter=200))


def certify_finite_measure_bound(u: Field, problem: Problem, C_P: float | None = None) -> BoundCertificate:
    """H1 bound on finite-measure Dirichlet problems with c = 0.

    The scalar gradient bound is assembled from the step matching the sign
    pattern of b (Re(b) >= 0; Re(b) < 0 with Im(b) != 0; or the small
    negative window above -1/C_P^2) and closed by the largest root of the
    resulting relation s^2 <= K1 s^(1+m) + K2.
    """
    t = problem.params.coeffs
    if t.c != 0:
        raise CertificateError("this bound needs c = 0")
    if problem.bc != BoundaryKind.DIRICHLET:
        raise CertificateError("this bound is proved for the zero-trace setting")
    if C_P is None:
        C_P = poincare_constant(problem.grid).C_P
    rep = check_existence_finite_measure(t.b, C_P)
    if not rep.satisfied:
        raise CertificateError(f"hypothesis failure: {rep.witness}")

    m = t.m
    measure = problem.grid.domain.measure
    normF = l2_norm(problem.F)
    omega_pow = measure ** ((1.0 - m) / 2.0)
    rb, ib = t.b.real, t.b.imag
    constants: dict = {"C_P": C_P}

    if rb >= 0.0:
        step = 1
        K1 = 2.0 * max(0.0, -t.a.real) * C_P ** (m + 1.0) * omega_pow
        K2 = 2.0 * C_P**2 * normF**2
    elif ib != 0.0:
        step = 2
        # L2 bound first, then feed it into the gradient relation
        t1 = 2.0 * abs(t.a.imag) * omega_pow / abs(ib)
        t2 = normF**2 / ib**2
        C0 = largest_root(t1, t2, m)
        constants["C0_l2_bound"] = C0
        K1 = 2.0 * abs(t.a.real) * C_P ** (m + 1.0) * omega_pow
        K2 = 2.0 * abs(rb) * C0**2 + 2.0 * C_P**2 * normF**2
    else:
        step = 3
        # -1/C_P^2 < Re(b) < 0: absorb the b term into the gradient
        c2 = 0.5 * (1.0 - abs(rb) * C_P**2)
        mu2 = C_P**2 / (1.0 - abs(rb) * C_P**2)
        constants["mu0_sq"] = mu2
        constants["coercivity"] = c2
        K1 = abs(t.a.real) * C_P ** (m + 1.0) * omega_pow / c2
        K2 = mu2 * normF**2 / (2.0 * c2)

    grad_bound = largest_root(K1, K2, m)
    rhs = math.sqrt(1.0 + C_P**2) * grad_bound
    constants.update({"step": step, "K1": K1, "K2": K2, "grad_bound": grad_bound})

    nrm = _norm_pack(u, problem)
    lhs = math.sqrt(nrm["l2"] ** 2 + nrm["h1_semi"] ** 2)
    defects = energy_identities(u, problem)
    slack = certificate_slack(problem)
    return BoundCertificate(
        theorem_id="Bound1",
        identity_defect_re=defects["re_defect"],
        identity_defect_im=defects["im_defect"],
        bound_lhs=lhs,
        bound_rhs=rhs,
        constants_used=constants,
        verdict=lhs <= rhs * (1.0 + slack),
        slack=slack,
    )


def certify_potential_bound(u: Field, problem: Problem) -> BoundCertificate:
    """Energy bound in the dissipative regime, potential included:
    |u|_H1^2 + |u|_{m+1}^{m+1} <= M (|V|_inf^4 + 1) |F|_L2^2."""
    t = problem.params.coeffs
    rep = check_existence_dissipative(t)
    if not rep.satisfied:
        raise CertificateError(f"hypothesis failure: {rep.witness}")
    R = float(np.max(np.abs(problem.params.V))) if problem.params.V.size else 0.0
    consts = potential_bound_constants(t.a, t.b, t.c, R)
    normF = l2_norm(problem.F)
    rhs = consts.M * (R**4 + 1.0) * normF**2

    nrm = _norm_pack(u, problem)
    lhs = nrm["l2"] ** 2 + nrm["h1_semi"] ** 2 + nrm["lmp1"] ** (t.m + 1.0)
    defects = energy_identities(u, problem)
    slack = certificate_slack(problem)
    return BoundCertificate(
        theorem_id="Bound2",
        identity_defect_re=defects["re_defect"],
        identity_defect_im=defects["im_defect"],
        bound_lhs=lhs,
        bound_rhs=rhs,
        constants_used=consts.to_json(),
        verdict=lhs <= rhs * (1.0 + slack),
        slack=slack,
    )


def certify_pair_condition_bound(u: Field, problem: Problem) -> BoundCertificate:
    """Energy bound under the pair condition on (a, b) with c = 0.

    The combined estimate C1 + L C3 + L C4 <= M C0 is closed with Young's
    inequality on C0 <= |F| |u|; the explicit constant is
    M' = M^2/(2L) * max(1, 2/L)."""
    t = problem.params.coeffs
    if t.c != 0:
        raise CertificateError("this bound needs c = 0")
    if not satisfies_pair_condition(t.a, t.b):
        raise CertificateError("pair (a, b) violates the admissibility condition")
    consts = combined_bound_constants(t.a, t.b)
    m_prime = consts.M**2 / (2.0 * consts.L) * max(1.0, 2.0 / consts.L)
    normF = l2_norm(problem.F)
    rhs = m_prime * normF**2

    nrm = _norm_pack(u, problem)
    lhs = nrm["l2"] ** 2 + nrm["h1_semi"] ** 2 + nrm["lmp1"] ** (t.m + 1.0)
    defects = energy_identities(u, problem)
    slack = certificate_slack(problem)
    used = consts.to_json()
    used["M_prime"] = m_prime
    return BoundCertificate(
        theorem_id="Bound3",
        identity_defect_re=defects["re_defect"],
        identity_defect_im=defects["im_defect"],
        bound_lhs=lhs,
        bound_rhs=rhs,
        constants_used=used,
        verdict=lhs <= rhs * (1.0 + slack),
        slack=slack,
    )


def support_measure(u: Field, eps: float) -> dict:
    """Quadrature measure of {|u| > eps} and the radius of the smallest
    origin-centered ball containing it."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    w = u.grid.quadrature_weights(u.bc)
    pts = u.grid.points(u.bc)
    mask = np.abs(u.values) > eps
    measure = float(np.sum(w[mask]))
    if not np.any(mask):
        return {"measure": 0.0, "bounding_radius": 0.0}
    radii = np.sqrt(np.sum(pts[mask] ** 2, axis=1))
    return {"measure": measure, "bounding_radius": float(np.max(radii))}
