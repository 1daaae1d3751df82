"""Algebra of the complex coefficient triple (a, b, c).

Admissibility of single coefficients and of the pair (a, b), hypothesis
checks for each existence/uniqueness regime, and explicit constants that
turn the real/imaginary energy identities into coercive bounds.  All
functions are pure and operate on plain complex numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "CoefficientTriple",
    "CombinedBoundConstants",
    "PotentialBoundConstants",
    "HypothesisReport",
    "TheoremId",
    "CombinationCase",
    "in_admissible_set",
    "in_rotated_admissible_set",
    "satisfies_pair_condition",
    "satisfies_rotated_pair_condition",
    "combined_bound_constants",
    "potential_bound_constants",
    "check_existence_finite_measure",
    "check_existence_dissipative",
    "check_existence_admissible_pair",
    "check_uniqueness",
    "PROPORTIONALITY_RTOL",
]

# |Im(a * conj(b))| below this fraction of |a||b| counts as a real ray
PROPORTIONALITY_RTOL = 1e-12


def _require_finite(z: complex, name: str = "z") -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite, got {z}")
    return z


@dataclass(frozen=True)
class CoefficientTriple:
    """Coefficients of the singular, linear and potential terms, plus the
    exponent m in (0,1) of the sublinear absorption."""

    a: complex
    b: complex
    c: complex
    m: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            _require_finite(getattr(self, name), name)
        if not (math.isfinite(self.m) and 0.0 < self.m < 1.0):
            raise ValueError(f"exponent m must lie in (0,1), got {self.m}")


class TheoremId(str, Enum):
    EXIST1 = "Exist1"
    EXIST2 = "Exist2"
    EXIST3 = "Exist3"
    UNI1 = "Uni1"
    UNI2 = "Uni2"
    UNI3 = "Uni3"


class CombinationCase(str, Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"
    CASE4 = "Case4"


@dataclass(frozen=True)
class HypothesisReport:
    theorem_id: TheoremId
    satisfied: bool
    witness: str

    def __post_init__(self):
        if not self.satisfied and not self.witness:
            raise ValueError("failing report needs a witness")

    def to_json(self) -> dict:
        return {
            "theorem_id": self.theorem_id.value,
            "satisfied": self.satisfied,
            "witness": self.witness,
        }


def in_admissible_set(z: complex) -> bool:
    """True unless z lies on the closed non-positive real ray."""
    z = _require_finite(z)
    return not (z.real <= 0.0 and z.imag == 0.0)


def in_rotated_admissible_set(z: complex) -> bool:
    """Admissibility in the i-rotated frame: excludes {Re = 0, Im <= 0}."""
    z = _require_finite(z)
    return not (z.real == 0.0 and z.imag <= 0.0)


def satisfies_pair_condition(a: complex, b: complex) -> bool:
    """Joint admissibility of (a, b): both off the bad ray, and either the
    imaginary parts do not oppose each other or the slope inequality
    Re(b) > (Im(b)/Im(a)) Re(a) holds."""
    a, b = _require_finite(a, "a"), _require_finite(b, "b")
    if not (in_admissible_set(a) and in_admissible_set(b)):
        return False
    s = a.imag * b.imag
    if s >= 0.0:
        return True
    return b.real > (b.imag / a.imag) * a.real


def satisfies_rotated_pair_condition(at: complex, bt: complex) -> bool:
    """The same pair condition written in the i-rotated frame."""
    at, bt = _require_finite(at, "at"), _require_finite(bt, "bt")
    if not (in_rotated_admissible_set(at) and in_rotated_admissible_set(bt)):
        return False
    s = at.real * bt.real
    if s >= 0.0:
        return True
    return bt.imag > (bt.real / at.real) * at.imag


# ---------------------------------------------------------------------------
# combined-estimate constants (delta_star, L, M)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CombinedBoundConstants:
    """Constants such that every nonnegative tuple (C0..C4) obeying

        |C1 + delta*C2 + Re(a)*C3 + (Re(b)-delta)*C4| <= C0,
        |Im(a)*C3 + Im(b)*C4| <= C0,

    for any shift delta in [0, delta_star], also obeys
    0 <= C1 + L*C3 + L*C4 <= M*C0."""

    delta_star: float
    L: float
    M: float
    gamma: float
    case_id: CombinationCase

    def to_json(self) -> dict:
        return {
            "delta_star": self.delta_star,
            "L": self.L,
            "M": self.M,
            "gamma": self.gamma,
            "case_id": self.case_id.value,
        }


def combined_bound_constants(a: complex, b: complex) -> CombinedBoundConstants:
    """Compute (delta_star, L, M) for an admissible pair.

    The sign pattern of (Re(a), Re(b), Im(a)Im(b)) selects one of four
    linear combinations of the two constraints; gamma is fixed at half the
    largest value keeping the combination's coefficients positive (or 1
    when nothing binds), and delta_star at half its admissible ceiling, so
    the strict inequalities of the derivation become safe margins.
    """
    a, b = _require_finite(a, "a"), _require_finite(b, "b")
    if not satisfies_pair_condition(a, b):
        raise ValueError("pair (a, b) violates the admissibility condition")

    ra, ia, rb, ib = a.real, a.imag, b.real, b.imag
    s = ia * ib

    if ra >= 0.0 and rb >= 0.0 and s >= 0.0:
        gamma = 1.0
        delta_star = 0.5 * min(1.0, abs(ib) + abs(rb))
        L = min(ra + abs(ia), rb - delta_star + abs(ib))
        M = 2.0
        case = CombinationCase.CASE1
    elif s < 0.0 or (ra >= 0.0 and rb < 0.0):
        # eliminate C3's real coefficient against the imaginary constraint
        slope = ia / ib
        k0 = ra - rb * slope
        gamma = 1.0 if slope >= 0.0 else 0.5 * k0 / (-slope)
        k3 = k0 + gamma * slope
        delta_star = 0.5 * min(1.0, gamma, abs(ib) + abs(rb))
        L = min(k3, gamma - delta_star)
        M = (abs(rb) + abs(ib) + gamma) / abs(ib)
        case = CombinationCase.CASE2
    elif ra < 0.0 and rb >= 0.0:
        gamma = 1.0
        slope = ib / ia
        k4 = rb - ra * slope + gamma * slope
        delta_star = 0.5 * min(1.0, gamma, abs(ib) + abs(rb), k4)
        L = min(gamma, k4 - delta_star)
        M = (abs(ra) + abs(ia) + gamma) / abs(ia)
        case = CombinationCase.CASE3
    else:
        gamma = 1.0
        delta_star = 0.5 * min(1.0, gamma, abs(ib) + abs(rb))
        L = gamma - delta_star
        M = (abs(ra) + abs(ia) + gamma) / abs(ia) + (abs(rb) + abs(ib) + gamma) / abs(ib)
        case = CombinationCase.CASE4

    if not (0.0 < delta_star <= 1.0 and L > 0.0 and M > 0.0):
        raise AssertionError(f"degenerate constants for a={a}, b={b}")
    return CombinedBoundConstants(delta_star=delta_star, L=L, M=M, gamma=gamma, case_id=case)


# ---------------------------------------------------------------------------
# potential-case constants (A, A0, M)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialBoundConstants:
    """Multiplier A for the imaginary identity, the resulting coefficient
    A0 = A|Im(a)| + Re(a) of the absorption term, the potential sup-norm R
    and the final constant M of the energy bound."""

    A: float
    A0: float
    R: float
    M: float

    def to_json(self) -> dict:
        return {"A": self.A, "A0": self.A0, "R": self.R, "M": self.M}


def potential_bound_constants(a: complex, b: complex, c: complex, R: float) -> PotentialBoundConstants:
    """Constants controlling H1 x L^{m+1} norms by the L2 source norm in the
    dissipative regime (Im(b) != 0; Im(a) != 0 whenever Re(a) <= 0).

    A is the smallest multiplier that makes A*(imag identity) + (real
    identity) coercive; when Re(a) <= 0 the floor (1+|Re(a)|)/|Im(a)| is
    used instead of |Re(a)|/|Im(a)| so that A0 >= 1 strictly.  M dominates
    every term of the combined estimate individually.
    """
    a, b, c = _require_finite(a, "a"), _require_finite(b, "b"), _require_finite(c, "c")
    if R < 0 or not math.isfinite(R):
        raise ValueError("potential sup-norm R must be finite and nonnegative")
    if b.imag == 0.0:
        raise ValueError("Im(b) != 0 required")
    if a.real <= 0.0 and a.imag == 0.0:
        raise ValueError("Im(a) != 0 required when Re(a) <= 0")

    A = max(1.0, (1.0 + abs(b) + R**2 * abs(c)) / abs(b.imag))
    if a.real <= 0.0:
        A = max(A, (1.0 + abs(a.real)) / abs(a.imag))
    A0 = A * abs(a.imag) + a.real
    M = 4.0 * A**2 * max(2.0, 1.0 / A0, 1.0 / min(1.0, A0))
    return PotentialBoundConstants(A=A, A0=A0, R=float(R), M=M)


# ---------------------------------------------------------------------------
# hypothesis checks
# ---------------------------------------------------------------------------

def check_existence_finite_measure(b: complex, C_P: float) -> HypothesisReport:
    """Existence on a finite-measure domain with zero trace: Re(b) >= 0 is
    always fine, otherwise Im(b) != 0 or Re(b) > -1/C_P^2 is needed."""
    b = _require_finite(b, "b")
    if not C_P > 0:
        raise ValueError("C_P must be positive")
    if b.real >= 0.0:
        return HypothesisReport(TheoremId.EXIST1, True, f"Re(b) = {b.real} >= 0")
    if b.imag != 0.0:
        return HypothesisReport(TheoremId.EXIST1, True, f"Im(b) = {b.imag} != 0")
    floor = -1.0 / C_P**2
    if b.real > floor:
        return HypothesisReport(TheoremId.EXIST1, True, f"Re(b) = {b.real} > -1/C_P^2 = {floor}")
    return HypothesisReport(
        TheoremId.EXIST1, False,
        f"Re(b) = {b.real} <= -1/C_P^2 = {floor} and Im(b) = 0",
    )


def check_existence_dissipative(t: CoefficientTriple) -> HypothesisReport:
    """Dissipative-sign existence regime: Im(a) <= 0, Im(b) < 0, Im(c) <= 0,
    and a must not sit on the bad ray (Re(a) > 0 or Im(a) < 0)."""
    failures = []
    if t.a.imag > 0.0:
        failures.append(f"Im(a) = {t.a.imag} > 0")
    if not t.b.imag < 0.0:
        failures.append(f"Im(b) = {t.b.imag} >= 0")
    if t.c.imag > 0.0:
        failures.append(f"Im(c) = {t.c.imag} > 0")
    if t.a.real <= 0.0 and not t.a.imag < 0.0:
        failures.append(f"Re(a) = {t.a.real} <= 0 with Im(a) = {t.a.imag} = 0")
    if failures:
        return HypothesisReport(TheoremId.EXIST2, False, "; ".join(failures))
    return HypothesisReport(
        TheoremId.EXIST2, True,
        "Im(a) <= 0, Im(b) < 0, Im(c) <= 0 and a off the non-positive real ray",
    )


def check_existence_admissible_pair(t: CoefficientTriple) -> HypothesisReport:
    """Existence under the pair condition on (a, b); requires c = 0."""
    if t.c != 0:
        return HypothesisReport(TheoremId.EXIST3, False, f"c = {t.c} != 0")
    if satisfies_pair_condition(t.a, t.b):
        return HypothesisReport(TheoremId.EXIST3, True, "(a, b) satisfies the pair condition")
    return HypothesisReport(TheoremId.EXIST3, False, "(a, b) violates the pair condition")


def _parallel_nonneg(x: complex, y: complex, strict: bool) -> bool:
    """Whether x = k*y for some real k >= 0 (k > 0 when strict), assuming
    y != 0; tolerant test on the cross term."""
    cross = x * y.conjugate()
    if abs(cross.imag) > PROPORTIONALITY_RTOL * abs(x) * abs(y):
        return False
    return cross.real > 0.0 if strict else cross.real >= 0.0


def check_uniqueness(t: CoefficientTriple) -> HypothesisReport:
    """First satisfied uniqueness case among the three sign/parallelism
    patterns; proportionality is tested via the cross product a*conj(b)."""
    a, b, c = t.a, t.b, t.c
    reasons = []

    if a != 0 and a.real >= 0.0 and (a * b.conjugate()).real >= 0.0 and (a * c.conjugate()).real >= 0.0:
        return HypothesisReport(
            TheoremId.UNI1, True,
            "a != 0, Re(a) >= 0, Re(a conj(b)) >= 0, Re(a conj(c)) >= 0",
        )
    reasons.append("case 1 fails")

    if b != 0 and b.real >= 0.0 and _parallel_nonneg(a, b, strict=False) and (b * c.conjugate()).real >= 0.0:
        return HypothesisReport(
            TheoremId.UNI2, True,
            "b != 0, Re(b) >= 0, a = k b with k >= 0, Re(b conj(c)) >= 0",
        )
    reasons.append("case 2 fails")

    if c != 0 and c.real >= 0.0 and a != 0 and _parallel_nonneg(a, c, strict=True) and (b * c.conjugate()).real >= 0.0:
        return HypothesisReport(
            TheoremId.UNI3, True,
            "c != 0, Re(c) >= 0, a = k c with k > 0, Re(b conj(c)) >= 0",
        )
    reasons.append("case 3 fails")

    return HypothesisReport(TheoremId.UNI1, False, "; ".join(reasons))
