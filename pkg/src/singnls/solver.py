"""Shifted fixed-point solver for the truncated discrete problem.

The core map is u -> (-Lap + delta I)^-1 (F - f_trunc(u)), iterated with
damping.  The truncation level ell grows geometrically whenever the
iteration stalls while some node still exceeds ell, so that at convergence
the clamp is inactive and the iterate solves the untruncated discrete
equation.  Symmetric solves project every iterate onto the requested
parity/mirror subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import (
    BoundaryKind,
    DomainKind,
    Field,
    Grid,
    discrete_laplacian,
    l2_norm,
    poincare_constant,
    zero_field,
)
from .nonlinearity import NonlinearityParams, eval_nonlinearity, eval_truncated, truncation_sup_bound
from .coefficients import check_existence_dissipative, check_existence_admissible_pair, combined_bound_constants

__all__ = [
    "Problem",
    "SolverConfig",
    "SolveResult",
    "Symmetry",
    "default_delta_shift",
    "fixed_point_map",
    "map_norm_bound",
    "residual_norm",
    "solve",
    "solve_symmetric",
    "symmetry_defect",
    "symmetry_project",
    "uniqueness_probe",
]

SYMMETRY_TOL = 1e-12
BLOWUP_FACTOR = 1e6


class Symmetry(str, Enum):
    EVEN1D = "even1d"
    ODD1D = "odd1d"
    MIRROR_X = "mirror_x"
    MIRROR_Y = "mirror_y"


@dataclass
class Problem:
    """Discrete problem: -Lap u + a|u|^(m-1)u + b u + c V^2 u = F."""

    grid: Grid
    bc: BoundaryKind
    params: NonlinearityParams
    F: Field
    source_exponent: float | None = None  # boundary blow-up rate of F, if known

    def __post_init__(self):
        if self.F.bc != self.bc or self.F.grid is not self.grid:
            raise ValueError("source field must live on the problem grid and boundary kind")
        n_nodes = self.grid.num_nodes(self.bc)
        if self.params.V.ndim == 0:
            self.params.V = np.full(n_nodes, float(self.params.V))
        if self.params.V.size != n_nodes:
            raise ValueError("potential V must be sampled on the problem's node set")


@dataclass
class SolverConfig:
    delta_shift: float | None = None  # None -> default_delta_shift
    damping: float = 0.5
    tol_update: float = 1e-10
    tol_residual: float = 1e-8
    max_iter: int = 5000
    ell0: float | None = None  # None -> schedule from the map norm bound
    ell_growth: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0,1]")
        if self.tol_update <= 0 or self.tol_residual <= 0:
            raise ValueError("tolerances must be positive")
        if self.ell_growth <= 1.0:
            raise ValueError("ell growth factor must exceed 1")


@dataclass
class SolveResult:
    u: Field
    residual: float
    iterations: int
    final_ell: float
    truncation_active: bool
    converged: bool
    diagnostics: list = field(default_factory=list)
    delta_shift: float = 0.0
    message: str = ""


def default_delta_shift(params: NonlinearityParams, bc: BoundaryKind) -> float:
    """Shift mirroring the existence arguments: 1 in the dissipative
    regime, delta_star under the pair condition, 0 for plain Dirichlet.
    Neumann always needs a positive shift, so it falls back to 1."""
    t = params.coeffs
    if check_existence_dissipative(t).satisfied:
        return 1.0
    if check_existence_admissible_pair(t).satisfied:
        return combined_bound_constants(t.a, t.b).delta_star
    return 0.0 if bc == BoundaryKind.DIRICHLET else 1.0


class _ShiftedInverse:
    """Cached factorization of (-Lap + delta I) on the problem's node set."""

    def __init__(self, grid: Grid, bc: BoundaryKind, delta: float):
        if bc == BoundaryKind.NEUMANN and delta <= 0.0:
            raise ValueError("Neumann problems need a positive shift delta")
        if delta < 0.0:
            raise ValueError("shift delta must be nonnegative")
        self.lap = discrete_laplacian(grid, bc)
        n = self.lap.shape[0]
        mat = (self.lap + delta * sp.identity(n, format="csr")).astype(np.complex128)
        try:
            self.lu = spla.splu(mat.tocsc())
        except RuntimeError as exc:  # singular factorization
            raise RuntimeError(f"linear solve setup failed: {exc}") from exc
        self.delta = delta

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        out = self.lu.solve(np.asarray(rhs, dtype=np.complex128))
        if not np.all(np.isfinite(out)):
            raise RuntimeError("linear solve produced non-finite values")
        return out


def _resolve_delta(problem: Problem, config: SolverConfig) -> float:
    if config.delta_shift is not None:
        return float(config.delta_shift)
    return default_delta_shift(problem.params, problem.bc)


def _inverse_norm_factor(problem: Problem, delta: float) -> float:
    """L2 operator norm of (-Lap + delta I)^-1: 1/delta for Neumann,
    1/(lambda1 + delta) for Dirichlet."""
    if problem.bc == BoundaryKind.NEUMANN:
        return 1.0 / delta
    lam1 = poincare_constant(problem.grid).lambda1
    return 1.0 / (lam1 + delta)


def map_norm_bound(problem: Problem, delta: float, ell: float) -> float:
    """Radius of the invariant ball of the truncated map in L2."""
    alpha = _inverse_norm_factor(problem, delta)
    params = problem.params.with_shift(delta)
    measure = problem.grid.domain.measure
    return alpha * (l2_norm(problem.F) + truncation_sup_bound(params, ell) * math.sqrt(measure))


def fixed_point_map(problem: Problem, config: SolverConfig, ell: float, u: Field) -> Field:
    """One application of u -> (-Lap + delta I)^-1 (F - f_trunc(u))."""
    delta = _resolve_delta(problem, config)
    inv = _ShiftedInverse(problem.grid, problem.bc, delta)
    params = problem.params.with_shift(delta)
    g = problem.F.values - eval_truncated(params, ell, u.values)
    return u.with_values(inv.solve(g))


def residual_norm(problem: Problem, u: Field, lap: sp.spmatrix | None = None) -> float:
    """Quadrature L2 norm of -Lap u + f(u) - F for the untruncated f."""
    if lap is None:
        lap = discrete_laplacian(problem.grid, problem.bc)
    r = lap @ u.values + eval_nonlinearity(problem.params.with_shift(0.0), u.values) - problem.F.values
    return l2_norm(u.with_values(r))


def _initial_ell(problem: Problem, config: SolverConfig, delta: float) -> float:
    if config.ell0 is not None:
        return float(config.ell0)
    alpha = _inverse_norm_factor(problem, delta)
    coercivity = delta if problem.bc == BoundaryKind.NEUMANN else 1.0 / (alpha) - delta
    # coercivity is lambda1 for Dirichlet (alpha = 1/(lambda1+delta))
    normF = l2_norm(problem.F)
    return max(1.0, 2.0 * alpha * normF / min(1.0, coercivity))


def _picard_loop(u0: np.ndarray, apply_map, residual_of, linf_of, update_norm_of,
                 config: SolverConfig, ell: float, projector=None) -> tuple:
    """Damped Picard iteration with stall-triggered truncation growth.

    apply_map(values, ell) returns the raw map image; residual_of(values)
    the untruncated residual; projector, when given, is applied after each
    damped step.  Returns (values, diagnostics, converged, residual,
    iterations, ell, truncation_active, message).
    """
    u = u0.copy()
    if projector is not None:
        u = projector(u)
    theta = config.damping
    diagnostics = []
    prev_residual = math.inf
    blowup_scale = None
    message = ""
    converged = False
    residual = residual_of(u)
    it = 0
    for it in range(1, config.max_iter + 1):
        tu = apply_map(u, ell)
        new = (1.0 - theta) * u + theta * tu
        if projector is not None:
            new = projector(new)
        update = update_norm_of(new - u)
        scale = max(update_norm_of(new), 1e-300)
        rel_update = update / scale
        u = new
        residual = residual_of(u)
        max_abs = linf_of(u)
        truncation_active = max_abs >= ell
        diagnostics.append({
            "iteration": it,
            "residual": residual,
            "rel_update": rel_update,
            "ell": ell,
            "damping": theta,
            "max_abs": max_abs,
        })
        if blowup_scale is None:
            blowup_scale = max(scale, 1.0)
        elif scale > BLOWUP_FACTOR * blowup_scale:
            message = "blow-up detected"
            break
        if rel_update <= config.tol_update:
            if truncation_active:
                ell *= config.ell_growth
                continue
            if residual <= config.tol_residual:
                converged = True
                break
            if rel_update == 0.0 or rel_update <= 1e-16:
                message = "stagnated above residual tolerance"
                break
        if residual > prev_residual and theta > 1.0 / 64.0:
            theta *= 0.5
        prev_residual = residual
    truncation_active = linf_of(u) >= ell
    if not converged and not message:
        message = "maximum iterations reached"
    return u, diagnostics, converged, residual, it, ell, truncation_active, message


def solve(problem: Problem, config: SolverConfig, u0: Field | None = None) -> SolveResult:
    """Damped Picard iteration on the shifted truncated problem.

    Convergence requires the relative update and the untruncated residual
    to fall below their tolerances with every node strictly inside the
    truncation level, so the reported solution solves the original
    discrete equation.  Non-convergence is reported, not raised.
    """
    delta = _resolve_delta(problem, config)
    inv = _ShiftedInverse(problem.grid, problem.bc, delta)
    params = problem.params.with_shift(delta)
    params0 = problem.params.with_shift(0.0)
    F = problem.F.values

    def apply_map(values, ell):
        return inv.solve(F - eval_truncated(params, ell, values))

    w = problem.grid.quadrature_weights(problem.bc)

    def update_norm_of(values):
        return float(np.sqrt(np.sum(w * np.abs(values) ** 2)))

    def residual_of(values):
        r = inv.lap @ values + eval_nonlinearity(params0, values) - F
        return update_norm_of(r)

    def linf_of(values):
        return float(np.max(np.abs(values))) if values.size else 0.0

    ell = _initial_ell(problem, config, delta)
    start = u0.values if u0 is not None else np.zeros_like(F)
    vals, diag, converged, residual, its, ell, trunc, message = _picard_loop(
        start, apply_map, residual_of, linf_of, update_norm_of, config, ell)
    return SolveResult(
        u=Field(problem.grid, vals, problem.bc),
        residual=residual,
        iterations=its,
        final_ell=ell,
        truncation_active=trunc,
        converged=converged,
        diagnostics=diag,
        delta_shift=delta,
        message=message,
    )


# ---------------------------------------------------------------------------
# symmetric subspace solves
# ---------------------------------------------------------------------------

def _check_symmetric_domain(grid: Grid, symmetry: Symmetry):
    if symmetry in (Symmetry.EVEN1D, Symmetry.ODD1D):
        if grid.domain.kind != DomainKind.INTERVAL:
            raise ValueError("1-D parity symmetry needs an interval domain")
        lo, hi = grid.domain.bounds[0]
        if abs(lo + hi) > SYMMETRY_TOL * max(1.0, abs(hi)):
            raise ValueError("parity symmetry needs an interval centered at 0")
    else:
        if grid.domain.kind != DomainKind.RECTANGLE:
            raise ValueError("mirror symmetry needs a rectangle domain")


def _reflect(values: np.ndarray, grid: Grid, bc: BoundaryKind, symmetry: Symmetry) -> np.ndarray:
    arr = values.reshape(grid.shape(bc))
    if symmetry in (Symmetry.EVEN1D, Symmetry.ODD1D):
        return arr[::-1].reshape(values.shape)
    if symmetry == Symmetry.MIRROR_X:
        return arr[::-1, :].reshape(values.shape)
    return arr[:, ::-1].reshape(values.shape)


def symmetry_project(f: Field, symmetry: Symmetry) -> Field:
    """Orthogonal projection onto the even/odd or mirror-symmetric subspace."""
    _check_symmetric_domain(f.grid, symmetry)
    sign = -1.0 if symmetry == Symmetry.ODD1D else 1.0
    return f.with_values(0.5 * (f.values + sign * _reflect(f.values, f.grid, f.bc, symmetry)))


def symmetry_defect(f: Field, symmetry: Symmetry) -> float:
    """Sup-norm deviation of the field from the declared symmetry."""
    _check_symmetric_domain(f.grid, symmetry)
    sign = -1.0 if symmetry == Symmetry.ODD1D else 1.0
    dev = f.values - sign * _reflect(f.values, f.grid, f.bc, symmetry)
    return float(np.max(np.abs(dev))) if dev.size else 0.0


def solve_symmetric(problem: Problem, config: SolverConfig, symmetry: Symmetry) -> SolveResult:
    """Solve with every iterate projected onto the symmetric subspace.

    The source (and the potential) must carry the declared symmetry to
    within 1e-12 of its sup norm; otherwise a ValueError is raised.
    """
    scale = max(1.0, float(np.max(np.abs(problem.F.values))))
    if symmetry_defect(problem.F, symmetry) > SYMMETRY_TOL * scale:
        raise ValueError(f"source violates the declared symmetry {symmetry.value}")
    v_field = Field(problem.grid, problem.params.V.astype(np.complex128), problem.bc)
    v_scale = max(1.0, float(np.max(np.abs(problem.params.V))))
    v_sym = symmetry if symmetry != Symmetry.ODD1D else Symmetry.EVEN1D
    if symmetry_defect(v_field, v_sym) > SYMMETRY_TOL * v_scale:
        raise ValueError("potential violates the declared symmetry")

    delta = _resolve_delta(problem, config)
    inv = _ShiftedInverse(problem.grid, problem.bc, delta)
    params = problem.params.with_shift(delta)
    params0 = problem.params.with_shift(0.0)
    F = problem.F.values
    w = problem.grid.quadrature_weights(problem.bc)
    sign = -1.0 if symmetry == Symmetry.ODD1D else 1.0

    def projector(values):
        return 0.5 * (values + sign * _reflect(values, problem.grid, problem.bc, symmetry))

    def apply_map(values, ell):
        return inv.solve(F - eval_truncated(params, ell, values))

    def update_norm_of(values):
        return float(np.sqrt(np.sum(w * np.abs(values) ** 2)))

    def residual_of(values):
        r = inv.lap @ values + eval_nonlinearity(params0, values) - F
        return update_norm_of(r)

    def linf_of(values):
        return float(np.max(np.abs(values))) if values.size else 0.0

    ell = _initial_ell(problem, config, delta)
    start = np.zeros_like(F)
    vals, diag, converged, residual, its, ell, trunc, message = _picard_loop(
        start, apply_map, residual_of, linf_of, update_norm_of, config, ell, projector=projector)
    return SolveResult(
        u=Field(problem.grid, vals, problem.bc),
        residual=residual,
        iterations=its,
        final_ell=ell,
        truncation_active=trunc,
        converged=converged,
        diagnostics=diag,
        delta_shift=delta,
        message=message,
    )


def uniqueness_probe(problem: Problem, config: SolverConfig, trials: int) -> dict:
    """Solve from several seeded random initial guesses and report the
    largest pairwise L2 distance among the converged results.  Per-trial
    failures are recorded and the probe continues."""
    if trials < 2:
        raise ValueError("at least two trials are required")
    rng = np.random.default_rng(config.seed)
    n = problem.grid.num_nodes(problem.bc)
    delta = _resolve_delta(problem, config)
    scale = max(1.0, map_norm_bound(problem, delta, _initial_ell(problem, config, delta)))
    results = []
    errors = []
    for trial in range(trials):
        start = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * scale / math.sqrt(n)
        u0 = Field(problem.grid, start, problem.bc)
        try:
            res = solve(problem, config, u0=u0)
        except RuntimeError as exc:
            errors.append({"trial": trial, "error": str(exc)})
            continue
        if res.converged:
            results.append(res)
        else:
            errors.append({"trial": trial, "error": res.message})
    max_dist = 0.0
    for i in range(len(results)):
        for j in range(i + 1, len(results)):
            d = results[i].u.values - results[j].u.values
            max_dist = max(max_dist, l2_norm(results[i].u.with_values(d)))
    return {
        "max_pairwise_l2_distance": max_dist,
        "converged_trials": len(results),
        "failed_trials": errors,
        "trials": trials,
    }
