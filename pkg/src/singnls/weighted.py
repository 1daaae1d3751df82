"""Boundary-weighted extension: norms in L2 with a dist(x,boundary)^alpha
weight, the Hardy-inequality probe, the weighted weak form with its extra
transport term, and the weighted Galerkin solve.

The weak form pairs the equation against conj(v) * w with w = delta^alpha
(or w = phi1^alpha for the ground-eigenmode weight), which after one
integration by parts contributes the transport term
integral conj(v) grad(u) . grad(w).  Discretely the weak residual of u
against a test vector v is exactly Re(v^H r) for the assembled nodal
residual r, so the solver drives the same object the certificate probes.
Everything here is Dirichlet-only: the weight degenerates at the boundary
and the Hardy inequality needs a vanishing trace.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import (
    BoundaryKind,
    Field,
    Grid,
    boundary_distance,
    first_eigenpair,
)
from .nonlinearity import eval_nonlinearity, eval_truncated
from .solver import Problem, SolveResult, SolverConfig, _picard_loop

__all__ = [
    "WeightKind",
    "WeightConfig",
    "make_weight_config",
    "weighted_l2",
    "hardy_lhs",
    "hardy_check",
    "negative_power_integral",
    "weighted_weak_residual",
    "probe_basis",
    "max_probe_residual",
    "eigen_transport_sign",
    "solve_weighted",
]


class WeightKind(str, Enum):
    BOUNDARY_DISTANCE = "distance"
    FIRST_EIGENFUNCTION = "eigenfunction"
    CONSTANT = "constant"  # test hook: weight 1, zero gradient


@dataclass
class WeightConfig:
    """Weight w = base^alpha on the interior nodes together with the
    discrete operators of the weighted weak form."""

    grid: Grid
    alpha: float
    weight_kind: WeightKind
    base_field: np.ndarray       # delta or phi1 at interior nodes
    weight_field: np.ndarray     # base^alpha at interior nodes
    grad_weight: np.ndarray      # nodal gradient of base^alpha, shape (n, dim)
    stiffness: sp.csr_matrix = field(repr=False, default=None)
    transport: sp.csr_matrix = field(repr=False, default=None)
    mass: sp.csr_matrix = field(repr=False, default=None)
    lambda1: float | None = None


def _difference_matrix(n: int) -> sp.csr_matrix:
    """Face-difference operator for n interior nodes with zero trace:
    (n+1) faces, boundary faces difference against 0."""
    rows, cols, data = [], [], []
    for f in range(n + 1):
        if f > 0:
            rows.append(f); cols.append(f - 1); data.append(-1.0)
        if f < n:
            rows.append(f); cols.append(f); data.append(1.0)
    return sp.csr_matrix((data, (rows, cols)), shape=(n + 1, n))


def _central_matrix(n: int, h: float) -> sp.csr_matrix:
    """Central difference with zero extension outside the interior lattice."""
    upper = np.full(n - 1, 1.0)
    lower = np.full(n - 1, -1.0)
    return (sp.diags([lower, upper], [-1, 1], format="csr") / (2.0 * h)).tocsr()


def _face_midpoints(grid: Grid, axis: int) -> np.ndarray:
    lo, _ = grid.domain.bounds[axis]
    h = grid.h[axis]
    return lo + (np.arange(grid.n[axis] + 1) + 0.5) * h


def _distance_at(grid: Grid, pts: np.ndarray) -> np.ndarray:
    per_axis = []
    for ax, (lo, hi) in enumerate(grid.domain.bounds):
        x = pts[:, ax]
        per_axis.append(np.minimum(x - lo, hi - x))
    return np.min(np.column_stack(per_axis), axis=1)


def _distance_gradient(grid: Grid) -> np.ndarray:
    """Unit gradient of dist(x, boundary); one-sided value on the medial
    axis (a measure-zero tie set)."""
    pts = grid.points(BoundaryKind.DIRICHLET)
    cols = []
    dirs = []
    for ax, (lo, hi) in enumerate(grid.domain.bounds):
        x = pts[:, ax]
        cols.append(x - lo)
        d = np.zeros((pts.shape[0], grid.dim)); d[:, ax] = 1.0
        dirs.append(d)
        cols.append(hi - x)
        d = np.zeros((pts.shape[0], grid.dim)); d[:, ax] = -1.0
        dirs.append(d)
    stacked = np.column_stack(cols)
    choice = np.argmin(stacked, axis=1)
    grad = np.zeros((pts.shape[0], grid.dim))
    for k, d in enumerate(dirs):
        mask = choice == k
        grad[mask] = d[mask]
    return grad


def _assemble_operators(grid: Grid, face_w: list[np.ndarray], node_w: np.ndarray,
                        grad_w: np.ndarray) -> tuple:
    """Stiffness, transport and mass matrices of the weighted weak form."""
    q = grid.quadrature_weights(BoundaryKind.DIRICHLET)
    if grid.dim == 1:
        n = grid.n[0]
        h = grid.h[0]
        D = _difference_matrix(n)
        S = (D.T @ sp.diags(face_w[0] / h) @ D).tocsr()
        C = _central_matrix(n, h)
        T = (sp.diags(q * grad_w[:, 0]) @ C).tocsr()
    else:
        nx, ny = grid.n
        hx, hy = grid.h
        Dx = sp.kron(_difference_matrix(nx), sp.identity(ny), format="csr")
        Dy = sp.kron(sp.identity(nx), _difference_matrix(ny), format="csr")
        qx = (hy / hx) * face_w[0].ravel()
        qy = (hx / hy) * face_w[1].ravel()
        S = (Dx.T @ sp.diags(qx) @ Dx + Dy.T @ sp.diags(qy) @ Dy).tocsr()
        Cx = sp.kron(_central_matrix(nx, hx), sp.identity(ny), format="csr")
        Cy = sp.kron(sp.identity(nx), _central_matrix(ny, hy), format="csr")
        T = (sp.diags(q * grad_w[:, 0]) @ Cx + sp.diags(q * grad_w[:, 1]) @ Cy).tocsr()
    M = sp.diags(q * node_w).tocsr()
    return S, T, M


def _face_weights_distance(grid: Grid, alpha: float) -> list[np.ndarray]:
    out = []
    for ax in range(grid.dim):
        mids = _face_midpoints(grid, ax)
        if grid.dim == 1:
            pts = mids[:, None]
        else:
            other = grid.axis_coords(1 - ax, BoundaryKind.DIRICHLET)
            if ax == 0:
                mesh = np.meshgrid(mids, other, indexing="ij")
            else:
                mesh = np.meshgrid(other, mids, indexing="ij")
            pts = np.column_stack([m.ravel() for m in mesh])
        vals = _distance_at(grid, pts) ** alpha
        shape = (len(mids),) if grid.dim == 1 else (
            (len(mids), len(other)) if ax == 0 else (len(other), len(mids)))
        out.append(vals.reshape(shape))
    return out


def _face_weights_from_nodes(grid: Grid, base: np.ndarray, alpha: float) -> list[np.ndarray]:
    """Face values of base^alpha by averaging nodal base (zero at walls)."""
    arr = base.reshape(grid.shape(BoundaryKind.DIRICHLET))
    out = []
    for ax in range(grid.dim):
        moved = arr[:, None] if grid.dim == 1 else np.moveaxis(arr, ax, 0)
        pad = np.zeros((1,) + moved.shape[1:])
        ext = np.concatenate([pad, moved, pad], axis=0)
        mids = 0.5 * (ext[1:] + ext[:-1])
        vals = mids**alpha
        if grid.dim == 1:
            out.append(vals[:, 0])
        else:
            out.append(np.moveaxis(vals, 0, ax))
    return out


def make_weight_config(grid: Grid, alpha: float, kind: WeightKind | str) -> WeightConfig:
    """Build the weight fields and assembled operators for a grid.

    The distance weight and its gradient use the exact closed forms of the
    box geometry; the eigenmode weight differentiates phi1^alpha with the
    solver's own stencil.
    """
    kind = WeightKind(kind)
    if kind != WeightKind.CONSTANT and not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    n_nodes = grid.num_nodes(BoundaryKind.DIRICHLET)
    lam1 = None
    if kind == WeightKind.BOUNDARY_DISTANCE:
        base = boundary_distance(grid)
        w = base**alpha
        grad = alpha * base[:, None] ** (alpha - 1.0) * _distance_gradient(grid)
        face_w = _face_weights_distance(grid, alpha)
    elif kind == WeightKind.FIRST_EIGENFUNCTION:
        lam1, phi, _ = first_eigenpair(grid)
        base = phi
        w = base**alpha
        grad = np.zeros((n_nodes, grid.dim))
        wa = w.reshape(grid.shape(BoundaryKind.DIRICHLET))
        for ax in range(grid.dim):
            if grid.dim == 1:
                grad[:, ax] = (_central_matrix(grid.n[0], grid.h[0]) @ w).ravel()
            else:
                C = (sp.kron(_central_matrix(grid.n[0], grid.h[0]), sp.identity(grid.n[1]), format="csr")
                     if ax == 0 else
                     sp.kron(sp.identity(grid.n[0]), _central_matrix(grid.n[1], grid.h[1]), format="csr"))
                grad[:, ax] = C @ w
        face_w = _face_weights_from_nodes(grid, base, alpha)
    else:
        base = np.ones(n_nodes)
        w = np.ones(n_nodes)
        grad = np.zeros((n_nodes, grid.dim))
        face_w = [np.ones_like(fw) for fw in _face_weights_distance(grid, 0.5)]
        alpha = 0.0
    if np.any(w <= 0):
        raise ValueError("weight must be positive at interior nodes")
    S, T, M = _assemble_operators(grid, face_w, w, grad)
    return WeightConfig(grid=grid, alpha=alpha, weight_kind=kind, base_field=base,
                        weight_field=w, grad_weight=grad, stiffness=S, transport=T,
                        mass=M, lambda1=lam1)


# ---------------------------------------------------------------------------
# weighted norms and the Hardy probe
# ---------------------------------------------------------------------------

def weighted_l2(f: Field, w_config: WeightConfig, exponent: float = 2.0) -> float:
    """Weighted L2 norm (integral of |f|^2 w)^(1/2); only exponent 2 is used."""
    if exponent != 2.0:
        raise ValueError("only the exponent-2 norm is defined")
    if f.bc != BoundaryKind.DIRICHLET:
        raise ValueError("weighted norms act on zero-trace fields")
    q = f.grid.quadrature_weights(f.bc)
    return float(np.sqrt(np.sum(q * np.abs(f.values) ** 2 * w_config.weight_field)))


def hardy_lhs(f: Field, w_config: WeightConfig) -> float:
    """integral of |f|^2 base^(alpha - 2), the singular side of the Hardy
    inequality (finite because the nodes are offset from the boundary)."""
    q = f.grid.quadrature_weights(f.bc)
    sing = w_config.base_field ** (w_config.alpha - 2.0)
    return float(np.sum(q * np.abs(f.values) ** 2 * sing))


def weighted_h1_sq(f: Field, w_config: WeightConfig) -> float:
    """integral of |grad f|^2 w via the assembled face quadrature."""
    v = f.values
    return float(np.real(np.vdot(v, w_config.stiffness @ v)))


def negative_power_integral(grid: Grid, alpha: float, s: float) -> float:
    """Quadrature of dist^(-s*alpha); integrable for s in (0,1)."""
    q = grid.quadrature_weights(BoundaryKind.DIRICHLET)
    delta = boundary_distance(grid)
    return float(np.sum(q * delta ** (-s * alpha)))


def _sine_mode(grid: Grid, ks: tuple[int, ...]) -> np.ndarray:
    pts = grid.points(BoundaryKind.DIRICHLET)
    vals = np.ones(pts.shape[0])
    for ax, (lo, hi) in enumerate(grid.domain.bounds):
        xi = (pts[:, ax] - lo) / (hi - lo)
        vals = vals * np.sin(ks[ax] * math.pi * xi)
    return vals


def _bump_profile(grid: Grid, beta: float) -> np.ndarray:
    pts = grid.points(BoundaryKind.DIRICHLET)
    vals = np.ones(pts.shape[0])
    for ax, (lo, hi) in enumerate(grid.domain.bounds):
        xi = (pts[:, ax] - lo) / (hi - lo)
        vals = vals * (xi * (1.0 - xi)) ** beta
    return vals


def hardy_check(w_config: WeightConfig, grid: Grid, samples: int, seed: int = 0) -> dict:
    """Empirical lower bound for the optimal Hardy constant.

    Evaluates the ratio lhs/rhs over deterministic probes (low sine modes
    and boundary-concentrating bump profiles) plus ``samples`` seeded
    random combinations of the first modes, and returns the largest ratio
    with the identifier of the field achieving it.  The random fields are
    fixed functions (mode coefficients), so ratios are comparable across
    grid refinements.
    """
    fields: list[tuple[str, np.ndarray]] = []
    max_k = 4
    if grid.dim == 1:
        mode_list = [(k,) for k in range(1, max_k + 1)]
    else:
        mode_list = [(i, j) for i in range(1, max_k + 1) for j in range(1, max_k + 1)]
    for ks in mode_list[: 2 * max_k]:
        fields.append((f"mode{ks}", _sine_mode(grid, ks)))
    for beta in (0.75, 1.0, 1.5, 2.0):
        fields.append((f"bump{beta}", _bump_profile(grid, beta)))
    rng = np.random.default_rng(seed)
    for s in range(samples):
        coeffs = rng.standard_normal(len(mode_list)) / (1.0 + np.arange(len(mode_list))) ** 2
        vals = np.zeros(grid.num_nodes(BoundaryKind.DIRICHLET))
        for ck, ks in zip(coeffs, mode_list):
            vals += ck * _sine_mode(grid, ks)
        fields.append((f"random{s}", vals))

    best = 0.0
    worst_id = None
    ratios = {}
    for fid, vals in fields:
        f = Field(grid, vals, BoundaryKind.DIRICHLET)
        rhs = weighted_h1_sq(f, w_config)
        if rhs <= 0.0:
            continue
        ratio = hardy_lhs(f, w_config) / rhs
        ratios[fid] = ratio
        if ratio > best:
            best, worst_id = ratio, fid
    return {"best_constant_estimate": best, "worst_field_id": worst_id, "ratios": ratios}


# ---------------------------------------------------------------------------
# weighted weak form
# ---------------------------------------------------------------------------

def _nodal_weak_residual(u_vals: np.ndarray, problem: Problem, w_config: WeightConfig) -> np.ndarray:
    fu = eval_nonlinearity(problem.params.with_shift(0.0), u_vals)
    return (w_config.stiffness @ u_vals + w_config.transport @ u_vals
            + w_config.mass @ (fu - problem.F.values))


def weighted_weak_residual(u: Field, problem: Problem, w_config: WeightConfig, v: Field) -> float:
    """Real part of the weighted weak form of the equation tested against v:
    gradient term, transport term, nonlinearity and source, all weighted.
    Vanishes (to discretization accuracy) when u is a weighted solution."""
    r = _nodal_weak_residual(u.values, problem, w_config)
    return float(np.real(np.vdot(v.values, r)))


def probe_basis(grid: Grid, n_modes: int = 20, n_random: int = 20, seed: int = 0) -> list[Field]:
    """Lowest sine modes (exact discrete eigenvectors on boxes) plus seeded
    random complex fields, used to test weak residuals."""
    fields = []
    if grid.dim == 1:
        modes = [(k,) for k in range(1, n_modes + 1)]
    else:
        cand = [(i, j) for i in range(1, n_modes + 1) for j in range(1, n_modes + 1)]
        ext = grid.domain.extents
        cand.sort(key=lambda ks: (ks[0] / ext[0]) ** 2 + (ks[1] / ext[1]) ** 2)
        modes = cand[:n_modes]
    for ks in modes:
        fields.append(Field(grid, _sine_mode(grid, ks), BoundaryKind.DIRICHLET))
    rng = np.random.default_rng(seed)
    n = grid.num_nodes(BoundaryKind.DIRICHLET)
    for _ in range(n_random):
        vals = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        fields.append(Field(grid, vals, BoundaryKind.DIRICHLET))
    return fields


def max_probe_residual(u: Field, problem: Problem, w_config: WeightConfig,
                       probes: list[Field] | None = None) -> float:
    """Largest |weak residual| over the probe basis, each normalized by the
    probe's weighted H1 norm."""
    if probes is None:
        probes = probe_basis(u.grid)
    r = _nodal_weak_residual(u.values, problem, w_config)
    worst = 0.0
    for v in probes:
        den = math.sqrt(weighted_h1_sq(v, w_config) + weighted_l2(v, w_config) ** 2)
        if den == 0.0:
            continue
        worst = max(worst, abs(float(np.real(np.vdot(v.values, r)))) / den)
    return worst


def eigen_transport_sign(u: Field, w_config: WeightConfig) -> float:
    """Re integral of conj(u) grad(u) . grad(w); nonnegative (up to the
    discrete integration-by-parts defect) for the ground-eigenmode weight."""
    v = u.values
    return float(np.real(np.vdot(v, w_config.transport @ v)))


# ---------------------------------------------------------------------------
# weighted solve
# ---------------------------------------------------------------------------

def solve_weighted(problem: Problem, w_config: WeightConfig, config: SolverConfig) -> SolveResult:
    """Damped truncated fixed-point iteration on the weighted weak form.

    The linear solve inverts stiffness + transport + delta * mass; the
    residual is the strong-form defect measured in the weighted L2 norm.
    Warns when the declared source singularity exceeds the admissible rate
    (alpha + 1)/2.
    """
    if problem.bc != BoundaryKind.DIRICHLET:
        raise ValueError("the weighted solve is defined for the zero-trace problem")
    if problem.source_exponent is not None and problem.source_exponent >= (w_config.alpha + 1.0) / 2.0:
        warnings.warn(
            "source singularity rate {:g} is at or beyond the admissible (alpha+1)/2 = {:g}; "
            "quadrature may not converge".format(problem.source_exponent, (w_config.alpha + 1.0) / 2.0),
            RuntimeWarning,
        )
    delta = config.delta_shift
    if delta is None:
        from .solver import default_delta_shift
        delta = default_delta_shift(problem.params, problem.bc)
    A = (w_config.stiffness + w_config.transport + delta * w_config.mass).astype(np.complex128)
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError as exc:
        raise RuntimeError(f"weighted linear solve setup failed: {exc}") from exc

    params = problem.params.with_shift(delta)
    F = problem.F.values
    M = w_config.mass
    q = problem.grid.quadrature_weights(BoundaryKind.DIRICHLET)
    qw = q * w_config.weight_field

    def apply_map(values, ell):
        rhs = M @ (F - eval_truncated(params, ell, values))
        out = lu.solve(rhs)
        if not np.all(np.isfinite(out)):
            raise RuntimeError("weighted linear solve produced non-finite values")
        return out

    def update_norm_of(values):
        return float(np.sqrt(np.sum(qw * np.abs(values) ** 2)))

    def residual_of(values):
        r = _nodal_weak_residual(values, problem, w_config)
        return float(np.sqrt(np.sum(np.abs(r) ** 2 / qw)))

    def linf_of(values):
        return float(np.max(np.abs(values))) if values.size else 0.0

    if config.ell0 is not None:
        ell = float(config.ell0)
    else:
        normF_w = float(np.sqrt(np.sum(qw * np.abs(F) ** 2)))
        ell = max(1.0, 2.0 * normF_w)
    start = np.zeros_like(F)
    vals, diag, converged, residual, its, ell, trunc, message = _picard_loop(
        start, apply_map, residual_of, linf_of, update_norm_of, config, ell)
    return SolveResult(
        u=Field(problem.grid, vals, BoundaryKind.DIRICHLET),
        residual=residual,
        iterations=its,
        final_ell=ell,
        truncation_active=trunc,
        converged=converged,
        diagnostics=diag,
        delta_shift=float(delta),
        message=message,
    )
