"""Independent oracles used by the test suite.

The Newton oracle solves the same discrete nonlinear system as the
production solver but by a completely different route: real/imaginary
splitting, an assembled Jacobian with a regularized singular block, and a
line search on the residual norm.  It never touches the fixed-point map,
the shift or the truncation, so agreement with the damped Picard result is
a genuine two-route check.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from singnls.mesh import Field, discrete_laplacian, l2_norm
from singnls.nonlinearity import eval_nonlinearity
from singnls.solver import Problem

_JAC_REG = 1e-13  # radius floor when differentiating |u|^(m-1) u


def _split(z: np.ndarray) -> np.ndarray:
    return np.concatenate([z.real, z.imag])


def _join(w: np.ndarray) -> np.ndarray:
    n = w.size // 2
    return w[:n] + 1j * w[n:]


def _complex_mult_blocks(z: complex, n: int):
    """2x2 block structure of multiplication by the complex scalar z."""
    re = sp.identity(n) * z.real
    im = sp.identity(n) * z.imag
    return sp.bmat([[re, -im], [im, re]], format="csr")


def _singular_jacobian(u: np.ndarray, m: float) -> sp.csr_matrix:
    """Real-split Jacobian of u -> |u|^(m-1) u, radius clamped near zero."""
    x, y = u.real, u.imag
    r = np.maximum(np.abs(u), _JAC_REG)
    rm3 = r ** (m - 3.0)
    rm1 = r ** (m - 1.0)
    dxx = rm1 + (m - 1.0) * rm3 * x * x
    dxy = (m - 1.0) * rm3 * x * y
    dyy = rm1 + (m - 1.0) * rm3 * y * y
    return sp.bmat(
        [[sp.diags(dxx), sp.diags(dxy)], [sp.diags(dxy), sp.diags(dyy)]],
        format="csr",
    )


def newton_solve(problem: Problem, tol: float = 1e-12, max_iter: int = 60,
                 u0: np.ndarray | None = None) -> Field:
    """Damped Newton on G(u) = -Lap u + f(u) - F = 0.

    Starts from the solution of the linear part (a = 0) unless an initial
    guess is supplied.  Raises RuntimeError on failure to converge.
    """
    lap = discrete_laplacian(problem.grid, problem.bc)
    n = lap.shape[0]
    t = problem.params.coeffs
    params = problem.params.with_shift(0.0)
    F = problem.F.values

    def residual(u: np.ndarray) -> np.ndarray:
        return lap @ u + eval_nonlinearity(params, u) - F

    def res_norm(u: np.ndarray) -> float:
        return l2_norm(Field(problem.grid, residual(u), problem.bc))

    if u0 is None:
        # linear-part initial guess; shift by +1 if b alone is singular
        lin = (lap + sp.diags(np.full(n, t.b, dtype=np.complex128))
               + sp.diags((t.c * params.V**2).astype(np.complex128)))
        try:
            u = spla.splu(lin.tocsc().astype(np.complex128)).solve(F)
        except RuntimeError:
            u = np.zeros(n, dtype=np.complex128)
        if not np.all(np.isfinite(u)):
            u = np.zeros(n, dtype=np.complex128)
    else:
        u = np.asarray(u0, dtype=np.complex128).copy()

    lap_split = sp.bmat([[lap, None], [None, lap]], format="csr")
    b_block = _complex_mult_blocks(t.b, n)
    if t.c != 0:
        v2 = params.V**2
        cv_block = sp.bmat(
            [[sp.diags(t.c.real * v2), sp.diags(-t.c.imag * v2)],
             [sp.diags(t.c.imag * v2), sp.diags(t.c.real * v2)]],
            format="csr",
        )
    else:
        cv_block = None
    a_block = _complex_mult_blocks(t.a, n)

    g = res_norm(u)
    for _ in range(max_iter):
        if g <= tol:
            return Field(problem.grid, u, problem.bc)
        jac = lap_split + b_block + a_block @ _singular_jacobian(u, t.m)
        if cv_block is not None:
            jac = jac + cv_block
        step = _join(spla.spsolve(jac.tocsc(), -_split(residual(u))))
        lam = 1.0
        for _ in range(40):
            trial = u + lam * step
            g_trial = res_norm(trial)
            if g_trial < g:
                u, g = trial, g_trial
                break
            lam *= 0.5
        else:
            raise RuntimeError("newton line search stalled")
    if g <= tol:
        return Field(problem.grid, u, problem.bc)
    raise RuntimeError(f"newton did not reach tolerance, residual {g:.3e}")
