"""Pointwise nonlinearity a|u|^(m-1)u + bu + cV^2u, its radial truncation,
and the accretivity pairing used by the uniqueness argument.

The singular factor |u|^(m-1) has a removable singularity at u = 0 for
m > 0 (the product tends to 0); every evaluator here returns exactly 0
there.  All evaluators accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .coefficients import CoefficientTriple
from .mesh import Field

__all__ = [
    "NonlinearityParams",
    "singular_term",
    "eval_nonlinearity",
    "eval_truncated",
    "truncation_sup_bound",
    "monotonicity_pairing",
    "pairing_constant_lower_bound",
]


@dataclass
class NonlinearityParams:
    """Coefficient triple, real potential samples V, and the shift absorbed
    into the truncated nonlinearity."""

    coeffs: CoefficientTriple
    V: np.ndarray
    delta_shift: float = 0.0

    def __post_init__(self):
        self.V = np.asarray(self.V, dtype=np.float64)
        if not np.all(np.isfinite(self.V)):
            raise ValueError("potential V must be finite everywhere")
        if not 0.0 <= self.delta_shift <= 1.0:
            raise ValueError(f"delta_shift must lie in [0,1], got {self.delta_shift}")

    def with_shift(self, delta: float) -> "NonlinearityParams":
        return replace(self, delta_shift=float(delta))


def singular_term(u, m: float):
    """|u|^(m-1) * u with the value 0 at u = 0."""
    u = np.asarray(u, dtype=np.complex128)
    r = np.abs(u)
    out = np.zeros_like(u)
    mask = r > 0.0
    out[mask] = r[mask] ** (m - 1.0) * u[mask]
    return out if out.ndim else complex(out)


def eval_nonlinearity(params: NonlinearityParams, u, v=None):
    """a|u|^(m-1)u + b u + c v^2 u, with v defaulting to the stored potential."""
    t = params.coeffs
    u = np.asarray(u, dtype=np.complex128)
    v = params.V if v is None else np.asarray(v, dtype=np.float64)
    out = t.a * singular_term(u, t.m) + t.b * u
    if t.c != 0:
        out = out + t.c * (v**2) * u
    return out if np.ndim(out) else complex(out)


def eval_truncated(params: NonlinearityParams, ell: float, u, v=None):
    """Radially clamped nonlinearity with the shift delta folded in.

    Below the clamp (|u| <= ell) this evaluates, bitwise, as the plain
    nonlinearity minus delta*u; above it the whole expression rides the
    unit phase u/|u| at amplitude ell, which matches the inner branch on
    |u| = ell and is bounded uniformly in u.
    """
    if not ell > 0.0:
        raise ValueError(f"truncation level must be positive, got {ell}")
    t = params.coeffs
    delta = params.delta_shift
    u = np.asarray(u, dtype=np.complex128)
    v = params.V if v is None else np.asarray(v, dtype=np.float64)

    inner = eval_nonlinearity(params, u, v) - delta * u

    r = np.abs(u)
    big = r > ell
    if not np.any(big):
        return inner if np.ndim(inner) else complex(inner)
    inner = np.asarray(inner, dtype=np.complex128)
    phase = np.zeros_like(u)
    phase[big] = u[big] / r[big]
    coeff = t.a * ell**t.m + (t.b - delta) * ell
    if t.c != 0:
        coeff = coeff + t.c * np.broadcast_to(v**2, u.shape) * ell
    out = np.where(big, np.asarray(coeff, dtype=np.complex128) * phase, inner)
    return out if out.ndim else complex(out)


def truncation_sup_bound(params: NonlinearityParams, ell: float) -> float:
    """Uniform bound |f_trunc(u)| <= |a| ell^m + |b - delta| ell + |c| sup(V^2) ell."""
    t = params.coeffs
    sup_v2 = float(np.max(params.V**2)) if params.V.size else 0.0
    return abs(t.a) * ell**t.m + abs(t.b - params.delta_shift) * ell + abs(t.c) * sup_v2 * ell


def monotonicity_pairing(u1: Field, u2: Field, m: float) -> dict:
    """Accretivity pairing of the pure singular term between two fields.

    Returns the real pairing Re sum w (f0(u1)-f0(u2)) conj(u1-u2) with
    f0(v) = |v|^(m-1) v, together with the reference integral
    sum w |u1-u2|^2 / (|u1|+|u2|)^(1-m) over the nodes where the
    denominator is positive.
    """
    if u1.grid is not u2.grid or u1.bc != u2.bc:
        raise ValueError("fields must share grid and boundary kind")
    w = u1.grid.quadrature_weights(u1.bc)
    d = u1.values - u2.values
    num = (singular_term(u1.values, m) - singular_term(u2.values, m)) * np.conj(d)
    pairing = float(np.sum(w * num.real))
    s = np.abs(u1.values) + np.abs(u2.values)
    mask = s > 0.0
    lower = float(np.sum(w[mask] * np.abs(d[mask]) ** 2 / s[mask] ** (1.0 - m)))
    return {"pairing": pairing, "lower_integral": lower}


def pairing_constant_lower_bound(m: float, n_radius: int = 400, n_angle: int = 400) -> float:
    """Empirical lower bound for the accretivity constant of f0.

    Minimizes the scale- and rotation-invariant ratio

        Re[(f0(z)-f0(w)) conj(z-w)] (|z|+|w|)^(1-m) / |z-w|^2

    over a dense sample of complex pairs; by the symmetries it suffices to
    take w = 1, |z| <= 1.  The pair (0, 1) gives ratio exactly 1 and the
    near-diagonal limit is probed explicitly.  The result depends on the
    sample resolution and certifies only sampled pairs; callers should
    keep a margin.
    """
    if not 0.0 < m < 1.0:
        raise ValueError("m must lie in (0,1)")
    radii = np.linspace(0.0, 1.0, n_radius + 1)[1:]
    angles = np.linspace(0.0, math.pi, n_angle)
    r, phi = np.meshgrid(radii, angles, indexing="ij")
    z = (r * np.exp(1j * phi)).ravel()
    # extra near-diagonal probes, where the ratio approaches its infimum
    eps = np.geomspace(1e-8, 1e-2, 40)
    z = np.concatenate([z, 1.0 - eps, 1.0 + eps * 1j, 1.0 - eps * (1 + 1j) / math.sqrt(2)])
    w = np.ones_like(z)

    dz = z - w
    keep = np.abs(dz) > 1e-12
    z, w, dz = z[keep], w[keep], dz[keep]
    num = ((singular_term(z, m) - singular_term(w, m)) * np.conj(dz)).real
    ratio = num * (np.abs(z) + np.abs(w)) ** (1.0 - m) / np.abs(dz) ** 2
    return float(min(ratio.min(), 1.0))
