"""Config-file parsing, complex-number formatting, builders and exporters.

Run configs are sectioned key = value text files (INI syntax) with decimal
literals; complex numbers are written as "re+imi" strings ("2-1i", "i",
"-0.5").  All randomness used anywhere in a run flows from the single
[solver] seed so repeated runs are byte-identical.
"""

from __future__ import annotations

import configparser
import json
import re
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientTriple
from .mesh import (
    BoundaryKind,
    Domain,
    DomainKind,
    Field,
    Grid,
    boundary_distance,
    build_grid,
)
from .nonlinearity import NonlinearityParams
from .solver import Problem, SolverConfig

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_complex",
    "format_complex",
    "load_config",
    "build_grid_from_config",
    "build_problem",
    "export_field_csv",
    "load_field_csv",
    "grid_metadata",
    "dump_json",
]

_COMPLEX_RE = re.compile(
    r"^\s*(?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?"
    r"\s*(?P<im>[+-]\s*(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)?\s*(?P<i>i)?\s*$"
)


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def parse_complex(text: str) -> complex:
    """Parse 're+imi' strings: '1', '-2.5', 'i', '-i', '2i', '1-2i', '1e-3+2.5e2i'."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ConfigError("empty complex literal")
    m = _COMPLEX_RE.match(s)
    if not m:
        raise ConfigError(f"cannot parse complex literal {text!r}")
    re_part, im_part, i_flag = m.group("re"), m.group("im"), m.group("i")
    try:
        if i_flag is None:
            if im_part is not None or re_part is None:
                raise ConfigError(f"cannot parse complex literal {text!r}")
            return complex(float(re_part), 0.0)
        # trailing i: the imaginary coefficient is im_part if present, else re_part
        if im_part is not None:
            coeff = im_part
            if coeff in ("+", "-"):
                coeff += "1"
            real = float(re_part) if re_part is not None else 0.0
            return complex(real, float(coeff))
        coeff = re_part if re_part is not None else "1"
        return complex(0.0, float(coeff))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex literal {text!r}") from exc


def format_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0.0:
        return repr(z.real)
    if z.real == 0.0:
        return f"{z.imag!r}i"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


@dataclass
class RunConfig:
    domain: Domain
    n: tuple[int, ...]
    bc: BoundaryKind
    coeffs: CoefficientTriple
    source: dict
    potential: dict
    solver: SolverConfig
    weight: dict | None
    out_dir: str
    sweep: dict | None = None


def _get(section, key, default=None):
    if key in section:
        return section[key]
    if default is None:
        raise ConfigError(f"missing key {key!r} in section [{section.name}]")
    return default


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}") from exc


def load_config(path: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        read = cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not read:
        raise ConfigError(f"config file not found: {path}")

    try:
        dom_sec = cp["domain"]
    except KeyError:
        raise ConfigError("missing [domain] section") from None
    kind_s = _get(dom_sec, "kind").strip().lower()
    bounds = _parse_floats(_get(dom_sec, "bounds"))
    if kind_s == "interval":
        if len(bounds) != 2:
            raise ConfigError("interval bounds need two numbers: lo, hi")
        domain = Domain(DomainKind.INTERVAL, ((bounds[0], bounds[1]),))
    elif kind_s == "rectangle":
        if len(bounds) != 4:
            raise ConfigError("rectangle bounds need four numbers: xlo, xhi, ylo, yhi")
        domain = Domain(DomainKind.RECTANGLE, ((bounds[0], bounds[1]), (bounds[2], bounds[3])))
    else:
        raise ConfigError(f"unknown domain kind {kind_s!r}")
    n_tokens = _get(dom_sec, "n").split(",")
    try:
        n = tuple(int(tok) for tok in n_tokens)
    except ValueError as exc:
        raise ConfigError(f"cannot parse interior counts {dom_sec['n']!r}") from exc
    if len(n) == 1:
        n = n * domain.dim
    bc_s = _get(dom_sec, "bc", "dirichlet").strip().lower()
    try:
        bc = BoundaryKind(bc_s)
    except ValueError:
        raise ConfigError(f"unknown boundary kind {bc_s!r}") from None

    try:
        co = cp["coefficients"]
        coeffs = CoefficientTriple(
            a=parse_complex(_get(co, "a")),
            b=parse_complex(_get(co, "b")),
            c=parse_complex(_get(co, "c", "0")),
            m=float(_get(co, "m")),
        )
    except KeyError:
        raise ConfigError("missing [coefficients] section") from None
    except ValueError as exc:
        raise ConfigError(f"bad coefficients: {exc}") from exc

    source: dict = {"builtin": "zero", "scale": complex(1.0)}
    if cp.has_section("source"):
        sec = cp["source"]
        if "csv" in sec:
            source = {"csv": sec["csv"]}
        else:
            source = {"builtin": _get(sec, "builtin", "zero").strip().lower()}
        source["scale"] = parse_complex(_get(sec, "scale", "1"))
        if "value" in sec:
            source["value"] = parse_complex(sec["value"])
        if "beta" in sec:
            source["beta"] = float(sec["beta"])

    potential: dict = {"builtin": "zero"}
    if cp.has_section("potential"):
        sec = cp["potential"]
        if "csv" in sec:
            potential = {"csv": sec["csv"]}
        else:
            potential = {"builtin": _get(sec, "builtin", "zero").strip().lower()}

    sc = SolverConfig()
    if cp.has_section("solver"):
        sec = cp["solver"]
        try:
            delta_s = sec.get("delta", "auto").strip().lower()
            sc = SolverConfig(
                delta_shift=None if delta_s == "auto" else float(delta_s),
                damping=float(sec.get("damping", "0.5")),
                tol_update=float(sec.get("tol_update", "1e-10")),
                tol_residual=float(sec.get("tol_residual", "1e-8")),
                max_iter=int(sec.get("max_iter", "5000")),
                ell0=None if sec.get("ell0", "auto").strip().lower() == "auto" else float(sec["ell0"]),
                ell_growth=float(sec.get("ell_growth", "2.0")),
                seed=int(sec.get("seed", "0")),
            )
        except ValueError as exc:
            raise ConfigError(f"bad solver section: {exc}") from exc

    weight = None
    if cp.has_section("weight"):
        sec = cp["weight"]
        try:
            weight = {
                "alpha": float(_get(sec, "alpha")),
                "kind": _get(sec, "kind", "distance").strip().lower(),
            }
        except ValueError as exc:
            raise ConfigError(f"bad weight section: {exc}") from exc

    sweep = None
    if cp.has_section("sweep"):
        sec = cp["sweep"]
        sweep = {"axis": _get(sec, "axis"), "values": _get(sec, "values")}

    out_dir = "out"
    if cp.has_section("output"):
        out_dir = cp["output"].get("dir", "out")

    return RunConfig(domain=domain, n=n, bc=bc, coeffs=coeffs, source=source,
                     potential=potential, solver=sc, weight=weight, out_dir=out_dir,
                     sweep=sweep)


def build_grid_from_config(rc: RunConfig) -> Grid:
    try:
        return build_grid(rc.domain, rc.n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _builtin_source_values(name: str, grid: Grid, bc: BoundaryKind, spec: dict) -> np.ndarray:
    pts = grid.points(bc)
    if name == "zero":
        return np.zeros(pts.shape[0], dtype=np.complex128)
    if name == "constant":
        value = spec.get("value", complex(1.0))
        return np.full(pts.shape[0], complex(value), dtype=np.complex128)
    if name in ("sine", "cosine"):
        fn = np.sin if name == "sine" else np.cos
        vals = np.ones(pts.shape[0])
        for ax, (lo, hi) in enumerate(grid.domain.bounds):
            xi = (pts[:, ax] - lo) / (hi - lo)
            vals = vals * fn(np.pi * xi)
        return vals.astype(np.complex128)
    if name == "delta_pow":
        beta = spec.get("beta")
        if beta is None:
            raise ConfigError("delta_pow source needs a beta exponent")
        if bc != BoundaryKind.DIRICHLET:
            raise ConfigError("delta_pow source is defined for the zero-trace problem")
        delta = boundary_distance(grid)
        return (delta ** (-float(beta))).astype(np.complex128)
    raise ConfigError(f"unknown source builtin {name!r}")


def _builtin_potential_values(name: str, grid: Grid, bc: BoundaryKind) -> np.ndarray:
    pts = grid.points(bc)
    if name == "zero":
        return np.zeros(pts.shape[0])
    if name == "harmonic":
        return np.sum(pts**2, axis=1)
    raise ConfigError(f"unknown potential builtin {name!r}")


def build_problem(rc: RunConfig, grid: Grid | None = None) -> Problem:
    if grid is None:
        grid = build_grid_from_config(rc)
    if "csv" in rc.source:
        F_vals = load_field_csv(rc.source["csv"], grid, rc.bc)
    else:
        name = rc.source.get("builtin", "zero")
        F_vals = _builtin_source_values(name, grid, rc.bc, rc.source)
    F_vals = F_vals * complex(rc.source.get("scale", 1.0))
    if "csv" in rc.potential:
        V_vals = load_field_csv(rc.potential["csv"], grid, rc.bc).real
    else:
        V_vals = _builtin_potential_values(rc.potential.get("builtin", "zero"), grid, rc.bc)
    source_exponent = float(rc.source["beta"]) if rc.source.get("builtin") == "delta_pow" else None
    params = NonlinearityParams(coeffs=rc.coeffs, V=V_vals)
    return Problem(grid=grid, bc=rc.bc, params=params,
                   F=Field(grid, F_vals, rc.bc), source_exponent=source_exponent)


# ---------------------------------------------------------------------------
# exporters / loaders
# ---------------------------------------------------------------------------

def export_field_csv(f: Field, path: str):
    """Write node coordinates plus Re/Im/abs columns, one row per node."""
    pts = f.grid.points(f.bc)
    header = ",".join(["x", "y"][: f.grid.dim] + ["re_u", "im_u", "abs_u"])
    data = np.column_stack([pts, f.values.real, f.values.imag, np.abs(f.values)])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17e")


def load_field_csv(path: str, grid: Grid, bc: BoundaryKind) -> np.ndarray:
    """Read a field CSV back; coordinates must match the grid nodes."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read field csv {path}: {exc}") from exc
    pts = grid.points(bc)
    dim = grid.dim
    if data.shape[0] != pts.shape[0] or data.shape[1] < dim + 2:
        raise ConfigError(f"field csv {path} does not match the grid layout")
    if not np.allclose(data[:, :dim], pts, atol=1e-9):
        raise ConfigError(f"field csv {path} node coordinates do not match the grid")
    return data[:, dim] + 1j * data[:, dim + 1]


def grid_metadata(grid: Grid, bc: BoundaryKind) -> dict:
    return {
        "kind": grid.domain.kind.value,
        "bounds": [list(b) for b in grid.domain.bounds],
        "n": list(grid.n),
        "h": list(grid.h),
        "bc": bc.value,
        "num_nodes": grid.num_nodes(bc),
    }


def dump_json(obj, path: str):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
