"""Command-line front end: check, solve, sweep and hardy subcommands.

Exit codes: 0 success/converged, 1 no existence regime applies (check),
2 solver did not converge, 3 invalid input.  All outputs are deterministic
given the config and seed: JSON is written with sorted keys, CSV with a
fixed float format, and every random draw descends from the config seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import bounds as bounds_mod
from .coefficients import (
    check_existence_admissible_pair,
    check_existence_dissipative,
    check_existence_finite_measure,
    check_uniqueness,
)
from .configio import (
    ConfigError,
    RunConfig,
    build_grid_from_config,
    build_problem,
    dump_json,
    export_field_csv,
    format_complex,
    grid_metadata,
    parse_complex,
    load_config,
)
from .mesh import Domain, DomainKind, l2_norm, h1_seminorm, lp_norm, poincare_constant
from .solver import solve
from .weighted import (
    WeightKind,
    hardy_check,
    make_weight_config,
    max_probe_residual,
    probe_basis,
    solve_weighted,
    weighted_l2,
)

EXIT_OK = 0
EXIT_NO_THEOREM = 1
EXIT_NOT_CONVERGED = 2
EXIT_INVALID = 3


def _ensure_out(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _hypothesis_reports(rc: RunConfig, grid) -> list:
    C_P = poincare_constant(grid).C_P
    reports = [
        check_existence_finite_measure(rc.coeffs.b, C_P),
        check_existence_dissipative(rc.coeffs),
        check_existence_admissible_pair(rc.coeffs),
        check_uniqueness(rc.coeffs),
    ]
    return reports


def cmd_check(rc: RunConfig, out_dir: str) -> int:
    grid = build_grid_from_config(rc)
    reports = _hypothesis_reports(rc, grid)
    payload = [r.to_json() for r in reports]
    dump_json(payload, os.path.join(out_dir, "reports.json"))
    for r in reports:
        print(f"{r.theorem_id.value}: satisfied={r.satisfied} ({r.witness})")
    existence = [r for r in reports if r.theorem_id.value.startswith("Exist")]
    return EXIT_OK if any(r.satisfied for r in existence) else EXIT_NO_THEOREM


def _certificates(result, problem) -> list:
    certs = []
    for fn in (bounds_mod.certify_finite_measure_bound,
               bounds_mod.certify_potential_bound,
               bounds_mod.certify_pair_condition_bound):
        try:
            certs.append(fn(result.u, problem).to_json())
        except bounds_mod.CertificateError:
            continue
    return certs


def cmd_solve(rc: RunConfig, out_dir: str) -> int:
    grid = build_grid_from_config(rc)
    problem = build_problem(rc, grid)
    if rc.weight is not None:
        w_config = make_weight_config(grid, rc.weight["alpha"], rc.weight["kind"])
        result = solve_weighted(problem, w_config, rc.solver)
        probes = probe_basis(grid, seed=rc.solver.seed)
        extra = {
            "weighted_l2_F": weighted_l2(problem.F, w_config),
            "weighted_l2_u": weighted_l2(result.u, w_config),
            "max_probe_residual": max_probe_residual(result.u, problem, w_config, probes),
        }
    else:
        result = solve(problem, rc.solver)
        extra = {}

    export_field_csv(result.u, os.path.join(out_dir, "solution.csv"))
    diag = {
        "grid": grid_metadata(grid, rc.bc),
        "coefficients": {
            "a": format_complex(rc.coeffs.a),
            "b": format_complex(rc.coeffs.b),
            "c": format_complex(rc.coeffs.c),
            "m": rc.coeffs.m,
        },
        "delta_shift": result.delta_shift,
        "converged": result.converged,
        "iterations": result.iterations,
        "residual": result.residual,
        "final_ell": result.final_ell,
        "truncation_active": result.truncation_active,
        "message": result.message,
        "per_iteration": result.diagnostics,
    }
    diag.update(extra)
    dump_json(diag, os.path.join(out_dir, "diagnostics.json"))

    certs = _certificates(result, problem) if rc.weight is None else []
    energy = bounds_mod.energy_identities(result.u, problem)
    payload = {"certificates": certs, "energy_identity_defects": energy}
    dump_json(payload, os.path.join(out_dir, "certificates.json"))

    print(f"converged={result.converged} iterations={result.iterations} "
          f"residual={result.residual:.3e} ell={result.final_ell:g}")
    for cert in certs:
        print(f"{cert['theorem_id']}: lhs={cert['lhs']:.6e} rhs={cert['rhs']:.6e} "
              f"verdict={cert['verdict']}")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _set_axis(rc: RunConfig, axis: str, token: str) -> RunConfig:
    """Return a copy of the run config with one leaf replaced."""
    section, _, key = axis.partition(".")
    token = token.strip()
    if section == "coefficients":
        if key not in ("a", "b", "c", "m"):
            raise ConfigError(f"unknown coefficient axis {key!r}")
        kwargs = {"a": rc.coeffs.a, "b": rc.coeffs.b, "c": rc.coeffs.c, "m": rc.coeffs.m}
        kwargs[key] = float(token) if key == "m" else parse_complex(token)
        return dataclasses.replace(rc, coeffs=type(rc.coeffs)(**kwargs))
    if section == "solver":
        if not hasattr(rc.solver, key):
            raise ConfigError(f"unknown solver axis {key!r}")
        value = float(token) if key not in ("max_iter", "seed") else int(token)
        return dataclasses.replace(rc, solver=dataclasses.replace(rc.solver, **{key: value}))
    if section == "domain":
        if key == "n":
            n = tuple(int(tok) for tok in token.split(","))
            if len(n) == 1:
                n = n * rc.domain.dim
            return dataclasses.replace(rc, n=n)
        if key == "bounds":
            vals = [float(tok) for tok in token.split(",")]
            if rc.domain.kind == DomainKind.INTERVAL and len(vals) == 2:
                dom = Domain(DomainKind.INTERVAL, ((vals[0], vals[1]),))
            elif rc.domain.kind == DomainKind.RECTANGLE and len(vals) == 4:
                dom = Domain(DomainKind.RECTANGLE, ((vals[0], vals[1]), (vals[2], vals[3])))
            else:
                raise ConfigError(f"bounds value {token!r} does not fit the domain kind")
            return dataclasses.replace(rc, domain=dom)
        raise ConfigError(f"unknown domain axis {key!r}")
    if section == "source" and key in ("beta", "scale", "value"):
        src = dict(rc.source)
        src[key] = float(token) if key == "beta" else parse_complex(token)
        return dataclasses.replace(rc, source=src)
    raise ConfigError(f"unsupported sweep axis {axis!r}")


def cmd_sweep(rc: RunConfig, out_dir: str, axis: str, values: list[str]) -> int:
    if not values:
        print("empty sweep values", file=sys.stderr)
        return EXIT_INVALID
    rows = []
    for token in values:
        try:
            rc_i = _set_axis(rc, axis, token)
            grid = build_grid_from_config(rc_i)
            problem = build_problem(rc_i, grid)
            result = solve(problem, rc_i.solver)
            certs = _certificates(result, problem)
            verdicts = {c["theorem_id"]: c["verdict"] for c in certs}
            t = rc_i.coeffs
            rows.append({
                "value": token.strip(),
                "converged": result.converged,
                "iterations": result.iterations,
                "residual": result.residual,
                "final_ell": result.final_ell,
                "l2": l2_norm(result.u),
                "h1_semi": h1_seminorm(result.u),
                "lmp1": lp_norm(result.u, t.m + 1.0),
                "bound1": verdicts.get("Bound1", ""),
                "bound2": verdicts.get("Bound2", ""),
                "bound3": verdicts.get("Bound3", ""),
                "error": "",
            })
        except (ConfigError, RuntimeError, ValueError) as exc:
            rows.append({"value": token.strip(), "converged": False, "iterations": 0,
                         "residual": float("nan"), "final_ell": float("nan"),
                         "l2": float("nan"), "h1_semi": float("nan"), "lmp1": float("nan"),
                         "bound1": "", "bound2": "", "bound3": "", "error": str(exc)})
    columns = ["value", "converged", "iterations", "residual", "final_ell",
               "l2", "h1_semi", "lmp1", "bound1", "bound2", "bound3", "error"]
    path = os.path.join(out_dir, "sweep.csv")
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            cells = []
            for col in columns:
                val = row[col]
                if isinstance(val, float):
                    cells.append(f"{val:.17e}")
                else:
                    cells.append(str(val))
            fh.write(",".join(cells) + "\n")
    print(f"swept {axis} over {len(values)} values -> {path}")
    return EXIT_OK


def cmd_hardy(rc: RunConfig, out_dir: str, samples: int = 20) -> int:
    grid = build_grid_from_config(rc)
    alpha = rc.weight["alpha"] if rc.weight else 0.5
    kind = rc.weight["kind"] if rc.weight else WeightKind.BOUNDARY_DISTANCE.value
    w_config = make_weight_config(grid, alpha, kind)
    report = hardy_check(w_config, grid, samples=samples, seed=rc.solver.seed)
    payload = {
        "alpha": alpha,
        "kind": str(kind),
        "best_constant_estimate": report["best_constant_estimate"],
        "worst_field_id": report["worst_field_id"],
        "ratios": report["ratios"],
    }
    dump_json(payload, os.path.join(out_dir, "hardy.json"))
    print(f"hardy ratio estimate {report['best_constant_estimate']:.6e} "
          f"(worst field {report['worst_field_id']})")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="singnls",
        description="Solve and certify stationary complex Schrodinger problems "
                    "with a singular sublinear term.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("check", "solve", "sweep", "hardy"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        if name == "sweep":
            p.add_argument("--axis", default=None)
            p.add_argument("--values", default=None,
                           help="semicolon-separated list of values")
        if name == "hardy":
            p.add_argument("--samples", type=int, default=20)

    args = parser.parse_args(argv)
    try:
        rc = load_config(args.config)
        if args.seed is not None:
            rc = dataclasses.replace(rc, solver=dataclasses.replace(rc.solver, seed=args.seed))
        out_dir = _ensure_out(args.out or rc.out_dir)
        if args.command == "check":
            return cmd_check(rc, out_dir)
        if args.command == "solve":
            return cmd_solve(rc, out_dir)
        if args.command == "sweep":
            axis = args.axis or (rc.sweep or {}).get("axis")
            values_s = args.values if args.values is not None else (rc.sweep or {}).get("values")
            if not axis or values_s is None:
                print("sweep needs an axis and values", file=sys.stderr)
                return EXIT_INVALID
            values = [tok for tok in values_s.split(";") if tok.strip()]
            return cmd_sweep(rc, out_dir, axis, values)
        if args.command == "hardy":
            return cmd_hardy(rc, out_dir, samples=args.samples)
        return EXIT_INVALID
    except ConfigError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
