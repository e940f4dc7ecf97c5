"""Command line front end: single runs, refinement studies, stability
sweeps, and jump presets.

Single runs are described by a small JSON config naming one of the
registered problem presets plus the numerical parameters; `--set key=value`
overrides individual entries after the file is parsed.  Outputs are
plot-ready CSV profiles plus a run manifest (config echo, wall time, step
count, fixed-point iteration stats).

Exit codes: 0 success; 1 the solver failed mid-run; 2 invalid or missing
configuration (bad flags, unknown problem, empty sweep); 3 the stability
sweep judged at least one tuple unstable (distinct from a crash).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import collision as col
from . import harness, stability
from .core import ConfigError, SchemeConfig, SolverError

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3

# ============================================================
# Run configuration
# ============================================================

_RUN_REQUIRED = ("problem", "order", "eps", "n")
_RUN_KEYS = frozenset(_RUN_REQUIRED) | {"cfl", "dt", "t_final", "limiter",
                                        "write_f"}

_RIEMANN_PRESETS = {
    "telegraph": "telegraph_riemann",
    "advdiff": "advdiff_riemann",
    "burgers": "burgers_riemann",
    "onegroup-isotropic": "onegroup_isotropic",
}


@dataclass(frozen=True)
class RunPlan:
    """One fully resolved single run: preset plus numerics."""

    config: dict
    problem: harness.SmoothProblem | harness.RiemannProblem
    order: int
    eps: float
    n: int
    dt: float
    n_steps: int
    limiter: bool
    write_f: bool


def _parse_override(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"override must look like key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _load_json(path: str, what: str) -> dict:
    try:
        with open(path) as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path!r}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} {path!r} is not valid JSON: {exc}"
                          ) from None
    if not isinstance(data, dict):
        raise ConfigError(f"{what} root must be a JSON object")
    return data


def _positive(data: dict, key: str) -> float:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key {key!r} must be a number")
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise ConfigError(f"config key {key!r} must be positive and finite, "
                          f"got {value}")
    return value


def resolve_run(data: dict) -> RunPlan:
    """Validate a run config document and bind it to a problem preset."""
    unknown = set(data) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in _RUN_REQUIRED:
        if key not in data:
            raise ConfigError(f"config is missing required key {key!r}")
    name = data["problem"]
    problem = (harness.SMOOTH_PROBLEMS.get(name)
               or harness.RIEMANN_PROBLEMS.get(name))
    if problem is None:
        raise ConfigError(f"unknown problem {name!r}")
    order = data["order"]
    if order not in (1, 2):
        raise ConfigError(f"order must be 1 or 2, got {order!r}")
    eps = _positive(data, "eps")
    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 4:
        raise ConfigError(f"config key 'n' must be an integer of at "
                          f"least 4, got {n!r}")
    if ("cfl" in data) == ("dt" in data):
        raise ConfigError("config needs exactly one of 'cfl' or 'dt'")
    dx = (problem.hi - problem.lo) / n
    dt = _positive(data, "dt") if "dt" in data else _positive(data, "cfl") * dx
    if "t_final" in data:
        t_final = _positive(data, "t_final")
    elif isinstance(problem, harness.SmoothProblem):
        t_final = problem.t_final
    else:
        t_final = problem.t_final(eps)
    limiter = data.get("limiter", False)
    write_f = data.get("write_f", False)
    for key, value in (("limiter", limiter), ("write_f", write_f)):
        if not isinstance(value, bool):
            raise ConfigError(f"config key {key!r} must be a boolean")
    # dry-run the scheme config so collision/limiter clashes surface here
    SchemeConfig(eps=eps, dt=dt, order=order, collision=problem.collision(eps),
                 limiter_enabled=limiter).validate()
    return RunPlan(config=dict(data), problem=problem, order=order, eps=eps,
                   n=n, dt=dt, n_steps=harness._steps_for(t_final, dt),
                   limiter=limiter, write_f=write_f)


def load_run_plan(path: str, overrides: list[str] | None) -> RunPlan:
    data = _load_json(path, "config")
    for text in overrides or []:
        key, value = _parse_override(text)
        data[key] = value
    return resolve_run(data)


# ============================================================
# CSV output
# ============================================================

def _write_rho_csv(path: str, x: np.ndarray, rho: np.ndarray) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "rho"])
        for xi, ri in zip(x, rho):
            writer.writerow([f"{xi:.8e}", f"{ri:.8e}"])


def _write_f_csv(path: str, x: np.ndarray, f: np.ndarray) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["x"] + [f"f{k}" for k in range(f.shape[0])])
        for i, xi in enumerate(x):
            writer.writerow([f"{xi:.8e}"] + [f"{v:.8e}" for v in f[:, i]])


# ============================================================
# Subcommands
# ============================================================

def _execute_plan(plan: RunPlan, out_dir: str, threads: int,
                  command: str) -> int:
    os.makedirs(out_dir, exist_ok=True)
    picard: list[int] | None = None
    if isinstance(plan.problem.collision(plan.eps), col.Burgers):
        picard = []
    start = time.perf_counter()
    if isinstance(plan.problem, harness.SmoothProblem):
        grid, vs, state = harness.run_smooth(
            plan.problem, plan.order, plan.eps, plan.n, plan.dt,
            plan.n_steps, threads=threads, limiter=plan.limiter)
    else:
        grid, vs, state = harness.run_riemann(
            plan.problem, plan.order, plan.eps, plan.n, plan.dt,
            plan.n_steps, threads=threads, limiter=plan.limiter,
            picard_counts=picard)
    wall = time.perf_counter() - start

    rho_path = os.path.join(out_dir, "rho.csv")
    _write_rho_csv(rho_path, grid.x, state.rho)
    written = [rho_path]
    if plan.write_f:
        f_path = os.path.join(out_dir, "f.csv")
        _write_f_csv(f_path, grid.x, state.f)
        written.append(f_path)

    manifest = {
        "command": command,
        "config": plan.config,
        "steps": plan.n_steps,
        "t_end": plan.n_steps * plan.dt,
        "wall_seconds": wall,
        "threads": threads,
        "picard": None if picard is None else {
            "per_step": picard,
            "min": min(picard),
            "max": max(picard),
            "total": sum(picard),
        },
    }
    manifest_path = os.path.join(out_dir, "run_manifest.json")
    with open(manifest_path, "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    written.append(manifest_path)
    print(f"{plan.config['problem']}: {plan.n_steps} steps to "
          f"t={plan.n_steps * plan.dt:.6g} in {wall:.2f} s")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    plan = load_run_plan(args.config, args.set)
    return _execute_plan(plan, args.out, args.threads, "run")


def cmd_validate(args: argparse.Namespace) -> int:
    plan = load_run_plan(args.config, None)
    print(f"ok: {plan.config['problem']} order {plan.order} eps "
          f"{plan.eps:g}, {plan.n_steps} steps of dt={plan.dt:.6e}")
    return EXIT_OK


def cmd_riemann(args: argparse.Namespace) -> int:
    data = {
        "problem": _RIEMANN_PRESETS[args.preset],
        # jump data: keep the monotone first-order variant
        "order": 1,
        "eps": args.eps,
        "n": args.n,
        "cfl": args.cfl,
    }
    plan = resolve_run(data)
    return _execute_plan(plan, ".", args.threads, "riemann")


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}"
                          ) from None


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}"
                          ) from None


def cmd_converge(args: argparse.Namespace) -> int:
    n_list = _parse_int_list(args.n)
    if args.dt_list is not None:
        # fixed mesh, explicit step sizes: each dt is snapped to a whole
        # number of steps of the problem's final time
        if len(n_list) != 1:
            raise ConfigError("--dt-list needs exactly one mesh size in --n")
        problem = harness.SMOOTH_PROBLEMS.get(args.problem)
        if problem is None:
            raise ConfigError(f"unknown study problem {args.problem!r}")
        entries = [harness._steps_for(problem.t_final, dt)
                   for dt in _parse_float_list(args.dt_list)]
        rule: harness.DtRule = harness.TemporalFixedMesh(n_list[0])
        n_list = entries
    else:
        rule = harness.CflFactor(args.cfl)
    rows = harness.convergence_study(args.problem, args.order, args.eps,
                                     n_list, rule, threads=args.threads)
    path = harness.study_filename(args.problem, args.order, args.eps)
    harness.write_study_csv(rows, path)
    title = f"{args.problem} order {args.order} eps {args.eps:g}"
    print(harness.format_study_table(rows, title=title), end="")
    print(f"wrote {path}")
    return EXIT_OK


# ============================================================
# Stability sweeps
# ============================================================

DEFAULT_DX = tuple(10.0 ** -j for j in range(1, 5))
DEFAULT_DT_OVER_DX = tuple(10.0 ** k for k in range(-3, 4))
DEFAULT_EPS = tuple(10.0 ** k for k in range(-10, 6))

_GRID_KEYS = frozenset({"dx", "dt_over_dx", "eps", "n_omega", "inject"})


def _decode_matrix(entry: object) -> np.ndarray:
    """One injected mode matrix: entries real or [re, im] pairs."""
    try:
        arr = np.asarray(entry, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError("injected matrices must be numeric arrays"
                          ) from None
    if arr.ndim == 3 and arr.shape[0] == arr.shape[1] and arr.shape[2] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
        return arr.astype(complex)
    raise ConfigError("injected matrices must be square, entries real "
                      "or [re, im]")


def _float_list(data: dict, key: str) -> list[float]:
    value = data[key]
    if not isinstance(value, list):
        raise ConfigError(f"grid key {key!r} must be a list of numbers")
    out = []
    for item in value:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"grid key {key!r} must be a list of numbers")
        out.append(float(item))
    return out


def cmd_stability(args: argparse.Namespace) -> int:
    n_omega = 500
    inject: list[np.ndarray] = []
    if args.grid == "default":
        dx_set, fac_set, eps_set = DEFAULT_DX, DEFAULT_DT_OVER_DX, DEFAULT_EPS
    else:
        data = _load_json(args.grid, "sweep grid")
        unknown = set(data) - _GRID_KEYS
        if unknown:
            raise ConfigError(f"unknown grid keys: {sorted(unknown)}")
        for key in ("dx", "dt_over_dx", "eps"):
            if key not in data:
                raise ConfigError(f"sweep grid is missing key {key!r}")
        dx_set = _float_list(data, "dx")
        fac_set = _float_list(data, "dt_over_dx")
        eps_set = _float_list(data, "eps")
        if "n_omega" in data:
            n_omega = int(data["n_omega"])
        inject = [_decode_matrix(entry) for entry in data.get("inject", [])]

    rows = stability.sweep((args.order,), dx_set, fac_set, eps_set,
                           n_omega=n_omega)
    path = f"stability_{args.order}.csv"
    with open(path, "w", newline="") as handle:
        handle.write(stability.report_csv(rows))
    bad = len(stability.unstable_rows(rows))
    print(f"order {args.order}: {len(rows)} tuples swept, {bad} unstable; "
          f"wrote {path}")
    for idx, mat in enumerate(inject):
        verdict = stability.assess_matrices(mat)
        state = "stable" if verdict.stable else "UNSTABLE"
        print(f"inject[{idx}]: {state}, max modulus "
              f"{verdict.max_modulus:.6e}")
        bad += not verdict.stable
    return EXIT_UNSTABLE if bad else EXIT_OK


# ============================================================
# Entry point
# ============================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sltransport",
        description="Semi-Lagrangian kinetic transport solver in the "
                    "diffusive scaling: runs, studies, stability sweeps.")
    parser.add_argument("--threads", type=int, default=1,
                        help="cap worker parallelism; 1 is deterministic")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_run = sub.add_parser("run", help="advance one configured problem to "
                                       "its final time")
    p_run.add_argument("--config", required=True, help="JSON config file")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry after the file parse")
    p_run.set_defaults(handler=cmd_run)

    p_con = sub.add_parser("converge", help="refinement study with error "
                                            "and order table")
    p_con.add_argument("--problem", required=True)
    p_con.add_argument("--order", type=int, choices=(1, 2), required=True)
    p_con.add_argument("--eps", type=float, required=True)
    p_con.add_argument("--n", required=True,
                       help="comma-separated mesh sizes (or one mesh size "
                            "with --dt-list)")
    group = p_con.add_mutually_exclusive_group(required=True)
    group.add_argument("--cfl", type=float, help="dt = cfl * dx per row")
    group.add_argument("--dt-list", help="comma-separated step sizes on a "
                                         "fixed mesh")
    p_con.set_defaults(handler=cmd_converge)

    p_sta = sub.add_parser("stability", help="amplification sweep over a "
                                             "parameter grid")
    p_sta.add_argument("--order", type=int, choices=(1, 2), required=True)
    p_sta.add_argument("--grid", default="default",
                       help="'default' or a JSON file with dx, dt_over_dx, "
                            "eps lists (optional n_omega, inject)")
    p_sta.set_defaults(handler=cmd_stability)

    p_rie = sub.add_parser("riemann", help="first-order jump preset run")
    p_rie.add_argument("--preset", required=True,
                       choices=sorted(_RIEMANN_PRESETS))
    p_rie.add_argument("--eps", type=float, required=True)
    p_rie.add_argument("--n", type=int, required=True,
                       help="interval count")
    p_rie.add_argument("--cfl", type=float, required=True)
    p_rie.set_defaults(handler=cmd_riemann)

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(handler=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
