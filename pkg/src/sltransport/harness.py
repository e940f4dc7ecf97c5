"""Exact solutions, reference runs, error norms, and convergence studies.

The smooth-problem presets drive grid-refinement and time-refinement
studies against closed-form solutions where one exists; the isotropic
scattering problem has none, so its rows compare against a cached
fine-mesh reference run.  Riemann presets cover the discontinuous tests
with inflow/outflow boundaries and supply the reference runs that stand
in for exact profiles.

Error reporting follows the tables' convention: density errors over the
whole grid plus distribution errors at a single reporting velocity node,
both in the maximum norm and the cell-scaled L1 norm, with observed
orders from successive refinement rows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import collision as col
from .core import (ConfigError, Grid, KineticState, SchemeConfig, SolverError,
                   VelocitySpace, velocity_space)
from .solver1d import BoundaryCondition, step

# ============================================================
# Error function (series below the switch, continued fraction above)
# ============================================================

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
# Below the switch the all-positive expansion converges in a few dozen
# terms; above it the continued fraction for the complement does, and the
# result is folded back as 1 - erfc.  Past the saturation point the
# complement is smaller than one ulp of 1.
_ERF_SERIES_SWITCH = 1.5
_ERF_SATURATION = 6.0
_SERIES_MAX_TERMS = 200
_CF_MAX_ITER = 300


def _erf_series(x: float) -> float:
    # erf(x) = (2x/sqrt(pi)) e^{-x^2} sum_n (2x^2)^n / (1*3*...*(2n+1)),
    # every term positive, so no cancellation
    x2 = 2.0 * x * x
    term = 1.0
    total = 1.0
    for n in range(1, _SERIES_MAX_TERMS):
        term *= x2 / (2 * n + 1)
        total += term
        if term < 1e-17 * total:
            return _TWO_OVER_SQRT_PI * x * math.exp(-x * x) * total
    raise SolverError(f"error-function series did not converge at x={x}")


def _erfc_cf(x: float) -> float:
    # sqrt(pi) e^{x^2} erfc(x) = 1/(x+ 1/(2x+ 2/(x+ 3/(2x+ ...)))),
    # evaluated by the modified Lentz recurrence
    tiny = 1e-300
    val = tiny
    c = val
    d = 0.0
    for n in range(1, _CF_MAX_ITER):
        a = 1.0 if n == 1 else float(n - 1)
        b = x if n % 2 == 1 else 2.0 * x
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        val *= delta
        if abs(delta - 1.0) < 1e-17:
            return val * math.exp(-x * x) / math.sqrt(math.pi)
    raise SolverError(f"complement continued fraction did not converge at x={x}")


def _erf_scalar(x: float) -> float:
    if math.isnan(x):
        return math.nan
    ax = abs(x)
    if ax < _ERF_SERIES_SWITCH:
        val = _erf_series(ax)
    elif ax < _ERF_SATURATION:
        val = 1.0 - _erfc_cf(ax)
    else:
        val = 1.0
    return -val if x < 0.0 else val


def erf(x: float | np.ndarray) -> float | np.ndarray:
    """Gauss error function, accurate to about 1e-15 in double precision."""
    arr = np.asarray(x, dtype=float)
    flat = np.array([_erf_scalar(t) for t in arr.ravel()])
    if arr.ndim == 0:
        return float(flat[0])
    return flat.reshape(arr.shape)


# ============================================================
# Closed-form solutions and equilibrium fluxes
# ============================================================

def exact_telegraph(x: np.ndarray, t: float, eps: float,
                    v: float | np.ndarray | None = None
                    ) -> tuple[np.ndarray, np.ndarray | None]:
    """Decaying sine solution of the two-speed relaxation model.

    Returns (rho, f); f is None when no velocity is supplied.  Passing v
    with shape (K, 1) yields the full (K, N) distribution.
    """
    disc = 1.0 - 4.0 * eps * eps
    if disc < 0.0:
        raise ConfigError(f"the decaying-sine solution needs eps <= 1/2, "
                          f"got {eps}")
    rate = -2.0 / (1.0 + math.sqrt(disc))
    x = np.asarray(x, dtype=float)
    decay = math.exp(rate * t)
    rho = (decay / rate) * np.sin(x)
    if v is None:
        return rho, None
    f = rho + np.asarray(v, dtype=float) * (eps * decay) * np.cos(x)
    return rho, f


def exact_advdiff(x: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Travelling decaying sine of the unit-advection diffusion limit.

    Returns (rho, j) where j is the scaled first moment
    (f(v=1) - f(v=-1))/(2 eps); the distribution is rho + eps*v*j.
    """
    x = np.asarray(x, dtype=float)
    decay = math.exp(-t)
    phase = x - t
    rho = decay * np.sin(phase)
    flux = decay * (np.sin(phase) - np.cos(phase))
    return rho, flux


def exact_riemann_erf(x: np.ndarray, t: float, rho_left: float,
                      rho_right: float) -> np.ndarray:
    """Smoothed-front profile of the advected heat equation at time t > 0."""
    if not t > 0.0:
        raise ConfigError(f"the smoothed-front solution needs t > 0, got {t}")
    x = np.asarray(x, dtype=float)
    mid = 0.5 * (rho_left + rho_right)
    jump = 0.5 * (rho_left - rho_right)
    return mid + jump * erf((t - x) / (2.0 * math.sqrt(t)))


def burgers_equilibrium_j(rho: float | np.ndarray,
                          eps: float) -> float | np.ndarray:
    """Equilibrium flux of the quadratic closure: the root of
    2j + eps^2 j^2 = rho^2 that vanishes with rho."""
    arr = np.asarray(rho, dtype=float)
    out = arr**2 / (1.0 + np.sqrt(1.0 + (arr * eps) ** 2))
    if arr.ndim == 0:
        return float(out)
    return out


# ============================================================
# Error norms
# ============================================================

def error_norms(numeric: np.ndarray, exact: np.ndarray,
                dx: float) -> tuple[float, float]:
    """(L1, Linf) of the difference; dx is the cell measure (dx*dy in 2D)."""
    a = np.asarray(numeric, dtype=float)
    b = np.asarray(exact, dtype=float)
    if a.shape != b.shape:
        raise ConfigError(f"cannot compare fields of shapes {a.shape} "
                          f"and {b.shape}")
    diff = np.abs(a - b)
    return float(dx) * float(diff.sum()), float(diff.max())


# ============================================================
# Time-step rules
# ============================================================

@dataclass(frozen=True)
class CflFactor:
    """dt = factor*dx per row; the run takes floor(T/dt) steps and the
    comparison is made at the landing time n*dt."""

    factor: float

    def __post_init__(self) -> None:
        if not self.factor > 0.0:
            raise ConfigError(f"cfl factor must be positive, got {self.factor}")


@dataclass(frozen=True)
class TemporalFixedMesh:
    """Fixed spatial mesh; each row entry m runs m steps of size T/m."""

    n_cells: int

    def __post_init__(self) -> None:
        if self.n_cells < 4:
            raise ConfigError(f"fixed mesh needs at least 4 cells, "
                              f"got {self.n_cells}")


DtRule = CflFactor | TemporalFixedMesh


# ============================================================
# Problem presets
# ============================================================

@dataclass(frozen=True)
class RefPlan:
    """Mesh, order and time step of a problem's reference run."""

    order: int
    n_cells: int
    dt_factor: float | None = None  # dt = dt_factor*dx when set
    dt_fixed: float | None = None   # absolute dt otherwise


@dataclass(frozen=True)
class SmoothProblem:
    """Periodic problem for refinement studies.

    initial maps (x, v_column, eps) to the (K, N) distribution; exact maps
    (x, v_column, eps, t) to (rho, f) at time t, or is None for problems
    measured against a reference run.
    """

    name: str
    lo: float
    hi: float
    t_final: float
    velocity: str
    collision: Callable[[float], col.CollisionKind]
    initial: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    exact: Callable[[np.ndarray, np.ndarray, float, float],
                    tuple[np.ndarray, np.ndarray]] | None = None
    reference: RefPlan | None = None


@dataclass(frozen=True)
class RiemannProblem:
    """Bounded-domain jump problem with inflow/outflow boundaries.

    n_cells counts intervals, so the grid carries n_cells+1 nodes and the
    standard 5000-interval reference mesh is an exact multiple of the
    usual 200-interval test mesh.  t_final may depend on the regime.
    """

    name: str
    lo: float
    hi: float
    velocity: str
    collision: Callable[[float], col.CollisionKind]
    initial: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    boundary: Callable[[float], BoundaryCondition]
    t_final: Callable[[float], float]
    reference: RefPlan
    exact: Callable[[np.ndarray, float, float], np.ndarray] | None = None


def _telegraph_initial(x: np.ndarray, v: np.ndarray, eps: float) -> np.ndarray:
    _, f = exact_telegraph(x, 0.0, eps, v)
    return f


def _telegraph_fields(x: np.ndarray, v: np.ndarray, eps: float,
                      t: float) -> tuple[np.ndarray, np.ndarray]:
    rho, f = exact_telegraph(x, t, eps, v)
    return rho, f


def _advdiff_fields(x: np.ndarray, v: np.ndarray, eps: float,
                    t: float) -> tuple[np.ndarray, np.ndarray]:
    rho, flux = exact_advdiff(x, t)
    return rho, rho[None, :] + eps * v * flux[None, :]


def _advdiff_initial(x: np.ndarray, v: np.ndarray, eps: float) -> np.ndarray:
    return _advdiff_fields(x, v, eps, 0.0)[1]


def _onegroup_initial(x: np.ndarray, v: np.ndarray, eps: float) -> np.ndarray:
    return (2.0 + np.sin(x))[None, :] - eps * v * np.cos(x)[None, :]


def _step_initial(left: float, right: float
                  ) -> Callable[[np.ndarray, np.ndarray, float], np.ndarray]:
    def init(x: np.ndarray, v: np.ndarray, eps: float) -> np.ndarray:
        rho = np.where(x < 0.0, left, right)
        return np.broadcast_to(rho, (v.shape[0], x.size)).copy()
    return init


def _burgers_initial(x: np.ndarray, v: np.ndarray, eps: float) -> np.ndarray:
    rho = np.where(x < 0.0, 2.0, 1.0)
    flux = burgers_equilibrium_j(rho, eps)
    return rho[None, :] + eps * v * flux[None, :]


def _burgers_boundary(eps: float) -> BoundaryCondition:
    flux_l = burgers_equilibrium_j(2.0, eps)
    flux_r = burgers_equilibrium_j(1.0, eps)
    return BoundaryCondition(
        f_left=lambda v, t: 2.0 + eps * flux_l * np.asarray(v, dtype=float),
        f_right=lambda v, t: 1.0 + eps * flux_r * np.asarray(v, dtype=float))


SMOOTH_PROBLEMS: dict[str, SmoothProblem] = {
    "telegraph_smooth": SmoothProblem(
        name="telegraph_smooth", lo=-math.pi, hi=math.pi, t_final=1.0,
        velocity="discrete_two",
        collision=lambda eps: col.Telegraph(),
        initial=_telegraph_initial, exact=_telegraph_fields,
        reference=RefPlan(order=1, n_cells=5000, dt_factor=0.2)),
    "advdiff_smooth": SmoothProblem(
        name="advdiff_smooth", lo=-math.pi, hi=math.pi, t_final=1.0,
        velocity="discrete_two",
        collision=lambda eps: col.AdvDiff(advection=1.0),
        initial=_advdiff_initial, exact=_advdiff_fields,
        reference=RefPlan(order=1, n_cells=5000, dt_factor=0.2)),
    "onegroup_smooth": SmoothProblem(
        name="onegroup_smooth", lo=-math.pi, hi=math.pi, t_final=1.0,
        velocity="gauss_legendre_16",
        collision=lambda eps: col.OneGroup(sigma_s=1.0),
        initial=_onegroup_initial, exact=None,
        reference=RefPlan(order=2, n_cells=5120, dt_fixed=5e-4)),
}

RIEMANN_PROBLEMS: dict[str, RiemannProblem] = {
    "telegraph_riemann": RiemannProblem(
        name="telegraph_riemann", lo=-1.0, hi=1.0,
        velocity="discrete_two",
        collision=lambda eps: col.Telegraph(),
        initial=_step_initial(2.0, 1.0),
        boundary=lambda eps: BoundaryCondition.constant(2.0, 1.0),
        t_final=lambda eps: 0.25 if eps > 1e-2 else 0.04,
        reference=RefPlan(order=1, n_cells=5000, dt_factor=0.2)),
    "advdiff_riemann": RiemannProblem(
        name="advdiff_riemann", lo=-10.0, hi=10.0,
        velocity="discrete_two",
        collision=lambda eps: col.AdvDiff(advection=1.0),
        initial=_step_initial(4.0, 2.0),
        boundary=lambda eps: BoundaryCondition.constant(4.0, 2.0),
        t_final=lambda eps: 3.0,
        reference=RefPlan(order=1, n_cells=5000, dt_factor=0.2),
        exact=lambda x, t, eps: exact_riemann_erf(x, t, 4.0, 2.0)),
    "burgers_riemann": RiemannProblem(
        name="burgers_riemann", lo=-10.0, hi=10.0,
        velocity="discrete_two",
        collision=lambda eps: col.Burgers(strength=0.5),
        initial=_burgers_initial,
        boundary=_burgers_boundary,
        t_final=lambda eps: 2.0,
        reference=RefPlan(order=1, n_cells=5000, dt_factor=0.2)),
    "onegroup_isotropic": RiemannProblem(
        name="onegroup_isotropic", lo=0.0, hi=1.0,
        velocity="gauss_legendre_16",
        collision=lambda eps: col.OneGroup(sigma_s=1.0),
        initial=lambda x, v, eps: np.zeros((v.shape[0], x.size)),
        boundary=lambda eps: BoundaryCondition.constant(1.0, 0.0),
        t_final=lambda eps: 1.0 if eps > 1e-2 else 2.0,
        reference=RefPlan(order=1, n_cells=1000, dt_factor=0.2)),
}


def designated_node(vs: VelocitySpace) -> int:
    """Index of the reporting velocity node: first in ascending order."""
    return int(np.argmin(vs.component(0)))


# ============================================================
# Single runs
# ============================================================

def _steps_for(t_final: float, dt: float) -> int:
    # floor with a guard so exact divisors are not lost to rounding
    return max(1, int(math.floor(t_final / dt + 1e-9)))


def run_smooth(problem: SmoothProblem, order: int, eps: float, n_cells: int,
               dt: float, n_steps: int, threads: int = 1,
               limiter: bool = False
               ) -> tuple[Grid, VelocitySpace, KineticState]:
    """Advance a periodic preset n_steps levels from its initial data."""
    grid = Grid.periodic(problem.lo, problem.hi, n_cells)
    vs = velocity_space(problem.velocity)
    v = vs.component(0)[:, None]
    state = KineticState.from_distribution(problem.initial(grid.x, v, eps), vs)
    cfg = SchemeConfig(eps=eps, dt=dt, order=order,
                       collision=problem.collision(eps),
                       limiter_enabled=limiter)
    for _ in range(n_steps):
        state = step(state, cfg, grid, vs, threads=threads)
    return grid, vs, state


def run_riemann(problem: RiemannProblem, order: int, eps: float, n_cells: int,
                dt: float, n_steps: int, threads: int = 1,
                limiter: bool = False,
                picard_counts: list[int] | None = None
                ) -> tuple[Grid, VelocitySpace, KineticState]:
    """Advance a bounded preset; n_cells counts intervals (nodes + 1).

    When picard_counts is given, the per-step fixed-point iteration count
    of the quadratic-closure solve is appended to it.
    """
    grid = Grid.bounded(problem.lo, problem.hi, n_cells + 1)
    vs = velocity_space(problem.velocity)
    v = vs.component(0)[:, None]
    state = KineticState.from_distribution(problem.initial(grid.x, v, eps), vs)
    cfg = SchemeConfig(eps=eps, dt=dt, order=order,
                       collision=problem.collision(eps),
                       limiter_enabled=limiter)
    bc = problem.boundary(eps)
    stats: dict | None = {} if picard_counts is not None else None
    for _ in range(n_steps):
        state = step(state, cfg, grid, vs, bc=bc, threads=threads, stats=stats)
        if picard_counts is not None:
            picard_counts.append(stats["picard_iterations"])
    return grid, vs, state


# ============================================================
# Reference solutions
# ============================================================

@dataclass(frozen=True, eq=False)
class ReferenceSolution:
    """Fine-mesh run snapshot: density and the reporting-node distribution."""

    x: np.ndarray
    rho: np.ndarray
    f_node: np.ndarray
    t: float


_REFERENCE_CACHE: dict[tuple, ReferenceSolution] = {}


def reference_solution(problem_id: str, eps: float, threads: int = 1,
                       t_final: float | None = None) -> ReferenceSolution:
    """Fine-mesh run of a preset at its reference plan, cached per regime."""
    if problem_id in SMOOTH_PROBLEMS:
        problem = SMOOTH_PROBLEMS[problem_id]
        t_end = problem.t_final if t_final is None else t_final
    elif problem_id in RIEMANN_PROBLEMS:
        problem = RIEMANN_PROBLEMS[problem_id]
        t_end = problem.t_final(eps) if t_final is None else t_final
    else:
        raise ConfigError(f"unknown problem id {problem_id!r}")
    key = (problem_id, float(eps), float(t_end))
    hit = _REFERENCE_CACHE.get(key)
    if hit is not None:
        return hit
    plan = problem.reference
    if plan.dt_fixed is not None:
        dt = plan.dt_fixed
    else:
        # cell width is span/n_cells on both layouts: periodic grids carry
        # n nodes for n cells, bounded ones n_cells+1 nodes
        dt = plan.dt_factor * (problem.hi - problem.lo) / plan.n_cells
    n_steps = _steps_for(t_end, dt)
    if isinstance(problem, SmoothProblem):
        grid, vs, state = run_smooth(problem, plan.order, eps, plan.n_cells,
                                     dt, n_steps, threads=threads)
    else:
        grid, vs, state = run_riemann(problem, plan.order, eps, plan.n_cells,
                                      dt, n_steps, threads=threads)
    node = designated_node(vs)
    ref = ReferenceSolution(x=grid.x.copy(), rho=state.rho.copy(),
                            f_node=state.f[node].copy(), t=n_steps * dt)
    _REFERENCE_CACHE[key] = ref
    return ref


def sample_reference(ref: ReferenceSolution,
                     x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Linear interpolation of the reference fields onto a coarse grid."""
    x = np.asarray(x, dtype=float)
    return np.interp(x, ref.x, ref.rho), np.interp(x, ref.x, ref.f_node)


# ============================================================
# Convergence studies
# ============================================================

@dataclass(frozen=True)
class ConvergenceRow:
    """One refinement level: errors and orders against the previous row."""

    n_cells: int
    dt: float
    err_linf_rho: float
    order_linf_rho: float | None
    err_l1_rho: float
    order_l1_rho: float | None
    err_linf_f: float
    order_linf_f: float | None
    err_l1_f: float
    order_l1_f: float | None


def observed_order(err_coarse: float | None, err_fine: float) -> float | None:
    """log2 error ratio between successive rows; None when undefined."""
    if err_coarse is None or not (err_coarse > 0.0 and err_fine > 0.0):
        return None
    return math.log2(err_coarse / err_fine)


def _make_row(n_cells: int, dt: float, errors: tuple[float, float, float, float],
              prev: ConvergenceRow | None) -> ConvergenceRow:
    l1_rho, linf_rho, l1_f, linf_f = errors
    return ConvergenceRow(
        n_cells=n_cells, dt=dt,
        err_linf_rho=linf_rho,
        order_linf_rho=observed_order(
            prev.err_linf_rho if prev else None, linf_rho),
        err_l1_rho=l1_rho,
        order_l1_rho=observed_order(prev.err_l1_rho if prev else None, l1_rho),
        err_linf_f=linf_f,
        order_linf_f=observed_order(prev.err_linf_f if prev else None, linf_f),
        err_l1_f=l1_f,
        order_l1_f=observed_order(prev.err_l1_f if prev else None, l1_f))


def convergence_study(problem_id: str, order: int, eps: float,
                      n_list: list[int], dt_rule: DtRule,
                      threads: int = 1) -> list[ConvergenceRow]:
    """Run one refinement study; each entry of n_list is one row.

    Under CflFactor the entries are cell counts; under TemporalFixedMesh
    they are step counts on the rule's fixed mesh (dt = T/steps).
    """
    if problem_id == "twod_manufactured":
        from . import solver2d
        return solver2d.manufactured_study(order, eps, n_list, dt_rule,
                                           threads=threads)
    problem = SMOOTH_PROBLEMS.get(problem_id)
    if problem is None:
        raise ConfigError(f"unknown study problem {problem_id!r}")
    if not n_list:
        raise ConfigError("a study needs at least one row")
    ref = None
    if problem.exact is None:
        ref = reference_solution(problem_id, eps, threads=threads)
    span = problem.hi - problem.lo
    rows: list[ConvergenceRow] = []
    prev: ConvergenceRow | None = None
    for entry in n_list:
        if isinstance(dt_rule, TemporalFixedMesh):
            n_cells = dt_rule.n_cells
            n_steps = int(entry)
            if n_steps < 1:
                raise ConfigError(f"step count must be positive, got {entry}")
            dt = problem.t_final / n_steps
        elif isinstance(dt_rule, CflFactor):
            n_cells = int(entry)
            dt = dt_rule.factor * (span / n_cells)
            n_steps = _steps_for(problem.t_final, dt)
        else:
            raise ConfigError(f"unknown time-step rule {dt_rule!r}")
        grid, vs, state = run_smooth(problem, order, eps, n_cells, dt,
                                     n_steps, threads=threads)
        t_end = n_steps * dt
        node = designated_node(vs)
        if problem.exact is not None:
            v = vs.component(0)[:, None]
            rho_ref, f_ref = problem.exact(grid.x, v, eps, t_end)
            f_node_ref = f_ref[node]
        else:
            rho_ref, f_node_ref = sample_reference(ref, grid.x)
        l1_rho, linf_rho = error_norms(state.rho, rho_ref, grid.dx)
        l1_f, linf_f = error_norms(state.f[node], f_node_ref, grid.dx)
        row = _make_row(n_cells, dt, (l1_rho, linf_rho, l1_f, linf_f), prev)
        rows.append(row)
        prev = row
    return rows


# ============================================================
# Study output
# ============================================================

STUDY_HEADER = ("N", "dt", "err_Linf_rho", "order_Linf_rho", "err_L1_rho",
                "order_L1_rho", "err_Linf_f", "order_Linf_f", "err_L1_f",
                "order_L1_f")


def study_filename(problem_id: str, order: int, eps: float) -> str:
    return f"{problem_id}_{order}_{eps:g}.csv"


def _cell(value: float | None) -> str:
    return "" if value is None else f"{value:.6e}"


def write_study_csv(rows: list[ConvergenceRow], path: str) -> None:
    """Comma-separated study table, scientific notation, empty first orders."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(STUDY_HEADER)
        for r in rows:
            writer.writerow([
                r.n_cells, f"{r.dt:.6e}",
                _cell(r.err_linf_rho), _cell(r.order_linf_rho),
                _cell(r.err_l1_rho), _cell(r.order_l1_rho),
                _cell(r.err_linf_f), _cell(r.order_linf_f),
                _cell(r.err_l1_f), _cell(r.order_l1_f)])


def format_study_table(rows: list[ConvergenceRow],
                       title: str | None = None) -> str:
    """Aligned text rendering of a study, orders shown to two decimals."""
    def order_cell(value: float | None) -> str:
        return f"{value:7.2f}" if value is not None else f"{'--':>7}"

    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'N':>6} {'dt':>12} {'Linf(rho)':>12} {'order':>7} "
                 f"{'L1(rho)':>12} {'order':>7} {'Linf(f)':>12} {'order':>7} "
                 f"{'L1(f)':>12} {'order':>7}")
    for r in rows:
        lines.append(
            f"{r.n_cells:>6} {r.dt:12.4e} "
            f"{r.err_linf_rho:12.4e} {order_cell(r.order_linf_rho)} "
            f"{r.err_l1_rho:12.4e} {order_cell(r.order_l1_rho)} "
            f"{r.err_linf_f:12.4e} {order_cell(r.order_linf_f)} "
            f"{r.err_l1_f:12.4e} {order_cell(r.order_l1_f)}")
    return "\n".join(lines) + "\n"
