"""Macro-micro time stepping in one space dimension.

Each step advances the density through an implicit solve (backward Euler,
or BDF2 once history exists) whose right-hand side carries an explicit
characteristic-tracked transport correction; every discrete velocity then
advances through its own implicit upwind relaxation solve driven by the
new density; finally the density is replaced by the velocity average of
the new distribution, which conserves mass exactly on periodic grids.

Boundary handling on bounded grids is the close-loop treatment: inflow
velocities read prescribed edge data, outflow values are extrapolated
from the interior, and every stencil or characteristic request beyond the
domain resolves to those edge values.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import collision as col
from ._linalg import (solve_banded_wrapped, solve_recurrence_first,
                      solve_recurrence_second)
from .core import (ConfigError, Grid, KineticState, SchemeConfig, SolverError,
                   VelocitySpace, velocity_average)
from .semilag import (FieldSampler, base_shift, bias_for,
                      characteristic_shift, derivative_at_feet,
                      limited_explicit_flux_divergence,
                      limited_implicit_coefficients, limiter_values)

# Below this ratio the transported term cannot influence the update at
# double precision; skipping it avoids 0 * inf and characteristic offsets
# too large to index.
TRANSPORT_SKIP = 1e-300


# ============================================================
# Close-loop boundary treatment
# ============================================================

@dataclass(frozen=True)
class BoundaryCondition:
    """Prescribed inflow data at the two edges of a bounded axis.

    Each callable maps (velocity array, time) to edge values; only the
    inflow half of the velocities (v > 0 on the left, v < 0 on the right)
    is ever read from it.
    """

    f_left: Callable[[np.ndarray, float], np.ndarray]
    f_right: Callable[[np.ndarray, float], np.ndarray]

    @staticmethod
    def constant(left: float, right: float) -> "BoundaryCondition":
        return BoundaryCondition(
            f_left=lambda v, t: np.full(np.shape(v), float(left)),
            f_right=lambda v, t: np.full(np.shape(v), float(right)))


@dataclass(frozen=True)
class BoundaryResolution:
    """Edge values per velocity plus the half-range edge densities."""

    f_left: np.ndarray
    f_right: np.ndarray
    rho_left: float
    rho_right: float


def resolve_boundary(f: np.ndarray, vs: VelocitySpace, grid: Grid,
                     bc: BoundaryCondition, t: float) -> BoundaryResolution:
    """Close-loop edge values from prescribed inflow + extrapolated outflow.

    Outflow components take the linear extrapolation 2*f_1 - f_2 of the
    interior solution to the edge node.  The edge density combines the
    inflow half-range (prescribed) with the outflow half-range
    (extrapolated), both under the normalized quadrature weights.
    """
    f = np.asarray(f, dtype=float)
    v = vs.component(0)
    fl_in = np.asarray(bc.f_left(v, t), dtype=float)
    fr_in = np.asarray(bc.f_right(v, t), dtype=float)
    fl_out = 2.0 * f[:, 1] - f[:, 2]
    fr_out = 2.0 * f[:, -2] - f[:, -3]
    fl = np.where(v > 0.0, fl_in, fl_out)
    fr = np.where(v < 0.0, fr_in, fr_out)
    w = vs.weights
    return BoundaryResolution(fl, fr, float(w @ fl), float(w @ fr))


# ============================================================
# Step context shared by the macro and micro phases
# ============================================================

@dataclass
class _StepContext:
    order: int                # effective order this step (1 during startup)
    e_fac: float              # exp(-mu*dt)
    bres_n: BoundaryResolution | None
    bres_new: BoundaryResolution | None
    transported: np.ndarray | None


def _prepare(state: KineticState, cfg: SchemeConfig, grid: Grid,
             vs: VelocitySpace, bc: BoundaryCondition | None,
             need_transport: bool = True) -> _StepContext:
    cfg.validate()
    if grid.dim != 1:
        raise ConfigError("this stepper is one-dimensional; use the 2D one")
    axis = grid.axis(0)
    if not axis.periodic and bc is None:
        raise ConfigError("bounded grids need a BoundaryCondition")
    order = 2 if (cfg.order == 2 and state.f_prev is not None) else 1
    e_fac = float(np.exp(-cfg.mu * cfg.dt))
    bres_n = bres_new = None
    if not axis.periodic:
        bres_n = resolve_boundary(state.f, vs, grid, bc, state.t)
        # new-time resolution: prescribed inflow at t+dt, outflow lagged
        # (extrapolated from the current distribution)
        bres_new = resolve_boundary(state.f, vs, grid, bc, state.t + cfg.dt)
    transported = None
    if need_transport:
        transported = transported_term(state.f, state.rho, cfg, grid, vs,
                                       e_fac, bres_n, order)
    return _StepContext(order, e_fac, bres_n, bres_new, transported)


# ============================================================
# Explicit characteristic-tracked transport term
# ============================================================

def transported_term(f_n: np.ndarray, rho_n: np.ndarray, cfg: SchemeConfig,
                     grid: Grid, vs: VelocitySpace, e_fac: float,
                     bres: BoundaryResolution | None = None,
                     order: int | None = None) -> np.ndarray:
    """Velocity average of v*((f)_x - (rho)_x) evaluated at the feet.

    The derivatives use the upwind/downwind-biased stencils of the
    requested order at each velocity's characteristic foot.  Scaled by
    exp(-mu*dt)/eps; returns zeros when that factor underflows.
    """
    axis = grid.axis(0)
    n = axis.n
    if order is None:
        order = cfg.order
    eps, dt, dx = cfg.eps, cfg.dt, axis.dx
    if e_fac == 0.0 or e_fac / eps < TRANSPORT_SKIP:
        return np.zeros(n)
    limited = cfg.limiter_enabled and order == 2
    v = vs.component(0)
    w = vs.weights
    acc = np.zeros(n)
    for k in range(vs.size):
        vk = float(v[k])
        if vk == 0.0:
            continue
        cells, off, sign = characteristic_shift(vk, eps, dt, dx)
        shift = base_shift(cells, sign)
        if bres is None:
            fs = FieldSampler(f_n[k], axis)
            rs = FieldSampler(rho_n, axis)
        else:
            fs = FieldSampler(f_n[k], axis, float(bres.f_left[k]),
                              float(bres.f_right[k]))
            rs = FieldSampler(rho_n, axis, bres.rho_left, bres.rho_right)
        bias_f = bias_for(sign, "f")
        bias_r = bias_for(sign, "rho")
        if limited:
            dfx = limited_explicit_flux_divergence(fs, shift, off, bias_f, dx)
            drx = limited_explicit_flux_divergence(rs, shift, off, bias_r, dx)
        else:
            dfx = derivative_at_feet(fs, shift, off, bias_f, order, dx)
            drx = derivative_at_feet(rs, shift, off, bias_r, order, dx)
        acc += w[k] * vk * (dfx - drx)
    return (e_fac / eps) * acc


# ============================================================
# Macro phase: implicit density solve
# ============================================================

def _add_upwind_band(offsets: dict[int, np.ndarray], advd: float, order: int,
                     n: int, periodic: bool) -> None:
    """Implicit upwind band for an advective density term advd*sigma_x.

    advd carries the sign of the advection speed and the 1/dx factor.
    Bounded grids drop the one-sided three-point rows that would reach a
    ghost column down to the two-point form.
    """

    def ensure(d: int) -> None:
        if d not in offsets:
            offsets[d] = np.zeros(n)

    if advd >= 0.0:
        if order == 1:
            ensure(-1)
            offsets[0] += advd
            offsets[-1] += -advd
        else:
            ensure(-1)
            ensure(-2)
            offsets[0] += 1.5 * advd
            offsets[-1] += -2.0 * advd
            offsets[-2] += 0.5 * advd
            if not periodic:
                offsets[0][1] += -0.5 * advd
                offsets[-1][1] += 1.0 * advd
                offsets[-2][1] += -0.5 * advd
    else:
        if order == 1:
            ensure(1)
            offsets[0] += -advd
            offsets[1] += advd
        else:
            ensure(1)
            ensure(2)
            offsets[0] += -1.5 * advd
            offsets[1] += 2.0 * advd
            offsets[2] += -0.5 * advd
            if not periodic:
                offsets[0][n - 2] += 0.5 * advd
                offsets[1][n - 2] += -1.0 * advd
                offsets[2][n - 2] += 0.5 * advd


def _assemble_macro(rho_n: np.ndarray, rho_prev: np.ndarray | None,
                    transported: np.ndarray, cfg: SchemeConfig, grid: Grid,
                    vs: VelocitySpace, e_fac: float,
                    bres_new: BoundaryResolution | None,
                    rhs_extra: np.ndarray | None,
                    order: int) -> tuple[dict[int, np.ndarray], np.ndarray,
                                         Callable[[np.ndarray], np.ndarray]
                                         | None]:
    axis = grid.axis(0)
    n, dx = axis.n, axis.dx
    bdf2 = order == 2
    a0 = 3.0 if bdf2 else 1.0
    s = (2.0 if bdf2 else 1.0) * cfg.dt
    if bdf2:
        rhs = 4.0 * rho_n - rho_prev
    else:
        rhs = rho_n.astype(float).copy()
    rhs = rhs - s * transported
    kind = cfg.collision
    diff = col.limiting_diffusion_coefficient(kind, vs, cfg.eps)
    lam = s * (1.0 - e_fac) * diff / dx**2
    sig_a = getattr(kind, "sigma_a", 0.0)
    relax = a0 + s * sig_a
    offsets = {0: np.full(n, relax + 2.0 * lam),
               -1: np.full(n, -lam),
               1: np.full(n, -lam)}
    advd = 0.0
    if isinstance(kind, col.AdvDiff):
        advd = s * vs.second_moment(0) * kind.advection * (1.0 - e_fac) / dx
        _add_upwind_band(offsets, advd, order, n, axis.periodic)
    if isinstance(kind, col.OneGroup) and kind.source is not None:
        rhs = rhs + s * np.asarray(kind.source(axis.coords), dtype=float)
    if rhs_extra is not None:
        rhs = rhs + rhs_extra
    if not axis.periodic:
        for row, val in ((0, bres_new.rho_left), (n - 1, bres_new.rho_right)):
            for d in offsets:
                offsets[d][row] = 0.0
            offsets[0][row] = 1.0
            rhs[row] = val
        return offsets, rhs, None

    def apply_split(u: np.ndarray) -> np.ndarray:
        # relaxation + pure difference stencils: column sums telescope
        # exactly, which the pre-added banded diagonal does not
        out = relax * u + lam * (2.0 * u - np.roll(u, 1) - np.roll(u, -1))
        if advd > 0.0:
            du = u - np.roll(u, 1)
            if order == 1:
                out = out + advd * du
            else:
                out = out + advd * (1.5 * du - 0.5 * np.roll(du, 1))
        elif advd < 0.0:
            du = u - np.roll(u, -1)
            if order == 1:
                out = out - advd * du
            else:
                out = out - advd * (1.5 * du - 0.5 * np.roll(du, -1))
        return out

    return offsets, rhs, apply_split


def _solve_offsets(offsets: dict[int, np.ndarray], rhs: np.ndarray,
                   periodic: bool, label: str,
                   apply_op: Callable[[np.ndarray], np.ndarray] | None = None
                   ) -> np.ndarray:
    """Solve the system given as {diagonal offset: per-row coefficients}.

    Out-of-range columns wrap on periodic grids and must carry zero
    coefficients on bounded ones.
    """
    n = rhs.shape[0]
    ds = sorted(offsets)
    nl, nu = max(0, -ds[0]), max(0, ds[-1])
    ab = np.zeros((nl + nu + 1, n))
    wrap: list[tuple[int, int, float]] = []
    for d, coef in offsets.items():
        lo = max(0, -d)
        hi = n - max(0, d)
        if hi > lo:
            ab[nu - d, lo + d:hi + d] = coef[lo:hi]
        for i in list(range(0, lo)) + list(range(hi, n)):
            val = float(coef[i])
            if val == 0.0:
                continue
            if not periodic:
                raise SolverError(f"{label}: bounded row {i} references a "
                                  f"ghost column")
            wrap.append((i, (i + d) % n, val))
    return solve_banded_wrapped((nl, nu), ab, rhs, wrap, label=label,
                                apply_op=apply_op)


def _macro_solve(state: KineticState, cfg: SchemeConfig, grid: Grid,
                 vs: VelocitySpace, ctx: _StepContext,
                 rhs_extra: np.ndarray | None = None) -> np.ndarray:
    offsets, rhs, apply_op = _assemble_macro(state.rho, state.rho_prev,
                                             ctx.transported, cfg, grid, vs,
                                             ctx.e_fac, ctx.bres_new,
                                             rhs_extra, ctx.order)
    return _solve_offsets(offsets, rhs, grid.axis(0).periodic, "macro",
                          apply_op=apply_op)


def macro_step(state: KineticState, cfg: SchemeConfig, grid: Grid,
               vs: VelocitySpace,
               bc: BoundaryCondition | None = None) -> np.ndarray:
    """Pre-correction density update (the implicit linear solve)."""
    if isinstance(cfg.collision, col.Burgers):
        raise ConfigError("the quadratic-flux density update is nonlinear; "
                          "use picard_burgers")
    ctx = _prepare(state, cfg, grid, vs, bc)
    return _macro_solve(state, cfg, grid, vs, ctx)


# ============================================================
# Micro phase: per-velocity implicit upwind solves
# ============================================================

def _stiff_source(kind: col.CollisionKind, sigma: np.ndarray,
                  vs: VelocitySpace, eps: float, x: np.ndarray,
                  frozen: tuple[np.ndarray, np.ndarray] | None
                  ) -> np.ndarray:
    """Model-specific stiff source rows, one per velocity."""
    v = vs.component(0)[:, None]
    sig = sigma[None, :]
    if isinstance(kind, col.Telegraph):
        return np.broadcast_to(sig / eps**2, (vs.size, sigma.size))
    if isinstance(kind, col.AdvDiff):
        return (1.0 + kind.advection * eps * v) * sig / eps**2
    if isinstance(kind, col.Burgers):
        rho_it, f_it = frozen
        quad = (rho_it[None, :] - f_it)**2
        return (sig + kind.strength * eps * v * (sig**2 - quad)) / eps**2
    if isinstance(kind, col.OneGroup):
        out = (kind.sigma_s / eps**2) * np.broadcast_to(
            sig, (vs.size, sigma.size)).copy()
        if kind.source is not None:
            out += np.asarray(kind.source(x), dtype=float)[None, :]
        return out
    raise SolverError(f"no micro source for {type(kind).__name__}")


def _micro_solve(state: KineticState, sigma: np.ndarray, cfg: SchemeConfig,
                 grid: Grid, vs: VelocitySpace, ctx: _StepContext,
                 frozen: tuple[np.ndarray, np.ndarray] | None = None,
                 threads: int = 1) -> np.ndarray:
    axis = grid.axis(0)
    n, dx = axis.n, axis.dx
    eps, dt = cfg.eps, cfg.dt
    dt_mu = dt * cfg.mu
    bdf2 = ctx.order == 2
    limited = cfg.limiter_enabled and bdf2
    if isinstance(cfg.collision, col.Burgers) and frozen is None:
        frozen = (state.rho, state.f)
    source = _stiff_source(cfg.collision, sigma, vs, eps, axis.coords, frozen)
    if bdf2:
        base_rhs = 4.0 * state.f - state.f_prev + 2.0 * dt * source
    else:
        base_rhs = state.f + dt * source
    v = vs.component(0)
    f_new = np.empty((vs.size, n))

    def solve_one(k: int) -> None:
        vk = float(v[k])
        rhs = np.array(base_rhs[k], dtype=float)
        theta = dt * abs(vk) / (eps * dx)
        if theta == 0.0:
            f_new[k] = rhs / (3.0 + 2.0 * dt_mu if bdf2 else 1.0 + dt_mu)
            return
        flip = vk < 0.0
        r = rhs[::-1].copy() if flip else rhs
        label = f"micro v[{k}]"
        if axis.periodic:
            inflow = None
        elif vk > 0.0:
            inflow = float(ctx.bres_new.f_left[k])
        else:
            inflow = float(ctx.bres_new.f_right[k])
        if not bdf2:
            a = 1.0 + dt_mu + theta
            if axis.periodic:
                relax = 1.0 + dt_mu

                def apply1(u: np.ndarray) -> np.ndarray:
                    return relax * u + theta * (u - np.roll(u, 1))

                x = solve_recurrence_first(a, theta, r, cyclic=True,
                                           label=label, apply_op=apply1)
            else:
                r[0] = a * inflow
                x = solve_recurrence_first(a, theta, r, cyclic=False,
                                           label=label)
        else:
            d0 = 3.0 + 2.0 * dt_mu
            if axis.periodic and not limited:

                def apply2(u: np.ndarray) -> np.ndarray:
                    du = u - np.roll(u, 1)
                    return d0 * u + theta * (3.0 * du - np.roll(du, 1))

                x = solve_recurrence_second(d0 + 3.0 * theta, -4.0 * theta,
                                            theta, r, cyclic=True,
                                            label=label, apply_op=apply2)
            else:
                fo_n = state.f[k][::-1] if flip else state.f[k]
                if limited:
                    delta = fo_n - np.roll(fo_n, 1)
                    phi = limiter_values(np.roll(delta, 1), delta)
                    if not axis.periodic:
                        phi[0] = phi[1] = 0.0  # rows lacking upwind data
                else:
                    phi = np.ones(n)
                c0, c1, c2 = limited_implicit_coefficients(phi,
                                                           np.roll(phi, 1))
                offsets = {0: d0 + 2.0 * theta * c0,
                           -1: 2.0 * theta * c1,
                           -2: 2.0 * theta * c2}
                apply_lim = None
                if axis.periodic:
                    phi_half = 0.5 * phi

                    def apply_lim(u: np.ndarray) -> np.ndarray:
                        du = u - np.roll(u, 1)
                        w = phi_half * du
                        return d0 * u + (2.0 * theta) * (du + w
                                                         - np.roll(w, 1))
                else:
                    # inflow edge: Dirichlet row; first interior row:
                    # two-point upwind (no second upwind neighbor)
                    offsets[0][0] = 1.0
                    offsets[-1][0] = offsets[-2][0] = 0.0
                    r[0] = inflow
                    offsets[0][1] = d0 + 2.0 * theta
                    offsets[-1][1] = -2.0 * theta
                    offsets[-2][1] = 0.0
                x = _solve_offsets(offsets, r, axis.periodic, label,
                                   apply_op=apply_lim)
        f_new[k] = x[::-1] if flip else x

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(solve_one, range(vs.size)))
    else:
        for k in range(vs.size):
            solve_one(k)
    return f_new


def micro_step(state: KineticState, sigma: np.ndarray, cfg: SchemeConfig,
               grid: Grid, vs: VelocitySpace,
               bc: BoundaryCondition | None = None,
               threads: int = 1) -> np.ndarray:
    """Per-velocity implicit transport-relaxation solves toward sigma."""
    ctx = _prepare(state, cfg, grid, vs, bc, need_transport=False)
    return _micro_solve(state, np.asarray(sigma, dtype=float), cfg, grid, vs,
                        ctx, threads=threads)


def correct_density(f: np.ndarray, vs: VelocitySpace) -> np.ndarray:
    """Velocity average of the new distribution; the official density."""
    return velocity_average(np.asarray(f, dtype=float), vs)


# ============================================================
# Picard iteration for the quadratic-flux model
# ============================================================

def _upwind_gradient(g: np.ndarray, direction: np.ndarray, order: int,
                     axis, left: float | None,
                     right: float | None) -> np.ndarray:
    """One-sided derivative of g, sided by the local advection direction."""
    s = FieldSampler(np.asarray(g, dtype=float), axis, left, right)
    if order == 1:
        back = s(0) - s(-1)
        fwd = s(1) - s(0)
    else:
        back = 0.5 * (3.0 * s(0) - 4.0 * s(-1) + s(-2))
        fwd = 0.5 * (-3.0 * s(0) + 4.0 * s(1) - s(2))
    return np.where(direction >= 0.0, back, fwd) / axis.dx


def _burgers_feet_term(f_n: np.ndarray, rho_n: np.ndarray, cfg: SchemeConfig,
                       grid: Grid, vs: VelocitySpace,
                       ctx: _StepContext) -> np.ndarray:
    """<v^2 * d/dx (rho - f)^2> tracked to the feet, explicit data."""
    axis = grid.axis(0)
    n, dx = axis.n, axis.dx
    eps, dt = cfg.eps, cfg.dt
    if ctx.e_fac == 0.0 or ctx.e_fac / eps < TRANSPORT_SKIP:
        # feet lie astronomically far away and (rho - f)^2 = O(eps^2)
        return np.zeros(n)
    limited = cfg.limiter_enabled and ctx.order == 2
    v = vs.component(0)
    w = vs.weights
    acc = np.zeros(n)
    for k in range(vs.size):
        vk = float(v[k])
        if vk == 0.0:
            continue
        cells, off, sign = characteristic_shift(vk, eps, dt, dx)
        shift = base_shift(cells, sign)
        g = (rho_n - f_n[k])**2
        if ctx.bres_n is None:
            gs = FieldSampler(g, axis)
        else:
            gl = (ctx.bres_n.rho_left - float(ctx.bres_n.f_left[k]))**2
            gr = (ctx.bres_n.rho_right - float(ctx.bres_n.f_right[k]))**2
            gs = FieldSampler(g, axis, gl, gr)
        bias = bias_for(sign, "rho")
        if limited:
            dgx = limited_explicit_flux_divergence(gs, shift, off, bias, dx)
        else:
            dgx = derivative_at_feet(gs, shift, off, bias, ctx.order, dx)
        acc += w[k] * vk * vk * dgx
    return acc


def picard_burgers(state: KineticState, cfg: SchemeConfig, grid: Grid,
                   vs: VelocitySpace, bc: BoundaryCondition | None = None,
                   threads: int = 1
                   ) -> tuple[np.ndarray, np.ndarray, int]:
    """Fixed-point solve of the coupled quadratic-flux update.

    Each sweep solves the density system with the advective flux frozen
    at the previous iterate, then the velocity systems with the frozen
    quadratic source, then re-averages.  Stops when the density change
    drops below picard_tol; returns (sigma, f, iterations).
    """
    kind = cfg.collision
    if not isinstance(kind, col.Burgers):
        raise ConfigError("picard_burgers needs the quadratic-flux collision")
    ctx = _prepare(state, cfg, grid, vs, bc)
    axis = grid.axis(0)
    s = (2.0 if ctx.order == 2 else 1.0) * cfg.dt
    coef = s * kind.strength * (1.0 - ctx.e_fac)
    m2 = vs.second_moment(0)
    feet = _burgers_feet_term(state.f, state.rho, cfg, grid, vs, ctx)
    if axis.periodic:
        g_left = g_right = None
    else:
        g_left = ctx.bres_new.rho_left**2
        g_right = ctx.bres_new.rho_right**2
    rho_it = state.rho.astype(float).copy()
    f_it = state.f.astype(float).copy()
    delta = np.inf
    for iteration in range(1, kind.picard_max_iter + 1):
        grad = _upwind_gradient(rho_it**2, np.sign(rho_it), ctx.order, axis,
                                g_left, g_right)
        rhs_extra = coef * (feet - m2 * grad)
        sig = _macro_solve(state, cfg, grid, vs, ctx, rhs_extra=rhs_extra)
        f_nxt = _micro_solve(state, sig, cfg, grid, vs, ctx,
                             frozen=(rho_it, f_it), threads=threads)
        rho_nxt = correct_density(f_nxt, vs)
        delta = float(np.max(np.abs(rho_nxt - rho_it)))
        rho_it, f_it = rho_nxt, f_nxt
        if delta < kind.picard_tol:
            return sig, f_it, iteration
    raise SolverError(f"Picard iteration did not converge within "
                      f"{kind.picard_max_iter} sweeps (last change "
                      f"{delta:.3e})")


# ============================================================
# Full step
# ============================================================

def step(state: KineticState, cfg: SchemeConfig, grid: Grid,
         vs: VelocitySpace, bc: BoundaryCondition | None = None,
         threads: int = 1, stats: dict | None = None) -> KineticState:
    """One time level: density solve, velocity solves, mass correction."""
    if isinstance(cfg.collision, col.Burgers):
        _, f_new, iterations = picard_burgers(state, cfg, grid, vs, bc,
                                              threads=threads)
        if stats is not None:
            stats["picard_iterations"] = iterations
    else:
        ctx = _prepare(state, cfg, grid, vs, bc)
        sigma = _macro_solve(state, cfg, grid, vs, ctx)
        f_new = _micro_solve(state, sigma, cfg, grid, vs, ctx,
                             threads=threads)
    rho_new = correct_density(f_new, vs)
    return state.advanced(f_new, rho_new, cfg.dt)
