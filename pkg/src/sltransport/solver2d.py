"""Macro-micro time stepping on a doubly periodic plane.

The step mirrors the one-dimensional one: an implicit density solve
(backward Euler, then BDF2 once history exists) carries an explicit
characteristic-tracked transport correction, each spherical quadrature
direction then advances through its own implicit upwind solve in both
axes toward the new density, and the density is finally replaced by the
quadrature average of the new distribution.

Only single-group scattering is supported here.  The scattering rate
may vary over the plane, in which case every relaxation exponential and
diffusion coefficient uses the local rate at the target node.  A
direction-dependent external source feeds both phases: the density
solve receives its quadrature average together with a relaxation-
weighted average of its directional gradient (dropping that flux part
would leave an O(1) defect in the diffusion limit whenever the source
is anisotropic), and each direction's solve receives the source
evaluated at its own quadrature node.
"""

from __future__ import annotations

import csv
import hashlib
import struct
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import collision as col
from .core import (ConfigError, Grid, KineticState, SchemeConfig, SolverError,
                   VelocitySpace, velocity_average)
from .semilag import (base_shift, bias_for, characteristic_shift,
                      derivative_taps)
from .solver1d import TRANSPORT_SKIP, correct_density

_TWO_PI = 2.0 * np.pi


# ============================================================
# Heterogeneous scattering profile and manufactured fields
# ============================================================

def variable_sigma(x: np.ndarray | float,
                   y: np.ndarray | float) -> np.ndarray | float:
    """Radial scattering profile: deep central dip inside the unit circle.

    0.999 c^4 (c + sqrt(2))^2 (c - sqrt(2))^2 + 0.001 for c^2 = x^2 + y^2
    below 1 and exactly 1 outside; the polynomial reaches 0.999 + 0.001
    at c = 1, so the profile is continuous there.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c2 = x * x + y * y
    # (c + s)^2 (c - s)^2 = (c^2 - 2)^2 for s = sqrt(2); no root needed
    poly = 0.999 * c2 * c2 * (c2 - 2.0) ** 2 + 0.001
    out = np.where(c2 < 1.0, poly, 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def _odd_cubic(c: float) -> float:
    # anisotropy profile (c + c^3)/3 of the second velocity component
    return (c + c ** 3) / 3.0


def manufactured_density(t: float, x: np.ndarray | float,
                         y: np.ndarray | float) -> np.ndarray | float:
    """Decaying separable bump exp(-t) sin^2(2 pi x) sin^2(2 pi y)."""
    sx = np.sin(_TWO_PI * np.asarray(x, dtype=float))
    sy = np.sin(_TWO_PI * np.asarray(y, dtype=float))
    return np.exp(-t) * sx * sx * sy * sy


def manufactured_distribution(t: float, x: np.ndarray | float,
                              y: np.ndarray | float, v: np.ndarray,
                              eps: float) -> np.ndarray | float:
    """Exact distribution: the bump density times 1 + eps*(c + c^3)/3.

    c is the second component of the direction v, so the anisotropic
    part is odd on the sphere and averages away exactly.
    """
    c = float(np.asarray(v, dtype=float)[1])
    return manufactured_density(t, x, y) * (1.0 + eps * _odd_cubic(c))


def manufactured_source_2d(t: float, x: np.ndarray | float,
                           y: np.ndarray | float, v: np.ndarray,
                           eps: float) -> np.ndarray | float:
    """Forcing that makes the decaying bump an exact solution.

    Sum of the exact distribution's time derivative, its directional
    gradient divided by eps, and the relaxation residual of the
    anisotropic part divided by eps; assumes unit scattering and zero
    absorption.
    """
    v = np.asarray(v, dtype=float)
    vx, vy = float(v[0]), float(v[1])
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sx = np.sin(_TWO_PI * x)
    cx = np.cos(_TWO_PI * x)
    sy = np.sin(_TWO_PI * y)
    cy = np.cos(_TWO_PI * y)
    decay = np.exp(-t)
    rho = decay * sx * sx * sy * sy
    rho_x = decay * _TWO_PI * 2.0 * sx * cx * sy * sy
    rho_y = decay * _TWO_PI * 2.0 * sx * sx * sy * cy
    aniso = _odd_cubic(vy)
    shape = 1.0 + eps * aniso
    return (-rho * shape + (vx * rho_x + vy * rho_y) * shape / eps
            + rho * aniso / eps)


def manufactured_state(grid: Grid, vs: VelocitySpace, eps: float,
                       t: float = 0.0) -> KineticState:
    """Kinetic state holding the exact manufactured distribution at t."""
    xs, ys = _meshes(grid)
    f = np.empty((vs.size,) + grid.shape())
    for k in range(vs.size):
        f[k] = manufactured_distribution(t, xs, ys, vs.nodes[k], eps)
    return KineticState.from_distribution(f, vs, t=t)


# ============================================================
# Pointwise relaxation data
# ============================================================

@dataclass(frozen=True, eq=False)
class _Relaxation:
    """Relaxation rates and factors; plain floats when scattering is uniform.

    dcoef is 1/(sigma_s + eps^2 sigma_a), the stationary diffusion
    denominator; token identifies the scattering field for factor reuse.
    """

    uniform: bool
    sigma_s: float | np.ndarray
    sigma_a: float
    mu: float | np.ndarray
    e_fac: float | np.ndarray
    dcoef: float | np.ndarray
    token: bytes | None


def _meshes(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    return grid.axis(0).coords[:, None], grid.axis(1).coords[None, :]


def _relaxation_of(kind: col.OneGroup, grid: Grid, eps: float,
                   dt: float) -> _Relaxation:
    sigma_a = float(kind.sigma_a)
    if callable(kind.sigma_s):
        xs, ys = _meshes(grid)
        field = np.broadcast_to(np.asarray(kind.sigma_s(xs, ys), dtype=float),
                                grid.shape()).astype(float)
        if not np.all(field > 0.0):
            raise ConfigError("scattering rate must be positive everywhere")
        mu = field / eps ** 2 + sigma_a
        token = hashlib.sha1(np.ascontiguousarray(field).tobytes()).digest()
        return _Relaxation(False, field, sigma_a, mu, np.exp(-mu * dt),
                           1.0 / (field + eps * eps * sigma_a), token)
    sig = float(kind.sigma_s)
    mu = sig / eps ** 2 + sigma_a
    return _Relaxation(True, sig, sigma_a, mu, float(np.exp(-mu * dt)),
                       1.0 / (sig + eps * eps * sigma_a), None)


# ============================================================
# Explicit characteristic-tracked transport term
# ============================================================

def _deriv_taps(vcomp: float, eps: float, dt: float, dx: float,
                quantity: str, order: int) -> list[tuple[int, float]]:
    """Derivative taps (node shift, weight) along the traversed axis."""
    cells, off, sign = characteristic_shift(vcomp, eps, dt, dx)
    shift = base_shift(cells, sign)
    rel, co = derivative_taps(bias_for(sign, quantity), order, off)
    return [(shift + r, c / dx) for r, c in zip(rel, co)]


def _interp_taps(vcomp: float, eps: float, dt: float, dx: float,
                 order: int) -> list[tuple[int, float]]:
    """Localization taps at the foot along the transverse axis.

    The foot sits `offset` below its base node for either velocity
    sign; first order snaps to the nearer node, second order blends
    the bracketing pair linearly.
    """
    cells, off, sign = characteristic_shift(vcomp, eps, dt, dx)
    if sign == 0:
        return [(0, 1.0)]
    base = base_shift(cells, sign)
    if order == 1:
        return [(base if off <= 0.5 else base - 1, 1.0)]
    return [(base, 1.0 - off), (base - 1, off)]


def _tracked_sum(field: np.ndarray, taps_x: list[tuple[int, float]],
                 taps_y: list[tuple[int, float]]) -> np.ndarray:
    """Tensor-product tap application with independent wrap per axis."""
    acc = np.zeros_like(field)
    for sx, cx in taps_x:
        for sy, cy in taps_y:
            acc += (cx * cy) * np.roll(field, (-sx, -sy), axis=(0, 1))
    return acc


def transported_term_2d(f_n: np.ndarray, rho_n: np.ndarray, cfg: SchemeConfig,
                        grid: Grid, vs: VelocitySpace,
                        e_fac: float | np.ndarray,
                        order: int | None = None) -> np.ndarray:
    """Quadrature average of v.grad(f - rho) tracked to the 2D feet.

    Per direction, the derivative along each axis uses the biased
    stencil of the requested order at that axis' foot coordinate while
    the transverse coordinate is localized by interpolation; both axes
    wrap independently.  Scaled pointwise by exp(-mu*dt)/eps; returns
    zeros when that factor underflows everywhere.
    """
    ax, ay = grid.axis(0), grid.axis(1)
    if order is None:
        order = cfg.order
    eps, dt = cfg.eps, cfg.dt
    top = float(np.max(e_fac))
    if top == 0.0 or top / eps < TRANSPORT_SKIP:
        return np.zeros(grid.shape())
    vx = vs.component(0)
    vy = vs.component(1)
    w = vs.weights
    acc = np.zeros(grid.shape())
    for k in range(vs.size):
        xk, yk = float(vx[k]), float(vy[k])
        fk = f_n[k]
        if xk != 0.0:
            ty = _interp_taps(yk, eps, dt, ay.dx, order)
            dfx = _tracked_sum(fk, _deriv_taps(xk, eps, dt, ax.dx, "f",
                                               order), ty)
            drx = _tracked_sum(rho_n, _deriv_taps(xk, eps, dt, ax.dx, "rho",
                                                  order), ty)
            acc += (w[k] * xk) * (dfx - drx)
        if yk != 0.0:
            tx = _interp_taps(xk, eps, dt, ax.dx, order)
            dfy = _tracked_sum(fk, tx, _deriv_taps(yk, eps, dt, ay.dx, "f",
                                                   order))
            dry = _tracked_sum(rho_n, tx, _deriv_taps(yk, eps, dt, ay.dx,
                                                      "rho", order))
            acc += (w[k] * yk) * (dfy - dry)
    return (e_fac / eps) * acc


# ============================================================
# External source fields
# ============================================================

def _source_fields(kind: col.OneGroup, t_new: float, grid: Grid,
                   vs: VelocitySpace
                   ) -> tuple[np.ndarray | None, np.ndarray | None,
                              np.ndarray | None]:
    """(per-direction source, its average, average directional gradient).

    The gradient average uses centered differences; it feeds the
    relaxation-weighted flux correction of the density solve.
    """
    if kind.source is None:
        return None, None, None
    xs, ys = _meshes(grid)
    g_all = np.empty((vs.size,) + grid.shape())
    for k in range(vs.size):
        try:
            g_all[k] = kind.source(t_new, xs, ys, vs.nodes[k])
        except TypeError as exc:
            raise ConfigError("2D sources take (t, x, y, v)") from exc
    g_avg = velocity_average(g_all, vs)
    dx, dy = grid.axis(0).dx, grid.axis(1).dx
    dgx = (np.roll(g_all, -1, axis=1) - np.roll(g_all, 1, axis=1)) / (2 * dx)
    dgy = (np.roll(g_all, -1, axis=2) - np.roll(g_all, 1, axis=2)) / (2 * dy)
    w = vs.weights
    g_flux = (np.tensordot(w * vs.component(0), dgx, axes=(0, 0))
              + np.tensordot(w * vs.component(1), dgy, axes=(0, 0)))
    return g_all, g_avg, g_flux


# ============================================================
# Step context shared by the macro and micro phases
# ============================================================

@dataclass
class _StepContext2D:
    order: int                 # effective order this step (1 during startup)
    rel: _Relaxation
    transported: np.ndarray | None
    g_all: np.ndarray | None
    g_avg: np.ndarray | None
    g_flux: np.ndarray | None


def _prepare2d(state: KineticState, cfg: SchemeConfig, grid: Grid,
               vs: VelocitySpace,
               need_transport: bool = True) -> _StepContext2D:
    cfg.validate()
    if grid.dim != 2:
        raise ConfigError("this stepper is two-dimensional; use solver1d")
    if not (grid.axis(0).periodic and grid.axis(1).periodic):
        raise ConfigError("the 2D stepper handles periodic grids only")
    if not vs.spherical:
        raise ConfigError("the 2D stepper needs the spherical quadrature")
    kind = cfg.collision
    if not isinstance(kind, col.OneGroup):
        raise ConfigError("the 2D stepper supports single-group scattering "
                          "only")
    if cfg.limiter_enabled:
        raise ConfigError("the slope limiter is one-dimensional")
    order = 2 if (cfg.order == 2 and state.f_prev is not None) else 1
    rel = _relaxation_of(kind, grid, cfg.eps, cfg.dt)
    transported = None
    if need_transport:
        transported = transported_term_2d(state.f, state.rho, cfg, grid, vs,
                                          rel.e_fac, order)
    if order == 2:
        # two-level extrapolation to t+dt; keeps the source explicit while
        # the relaxation stays implicit, so a stiff source never enters the
        # per-direction solves at the new level
        now = _source_fields(kind, state.t, grid, vs)
        old = _source_fields(kind, state.t - cfg.dt, grid, vs)
        g_all, g_avg, g_flux = (
            None if a is None else 2.0 * a - b
            for a, b in zip(now, old))
    else:
        g_all, g_avg, g_flux = _source_fields(kind, state.t + cfg.dt, grid,
                                              vs)
    return _StepContext2D(order, rel, transported, g_all, g_avg, g_flux)


# ============================================================
# Macro phase: implicit density solve with 5-point diffusion
# ============================================================

_MACRO_LU: "OrderedDict[tuple, object]" = OrderedDict()
_MACRO_LU_LIMIT = 4


def _second_difference_eigs(n: int, half: bool) -> np.ndarray:
    # spectrum of the periodic second difference 2 - 2 cos(2 pi m / n)
    m = np.arange(n // 2 + 1 if half else n)
    return 2.0 - 2.0 * np.cos((_TWO_PI / n) * m)


def _macro_lu(relax: float, lam_x: np.ndarray, lam_y: np.ndarray, grid: Grid,
              key: tuple):
    got = _MACRO_LU.get(key)
    if got is not None:
        _MACRO_LU.move_to_end(key)
        return got
    nx, ny = grid.shape()
    idx = np.arange(nx * ny).reshape(nx, ny)
    diag = np.broadcast_to(relax + 2.0 * lam_x + 2.0 * lam_y,
                           (nx, ny)).ravel()
    lx = np.broadcast_to(lam_x, (nx, ny)).ravel()
    ly = np.broadcast_to(lam_y, (nx, ny)).ravel()
    rows = np.tile(idx.ravel(), 5)
    cols = np.concatenate([idx.ravel(),
                           np.roll(idx, 1, axis=0).ravel(),
                           np.roll(idx, -1, axis=0).ravel(),
                           np.roll(idx, 1, axis=1).ravel(),
                           np.roll(idx, -1, axis=1).ravel()])
    vals = np.concatenate([diag, -lx, -lx, -ly, -ly])
    lu = splu(sp.csc_matrix((vals, (rows, cols)), shape=(nx * ny, nx * ny)))
    _MACRO_LU[key] = lu
    while len(_MACRO_LU) > _MACRO_LU_LIMIT:
        _MACRO_LU.popitem(last=False)
    return lu


def _macro_solve_2d(state: KineticState, cfg: SchemeConfig, grid: Grid,
                    vs: VelocitySpace, ctx: _StepContext2D) -> np.ndarray:
    ax, ay = grid.axis(0), grid.axis(1)
    rel = ctx.rel
    bdf2 = ctx.order == 2
    a0 = 3.0 if bdf2 else 1.0
    s = (2.0 if bdf2 else 1.0) * cfg.dt
    if bdf2:
        rhs = 4.0 * state.rho - state.rho_prev
    else:
        rhs = state.rho.astype(float).copy()
    rhs = rhs - s * ctx.transported
    if ctx.g_avg is not None:
        flux_coef = (1.0 - rel.e_fac) * cfg.eps * rel.dcoef
        rhs = rhs + s * ctx.g_avg - s * flux_coef * ctx.g_flux
    relax = a0 + s * rel.sigma_a
    lam_x = s * (1.0 - rel.e_fac) * vs.second_moment(0) * rel.dcoef / ax.dx**2
    lam_y = s * (1.0 - rel.e_fac) * vs.second_moment(1) * rel.dcoef / ay.dx**2
    if rel.uniform:
        denom = (relax
                 + lam_x * _second_difference_eigs(ax.n, False)[:, None]
                 + lam_y * _second_difference_eigs(ay.n, True)[None, :])
        return np.fft.irfft2(np.fft.rfft2(rhs) / denom, s=grid.shape())
    key = (grid.shape(), ax.dx, ay.dx, a0, cfg.dt, cfg.eps, rel.sigma_a,
           rel.token)
    lu = _macro_lu(relax, lam_x, lam_y, grid, key)
    return lu.solve(rhs.ravel()).reshape(grid.shape())


def macro_step2d(state: KineticState, cfg: SchemeConfig, grid: Grid,
                 vs: VelocitySpace) -> np.ndarray:
    """Pre-correction density update (the implicit linear solve)."""
    ctx = _prepare2d(state, cfg, grid, vs)
    return _macro_solve_2d(state, cfg, grid, vs, ctx)


# ============================================================
# Micro phase: per-direction implicit upwind solves
# ============================================================

_FRONTS: dict[tuple[int, int], list[tuple[np.ndarray, np.ndarray]]] = {}


def _fronts(nx: int, ny: int) -> list[tuple[np.ndarray, np.ndarray]]:
    got = _FRONTS.get((nx, ny))
    if got is None:
        got = []
        for s in range(nx + ny - 1):
            i = np.arange(max(0, s - ny + 1), min(s, nx - 1) + 1)
            got.append((i, s - i))
        _FRONTS[(nx, ny)] = got
    return got


def _axis_symbols(thetas: np.ndarray, signs: np.ndarray, n: int, half: bool,
                  bdf2: bool) -> np.ndarray:
    """DFT symbols of the implicit upwind difference along one axis."""
    m = np.arange(n // 2 + 1 if half else n)
    z = np.exp((-2j * np.pi / n) * np.outer(signs, m))
    poly = (3.0 - 4.0 * z + z * z) if bdf2 else (1.0 - z)
    return thetas[:, None] * poly


def _sweep_solve(rhs: np.ndarray, d_keep: np.ndarray, theta_x: float,
                 theta_y: float, bdf2: bool, guess: np.ndarray,
                 label: str) -> np.ndarray:
    """Wavefront solve of the upwind system oriented to positive signs.

    Rows on an anti-diagonal front only reference earlier fronts, so
    each sweep is an exact triangular solve except for the periodic
    wrap couplings, which lag one sweep; their feedback contracts like
    the product of off-diagonal ratios around a lap, so a handful of
    sweeps reaches roundoff.
    """
    nx, ny = rhs.shape
    mult = 3.0 if bdf2 else 1.0
    diag = d_keep + mult * (theta_x + theta_y)
    f = guess.astype(float).copy()
    for _ in range(64):
        before = f.copy()
        for i, j in _fronts(nx, ny):
            acc = rhs[i, j]
            if theta_x != 0.0:
                up = f[(i - 1) % nx, j]
                if bdf2:
                    acc = acc + theta_x * (4.0 * up - f[(i - 2) % nx, j])
                else:
                    acc = acc + theta_x * up
            if theta_y != 0.0:
                up = f[i, (j - 1) % ny]
                if bdf2:
                    acc = acc + theta_y * (4.0 * up - f[i, (j - 2) % ny])
                else:
                    acc = acc + theta_y * up
            f[i, j] = acc / diag[i, j]
        tol = 1e-13 * max(1.0, float(np.max(np.abs(f))))
        if float(np.max(np.abs(f - before))) <= tol:
            return f
    raise SolverError(f"{label}: wrap iteration did not converge")


def _micro_solve_2d(state: KineticState, sigma: np.ndarray, cfg: SchemeConfig,
                    grid: Grid, vs: VelocitySpace, ctx: _StepContext2D,
                    threads: int = 1) -> np.ndarray:
    rel = ctx.rel
    eps, dt = cfg.eps, cfg.dt
    bdf2 = ctx.order == 2
    nx, ny = grid.shape()
    dx, dy = grid.axis(0).dx, grid.axis(1).dx
    src = (rel.sigma_s / eps ** 2) * sigma
    src = np.broadcast_to(src, (vs.size, nx, ny))
    if ctx.g_all is not None:
        src = src + ctx.g_all
    if bdf2:
        base_rhs = 4.0 * state.f - state.f_prev + (2.0 * dt) * src
        d_keep = 3.0 + 2.0 * dt * rel.mu
    else:
        base_rhs = state.f + dt * src
        d_keep = 1.0 + dt * rel.mu
    vx = vs.component(0)
    vy = vs.component(1)
    theta_x = dt * np.abs(vx) / (eps * dx)
    theta_y = dt * np.abs(vy) / (eps * dy)
    if rel.uniform:
        sym_x = _axis_symbols(theta_x, np.sign(vx), nx, False, bdf2)
        sym_y = _axis_symbols(theta_y, np.sign(vy), ny, True, bdf2)
        denom = d_keep + sym_x[:, :, None] + sym_y[:, None, :]
        fhat = np.fft.rfft2(base_rhs, axes=(1, 2)) / denom
        return np.fft.irfft2(fhat, s=(nx, ny), axes=(1, 2))
    d_field = np.broadcast_to(d_keep, (nx, ny))
    f_new = np.empty_like(base_rhs)

    def solve_one(k: int) -> None:
        rhs = base_rhs[k]
        guess = state.f[k]
        d = d_field
        flip_x = vx[k] < 0.0
        flip_y = vy[k] < 0.0
        if flip_x:
            rhs, guess, d = rhs[::-1, :], guess[::-1, :], d[::-1, :]
        if flip_y:
            rhs, guess, d = rhs[:, ::-1], guess[:, ::-1], d[:, ::-1]
        out = _sweep_solve(np.ascontiguousarray(rhs),
                           np.ascontiguousarray(d), float(theta_x[k]),
                           float(theta_y[k]), bdf2,
                           np.ascontiguousarray(guess), f"micro v[{k}]")
        if flip_y:
            out = out[:, ::-1]
        if flip_x:
            out = out[::-1, :]
        f_new[k] = out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(solve_one, range(vs.size)))
    else:
        for k in range(vs.size):
            solve_one(k)
    return f_new


def micro_step2d(state: KineticState, sigma: np.ndarray, cfg: SchemeConfig,
                 grid: Grid, vs: VelocitySpace,
                 threads: int = 1) -> np.ndarray:
    """Per-direction implicit transport-relaxation solves toward sigma."""
    ctx = _prepare2d(state, cfg, grid, vs, need_transport=False)
    return _micro_solve_2d(state, np.asarray(sigma, dtype=float), cfg, grid,
                           vs, ctx, threads=threads)


# ============================================================
# Full step
# ============================================================

def step2d(state: KineticState, cfg: SchemeConfig, grid: Grid,
           vs: VelocitySpace, threads: int = 1) -> KineticState:
    """One time level on the plane: density, directions, correction."""
    ctx = _prepare2d(state, cfg, grid, vs)
    sigma = _macro_solve_2d(state, cfg, grid, vs, ctx)
    f_new = _micro_solve_2d(state, sigma, cfg, grid, vs, ctx, threads=threads)
    rho_new = correct_density(f_new, vs)
    return state.advanced(f_new, rho_new, cfg.dt)


# ============================================================
# Manufactured convergence study
# ============================================================

def manufactured_study(order: int, eps: float, n_list: list[int], dt_rule,
                       threads: int = 1) -> list:
    """Error rows for the decaying-bump run on the unit periodic square.

    dt = factor*dx per row; the run lands on the last whole step before
    t = 1 and both fields are compared there, the distribution at the
    first quadrature node.
    """
    from . import harness
    from .core import LEBEDEV_86, velocity_space
    if not isinstance(dt_rule, harness.CflFactor):
        raise ConfigError("the 2D study varies the mesh; give a CFL factor")
    if not n_list:
        raise ConfigError("a study needs at least one row")
    vs = velocity_space(LEBEDEV_86)

    def source(t, x, y, v):
        return manufactured_source_2d(t, x, y, v, eps)

    kind = col.OneGroup(sigma_s=1.0, sigma_a=0.0, source=source)
    rows: list = []
    prev = None
    for n in n_list:
        n = int(n)
        grid = Grid.periodic_2d((0.0, 1.0, n), (0.0, 1.0, n))
        dx = grid.axis(0).dx
        dt = dt_rule.factor * dx
        n_steps = harness._steps_for(1.0, dt)
        cfg = SchemeConfig(eps=eps, dt=dt, order=order, collision=kind)
        state = manufactured_state(grid, vs, eps)
        for _ in range(n_steps):
            state = step2d(state, cfg, grid, vs, threads=threads)
        t_end = n_steps * dt
        xs, ys = _meshes(grid)
        rho_ex = manufactured_density(t_end, xs, ys)
        f_ex = manufactured_distribution(t_end, xs, ys, vs.nodes[0], eps)
        cell = dx * grid.axis(1).dx
        l1_rho, linf_rho = harness.error_norms(state.rho, rho_ex, cell)
        l1_f, linf_f = harness.error_norms(state.f[0], f_ex, cell)
        row = harness._make_row(n, dt, (l1_rho, linf_rho, l1_f, linf_f), prev)
        rows.append(row)
        prev = row
    return rows


# ============================================================
# Snapshot output
# ============================================================

SNAPSHOT_MAGIC = b"SLT2RHO\x00"


def write_snapshot_csv(path, grid: Grid, rho: np.ndarray) -> None:
    """Write (x, y, rho) rows in scientific notation, x-major order."""
    rho = np.asarray(rho, dtype=float)
    if rho.shape != grid.shape():
        raise ConfigError(f"snapshot shape {rho.shape} does not match the "
                          f"grid {grid.shape()}")
    xs = grid.axis(0).coords
    ys = grid.axis(1).coords
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("x", "y", "rho"))
        for i in range(grid.shape()[0]):
            for j in range(grid.shape()[1]):
                writer.writerow((f"{xs[i]:.8e}", f"{ys[j]:.8e}",
                                 f"{rho[i, j]:.8e}"))


def write_snapshot_binary(path, rho: np.ndarray) -> None:
    """Row-major float64 dump behind a 16-byte (magic, Nx, Ny) header."""
    rho = np.ascontiguousarray(rho, dtype="<f8")
    if rho.ndim != 2:
        raise ConfigError("binary snapshots hold one 2D field")
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<ii", rho.shape[0], rho.shape[1]))
        fh.write(rho.tobytes(order="C"))


def read_snapshot_binary(path) -> np.ndarray:
    """Load a binary snapshot; validates the magic and the payload size."""
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:8] != SNAPSHOT_MAGIC:
            raise ConfigError(f"not a 2D density snapshot: {path}")
        nx, ny = struct.unpack("<ii", head[8:])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if nx <= 0 or ny <= 0 or data.size != nx * ny:
        raise ConfigError(f"snapshot payload does not match its header: "
                          f"{path}")
    return data.reshape(nx, ny).copy()
