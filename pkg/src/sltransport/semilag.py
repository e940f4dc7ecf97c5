"""Characteristic feet and upwind derivative stencils on uniform grids.

The transported part of the macro step needs spatial derivatives of the
distribution and of the density evaluated at the characteristic foot
x - v*dt/eps.  With r = |v|*dt/(eps*dx) the foot lies m = ceil(r)-1 whole
cells upstream plus a fractional offset; for v > 0 the base node is
i* = i - m and the stored offset is xi = r - m in (0, 1], for v < 0 the
base is i* = i + m + 1 with stored offset 1 - xi in [0, 1).  In both cases
offset = (x_{i*} - x_foot)/dx.

Derivative stencils come in two flavors ("bias"): distribution derivatives
lean into the upwind side of the base node, density derivatives lean the
other way.  First-order stencils are two-point differences; second-order
stencils differentiate the quadratic through three nodes exactly at the
foot.  A van Albada limiter can replace the second-order stencils with
flux-limited differences near discontinuities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Axis, ConfigError, Grid

LIMITER_DENOMINATOR_TOL = 1e-14

LEFT = "left"
RIGHT = "right"


# ============================================================
# Foot localization
# ============================================================

@dataclass(frozen=True)
class Foot:
    """Characteristic foot of one velocity: base node, offset, traversal.

    offset = (x_{index} - x_foot)/dx lies in [0, 1]; cells is the whole
    number of cells traversed (m); sign is the sign of the velocity.
    """

    index: int
    offset: float
    cells: int
    sign: int


def characteristic_shift(v: float, eps: float, dt: float,
                         dx: float) -> tuple[int, float, int]:
    """(m, offset, sign) of the foot x - v*dt/eps for every node at once.

    At integer r = |v|dt/(eps*dx) the convention is m = r - 1 with offset 1
    on the positive side (the half-open localization m < r <= m+1).
    """
    if v == 0.0:
        return 0, 0.0, 0
    r = abs(v) * dt / (eps * dx)
    if not math.isfinite(r):
        raise ConfigError("characteristic traversal is not finite; the "
                          "transported term must be skipped before this point")
    m = int(math.ceil(r)) - 1
    xi = r - m  # in (0, 1]
    if v > 0.0:
        return m, xi, 1
    return m, 1.0 - xi, -1


def base_shift(m: int, sign: int) -> int:
    """Base-node shift: i* = i + base_shift."""
    if sign > 0:
        return -m
    if sign < 0:
        return m + 1
    return 0


def locate_foot(i: int, v: float, eps: float, dt: float, grid: Grid) -> Foot:
    """Foot of the characteristic through node i for velocity v."""
    m, offset, sign = characteristic_shift(v, eps, dt, grid.dx)
    return Foot(index=i + base_shift(m, sign), offset=offset, cells=m,
                sign=sign)


def bias_for(sign: int, quantity: str) -> str:
    """Stencil flavor: distribution derivatives lean upwind of the base."""
    if quantity not in ("f", "rho"):
        raise ConfigError(f"quantity must be 'f' or 'rho', got {quantity!r}")
    if sign == 0:
        raise ConfigError("zero velocity has no transported stencil")
    if (sign > 0) == (quantity == "f"):
        return LEFT
    return RIGHT


# ============================================================
# Field sampling with wrap or boundary clamping
# ============================================================

class FieldSampler:
    """Shifted views field[i+k] for all i, wrapping or clamping.

    Periodic axes wrap (any number of laps); bounded axes clamp every
    out-of-range request to the supplied boundary values, matching the
    close-loop boundary treatment.
    """

    def __init__(self, field: np.ndarray, axis: Axis,
                 left: float | None = None, right: float | None = None):
        self.field = np.asarray(field)
        self.periodic = axis.periodic
        self.n = self.field.shape[0]
        if not self.periodic and (left is None or right is None):
            raise ConfigError("bounded sampling needs both boundary values")
        self.left = left
        self.right = right

    def __call__(self, k: int) -> np.ndarray:
        n = self.n
        idx = np.arange(k, k + n)
        if self.periodic:
            return self.field[idx % n]
        out = self.field[np.clip(idx, 0, n - 1)].astype(float, copy=True)
        out[idx < 0] = self.left
        out[idx > n - 1] = self.right
        return out


# ============================================================
# Derivative stencils at the foot
# ============================================================

def _first_coeffs(bias: str) -> tuple[tuple[int, ...], tuple[float, ...]]:
    if bias == LEFT:
        return (-1, -2), (1.0, -1.0)
    return (1, 0), (1.0, -1.0)


def _second_coeffs(bias: str, c: float) -> tuple[tuple[int, ...],
                                                 tuple[float, ...]]:
    if bias == LEFT:
        return (-2, -1, 0), (0.5 * (1 - 2 * c), -0.5 * (4 - 4 * c),
                             0.5 * (3 - 2 * c))
    return (-1, 0, 1), (-0.5 * (1 + 2 * c), 2.0 * c, 0.5 * (1 - 2 * c))


def derivative_taps(bias: str, order: int, offset: float
                    ) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """Relative node taps and weights of the foot derivative stencil.

    Taps are relative to the base node; weights still need the 1/dx
    factor.  The offset only enters the second-order stencil.
    """
    if order == 1:
        return _first_coeffs(bias)
    if order == 2:
        return _second_coeffs(bias, offset)
    raise ConfigError(f"order must be 1 or 2, got {order}")


def derivative_at_feet(sampler: FieldSampler, shift: int, offset: float,
                       bias: str, order: int, dx: float) -> np.ndarray:
    """Derivative of the sampled field at every node's foot, as an array."""
    rel, coeffs = derivative_taps(bias, order, offset)
    acc = coeffs[0] * sampler(shift + rel[0])
    for k, c in zip(rel[1:], coeffs[1:]):
        acc = acc + c * sampler(shift + k)
    return acc / dx


def _pointwise(field: np.ndarray, foot: Foot, quantity: str, grid: Grid,
               order: int, left: float | None, right: float | None) -> float:
    axis = grid.axis(0)
    sampler = FieldSampler(np.asarray(field, dtype=float), axis, left, right)
    bias = bias_for(foot.sign, quantity)
    shift = foot.index  # evaluate the "i = 0" row of the array form
    vals = derivative_at_feet(sampler, shift, foot.offset, bias, order,
                              axis.dx)
    return float(vals[0])


def upwind_first(field: np.ndarray, foot: Foot, quantity: str, grid: Grid,
                 left: float | None = None,
                 right: float | None = None) -> float:
    """First-order derivative of `field` at the foot (two-point upwind)."""
    return _pointwise(field, foot, quantity, grid, 1, left, right)


def offset_second(field: np.ndarray, foot: Foot, quantity: str, grid: Grid,
                  left: float | None = None,
                  right: float | None = None) -> float:
    """Second-order derivative at the foot: exact for quadratics."""
    return _pointwise(field, foot, quantity, grid, 2, left, right)


# ============================================================
# van Albada limiter
# ============================================================

def van_albada(r: float | np.ndarray) -> float | np.ndarray:
    """Smooth slope limiter (r^2 + r)/(r^2 + 1)."""
    r = np.asarray(r, dtype=float)
    out = (r * r + r) / (r * r + 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def limiter_values(upstream: np.ndarray, local: np.ndarray) -> np.ndarray:
    """phi(upstream/local) with degenerate denominators giving phi = 0."""
    out = np.zeros_like(np.asarray(local, dtype=float))
    ok = np.abs(local) > LIMITER_DENOMINATOR_TOL
    r = np.asarray(upstream, dtype=float)[ok] / np.asarray(local)[ok]
    out[ok] = (r * r + r) / (r * r + 1.0)
    return out


def limited_explicit_flux_divergence(sampler: FieldSampler, shift: int,
                                     offset: float, bias: str,
                                     dx: float) -> np.ndarray:
    """Flux-limited replacement of the second-order foot derivative.

    Interface fluxes carry a van Albada-limited slope correction; with
    phi == 1 the divergence reduces exactly to the unlimited second-order
    stencil, with phi == 0 to the first-order one.
    """
    c = offset
    if bias == LEFT:
        g_m3, g_m2, g_m1, g_0 = (sampler(shift - 3), sampler(shift - 2),
                                 sampler(shift - 1), sampler(shift))
        phi_0 = limiter_values(g_m1 - g_m2, g_0 - g_m1)
        phi_m1 = limiter_values(g_m2 - g_m3, g_m1 - g_m2)
        h_0 = g_0 + 0.5 * (1 - 2 * c) * phi_0 * (g_0 - g_m1)
        h_m1 = g_m1 + 0.5 * (1 - 2 * c) * phi_m1 * (g_m1 - g_m2)
        return (h_0 - h_m1) / dx
    g_m1, g_0, g_1, g_2 = (sampler(shift - 1), sampler(shift),
                           sampler(shift + 1), sampler(shift + 2))
    phi_0 = limiter_values(g_1 - g_2, g_0 - g_1)
    phi_m1 = limiter_values(g_0 - g_1, g_m1 - g_0)
    h_0 = g_0 - 0.5 * (1 - 2 * c) * phi_0 * (g_0 - g_1)
    h_m1 = g_m1 - 0.5 * (1 - 2 * c) * phi_m1 * (g_m1 - g_0)
    return (h_0 - h_m1) / dx


def limited_implicit_coefficients(phi_here: np.ndarray,
                                  phi_upwind: np.ndarray
                                  ) -> tuple[np.ndarray, np.ndarray,
                                             np.ndarray]:
    """Row coefficients of the limited implicit advection difference.

    Returns (c0, c1, c2) so the advection part of a row is
    theta * (c0*f_i + c1*f_{i-s} + c2*f_{i-2s}) with s the upwind direction
    and theta the per-velocity Courant factor.  phi arrays are frozen from
    the previous time level.  phi == 1 recovers the three-point one-sided
    second-order band (3/2, -2, 1/2); phi == 0 the first-order (1, -1, 0).
    """
    c0 = 1.0 + 0.5 * phi_here
    c1 = -(1.0 + 0.5 * phi_here + 0.5 * phi_upwind)
    c2 = 0.5 * phi_upwind
    return c0, c1, c2
