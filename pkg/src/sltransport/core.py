"""Grids, velocity quadratures, solver state and run configuration.

Everything downstream (collision closures, semi-Lagrangian stencils, the
1D/2D steppers) builds on the types defined here.  The velocity measure is
normalized so that the average of 1 is 1 (weights sum to one).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration (bad parameters, unknown keys, empty sweeps)."""


class SolverError(RuntimeError):
    """A numerical step failed (solve residual, divergence, bad state)."""


PERIODIC = "periodic"
INFLOW_OUTFLOW = "inflow_outflow"
_BOUNDARIES = (PERIODIC, INFLOW_OUTFLOW)


# ============================================================
# Spatial grid
# ============================================================

@dataclass(frozen=True)
class Axis:
    """One uniform spatial axis.

    Periodic axes store n nodes lo + i*dx with dx = (hi-lo)/n; the node at
    hi is the wrap image of lo.  Bounded (inflow/outflow) axes store both
    endpoints, dx = (hi-lo)/(n-1).
    """

    lo: float
    hi: float
    n: int
    boundary: str = PERIODIC

    def __post_init__(self) -> None:
        if not self.hi > self.lo:
            raise ConfigError(f"axis needs hi > lo, got [{self.lo}, {self.hi}]")
        if self.n < 4:
            raise ConfigError(f"axis needs at least 4 nodes, got {self.n}")
        if self.boundary not in _BOUNDARIES:
            raise ConfigError(f"unknown boundary kind {self.boundary!r}")

    @property
    def periodic(self) -> bool:
        return self.boundary == PERIODIC

    @property
    def dx(self) -> float:
        span = self.hi - self.lo
        return span / self.n if self.periodic else span / (self.n - 1)

    @property
    def coords(self) -> np.ndarray:
        return self.lo + self.dx * np.arange(self.n)


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid in one or two space dimensions."""

    axes: tuple[Axis, ...]

    def __post_init__(self) -> None:
        if len(self.axes) not in (1, 2):
            raise ConfigError("grid must be 1D or 2D")

    @classmethod
    def periodic(cls, lo: float, hi: float, n: int) -> "Grid":
        return cls((Axis(lo, hi, n, PERIODIC),))

    @classmethod
    def bounded(cls, lo: float, hi: float, n: int) -> "Grid":
        return cls((Axis(lo, hi, n, INFLOW_OUTFLOW),))

    @classmethod
    def periodic_2d(cls, xspec: tuple[float, float, int],
                    yspec: tuple[float, float, int]) -> "Grid":
        return cls((Axis(*xspec, PERIODIC), Axis(*yspec, PERIODIC)))

    @property
    def dim(self) -> int:
        return len(self.axes)

    def axis(self, i: int) -> Axis:
        return self.axes[i]

    # 1D sugar used throughout solver1d
    @property
    def dx(self) -> float:
        return self.axes[0].dx

    @property
    def n(self) -> int:
        return self.axes[0].n

    @property
    def x(self) -> np.ndarray:
        return self.axes[0].coords

    @property
    def is_periodic(self) -> bool:
        return all(a.periodic for a in self.axes)

    def shape(self) -> tuple[int, ...]:
        return tuple(a.n for a in self.axes)


# ============================================================
# Velocity quadratures
# ============================================================

DISCRETE_TWO = "discrete_two"
GAUSS_LEGENDRE_16 = "gauss_legendre_16"
LEBEDEV_86 = "lebedev_86"


@dataclass(frozen=True)
class VelocitySpace:
    """Discrete velocity set with a normalized quadrature (weights sum to 1).

    nodes has shape (K,) for 1D velocity sets and (K, 3) for the spherical
    set; weights has shape (K,).
    """

    kind: str
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def spherical(self) -> bool:
        return self.nodes.ndim == 2

    def component(self, axis: int = 0) -> np.ndarray:
        """Signed velocity component along a space axis, shape (K,)."""
        if self.spherical:
            return self.nodes[:, axis]
        if axis != 0:
            raise ConfigError("1D velocity set has a single component")
        return self.nodes

    def average(self, values: np.ndarray) -> np.ndarray:
        """Velocity average along axis 0 of `values`."""
        return np.tensordot(self.weights, values, axes=(0, 0))

    def second_moment(self, axis: int = 0) -> float:
        c = self.component(axis)
        return float(np.sum(self.weights * c * c))


def velocity_average(values: np.ndarray, vs: VelocitySpace) -> np.ndarray:
    """Quadrature average over velocity of an array shaped (K, ...)."""
    return vs.average(values)


def velocity_second_moment(vs: VelocitySpace, axis: int = 0) -> float:
    """Average of the squared velocity component along the given space axis."""
    return vs.second_moment(axis)


def discrete_two() -> VelocitySpace:
    """Two-speed set {+1, -1} with equal weights 1/2."""
    return VelocitySpace(DISCRETE_TWO,
                         np.array([1.0, -1.0]),
                         np.array([0.5, 0.5]))


def _legendre_value_and_derivative(n: int, x: float) -> tuple[float, float]:
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p_prev, p = 1.0, x
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def build_gauss_legendre(n: int = 16, tol: float = 1e-15,
                         max_iter: int = 100) -> VelocitySpace:
    """Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.

    Weights are normalized to sum to 1 (half the classical weights), matching
    the normalized velocity measure.  Nodes are returned in ascending order.
    """
    if n < 2:
        raise ConfigError("need at least 2 quadrature nodes")
    nodes = np.empty(n)
    weights = np.empty(n)
    for i in range(1, n // 2 + n % 2 + 1):
        x = math.cos(math.pi * (i - 0.25) / (n + 0.5))
        for _ in range(max_iter):
            p, dp = _legendre_value_and_derivative(n, x)
            dx = p / dp
            x -= dx
            if abs(dx) < tol:
                break
        else:
            raise SolverError("Gauss-Legendre Newton iteration did not converge")
        p, dp = _legendre_value_and_derivative(n, x)
        w = 1.0 / ((1.0 - x * x) * dp * dp)  # classical weight / 2
        nodes[i - 1], weights[i - 1] = -x, w
        nodes[n - i], weights[n - i] = x, w
    kind = GAUSS_LEGENDRE_16 if n == 16 else f"gauss_legendre_{n}"
    return VelocitySpace(kind, nodes, weights)


# 86-point octahedral spherical quadrature: generator parameters.
# Each entry: (symmetry code, a, weight); the code determines the orbit.
_LEBEDEV_86 = (
    (0, None, 0.1154401154401154e-1),
    (2, None, 0.1194390908585628e-1),
    (3, 0.3696028464541502, 0.1111055571060340e-1),
    (3, 0.6943540066026664, 0.1187650129453714e-1),
    (4, 0.3742430390903412, 0.1181230374690448e-1),
)


def _octahedral_orbit(code: int, a: float | None) -> np.ndarray:
    """Points of one octahedral symmetry orbit on the unit sphere."""
    pts: list[tuple[float, float, float]] = []
    if code == 0:
        for s in (1.0, -1.0):
            pts += [(s, 0.0, 0.0), (0.0, s, 0.0), (0.0, 0.0, s)]
    elif code == 2:
        c = 1.0 / math.sqrt(3.0)
        for sx in (c, -c):
            for sy in (c, -c):
                for sz in (c, -c):
                    pts.append((sx, sy, sz))
    elif code == 3:
        assert a is not None
        b = math.sqrt(1.0 - 2.0 * a * a)
        for sa in (a, -a):
            for sb in (a, -a):
                for sc in (b, -b):
                    pts += [(sa, sb, sc), (sa, sc, sb), (sc, sa, sb)]
    elif code == 4:
        assert a is not None
        b = math.sqrt(1.0 - a * a)
        for sa in (a, -a):
            for sb in (b, -b):
                pts += [(sa, sb, 0.0), (sb, sa, 0.0), (sa, 0.0, sb),
                        (sb, 0.0, sa), (0.0, sa, sb), (0.0, sb, sa)]
    else:
        raise ConfigError(f"unsupported orbit code {code}")
    return np.array(pts)


def lebedev_86() -> VelocitySpace:
    """86-point spherical quadrature with octahedral symmetry.

    Exactly integrates spherical harmonics through degree 15; weights sum
    to 1 and every component second moment equals 1/3.
    """
    nodes = []
    weights = []
    for code, a, w in _LEBEDEV_86:
        orbit = _octahedral_orbit(code, a)
        nodes.append(orbit)
        weights.append(np.full(orbit.shape[0], w))
    return VelocitySpace(LEBEDEV_86, np.vstack(nodes), np.concatenate(weights))


_VELOCITY_BUILDERS: dict[str, Callable[[], VelocitySpace]] = {
    DISCRETE_TWO: discrete_two,
    GAUSS_LEGENDRE_16: lambda: build_gauss_legendre(16),
    LEBEDEV_86: lebedev_86,
}


def velocity_space(kind: str) -> VelocitySpace:
    try:
        return _VELOCITY_BUILDERS[kind]()
    except KeyError:
        raise ConfigError(f"unknown velocity space {kind!r}") from None


# ============================================================
# Solver state
# ============================================================

@dataclass
class KineticState:
    """Distribution f (velocity-major), its density, and one history level.

    f has shape (K, N) in 1D or (K, Nx, Ny) in 2D; rho drops the leading
    velocity axis.  f_prev/rho_prev hold the previous time level once two
    levels exist (needed by the two-step time discretization).
    """

    f: np.ndarray
    rho: np.ndarray
    t: float = 0.0
    f_prev: np.ndarray | None = None
    rho_prev: np.ndarray | None = None

    @classmethod
    def from_distribution(cls, f: np.ndarray, vs: VelocitySpace,
                          t: float = 0.0) -> "KineticState":
        return cls(f=np.array(f, dtype=float), rho=vs.average(f), t=t)

    def advanced(self, f_new: np.ndarray, rho_new: np.ndarray,
                 dt: float) -> "KineticState":
        """New state with the current level shifted into the history slot."""
        return KineticState(f=f_new, rho=rho_new, t=self.t + dt,
                            f_prev=self.f, rho_prev=self.rho)


# ============================================================
# Scheme configuration
# ============================================================

@dataclass
class SchemeConfig:
    """Numerical parameters for one run.

    collision is one of the closure kinds from sltransport.collision.  The
    grid and velocity kind ride along so a full run configuration can be
    serialized to JSON and back.
    """

    eps: float
    dt: float
    order: int
    collision: Any
    limiter_enabled: bool = False
    grid: Grid | None = None
    velocity_kind: str | None = None

    def validate(self) -> None:
        if not (self.eps > 0.0 and math.isfinite(self.eps)):
            raise ConfigError(f"eps must be positive and finite, got {self.eps}")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive and finite, got {self.dt}")
        if self.order not in (1, 2):
            raise ConfigError(f"order must be 1 or 2, got {self.order}")
        if self.limiter_enabled and self.order != 2:
            raise ConfigError("the slope limiter modifies the second-order "
                              "stencils; it has no order-1 form")
        validator = getattr(self.collision, "validate", None)
        if validator is not None:
            validator(self.eps)

    @property
    def mu(self) -> float:
        """Stiff relaxation rate of the collision kind at this eps."""
        return self.collision.stiffness_rate(self.eps)

    # ---- JSON round trip -------------------------------------------------

    def to_json_dict(self) -> dict:
        from . import collision as _collision

        out: dict[str, Any] = {
            "eps": self.eps,
            "dt": self.dt,
            "order": self.order,
            "collision": _collision.collision_to_dict(self.collision),
            "limiter": self.limiter_enabled,
        }
        if self.grid is not None:
            out["grid"] = _grid_to_dict(self.grid)
        if self.velocity_kind is not None:
            out["velocity"] = {"kind": self.velocity_kind}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: dict) -> "SchemeConfig":
        from . import collision as _collision

        known = {"eps", "dt", "order", "collision", "limiter", "grid",
                 "velocity"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("eps", "dt", "order", "collision"):
            if key not in data:
                raise ConfigError(f"config is missing required key {key!r}")
        cfg = cls(
            eps=float(data["eps"]),
            dt=float(data["dt"]),
            order=int(data["order"]),
            collision=_collision.collision_from_dict(data["collision"]),
            limiter_enabled=bool(data.get("limiter", False)),
            grid=_grid_from_dict(data["grid"]) if "grid" in data else None,
            velocity_kind=(data["velocity"]["kind"]
                           if "velocity" in data else None),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "SchemeConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_json_dict(data)


def _grid_to_dict(grid: Grid) -> dict:
    axes = [{"lo": a.lo, "hi": a.hi, "n": a.n, "boundary": a.boundary}
            for a in grid.axes]
    if len(axes) == 1:
        return axes[0]
    return {"axes": axes}


def _grid_from_dict(data: dict) -> Grid:
    def make_axis(d: dict) -> Axis:
        known = {"lo", "hi", "n", "boundary"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown grid keys: {sorted(unknown)}")
        return Axis(float(d["lo"]), float(d["hi"]), int(d["n"]),
                    d.get("boundary", PERIODIC))

    if "axes" in data:
        return Grid(tuple(make_axis(d) for d in data["axes"]))
    return Grid((make_axis(data),))
