"""Collision closures: relaxation toward density-driven local equilibria.

Each kind describes the stiff right-hand side of the transport equation in
the diffusive scaling.  The solver divides the one-group form by eps^2, so
its stiff rate is sigma_s/eps^2 and absorption/source enter as non-stiff
terms handled by the steppers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Union

import numpy as np

from .core import ConfigError, SolverError, VelocitySpace


@dataclass(frozen=True)
class Telegraph:
    """Plain relaxation to the density: collide = rho - f."""

    def validate(self, eps: float) -> None:
        return None

    def stiffness_rate(self, eps: float) -> float:
        return 1.0 / (eps * eps)


@dataclass(frozen=True)
class Q2:
    """Quadratic two-velocity closure.  Constructible, but no scheme is
    provided for it: the steppers reject it."""

    weight: float = 1.0

    def validate(self, eps: float) -> None:
        return None

    def stiffness_rate(self, eps: float) -> float:
        raise SolverError("the quadratic two-velocity closure is not supported "
                          "by the steppers")


@dataclass(frozen=True)
class AdvDiff:
    """Relaxation with a velocity-tilted equilibrium: rho - f + A*eps*v*rho.

    The tilt strength must satisfy |A*eps| < 1 so the equilibrium stays
    positive for positive densities.
    """

    advection: float

    def validate(self, eps: float) -> None:
        if not abs(self.advection * eps) < 1.0:
            raise ConfigError(
                f"advection-diffusion closure needs |A*eps| < 1, got "
                f"A={self.advection}, eps={eps}")

    def stiffness_rate(self, eps: float) -> float:
        return 1.0 / (eps * eps)


@dataclass(frozen=True)
class Burgers:
    """Quadratic equilibrium tilt: rho - f + C*eps*v*(rho^2 - (rho-f)^2).

    The induced macroscopic limit is a viscous conservation law with
    quadratic flux.  Fixed points are resolved by Picard iteration.
    """

    strength: float
    picard_tol: float = 1e-8
    picard_max_iter: int = 100

    def validate(self, eps: float) -> None:
        if not self.strength > 0.0:
            raise ConfigError(f"quadratic-flux strength must be positive, "
                              f"got {self.strength}")
        if not self.picard_tol > 0.0:
            raise ConfigError("picard_tol must be positive")

    def stiffness_rate(self, eps: float) -> float:
        return 1.0 / (eps * eps)


SigmaField = Union[float, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class OneGroup:
    """Isotropic scattering with absorption and an external source.

    The kinetic right-hand side is (sigma_s/eps^2)(rho - f) - sigma_a*f + G.
    sigma_s may be a callable of the space coordinates (2D heterogeneous
    media); the source, when present, is problem-defined and evaluated by
    the steppers.
    """

    sigma_s: SigmaField = 1.0
    sigma_a: float = 0.0
    source: Any = None

    def validate(self, eps: float) -> None:
        if not callable(self.sigma_s) and not self.sigma_s > 0.0:
            raise ConfigError(f"scattering rate must be positive, got "
                              f"{self.sigma_s}")
        if self.sigma_a < 0.0:
            raise ConfigError(f"absorption rate must be nonnegative, got "
                              f"{self.sigma_a}")

    def stiffness_rate(self, eps: float) -> float:
        if callable(self.sigma_s):
            raise ConfigError("heterogeneous scattering has a per-cell rate; "
                              "the 2D stepper computes it internally")
        return self.sigma_s / (eps * eps) + self.sigma_a


CollisionKind = Union[Telegraph, Q2, AdvDiff, Burgers, OneGroup]


def collide(kind: CollisionKind, f: np.ndarray | float, rho: np.ndarray | float,
            v: np.ndarray | float, eps: float) -> np.ndarray | float:
    """Stiff collision operator value for one velocity (vectorized in space).

    For the one-group kind this is the scattering part sigma_s*(rho - f);
    absorption and sources are non-stiff and handled by the steppers.
    """
    if isinstance(kind, Telegraph):
        return rho - f
    if isinstance(kind, AdvDiff):
        return rho - f + kind.advection * eps * v * rho
    if isinstance(kind, Burgers):
        return rho - f + kind.strength * eps * v * (rho * rho
                                                    - (rho - f) * (rho - f))
    if isinstance(kind, OneGroup):
        if callable(kind.sigma_s):
            raise ConfigError("pointwise collide needs a scalar scattering "
                              "rate")
        return kind.sigma_s * (rho - f)
    if isinstance(kind, Q2):
        raise SolverError("the quadratic two-velocity closure is not supported")
    raise ConfigError(f"unknown collision kind {type(kind).__name__}")


def limiting_diffusion_coefficient(kind: CollisionKind, vs: VelocitySpace,
                                   eps: float, axis: int = 0) -> float:
    """Diffusion coefficient of the relaxed macroscopic limit.

    Relaxation kinds with unit rate give the plain second moment of the
    velocity component; the one-group kind divides by sigma_s + eps^2*sigma_a.
    """
    m2 = vs.second_moment(axis)
    if isinstance(kind, (Telegraph, AdvDiff, Burgers)):
        return m2
    if isinstance(kind, OneGroup):
        if callable(kind.sigma_s):
            raise ConfigError("heterogeneous scattering has a per-cell "
                              "diffusion coefficient")
        return m2 / (kind.sigma_s + eps * eps * kind.sigma_a)
    if isinstance(kind, Q2):
        raise SolverError("the quadratic two-velocity closure is not supported")
    raise ConfigError(f"unknown collision kind {type(kind).__name__}")


# ---- JSON (de)serialization -----------------------------------------------

_KIND_NAMES = {
    Telegraph: "telegraph",
    Q2: "q2",
    AdvDiff: "advdiff",
    Burgers: "burgers",
    OneGroup: "onegroup",
}


def collision_to_dict(kind: CollisionKind) -> dict:
    name = _KIND_NAMES.get(type(kind))
    if name is None:
        raise ConfigError(f"unknown collision kind {type(kind).__name__}")
    out: dict[str, Any] = {"kind": name}
    if isinstance(kind, AdvDiff):
        out["advection"] = kind.advection
    elif isinstance(kind, Burgers):
        out["strength"] = kind.strength
        out["picard_tol"] = kind.picard_tol
        out["picard_max_iter"] = kind.picard_max_iter
    elif isinstance(kind, OneGroup):
        if callable(kind.sigma_s) or kind.source is not None:
            raise ConfigError("callable scattering rates / sources are not "
                              "serializable")
        out["sigma_s"] = kind.sigma_s
        out["sigma_a"] = kind.sigma_a
    elif isinstance(kind, Q2):
        out["weight"] = kind.weight
    return out


def collision_from_dict(data: dict) -> CollisionKind:
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError("collision config must be an object with a 'kind'")
    name = data["kind"]
    params = {k: v for k, v in data.items() if k != "kind"}

    def take(allowed: set[str]) -> None:
        unknown = set(params) - allowed
        if unknown:
            raise ConfigError(f"unknown collision keys for {name!r}: "
                              f"{sorted(unknown)}")

    if name == "telegraph":
        take(set())
        return Telegraph()
    if name == "q2":
        take({"weight"})
        return Q2(float(params.get("weight", 1.0)))
    if name == "advdiff":
        take({"advection"})
        if "advection" not in params:
            raise ConfigError("advdiff collision needs 'advection'")
        return AdvDiff(float(params["advection"]))
    if name == "burgers":
        take({"strength", "picard_tol", "picard_max_iter"})
        if "strength" not in params:
            raise ConfigError("burgers collision needs 'strength'")
        return Burgers(float(params["strength"]),
                       float(params.get("picard_tol", 1e-8)),
                       int(params.get("picard_max_iter", 100)))
    if name == "onegroup":
        take({"sigma_s", "sigma_a"})
        return OneGroup(float(params.get("sigma_s", 1.0)),
                        float(params.get("sigma_a", 0.0)))
    raise ConfigError(f"unknown collision kind {name!r}")
