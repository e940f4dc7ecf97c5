"""Plane-wave stability analysis of the two-velocity schemes.

On a uniform periodic mesh the split update (implicit density solve,
then per-velocity implicit transport, then the averaging correction) is
linear with constant coefficients, so one time step multiplies each
Fourier mode by an amplification matrix: 4x4 for the one-step scheme
(pre-correction density, both velocity components, corrected density)
and 7x7 for the two-step scheme, which carries three history variables.
A parameter tuple is stable when no sampled wave number amplifies:
strictly contracting spectra pass outright, unit-modulus spectra must
be semisimple (every unit eigenvalue's geometric multiplicity matches
its algebraic one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import ConfigError, SolverError

# marginality and rank cutoffs are judgement calls; both are keyword
# arguments on the checking entry points for callers that disagree
MARGINAL_TOL = 1e-9
RANK_TOL = 1e-8
STRICT_GAP = 1e-12
EIG_RESIDUAL_TOL = 1e-10


# ============================================================
# Parameter bundle
# ============================================================

@dataclass(frozen=True)
class AmplificationSpec:
    """One scheme/mesh/stiffness/wave-number tuple.

    omega is the discrete wave number (mode phase advance per cell),
    restricted to [-pi, pi].
    """

    order: int
    dt: float
    dx: float
    eps: float
    omega: float

    def __post_init__(self) -> None:
        if self.order not in (1, 2):
            raise ConfigError(f"order must be 1 or 2, got {self.order}")
        for name in ("dt", "dx", "eps"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive")
        if abs(self.omega) > math.pi:
            raise ConfigError("omega outside [-pi, pi]")

    @property
    def ratio(self) -> float:
        """Cells travelled along a unit-speed characteristic in one step."""
        return self.dt / (self.eps * self.dx)

    @property
    def m(self) -> int:
        """Whole cells cleared by the foot: m < ratio <= m + 1."""
        return math.ceil(self.ratio) - 1

    @property
    def xi(self) -> float:
        """Fractional remainder ratio - m, in (0, 1]."""
        return self.ratio - self.m

    @property
    def decay(self) -> float:
        """Relaxation factor exp(-dt/eps^2); underflows to exactly 0."""
        return float(np.exp(-self.dt / self.eps**2))


# ============================================================
# Amplification matrices
# ============================================================

def _entries_first(dt: float, dx: float, eps: float,
                   w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left/right matrices of the one-step scheme, stacked over w."""
    th = dt / (eps * dx)
    dtm = dt / eps**2
    decay = float(np.exp(-dtm))
    one_minus = -float(np.expm1(-dtm))
    m = math.ceil(th) - 1
    nw = w.shape[0]
    ew = np.exp(-1j * w)
    lmat = np.zeros((nw, 4, 4), dtype=complex)
    lmat[:, 0, 0] = 1.0 + (dt / dx**2) * one_minus * (2.0 - 2.0 * np.cos(w))
    lmat[:, 1, 0] = -dtm
    lmat[:, 1, 1] = 1.0 + th * (1.0 - ew) + dtm
    lmat[:, 2, 0] = -dtm
    lmat[:, 2, 2] = 1.0 + th * (1.0 - np.conj(ew)) + dtm
    lmat[:, 3, 1] = -0.5
    lmat[:, 3, 2] = -0.5
    lmat[:, 3, 3] = 1.0
    rmat = np.zeros((nw, 4, 4), dtype=complex)
    cfac = decay * th / 2.0
    if cfac > 0.0:
        shifted = np.exp(-1j * (m + 1) * w) - np.exp(-1j * (m + 2) * w)
        rmat[:, 0, 1] = -cfac * shifted
        rmat[:, 0, 2] = np.conj(rmat[:, 0, 1])
        rmat[:, 0, 3] = 1.0 + 2.0 * cfac * (np.cos((m - 1) * w)
                                            - np.cos(m * w))
    else:
        rmat[:, 0, 3] = 1.0
    rmat[:, 1, 1] = 1.0
    rmat[:, 2, 2] = 1.0
    return lmat, rmat


def _entries_second(dt: float, dx: float, eps: float,
                    w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left/right matrices of the two-step scheme, stacked over w."""
    th = dt / (eps * dx)
    dtm = dt / eps**2
    decay = float(np.exp(-dtm))
    one_minus = -float(np.expm1(-dtm))
    m = math.ceil(th) - 1
    xi = th - m
    nw = w.shape[0]
    ew = np.exp(-1j * w)
    lmat = np.zeros((nw, 7, 7), dtype=complex)
    lmat[:, 0, 0] = 3.0 + (2.0 * dt / dx**2) * one_minus \
        * (2.0 - 2.0 * np.cos(w))
    lmat[:, 1, 0] = -2.0 * dtm
    lmat[:, 1, 1] = 3.0 + th * (3.0 - 4.0 * ew + ew**2) + 2.0 * dtm
    lmat[:, 2, 0] = -2.0 * dtm
    cw = np.conj(ew)
    lmat[:, 2, 2] = 3.0 + th * (3.0 - 4.0 * cw + cw**2) + 2.0 * dtm
    lmat[:, 3, 3] = 1.0
    lmat[:, 4, 4] = 1.0
    lmat[:, 5, 5] = 1.0
    lmat[:, 6, 1] = -0.5
    lmat[:, 6, 2] = -0.5
    lmat[:, 6, 6] = 1.0
    rmat = np.zeros((nw, 7, 7), dtype=complex)
    cfac = decay * th / 2.0
    if cfac > 0.0:
        shifted = ((3.0 - 2.0 * xi) * np.exp(-1j * m * w)
                   - (4.0 - 4.0 * xi) * np.exp(-1j * (m + 1) * w)
                   + (1.0 - 2.0 * xi) * np.exp(-1j * (m + 2) * w))
        rmat[:, 0, 1] = -cfac * shifted
        rmat[:, 0, 2] = np.conj(rmat[:, 0, 1])
        rmat[:, 0, 6] = 4.0 + 2.0 * cfac \
            * ((1.0 - 2.0 * xi) * np.cos((m - 1) * w)
               + 4.0 * xi * np.cos(m * w)
               - (1.0 + 2.0 * xi) * np.cos((m + 1) * w))
    else:
        rmat[:, 0, 6] = 4.0
    rmat[:, 0, 3] = -1.0
    rmat[:, 1, 1] = 4.0
    rmat[:, 1, 4] = -1.0
    rmat[:, 2, 2] = 4.0
    rmat[:, 2, 5] = -1.0
    rmat[:, 3, 6] = 1.0
    rmat[:, 4, 1] = 1.0
    rmat[:, 5, 2] = 1.0
    return lmat, rmat


def _matrices(order: int, dt: float, dx: float, eps: float,
              w: np.ndarray) -> np.ndarray:
    builder = _entries_first if order == 1 else _entries_second
    lmat, rmat = builder(dt, dx, eps, w)
    # inverse applied as column solves, never formed explicitly
    return np.linalg.solve(lmat, rmat)


def amplification_first(spec: AmplificationSpec) -> np.ndarray:
    """4x4 one-step amplification matrix at spec.omega."""
    if spec.order != 1:
        raise ConfigError("one-step amplification requires order 1")
    w = np.array([spec.omega], dtype=float)
    return _matrices(1, spec.dt, spec.dx, spec.eps, w)[0]


def amplification_second(spec: AmplificationSpec) -> np.ndarray:
    """7x7 two-step amplification matrix at spec.omega."""
    if spec.order != 2:
        raise ConfigError("two-step amplification requires order 2")
    w = np.array([spec.omega], dtype=float)
    return _matrices(2, spec.dt, spec.dx, spec.eps, w)[0]


# ============================================================
# Eigenvalues with verification and fallback
# ============================================================

def _char_poly(mat: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients (Faddeev-LeVerrier)."""
    n = mat.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    acc = np.zeros_like(mat)
    ident = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        acc = mat @ (acc + coeffs[k - 1] * ident)
        coeffs[k] = -np.trace(acc) / k
    return coeffs


def _polish(mat: np.ndarray, z: complex,
            tol: float) -> tuple[float, complex]:
    """Best certified residual for one eigenvalue estimate.

    The smallest singular value of mat - z*I equals the minimal
    ||mat v - z v|| over unit vectors, so it certifies z without
    trusting any particular eigenvector.  A few Rayleigh-quotient
    updates from the minimizing vector sharpen z when the library
    estimate is degraded (balancing of badly scaled matrices).
    """
    ident = np.eye(mat.shape[0], dtype=complex)
    res = float(np.linalg.svd(mat - z * ident, compute_uv=False)[-1])
    best = (res, complex(z))
    cur = complex(z)
    for _ in range(3):
        if best[0] <= 0.01 * tol:
            break
        _, _, vh = np.linalg.svd(mat - cur * ident)
        v = vh[-1].conj()
        cur = complex(v.conj() @ (mat @ v))
        res = float(np.linalg.svd(mat - cur * ident, compute_uv=False)[-1])
        if res < best[0]:
            best = (res, cur)
    return best


def eigenvalues(mat: np.ndarray) -> np.ndarray:
    """All eigenvalues of a small (<= 7) complex matrix, verified.

    Primary path is the library QR iteration; each value is certified
    by the smallest singular value of mat - lambda*I and polished when
    needed.  On failure the characteristic-polynomial companion roots
    get the same treatment before giving up.
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ConfigError("eigenvalues expects a square matrix")
    n = mat.shape[0]
    if n > 7:
        raise ConfigError("eigenvalues supports sizes up to 7")
    norm = float(np.linalg.norm(mat, 2))
    tol = EIG_RESIDUAL_TOL * max(norm, 1e-300)

    def certify(values: np.ndarray) -> tuple[float, np.ndarray]:
        out = values.astype(complex).copy()
        worst = 0.0
        for j, z in enumerate(values):
            res, polished = _polish(mat, z, tol)
            out[j] = polished
            worst = max(worst, res)
        return worst, out

    try:
        lam, vecs = np.linalg.eig(mat)
        res = np.linalg.norm(mat @ vecs - vecs * lam[None, :], axis=0)
        if float(res.max()) <= tol:
            return lam
        worst, lam = certify(lam)
        if worst <= tol:
            return lam
    except np.linalg.LinAlgError:
        pass
    worst, roots = certify(np.roots(_char_poly(mat)))
    if worst > tol:
        raise SolverError(f"eigenvalue residual {worst:.3e} exceeds "
                          f"{tol:.3e} for size {n}")
    return roots


# ============================================================
# Stability verdicts
# ============================================================

@dataclass(frozen=True)
class StabilityVerdict:
    max_modulus: float
    stable: bool
    marginal: bool
    diagonalizable_checked: bool


def _unit_eigs_semisimple(mat: np.ndarray, lam: np.ndarray,
                          marginal_tol: float, rank_tol: float) -> bool:
    n = mat.shape[0]
    norm = float(np.linalg.norm(mat, 2))
    radius = rank_tol * max(norm, 1e-300)
    unit = [z for z in lam if abs(abs(z) - 1.0) <= marginal_tol]
    while unit:
        z0 = unit[0]
        alg = sum(1 for z in lam if abs(z - z0) <= radius)
        sv = np.linalg.svd(mat - z0 * np.eye(n), compute_uv=False)
        geo = int(np.sum(sv <= radius))
        # a Jordan chain leaves the kernel short of the eigenvalue
        # count; extra kernel directions only mean that neighbouring
        # semisimple eigenvalues sit just outside the same radius, so
        # geo > alg is not a defect
        if geo < alg:
            return False
        unit = [z for z in unit if abs(z - z0) > radius]
    return True


def assess_matrices(mats: np.ndarray, marginal_tol: float = MARGINAL_TOL,
                    rank_tol: float = RANK_TOL) -> StabilityVerdict:
    """Apply the stability principle to a stack of mode matrices.

    Stable when every sampled mode contracts strictly, or when the peak
    modulus sits within marginal_tol of one and every near-unit sample
    is semisimple on its unit eigenvalues.
    """
    mats = np.asarray(mats, dtype=complex)
    if mats.ndim == 2:
        mats = mats[None, :, :]
    lams = np.linalg.eigvals(mats)
    sample_max = np.abs(lams).max(axis=1)
    max_modulus = float(sample_max.max())
    marginal = abs(max_modulus - 1.0) <= marginal_tol
    if max_modulus < 1.0 - STRICT_GAP:
        return StabilityVerdict(max_modulus, True, marginal, False)
    if not marginal:
        return StabilityVerdict(max_modulus, False, False, False)
    ok = True
    for idx in np.nonzero(sample_max >= 1.0 - marginal_tol)[0]:
        if not _unit_eigs_semisimple(mats[idx], lams[idx],
                                     marginal_tol, rank_tol):
            ok = False
            break
    return StabilityVerdict(max_modulus, ok, True, True)


def check_stability(spec: AmplificationSpec, n_omega: int = 500,
                    marginal_tol: float = MARGINAL_TOL,
                    rank_tol: float = RANK_TOL) -> StabilityVerdict:
    """Sample wave numbers uniformly over [-pi, pi] and judge the tuple.

    The constant mode (omega exactly 0, always unit-modulus) falls
    between uniform samples, so it is appended explicitly; spec.omega
    itself is ignored here.
    """
    if n_omega < 2:
        raise ConfigError("n_omega must be at least 2")
    omegas = np.append(np.linspace(-math.pi, math.pi, n_omega), 0.0)
    mats = _matrices(spec.order, spec.dt, spec.dx, spec.eps, omegas)
    return assess_matrices(mats, marginal_tol, rank_tol)


# ============================================================
# Parameter sweeps
# ============================================================

@dataclass(frozen=True)
class SweepRow:
    order: int
    dx: float
    dt: float
    eps: float
    verdict: StabilityVerdict


def sweep(orders: Sequence[int], dx_set: Iterable[float],
          dtfactor_set: Iterable[float], eps_set: Iterable[float],
          n_omega: int = 500, marginal_tol: float = MARGINAL_TOL,
          rank_tol: float = RANK_TOL) -> list[SweepRow]:
    """One verdict per (order, dx, dt factor, eps) tuple.

    Unstable tuples are reported in their rows; the sweep never aborts.
    """
    orders = list(orders)
    dxs = list(dx_set)
    facs = list(dtfactor_set)
    epss = list(eps_set)
    if not (orders and dxs and facs and epss):
        raise ConfigError("sweep requires non-empty parameter sets")
    rows: list[SweepRow] = []
    for order in orders:
        for dx in dxs:
            for fac in facs:
                for eps in epss:
                    dt = fac * dx
                    spec = AmplificationSpec(order=order, dt=dt, dx=dx,
                                             eps=eps, omega=0.0)
                    verdict = check_stability(spec, n_omega=n_omega,
                                              marginal_tol=marginal_tol,
                                              rank_tol=rank_tol)
                    rows.append(SweepRow(order, dx, dt, eps, verdict))
    return rows


def unstable_rows(rows: Iterable[SweepRow]) -> list[SweepRow]:
    return [row for row in rows if not row.verdict.stable]


def report_csv(rows: Iterable[SweepRow]) -> str:
    """CSV report: order, dx, dt, eps, max_modulus, stable, marginal."""
    lines = ["order,dx,dt,eps,max_modulus,stable,marginal"]
    for row in rows:
        v = row.verdict
        lines.append(f"{row.order},{row.dx:.6e},{row.dt:.6e},"
                     f"{row.eps:.6e},{v.max_modulus:.10e},"
                     f"{int(v.stable)},{int(v.marginal)}")
    return "\n".join(lines) + "\n"
