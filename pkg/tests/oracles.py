"""Independent reference implementations used to cross-check the package.

Everything in here is deliberately written the slow, obvious way (dense
matrices, plain Python loops, spectral heat solves) so a disagreement
with the production code points at the production code.
"""

from __future__ import annotations

import numpy as np


# ============================================================
# Dense linear algebra counterparts of the banded machinery
# ============================================================

def dense_from_offsets(offsets: dict[int, np.ndarray], n: int,
                       periodic: bool) -> np.ndarray:
    """Full matrix for {diagonal offset: per-row coefficients}."""
    m = np.zeros((n, n))
    for d, coef in offsets.items():
        coef = np.broadcast_to(coef, (n,))
        for i in range(n):
            j = i + d
            if 0 <= j < n:
                m[i, j] += coef[i]
            elif periodic:
                m[i, j % n] += coef[i]
            elif coef[i] != 0.0:
                raise ValueError("bounded row references ghost column")
    return m


def thomas_solve(sub: np.ndarray, diag: np.ndarray, sup: np.ndarray,
                 rhs: np.ndarray) -> np.ndarray:
    """Plain-loop tridiagonal elimination (no pivoting)."""
    n = len(diag)
    c = np.zeros(n)
    d = np.zeros(n)
    c[0] = sup[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - sub[i] * c[i - 1]
        c[i] = sup[i] / den if i < n - 1 else 0.0
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den
    x = np.zeros(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def loop_recurrence_first(a: float, theta: float, rhs: np.ndarray,
                          cyclic: bool) -> np.ndarray:
    """Solve a*f_i - theta*f_{i-1} = rhs_i by dense assembly."""
    n = len(rhs)
    m = np.zeros((n, n))
    for i in range(n):
        m[i, i] = a
        j = i - 1
        if j >= 0:
            m[i, j] -= theta
        elif cyclic:
            m[i, n - 1] -= theta
    return np.linalg.solve(m, rhs)


def loop_recurrence_second(d: float, c1: float, c2: float, rhs: np.ndarray,
                           cyclic: bool) -> np.ndarray:
    n = len(rhs)
    m = np.zeros((n, n))
    for i in range(n):
        m[i, i] = d
        for off, c in ((-1, c1), (-2, c2)):
            j = i + off
            if j >= 0:
                m[i, j] += c
            elif cyclic:
                m[i, j % n] += c
    return np.linalg.solve(m, rhs)


# ============================================================
# Spectral implicit heat stepper (periodic, for the diffusive limit)
# ============================================================

def heat_symbol(n: int, dx: float) -> np.ndarray:
    """Eigenvalues of the three-point Laplacian -(u_{i-1}-2u_i+u_{i+1})/dx^2
    under the discrete Fourier basis."""
    k = np.arange(n)
    return (2.0 - 2.0 * np.cos(2.0 * np.pi * k / n)) / dx**2


def heat_run(rho0: np.ndarray, diff: float, dx: float, dt: float,
             steps: int, order: int, sigma_a: float = 0.0,
             source: np.ndarray | None = None) -> np.ndarray:
    """Implicit heat solve rho_t = D rho_xx - sigma_a rho + G, periodic.

    Backward Euler throughout for order 1; for order 2, one backward Euler
    startup step then BDF2, mirroring the scheme's startup rule.  Solved
    exactly per Fourier mode.
    """
    n = len(rho0)
    lam = diff * heat_symbol(n, dx) + sigma_a
    g_hat = np.fft.fft(source) if source is not None else 0.0
    cur = np.fft.fft(rho0)
    prev = None
    for step_idx in range(steps):
        if order == 1 or prev is None:
            new = (cur + dt * g_hat) / (1.0 + dt * lam)
        else:
            new = (4.0 * cur - prev + 2.0 * dt * g_hat) / (3.0 + 2.0 * dt * lam)
        prev, cur = cur, new
    return np.real(np.fft.ifft(cur))


# ============================================================
# Sparse-direct implicit heat stepper on the periodic plane
# ============================================================

def heat_run_2d(rho0: np.ndarray, diff: float, dx: float, dy: float,
                dt: float, steps: int, order: int,
                sigma_a: float = 0.0) -> np.ndarray:
    """Implicit rho_t = D (rho_xx + rho_yy) - sigma_a rho, periodic square.

    Assembled point by point as a sparse 5-point system and solved with
    a direct factorization, so it shares no code path with the FFT-based
    production solve.  Backward Euler first, BDF2 once history exists.
    """
    import scipy.sparse as sp
    from scipy.sparse.linalg import factorized

    nx, ny = rho0.shape
    idx = np.arange(nx * ny).reshape(nx, ny)
    rows, cols, vals = [], [], []
    for i in range(nx):
        for j in range(ny):
            r = idx[i, j]
            rows += [r] * 5
            cols += [r, idx[(i - 1) % nx, j], idx[(i + 1) % nx, j],
                     idx[i, (j - 1) % ny], idx[i, (j + 1) % ny]]
            vals += [2.0 / dx**2 + 2.0 / dy**2, -1.0 / dx**2, -1.0 / dx**2,
                     -1.0 / dy**2, -1.0 / dy**2]
    lap = sp.csc_matrix((vals, (rows, cols)), shape=(nx * ny, nx * ny))
    eye = sp.identity(nx * ny, format="csc")
    be = factorized((1.0 + dt * sigma_a) * eye + dt * diff * lap)
    bdf = factorized((3.0 + 2.0 * dt * sigma_a) * eye + 2.0 * dt * diff * lap)
    cur = rho0.ravel().astype(float)
    prev = None
    for _ in range(steps):
        if order == 1 or prev is None:
            new = be(cur)
        else:
            new = bdf(4.0 * cur - prev)
        prev, cur = cur, new
    return cur.reshape(nx, ny)


# ============================================================
# Spectral reference for the tracked 2D transport average
# ============================================================

def transported_reference_2d(f: np.ndarray, rho: np.ndarray,
                             nodes: np.ndarray, weights: np.ndarray,
                             eps: float, dt: float, dx: float, dy: float,
                             e_fac: float) -> np.ndarray:
    """(e_fac/eps) <v.grad(f - rho)> at the feet, via exact FFT shifts.

    Derivatives and the foot displacement are both exact for
    band-limited fields, so the production stencils should approach
    this at their design order.
    """
    nx, ny = rho.shape
    kx = 2j * np.pi * np.fft.fftfreq(nx, d=dx)[:, None]
    ky = 2j * np.pi * np.fft.fftfreq(ny, d=dy)[None, :]
    rho_hat = np.fft.fft2(rho)
    acc = np.zeros((nx, ny))
    for k in range(len(weights)):
        vx, vy = float(nodes[k][0]), float(nodes[k][1])
        g_hat = np.fft.fft2(f[k]) - rho_hat
        shift = np.exp(-(kx * vx + ky * vy) * dt / eps)
        acc += weights[k] * (vx * np.fft.ifft2(kx * g_hat * shift).real
                             + vy * np.fft.ifft2(ky * g_hat * shift).real)
    return (e_fac / eps) * acc
