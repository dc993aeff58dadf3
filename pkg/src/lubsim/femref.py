"""Finite-difference reference solution of the dimensionless Reynolds equation.

Conservative 5-point flux form on a uniform node grid over the unit square,
Dirichlet P = 0 on all four edges:

    [a_e (P_E - P) - a_w (P - P_W)] / dx^2
      + (L/B)^2 [a_n (P_N - P) - a_s (P - P_S)] / dy^2 = 6 (H_E - H_W) / (2 dx)

with face coefficients a = H^3 taken from the analytic surface at face
midpoints.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import SolverError
from .surface import DEFAULT_ASPECT, SurfaceModel


@dataclass(frozen=True)
class PressureField:
    """Nodal pressure on the closed unit square; ``values[j, i]`` sits at (x_i, y_j)."""

    nx: int
    ny: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.ny, self.nx):
            raise ValueError(f"values shape {v.shape} != ({self.ny}, {self.nx})")
        if not np.all(np.isfinite(v)):
            raise ValueError("pressure field contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.ny)

    def mesh(self):
        return np.meshgrid(self.x, self.y)

    def same_grid(self, other: "PressureField") -> bool:
        return (self.nx, self.ny) == (other.nx, other.ny)

    def scaled(self, c: float) -> "PressureField":
        return PressureField(self.nx, self.ny, self.values * c)


@dataclass(frozen=True)
class SparseSystem:
    """A P = b over the interior nodes, numbered x-fastest.

    Sign convention: A is the *negated* discrete operator, so its diagonal is
    positive and A is symmetric positive definite; b is the negated RHS.
    """

    nx: int
    ny: int
    A: sp.csr_matrix
    b: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[0]


def _check_grid(nx, ny):
    if nx < 3 or ny < 3:
        raise ValueError("need at least 3 nodes per direction")


def assemble(surface: SurfaceModel, nx: int = 60, ny: int = 60, aspect: float = DEFAULT_ASPECT,
             rhs: np.ndarray | None = None) -> SparseSystem:
    """Build the interior system.

    ``rhs`` replaces 6 H_X by a user field of shape (ny, nx) sampled at nodes
    (used for manufactured solutions).
    """
    _check_grid(nx, ny)
    dx, dy = 1.0 / (nx - 1), 1.0 / (ny - 1)
    x = np.linspace(0.0, 1.0, nx)
    y = np.linspace(0.0, 1.0, ny)
    mx, my = nx - 2, ny - 2
    XI, YI = np.meshgrid(x[1:-1], y[1:-1])
    a2 = aspect ** 2
    ae = surface.thickness(XI + 0.5 * dx, YI) ** 3 / dx ** 2
    aw = surface.thickness(XI - 0.5 * dx, YI) ** 3 / dx ** 2
    an = a2 * surface.thickness(XI, YI + 0.5 * dy) ** 3 / dy ** 2
    as_ = a2 * surface.thickness(XI, YI - 0.5 * dy) ** 3 / dy ** 2
    idx = np.arange(mx * my).reshape(my, mx)
    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [(ae + aw + an + as_).ravel()]
    # off-diagonal couplings between interior neighbours; boundary neighbours carry P = 0
    head, tail = slice(None, -1), slice(1, None)
    full = slice(None)
    for coef, src, dst in ((ae, (full, head), (full, tail)), (aw, (full, tail), (full, head)),
                           (an, (head, full), (tail, full)), (as_, (tail, full), (head, full))):
        rows.append(idx[src].ravel())
        cols.append(idx[dst].ravel())
        vals.append(-coef[src].ravel())
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(mx * my, mx * my))
    if rhs is None:
        f = 6.0 * (surface.thickness(XI + dx, YI) - surface.thickness(XI - dx, YI)) / (2.0 * dx)
    else:
        f = np.asarray(rhs, dtype=np.float64)[1:-1, 1:-1]
    return SparseSystem(nx, ny, A, -f.ravel())


def conjugate_gradient(A, b: np.ndarray, tol: float = 1e-10, maxiter: int | None = None,
                       x0: np.ndarray | None = None) -> tuple[np.ndarray, int, float]:
    """Plain CG for SPD ``A``. Returns (x, iterations, relative residual)."""
    n = b.size
    maxiter = 50 * n if maxiter is None else maxiter
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0, 0.0
    r = b - A @ x
    p = r.copy()
    rr = r @ r
    for k in range(1, maxiter + 1):
        Ap = A @ p
        alpha = rr / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rr_new = r @ r
        if np.sqrt(rr_new) <= tol * bnorm:
            # confirm with the true residual, recursion drift can fake convergence
            true = np.linalg.norm(b - A @ x) / bnorm
            if true <= tol:
                return x, k, true
            r = b - A @ x
            rr_new = r @ r
            p = r.copy()
            rr = rr_new
            continue
        p = r + (rr_new / rr) * p
        rr = rr_new
    rel = np.linalg.norm(b - A @ x) / bnorm
    raise SolverError(f"CG did not converge in {maxiter} iterations (relative residual {rel:.3e})")


def solve(system: SparseSystem, tol: float = 1e-10) -> PressureField:
    if not tol > 0:
        raise ValueError("tol must be positive")
    u, _, _ = conjugate_gradient(system.A, system.b, tol)
    P = np.zeros((system.ny, system.nx))
    P[1:-1, 1:-1] = u.reshape(system.ny - 2, system.nx - 2)
    return PressureField(system.nx, system.ny, P)


@dataclass(frozen=True)
class FemResult:
    field: PressureField
    max_pressure: float
    load_capacity: float
    wall_time_s: float


def solve_case(surface: SurfaceModel, nx: int = 60, ny: int = 60, aspect: float = DEFAULT_ASPECT,
               tol: float = 1e-10) -> FemResult:
    from .metrics import load_capacity, max_pressure

    t0 = time.perf_counter()
    field = solve(assemble(surface, nx, ny, aspect), tol)
    wall = time.perf_counter() - t0
    return FemResult(field, max_pressure(field)[0], load_capacity(field), wall)
