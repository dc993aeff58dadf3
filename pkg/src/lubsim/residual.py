"""Reynolds residual at collocation points and the training losses."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import CoordJet, Tape
from .boundary import AdfSpec, adf, apply_hard_bc
from .ffnet import NetworkParams, forward
from .surface import DEFAULT_ASPECT, SurfaceModel, film_thickness

BC_MODES = ("hard", "soft")
CHUNK = 1000


@dataclass(frozen=True)
class CollocationSet:
    """Cell-centred uniform grid strictly inside the unit square."""

    nx: int = 60
    ny: int = 60

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("collocation grid needs at least one cell per direction")

    @property
    def points(self) -> np.ndarray:
        gx = (np.arange(self.nx) + 0.5) / self.nx
        gy = (np.arange(self.ny) + 0.5) / self.ny
        XX, YY = np.meshgrid(gx, gy)
        return np.column_stack([XX.ravel(), YY.ravel()])

    def __len__(self):
        return self.nx * self.ny


def boundary_points(n_per_edge: int = 60) -> np.ndarray:
    """Edge points for the soft boundary loss, ``4 * n_per_edge`` in total."""
    s = (np.arange(n_per_edge) + 0.5) / n_per_edge
    zero, one = np.zeros_like(s), np.ones_like(s)
    return np.concatenate([
        np.column_stack([zero, s]), np.column_stack([one, s]),
        np.column_stack([s, zero]), np.column_stack([s, one]),
    ])


@dataclass
class LossReport:
    loss_r: float
    loss_bc: float = 0.0

    @property
    def total(self) -> float:
        return self.loss_r + self.loss_bc


@dataclass(frozen=True)
class Problem:
    """Everything the residual needs besides the network parameters."""

    surface: SurfaceModel
    adf_spec: AdfSpec = AdfSpec()
    aspect: float = DEFAULT_ASPECT
    bc_mode: str = "hard"
    trainable_freq: bool = True
    # False feeds H to the network as a spatial constant (ablation only)
    chain_h: bool = True

    def __post_init__(self):
        if self.bc_mode not in BC_MODES:
            raise ValueError(f"bc_mode must be one of {BC_MODES}")


def pressure_jet(nodes, arch, problem: Problem, x: CoordJet, y: CoordJet, h: CoordJet | None = None) -> CoordJet:
    if h is None:
        h = film_thickness(problem.surface, x, y)
    h_in = h if problem.chain_h else CoordJet.const(h.v.value)
    p_net = forward(nodes, arch, x, y, h_in)
    if problem.bc_mode == "soft":
        return p_net
    return apply_hard_bc(p_net, adf(x, y, problem.adf_spec), 0.0)


def residual_node(nodes, arch, problem: Problem, X, Y):
    """R at the points (X, Y) as a tape node of shape (n,)."""
    x = ad.seed_coordinate(X, ad.X)
    y = ad.seed_coordinate(Y, ad.Y)
    h = film_thickness(problem.surface, x, y)
    p = pressure_jet(nodes, arch, problem, x, y, h)
    h2 = h.v.value ** 2
    h3 = h2 * h.v.value
    a2 = problem.aspect ** 2
    hx, hy = h.dx.value, h.dy.value
    # d/dX(H^3 P_X) + a^2 d/dY(H^3 P_Y) - 6 H_X, product rule expanded
    return ((3.0 * h2 * hx) * p.dx + h3 * p.dxx
            + (a2 * 3.0 * h2 * hy) * p.dy + (a2 * h3) * p.dyy
            - 6.0 * hx)


def residual_at(params: NetworkParams, problem: Problem, X, Y) -> np.ndarray:
    """Residual values at one or many interior points (no gradients)."""
    Xa, Ya = np.broadcast_arrays(np.atleast_1d(np.asarray(X, dtype=np.float64)),
                                 np.atleast_1d(np.asarray(Y, dtype=np.float64)))
    Xa, Ya = Xa.ravel(), Ya.ravel()
    r = np.empty(Xa.size)
    for start in range(0, Xa.size, CHUNK):
        sl = slice(start, start + CHUNK)
        with Tape() as tape:
            nodes = params.bind(tape, problem.trainable_freq)
            r[sl] = residual_node(nodes, params.arch, problem, Xa[sl], Ya[sl]).value
        tape.clear()
    return r if np.ndim(X) or np.ndim(Y) else r[0]


def _check_soft(problem: Problem):
    if problem.bc_mode != "soft":
        raise ValueError("boundary loss only exists in soft mode")


def loss_and_grads(params: NetworkParams, problem: Problem, batch: np.ndarray,
                   bc_points: np.ndarray | None = None):
    """LossReport plus gradients for every trainable slot."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[0] == 0:
        raise ValueError("batch must be a non-empty (n, 2) array")
    with Tape() as tape:
        nodes = params.bind(tape, problem.trainable_freq)
        r = residual_node(nodes, params.arch, problem, batch[:, 0], batch[:, 1])
        loss_r = ad.mean(ad.square(r))
        total = loss_r
        loss_bc = None
        if problem.bc_mode == "soft":
            pts = boundary_points() if bc_points is None else bc_points
            loss_bc = _boundary_node(nodes, params.arch, problem, pts)
            total = loss_r + loss_bc
        grads = ad.backward(total)
        report = LossReport(float(loss_r.value), 0.0 if loss_bc is None else float(loss_bc.value))
    tape.clear()
    return report, grads


def loss_residual(params: NetworkParams, problem: Problem, batch: np.ndarray):
    """Mean squared residual over ``batch`` and its parameter gradients."""
    if problem.bc_mode == "soft":
        problem = Problem(problem.surface, problem.adf_spec, problem.aspect, "hard",
                          problem.trainable_freq, problem.chain_h)
    return loss_and_grads(params, problem, batch)


def _boundary_node(nodes, arch, problem, pts):
    pts = np.asarray(pts, dtype=np.float64)
    x = ad.seed_coordinate(pts[:, 0], ad.X)
    y = ad.seed_coordinate(pts[:, 1], ad.Y)
    p = pressure_jet(nodes, arch, problem, x, y)
    return ad.mean(ad.square(p.v))


def loss_boundary(params: NetworkParams, problem: Problem, pts: np.ndarray) -> float:
    """Mean of (P_net - 0)^2 over boundary points; soft mode only."""
    _check_soft(problem)
    with Tape() as tape:
        nodes = params.bind(tape, problem.trainable_freq)
        val = float(_boundary_node(nodes, params.arch, problem, pts).value)
    tape.clear()
    return val


def evaluate_pressure(params: NetworkParams, problem: Problem, X, Y) -> np.ndarray:
    """Network pressure at arbitrary points.

    In hard mode points on the boundary get exactly 0 (the ansatz limit).
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    shape = np.broadcast(X, Y).shape
    Xf, Yf = np.broadcast_to(X, shape).ravel(), np.broadcast_to(Y, shape).ravel()
    out = np.zeros(Xf.shape)
    inside = (Xf > 0) & (Xf < 1) & (Yf > 0) & (Yf < 1)
    mask = inside if problem.bc_mode == "hard" else np.ones_like(inside)
    idx = np.flatnonzero(mask)
    for start in range(0, idx.size, CHUNK):
        sel = idx[start:start + CHUNK]
        with Tape() as tape:
            nodes = params.bind(tape, problem.trainable_freq)
            x = ad.seed_coordinate(Xf[sel], ad.X)
            y = ad.seed_coordinate(Yf[sel], ad.Y)
            out[sel] = pressure_jet(nodes, params.arch, problem, x, y).v.value
        tape.clear()
    return out.reshape(shape)
