"""Approximate distance function for the unit square and the hard-BC ansatz."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import CoordJet, jet_unary
from .errors import DomainError


@dataclass(frozen=True)
class AdfSpec:
    """Edges X, 1-X, Y, 1-Y combined by R-equivalence normalized to order ``m``."""

    m: int = 1

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError("ADF order m must be a positive integer")


def _jet_pow_int(a: CoordJet, m: int) -> CoordJet:
    out = a
    for _ in range(m - 1):
        out = out * a
    return out


def _jet_root(a: CoordJet, m: int) -> CoordJet:
    # a ** (1/m) for a > 0
    if m == 1:
        return a
    from .autodiff import power

    p = 1.0 / m
    f0 = power(a.v, p)
    f1 = p * power(a.v, p - 1.0)
    f2 = p * (p - 1.0) * power(a.v, p - 2.0)
    return CoordJet(
        f0,
        f1 * a.dx,
        f1 * a.dy,
        f2 * (a.dx * a.dx) + f1 * a.dxx,
        f2 * (a.dy * a.dy) + f1 * a.dyy,
    )


def adf(x: CoordJet, y: CoordJet, spec: AdfSpec = AdfSpec()) -> CoordJet:
    """Phi = (sum_i Phi_i^-m)^(-1/m) over the four edge distances."""
    xv, yv = np.asarray(x.v.value), np.asarray(y.v.value)
    if np.any((xv <= 0) | (xv >= 1) | (yv <= 0) | (yv >= 1)):
        raise DomainError("ADF is singular on or outside the boundary; use interior points")
    edges = (x, 1.0 - x, y, 1.0 - y)
    total = None
    for e in edges:
        term = jet_unary(_jet_pow_int(e, spec.m), "recip")
        total = term if total is None else total + term
    return jet_unary(_jet_root(total, spec.m), "recip")


def adf_value(X, Y, m: int = 1):
    """Plain-array Phi; returns exactly 0 on the boundary (analytic limit)."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    d = np.stack(np.broadcast_arrays(X, 1.0 - X, Y, 1.0 - Y))
    on_edge = np.any(d <= 0.0, axis=0)
    with np.errstate(divide="ignore"):
        s = np.sum(np.where(d > 0, d, 1.0) ** (-float(m)), axis=0)
    return np.where(on_edge, 0.0, s ** (-1.0 / m))


def apply_hard_bc(p_net: CoordJet, phi: CoordJet, p_bc: float = 0.0) -> CoordJet:
    """P = P_bc + Phi * P_net."""
    return phi * p_net + p_bc
