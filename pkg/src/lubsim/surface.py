"""Dimensionless film thickness H(X, Y) for slider bearings.

H = 1 + k (1 - X) + H_r(X, Y), where k is the wedge parameter (alpha L / h0)
and H_r is the roughness term of the selected surface kind.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .autodiff import CoordJet
from .errors import DomainError, SurfaceError

KINDS = ("smooth", "sinusoid", "texture", "gaussian")
MIN_FILM = 0.05
RMS_GRID = 120

# calibrated against the reference tables, see README "Geometry"
DEFAULT_WEDGE_K = 0.7788
DEFAULT_ASPECT = 1.0124


@dataclass(frozen=True)
class DimensionalContext:
    L: float
    B: float
    h0: float
    u: float
    eta: float

    def __post_init__(self):
        for name in ("L", "B", "h0", "u", "eta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def aspect(self) -> float:
        return self.L / self.B


def redimensionalize_pressure(P, ctx: DimensionalContext):
    """Pressure in Pa from dimensionless P (P = p h0^2 / (eta u L))."""
    return np.asarray(P, dtype=np.float64) * ctx.eta * ctx.u * ctx.L / ctx.h0 ** 2


@dataclass(frozen=True, eq=False)
class SurfaceModel:
    """Immutable film-thickness description.

    ``params`` by kind:

    * ``smooth``: none
    * ``sinusoid``: ``amplitude``, ``x_waves``, ``y_waves``
    * ``texture``: ``A``, ``lambda_x``, ``lambda_y``
    * ``gaussian``: ``rms``, ``modes``, ``seed`` plus the derived ``coef`` array
    """

    kind: str = "smooth"
    wedge_k: float = DEFAULT_WEDGE_K
    params: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SurfaceError(f"unknown surface kind {self.kind!r}")
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        required = {
            "smooth": (),
            "sinusoid": ("amplitude", "x_waves", "y_waves"),
            "texture": ("A", "lambda_x", "lambda_y"),
            "gaussian": ("rms", "modes", "seed", "coef"),
        }[self.kind]
        missing = [k for k in required if k not in self.params]
        if missing:
            raise SurfaceError(f"{self.kind} surface is missing {missing}")
        if self.kind == "texture" and (self.params["lambda_x"] <= 0 or self.params["lambda_y"] <= 0):
            raise SurfaceError("texture wavelengths must be positive")
        hmin = self.min_thickness()
        if not hmin > MIN_FILM:
            raise SurfaceError(f"film closes: min H = {hmin:.4g} <= {MIN_FILM}")

    # -- factories --------------------------------------------------------
    @classmethod
    def smooth(cls, wedge_k=DEFAULT_WEDGE_K):
        return cls("smooth", wedge_k)

    @classmethod
    def sinusoid(cls, amplitude=0.1, x_waves=4, y_waves=4, wedge_k=DEFAULT_WEDGE_K):
        return cls("sinusoid", wedge_k, {"amplitude": amplitude, "x_waves": x_waves, "y_waves": y_waves})

    @classmethod
    def texture(cls, A=0.2, lambda_x=0.02, lambda_y=0.02, wedge_k=DEFAULT_WEDGE_K):
        return cls("texture", wedge_k, {"A": A, "lambda_x": lambda_x, "lambda_y": lambda_y})

    @classmethod
    def from_dict(cls, d: dict):
        d = dict(d)
        kind = d.pop("kind", "smooth")
        wedge_k = d.pop("wedge_k", DEFAULT_WEDGE_K)
        if kind == "gaussian":
            return synthesize_gaussian(wedge_k=wedge_k, **d)
        return getattr(cls, kind)(wedge_k=wedge_k, **d)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "wedge_k": self.wedge_k}
        out.update({k: v for k, v in self.params.items() if k != "coef"})
        return out

    # -- evaluation -------------------------------------------------------
    def partials(self, X, Y):
        """Return H and its partials (H, H_X, H_Y, H_XX, H_YY, H_XY) at (X, Y)."""
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        zero = np.zeros(np.broadcast(X, Y).shape)
        h = 1.0 + self.wedge_k * (1.0 - X) + zero
        hx = -self.wedge_k + zero
        hy, hxx, hyy, hxy = zero.copy(), zero.copy(), zero.copy(), zero.copy()
        p = self.params
        if self.kind == "sinusoid":
            a = p["amplitude"]
            wx, wy = 2 * np.pi * p["x_waves"], 2 * np.pi * p["y_waves"]
            sx, cx, sy, cy = np.sin(wx * X), np.cos(wx * X), np.sin(wy * Y), np.cos(wy * Y)
            h = h + a * sx * sy
            hx = hx + a * wx * cx * sy
            hy = hy + a * wy * sx * cy
            hxx = hxx - a * wx ** 2 * sx * sy
            hyy = hyy - a * wy ** 2 * sx * sy
            hxy = hxy + a * wx * wy * cx * cy
        elif self.kind == "texture":
            a = p["A"]
            wx, wy = 1.0 / p["lambda_x"], 1.0 / p["lambda_y"]
            cx, sx, sy, cy = np.cos(wx * X), np.sin(wx * X), np.sin(wy * Y), np.cos(wy * Y)
            h = h + a * cx * sy
            hx = hx - a * wx * sx * sy
            hy = hy + a * wy * cx * cy
            hxx = hxx - a * wx ** 2 * cx * sy
            hyy = hyy - a * wy ** 2 * cx * sy
            hxy = hxy - a * wx * wy * sx * cy
        elif self.kind == "gaussian":
            r, dr_x, dr_y, dr_xx, dr_yy, dr_xy = _cosine_series(p["coef"], X, Y)
            h, hx, hy = h + r, hx + dr_x, hy + dr_y
            hxx, hyy, hxy = hxx + dr_xx, hyy + dr_yy, hxy + dr_xy
        return h, hx, hy, hxx, hyy, hxy

    def thickness(self, X, Y):
        return self.partials(X, Y)[0]

    def roughness(self, X, Y):
        return self.thickness(X, Y) - (1.0 + self.wedge_k * (1.0 - np.asarray(X, dtype=np.float64)))

    def min_thickness(self, n: int = 241) -> float:
        g = np.linspace(0.0, 1.0, n)
        XX, YY = np.meshgrid(g, g)
        return float(self.thickness(XX, YY).min())


def film_thickness(model: SurfaceModel, x: CoordJet, y: CoordJet) -> CoordJet:
    """H as a jet, composed with the coordinate jets ``x`` and ``y``."""
    xv, yv = np.asarray(x.v.value), np.asarray(y.v.value)
    if np.any((xv < 0) | (xv > 1) | (yv < 0) | (yv > 1)):
        raise DomainError("film thickness evaluated outside the unit square")
    h, hx, hy, hxx, hyy, hxy = model.partials(xv, yv)
    return CoordJet(
        h,
        hx * x.dx + hy * y.dx,
        hx * x.dy + hy * y.dy,
        hxx * (x.dx * x.dx) + 2.0 * hxy * (x.dx * y.dx) + hyy * (y.dx * y.dx) + hx * x.dxx + hy * y.dxx,
        hxx * (x.dy * x.dy) + 2.0 * hxy * (x.dy * y.dy) + hyy * (y.dy * y.dy) + hx * x.dyy + hy * y.dyy,
    )


# --------------------------------------------------------------------------
# Gaussian roughness: truncated cosine series cos(pi p X) cos(pi q Y)

def _cosine_series(coef: np.ndarray, X, Y):
    m = coef.shape[0]
    k = np.pi * np.arange(m)
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    ax = X[..., None] * k
    ay = Y[..., None] * k
    cx, sx = np.cos(ax), np.sin(ax)
    cy, sy = np.cos(ay), np.sin(ay)
    # coef[q, p] multiplies cos(pi p X) cos(pi q Y)
    ein = lambda fx, fy: np.einsum("...p,qp,...q->...", fx, coef, fy)
    r = ein(cx, cy)
    rx = ein(-k * sx, cy)
    ry = ein(cx, -k * sy)
    rxx = ein(-k ** 2 * cx, cy)
    ryy = ein(cx, -k ** 2 * cy)
    rxy = ein(-k * sx, -k * sy)
    return r, rx, ry, rxx, ryy, rxy


def _midpoints(n):
    return (np.arange(n) + 0.5) / n


def synthesize_gaussian(rms: float = 0.1, modes: int = 12, seed: int = 0,
                        wedge_k: float = DEFAULT_WEDGE_K) -> SurfaceModel:
    """Seeded Gaussian random roughness with a Gaussian spectral envelope.

    The constant mode is excluded, so the surface mean vanishes (exactly on
    any cell-centred or trapezoid-weighted grid finer than the series).
    """
    if not rms > 0:
        raise SurfaceError("rms must be positive")
    modes = int(modes)
    if modes < 1:
        raise SurfaceError("modes must be >= 1")
    rng = np.random.default_rng(seed)
    # wavenumber indices 0..modes in each direction
    n = modes + 1
    q, p = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    width = modes / 2.0
    envelope = np.exp(-(p ** 2 + q ** 2) / (2.0 * width ** 2))
    coef = rng.standard_normal((n, n)) * envelope
    coef[0, 0] = 0.0
    g = _midpoints(RMS_GRID)
    XX, YY = np.meshgrid(g, g)
    measured = np.sqrt(np.mean(_cosine_series(coef, XX, YY)[0] ** 2))
    coef = coef * (rms / measured)
    coef.setflags(write=False)
    return SurfaceModel("gaussian", wedge_k, {"rms": float(rms), "modes": modes, "seed": int(seed), "coef": coef})
