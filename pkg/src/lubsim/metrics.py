"""Load capacity, peak pressure and reference-vs-candidate comparisons."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .femref import PressureField


def load_capacity(field: PressureField) -> float:
    """Integral of P over the unit square by the 2-D trapezoid rule."""
    inner = np.trapezoid(field.values, field.x, axis=1)
    return float(np.trapezoid(inner, field.y))


def load_capacity_1d(values: np.ndarray, x: np.ndarray | None = None) -> float:
    """Trapezoid integral of a single row (the infinitely-wide bearing limit)."""
    values = np.asarray(values, dtype=np.float64)
    x = np.linspace(0.0, 1.0, values.size) if x is None else x
    return float(np.trapezoid(values, x))


def max_pressure(field: PressureField) -> tuple[float, tuple[float, float]]:
    """Largest nodal value and its (X, Y); ties go to the lowest row-major index."""
    k = int(np.argmax(field.values))
    j, i = divmod(k, field.nx)
    return float(field.values[j, i]), (float(field.x[i]), float(field.y[j]))


def rel_error_pct(ref: float, cand: float) -> float:
    if ref == 0:
        raise ZeroDivisionError("relative error against a zero reference")
    return abs(cand - ref) / abs(ref) * 100.0


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    reference: float
    candidate: float

    @property
    def rel_error_pct(self) -> float:
        return rel_error_pct(self.reference, self.candidate)


@dataclass(frozen=True)
class Comparison:
    rows: tuple
    error: np.ndarray
    centerline: np.ndarray

    def row(self, metric: str) -> ComparisonRow:
        for r in self.rows:
            if r.metric == metric:
                return r
        raise KeyError(metric)


def centerline(field: PressureField, y0: float = 0.5) -> np.ndarray:
    """P(X, y0), linearly interpolated between the two bracketing node rows."""
    y = field.y
    j = int(np.clip(np.searchsorted(y, y0) - 1, 0, field.ny - 2))
    w = (y0 - y[j]) / (y[j + 1] - y[j])
    if w == 0.0:
        return field.values[j].copy()
    if w == 1.0:
        return field.values[j + 1].copy()
    return (1.0 - w) * field.values[j] + w * field.values[j + 1]


def compare(ref: PressureField, cand: PressureField) -> Comparison:
    if not ref.same_grid(cand):
        raise ValueError(f"grid mismatch: {ref.nx}x{ref.ny} vs {cand.nx}x{cand.ny}")
    rows = (
        ComparisonRow("max_pressure", max_pressure(ref)[0], max_pressure(cand)[0]),
        ComparisonRow("load_capacity", load_capacity(ref), load_capacity(cand)),
    )
    error = np.abs(cand.values - ref.values)
    line = np.column_stack([ref.x, centerline(ref), centerline(cand)])
    return Comparison(rows, error, line)
