"""scikit-learn style wrappers.

``fit(X)`` takes the (n, 2) array of interior collocation points (X, Y) the
solver should use; ``predict(X)`` returns dimensionless pressure at arbitrary
points of the closed unit square. Neither estimator learns from targets, so
``y`` is accepted and ignored.
"""
from __future__ import annotations

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .boundary import AdfSpec
from .femref import solve_case
from .ffnet import Architecture
from .residual import CollocationSet, Problem, evaluate_pressure
from .surface import DEFAULT_ASPECT, SurfaceModel
from .trainer import TrainConfig, train


def _check_points(X, interior: bool):
    X = check_array(X, dtype=np.float64, ensure_min_samples=1)
    if X.shape[1] != 2:
        raise ValueError(f"expected (n, 2) coordinates, got {X.shape[1]} columns")
    if interior and np.any((X <= 0) | (X >= 1)):
        raise ValueError("collocation points must lie strictly inside the unit square")
    if not interior and np.any((X < 0) | (X > 1)):
        raise ValueError("points must lie in the closed unit square")
    return X


class MLNNRegressor(RegressorMixin, BaseEstimator):
    """Physics-informed network for the Reynolds equation on ``surface``."""

    def __init__(self, surface=None, aspect=DEFAULT_ASPECT, sigmas=(1.0, 20.0, 50.0), n_freqs=30,
                 hidden_layers=5, neurons=100, activation="sigmoid", epochs=1000, batch_size=1000,
                 lr0=0.01, decay=0.005, trainable_freq=True, bc_mode="hard", adf_m=1, random_state=0):
        self.surface = surface
        self.aspect = aspect
        self.sigmas = sigmas
        self.n_freqs = n_freqs
        self.hidden_layers = hidden_layers
        self.neurons = neurons
        self.activation = activation
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr0 = lr0
        self.decay = decay
        self.trainable_freq = trainable_freq
        self.bc_mode = bc_mode
        self.adf_m = adf_m
        self.random_state = random_state

    def _problem(self):
        surface = SurfaceModel.smooth() if self.surface is None else self.surface
        return Problem(surface, AdfSpec(self.adf_m), self.aspect, self.bc_mode, self.trainable_freq)

    def fit(self, X=None, y=None):
        pts = CollocationSet().points if X is None else _check_points(X, interior=True)
        arch = Architecture(tuple(self.sigmas), self.n_freqs, self.hidden_layers, self.neurons, self.activation)
        cfg = TrainConfig(self.epochs, min(self.batch_size, len(pts)), self.lr0, self.decay,
                          seed=int(self.random_state),
                          mode="trainable_freq" if self.trainable_freq else "fixed_freq", bc_mode=self.bc_mode)
        self.problem_ = self._problem()
        result = train(cfg, arch, self.problem_, _FixedPoints(pts))
        self.params_ = result.params
        self.loss_history_ = np.array([rep.total for _, rep, _ in result.history])
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        X = _check_points(X, interior=False)
        return evaluate_pressure(self.params_, self.problem_, X[:, 0], X[:, 1])


class ReferenceSolver(RegressorMixin, BaseEstimator):
    """Finite-difference solution, bilinearly interpolated for ``predict``."""

    def __init__(self, surface=None, aspect=DEFAULT_ASPECT, nx=60, ny=60, tol=1e-10):
        self.surface = surface
        self.aspect = aspect
        self.nx = nx
        self.ny = ny
        self.tol = tol

    def fit(self, X=None, y=None):
        if X is not None:
            _check_points(X, interior=False)
        surface = SurfaceModel.smooth() if self.surface is None else self.surface
        res = solve_case(surface, self.nx, self.ny, self.aspect, self.tol)
        self.field_ = res.field
        self.max_pressure_ = res.max_pressure
        self.load_capacity_ = res.load_capacity
        self._interp = RegularGridInterpolator((res.field.y, res.field.x), res.field.values)
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "field_")
        X = _check_points(X, interior=False)
        return self._interp(X[:, ::-1])


class _FixedPoints:
    """Duck-typed CollocationSet over user-supplied points."""

    def __init__(self, pts):
        self.points = pts

    def __len__(self):
        return len(self.points)
