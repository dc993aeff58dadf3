"""Adam training loop for the network pressure.

One optimizer step per epoch on a batch drawn from a fresh shuffle of the
collocation set. The step size follows the inverse-time schedule
``lr0 / (1 + decay * t)``.
"""
from __future__ import annotations

import csv
import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, TrainingDivergence
from .ffnet import Architecture, NetworkParams, init
from .residual import CollocationSet, LossReport, Problem, boundary_points, loss_and_grads

log = logging.getLogger(__name__)

MODES = ("trainable_freq", "fixed_freq")
CKPT_EVERY = 100


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 1000
    batch_size: int = 1000
    lr0: float = 0.01
    decay: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    mode: str = "trainable_freq"
    bc_mode: str = "hard"
    # four steps per epoch so every point is visited (ablation only)
    full_coverage: bool = False

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not (self.lr0 > 0 and self.eps > 0):
            raise ConfigError("lr0 and eps must be positive")
        if self.decay < 0:
            raise ConfigError("decay must be >= 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("betas must lie in [0, 1)")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.bc_mode not in ("hard", "soft"):
            raise ConfigError("bc_mode must be 'hard' or 'soft'")

    @property
    def trainable_freq(self) -> bool:
        return self.mode == "trainable_freq"


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0

    @classmethod
    def zeros_like(cls, params: NetworkParams) -> "AdamState":
        return cls({k: np.zeros_like(a) for k, a in params.arrays.items()},
                   {k: np.zeros_like(a) for k, a in params.arrays.items()}, 0)


def lr_at(t: int, cfg: TrainConfig) -> float:
    if t < 0:
        raise ValueError("step index must be >= 0")
    return cfg.lr0 / (1.0 + cfg.decay * t)


def adam_step(params: NetworkParams, grads: dict, state: AdamState, cfg: TrainConfig,
              frozen: tuple = ()) -> tuple[NetworkParams, AdamState]:
    """One bias-corrected Adam update. Arrays in ``params`` are replaced, not mutated.

    The rate used for the k-th update (t = k after increment) is ``lr_at(k - 1)``,
    so the first step runs at ``lr0``.
    """
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingDivergence(f"non-finite gradient in parameter slot {name!r}")
    lr = lr_at(state.t, cfg)
    t = state.t + 1
    b1, b2 = cfg.beta1, cfg.beta2
    c1, c2 = 1.0 - b1 ** t, 1.0 - b2 ** t
    new_arrays, m, v = {}, {}, {}
    for name, theta in params.arrays.items():
        if name in frozen or name not in grads:
            new_arrays[name], m[name], v[name] = theta, state.m[name], state.v[name]
            continue
        g = grads[name]
        m[name] = b1 * state.m[name] + (1.0 - b1) * g
        v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        new_arrays[name] = theta - lr * (m[name] / c1) / (np.sqrt(v[name] / c2) + cfg.eps)
    return NetworkParams(params.arch, new_arrays), AdamState(m, v, t)


@dataclass
class TrainResult:
    params: NetworkParams
    state: AdamState
    history: list = field(default_factory=list)
    wall_time_s: float = 0.0
    epochs_run: int = 0

    @property
    def final_loss(self) -> float | None:
        return self.history[-1][1].total if self.history else None


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def save_checkpoint(out: Path, epoch: int, params: NetworkParams, state: AdamState) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    doc = params.to_dict()
    doc["epoch"] = epoch
    doc["adam_t"] = state.t
    path = out / f"ckpt_{epoch}.json"
    _atomic_write(path, json.dumps(doc))
    return path


def write_history(path, history):
    """Loss CSV ``epoch,loss_total,loss_r,loss_bc,lr``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "loss_total", "loss_r", "loss_bc", "lr"])
        for epoch, rep, lr in history:
            w.writerow([epoch, repr(rep.total), repr(rep.loss_r), repr(rep.loss_bc), repr(lr)])


def make_problem(surface, adf_spec, aspect, cfg: TrainConfig, chain_h: bool = True) -> Problem:
    return Problem(surface, adf_spec, aspect, cfg.bc_mode, cfg.trainable_freq, chain_h)


def train(cfg: TrainConfig, arch: Architecture, problem: Problem,
          colloc: CollocationSet = CollocationSet(), out: str | os.PathLike | None = None,
          params: NetworkParams | None = None, progress=None) -> TrainResult:
    """Run the training protocol.

    ``problem.trainable_freq`` and ``problem.bc_mode`` must agree with ``cfg``.
    With ``out`` set, a checkpoint is written every 100 epochs and once more
    before a divergence is raised.
    """
    if problem.trainable_freq != cfg.trainable_freq or problem.bc_mode != cfg.bc_mode:
        raise ConfigError("problem flags disagree with the training config")
    pts = colloc.points
    if cfg.batch_size > len(pts):
        raise ConfigError(f"batch_size {cfg.batch_size} exceeds {len(pts)} collocation points")
    out = Path(out) if out is not None else None
    rng = np.random.default_rng(cfg.seed)
    params = init(arch, cfg.seed) if params is None else params
    state = AdamState.zeros_like(params)
    frozen = () if cfg.trainable_freq else tuple(params.freq_names())
    bc_pts = boundary_points() if cfg.bc_mode == "soft" else None
    steps = len(pts) // cfg.batch_size if cfg.full_coverage else 1
    history = []
    t0 = time.perf_counter()
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(pts))
        parts = []
        for k in range(steps):
            batch = pts[order[k * cfg.batch_size:(k + 1) * cfg.batch_size]]
            lr = lr_at(state.t, cfg)
            rep, grads = loss_and_grads(params, problem, batch, bc_pts)
            if not np.isfinite(rep.total):
                _flush(out, epoch - 1, params, state)
                raise TrainingDivergence(f"non-finite loss at epoch {epoch}")
            try:
                params, state = adam_step(params, grads, state, cfg, frozen)
            except TrainingDivergence:
                _flush(out, epoch - 1, params, state)
                raise
            parts.append(rep)
        rep = parts[0] if steps == 1 else LossReport(
            float(np.mean([p.loss_r for p in parts])), float(np.mean([p.loss_bc for p in parts])))
        history.append((epoch, rep, lr))
        if progress is not None:
            progress(epoch, rep)
        if epoch % 100 == 0:
            log.info("epoch %d loss %.4e", epoch, rep.total)
        if out is not None and epoch % CKPT_EVERY == 0:
            save_checkpoint(out, epoch, params, state)
    wall = time.perf_counter() - t0
    return TrainResult(params, state, history, wall, cfg.epochs)


def _flush(out, epoch, params, state):
    if out is not None:
        path = save_checkpoint(out, epoch, params, state)
        log.error("training diverged; last good parameters in %s", path)


def config_dict(cfg: TrainConfig) -> dict:
    return asdict(cfg)
