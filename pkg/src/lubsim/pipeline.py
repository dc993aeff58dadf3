"""End-to-end runs shared by the CLI, the estimators and the acceptance suite."""
from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig, RunSummary
from .femref import FemResult, PressureField, solve_case
from .ffnet import NetworkParams, init
from .metrics import load_capacity, max_pressure, rel_error_pct
from .residual import Problem, evaluate_pressure
from .trainer import TrainResult, train


def network_field(params: NetworkParams, problem: Problem, nx: int, ny: int) -> PressureField:
    """Network pressure sampled on the closed node grid (boundary nodes are 0 in hard mode)."""
    x = np.linspace(0.0, 1.0, nx)
    y = np.linspace(0.0, 1.0, ny)
    XX, YY = np.meshgrid(x, y)
    return PressureField(nx, ny, evaluate_pressure(params, problem, XX, YY))


def run_fem(cfg: RunConfig) -> tuple[FemResult, RunSummary]:
    res = solve_case(cfg.build_surface(), cfg.grids.eval_nx, cfg.grids.eval_ny, cfg.geometry.aspect_L_over_B)
    summary = RunSummary(res.max_pressure, res.load_capacity, res.wall_time_s, 0, None,
                         cfg.config_hash(), cfg.training.seed, {"solver": "fem"})
    return res, summary


@dataclass
class TrainedRun:
    result: TrainResult
    field: PressureField
    summary: RunSummary
    problem: Problem

    @property
    def params(self) -> NetworkParams:
        return self.result.params


def mode_flags(cfg: RunConfig) -> dict:
    return {"solver": "mlnn" if cfg.training.mode == "trainable_freq" else "ffn",
            "freq": cfg.training.mode, "bc": cfg.boundary.mode, "chain_h": cfg.training.chain_h}


def run_train(cfg: RunConfig, out: str | Path | None = None, progress=None) -> TrainedRun:
    problem = cfg.problem()
    result = train(cfg.train_config(), cfg.architecture(), problem, cfg.collocation(), out, progress=progress)
    t0 = time.perf_counter()
    field = network_field(result.params, problem, cfg.grids.eval_nx, cfg.grids.eval_ny)
    eval_time = time.perf_counter() - t0
    summary = RunSummary(max_pressure(field)[0], load_capacity(field), result.wall_time_s + eval_time,
                         result.epochs_run, result.final_loss, cfg.config_hash(), cfg.training.seed,
                         mode_flags(cfg), [(e, r.total) for e, r, _ in result.history])
    return TrainedRun(result, field, summary, problem)


def evaluate_model(cfg: RunConfig, params: NetworkParams) -> tuple[PressureField, RunSummary]:
    problem = cfg.problem()
    t0 = time.perf_counter()
    field = network_field(params, problem, cfg.grids.eval_nx, cfg.grids.eval_ny)
    summary = RunSummary(max_pressure(field)[0], load_capacity(field), time.perf_counter() - t0, 0, None,
                         cfg.config_hash(), cfg.training.seed, mode_flags(cfg))
    return field, summary


def untrained(cfg: RunConfig) -> NetworkParams:
    return init(cfg.architecture(), cfg.training.seed)


@dataclass
class BenchResult:
    fem: FemResult
    mlnn: TrainedRun
    ffn: TrainedRun

    def rows(self):
        out = []
        for metric in ("max_pressure", "load_capacity"):
            ref = getattr(self.fem, metric)
            m = getattr(self.mlnn.summary, metric)
            f = getattr(self.ffn.summary, metric)
            out.append((metric, ref, m, rel_error_pct(ref, m), f, rel_error_pct(ref, f)))
        return out

    def timings(self) -> dict:
        t_m, t_f = self.mlnn.result.wall_time_s, self.ffn.result.wall_time_s
        return {"fem_s": self.fem.wall_time_s, "mlnn_train_s": t_m, "ffn_train_s": t_f,
                "ratio_mlnn_over_ffn": t_m / t_f if t_f > 0 else None}


def bench_freq(cfg: RunConfig, progress=None) -> BenchResult:
    """FD reference, trainable-frequency and fixed-frequency training at one seed."""
    fem, _ = run_fem(cfg)
    mlnn = run_train(cfg.with_overrides(mode="trainable_freq"), progress=progress)
    ffn = run_train(cfg.with_overrides(mode="fixed_freq"), progress=progress)
    return BenchResult(fem, mlnn, ffn)
