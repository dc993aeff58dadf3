"""``lubsim`` command line.

Exit codes: 0 ok, 2 config or usage, 3 surface construction, 4 solver
non-convergence, 5 training divergence.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from pathlib import Path

from threadpoolctl import threadpool_limits

from . import __version__
from .config import RunConfig, load_config, resolve_seed
from .errors import ConfigError, SolverError, SurfaceError, TrainingDivergence
from .ffnet import NetworkParams
from .metrics import compare
from .pipeline import bench_freq, evaluate_model, run_fem, run_train
from .reports import (read_field_csv, write_centerline_csv, write_comparison_csv, write_field_csv,
                      write_json, write_ppm, write_rows_csv, write_surface_csv)
from .trainer import write_history

log = logging.getLogger("lubsim")

EXIT_OK, EXIT_USAGE, EXIT_SURFACE, EXIT_SOLVER, EXIT_DIVERGED = 0, 2, 3, 4, 5


class _Deterministic:
    """Where timings go: the summary normally, a plain-text log under --deterministic."""

    def __init__(self, enabled: bool, out: Path):
        self.enabled = enabled
        self.out = out
        self.lines: list[str] = []

    def wall(self, seconds: float | None, label: str) -> float | None:
        if not self.enabled:
            return seconds
        if seconds is not None:
            self.lines.append(f"{label} {seconds:.3f}")
        return None

    def flush(self):
        if self.enabled and self.lines:
            (self.out / "timing.log").write_text("\n".join(self.lines) + "\n")


def _out_dir(path: str | None) -> Path:
    out = Path(path or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_info(cfg: RunConfig, extra: dict | None = None) -> dict:
    info = {
        "config": cfg.to_dict(),
        "geometry_source": "wedge_k and L/B are inferred defaults (not published); "
                           "calibrated against the smooth-case reference values",
        "lr_schedule": "inverse-time: lr0 / (1 + decay * t)",
        "n_params": cfg.architecture().n_params(),
        "version": __version__,
    }
    info.update(extra or {})
    return info


def _config(args) -> RunConfig:
    if not args.config:
        raise ConfigError("--config is required for this command")
    cfg = resolve_seed(load_config(args.config), args.seed)
    if getattr(args, "epochs", None) is not None:
        cfg = cfg.with_overrides(epochs=args.epochs)
    if getattr(args, "fixed_freq", False):
        cfg = cfg.with_overrides(mode="fixed_freq")
    if getattr(args, "soft_bc", False):
        cfg = cfg.with_overrides(bc_mode="soft")
    return cfg


def cmd_surface(args) -> int:
    cfg = _config(args)
    surface = cfg.build_surface()
    target = Path(args.out or "surface.csv")
    if target.suffix != ".csv":
        target.mkdir(parents=True, exist_ok=True)
        target = target / "surface.csv"
    else:
        target.parent.mkdir(parents=True, exist_ok=True)
    write_surface_csv(target, surface, cfg.grids.eval_nx, cfg.grids.eval_ny)
    return EXIT_OK


def cmd_fem(args) -> int:
    cfg = _config(args)
    out = _out_dir(args.out)
    det = _Deterministic(args.deterministic, out)
    res, summary = run_fem(cfg)
    summary.wall_time_s = det.wall(summary.wall_time_s, "fem_s")
    write_field_csv(out / "field.csv", res.field)
    write_json(out / "summary.json", summary.to_json())
    write_json(out / "run_info.json", _run_info(cfg))
    det.flush()
    print(f"max_pressure={res.max_pressure:.6g} load_capacity={res.load_capacity:.6g}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args)
    out = _out_dir(args.out)
    det = _Deterministic(args.deterministic, out)

    def progress(epoch, rep):
        if epoch % 100 == 0:
            log.info("epoch %d loss %.4e", epoch, rep.total)

    run = run_train(cfg, out, progress)
    summary = run.summary
    summary.wall_time_s = det.wall(summary.wall_time_s, "train_s")
    run.params.save(out / "model.json")
    write_history(out / "loss.csv", run.result.history)
    write_field_csv(out / "field.csv", run.field)
    write_json(out / "summary.json", summary.to_json())
    write_json(out / "run_info.json", _run_info(cfg))
    det.flush()
    print(f"max_pressure={summary.max_pressure:.6g} load_capacity={summary.load_capacity:.6g} "
          f"final_loss={summary.final_loss}")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _config(args)
    out = _out_dir(args.out)
    det = _Deterministic(args.deterministic, out)
    model = Path(args.model) if args.model else out / "model.json"
    try:
        params = NetworkParams.load(model)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load model {model}: {exc}") from exc
    if params.arch != cfg.architecture():
        raise ConfigError("model architecture does not match the config")
    field, summary = evaluate_model(cfg, params)
    summary.wall_time_s = det.wall(summary.wall_time_s, "eval_s")
    write_field_csv(out / "field.csv", field)
    write_json(out / "summary.json", summary.to_json())
    det.flush()
    return EXIT_OK


def _field_arg(path: str):
    p = Path(path)
    if p.is_dir():
        p = p / "field.csv"
    try:
        return read_field_csv(p)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read field {p}: {exc}") from exc


def cmd_compare(args) -> int:
    if not (args.ref and args.cand):
        raise ConfigError("compare needs --ref and --cand (run directories or field CSVs)")
    ref, cand = _field_arg(args.ref), _field_arg(args.cand)
    try:
        comp = compare(ref, cand)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(args.out)
    write_comparison_csv(out / "comparison.csv", comp)
    write_centerline_csv(out / "centerline.csv", comp)
    if args.ppm:
        write_ppm(out / "error.ppm", comp.error)
    for r in comp.rows:
        print(f"{r.metric}: ref={r.reference:.6g} cand={r.candidate:.6g} err={r.rel_error_pct:.3f}%")
    return EXIT_OK


def cmd_bench_freq(args) -> int:
    cfg = _config(args)
    out = _out_dir(args.out)
    det = _Deterministic(args.deterministic, out)
    res = bench_freq(cfg)
    write_rows_csv(out / "bench_freq.csv", ("metric", "fem", "mlnn", "mlnn_err", "ffn", "ffn_err"), res.rows())
    timings = res.timings()
    if args.deterministic:
        for k, v in timings.items():
            det.wall(v, k)
    else:
        write_json(out / "bench_freq_timing.json", timings)
    det.flush()
    for row in res.rows():
        print("{}: fem={:.6g} mlnn={:.6g} ({:.2f}%) ffn={:.6g} ({:.2f}%)".format(*row))
    return EXIT_OK


COMMANDS = {
    "surface": cmd_surface,
    "fem": cmd_fem,
    "train": cmd_train,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "bench-freq": cmd_bench_freq,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lubsim", description="Rough-surface slider bearing solver")
    ap.add_argument("--version", action="version", version=f"lubsim {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config JSON path or preset name (e.g. case3_texture)")
    common.add_argument("--out", help="output directory (surface: a .csv path is also accepted)")
    common.add_argument("--seed", type=int, default=None, help="overrides config and LUBSIM_SEED")
    common.add_argument("--threads", type=int, default=None, help="BLAS worker threads")
    common.add_argument("--deterministic", action="store_true",
                        help="single thread; timings go to timing.log instead of JSON")
    common.add_argument("--fixed-freq", action="store_true", help="freeze Fourier frequencies")
    common.add_argument("--soft-bc", action="store_true", help="penalty boundary loss instead of the ADF ansatz")
    common.add_argument("--ppm", action="store_true", help="compare: also write an error heatmap")
    common.add_argument("--epochs", type=int, default=None, help="override training.epochs")
    common.add_argument("--model", help="eval: model JSON (default <out>/model.json)")
    common.add_argument("--ref", help="compare: reference run directory or field CSV")
    common.add_argument("--cand", help="compare: candidate run directory or field CSV")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    threads = 1 if args.deterministic else args.threads
    limiter = threadpool_limits(limits=threads) if threads else contextlib.nullcontext()
    try:
        with limiter:
            return COMMANDS[args.command](args)
    except SurfaceError as exc:
        print(f"surface error: {exc}", file=sys.stderr)
        return EXIT_SURFACE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except TrainingDivergence as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
