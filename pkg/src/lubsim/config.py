"""Strict JSON run configuration and the run summary record."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

from .boundary import AdfSpec
from .errors import ConfigError
from .ffnet import Architecture
from .residual import CollocationSet, Problem
from .surface import DEFAULT_ASPECT, DEFAULT_WEDGE_K, DimensionalContext, SurfaceModel
from .trainer import TrainConfig

SEED_ENV = "LUBSIM_SEED"

# keys accepted under "surface" per kind (besides "kind")
SURFACE_KEYS = {
    "smooth": set(),
    "sinusoid": {"amplitude", "x_waves", "y_waves"},
    "texture": {"A", "lambda_x", "lambda_y"},
    "gaussian": {"rms", "modes", "seed"},
}


@dataclass(frozen=True)
class Geometry:
    wedge_k: float = DEFAULT_WEDGE_K
    aspect_L_over_B: float = DEFAULT_ASPECT


@dataclass(frozen=True)
class NetworkSection:
    sigmas: tuple = (1.0, 20.0, 50.0)
    freqs_per_sigma: int = 30
    hidden_layers: int = 5
    neurons: int = 100
    activation: str = "sigmoid"


@dataclass(frozen=True)
class TrainingSection:
    epochs: int = 1000
    batch_size: int = 1000
    lr0: float = 0.01
    decay: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    mode: str = "trainable_freq"
    full_coverage: bool = False
    # differentiate through the H input of the network (False: H held constant)
    chain_h: bool = True


@dataclass(frozen=True)
class Grids:
    collocation_nx: int = 60
    collocation_ny: int = 60
    eval_nx: int = 60
    eval_ny: int = 60


@dataclass(frozen=True)
class BoundarySection:
    mode: str = "hard"
    adf_m: int = 1


def _section(cls, raw, where):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    vals = dict(raw)
    if cls is NetworkSection and "sigmas" in vals:
        if not isinstance(vals["sigmas"], (list, tuple)):
            raise ConfigError("network.sigmas must be a list")
        vals["sigmas"] = tuple(float(s) for s in vals["sigmas"])
    return cls(**vals)


@dataclass(frozen=True)
class RunConfig:
    name: str = ""
    geometry: Geometry = field(default_factory=Geometry)
    surface: dict = field(default_factory=lambda: {"kind": "smooth"})
    network: NetworkSection = field(default_factory=NetworkSection)
    training: TrainingSection = field(default_factory=TrainingSection)
    grids: Grids = field(default_factory=Grids)
    boundary: BoundarySection = field(default_factory=BoundarySection)
    dimensional: dict | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
        surface = dict(d.get("surface") or {"kind": "smooth"})
        kind = surface.get("kind", "smooth")
        if kind not in SURFACE_KEYS:
            raise ConfigError(f"unknown surface kind {kind!r}")
        extra = set(surface) - SURFACE_KEYS[kind] - {"kind"}
        if extra:
            raise ConfigError(f"unknown keys for {kind} surface: {sorted(extra)}")
        surface["kind"] = kind
        dim = d.get("dimensional")
        if dim is not None:
            bad = set(dim) - {"L", "B", "h0", "u", "eta"}
            if bad:
                raise ConfigError(f"unknown keys in dimensional: {sorted(bad)}")
        try:
            cfg = cls(
                name=str(d.get("name", "")),
                geometry=_section(Geometry, d.get("geometry"), "geometry"),
                surface=surface,
                network=_section(NetworkSection, d.get("network"), "network"),
                training=_section(TrainingSection, d.get("training"), "training"),
                grids=_section(Grids, d.get("grids"), "grids"),
                boundary=_section(BoundarySection, d.get("boundary"), "boundary"),
                dimensional=dict(dim) if dim is not None else None,
            )
            # validate everything that can be validated without building the surface
            cfg.architecture()
            cfg.train_config()
            cfg.adf_spec()
            cfg.collocation()
            cfg.dimensional_context()
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if cfg.grids.eval_nx < 3 or cfg.grids.eval_ny < 3:
            raise ConfigError("eval grid needs at least 3 nodes per direction")
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["network"]["sigmas"] = list(self.network.sigmas)
        return d

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def with_overrides(self, seed: int | None = None, mode: str | None = None,
                       bc_mode: str | None = None, epochs: int | None = None) -> "RunConfig":
        tr, bd = self.training, self.boundary
        if seed is not None:
            tr = TrainingSection(**{**asdict(tr), "seed": int(seed)})
        if mode is not None:
            tr = TrainingSection(**{**asdict(tr), "mode": mode})
        if epochs is not None:
            tr = TrainingSection(**{**asdict(tr), "epochs": int(epochs)})
        if bc_mode is not None:
            bd = BoundarySection(mode=bc_mode, adf_m=bd.adf_m)
        d = self.to_dict()
        d["training"], d["boundary"] = asdict(tr), asdict(bd)
        return RunConfig.from_dict(d)

    # -- builders ---------------------------------------------------------
    def build_surface(self) -> SurfaceModel:
        return SurfaceModel.from_dict({**self.surface, "wedge_k": self.geometry.wedge_k})

    def architecture(self) -> Architecture:
        n = self.network
        return Architecture(n.sigmas, n.freqs_per_sigma, n.hidden_layers, n.neurons, n.activation)

    def train_config(self) -> TrainConfig:
        t = self.training
        return TrainConfig(t.epochs, t.batch_size, t.lr0, t.decay, t.beta1, t.beta2, t.eps,
                           t.seed, t.mode, self.boundary.mode, t.full_coverage)

    def adf_spec(self) -> AdfSpec:
        return AdfSpec(self.boundary.adf_m)

    def collocation(self) -> CollocationSet:
        return CollocationSet(self.grids.collocation_nx, self.grids.collocation_ny)

    def problem(self, surface: SurfaceModel | None = None) -> Problem:
        surface = self.build_surface() if surface is None else surface
        return Problem(surface, self.adf_spec(), self.geometry.aspect_L_over_B, self.boundary.mode,
                       self.training.mode == "trainable_freq", self.training.chain_h)

    def dimensional_context(self) -> DimensionalContext | None:
        return None if self.dimensional is None else DimensionalContext(**self.dimensional)


def resolve_seed(cfg: RunConfig, cli_seed: int | None) -> RunConfig:
    """Seed precedence: ``--seed`` beats ``LUBSIM_SEED`` beats the config file."""
    if cli_seed is not None:
        return cfg.with_overrides(seed=cli_seed)
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return cfg.with_overrides(seed=int(env))
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    return cfg


def preset_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("lubsim.cases").iterdir() if p.name.endswith(".json"))


def load_config(ref: str) -> RunConfig:
    """A config file path, or the name of a shipped case preset."""
    path = Path(ref)
    if path.exists():
        return RunConfig.load(path)
    name = ref[:-5] if ref.endswith(".json") else ref
    if name in preset_names():
        with resources.as_file(resources.files("lubsim.cases") / f"{name}.json") as p:
            return RunConfig.load(p)
    raise ConfigError(f"no config file or preset named {ref!r} (presets: {', '.join(preset_names())})")


SUMMARY_KEYS = ("max_pressure", "load_capacity", "wall_time_s", "epochs_run",
                "final_loss", "config_hash", "seed", "mode")


@dataclass
class RunSummary:
    max_pressure: float
    load_capacity: float
    wall_time_s: float | None
    epochs_run: int
    final_loss: float | None
    config_hash: str
    seed: int
    mode: dict
    loss_history: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in SUMMARY_KEYS}

    @classmethod
    def from_json(cls, d: dict) -> "RunSummary":
        missing = set(SUMMARY_KEYS) - set(d)
        if missing:
            raise ConfigError(f"summary lacks keys {sorted(missing)}")
        return cls(**{k: d[k] for k in SUMMARY_KEYS})
