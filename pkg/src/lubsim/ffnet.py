"""Multi-scale Fourier-feature network with trainable embedding frequencies.

Each frequency group embeds (X, Y, H) as
``[sin(2 pi f X), cos(2 pi f X), sin(2 pi f Y), cos(2 pi f Y), H]``; all groups
run through the same hidden stack, and a linear head maps the concatenated
final hidden states to the scalar network output.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import CoordJet, Node, Tape

TWO_PI = 2.0 * np.pi
ACTIVATIONS = ("sigmoid", "tanh")


@dataclass(frozen=True)
class Architecture:
    sigmas: tuple = (1.0, 20.0, 50.0)
    n_freqs: int = 30
    hidden_layers: int = 5
    neurons: int = 100
    activation: str = "sigmoid"

    def __post_init__(self):
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        if len(self.sigmas) < 1:
            raise ValueError("need at least one frequency group")
        if any(s < 0 for s in self.sigmas):
            raise ValueError("frequency deviations must be non-negative")
        for name in ("n_freqs", "hidden_layers", "neurons"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")

    @property
    def n_groups(self) -> int:
        return len(self.sigmas)

    @property
    def input_width(self) -> int:
        return 4 * self.n_freqs + 1

    def layer_shapes(self):
        widths = [self.input_width] + [self.neurons] * self.hidden_layers
        return list(zip(widths[:-1], widths[1:]))

    def n_params(self) -> int:
        n = self.n_groups * self.n_freqs
        n += sum(i * o + o for i, o in self.layer_shapes())
        return n + self.n_groups * self.neurons + 1


@dataclass
class FrequencyGroup:
    sigma: float
    freqs: np.ndarray


@dataclass
class NetworkParams:
    arch: Architecture
    arrays: dict = field(default_factory=dict)

    @property
    def groups(self) -> list[FrequencyGroup]:
        return [FrequencyGroup(s, self.arrays[f"freq_{g}"]) for g, s in enumerate(self.arch.sigmas)]

    def freq_names(self):
        return [f"freq_{g}" for g in range(self.arch.n_groups)]

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.arch, {k: v.copy() for k, v in self.arrays.items()})

    def size(self) -> int:
        return int(sum(v.size for v in self.arrays.values()))

    def bind(self, tape: Tape, trainable_freq: bool = True) -> dict[str, Node]:
        """Register arrays on ``tape``; frozen frequencies become constants."""
        nodes = {}
        for name, value in self.arrays.items():
            if name.startswith("freq_") and not trainable_freq:
                nodes[name] = Node(value, tape=tape)
            else:
                nodes[name] = tape.param(name, value)
        return nodes

    def to_dict(self) -> dict:
        return {
            "format": "lubsim-model",
            "version": 1,
            "arch": {**asdict(self.arch), "sigmas": list(self.arch.sigmas)},
            "params": {k: v.tolist() for k, v in self.arrays.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkParams":
        if d.get("format") != "lubsim-model":
            raise ValueError("not a lubsim model file")
        arch = Architecture(**d["arch"])
        ref = init(arch, 0).arrays
        arrays = {}
        for name, template in ref.items():
            if name not in d["params"]:
                raise ValueError(f"model file lacks parameter {name!r}")
            arr = np.asarray(d["params"][name], dtype=np.float64)
            if arr.shape != template.shape:
                raise ValueError(f"{name}: shape {arr.shape} != {template.shape}")
            arrays[name] = arr
        extra = set(d["params"]) - set(ref)
        if extra:
            raise ValueError(f"unknown parameters in model file: {sorted(extra)}")
        return cls(arch, arrays)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "NetworkParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def init(arch: Architecture, seed: int) -> NetworkParams:
    """Gaussian frequencies per group, Glorot-normal weights, zero biases."""
    rng = np.random.default_rng(seed)
    arrays = {}
    for g, sigma in enumerate(arch.sigmas):
        arrays[f"freq_{g}"] = rng.normal(0.0, 1.0, arch.n_freqs) * sigma
    for l, (fan_in, fan_out) in enumerate(arch.layer_shapes()):
        std = np.sqrt(2.0 / (fan_in + fan_out))
        arrays[f"hidden_{l}_w"] = rng.normal(0.0, 1.0, (fan_in, fan_out)) * std
        arrays[f"hidden_{l}_b"] = np.zeros(fan_out)
    fan_in = arch.n_groups * arch.neurons
    arrays["head_w"] = rng.normal(0.0, 1.0, fan_in) * np.sqrt(2.0 / (fan_in + 1))
    arrays["head_b"] = np.zeros(())
    return NetworkParams(arch, arrays)


def _column(j: CoordJet) -> CoordJet:
    return j.map(lambda c: ad.reshape(c, (-1, 1)) if np.ndim(c.value) <= 1 else c)


def embed(freqs, x: CoordJet, y: CoordJet, h: CoordJet) -> CoordJet:
    """Fourier features of one group; components have shape (batch, 4F + 1)."""
    w = ad._lift(freqs) * TWO_PI
    xc, yc, hc = _column(x), _column(y), _column(h)
    ax = xc * w
    ay = yc * w
    return ad.jet_concat(
        [ad.jet_unary(ax, "sin"), ad.jet_unary(ax, "cos"),
         ad.jet_unary(ay, "sin"), ad.jet_unary(ay, "cos"), hc],
        axis=1,
    )


def _dense(a: CoordJet, w: Node, b: Node) -> CoordJet:
    return CoordJet(a.v @ w + b, a.dx @ w, a.dy @ w, a.dxx @ w, a.dyy @ w)


def forward(nodes: dict[str, Node], arch: Architecture, x: CoordJet, y: CoordJet, h: CoordJet,
            fused: bool = True) -> CoordJet:
    """Network output P_net as a jet over the batch.

    ``fused=False`` runs the hidden stack through per-component jet
    arithmetic instead of the stacked fast path; both give the same numbers.
    """
    feats = [embed(nodes[f"freq_{g}"], x, y, h) for g in range(arch.n_groups)]
    batch = feats[0].v.shape[0]
    a = ad.jet_concat(feats, axis=0) if len(feats) > 1 else feats[0]
    if fused:
        s = ad.jet_stack(a)
        for l in range(arch.hidden_layers):
            s = ad.stacked_dense(s, nodes[f"hidden_{l}_w"], nodes[f"hidden_{l}_b"])
            s = ad.stacked_activation(s, arch.activation)
        a = ad.jet_unstack(s)
    else:
        for l in range(arch.hidden_layers):
            a = ad.jet_unary(_dense(a, nodes[f"hidden_{l}_w"], nodes[f"hidden_{l}_b"]), arch.activation)
    if arch.n_groups > 1:
        parts = [a.map(lambda c, g=g: c[g * batch:(g + 1) * batch]) for g in range(arch.n_groups)]
        a = ad.jet_concat(parts, axis=1)
    hw, hb = nodes["head_w"], nodes["head_b"]
    return CoordJet(a.v @ hw + hb, a.dx @ hw, a.dy @ hw, a.dxx @ hw, a.dyy @ hw)
