import json
import math

import numpy as np
import pytest

from lubsim import autodiff as ad
from lubsim.autodiff import CoordJet, Tape, backward, seed_coordinate
from lubsim.ffnet import Architecture, NetworkParams, embed, forward, init

from conftest import rel_err


def run(params, X, Y, H=None, trainable=True, fused=True):
    X = np.atleast_1d(np.asarray(X, dtype=float))
    Y = np.atleast_1d(np.asarray(Y, dtype=float))
    H = np.full_like(X, 1.3) if H is None else np.atleast_1d(H)
    with Tape() as tape:
        nodes = params.bind(tape, trainable)
        out = forward(nodes, params.arch, seed_coordinate(X, ad.X), seed_coordinate(Y, ad.Y),
                      CoordJet.const(H), fused=fused)
        return {k: np.array(v) for k, v in out.values().items()}


def test_init_deterministic_and_zero_biases():
    arch = Architecture()
    a, b = init(arch, 3), init(arch, 3)
    assert a.arrays.keys() == b.arrays.keys()
    for k in a.arrays:
        assert np.array_equal(a.arrays[k], b.arrays[k])
        if k.endswith("_b"):
            assert np.all(a.arrays[k] == 0.0)
    assert a.size() == arch.n_params()
    assert not np.array_equal(init(arch, 4).arrays["freq_0"], a.arrays["freq_0"])


def test_sigma50_sample_std():
    arch = Architecture(sigmas=(50.0,), n_freqs=30, hidden_layers=1, neurons=2)
    stds = [np.std(init(arch, s).arrays["freq_0"], ddof=1) for s in range(100)]
    assert 40 <= np.mean(stds) <= 60


def test_glorot_std():
    arch = Architecture()
    w = init(arch, 0).arrays["hidden_1_w"]
    assert np.std(w) == pytest.approx(np.sqrt(2 / 200), rel=0.03)


def test_invalid_architecture():
    for bad in (dict(sigmas=()), dict(hidden_layers=0), dict(neurons=2.5), dict(activation="relu"),
                dict(n_freqs=-1)):
        with pytest.raises(ValueError):
            Architecture(**bad)


def _embed_values(freqs, X, Y, H):
    with Tape():
        e = embed(np.asarray(freqs, dtype=float), seed_coordinate(np.atleast_1d(X), ad.X),
                  seed_coordinate(np.atleast_1d(Y), ad.Y), CoordJet.const(np.atleast_1d(H)))
        return {k: np.array(v)[0] for k, v in e.values().items()}


def test_embed_examples():
    e = _embed_values([0.0, 1.7], 0.37, 0.81, 1.4)
    F = 2
    assert e["v"].shape == (4 * F + 1,)
    assert e["v"][0] == 0.0 and e["v"][2 * F] == 0.0  # sin(0 * X), sin(0 * Y)
    assert e["v"][F] == 1.0 and e["v"][3 * F] == 1.0
    o = _embed_values([1.3, 4.0, 20.0], 0.0, 0.0, 1.25)
    assert np.all(o["v"][:3] == 0.0) and np.all(o["v"][3:6] == 1.0)
    assert np.all(o["v"][6:9] == 0.0) and np.all(o["v"][9:12] == 1.0)
    assert o["v"][-1] == 1.25
    q = _embed_values([1.0], 0.25, 0.0, 1.0)
    assert q["v"][0] == pytest.approx(1.0, abs=1e-15)
    assert q["v"][1] == pytest.approx(0.0, abs=1e-15)
    # jets carry the 2 pi f factor
    assert q["dx"][1] == pytest.approx(-2 * np.pi, rel=1e-14)
    assert q["dxx"][0] == pytest.approx(-(2 * np.pi) ** 2, rel=1e-14)


def test_zero_head_gives_zero_output(small_params):
    p = small_params.copy()
    p.arrays["head_w"][:] = 0.0
    p.arrays["head_b"] = np.zeros(())
    out = run(p, np.linspace(0.1, 0.9, 7), np.linspace(0.9, 0.2, 7))
    for v in out.values():
        assert np.all(v == 0.0)


def test_toy_network_by_hand():
    arch = Architecture(sigmas=(1.0,), n_freqs=1, hidden_layers=1, neurons=1)
    p = init(arch, 0)
    f, w, b, hw, hb = 0.8, np.array([[0.3], [-0.2], [0.5], [0.1], [-0.7]]), 0.05, 1.7, -0.2
    p.arrays.update(freq_0=np.array([f]), hidden_0_w=w, hidden_0_b=np.array([b]),
                    head_w=np.array([hw]), head_b=np.array(hb))
    X, Y, H = 0.31, 0.64, 1.2
    phi = [math.sin(2 * math.pi * f * X), math.cos(2 * math.pi * f * X),
           math.sin(2 * math.pi * f * Y), math.cos(2 * math.pi * f * Y), H]
    z = sum(wi * xi for wi, xi in zip(w[:, 0], phi)) + b
    expected = hw / (1 + math.exp(-z)) + hb
    for fused in (True, False):
        assert run(p, X, Y, H, fused=fused)["v"][0] == pytest.approx(expected, abs=1e-14)


def test_group_permutation_invariance(small_arch):
    p = init(small_arch, 5)
    q = p.copy()
    q.arrays["freq_0"], q.arrays["freq_1"] = p.arrays["freq_1"].copy(), p.arrays["freq_0"].copy()
    n = small_arch.neurons
    q.arrays["head_w"] = np.concatenate([p.arrays["head_w"][n:], p.arrays["head_w"][:n]])
    X, Y = np.linspace(0.1, 0.9, 5), np.linspace(0.3, 0.7, 5)
    np.testing.assert_allclose(run(p, X, Y)["v"], run(q, X, Y)["v"], rtol=1e-13, atol=1e-15)


def test_coordinate_jets_match_fd(small_params):
    rng = np.random.default_rng(1)
    X, Y = rng.uniform(0.05, 0.95, (2, 100))
    j = run(small_params, X, Y)
    f = lambda a, b: run(small_params, a, b)["v"]
    h = 1e-4
    fd = {
        "dx": (f(X + h, Y) - f(X - h, Y)) / (2 * h),
        "dy": (f(X, Y + h) - f(X, Y - h)) / (2 * h),
        "dxx": (f(X + h, Y) - 2 * f(X, Y) + f(X - h, Y)) / h ** 2,
        "dyy": (f(X, Y + h) - 2 * f(X, Y) + f(X, Y - h)) / h ** 2,
    }
    for k, ref in fd.items():
        assert rel_err(j[k], ref) < 1e-5, k


def _freq_grads(params, trainable):
    with Tape() as tape:
        nodes = params.bind(tape, trainable)
        X = np.linspace(0.1, 0.9, 6)
        out = forward(nodes, params.arch, seed_coordinate(X, ad.X), seed_coordinate(X[::-1], ad.Y),
                      CoordJet.const(np.full(6, 1.2)))
        return backward(ad.mean(ad.square(out.dxx)) + ad.mean(out.v))


def test_frequency_gradients_trainable_vs_fixed(small_params):
    g = _freq_grads(small_params, True)
    for name in small_params.freq_names():
        assert np.all(g[name] != 0.0)
    g = _freq_grads(small_params, False)
    assert not any(name in g for name in small_params.freq_names())
    assert "hidden_0_w" in g


def test_model_json_round_trip(tmp_path, small_params):
    path = tmp_path / "model.json"
    small_params.save(path)
    again = NetworkParams.load(path)
    rng = np.random.default_rng(0)
    X, Y = rng.uniform(0, 1, (2, 100))
    a, b = run(small_params, X, Y), run(again, X, Y)
    for k in a:
        assert np.array_equal(a[k], b[k])
    doc = json.loads(path.read_text())
    assert doc["format"] == "lubsim-model"


def test_model_file_validation(small_params):
    d = small_params.to_dict()
    d["params"]["extra"] = [1.0]
    with pytest.raises(ValueError):
        NetworkParams.from_dict(d)
    d = small_params.to_dict()
    d["params"]["head_w"] = [0.0]
    with pytest.raises(ValueError):
        NetworkParams.from_dict(d)
    with pytest.raises(ValueError):
        NetworkParams.from_dict({"format": "other"})
