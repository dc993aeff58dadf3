import json

import pytest

from lubsim.config import SUMMARY_KEYS, RunConfig, RunSummary, load_config, resolve_seed
from lubsim.errors import ConfigError


def test_seed_precedence(monkeypatch):
    cfg = RunConfig.from_dict({"training": {"seed": 5}})
    monkeypatch.delenv("LUBSIM_SEED", raising=False)
    assert resolve_seed(cfg, None).training.seed == 5
    monkeypatch.setenv("LUBSIM_SEED", "11")
    assert resolve_seed(cfg, None).training.seed == 11
    assert resolve_seed(cfg, 3).training.seed == 3


def test_roundtrip_and_overrides(tmp_path):
    cfg = load_config("case3_texture")
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    again = RunConfig.load(path)
    assert again == cfg and again.config_hash() == cfg.config_hash()
    ff = cfg.with_overrides(mode="fixed_freq", bc_mode="soft", epochs=7)
    assert ff.problem().trainable_freq is False and ff.train_config().bc_mode == "soft"
    assert ff.training.epochs == 7 and ff.config_hash() != cfg.config_hash()
    with pytest.raises(ConfigError):
        cfg.with_overrides(mode="bogus")


def test_bad_json_and_preset(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        RunConfig.load(p)
    with pytest.raises(ConfigError, match="presets"):
        load_config("case9")
    assert load_config("case2_sinusoid.json").surface["kind"] == "sinusoid"


def test_surface_errors_surface_late():
    # the closing film is only detected when the surface is built
    cfg = RunConfig.from_dict({"surface": {"kind": "texture", "A": 2.0, "lambda_x": 0.02, "lambda_y": 0.02}})
    from lubsim.errors import SurfaceError
    with pytest.raises(SurfaceError):
        cfg.build_surface()


def test_summary_roundtrip():
    s = RunSummary(0.1, 0.05, None, 0, None, "abc", 0, {"solver": "fem"})
    d = s.to_json()
    assert tuple(d) == SUMMARY_KEYS
    assert RunSummary.from_json(json.loads(json.dumps(d))).to_json() == d
    with pytest.raises(ConfigError):
        RunSummary.from_json({"max_pressure": 1})


def test_dimensional_section():
    cfg = RunConfig.from_dict({"dimensional": {"L": 0.1, "B": 0.1, "h0": 1e-5, "u": 1.0, "eta": 0.01}})
    assert cfg.dimensional_context() is not None
