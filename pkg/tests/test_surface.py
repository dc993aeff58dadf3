import numpy as np
import pytest

from lubsim import autodiff as ad
from lubsim.autodiff import Tape, seed_coordinate
from lubsim.errors import DomainError, SurfaceError
from lubsim.surface import (DimensionalContext, SurfaceModel, film_thickness, redimensionalize_pressure,
                            synthesize_gaussian, RMS_GRID, _cosine_series)


def jet_at(model, X, Y):
    with Tape():
        h = film_thickness(model, seed_coordinate(X, ad.X), seed_coordinate(Y, ad.Y))
        return {k: np.asarray(v, dtype=float) for k, v in h.values().items()}


def test_smooth_examples():
    m = SurfaceModel.smooth(wedge_k=1.0)
    h = jet_at(m, 0.0, 0.3)
    assert h["v"] == 2.0 and h["dx"] == -1.0
    assert jet_at(m, 1.0, 0.3)["v"] == 1.0


def test_texture_origin_has_no_roughness():
    m = SurfaceModel.texture(A=0.2, lambda_x=0.02, lambda_y=0.02, wedge_k=1.0)
    assert m.roughness(0.0, 0.0) == 0.0
    assert jet_at(m, 0.0, 0.0)["v"] == 2.0


def test_out_of_domain():
    with pytest.raises(DomainError):
        jet_at(SurfaceModel.smooth(), 1.2, 0.5)
    with pytest.raises(DomainError):
        jet_at(SurfaceModel.smooth(), 0.5, -0.01)


def test_film_closure_rejected():
    with pytest.raises(SurfaceError):
        SurfaceModel.texture(A=1.0)
    with pytest.raises(SurfaceError):
        SurfaceModel.sinusoid(amplitude=1.1)
    with pytest.raises(SurfaceError):
        SurfaceModel("knurled")
    with pytest.raises(SurfaceError):
        synthesize_gaussian(rms=0.5, seed=1)


def test_texture_a0_is_smooth_bitwise():
    g = np.linspace(0, 1, 37)
    XX, YY = np.meshgrid(g, g)
    a = SurfaceModel.texture(A=0.0).partials(XX, YY)
    b = SurfaceModel.smooth().partials(XX, YY)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)


MODELS = [
    SurfaceModel.smooth(),
    SurfaceModel.sinusoid(),
    SurfaceModel.texture(),
    synthesize_gaussian(rms=0.1, modes=12, seed=3),
]


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.kind)
def test_analytic_derivatives_match_fd(model):
    rng = np.random.default_rng(5)
    X, Y = rng.uniform(0.01, 0.99, (2, 200))
    h, hx, hy, hxx, hyy, hxy = model.partials(X, Y)
    d = 1e-5
    H = model.thickness
    fx = (H(X + d, Y) - H(X - d, Y)) / (2 * d)
    fy = (H(X, Y + d) - H(X, Y - d)) / (2 * d)
    fxy = (H(X + d, Y + d) - H(X + d, Y - d) - H(X - d, Y + d) + H(X - d, Y - d)) / (4 * d * d)
    fxx = (hx_at(model, X + d, Y) - hx_at(model, X - d, Y)) / (2 * d)
    fyy = (model.partials(X, Y + d)[2] - model.partials(X, Y - d)[2]) / (2 * d)
    for got, ref in ((hx, fx), (hy, fy), (hxx, fxx), (hyy, fyy)):
        scale = max(np.abs(ref).max(), 1.0)
        assert np.max(np.abs(got - ref)) / scale < 1e-6
    assert np.max(np.abs(hxy - fxy)) / max(np.abs(fxy).max(), 1.0) < 1e-4


def hx_at(model, X, Y):
    return model.partials(X, Y)[1]


def test_film_thickness_jet_composes_partials():
    m = MODELS[2]
    j = jet_at(m, np.array([0.3, 0.71]), np.array([0.42, 0.05]))
    h, hx, hy, hxx, hyy, _ = m.partials(np.array([0.3, 0.71]), np.array([0.42, 0.05]))
    for k, ref in zip(("v", "dx", "dy", "dxx", "dyy"), (h, hx, hy, hxx, hyy)):
        np.testing.assert_array_equal(j[k], ref)


def test_gaussian_determinism_rms_and_scaling():
    a = synthesize_gaussian(rms=0.1, modes=12, seed=4)
    b = synthesize_gaussian(rms=0.1, modes=12, seed=4)
    assert np.array_equal(a.params["coef"], b.params["coef"])
    g = (np.arange(RMS_GRID) + 0.5) / RMS_GRID
    XX, YY = np.meshgrid(g, g)
    assert np.sqrt(np.mean(a.roughness(XX, YY) ** 2)) == pytest.approx(0.1, abs=1e-10)
    c = synthesize_gaussian(rms=0.2, modes=12, seed=4)
    assert np.array_equal(c.params["coef"], 2 * a.params["coef"])
    # the series itself, not H minus the wedge (that subtraction rounds)
    assert np.array_equal(_cosine_series(c.params["coef"], XX, YY)[0], 2 * _cosine_series(a.params["coef"], XX, YY)[0])
    assert not np.array_equal(a.params["coef"], synthesize_gaussian(rms=0.1, modes=12, seed=5).params["coef"])


@pytest.mark.parametrize("n", [60, 61, 97, 120, 200])
def test_gaussian_zero_mean(n):
    m = synthesize_gaussian(rms=0.1, modes=12, seed=2)
    g = (np.arange(n) + 0.5) / n
    XX, YY = np.meshgrid(g, g)
    assert abs(np.mean(m.roughness(XX, YY))) < 1e-10


def test_gaussian_rejects_bad_args():
    with pytest.raises(SurfaceError):
        synthesize_gaussian(rms=0.0)
    with pytest.raises(SurfaceError):
        synthesize_gaussian(modes=0)


def test_redimensionalize():
    ctx = DimensionalContext(L=0.1, B=0.1, h0=1e-5, u=1.0, eta=0.01)
    assert redimensionalize_pressure(0.0, ctx) == 0.0
    assert redimensionalize_pressure(1.0, DimensionalContext(1, 1, 1, 1, 1)) == 1.0
    # 0.1443 * 0.01 * 1 * 0.1 / 1e-10 = 1.443e6 Pa
    assert redimensionalize_pressure(0.1443, ctx) == pytest.approx(1.443e6, rel=1e-12)
    with pytest.raises(ValueError):
        DimensionalContext(L=0.1, B=0.0, h0=1e-5, u=1.0, eta=0.01)


def test_dict_round_trip():
    for m in MODELS:
        again = SurfaceModel.from_dict(m.to_dict())
        g = np.linspace(0, 1, 11)
        assert np.array_equal(again.thickness(*np.meshgrid(g, g)), m.thickness(*np.meshgrid(g, g)))
