import numpy as np
import pytest

from lubsim.errors import SolverError
from lubsim.femref import PressureField, assemble, conjugate_gradient, solve, solve_case
from lubsim.metrics import centerline, load_capacity_1d
from lubsim.surface import SurfaceModel, synthesize_gaussian


def test_constant_film_gives_laplacian():
    nx, ny, aspect = 6, 5, 1.5
    sys = assemble(SurfaceModel.smooth(wedge_k=0.0), nx, ny, aspect)
    assert np.all(sys.b == 0.0)
    dx2, dy2 = (nx - 1) ** 2, (ny - 1) ** 2
    A = sys.A.toarray()
    mx = nx - 2
    assert np.allclose(np.diag(A), 2 * dx2 + 2 * aspect ** 2 * dy2)
    assert A[0, 1] == pytest.approx(-dx2)
    assert A[0, mx] == pytest.approx(-aspect ** 2 * dy2)


@pytest.mark.parametrize("surface", [SurfaceModel.smooth(), SurfaceModel.texture(), synthesize_gaussian(seed=1)],
                         ids=lambda s: s.kind)
def test_symmetric_positive_definite(surface):
    A = assemble(surface, 30, 25).A
    assert abs(A - A.T).max() <= 1e-14 * abs(A).max()
    rng = np.random.default_rng(0)
    for _ in range(20):
        v = rng.normal(size=A.shape[0])
        assert v @ (A @ v) > 0


def _mms_error(n):
    x = np.linspace(0, 1, n)
    XX, YY = np.meshgrid(x, x)
    exact = np.sin(np.pi * XX) * np.sin(np.pi * YY)
    sys = assemble(SurfaceModel.smooth(wedge_k=0.0), n, n, 1.0, rhs=-2 * np.pi ** 2 * exact)
    return np.abs(solve(sys).values - exact).max()


def test_manufactured_solution_second_order():
    e = [_mms_error(n) for n in (21, 41, 81)]
    for a, b in zip(e, e[1:]):
        assert 3.5 <= a / b <= 4.5
        assert 1.8 <= np.log2(a / b) <= 2.2


def test_zero_rhs_zero_field():
    sys = assemble(SurfaceModel.smooth(), 10, 10, rhs=np.zeros((10, 10)))
    assert np.all(solve(sys).values == 0.0)


def test_one_dimensional_limit():
    res = solve_case(SurfaceModel.smooth(wedge_k=1.0), 240, 240, aspect=0.0)
    line = centerline(res.field)
    x = res.field.x
    H = 2.0 - x
    exact = 6 * (1 / H - 2 / (3 * H ** 2) - 1 / 3)
    assert np.max(np.abs(line - exact)) <= 0.005 * exact.max()
    assert line.max() == pytest.approx(0.25, rel=0.005)
    assert x[np.argmax(line)] == pytest.approx(2 / 3, abs=1.5 / 239)
    assert load_capacity_1d(line, x) == pytest.approx(6 * (np.log(2) - 2 / 3), rel=0.005)


def test_default_geometry_smooth_case():
    res = solve_case(SurfaceModel.smooth())
    assert res.max_pressure == pytest.approx(0.1443, rel=0.02)
    assert res.load_capacity == pytest.approx(0.06494, rel=0.02)
    assert np.all(res.field.values >= 0.0)


def test_default_geometry_textured_case():
    res = solve_case(SurfaceModel.texture())
    assert res.max_pressure == pytest.approx(0.1525, rel=0.05)
    assert res.load_capacity == pytest.approx(0.0656, rel=0.05)


def test_grid_convergence():
    a = solve_case(SurfaceModel.smooth(), 60, 60).load_capacity
    b = solve_case(SurfaceModel.smooth(), 119, 119).load_capacity
    assert abs(a - b) / b < 0.01


def test_gaussian_bitwise_repeatable():
    a = solve_case(synthesize_gaussian(seed=2)).field.values
    b = solve_case(synthesize_gaussian(seed=2)).field.values
    assert np.array_equal(a, b)


def test_discrete_residual_and_boundary():
    tol = 1e-10
    sys = assemble(SurfaceModel.texture(), 60, 60)
    field = solve(sys, tol)
    u = field.values[1:-1, 1:-1].ravel()
    assert np.linalg.norm(sys.A @ u - sys.b) / np.linalg.norm(sys.b) <= 10 * tol
    v = field.values
    assert np.all(v[0] == 0) and np.all(v[-1] == 0) and np.all(v[:, 0] == 0) and np.all(v[:, -1] == 0)


def test_non_convergence_reports_residual():
    sys = assemble(SurfaceModel.smooth(), 30, 30)
    with pytest.raises(SolverError, match="relative residual"):
        conjugate_gradient(sys.A, sys.b, 1e-10, maxiter=3)


def test_bad_inputs():
    with pytest.raises(ValueError):
        assemble(SurfaceModel.smooth(), 2, 10)
    with pytest.raises(ValueError):
        solve(assemble(SurfaceModel.smooth(), 5, 5), tol=0.0)
    with pytest.raises(ValueError):
        PressureField(3, 3, np.zeros((2, 3)))
    with pytest.raises(ValueError):
        PressureField(2, 1, np.array([[0.0, np.nan]]))
