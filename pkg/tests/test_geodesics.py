import numpy as np
import pytest

from elastfinsler.geodesics import (boundary_distance, boundary_normal_exp, herglotz_check,
                                    integrate_geodesic, integrate_geodesics, lowest_point_expansion_check,
                                    shoot_between, travel_time_data, unit_covector)

from elastfinsler.stiffness import (Annulus, Box, ConstantField, IsotropicRadialField, PolynomialProfile,
                                    make_isotropic)
from oracles import ray_circle_exit, riemannian_geodesic

ANNULUS = Annulus(2, 0.3, 1.0)
CONST = ConstantField(make_isotropic(2, 2.0, 1.0), ANNULUS)

def _radial(coeffs=(1.2, -0.2)):
    return IsotropicRadialField.from_speeds(2, PolynomialProfile(coeffs), ANNULUS)

def test_constant_field_is_straight_and_exits_on_time():
    x0 = np.array([0.5, 0.4])
    y0 = np.array([1.0, 0.3])
    path = integrate_geodesic(CONST, x0, y0, h=1e-2)
    u = y0 / np.linalg.norm(y0)
    # the initial speed is kept, so Euclidean speed stays |y0|
    assert path.exit_time == pytest.approx(ray_circle_exit(x0, u, 1.0) / np.linalg.norm(y0), abs=1e-9)
    assert path.speed == pytest.approx(np.linalg.norm(y0) / 2)
    assert path.exit_boundary == "outer"
    d = path.x - x0
    assert np.max(np.abs(d[:, 0] * u[1] - d[:, 1] * u[0])) < 1e-12

def test_energy_drift_small():
    path = integrate_geodesic(_radial(), [0.6, 0.0], [0.2, 1.0], h=1e-3, t_max=1.0, stop_at_boundary=False)
    assert path.energy_drift < 1e-10

def test_matches_riemannian_oracle():
    f = _radial()
    x0 = np.array([0.6, 0.0])
    y0 = np.array([0.2, 1.0])
    path = integrate_geodesic(f, x0, y0, h=1e-3, t_max=1.0, stop_at_boundary=False)
    # qP metric is |dx|^2 / c^2 with c = 1.2 - 0.2 r; start with F-unit speed
    v0 = path.y[0]
    sol = riemannian_geodesic(lambda r: 1.2 - 0.2 * r, lambda r: -0.2, x0, v0, 1.0)
    assert np.max(np.abs(sol.sol(path.t)[:2].T - path.x)) < 1e-6

def test_spray_method_agrees_with_hamiltonian():
    f = _radial()
    a = integrate_geodesic(f, [0.6, 0.0], [0.2, 1.0], h=2e-3, t_max=0.5, stop_at_boundary=False)
    b = integrate_geodesic(f, [0.6, 0.0], [0.2, 1.0], h=2e-3, t_max=0.5, stop_at_boundary=False,
                           method="spray")
    assert np.allclose(a.x[-1], b.x[-1], atol=1e-7)

def test_rk4_order():
    f = _radial()
    ends = [integrate_geodesic(f, [0.6, 0.0], [0.2, 1.0], h=h, t_max=0.8, stop_at_boundary=False).x[-1]
            for h in (0.04, 0.02, 0.01)]
    order = np.log2(np.linalg.norm(ends[0] - ends[1]) / np.linalg.norm(ends[1] - ends[2]))
    assert abs(order - 4) < 0.3

def test_batched_matches_single():
    f = _radial()
    x0s = np.array([[0.6, 0.0], [0.0, 0.5]])
    p0s = np.array([unit_covector(f, x, y) for x, y in zip(x0s, [[0.2, 1.0], [1.0, 0.0]])])
    paths = integrate_geodesics(f, x0s, p0s, h=1e-2)
    single = integrate_geodesic(f, x0s[1], paths[1].y[0], h=1e-2)
    assert paths[1].exit_time == pytest.approx(single.exit_time, abs=1e-12)

def test_boundary_distance_vectorized():
    d = boundary_distance(ANNULUS, np.array([[0.5, 0.0], [0.0, 0.9]]))
    assert np.allclose(d, [0.2, 0.1])
    assert np.allclose(boundary_distance(Box((0, 0), (1, 1)), [[0.2, 0.5]]), [0.2])

def test_shooting_constant_field_and_reversibility():
    res = shoot_between(CONST, [0.5, 0.0], [0.0, 0.5], domain=ANNULUS)
    assert res.converged
    assert res.time == pytest.approx(np.hypot(0.5, 0.5) / 2, abs=1e-8)
    back = shoot_between(CONST, [0.0, 0.5], [0.5, 0.0], domain=ANNULUS)
    assert back.time == pytest.approx(res.time, abs=1e-6)

def test_boundary_normal_exp_closed_form():
    z = np.array([1.0, 0.0])
    assert np.allclose(boundary_normal_exp(CONST, z, 0.1), [0.8, 0.0], atol=1e-10)

def test_herglotz():
    assert herglotz_check(_radial(), radii=np.linspace(0.35, 0.95, 5)).passed
    assert not herglotz_check(_radial((0.0, 1.0)), radii=np.linspace(0.35, 0.95, 5)).passed
    with pytest.raises(ValueError):
        herglotz_check(ConstantField(make_isotropic(2, 2.0, 1.0), Box((0, 0), (1, 1))))

def test_lowest_point_expansion():
    fit = lowest_point_expansion_check(_radial(), 0.6)
    assert fit.within(0.2)
    assert fit.a > 0


def test_lowest_point_constant_field_acceleration():
    # straight line tangent at r0 with speed c: r'' = c^2 / r0
    fit = lowest_point_expansion_check(CONST, 0.6)
    assert fit.a == pytest.approx(4.0 / 0.6, rel=1e-9)

def test_travel_time_table():
    tab = travel_time_data(CONST, [[0.5, 0.0]], [[0.0, 0.5], [-0.5, 0.2]])
    assert tab.times.shape == (1, 2) and tab.converged.all()
    assert tab.times[0, 0] == pytest.approx(np.hypot(0.5, 0.5) / 2, abs=1e-7)
