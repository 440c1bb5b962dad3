import numpy as np
import pytest
from hypothesis import given, strategies as st

from elastfinsler.finsler import (ConvexityError, fundamental_tensor, finsler_battery, finsler_qp,
                                  legendre_forward, legendre_inverse, qp_eigen, qp_gradient, qp_hamiltonian,
                                  qp_hessian, qp_x_gradient, spray_coefficients)
from elastfinsler.stiffness import (Annulus, ConstantField, IsotropicRadialField, PerturbedIsotropicField,
                                    PolynomialProfile, StiffnessTensor, make_isotropic)

ISO = ConstantField(make_isotropic(2, 2.0, 1.0))


def _radial():
    return IsotropicRadialField.from_speeds(2, PolynomialProfile((1.2, -0.2)), Annulus(2, 0.3, 1.0))


def _perturbed():
    return PerturbedIsotropicField(_radial(), StiffnessTensor.from_components(
        2, {"1112": 0.05, "1111": 0.03}, scalar_kind="float"))


def test_isotropic_closed_forms():
    x = np.zeros(2)
    p = np.array([0.3, -0.4])
    assert qp_hamiltonian(ISO, x, p) == pytest.approx(4 * p @ p)
    assert np.allclose(legendre_forward(ISO, x, p).y, 4 * p)
    y = np.array([1.0, 2.0])
    assert finsler_qp(ISO, x, y) == pytest.approx(np.linalg.norm(y) / 2)
    assert np.allclose(fundamental_tensor(ISO, x, y).g, np.eye(2) / 4, atol=1e-7)


@pytest.mark.parametrize("make", [_radial, _perturbed])
def test_derivatives_match_differences(make):
    f = make()
    x = np.array([0.45, 0.3])
    p = np.array([0.7, -0.5])
    h = 1e-6
    e = np.eye(2) * h
    g_fd = [(qp_hamiltonian(f, x, p + e[i]) - qp_hamiltonian(f, x, p - e[i])) / (2 * h) for i in range(2)]
    assert np.allclose(qp_gradient(f, x, p), g_fd, atol=1e-7)
    hess_fd = np.array([(qp_gradient(f, x, p + e[i]) - qp_gradient(f, x, p - e[i])) / (2 * h)
                        for i in range(2)])
    assert np.allclose(qp_hessian(f, x, p), hess_fd, atol=1e-6)
    xg_fd = [(qp_hamiltonian(f, x + e[i], p) - qp_hamiltonian(f, x - e[i], p)) / (2 * h) for i in range(2)]
    assert np.allclose(qp_x_gradient(f, x, p), xg_fd, atol=1e-7)


@given(st.floats(0, 2 * np.pi), st.floats(0.2, 3.0))
def test_legendre_round_trip(angle, scale):
    f = _perturbed()
    x = np.array([0.5, 0.2])
    p = scale * np.array([np.cos(angle), np.sin(angle)])
    y = legendre_forward(f, x, p).y
    back = legendre_inverse(f, x, y)
    assert np.allclose(back.p, p, rtol=1e-8, atol=1e-9)


def test_finsler_is_positively_homogeneous():
    f = _perturbed()
    x = np.array([0.5, 0.2])
    y = np.array([0.3, -1.1])
    assert finsler_qp(f, x, 3.5 * y) == pytest.approx(3.5 * finsler_qp(f, x, y), rel=1e-9)


def test_fundamental_tensor_methods_agree():
    f = _perturbed()
    x = np.array([0.5, 0.2])
    y = np.array([0.3, -1.1])
    g_fd = fundamental_tensor(f, x, y, method="fd").g
    g_dual = fundamental_tensor(f, x, y, method="dual").g
    assert np.allclose(g_fd, g_dual, rtol=1e-5)
    assert finsler_qp(f, x, y) ** 2 == pytest.approx(y @ g_dual @ y, rel=1e-9)


@pytest.mark.parametrize("make", [_radial, _perturbed])
def test_spray_forms_agree(make):
    f = make()
    x = np.array([0.45, 0.3])
    y = np.array([0.7, -0.5])
    a = spray_coefficients(f, x, y, method="hamiltonian")
    b = spray_coefficients(f, x, y, method="metric")
    assert np.allclose(a, b, rtol=1e-5, atol=1e-7)
    assert np.allclose(spray_coefficients(f, x, 2 * y), 4 * a, rtol=1e-9)


def test_degenerate_direction_rejected():
    f = ConstantField(make_isotropic(2, -1.0, 1.0))
    with pytest.raises(ValueError):
        qp_eigen(f, np.zeros(2), np.array([1.0, 0.0]))


def test_battery_passes_on_radial_field():
    rep = finsler_battery(_perturbed(), samples=40, seed=3)
    assert rep["pass"], rep["checks"]
    assert set(rep["checks"]) and all(c["pass"] for c in rep["checks"].values())
    assert ConvexityError.__mro__[1] is ValueError
