from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from elastfinsler.stiffness import (Annulus, Box, ConstantField, IsotropicRadialField,
                                    PerturbedIsotropicField, PolynomialProfile, SampledProfile,
                                    StiffnessTensor, SymmetryError, canonical_indices, make_isotropic,
                                    tensor_from_voigt, validate, voigt_matrix)


@pytest.mark.parametrize("n, count", [(2, 6), (3, 21)])
def test_independent_component_count(n, count):
    assert len(canonical_indices(n)) == count


def test_components_fill_symmetry_orbit():
    c = StiffnessTensor.from_components(2, {"1112": "3/2"})
    for idx in [(0, 0, 0, 1), (0, 0, 1, 0), (0, 1, 0, 0), (1, 0, 0, 0)]:
        assert c.data[idx] == Fraction(3, 2)
    assert c["2111"] == Fraction(3, 2)


def test_conflicting_orbit_values_rejected():
    with pytest.raises(SymmetryError):
        StiffnessTensor.from_components(2, {"1112": 1, "2111": 2})


def test_exact_tensor_refuses_float():
    with pytest.raises(TypeError):
        StiffnessTensor.from_components(2, {"1111": 0.1})


def test_isotropic_voigt_matrix_2d():
    v = voigt_matrix(make_isotropic(2, 2, 1)).array()
    expected = np.array([[4, 2, 0], [2, 4, 0], [0, 0, 1]], dtype=float)
    assert np.array_equal(v.astype(float), expected)


def test_voigt_round_trip():
    c = make_isotropic(3, Fraction(1, 3), 2)
    assert np.array_equal(tensor_from_voigt(voigt_matrix(c), 3).data, c.data)


def test_validate_pd_and_not_pd():
    rep = validate(make_isotropic(2, 2, 1))
    assert rep.symmetric and rep.positive_definite
    assert sorted(float(x) for x in rep.voigt_eigenvalues) == pytest.approx([1.0, 2.0, 6.0])
    rep = validate(make_isotropic(2, -1, 1))
    assert rep.symmetric and not rep.positive_definite


def test_validate_reports_broken_symmetry():
    arr = make_isotropic(2, 2.0, 1.0).array().copy()
    arr[0, 0, 0, 1] = 0.5
    rep = validate(StiffnessTensor.from_array(arr))
    assert not rep.symmetric and rep.violations


@given(st.floats(-np.pi, np.pi), st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_isotropic_is_rotation_invariant(angle, lam, mu):
    c = make_isotropic(2, lam, mu)
    q = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    assert np.allclose(c.rotated(q).array(), c.array(), atol=1e-12)


def test_annulus_geometry():
    dom = Annulus(2, 0.3, 1.0)
    assert dom.contains([0.5, 0.0]) and not dom.contains([0.1, 0.0])
    assert dom.boundary_distance([0.9, 0.0]) == pytest.approx(0.1)
    assert np.allclose(dom.inward_normal([0.0, 1.0]), [0.0, -1.0])
    assert np.allclose(dom.inward_normal([0.3, 0.0]), [1.0, 0.0])
    with pytest.raises(ValueError):
        Annulus(2, 1.0, 0.5)


def test_box_geometry():
    box = Box((0.0, 0.0), (2.0, 1.0))
    assert box.boundary_distance([1.0, 0.25]) == pytest.approx(0.25)
    assert np.allclose(box.inward_normal([1.0, 1.0]), [0.0, -1.0])


def test_sampled_profile_interpolates():
    prof = SampledProfile((0.0, 0.5, 1.0), (1.0, 2.0, 3.0))
    assert prof(0.25) == pytest.approx(1.5)
    assert prof.derivative(0.5) == pytest.approx(2.0)


def _radial():
    return IsotropicRadialField.from_speeds(2, PolynomialProfile((1.2, -0.2)), Annulus(2, 0.3, 1.0))


def test_radial_field_speeds():
    f = _radial()
    assert f.pressure_speed(0.5) == pytest.approx(1.1)
    assert f.shear_speed(0.5) == pytest.approx(0.55)


@pytest.mark.parametrize("make", [
    _radial,
    lambda: PerturbedIsotropicField(_radial(), StiffnessTensor.from_components(
        2, {"1112": 0.05}, scalar_kind="float")),
])
def test_tensor_gradient_matches_differences(make):
    f = make()
    x = np.array([0.4, 0.5])
    h = 1e-6
    grad = f.tensor_gradient(x)
    for m in range(2):
        e = np.zeros(2)
        e[m] = h
        fd = (f.tensor_array(x + e) - f.tensor_array(x - e)) / (2 * h)
        assert np.allclose(grad[m], fd, atol=1e-8)


def test_batched_evaluation_matches_pointwise():
    f = _radial()
    xs = np.array([[0.4, 0.5], [0.9, -0.1], [-0.3, 0.3]])
    assert np.allclose(f.tensor_arrays(xs), np.stack([f.tensor_array(x) for x in xs]))
    assert np.allclose(f.tensor_gradients(xs), np.stack([f.tensor_gradient(x) for x in xs]))
    const = ConstantField(make_isotropic(2, 2.0, 1.0))
    assert const.tensor_gradients(xs) is None
    assert const.tensor_arrays(xs).shape == (3, 2, 2, 2, 2)
