import numpy as np
import pytest

from elastfinsler.classifier2d import degenerate_tensor, witness_direction
from elastfinsler.polyalg import MultiPoly, PolynomialError
from elastfinsler.singularity import (degeneracy_equiv_check, near_isotropic_certificate,
                                      scheme_singular_points, singular_points_csv, variety_smoothness)
from elastfinsler.stiffness import StiffnessTensor, make_isotropic

x, y = MultiPoly.gens("x", "y")


def test_double_circle_scheme_singular_variety_smooth():
    rep = variety_smoothness((x ** 2 + y ** 2 - 1) ** 2)
    assert not rep.scheme_smooth and rep.variety_smooth and not rep.squarefree


def test_circle_smooth():
    rep = variety_smoothness(x ** 2 + y ** 2 - 1)
    assert rep.scheme_smooth and rep.variety_smooth and rep.squarefree


@pytest.mark.parametrize("search", ["exact-2d", "sampled"])
def test_nodal_cubic_node(search):
    pts = scheme_singular_points(y ** 2 - x ** 2 * (x + 1), search=search)
    assert len(pts) == 1
    assert np.allclose(pts[0].point, [0.0, 0.0], atol=1e-8)


def test_zero_polynomial_rejected():
    with pytest.raises(PolynomialError):
        scheme_singular_points(MultiPoly({}, ("x", "y")))


def test_csv_has_one_row_per_point():
    rep = variety_smoothness(y ** 2 - x ** 2 * (x + 1))
    lines = singular_points_csv(rep, ["x", "y"]).strip().splitlines()
    assert len(lines) == 2


def test_equivalence_on_degenerate_tensor():
    c = degenerate_tensor("1/2", 3, 1, 1, 7)
    rep = degeneracy_equiv_check(c, count=256)
    assert rep.both == 0 and rep.confusions == 0
    rep = degeneracy_equiv_check(c, count=256, extra_directions=[witness_direction(c)])
    assert rep.both == 2 and rep.confusions == 0


def test_equivalence_isotropic_3d_everywhere_singular():
    rep = degeneracy_equiv_check(make_isotropic(3, -1, 1), count=50)
    assert rep.confusions == 0 and rep.both > 0


def test_certificate_scales_with_perturbation():
    c0 = make_isotropic(2, 2.0, 1.0)
    devs = []
    for delta in (1e-3, 1e-2):
        pert = StiffnessTensor.from_components(2, {"1112": delta}, scalar_kind="float")
        c = StiffnessTensor.from_array(c0.array() + pert.array())
        cert = near_isotropic_certificate(c0, c, epsilon=0.1)
        assert cert.passed and cert.min_gap > 0
        devs.append(cert.max_deviation)
    assert devs[1] / devs[0] == pytest.approx(10.0, rel=0.05)


def test_certificate_requires_isotropic_base():
    c0 = StiffnessTensor.from_array(make_isotropic(2, 2.0, 1.0).array()
                                    + StiffnessTensor.from_components(2, {"1112": 0.3},
                                                                      scalar_kind="float").array())
    with pytest.raises(ValueError):
        near_isotropic_certificate(c0, c0, epsilon=0.1)
