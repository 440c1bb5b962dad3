from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from elastfinsler.classifier2d import (build_f1_f2, classifier_invariants, complex_degenerate_tensor,
                                       degenerate_tensor, has_multiple_eigenvalue, isotropic_report,
                                       witness_direction)
from elastfinsler.christoffel import christoffel_array
from elastfinsler.polyalg import discriminant, resultant
from elastfinsler.stiffness import StiffnessTensor
from oracles import circle_sweep_min_gap

frac = st.fractions(min_value=-6, max_value=6, max_denominator=5)
KEYS = ("1111", "2222", "1122", "1212", "1112", "1222")


def _tensor(vals):
    return StiffnessTensor.from_components(2, dict(zip(KEYS, vals)))


def test_isotropic_invariants():
    rep = isotropic_report(2, 1)
    assert rep.D1 == 9 and rep.D2 == 9 and rep.L == 0 and rep.R == -81
    assert not rep.has_multiple_eigenvalue
    rep = isotropic_report(-1, 1)
    assert rep.R == 0 and rep.has_multiple_eigenvalue
    d = rep.to_dict()
    assert d["R"] == "0/1" and d["multiple_eigenvalue"] is True


@given(st.tuples(*[frac] * 6))
def test_invariants_are_resultant_and_discriminants(vals):
    c = _tensor(vals)
    rep = classifier_invariants(c)
    f1, f2 = build_f1_f2(c)
    p1 = f1.variables.index("p1")
    # res(F1, F2; p2) = R p1^4, disc(F2) = D1 p1^2, disc(F1) = 4 D2 p1^2
    res = resultant(f1, f2, "p2") if f1.degree("p2") == 2 and f2.degree("p2") == 2 else None
    if res is not None:
        assert res == rep.R * f1.var("p1", f1.variables) ** 4
    if f2.degree("p2") == 2:
        assert discriminant(f2, "p2") == rep.D1 * f2.var("p1", f2.variables) ** 2
    if f1.degree("p2") == 2:
        assert discriminant(f1, "p2") == 4 * rep.D2 * f1.var("p1", f1.variables) ** 2
    assert p1 >= 0


@pytest.mark.parametrize("args", [("1/2", 3, 1, 1, 7), (0, 2, 1, 0, 5), ("-3/2", 1, "1/3", 2, 4)])
def test_constructed_degenerate_tensors(args):
    c = degenerate_tensor(*args)
    assert has_multiple_eigenvalue(c)
    w = np.array(witness_direction(c))
    g = christoffel_array(c.array(), w)
    vals = np.linalg.eigvalsh(g)
    assert vals[1] - vals[0] == pytest.approx(0.0, abs=1e-12)


def test_complex_common_root_is_not_multiple():
    c = complex_degenerate_tensor(1, 2, "1/2", 3)
    rep = classifier_invariants(c)
    assert rep.R == 0 and rep.D < 0 and not rep.has_multiple_eigenvalue
    comps = {k: c[k] for k in KEYS}
    assert circle_sweep_min_gap(comps)[0] > 1e-3


@given(st.tuples(*[frac] * 6))
def test_verdict_agrees_with_circle_sweep(vals):
    c = _tensor(vals)
    comps = dict(zip(KEYS, vals))
    gap, _ = circle_sweep_min_gap(comps)
    verdict = has_multiple_eigenvalue(c)
    if verdict:
        assert gap < 1e-7
    elif gap < 1e-7:
        # only reachable by a near-miss that the exact test rules out
        assert classifier_invariants(c).R != 0


def test_non_exact_or_wrong_dim_rejected():
    from elastfinsler.stiffness import make_isotropic
    with pytest.raises(ValueError):
        classifier_invariants(make_isotropic(3, 1, 1))
    with pytest.raises(TypeError):
        classifier_invariants(make_isotropic(2, 1.0, 1.0))
    assert Fraction(1) == 1
