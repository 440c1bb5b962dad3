from fractions import Fraction

import pytest

from elastfinsler.inputs import InputError, field_from_table, load_field, load_tensor, tensor_from_table
from elastfinsler.stiffness import IsotropicRadialField, PerturbedIsotropicField


def test_tensor_table_exact():
    c = tensor_from_table({"dim": 2, "components": {"1111": "4", "1122": "2/3", "1212": 1}})
    assert c.is_exact and c["2211"] == Fraction(2, 3)


@pytest.mark.parametrize("table", [
    {"dim": 2, "components": {"1111": 0.5}},
    {"dim": 2, "components": {"1131": "1"}},
    {"dim": 4, "components": {}},
    {"dim": 2, "components": {"1111": "x"}},
    {"dim": 2, "extra": 1, "components": {}},
    {"dim": 2, "components": {"1112": "1", "1121": "2"}},
])
def test_tensor_table_rejects(table):
    with pytest.raises(InputError):
        tensor_from_table(table)


def test_field_tables():
    base = {"kind": "isotropic-radial", "dim": 2,
            "domain": {"type": "annulus", "inner_radius": 0.3},
            "speed": {"coeffs": [1.2, -0.2]}}
    assert isinstance(field_from_table(base), IsotropicRadialField)
    pert = dict(base, kind="perturbed-isotropic",
                perturbation={"scalar_kind": "float", "components": {"1112": 0.05}})
    assert isinstance(field_from_table(pert), PerturbedIsotropicField)
    with pytest.raises(InputError):
        field_from_table(dict(base, speeed={"coeffs": [1.0]}))
    with pytest.raises(InputError):
        field_from_table(dict(base, lame={"lam": [1.0], "mu": [1.0]}))
    with pytest.raises(InputError):
        field_from_table(dict(base, domain={"type": "annulus", "inner_radius": 2.0}))


def test_load_files(tmp_path):
    t = tmp_path / "t.toml"
    t.write_text('dim = 2\n[components]\n1111 = "4"\n2222 = "4"\n1122 = "2"\n1212 = "1"\n')
    assert load_tensor(t)["1212"] == 1
    f = tmp_path / "f.toml"
    f.write_text('kind = "constant"\ndim = 2\n[domain]\ntype = "box"\nlower = [0, 0]\nupper = [1, 1]\n'
                 '[tensor]\n[tensor.components]\n1111 = "4"\n2222 = "4"\n1122 = "2"\n1212 = "1"\n')
    assert load_field(f).domain.diameter == pytest.approx(2 ** 0.5)
    bad = tmp_path / "bad.toml"
    bad.write_text("dim = = 2")
    with pytest.raises(InputError):
        load_tensor(bad)
    with pytest.raises(InputError):
        load_tensor(tmp_path / "missing.toml")
