import csv
import json
import shutil
from pathlib import Path

import pytest

from elastfinsler.cli import dispatch, validate_report

DATA = Path(__file__).parent / "data"


@pytest.fixture
def run(tmp_path):
    def go(*argv, out=None):
        out = out or tmp_path / "out"
        out.mkdir(exist_ok=True)
        code = dispatch([*argv, "--out-dir", str(out), "--threads", "1"])
        return code, out
    return go


def _json(path):
    return json.loads(path.read_text())


def test_classify_isotropic(run):
    code, out = run("classify2d", "--tensor", str(DATA / "iso_2_1.toml"))
    assert code == 0
    rep = _json(out / "classify2d.json")
    assert rep["R"] == "-81/1" and rep["multiple_eigenvalue"] is False


def test_classify_degenerate_exit_3(run):
    code, out = run("classify2d", "--tensor", str(DATA / "iso_degenerate.toml"))
    assert code == 3 and _json(out / "classify2d.json")["multiple_eigenvalue"]


def test_slowness_and_gap_outputs(run):
    code, out = run("slowness", "--tensor", str(DATA / "iso_2_1.toml"), "--samples", "64")
    assert code == 0
    rows = list(csv.reader((out / "slowness.csv").open()))
    assert rows[0][-2:] == ["qP", "qS1"] and len(rows) == 65
    code, out = run("gap", "--tensor", str(DATA / "iso_2_1.toml"), "--samples", "64")
    assert code == 0 and _json(out / "gap.json")["separate"]


def test_singularity_3d_isotropic_exit_3(run):
    code, out = run("singularity", "--tensor", str(DATA / "iso3d.toml"), "--samples", "50")
    assert code == 3
    rep = _json(out / "singularity.json")
    validate_report("singularity", rep)


@pytest.mark.parametrize("argv, code", [
    (["classify2d", "--tensor", "missing.toml"], 2),
    (["classify2d", "--tensor", str(DATA / "bad.toml")], 2),
    (["classify2d"], 2),
    (["nonsense"], 2),
    (["gap", "--tensor", str(DATA / "iso_2_1.toml"), "--tol-gap", "-1"], 2),
    (["classify2d", "--tensor", str(DATA / "iso3d.toml")], 2),
])
def test_invalid_inputs_exit_2(run, argv, code):
    assert run(*argv)[0] == code


def test_finsler_check_and_geodesic(run):
    code, out = run("finsler-check", "--field", str(DATA / "radial.toml"), "--samples", "20")
    assert code == 0 and _json(out / "finsler_check.json")["pass"]
    code, out = run("geodesic", "--field", str(DATA / "radial.toml"), "--x0", "0.6,0", "--y0", "0.2,1",
                    "--h", "1e-2")
    assert code == 0
    header = next(csv.reader((out / "geodesic.csv").open()))
    assert header[0] == "t" and len(header) == 5


def test_traveltime_and_xray(run):
    code, out = run("traveltime", "--field", str(DATA / "radial.toml"), "--sources", "0.6,0",
                    "--receivers", "3")
    assert code == 0
    rows = list(csv.reader((out / "traveltime.csv").open()))
    assert len(rows) == 4
    code, out = run("xray", "--field", str(DATA / "radial.toml"), "--boundary-points", "16",
                    "--angles", "8", "--h", "2e-2")
    assert code == 0
    assert _json(out / "xray.json")["sigma_min"] > 0


def test_symmetric_fan_too_small_is_numerical_failure(run):
    # a radial field gives equal integrals for +-angle pairs: 2 distinct rows, 3 unknowns
    code, out = run("xray", "--field", str(DATA / "radial.toml"), "--boundary-points", "8",
                    "--angles", "4", "--h", "2e-2")
    assert code == 1 and _json(out / "xray.json")["rank_deficient"]


def test_reruns_are_byte_identical(run, tmp_path):
    outs = []
    for k in range(2):
        code, out = run("xray", "--field", str(DATA / "radial.toml"), "--boundary-points", "8",
                        "--angles", "8", "--h", "2e-2", "--seed", "5", out=tmp_path / f"r{k}")
        assert code == 0
        outs.append(out)
    for name in ("xray.csv", "xray.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    shutil.rmtree(outs[0])
