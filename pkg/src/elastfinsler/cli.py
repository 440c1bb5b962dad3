"""Command-line front end.

Exit codes: 0 success, 1 numerical failure, 2 invalid input, 3 a singular
or multiple-eigenvalue verdict.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .christoffel import (DegenerateDirectionError, christoffel_array, degeneracy_scan, gap_sweep_csv,
                          jacobi_eigh, qp_gap_margin, slowness_polynomial, sphere_directions)
from .classifier2d import classifier_invariants
from .finsler import ConvexityError, LegendreError, finsler_battery
from .geodesics import (GeodesicError, herglotz_check, integrate_geodesic,
                        lowest_point_expansion_check, travel_time_data)
from .inputs import InputError, load_field, load_tensor
from .polyalg import PolynomialError, render
from .singularity import degeneracy_equiv_check, singular_points_csv, variety_smoothness
from .stiffness import Annulus, validate
from .xray import FanSpec, ScalarField, desk_injectivity_experiment, radial_basis, trace_fan, xray_dataset

__all__ = ["main", "dispatch", "RunConfig", "validate_report"]

OK, NUMERICAL, INVALID, SINGULAR = 0, 1, 2, 3
COMMANDS = ("classify2d", "slowness", "gap", "singularity", "finsler-check", "geodesic",
            "traveltime", "xray", "appendixb")


@dataclass
class RunConfig:
    command: str
    out_dir: Path
    seed: int
    threads: int
    tolerances: dict[str, float]
    inputs: dict[str, str] = field(default_factory=dict)
    samples: int | None = None


class _Usage(Exception):
    pass


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    path.write_text(buf.getvalue())


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _schema(name: str) -> dict:
    text = resources.files("elastfinsler").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate_report(name: str, report: dict) -> None:
    import jsonschema
    jsonschema.validate(report, _schema(name))


def _write_json(path: Path, name: str, report: dict) -> None:
    report = _clean(report)
    validate_report(name, report)
    path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")


@contextmanager
def _pool(threads: int):
    if threads <= 1:
        yield None
        return
    try:
        executor = ProcessPoolExecutor(max_workers=threads)
    except (OSError, NotImplementedError):
        yield None
        return
    with executor:
        yield executor


def _vector(text: str, dim: int | None = None) -> np.ndarray:
    try:
        v = np.array([float(s) for s in text.split(",")])
    except ValueError as err:
        raise InputError(f"bad vector {text!r}") from err
    if dim is not None and len(v) != dim:
        raise InputError(f"vector {text!r} must have {dim} entries")
    return v


# -- commands ------------------------------------------------------------------------
def cmd_classify2d(args, cfg: RunConfig) -> int:
    c = load_tensor(args.tensor)
    if c.dim != 2 or not c.is_exact:
        raise InputError("classify2d needs an exact-rational 2D tensor")
    report = classifier_invariants(c)
    _write_json(cfg.out_dir / "classify2d.json", "classify2d", report.to_dict())
    return SINGULAR if report.has_multiple_eigenvalue else OK


def cmd_slowness(args, cfg: RunConfig) -> int:
    c = load_tensor(args.tensor)
    dirs, angles = sphere_directions(c.dim, args.samples)
    arr = c.array().astype(float)
    rows = []
    for u, ang in zip(dirs, angles):
        values, _ = jacobi_eigh(christoffel_array(arr, u))
        branch = [1.0 / math.sqrt(v) if v > 0 else math.nan for v in values[:2]]
        rows.append([*ang, *u, *branch])
    names = ["theta"] if c.dim == 2 else ["theta", "phi"]
    comps = [f"u{i + 1}" for i in range(c.dim)]
    _write_csv(cfg.out_dir / "slowness.csv", names + comps + ["qP", "qS1"], rows)
    poly = slowness_polynomial(c)
    _write_json(cfg.out_dir / "slowness.json", "slowness",
                {"dim": c.dim, "samples": len(rows), "polynomial": render(poly)})
    return OK


def cmd_gap(args, cfg: RunConfig) -> int:
    c = load_tensor(args.tensor)
    (cfg.out_dir / "gap.csv").write_text(gap_sweep_csv(c, args.samples))
    margin = qp_gap_margin(c, args.samples)
    degenerate = degeneracy_scan(c, args.samples, tol=cfg.tolerances["gap"])
    report = margin.to_dict()
    report["degenerate_directions"] = [list(map(float, d)) for d in degenerate]
    _write_json(cfg.out_dir / "gap.json", "gap", report)
    return SINGULAR if margin.nonpositive else OK


def cmd_singularity(args, cfg: RunConfig) -> int:
    c = load_tensor(args.tensor)
    poly = slowness_polynomial(c)
    search = args.search or ("exact-2d" if c.dim == 2 else "sampled")
    report = variety_smoothness(poly, search, args.samples)
    out = report.to_dict()
    out["search"] = search
    if validate(c).positive_definite:
        out["equivalence"] = degeneracy_equiv_check(c, args.samples, cfg.tolerances["gap"],
                                                    cfg.tolerances["grad"]).to_dict()
    _write_json(cfg.out_dir / "singularity.json", "singularity", out)
    (cfg.out_dir / "singular_points.csv").write_text(singular_points_csv(report, poly.variables))
    return OK if report.scheme_smooth else SINGULAR


def _regularity_warning(fld, needed: int = 2) -> None:
    if fld.regularity < needed:
        print(f"warning: field regularity C^{fld.regularity} is below the C^{needed} "
              "needed for spray coefficients", file=sys.stderr)


def cmd_finsler_check(args, cfg: RunConfig) -> int:
    fld = load_field(args.field)
    _regularity_warning(fld)
    report = finsler_battery(fld, args.samples or 200, cfg.seed)
    _write_json(cfg.out_dir / "finsler_check.json", "finsler_check", report)
    return OK if report["pass"] else NUMERICAL


def cmd_geodesic(args, cfg: RunConfig) -> int:
    fld = load_field(args.field)
    _regularity_warning(fld)
    x0 = _vector(args.x0, fld.dim)
    y0 = _vector(args.y0, fld.dim)
    if not fld.domain.contains(x0):
        raise InputError("x0 lies outside the domain")
    path = integrate_geodesic(fld, x0, y0, h=args.h, t_max=args.t_max)
    header = ["t"] + [f"x{i + 1}" for i in range(fld.dim)] + [f"y{i + 1}" for i in range(fld.dim)]
    _write_csv(cfg.out_dir / "geodesic.csv", header, path.rows())
    _write_json(cfg.out_dir / "geodesic.json", "geodesic", {
        "h": path.h, "samples": len(path.t), "energy_drift": path.energy_drift,
        "exit_time": path.exit_time, "exit_boundary": path.exit_boundary,
        "exit_point": None if path.exit_point is None else list(path.exit_point),
    })
    return OK


def _receivers(domain, count: int, dim: int) -> np.ndarray:
    if not isinstance(domain, Annulus):
        raise InputError("receivers are sampled on an annulus boundary")
    dirs, _ = sphere_directions(dim, count)
    return domain.outer_radius * dirs


def cmd_traveltime(args, cfg: RunConfig) -> int:
    fld = load_field(args.field)
    sources = [_vector(s, fld.dim) for s in args.sources.split(";") if s.strip()] if args.sources else []
    receivers = _receivers(fld.domain, args.receivers, fld.dim)
    with _pool(cfg.threads) as pool:
        table = travel_time_data(fld, np.array(sources).reshape(-1, fld.dim), receivers, h=args.h, pool=pool)
    header = ([f"s{i + 1}" for i in range(fld.dim)] + [f"r{i + 1}" for i in range(fld.dim)]
              + ["time", "converged"])
    rows = [[*r[:-1], str(r[-1]).lower()] for r in table.rows()]
    _write_csv(cfg.out_dir / "traveltime.csv", header, rows)
    return OK if bool(np.all(table.converged)) else NUMERICAL


def _scalar_function(spec: str) -> ScalarField:
    kind, _, rest = spec.partition(":")
    try:
        nums = [float(v) for v in rest.split(",")] if rest else []
    except ValueError as err:
        raise InputError(f"bad function spec {spec!r}") from err
    if kind == "const" and len(nums) == 1:
        return ScalarField.constant(nums[0])
    if kind == "radial" and nums:
        return ScalarField.radial(nums)
    raise InputError("function must be 'const:v' or 'radial:c0,c1,...'")


def cmd_xray(args, cfg: RunConfig) -> int:
    fld = load_field(args.field)
    fan = FanSpec(args.boundary_points, args.angles)
    f = _scalar_function(args.function)
    rays = trace_fan(fld, fan, args.h)
    data = xray_dataset(fld, f, rays=rays)
    header = [f"b{i + 1}" for i in range(fld.dim)] + ["angle", "integral", "flag"]
    _write_csv(cfg.out_dir / "xray.csv", header, data.rows())
    report = desk_injectivity_experiment(fld, radial_basis(args.basis_degree), fan, args.h, cfg.seed)
    _write_json(cfg.out_dir / "xray.json", "xray", report.to_dict())
    return NUMERICAL if report.rank_deficient else OK


def cmd_appendixb(args, cfg: RunConfig) -> int:
    fld = load_field(args.field)
    radii = [float(r) for r in args.radii.split(",")]
    herg = herglotz_check(fld)
    fits = [lowest_point_expansion_check(fld, r0, h=args.h) for r0 in radii]
    band_ok = all(f.within(0.2) for f in fits)
    rev_ok = all(f.r_triple_dot < cfg.tolerances["reversibility"]
                 and f.theta_double_dot < cfg.tolerances["reversibility"] for f in fits)
    report = {"herglotz": {"min_margin": herg.min_margin, "pass": herg.passed},
              "fits": [f.to_dict() for f in fits], "orders_pass": band_ok, "reversibility_pass": rev_ok}
    _write_json(cfg.out_dir / "appendixb.json", "appendixb", report)
    return OK if band_ok and rev_ok and herg.passed else NUMERICAL


HANDLERS = {
    "classify2d": cmd_classify2d, "slowness": cmd_slowness, "gap": cmd_gap,
    "singularity": cmd_singularity, "finsler-check": cmd_finsler_check, "geodesic": cmd_geodesic,
    "traveltime": cmd_traveltime, "xray": cmd_xray, "appendixb": cmd_appendixb,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def _positive_int(minimum: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError as err:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from err
        if v < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}")
        return v
    return parse


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from err
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory for CSV/JSON outputs")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=_positive_int(1), default=os.cpu_count() or 1)
    common.add_argument("--tol-gap", type=_positive_float, default=1e-8, help="relative eigen-gap tolerance")
    common.add_argument("--tol-grad", type=_positive_float, default=1e-6, help="scaled gradient tolerance")
    common.add_argument("--tol-reversibility", type=_positive_float, default=1e-6)

    parser = _Parser(prog="elastfinsler", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("classify2d", "slowness", "gap", "singularity"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--tensor", required=True)
        if name != "classify2d":
            p.add_argument("--samples", type=_positive_int(8), default=None)
        if name == "singularity":
            p.add_argument("--search", choices=("exact-2d", "sampled"), default=None)
    p = sub.add_parser("finsler-check", parents=[common])
    p.add_argument("--field", required=True)
    p.add_argument("--samples", type=_positive_int(1), default=200)
    p = sub.add_parser("geodesic", parents=[common])
    p.add_argument("--field", required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--y0", required=True)
    p.add_argument("--h", type=_positive_float, default=1e-3)
    p.add_argument("--t-max", type=_positive_float, default=None)
    p = sub.add_parser("traveltime", parents=[common])
    p.add_argument("--field", required=True)
    p.add_argument("--sources", default="", help="semicolon-separated points, e.g. '0.5,0;0,0.6'")
    p.add_argument("--receivers", type=_positive_int(1), default=16)
    p.add_argument("--h", type=_positive_float, default=2e-3)
    p = sub.add_parser("xray", parents=[common])
    p.add_argument("--field", required=True)
    p.add_argument("--boundary-points", type=_positive_int(1), default=64)
    p.add_argument("--angles", type=_positive_int(1), default=16)
    p.add_argument("--h", type=_positive_float, default=1e-2)
    p.add_argument("--basis-degree", type=_positive_int(0), default=2)
    p.add_argument("--function", default="const:1")
    p = sub.add_parser("appendixb", parents=[common])
    p.add_argument("--field", required=True)
    p.add_argument("--radii", default="0.4,0.5,0.6,0.7,0.8")
    p.add_argument("--h", type=_positive_float, default=1e-4)
    return parser


def dispatch(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _Usage as err:
        print(f"error: {err}", file=sys.stderr)
        return INVALID
    cfg = RunConfig(args.command, Path(args.out_dir), args.seed, args.threads,
                    {"gap": args.tol_gap, "grad": args.tol_grad, "reversibility": args.tol_reversibility},
                    samples=getattr(args, "samples", None))
    try:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        return HANDLERS[args.command](args, cfg)
    except (InputError, PolynomialError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return INVALID
    except (LegendreError, GeodesicError, DegenerateDirectionError, ConvexityError,
            np.linalg.LinAlgError, FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return NUMERICAL
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return INVALID


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
