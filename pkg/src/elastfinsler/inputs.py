"""Strict TOML readers for tensor and field description files.

Tensor file::

    dim = 2
    scalar_kind = "exact-rational"    # or "float"; optional
    [components]                      # 1-based indices, one entry per orbit
    1111 = "4"
    1122 = "2"
    1212 = "1"
    2222 = "4"

Field file::

    kind = "isotropic-radial"         # constant | isotropic-radial | perturbed-isotropic
    dim = 2
    regularity = 3                    # optional
    [domain]
    type = "annulus"                  # or "box" with lower/upper arrays
    inner_radius = 0.3
    outer_radius = 1.0
    [speed]                           # pressure speed coefficients in r
    coeffs = [1.2, -0.2]

``constant`` fields carry a ``[tensor]`` table in the tensor-file layout,
``isotropic-radial`` fields a ``[speed]`` or a ``[lame]`` table (``lam`` and
``mu`` coefficient lists), and ``perturbed-isotropic`` fields both an
isotropic description and a ``[perturbation]`` tensor table. Unknown keys
are rejected.
"""
from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .stiffness import (EXACT, FLOAT, Annulus, Box, ConstantField, IsotropicRadialField,
                        PerturbedIsotropicField, PolynomialProfile, StiffnessField, StiffnessTensor,
                        SymmetryError)

__all__ = ["InputError", "load_toml", "tensor_from_table", "field_from_table", "load_tensor", "load_field"]


class InputError(ValueError):
    """Malformed or inconsistent input file."""


def load_toml(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as err:
        raise InputError(f"cannot read {path}: {err}") from err
    except tomllib.TOMLDecodeError as err:
        raise InputError(f"{path}: {err}") from err


def _check_keys(table: dict, allowed: set[str], where: str, required: set[str] = frozenset()) -> None:
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise InputError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    missing = sorted(set(required) - set(table))
    if missing:
        raise InputError(f"missing key(s) in {where}: {', '.join(missing)}")


def _scalar(value, kind: str, where: str):
    if isinstance(value, bool):
        raise InputError(f"{where}: booleans are not numbers")
    if kind == EXACT:
        if isinstance(value, float):
            raise InputError(f"{where}: exact tensors need integers or 'p/q' strings, got {value!r}")
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError, TypeError) as err:
            raise InputError(f"{where}: not a rational number: {value!r}") from err
    try:
        return float(Fraction(value)) if isinstance(value, str) else float(value)
    except (ValueError, ZeroDivisionError, TypeError) as err:
        raise InputError(f"{where}: not a number: {value!r}") from err


def tensor_from_table(table: dict, where: str = "tensor", dim: int | None = None) -> StiffnessTensor:
    _check_keys(table, {"dim", "scalar_kind", "components"}, where, {"components"})
    dim = table.get("dim", dim)
    if not isinstance(dim, int) or isinstance(dim, bool) or dim not in (2, 3):
        raise InputError(f"{where}: dim must be 2 or 3")
    kind = table.get("scalar_kind", EXACT)
    if kind not in (EXACT, FLOAT):
        raise InputError(f"{where}: scalar_kind must be '{EXACT}' or '{FLOAT}'")
    comps = table["components"]
    if not isinstance(comps, dict):
        raise InputError(f"{where}: components must be a table")
    values = {}
    for key, value in comps.items():
        if len(key) != 4 or not key.isdigit() or any(not 1 <= int(ch) <= dim for ch in key):
            raise InputError(f"{where}: bad component key {key!r} for dim {dim}")
        values[key] = _scalar(value, kind, f"{where}.components.{key}")
    try:
        return StiffnessTensor.from_components(dim, values, kind)
    except (SymmetryError, KeyError, TypeError) as err:
        raise InputError(f"{where}: {err}") from err


def _float_list(value, where: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise InputError(f"{where} must be a nonempty array of numbers")
    return tuple(_scalar(v, FLOAT, where) for v in value)


def _domain(table: dict, dim: int):
    kind = table.get("type")
    if kind == "annulus":
        _check_keys(table, {"type", "inner_radius", "outer_radius"}, "domain", {"inner_radius"})
        try:
            return Annulus(dim, float(table["inner_radius"]), float(table.get("outer_radius", 1.0)))
        except (TypeError, ValueError) as err:
            raise InputError(f"domain: {err}") from err
    if kind == "box":
        _check_keys(table, {"type", "lower", "upper"}, "domain", {"lower", "upper"})
        lower, upper = _float_list(table["lower"], "domain.lower"), _float_list(table["upper"], "domain.upper")
        if len(lower) != dim or len(upper) != dim:
            raise InputError("domain: box corners must have dim entries")
        try:
            return Box(lower, upper)
        except ValueError as err:
            raise InputError(f"domain: {err}") from err
    raise InputError("domain.type must be 'annulus' or 'box'")


def _isotropic(table: dict, dim: int, domain, regularity: int) -> IsotropicRadialField:
    if ("speed" in table) == ("lame" in table):
        raise InputError("isotropic fields need exactly one of [speed] or [lame]")
    if "speed" in table:
        _check_keys(table["speed"], {"coeffs"}, "speed", {"coeffs"})
        speed = PolynomialProfile(_float_list(table["speed"]["coeffs"], "speed.coeffs"))
        return IsotropicRadialField.from_speeds(dim, speed, domain, regularity=regularity)
    _check_keys(table["lame"], {"lam", "mu"}, "lame", {"lam", "mu"})
    lam = PolynomialProfile(_float_list(table["lame"]["lam"], "lame.lam"))
    mu = PolynomialProfile(_float_list(table["lame"]["mu"], "lame.mu"))
    return IsotropicRadialField(dim, lam, mu, domain, regularity=regularity)


def field_from_table(table: dict) -> StiffnessField:
    kind = table.get("kind")
    common = {"kind", "dim", "regularity", "domain"}
    extra = {"constant": {"tensor"}, "isotropic-radial": {"speed", "lame"},
             "perturbed-isotropic": {"speed", "lame", "perturbation"}}
    if kind not in extra:
        raise InputError("kind must be one of: " + ", ".join(sorted(extra)))
    _check_keys(table, common | extra[kind], "field", {"dim", "domain"})
    dim = table["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim not in (2, 3):
        raise InputError("field: dim must be 2 or 3")
    regularity = table.get("regularity", 3)
    if not isinstance(regularity, int) or regularity < 0:
        raise InputError("field: regularity must be a nonnegative integer")
    domain = _domain(table["domain"], dim)
    if kind == "constant":
        if "tensor" not in table:
            raise InputError("constant fields need a [tensor] table")
        return ConstantField(tensor_from_table(table["tensor"], "tensor", dim), domain=domain)
    base = _isotropic(table, dim, domain, regularity)
    if kind == "isotropic-radial":
        return base
    if "perturbation" not in table:
        raise InputError("perturbed-isotropic fields need a [perturbation] table")
    delta = tensor_from_table(table["perturbation"], "perturbation", dim)
    return PerturbedIsotropicField(base, delta.as_float())


def load_tensor(path: str | Path) -> StiffnessTensor:
    return tensor_from_table(load_toml(path), str(path))


def load_field(path: str | Path) -> StiffnessField:
    return field_from_table(load_toml(path))
