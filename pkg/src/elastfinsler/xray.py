"""Forward geodesic X-ray transform and a small injectivity experiment.

Rays are F-unit geodesics launched from the outer boundary of a 2D annulus
and followed until they leave the domain (through either boundary circle).
Integrals use composite Simpson over the stored RK4 samples, with the
truncated final step handled by a cubic Hermite midpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .finsler import as_field
from .geodesics import GeodesicPath, integrate_geodesics, unit_covector
from .stiffness import Annulus

__all__ = [
    "ScalarField",
    "FanSpec",
    "FanRay",
    "XRayDataset",
    "InjectivityReport",
    "forward_xray",
    "simpson_samples",
    "trace_fan",
    "xray_dataset",
    "desk_injectivity_experiment",
    "radial_basis",
]


@dataclass(frozen=True)
class ScalarField:
    """Scalar function on the plane or space.

    ``constant``: ``value``. ``radial-polynomial``: ``sum coeffs[k] r^k``.
    ``separable``: radial polynomial times ``cos(mode * theta)`` (or ``sin``
    when ``parity == "sin"``), 2D only. ``combination``: linear combination
    of ``terms``.
    """

    kind: str
    value: float = 0.0
    coeffs: tuple[float, ...] = ()
    mode: int = 0
    parity: str = "cos"
    terms: tuple[tuple[float, "ScalarField"], ...] = ()

    @classmethod
    def constant(cls, value: float) -> "ScalarField":
        return cls("constant", value=float(value))

    @classmethod
    def radial(cls, coeffs: Sequence[float]) -> "ScalarField":
        return cls("radial-polynomial", coeffs=tuple(float(c) for c in coeffs))

    @classmethod
    def separable(cls, coeffs: Sequence[float], mode: int, parity: str = "cos") -> "ScalarField":
        if parity not in ("cos", "sin"):
            raise ValueError("parity must be 'cos' or 'sin'")
        return cls("separable", coeffs=tuple(float(c) for c in coeffs), mode=int(mode), parity=parity)

    @classmethod
    def combination(cls, weights: Sequence[float], fields: Sequence["ScalarField"]) -> "ScalarField":
        return cls("combination", terms=tuple((float(w), f) for w, f in zip(weights, fields)))

    def __call__(self, xs) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if self.kind == "constant":
            return np.full(len(xs), self.value)
        r = np.linalg.norm(xs, axis=1)
        if self.kind == "radial-polynomial":
            return np.polynomial.polynomial.polyval(r, self.coeffs)
        if self.kind == "separable":
            theta = np.arctan2(xs[:, 1], xs[:, 0])
            ang = np.cos(self.mode * theta) if self.parity == "cos" else np.sin(self.mode * theta)
            return np.polynomial.polynomial.polyval(r, self.coeffs) * ang
        if self.kind == "combination":
            out = np.zeros(len(xs))
            for w, f in self.terms:
                out += w * f(xs)
            return out
        raise ValueError(f"unknown scalar field kind {self.kind!r}")

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField.combination([1.0, 1.0], [self, other])

    def __rmul__(self, scale: float) -> "ScalarField":
        return ScalarField.combination([scale], [self])


def radial_basis(degree: int = 2) -> list[ScalarField]:
    """``{1, r, ..., r^degree}``."""
    return [ScalarField.radial([0.0] * k + [1.0]) for k in range(degree + 1)]


def _hermite_mid(x0, y0, x1, y1, tau):
    return 0.5 * (x0 + x1) + tau * (y0 - y1) / 8.0


def simpson_samples(values: np.ndarray, h: float) -> float:
    """Composite Simpson on uniformly spaced samples (3/8 rule on the tail if odd)."""
    m = len(values) - 1
    if m <= 0:
        return 0.0
    if m == 1:
        return 0.5 * h * (values[0] + values[1])
    if m % 2 == 0:
        return h / 3.0 * (values[0] + values[-1] + 4 * values[1:-1:2].sum() + 2 * values[2:-1:2].sum())
    head = simpson_samples(values[:-3], h) if m > 3 else 0.0
    tail = 3 * h / 8 * (values[-4] + 3 * values[-3] + 3 * values[-2] + values[-1])
    return head + tail


def forward_xray(f: ScalarField, path: GeodesicPath, with_error: bool = False):
    """``int f(gamma(t)) dt`` along a complete (boundary-to-boundary) path."""
    if not path.exited:
        raise ValueError("path does not end on the boundary")
    t = path.t
    uniform = len(t) - 1
    if uniform >= 1 and abs((t[-1] - t[-2]) - path.h) > 1e-12 * max(1.0, path.h):
        uniform -= 1  # the last step was truncated at the exit
    vals = f(path.x[: uniform + 1])
    total = simpson_samples(vals, path.h)
    coarse = None
    even = uniform - uniform % 2
    if even >= 4:
        # step-halving estimate on the largest even prefix
        fine = simpson_samples(vals[: even + 1], path.h)
        coarse = total - fine + simpson_samples(vals[: even + 1: 2], 2 * path.h)
    if uniform < len(t) - 1:
        tau = t[-1] - t[-2]
        mid = _hermite_mid(path.x[-2], path.y[-2], path.x[-1], path.y[-1], tau)
        fv = f(np.stack([path.x[-2], mid, path.x[-1]]))
        last = tau / 6.0 * (fv[0] + 4 * fv[1] + fv[2])
        total += last
        if coarse is not None:
            coarse += last
    if not with_error:
        return float(total)
    err = abs(total - coarse) / 15.0 if coarse is not None else math.nan
    return float(total), float(err)


@dataclass(frozen=True)
class FanSpec:
    boundary_points: int = 64
    angles: int = 16

    def takeoff_angles(self) -> np.ndarray:
        return (np.arange(self.angles) + 0.5) / self.angles * np.pi - np.pi / 2

    def starts(self, radius: float) -> np.ndarray:
        phi = 2 * np.pi * np.arange(self.boundary_points) / self.boundary_points
        return radius * np.column_stack([np.cos(phi), np.sin(phi)])


@dataclass
class FanRay:
    start: np.ndarray
    angle: float
    path: GeodesicPath | None
    flag: str  # "ok" or the reason the ray was excluded


def trace_fan(field, fan: FanSpec, h: float = 1e-2, t_cap: float | None = None) -> list[FanRay]:
    """Launch F-unit geodesics from the outer circle at the fan's takeoff angles.

    Angles are measured from the inward normal. Rays that do not leave the
    annulus within ``t_cap`` are flagged ``non-returning``.
    """
    field = as_field(field)
    dom = field.domain
    if field.dim != 2 or not isinstance(dom, Annulus):
        raise ValueError("fans are defined for 2D annuli")
    if fan.boundary_points == 0 or fan.angles == 0:
        return []
    starts = fan.starts(dom.outer_radius)
    angles = fan.takeoff_angles()
    xs, ps, meta = [], [], []
    for z in starts:
        nu = -z / np.linalg.norm(z)
        tangent = np.array([-nu[1], nu[0]])
        for a in angles:
            u = math.cos(a) * nu + math.sin(a) * tangent
            xs.append(z)
            ps.append(unit_covector(field, z, u))
            meta.append((z, float(a)))
    if t_cap is None:
        t_cap = 50.0 * dom.diameter
    paths = integrate_geodesics(field, np.array(xs), np.array(ps), h=h, t_max=t_cap, domain=dom)
    return [FanRay(z, a, p if p.exited else None, "ok" if p.exited else "non-returning")
            for (z, a), p in zip(meta, paths)]


@dataclass
class XRayDataset:
    starts: np.ndarray
    angles: np.ndarray
    integrals: np.ndarray
    errors: np.ndarray
    flags: list[str]
    exit_boundaries: list[str | None] = dc_field(default_factory=list)

    def __len__(self) -> int:
        return len(self.flags)

    @property
    def valid(self) -> np.ndarray:
        return np.array([f == "ok" for f in self.flags], dtype=bool)

    def rows(self) -> list[list]:
        return [[*map(float, s), float(a), float(v), f]
                for s, a, v, f in zip(self.starts, self.angles, self.integrals, self.flags)]


def xray_dataset(field, f: ScalarField, fan: FanSpec | None = None, h: float = 1e-2,
                 rays: list[FanRay] | None = None) -> XRayDataset:
    """One row per fan member; flagged rows carry ``nan`` integrals."""
    if rays is None:
        rays = trace_fan(field, fan or FanSpec(), h)
    starts, angles, vals, errs, flags, exits = [], [], [], [], [], []
    for ray in rays:
        starts.append(ray.start)
        angles.append(ray.angle)
        flags.append(ray.flag)
        if ray.path is None:
            vals.append(math.nan)
            errs.append(math.nan)
            exits.append(None)
        else:
            v, e = forward_xray(f, ray.path, with_error=True)
            vals.append(v)
            errs.append(e)
            exits.append(ray.path.exit_boundary)
    dim = 2
    return XRayDataset(np.array(starts, dtype=float).reshape(-1, dim), np.array(angles, dtype=float),
                       np.array(vals, dtype=float), np.array(errs, dtype=float), flags, exits)


@dataclass
class InjectivityReport:
    sigma_min: float
    sigma_max: float
    cond: float
    recovery_rel_err: float
    coefficient_rel_err: float
    rank_deficient: bool
    rows: int
    flagged: int
    true_coefficients: np.ndarray
    recovered_coefficients: np.ndarray

    def to_dict(self) -> dict:
        return {"sigma_min": self.sigma_min, "sigma_max": self.sigma_max, "cond": self.cond,
                "recovery_rel_err": self.recovery_rel_err,
                "coefficient_rel_err": self.coefficient_rel_err,
                "rank_deficient": self.rank_deficient, "rows": self.rows, "flagged": self.flagged,
                "true_coefficients": self.true_coefficients.tolist(),
                "recovered_coefficients": self.recovered_coefficients.tolist()}


def desk_injectivity_experiment(field, basis: Sequence[ScalarField], fan: FanSpec | None = None,
                                h: float = 1e-2, seed: int = 0, rank_tol: float = 1e-10) -> InjectivityReport:
    """Synthesize, forward-map and recover a combination of ``basis`` elements.

    The system matrix uses rays traced at step ``h``; the synthetic data use
    an independent tracing at ``h / 2``. The recovery error is the relative
    L2 error of the reconstructed function over the annulus.
    """
    field = as_field(field)
    fan = fan or FanSpec()
    dom = field.domain
    total_rays = fan.boundary_points * fan.angles
    if len(basis) == 0 or 4 * len(basis) > total_rays:
        raise ValueError("basis size must be between 1 and a quarter of the fan size")
    rr, tt = np.meshgrid(np.linspace(dom.inner_radius, dom.outer_radius, 41),
                         np.linspace(0, 2 * np.pi, 64, endpoint=False), indexing="ij")
    grid = np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])
    weights = rr.ravel()
    values = np.array([b(grid) for b in basis])
    if np.any(np.max(np.abs(values), axis=1) == 0.0):
        raise ValueError("basis contains the zero field")
    coarse = trace_fan(field, fan, h)
    fine = trace_fan(field, fan, h / 2)
    ok = [i for i, (a, b) in enumerate(zip(coarse, fine)) if a.path is not None and b.path is not None]
    a_mat = np.array([[forward_xray(b, coarse[i].path) for b in basis] for i in ok])
    rng = np.random.default_rng(seed)
    truth = rng.uniform(0.5, 1.5, len(basis)) * rng.choice([-1.0, 1.0], len(basis))
    target = ScalarField.combination(truth, basis)
    data = np.array([forward_xray(target, fine[i].path) for i in ok])
    sv = np.linalg.svd(a_mat, compute_uv=False) if len(ok) else np.zeros(1)
    smax, smin = float(sv[0]), float(sv[-1])
    deficient = smax == 0 or smin / smax < rank_tol
    recovered, *_ = np.linalg.lstsq(a_mat, data, rcond=None)
    err_fun = (recovered - truth) @ values
    true_fun = truth @ values
    rel = float(math.sqrt(np.sum(weights * err_fun ** 2) / np.sum(weights * true_fun ** 2)))
    coef = float(np.linalg.norm(recovered - truth) / np.linalg.norm(truth))
    return InjectivityReport(smin, smax, smax / smin if smin > 0 else math.inf, rel, coef, bool(deficient),
                             len(ok), total_rays - len(ok), truth, recovered)
