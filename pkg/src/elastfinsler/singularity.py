"""Scheme and variety smoothness of slowness surfaces.

A hypersurface ``{P = 0}`` is scheme-smooth when ``P`` and ``grad P`` have no
common zero, and variety-smooth when the same holds for the squarefree part
of ``P``. For real positive definite tensors the scheme-singular points of the
slowness surface are exactly the degeneracy points of the Christoffel matrix;
:func:`degeneracy_equiv_check` compares the two detectors on sampled
directions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .christoffel import christoffel_array, jacobi_eigh, relative_gap, sphere_directions
from .polyalg import (MultiPoly, PolynomialError, poly_gcd, resultant, squarefree_part,
                      univariate_coefficients)
from .stiffness import StiffnessTensor, make_isotropic, validate

__all__ = [
    "SingularPoint",
    "SmoothnessReport",
    "IsotropyCertificate",
    "EquivalenceReport",
    "scheme_singular_points",
    "variety_smoothness",
    "degeneracy_equiv_check",
    "near_isotropic_certificate",
    "singular_points_csv",
]

RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class SingularPoint:
    point: tuple[float, ...]
    value: float
    grad_norm: float


@dataclass
class SmoothnessReport:
    scheme_smooth: bool
    variety_smooth: bool
    squarefree: bool
    singular_points: list[SingularPoint] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scheme_smooth": self.scheme_smooth,
            "variety_smooth": self.variety_smooth,
            "squarefree": self.squarefree,
            "singular_point_count": len(self.singular_points),
            "singular_points": [
                {"point": list(s.point), "abs_value": s.value, "grad_norm": s.grad_norm}
                for s in self.singular_points
            ],
        }


class _Numeric:
    """Float evaluation of ``P``, its gradient and Hessian."""

    def __init__(self, poly: MultiPoly):
        self.poly = poly
        self.f = poly.to_numeric()
        names = poly.variables
        self.grad = [poly.diff(v).to_numeric() for v in names]
        self.hess = [[poly.diff(a).diff(b).to_numeric() for b in names] for a in names]
        self.parts = {d: p.to_numeric() for d, p in poly.homogeneous_parts().items()}
        self.degree = max(self.parts) if self.parts else 0

    def system(self, q: np.ndarray) -> np.ndarray:
        return np.array([self.f(q)] + [g(q) for g in self.grad])

    def jacobian(self, q: np.ndarray) -> np.ndarray:
        return np.array([[g(q) for g in self.grad]] + [[h(q) for h in row] for row in self.hess])

    def ray_roots(self, u: np.ndarray) -> np.ndarray:
        coeffs = np.zeros(self.degree + 1)
        for d, part in self.parts.items():
            coeffs[self.degree - d] = part(u)
        coeffs = np.trim_zeros(coeffs, "f")
        if len(coeffs) < 2:
            return np.zeros(0)
        roots = np.roots(coeffs)
        keep = np.abs(roots.imag) <= 1e-6 * np.maximum(1.0, np.abs(roots))
        real = roots.real[keep]
        return np.sort(real[real > 0])

    def polish(self, q: np.ndarray, iters: int = 50) -> np.ndarray:
        """Gauss-Newton on the overdetermined system ``(P, grad P) = 0``."""
        best = q
        best_res = np.linalg.norm(self.system(q))
        for _ in range(iters):
            step, *_ = np.linalg.lstsq(self.jacobian(q), -self.system(q), rcond=1e-13)
            q = q + step
            res = np.linalg.norm(self.system(q))
            if res < best_res:
                best, best_res = q, res
            if np.linalg.norm(step) <= 1e-15 * max(1.0, np.linalg.norm(q)):
                break
        return best

    def point(self, q: np.ndarray) -> SingularPoint:
        return SingularPoint(tuple(float(x) for x in q), abs(float(self.f(q))),
                             float(np.linalg.norm([g(q) for g in self.grad])))


def _dedupe(points: list[np.ndarray], tol: float = 1e-7) -> list[np.ndarray]:
    if not points:
        return []
    arr = np.asarray(points, dtype=float)
    radius = tol * max(1.0, float(np.abs(arr).max()))
    tree = cKDTree(arr)
    keep = np.ones(len(arr), dtype=bool)
    for i, j in sorted(tree.query_pairs(radius)):
        if keep[i]:
            keep[j] = False
    return list(arr[keep])


def _sampled(num: _Numeric, count: int | None) -> list[np.ndarray]:
    n = len(num.poly.variables)
    dirs, _ = sphere_directions(n, count)
    found = []
    for u in dirs:
        roots = num.ray_roots(u)
        for idx, t in enumerate(roots):
            q = t * u
            near_double = any(abs(t - s) <= 1e-3 * t for j, s in enumerate(roots) if j != idx)
            grad = np.linalg.norm([g(q) for g in num.grad])
            if not near_double and grad > 1e-4 * max(1.0, num.f.scale):
                continue
            q = num.polish(q)
            if np.linalg.norm(num.system(q)) < RESIDUAL_TOL:
                found.append(q)
    return _dedupe(found)


def _real_roots(coeffs: Sequence[float]) -> list[float]:
    coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "f")
    if len(coeffs) < 2:
        return []
    roots = np.roots(coeffs)
    out = []
    for r in roots:
        if abs(r.imag) <= 1e-7 * max(1.0, abs(r)):
            x = r.real
            for _ in range(3):
                d = np.polyval(np.polyder(coeffs), x)
                if d == 0:
                    break
                x -= np.polyval(coeffs, x) / d
            out.append(float(x))
    return out


def _isolated_2d(s: MultiPoly, num: _Numeric) -> list[np.ndarray]:
    """Real common zeros of a squarefree ``s`` and its gradient by elimination."""
    x, y = s.variables
    sx, sy = s.diff(x), s.diff(y)
    for elim, keep in ((y, x), (x, y)):
        elims = []
        for a, b in ((s, sx), (s, sy), (sx, sy)):
            if a.is_zero() or b.is_zero() or a.degree(elim) < 1 or b.degree(elim) < 1:
                continue
            r = resultant(a, b, elim)
            if not r.is_zero():
                elims.append(r)
        if elims:
            break
    else:
        return _sampled(num, None)
    h = poly_gcd(*elims) if len(elims) > 1 else elims[0].normalized()
    if h.is_constant():
        return []
    h = squarefree_part(h).with_variables((keep,))
    found = []
    for v in _real_roots(univariate_coefficients(h, keep)):
        cands = []
        for g in (s, sx, sy):
            coeffs = _partial_coeffs(g, keep, v, elim)
            if coeffs is not None:
                cands = _real_roots(coeffs)
                if cands:
                    break
        for w in cands:
            q = np.zeros(2)
            q[s.variables.index(keep)] = v
            q[s.variables.index(elim)] = w
            q = num.polish(q)
            if np.linalg.norm(num.system(q)) < RESIDUAL_TOL:
                found.append(q)
    return _dedupe(found)


def _partial_coeffs(g: MultiPoly, keep: str, value: float, elim: str) -> list[float] | None:
    """Float coefficients (highest first) of ``g`` with ``keep = value``, in ``elim``."""
    if g.is_zero():
        return None
    ki, ei = g.variables.index(keep), g.variables.index(elim)
    deg = g.degree(elim)
    coeffs = [0.0] * (deg + 1)
    for e, c in g.terms.items():
        coeffs[deg - e[ei]] += float(c) * value ** e[ki]
    if not any(abs(c) > 0 for c in coeffs):
        return None
    return coeffs


def _curve_points(g: MultiPoly, count: int | None) -> list[np.ndarray]:
    """Real points of ``{g = 0}`` along sampled rays from the origin."""
    num = _Numeric(g)
    dirs, _ = sphere_directions(len(g.variables), count)
    pts = []
    for u in dirs:
        for t in num.ray_roots(u):
            pts.append(t * u)
    return _dedupe(pts)


def scheme_singular_points(poly: MultiPoly, search: str = "exact-2d",
                           count: int | None = None) -> list[SingularPoint]:
    """Real points with ``P = 0`` and ``grad P = 0``.

    ``exact-2d`` splits off ``gcd(P, grad P)`` exactly (its real zero set is
    sampled along rays) and finds isolated singular points of the squarefree
    part by resultant elimination. ``sampled`` finds ray roots over a sphere
    sample and polishes candidates with Gauss-Newton. Accepted points satisfy
    ``|(P, grad P)| < 1e-9``.
    """
    if poly.is_zero():
        raise PolynomialError("zero polynomial")
    num = _Numeric(poly)
    if poly.is_constant():
        return []
    if search == "sampled":
        return [num.point(q) for q in _sampled(num, count)]
    if search != "exact-2d":
        raise ValueError(f"unknown search {search!r}")
    if len(poly.variables) != 2:
        raise ValueError("the exact-2d search needs a polynomial in two variables")
    g = poly_gcd(poly, *[poly.diff(v) for v in poly.variables])
    found = []
    if not g.is_constant():
        found.extend(q for q in _curve_points(g, count) if np.linalg.norm(num.system(q)) < RESIDUAL_TOL)
    s = poly.exact_div(g).normalized() if not g.is_constant() else poly
    s = squarefree_part(s)
    found.extend(q for q in _isolated_2d(s, _Numeric(s))
                 if np.linalg.norm(num.system(q)) < RESIDUAL_TOL)
    return [num.point(q) for q in _dedupe(found)]


def variety_smoothness(poly: MultiPoly, search: str = "exact-2d",
                       count: int | None = None) -> SmoothnessReport:
    if poly.is_zero():
        raise PolynomialError("zero polynomial")
    radical = squarefree_part(poly)
    squarefree = (radical.degree() == poly.degree())
    scheme_pts = scheme_singular_points(poly, search, count)
    variety_pts = scheme_pts if squarefree else scheme_singular_points(radical, search, count)
    return SmoothnessReport(not scheme_pts, not variety_pts, squarefree, scheme_pts)


def singular_points_csv(report: SmoothnessReport, names: Sequence[str]) -> str:
    lines = [",".join(list(names) + ["abs_value", "grad_norm"])]
    for s in report.singular_points:
        lines.append(",".join(repr(v) for v in (*s.point, s.value, s.grad_norm)))
    return "\n".join(lines) + "\n"


# -- degeneracy points vs singular points ---------------------------------------------
@dataclass
class EquivalenceReport:
    both: int
    gap_only: int
    grad_only: int
    neither: int
    flagged_points: list[tuple[float, ...]] = field(default_factory=list)

    @property
    def confusions(self) -> int:
        return self.gap_only + self.grad_only

    def to_dict(self) -> dict:
        return {"both": self.both, "gap_only": self.gap_only, "grad_only": self.grad_only,
                "neither": self.neither, "confusions": self.confusions}


def degeneracy_equiv_check(c: StiffnessTensor, count: int | None = None, tol_gap: float = 1e-8,
                           tol_grad: float = 1e-6,
                           extra_directions: Sequence | None = None) -> EquivalenceReport:
    """Compare the eigen-gap detector with the ``grad P = 0`` detector.

    For every sampled unit direction ``u`` and every eigen-branch ``k`` the
    surface point ``q = u / sqrt(lambda_k(u))`` satisfies ``P(q) = 0``. The
    gap detector fires when ``lambda_k`` has a relative distance below
    ``tol_gap`` to an adjacent eigenvalue; the polynomial detector fires when
    ``|grad P(q)| |q| / 2 < tol_grad`` (the scale-free gradient, equal to the
    product of relative eigenvalue separations at simple points).
    """
    n = c.dim
    poly = _Numeric(_slowness(c))
    arr = c.array()
    dirs, _ = sphere_directions(n, count)
    if extra_directions is not None and len(extra_directions):
        extra = np.array([np.asarray(d, float) / np.linalg.norm(d) for d in extra_directions])
        dirs = np.vstack([dirs, extra])
    counts = {"both": 0, "gap_only": 0, "grad_only": 0, "neither": 0}
    flagged = []
    for u in dirs:
        values, _ = jacobi_eigh(christoffel_array(arr, u))
        top = max(abs(values[0]), 1e-300)
        for k, lam in enumerate(values):
            if lam <= 0:
                continue
            neighbours = [values[j] for j in (k - 1, k + 1) if 0 <= j < n]
            gap_hit = min(abs(lam - v) for v in neighbours) / top < tol_gap
            q = _onto_surface(poly, u / math.sqrt(lam))
            grad = np.linalg.norm([g(q) for g in poly.grad]) * np.linalg.norm(q) / 2.0
            grad_hit = grad < tol_grad
            key = ("both" if gap_hit and grad_hit else "gap_only" if gap_hit
                   else "grad_only" if grad_hit else "neither")
            counts[key] += 1
            if gap_hit or grad_hit:
                flagged.append(tuple(float(x) for x in q))
    return EquivalenceReport(flagged_points=flagged, **counts)


def _onto_surface(num: _Numeric, q: np.ndarray) -> np.ndarray:
    """One safeguarded Newton step along the ray so that ``P(q) = 0``."""
    val = num.f(q)
    slope = float(np.dot([g(q) for g in num.grad], q)) / np.linalg.norm(q)
    if slope == 0.0:
        return q
    trial = q - val / slope * q / np.linalg.norm(q)
    return trial if abs(num.f(trial)) < abs(val) else q


def _slowness(c: StiffnessTensor) -> MultiPoly:
    from .christoffel import slowness_polynomial
    return slowness_polynomial(c)


# -- near-isotropic certificate -------------------------------------------------------
@dataclass
class IsotropyCertificate:
    base: StiffnessTensor
    tensor: StiffnessTensor
    epsilon: float
    min_gap: float
    max_deviation: float
    passed: bool

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "min_gap": self.min_gap,
                "max_deviation": self.max_deviation, "pass": self.passed}


def _is_isotropic(c0: StiffnessTensor) -> bool:
    n = c0.dim
    lam = c0.data[(0, 0, 1, 1)]
    mu = c0.data[(0, 1, 0, 1)]
    iso = make_isotropic(n, lam, mu) if c0.is_exact else make_isotropic(n, float(lam), float(mu))
    return bool(np.allclose(iso.array(), c0.array(), rtol=0, atol=1e-12 * max(1.0, c0.norm())))


def near_isotropic_certificate(c0: StiffnessTensor, c: StiffnessTensor, epsilon: float,
                               count: int | None = None, gap_tol: float = 1e-12) -> IsotropyCertificate:
    """Sampled check that the qP eigenvector stays within ``epsilon`` of ``p``.

    Passes iff the base is positive definite, the minimum relative qP gap
    exceeds ``gap_tol`` and the largest distance ``|p - (p.v1) v1|`` over unit
    ``p`` is below ``epsilon``. A degenerate base (``lambda + mu = 0`` in 2D)
    is reported as failing rather than rejected.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not _is_isotropic(c0):
        raise ValueError("base tensor is not isotropic")
    base_pd = validate(c0).positive_definite
    report = validate(c)
    if not report.symmetric:
        raise ValueError("tensor fails validation: " + "; ".join(report.violations[:3]))
    arr = c.array()
    dirs, _ = sphere_directions(c.dim, count)
    min_gap, max_dev = math.inf, 0.0
    for p in dirs:
        values, vectors = jacobi_eigh(christoffel_array(arr, p))
        min_gap = min(min_gap, relative_gap(values))
        v1 = np.asarray(vectors[0])
        max_dev = max(max_dev, float(np.linalg.norm(p - np.dot(p, v1) * v1)))
    passed = base_pd and min_gap > gap_tol and max_dev < epsilon
    return IsotropyCertificate(c0, c, epsilon, float(min_gap), max_dev, passed)
