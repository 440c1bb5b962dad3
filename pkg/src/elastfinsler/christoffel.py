"""Christoffel matrices, slowness polynomials, eigenstructure and qP gaps."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .polyalg import MultiPoly
from .stiffness import StiffnessField, StiffnessTensor

__all__ = [
    "ChristoffelMatrix",
    "EigenSystem",
    "GapReport",
    "DegenerateDirectionError",
    "christoffel_matrix",
    "christoffel_array",
    "slowness_polynomial",
    "slowness_value",
    "jacobi_eigh",
    "eigen_sorted",
    "sphere_directions",
    "relative_gap",
    "qp_gap_margin",
    "degeneracy_scan",
    "gap_sweep_csv",
    "golden_section",
]

DEFAULT_S1 = 1024
DEFAULT_S2 = 2048


class DegenerateDirectionError(ValueError):
    """The requested eigen-branch is not simple (or p = 0)."""


@dataclass(frozen=True, eq=False)
class ChristoffelMatrix:
    dim: int
    entries: np.ndarray
    p: tuple

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    values: tuple[float, ...]
    vectors: np.ndarray  # columns, matching ``values``
    residual: float

    @property
    def qp(self) -> float:
        return self.values[0]


def _is_exact_vector(p) -> bool:
    return all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in p)


def christoffel_array(c_array: np.ndarray, p) -> np.ndarray:
    """Float ``Gamma_il = c_ijkl p_j p_k`` for a float component array."""
    p = np.asarray(p, dtype=float)
    return np.einsum("ijkl,j,k->il", c_array, p, p)


def christoffel_matrix(c: StiffnessTensor, p: Sequence) -> ChristoffelMatrix:
    """Christoffel matrix of ``c`` at covector ``p``.

    Exact when ``c`` is exact and ``p`` has integer or rational entries.
    """
    if len(p) != c.dim:
        raise ValueError(f"covector of length {len(p)} for a {c.dim}-dimensional tensor")
    n = c.dim
    if c.is_exact and _is_exact_vector(p):
        pf = [Fraction(x) for x in p]
        g = np.empty((n, n), dtype=object)
        for i in range(n):
            for l in range(n):
                g[i, l] = sum((c.data[i, j, k, l] * pf[j] * pf[k]
                               for j in range(n) for k in range(n)), Fraction(0))
    else:
        g = christoffel_array(c.array(), p)
    g.setflags(write=False)
    return ChristoffelMatrix(n, g, tuple(p))


def _det(m: list[list]):
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def slowness_polynomial(c: StiffnessTensor, names: Sequence[str] | None = None) -> MultiPoly:
    """``det(Gamma_c(p) - Id)`` as an exact polynomial in ``p1..pn``.

    Float tensors are converted component-wise to their exact binary values.
    """
    n = c.dim
    if n not in (2, 3):
        raise ValueError("exact slowness polynomials are supported for n in {2, 3}")
    names = tuple(names or (f"p{i + 1}" for i in range(n)))
    data = c.data
    gamma = []
    for i in range(n):
        row = []
        for l in range(n):
            terms: dict = {}
            for j in range(n):
                for k in range(n):
                    v = Fraction(data[i, j, k, l])
                    if v:
                        e = [0] * n
                        e[j] += 1
                        e[k] += 1
                        terms[tuple(e)] = terms.get(tuple(e), 0) + v
            entry = MultiPoly(terms, names)
            if i == l:
                entry = entry - 1
            row.append(entry)
        gamma.append(row)
    return _det(gamma)


def slowness_value(c: StiffnessTensor, p) -> float:
    """Numerical ``det(Gamma_c(p) - Id)`` for any dimension."""
    g = christoffel_array(c.array(), p)
    return float(np.linalg.det(g - np.eye(c.dim)))


# -- eigen decomposition ---------------------------------------------------------
def jacobi_eigh(a, max_sweeps: int = 60) -> tuple[list[float], list[list[float]]]:
    """Cyclic Jacobi rotations for a small symmetric matrix.

    Returns eigenvalues in descending order and the matching eigenvectors as
    rows, each with its first significant component positive.
    """
    n = len(a)
    m = [[float(a[i][j]) for j in range(n)] for i in range(n)]
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    scale = math.sqrt(sum(m[i][j] ** 2 for i in range(n) for j in range(n)))
    if scale == 0.0:
        return [0.0] * n, [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    tiny = 1e-300
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += m[p][q] * m[p][q]
        if off <= (1e-17 * scale) ** 2:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p][q]
                if abs(apq) <= tiny:
                    continue
                theta = (m[q][q] - m[p][p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                cs = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * cs
                for k in range(n):
                    mkp, mkq = m[k][p], m[k][q]
                    m[k][p] = cs * mkp - sn * mkq
                    m[k][q] = sn * mkp + cs * mkq
                for k in range(n):
                    mpk, mqk = m[p][k], m[q][k]
                    m[p][k] = cs * mpk - sn * mqk
                    m[q][k] = sn * mpk + cs * mqk
                for k in range(n):
                    vkp, vkq = v[k][p], v[k][q]
                    v[k][p] = cs * vkp - sn * vkq
                    v[k][q] = sn * vkp + cs * vkq
                m[p][q] = m[q][p] = 0.0
    order = sorted(range(n), key=lambda i: -m[i][i])
    values = [m[i][i] for i in order]
    vectors = []
    for i in order:
        col = [v[k][i] for k in range(n)]
        for x in col:
            if abs(x) > 1e-12:
                if x < 0:
                    col = [-y for y in col]
                break
        vectors.append(col)
    return values, vectors


def eigen_sorted(c: StiffnessTensor | np.ndarray, p) -> EigenSystem:
    """Descending eigen-decomposition of the Christoffel matrix at ``p``."""
    p = np.asarray(p, dtype=float)
    if not np.any(p):
        raise DegenerateDirectionError("p = 0 has no eigen-branches")
    arr = c.array() if isinstance(c, StiffnessTensor) else np.asarray(c, dtype=float)
    g = christoffel_array(arr, p)
    values, vectors = jacobi_eigh(g)
    vec = np.array(vectors).T
    res = float(np.linalg.norm(g @ vec - vec * np.array(values)))
    return EigenSystem(tuple(values), vec, res)


# -- sampling -------------------------------------------------------------------------
def sphere_directions(n: int, count: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic unit directions and their angle coordinates.

    S^1: uniform angles. S^2: Fibonacci lattice, angles are (theta, phi)
    with theta the polar angle. Higher dimensions: seeded Gaussian samples.
    """
    if n == 2:
        count = count or DEFAULT_S1
        theta = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(theta), np.sin(theta)]), theta[:, None]
    if n == 3:
        count = count or DEFAULT_S2
        k = np.arange(count) + 0.5
        z = 1.0 - 2.0 * k / count
        polar = np.arccos(z)
        golden = np.pi * (3.0 - np.sqrt(5.0))
        phi = np.mod(golden * np.arange(count), 2.0 * np.pi)
        s = np.sin(polar)
        dirs = np.column_stack([s * np.cos(phi), s * np.sin(phi), z])
        return dirs, np.column_stack([polar, phi])
    count = count or 4096
    rng = np.random.default_rng(0)
    dirs = rng.standard_normal((count, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return dirs, np.zeros((count, 0))


def _direction_from_angles(n: int, angles) -> np.ndarray:
    if n == 2:
        return np.array([math.cos(angles[0]), math.sin(angles[0])])
    s = math.sin(angles[0])
    return np.array([s * math.cos(angles[1]), s * math.sin(angles[1]), math.cos(angles[0])])


def relative_gap(values: Sequence[float]) -> float:
    """``(lambda1 - lambda2) / lambda1`` clipped to [0, 1]; 0 when lambda1 <= 0."""
    if values[0] <= 0.0:
        return 0.0
    return min(1.0, max(0.0, (values[0] - values[1]) / values[0]))


def _min_adjacent_gap(values: Sequence[float]) -> float:
    top = max(abs(values[0]), abs(values[-1]))
    if top == 0.0:
        return 0.0
    return min(values[k] - values[k + 1] for k in range(len(values) - 1)) / top


@dataclass
class GapReport:
    min_gap: float
    argmin: tuple[float, ...]
    sample_count: int
    lipschitz: float
    covering_radius: float
    certified_margin: float
    nonpositive: bool
    argmin_point: tuple[float, ...] | None = None

    @property
    def separate(self) -> bool:
        return self.certified_margin > 0.0 and not self.nonpositive

    def to_dict(self) -> dict:
        return {
            "min_gap": self.min_gap,
            "argmin": list(self.argmin),
            "argmin_point": list(self.argmin_point) if self.argmin_point is not None else None,
            "sample_count": self.sample_count,
            "lipschitz": self.lipschitz,
            "covering_radius": self.covering_radius,
            "certified_margin": self.certified_margin,
            "nonpositive": self.nonpositive,
            "separate": self.separate,
        }


def _gap_profile(arr: np.ndarray, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray, bool]:
    gaps = np.empty(len(dirs))
    lam = np.empty((len(dirs), arr.shape[0]))
    nonpos = False
    for s, p in enumerate(dirs):
        values, _ = jacobi_eigh(christoffel_array(arr, p))
        lam[s] = values
        nonpos |= values[0] <= 0.0
        gaps[s] = relative_gap(values)
    return gaps, lam, nonpos


def qp_gap_margin(c: StiffnessTensor | StiffnessField, count: int | None = None,
                  points: Sequence | None = None) -> GapReport:
    """Minimum relative qP gap over sampled unit directions (and base points)."""
    n = c.dim
    if count is not None and count < 2 * n:
        raise ValueError(f"need at least {2 * n} sample directions")
    dirs, _ = sphere_directions(n, count)
    if isinstance(c, StiffnessField):
        if points is None or len(points) == 0:
            raise ValueError("field gap sweeps need base points")
        arrays = [(tuple(map(float, x)), c.tensor_array(x)) for x in points]
    else:
        arrays = [(None, c.array())]
    tree = cKDTree(dirs)
    dist, nbr = tree.query(dirs, k=min(len(dirs), 2 * n + 1))
    covering = float(np.max(dist[:, 1])) / 2.0 if dist.shape[1] > 1 else math.pi
    best = (math.inf, None, None)
    lipschitz = 0.0
    nonpositive = False
    for x, arr in arrays:
        gaps, _, nonpos = _gap_profile(arr, dirs)
        nonpositive |= nonpos
        diffs = np.abs(gaps[:, None] - gaps[nbr[:, 1:]]) / np.maximum(dist[:, 1:], 1e-300)
        lipschitz = max(lipschitz, float(np.max(diffs)))
        k = int(np.argmin(gaps))
        if gaps[k] < best[0]:
            best = (float(gaps[k]), tuple(float(t) for t in dirs[k]), x)
    margin = best[0] - lipschitz * covering
    return GapReport(best[0], best[1], len(dirs) * len(arrays), lipschitz, covering,
                     margin, nonpositive, best[2])


def golden_section(f, a: float, b: float, tol: float = 1e-14, max_iter: int = 200) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def degeneracy_scan(c: StiffnessTensor, count: int | None = None, tol: float = 1e-8,
                    extra_directions: Sequence | None = None) -> list[np.ndarray]:
    """Unit directions where adjacent Christoffel eigenvalues nearly coincide.

    Every sample with relative adjacent gap below ``tol`` is reported; local
    minima of the gap are refined by golden-section search (alternating over
    the two angles on S^2) and reported when the refined gap is below ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = c.dim
    if n not in (2, 3):
        raise ValueError("degeneracy scans support n in {2, 3}")
    arr = c.array()
    dirs, angles = sphere_directions(n, count)
    if extra_directions is not None and len(extra_directions):
        extra = np.array([np.asarray(d, float) / np.linalg.norm(d) for d in extra_directions])
        extra_angles = np.array([_angles_of(d) for d in extra])
        dirs = np.vstack([dirs, extra])
        angles = np.vstack([angles, extra_angles])

    def gap_at(ang) -> float:
        values, _ = jacobi_eigh(christoffel_array(arr, _direction_from_angles(n, ang)))
        return _min_adjacent_gap(values)

    gaps = np.array([gap_at(a) for a in angles])
    found = [dirs[k] for k in np.flatnonzero(gaps < tol)]
    tree = cKDTree(dirs)
    dist, nbr = tree.query(dirs, k=min(len(dirs), 2 * n + 1))
    step = float(np.max(dist[:, 1])) if dist.shape[1] > 1 else math.pi
    for k in range(len(dirs)):
        others = nbr[k, 1:]
        if gaps[k] < tol or np.any((gaps[others] < gaps[k])
                                   | ((gaps[others] == gaps[k]) & (others < k))):
            continue
        ang = np.array(angles[k], dtype=float)
        best = gaps[k]
        for _ in range(1 if n == 2 else 4):
            for axis in range(n - 1):
                def along(t, axis=axis):
                    trial = ang.copy()
                    trial[axis] = t
                    return gap_at(trial)
                t, val = golden_section(along, ang[axis] - 1.5 * step, ang[axis] + 1.5 * step)
                if val < best:
                    ang[axis], best = t, val
        if best < tol:
            found.append(_direction_from_angles(n, ang))
    return _dedupe(found, 1e-6)


def _angles_of(d: np.ndarray) -> tuple[float, ...]:
    if len(d) == 2:
        return (math.atan2(d[1], d[0]),)
    return (math.acos(max(-1.0, min(1.0, d[2]))), math.atan2(d[1], d[0]))


def _dedupe(points: list[np.ndarray], tol: float) -> list[np.ndarray]:
    """Drop points within ``tol`` of an earlier point."""
    if not points:
        return []
    arr = np.asarray(points, dtype=float)
    keep = np.ones(len(arr), dtype=bool)
    for i, j in sorted(cKDTree(arr).query_pairs(tol)):
        if keep[i]:
            keep[j] = False
    return list(arr[keep])


def gap_sweep_csv(c: StiffnessTensor, count: int | None = None) -> str:
    """CSV rows ``theta[,phi],lambda1,...,lambdan,rel_gap`` over unit directions."""
    n = c.dim
    dirs, angles = sphere_directions(n, count)
    arr = c.array()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    head = ["theta"] + (["phi"] if n == 3 else []) + [f"lambda{i + 1}" for i in range(n)] + ["rel_gap"]
    writer.writerow(head)
    for p, ang in zip(dirs, angles):
        values, _ = jacobi_eigh(christoffel_array(arr, p))
        writer.writerow([repr(float(a)) for a in ang] + [repr(v) for v in values]
                        + [repr(relative_gap(values))])
    return buf.getvalue()
