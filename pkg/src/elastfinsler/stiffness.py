"""Stiffness tensors, Voigt matrices and stiffness tensor fields.

Index convention: code uses 0-based index tuples ``(i, j, k, l)``; string keys
such as ``"1112"`` are 1-based, matching the usual elasticity notation.
Voigt pair order is ``11, 22, 12`` for n = 2, the standard
``11, 22, 33, 23, 13, 12`` for n = 3, and diagonal pairs followed by
lexicographic off-diagonal pairs otherwise. Entries are plain components
(no Kelvin sqrt(2) factors) and unit density is assumed.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = [
    "StiffnessTensor",
    "VoigtMatrix",
    "ValidationReport",
    "SymmetryError",
    "make_isotropic",
    "validate",
    "voigt_matrix",
    "tensor_from_voigt",
    "voigt_pairs",
    "Annulus",
    "Box",
    "PolynomialProfile",
    "SampledProfile",
    "StiffnessField",
    "ConstantField",
    "IsotropicRadialField",
    "PerturbedIsotropicField",
]

EXACT = "exact-rational"
FLOAT = "float"
FLOAT_SYM_RTOL = 1e-14


class SymmetryError(ValueError):
    """Tensor components violate the elastic symmetries."""


def _key(index) -> tuple[int, int, int, int]:
    if isinstance(index, str):
        if len(index) != 4 or not index.isdigit():
            raise KeyError(f"bad component key {index!r}")
        return tuple(int(ch) - 1 for ch in index)
    return tuple(int(i) for i in index)


def canonical_index(i: int, j: int, k: int, l: int) -> tuple[int, int, int, int]:
    """Representative of the orbit of (i,j,k,l) under the elastic symmetries."""
    a = (min(i, j), max(i, j))
    b = (min(k, l), max(k, l))
    return a + b if a <= b else b + a


def orbit(i: int, j: int, k: int, l: int) -> set[tuple[int, int, int, int]]:
    out = set()
    for a in ((i, j), (j, i)):
        for b in ((k, l), (l, k)):
            out.add(a + b)
            out.add(b + a)
    return out


def canonical_indices(n: int) -> list[tuple[int, int, int, int]]:
    return sorted({canonical_index(*idx) for idx in itertools.product(range(n), repeat=4)})


def _to_scalar(value, kind: str):
    if kind == EXACT:
        if isinstance(value, float):
            raise TypeError("float value given for an exact-rational tensor")
        return Fraction(value)
    return float(value)


@dataclass(frozen=True, eq=False)
class StiffnessTensor:
    """Rank-4 stiffness tensor stored as a read-only ``(n, n, n, n)`` array.

    Exact tensors hold :class:`~fractions.Fraction` objects, float tensors
    hold ``float64``. Tensors built through :meth:`from_components` have the
    elastic symmetries by construction; :meth:`from_array` keeps whatever it
    is given so that :func:`validate` can report violations.
    """

    dim: int
    scalar_kind: str
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dimension must be at least 2")
        if self.scalar_kind not in (EXACT, FLOAT):
            raise ValueError(f"unknown scalar kind {self.scalar_kind!r}")
        if self.data.shape != (self.dim,) * 4:
            raise ValueError(f"component array must have shape {(self.dim,) * 4}")
        self.data.setflags(write=False)

    # -- construction ----------------------------------------------------
    @classmethod
    def from_components(cls, dim: int, components: Mapping, scalar_kind: str = EXACT) -> "StiffnessTensor":
        """Build from one value per symmetry orbit (missing orbits are zero)."""
        dtype = object if scalar_kind == EXACT else float
        zero = Fraction(0) if scalar_kind == EXACT else 0.0
        data = np.full((dim,) * 4, zero, dtype=dtype)
        seen = {}
        for key, value in components.items():
            idx = _key(key)
            if any(not 0 <= i < dim for i in idx):
                raise KeyError(f"index {key!r} out of range for dim {dim}")
            rep = canonical_index(*idx)
            value = _to_scalar(value, scalar_kind)
            if rep in seen and seen[rep] != value:
                raise SymmetryError(f"conflicting values given for orbit of {key!r}")
            seen[rep] = value
            for o in orbit(*idx):
                data[o] = value
        return cls(dim, scalar_kind, data)

    @classmethod
    def from_array(cls, array, scalar_kind: str | None = None) -> "StiffnessTensor":
        arr = np.asarray(array)
        if scalar_kind is None:
            scalar_kind = EXACT if arr.dtype == object else FLOAT
        if scalar_kind == EXACT:
            data = np.vectorize(lambda v: _to_scalar(v, EXACT), otypes=[object])(arr)
        else:
            data = np.array(arr, dtype=float)
        return cls(arr.shape[0], scalar_kind, data)

    @classmethod
    def zero(cls, dim: int, scalar_kind: str = EXACT) -> "StiffnessTensor":
        return cls.from_components(dim, {}, scalar_kind)

    # -- access ----------------------------------------------------------
    @property
    def is_exact(self) -> bool:
        return self.scalar_kind == EXACT

    def __getitem__(self, index):
        return self.data[_key(index)]

    def components(self) -> dict[tuple[int, int, int, int], object]:
        """Canonical components, one per symmetry orbit (0-based keys)."""
        return {idx: self.data[idx] for idx in canonical_indices(self.dim)}

    def array(self) -> np.ndarray:
        """Float copy of the component array."""
        return np.array(self.data, dtype=float)

    def as_float(self) -> "StiffnessTensor":
        if not self.is_exact:
            return self
        return StiffnessTensor(self.dim, FLOAT, self.array())

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.array() ** 2)))

    # -- algebra ---------------------------------------------------------
    def _combine(self, other: "StiffnessTensor", op) -> "StiffnessTensor":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        if self.is_exact and other.is_exact:
            return StiffnessTensor(self.dim, EXACT, op(self.data, other.data))
        return StiffnessTensor(self.dim, FLOAT, op(self.array(), other.array()))

    def __add__(self, other: "StiffnessTensor") -> "StiffnessTensor":
        return self._combine(other, np.add)

    def __sub__(self, other: "StiffnessTensor") -> "StiffnessTensor":
        return self._combine(other, np.subtract)

    def __mul__(self, t) -> "StiffnessTensor":
        if self.is_exact and not isinstance(t, float):
            t = Fraction(t)
            return StiffnessTensor(self.dim, EXACT, self.data * t)
        return StiffnessTensor(self.dim, FLOAT, self.array() * float(t))

    __rmul__ = __mul__

    def rotated(self, rotation) -> "StiffnessTensor":
        """``c'_ijkl = Q_ia Q_jb Q_kc Q_ld c_abcd``."""
        q = np.asarray(rotation, dtype=float)
        data = np.einsum("ia,jb,kc,ld,abcd->ijkl", q, q, q, q, self.array())
        return StiffnessTensor(self.dim, FLOAT, data)

    def __repr__(self):
        nz = {"".join(str(i + 1) for i in k): v for k, v in self.components().items() if v}
        return f"StiffnessTensor(dim={self.dim}, kind={self.scalar_kind!r}, {nz})"


def make_isotropic(n: int, lam, mu) -> StiffnessTensor:
    """Isotropic tensor with Lamé parameters ``lam`` and ``mu``.

    Float inputs give a float tensor, everything else is kept exact.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    kind = FLOAT if isinstance(lam, float) or isinstance(mu, float) else EXACT
    comps = {}
    for i in range(n):
        comps[(i, i, i, i)] = lam + 2 * mu
        for j in range(i + 1, n):
            comps[(i, i, j, j)] = lam
            comps[(i, j, i, j)] = mu
    return StiffnessTensor.from_components(n, comps, kind)


# -- Voigt representation -----------------------------------------------------
def voigt_pairs(n: int) -> list[tuple[int, int]]:
    if n == 3:
        return [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)]
    return [(i, i) for i in range(n)] + [(i, j) for i in range(n) for j in range(i + 1, n)]


@dataclass(frozen=True, eq=False)
class VoigtMatrix:
    order: int
    entries: np.ndarray

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)


def voigt_matrix(c: StiffnessTensor) -> VoigtMatrix:
    """``V[(ij), (kl)] = c_ijkl``; raises :class:`SymmetryError` on asymmetric input."""
    report = validate(c, check_pd=False)
    if not report.symmetric:
        raise SymmetryError("; ".join(report.violations[:5]))
    pairs = voigt_pairs(c.dim)
    m = len(pairs)
    entries = np.empty((m, m), dtype=object if c.is_exact else float)
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            entries[a, b] = c.data[i, j, k, l]
    entries.setflags(write=False)
    return VoigtMatrix(m, entries)


def tensor_from_voigt(v: VoigtMatrix | np.ndarray, n: int, scalar_kind: str | None = None) -> StiffnessTensor:
    entries = v.entries if isinstance(v, VoigtMatrix) else np.asarray(v)
    pairs = voigt_pairs(n)
    if entries.shape != (len(pairs), len(pairs)):
        raise ValueError(f"Voigt matrix for n={n} must be {len(pairs)}x{len(pairs)}")
    if scalar_kind is None:
        scalar_kind = EXACT if entries.dtype == object else FLOAT
    comps = {}
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            if b >= a:
                comps[(i, j, k, l)] = entries[a, b]
    return StiffnessTensor.from_components(n, comps, scalar_kind)


# -- validation ---------------------------------------------------------------
@dataclass
class ValidationReport:
    symmetric: bool
    positive_definite: bool | None
    violations: list[str]
    voigt_eigenvalues: tuple[float, ...] = ()

    @property
    def ok(self) -> bool:
        return self.symmetric and bool(self.positive_definite)


def _exact_pd(m: np.ndarray) -> bool:
    """Positive definiteness of a rational symmetric matrix via exact LDL^T."""
    a = [[Fraction(x) for x in row] for row in m]
    size = len(a)
    for k in range(size):
        piv = a[k][k]
        if piv <= 0:
            return False
        for i in range(k + 1, size):
            f = a[i][k] / piv
            if f:
                for j in range(k + 1, size):
                    a[i][j] -= f * a[k][j]
    return True


def validate(c: StiffnessTensor, check_pd: bool = True) -> ValidationReport:
    """Check the elastic symmetries and positive definiteness of the Voigt matrix."""
    violations = []
    n = c.dim
    scale = float(np.max(np.abs(c.array()))) if n else 0.0
    for idx in itertools.product(range(n), repeat=4):
        i, j, k, l = idx
        v = c.data[idx]
        for other, label in (((j, i, k, l), "minor"), ((k, l, i, j), "major")):
            w = c.data[other]
            bad = (v != w) if c.is_exact else abs(v - w) > FLOAT_SYM_RTOL * max(scale, 1e-300)
            if bad and idx < other:
                name = "".join(str(t + 1) for t in idx)
                oname = "".join(str(t + 1) for t in other)
                violations.append(f"{label} symmetry: c{name}={v} != c{oname}={w}")
    symmetric = not violations
    if not (check_pd and symmetric):
        return ValidationReport(symmetric, None, violations)
    pairs = voigt_pairs(n)
    m = np.array([[c.data[i, j, k, l] for (k, l) in pairs] for (i, j) in pairs],
                 dtype=object if c.is_exact else float)
    eig = tuple(float(x) for x in np.linalg.eigvalsh(np.array(m, dtype=float)))
    if c.is_exact:
        pd = _exact_pd(m)
    else:
        pd = eig[0] > 1e-12 * max(abs(eig[-1]), 1e-300)
    return ValidationReport(symmetric, pd, violations, eig)


# -- domains --------------------------------------------------------------------
@dataclass(frozen=True)
class Annulus:
    """``{x : inner_radius <= |x| <= outer_radius}`` in ``dim`` dimensions."""

    dim: int
    inner_radius: float
    outer_radius: float = 1.0

    def __post_init__(self):
        if not 0 < self.inner_radius < self.outer_radius:
            raise ValueError("annulus needs 0 < inner radius < outer radius")

    @property
    def diameter(self) -> float:
        return 2.0 * self.outer_radius

    def contains(self, x, pad: float = 0.0) -> bool:
        r = float(np.linalg.norm(x))
        return self.inner_radius - pad <= r <= self.outer_radius + pad

    def boundary_distance(self, x) -> float:
        """Signed distance to the boundary, positive inside."""
        r = float(np.linalg.norm(x))
        return min(r - self.inner_radius, self.outer_radius - r)

    def inward_normal(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        r = np.linalg.norm(z)
        if abs(r - self.outer_radius) <= abs(r - self.inner_radius):
            return -z / r
        return z / r


@dataclass(frozen=True)
class Box:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or any(a >= b for a, b in zip(self.lower, self.upper)):
            raise ValueError("box needs lower < upper componentwise")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(np.subtract(self.upper, self.lower)))

    def contains(self, x, pad: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= np.asarray(self.lower) - pad) and np.all(x <= np.asarray(self.upper) + pad))

    def boundary_distance(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(min(np.min(x - self.lower), np.min(np.asarray(self.upper) - x)))

    def inward_normal(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        lo = z - np.asarray(self.lower)
        hi = np.asarray(self.upper) - z
        k = int(np.argmin(np.minimum(lo, hi)))
        nu = np.zeros(self.dim)
        nu[k] = 1.0 if lo[k] <= hi[k] else -1.0
        return nu


# -- radial profiles ----------------------------------------------------------
@dataclass(frozen=True)
class PolynomialProfile:
    """``sum_k coeffs[k] * r**k``."""

    coeffs: tuple[float, ...]

    def __call__(self, r):
        return np.polynomial.polynomial.polyval(r, self.coeffs)

    def derivative(self, r):
        return np.polynomial.polynomial.polyval(r, np.polynomial.polynomial.polyder(self.coeffs))

    def squared(self) -> "PolynomialProfile":
        return PolynomialProfile(tuple(np.polynomial.polynomial.polymul(self.coeffs, self.coeffs)))


@dataclass(frozen=True, eq=False)
class SampledProfile:
    """Monotone cubic (PCHIP) interpolation of tabulated values."""

    radii: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "_interp", PchipInterpolator(self.radii, self.values, extrapolate=True))

    def __call__(self, r):
        return self._interp(r)

    def derivative(self, r):
        return self._interp.derivative()(r)


# -- fields -----------------------------------------------------------------------
def _iso_basis(n: int) -> tuple[np.ndarray, np.ndarray]:
    eye = np.eye(n)
    lam_part = np.einsum("ij,kl->ijkl", eye, eye)
    mu_part = np.einsum("ik,jl->ijkl", eye, eye) + np.einsum("il,jk->ijkl", eye, eye)
    return lam_part, mu_part


class StiffnessField:
    """Stiffness tensor field on a domain.

    Subclasses implement :meth:`tensor_array` and :meth:`tensor_gradient`
    (float arrays). ``regularity`` is the declared C^k class; ``extension``
    is how far outside the domain the field may still be evaluated.
    """

    kind = "abstract"

    def __init__(self, dim: int, domain, regularity: int = 3, extension: float = 0.1):
        if domain is not None and domain.dim != dim:
            raise ValueError("domain dimension does not match field dimension")
        self.dim = dim
        self.domain = domain
        self.regularity = regularity
        self.extension = extension

    def tensor_array(self, x) -> np.ndarray:
        raise NotImplementedError

    def tensor_gradient(self, x) -> np.ndarray:
        """Array ``G[m, i, j, k, l] = d c_ijkl / d x_m``."""
        raise NotImplementedError

    def tensor_arrays(self, xs) -> np.ndarray:
        """Stacked :meth:`tensor_array` for points ``xs`` of shape (K, n)."""
        return np.stack([self.tensor_array(x) for x in np.asarray(xs, dtype=float)])

    def tensor_gradients(self, xs) -> np.ndarray | None:
        """Stacked :meth:`tensor_gradient`, or ``None`` when the field is constant."""
        return np.stack([self.tensor_gradient(x) for x in np.asarray(xs, dtype=float)])

    def evaluate(self, x) -> StiffnessTensor:
        return StiffnessTensor(self.dim, FLOAT, np.array(self.tensor_array(x)))

    def evaluable(self, x) -> bool:
        return self.domain is None or self.domain.contains(x, pad=self.extension)


class ConstantField(StiffnessField):
    kind = "constant"

    def __init__(self, tensor: StiffnessTensor, domain=None, regularity: int = 1000, extension: float = np.inf):
        super().__init__(tensor.dim, domain, regularity, extension)
        self.tensor = tensor
        self._array = tensor.array()
        self._array.setflags(write=False)
        self._zero_grad = np.zeros((tensor.dim,) * 5)
        self._zero_grad.setflags(write=False)

    def tensor_array(self, x) -> np.ndarray:
        return self._array

    def tensor_gradient(self, x) -> np.ndarray:
        return self._zero_grad

    def tensor_arrays(self, xs) -> np.ndarray:
        return np.broadcast_to(self._array, (len(xs),) + self._array.shape)

    def tensor_gradients(self, xs) -> None:
        return None


class IsotropicRadialField(StiffnessField):
    """Isotropic tensor with Lamé profiles ``lam(r)``, ``mu(r)``, ``r = |x|``."""

    kind = "isotropic-radial"

    def __init__(self, dim: int, lam, mu, domain=None, regularity: int = 3, extension: float = 0.1):
        super().__init__(dim, domain, regularity, extension)
        self.lam = lam
        self.mu = mu
        self._lam_basis, self._mu_basis = _iso_basis(dim)

    @classmethod
    def from_speeds(cls, dim: int, speed: PolynomialProfile, domain=None, **kw) -> "IsotropicRadialField":
        """Field with pressure speed ``speed(r)`` and shear speed ``speed(r) / 2``."""
        sq = np.asarray(speed.squared().coeffs)
        return cls(dim, PolynomialProfile(tuple(sq / 2)), PolynomialProfile(tuple(sq / 4)), domain, **kw)

    def pressure_speed(self, r):
        return np.sqrt(self.lam(r) + 2 * self.mu(r))

    def shear_speed(self, r):
        return np.sqrt(self.mu(r))

    def tensor_array(self, x) -> np.ndarray:
        r = float(np.linalg.norm(x))
        return float(self.lam(r)) * self._lam_basis + float(self.mu(r)) * self._mu_basis

    def tensor_gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return np.zeros((self.dim,) * 5)
        dc = float(self.lam.derivative(r)) * self._lam_basis + float(self.mu.derivative(r)) * self._mu_basis
        return np.multiply.outer(x / r, dc)

    def tensor_arrays(self, xs) -> np.ndarray:
        r = np.linalg.norm(np.asarray(xs, dtype=float), axis=1)
        lam = np.asarray(self.lam(r), dtype=float)[:, None, None, None, None]
        mu = np.asarray(self.mu(r), dtype=float)[:, None, None, None, None]
        return lam * self._lam_basis + mu * self._mu_basis

    def tensor_gradients(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        r = np.linalg.norm(xs, axis=1)
        safe = np.where(r > 0, r, 1.0)
        unit = np.where((r > 0)[:, None], xs / safe[:, None], 0.0)
        dl = np.asarray(self.lam.derivative(r), dtype=float)[:, None, None, None, None]
        dm = np.asarray(self.mu.derivative(r), dtype=float)[:, None, None, None, None]
        dc = dl * self._lam_basis + dm * self._mu_basis
        return unit[:, :, None, None, None, None] * dc[:, None]


class PerturbedIsotropicField(StiffnessField):
    """Isotropic base field plus a constant anisotropic perturbation."""

    kind = "perturbed-isotropic"

    def __init__(self, base: StiffnessField, delta: StiffnessTensor):
        if delta.dim != base.dim:
            raise ValueError("perturbation dimension mismatch")
        super().__init__(base.dim, base.domain, base.regularity, base.extension)
        self.base = base
        self.delta = delta
        self._delta = delta.array()

    def tensor_array(self, x) -> np.ndarray:
        return self.base.tensor_array(x) + self._delta

    def tensor_gradient(self, x) -> np.ndarray:
        return self.base.tensor_gradient(x)

    def tensor_arrays(self, xs) -> np.ndarray:
        return self.base.tensor_arrays(xs) + self._delta

    def tensor_gradients(self, xs) -> np.ndarray | None:
        return self.base.tensor_gradients(xs)
