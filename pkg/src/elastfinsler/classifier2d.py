"""Exact separateness classifier for two-dimensional stiffness tensors.

The Christoffel matrix ``H = Gamma_c(p)`` of a 2D tensor has a repeated
eigenvalue exactly when ``h11 - h22 = 0`` and ``h12 = 0``. Both are binary
quadratic forms in ``p``; their resultant and discriminants are the
polynomials ``R``, ``D1``, ``D2`` in the components of ``c``, and a real
multiple eigenvalue exists iff ``R = 0`` and ``D = D1 + D2 >= 0``.

Labeling used here: ``F1`` is the ``h11 = h22`` equation and ``F2`` the
``h12 = 0`` equation, so that ``disc(F2, p2) = D1 p1^2``,
``disc(F1, p2) = 4 D2 p1^2`` and ``res(F1, F2, p2) = R p1^4``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .polyalg import MultiPoly, poly_gcd
from .stiffness import StiffnessTensor, make_isotropic

__all__ = [
    "ClassifierReport",
    "classifier_invariants",
    "has_multiple_eigenvalue",
    "build_f1_f2",
    "witness_direction",
    "degenerate_tensor",
    "complex_degenerate_tensor",
    "fraction_str",
    "isotropic_report",
]


def fraction_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class ClassifierReport:
    D1: Fraction
    D2: Fraction
    D: Fraction
    L: Fraction
    R: Fraction
    has_multiple_eigenvalue: bool
    witness_direction: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        return {
            "D1": fraction_str(self.D1),
            "D2": fraction_str(self.D2),
            "D": fraction_str(self.D),
            "L": fraction_str(self.L),
            "R": fraction_str(self.R),
            "multiple_eigenvalue": self.has_multiple_eigenvalue,
            "witness": list(self.witness_direction) if self.witness_direction else None,
        }


def _components(c: StiffnessTensor):
    if c.dim != 2:
        raise ValueError(f"the 2D classifier needs a 2-dimensional tensor, got dim={c.dim}")
    if not c.is_exact:
        raise TypeError("the 2D classifier works on exact-rational tensors only")
    return (c["1111"], c["2222"], c["1122"], c["1212"], c["1112"], c["1222"])


def _invariants(c: StiffnessTensor) -> tuple[Fraction, ...]:
    c1111, c2222, c1122, c1212, c1112, c1222 = _components(c)
    d1 = (c1212 + c1122) ** 2 - 4 * c1112 * c1222
    d2 = (c1112 - c1222) ** 2 + (c1111 - c1212) * (c2222 - c1212)
    ell = c1122 * c1222 + c1111 * c1222 - c1112 * c2222 - c1122 * c1112
    r = ell ** 2 - d1 * d2
    return d1, d2, d1 + d2, ell, r


def classifier_invariants(c: StiffnessTensor) -> ClassifierReport:
    d1, d2, d, ell, r = _invariants(c)
    multiple = r == 0 and d >= 0
    witness = witness_direction(c) if multiple else None
    return ClassifierReport(d1, d2, d, ell, r, multiple, witness)


def has_multiple_eigenvalue(c: StiffnessTensor) -> bool:
    """True iff the Christoffel matrix is a multiple of the identity at some real p != 0."""
    _, _, d, _, r = _invariants(c)
    return r == 0 and d >= 0


def build_f1_f2(c: StiffnessTensor) -> tuple[MultiPoly, MultiPoly]:
    c1111, c2222, c1122, c1212, c1112, c1222 = _components(c)
    p1, p2 = MultiPoly.gens("p1", "p2")
    f1 = (c1111 - c1212) * p1 ** 2 + 2 * (c1112 - c1222) * p1 * p2 + (c1212 - c2222) * p2 ** 2
    f2 = c1112 * p1 ** 2 + (c1212 + c1122) * p1 * p2 + c1222 * p2 ** 2
    return f1, f2


def witness_direction(c: StiffnessTensor) -> tuple[float, float] | None:
    """A real unit covector where both eigenvalues coincide, if one exists."""
    f1, f2 = build_f1_f2(c)
    if f1.is_zero() and f2.is_zero():
        return (1.0, 0.0)
    # p1 = 0: both p2^2 coefficients vanish
    if f1.leading_coeff_in("p2").is_zero() and f2.leading_coeff_in("p2").is_zero():
        return (0.0, 1.0)
    t = MultiPoly.var("t")
    g1 = f1.subs({"p1": 1, "p2": t}).with_variables(("t",))
    g2 = f2.subs({"p1": 1, "p2": t}).with_variables(("t",))
    g = poly_gcd(g1, g2)
    if g.degree("t") < 1:
        return None
    cs = [x.constant_value() for x in g.coeffs_in("t")]
    if len(cs) == 2:
        root = float(-cs[0] / cs[1])
    else:
        c0, c1, c2 = (float(x) for x in cs[:3])
        disc = c1 * c1 - 4 * c2 * c0
        if disc < 0:
            return None
        root = (-c1 + math.sqrt(disc)) / (2 * c2)
    norm = math.hypot(1.0, root)
    return (1.0 / norm, root / norm)


def degenerate_tensor(t, c1212, c1122, c1222, c2222) -> StiffnessTensor:
    """Tensor whose Christoffel matrix is scalar along ``p = (1, t)``.

    ``c1112`` and ``c1111`` are solved from the two linear conditions
    ``F2(1, t) = 0`` and ``F1(1, t) = 0``, so ``R = 0`` and ``D >= 0`` hold
    exactly.
    """
    t, c1212, c1122, c1222, c2222 = (Fraction(x) for x in (t, c1212, c1122, c1222, c2222))
    c1112 = -(c1212 + c1122) * t - c1222 * t * t
    c1111 = c1212 - 2 * (c1112 - c1222) * t - (c1212 - c2222) * t * t
    return StiffnessTensor.from_components(2, {
        "1111": c1111, "2222": c2222, "1122": c1122,
        "1212": c1212, "1112": c1112, "1222": c1222,
    })


def complex_degenerate_tensor(a, b, k2, c1212) -> StiffnessTensor:
    """Tensor with ``R = 0`` whose common root ``p2/p1 = a +- ib`` is non-real.

    Both quadratic forms are multiples of ``p2^2 - 2a p1 p2 + (a^2 + b^2) p1^2``,
    so ``D < 0`` and there is no real multiple eigenvalue. Needs ``a, b != 0``.
    """
    a, b, k2, c1212 = (Fraction(x) for x in (a, b, k2, c1212))
    if a == 0 or b == 0:
        raise ValueError("a and b must be nonzero")
    s = a * a + b * b
    c1222 = k2
    c1112 = s * k2
    c1122 = -2 * a * k2 - c1212
    k1 = (c1222 - c1112) / a
    return StiffnessTensor.from_components(2, {
        "1111": c1212 + s * k1, "2222": c1212 - k1, "1122": c1122,
        "1212": c1212, "1112": c1112, "1222": c1222,
    })


def isotropic_report(lam, mu) -> ClassifierReport:
    return classifier_invariants(make_isotropic(2, lam, mu))
