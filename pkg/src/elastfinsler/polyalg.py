"""Exact multivariate polynomials over the rationals.

Sparse representation: a :class:`MultiPoly` maps exponent tuples to nonzero
:class:`~fractions.Fraction` coefficients over an ordered tuple of variable
names. Arithmetic between polynomials over different variable tuples works on
the union of the variables (first operand's order first).

Provides resultants (Sylvester determinant, fraction-free Bareiss
elimination), discriminants, gcd by primitive polynomial remainder sequences
with recursive content stripping, and squarefree parts.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import reduce
from math import gcd as igcd
from math import lcm as ilcm
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "MultiPoly",
    "PolynomialError",
    "resultant",
    "discriminant",
    "poly_gcd",
    "squarefree_part",
    "is_squarefree",
    "sylvester_matrix",
]


class PolynomialError(ValueError):
    """Raised on invalid polynomial input (zero polynomial, bad degree, ...)."""


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floating coefficients are not allowed in exact polynomials")
    return Fraction(value)


class MultiPoly:
    """Sparse polynomial with exact rational coefficients.

    >>> x, y = MultiPoly.gens("x", "y")
    >>> str((x + y) ** 2)
    'x^2 + 2 * x y + y^2'
    """

    __slots__ = ("variables", "terms")

    def __init__(self, terms: Mapping[tuple, object] | None = None,
                 variables: Sequence[str] = ()):
        self.variables = tuple(variables)
        n = len(self.variables)
        clean = {}
        for exps, coef in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise PolynomialError(f"exponent {exps} does not match variables {self.variables}")
            if any(e < 0 for e in exps):
                raise PolynomialError("negative exponents are not polynomial")
            coef = _frac(coef)
            if coef:
                clean[exps] = clean.get(exps, Fraction(0)) + coef
                if not clean[exps]:
                    del clean[exps]
        self.terms = clean

    # -- construction ---------------------------------------------------
    @classmethod
    def constant(cls, value, variables: Sequence[str] = ()) -> "MultiPoly":
        n = len(tuple(variables))
        return cls({(0,) * n: value}, variables)

    @classmethod
    def var(cls, name: str, variables: Sequence[str] | None = None) -> "MultiPoly":
        variables = tuple(variables) if variables is not None else (name,)
        if name not in variables:
            raise PolynomialError(f"{name!r} is not among {variables}")
        exps = tuple(1 if v == name else 0 for v in variables)
        return cls({exps: 1}, variables)

    @classmethod
    def gens(cls, *names: str) -> tuple["MultiPoly", ...]:
        return tuple(cls.var(name, names) for name in names)

    @classmethod
    def from_coeffs(cls, coeffs: Sequence["MultiPoly"], var: str) -> "MultiPoly":
        """Build ``sum_k coeffs[k] * var**k``."""
        x = None
        result = None
        for k, c in enumerate(coeffs):
            c = _as_poly(c)
            if x is None:
                names = c.variables if var in c.variables else c.variables + (var,)
                x = cls.var(var, names)
                result = cls.constant(0, names)
            result = result + c * x ** k
        return result if result is not None else cls.constant(0, (var,))

    # -- basic properties ----------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise PolynomialError("polynomial is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def used_variables(self) -> tuple[str, ...]:
        return tuple(v for i, v in enumerate(self.variables)
                     if any(e[i] for e in self.terms))

    def degree(self, var: str | None = None) -> int:
        """Total degree, or degree in ``var``. The zero polynomial has degree -1."""
        if not self.terms:
            return -1
        if var is None:
            return max(sum(e) for e in self.terms)
        if var not in self.variables:
            return 0
        i = self.variables.index(var)
        return max(e[i] for e in self.terms)

    def sorted_terms(self) -> list[tuple[tuple, Fraction]]:
        """Terms in canonical order: graded, then lexicographic, descending."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def leading_coefficient(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        return self.sorted_terms()[0][1]

    # -- variable bookkeeping -------------------------------------------
    def with_variables(self, variables: Sequence[str]) -> "MultiPoly":
        variables = tuple(variables)
        if variables == self.variables:
            return self
        idx = []
        for v in self.variables:
            if v in variables:
                idx.append(variables.index(v))
            else:
                idx.append(None)
        terms = {}
        for exps, c in self.terms.items():
            new = [0] * len(variables)
            for i, e in enumerate(exps):
                if e:
                    if idx[i] is None:
                        raise PolynomialError(f"variable {self.variables[i]!r} would be dropped")
                    new[idx[i]] = e
            terms[tuple(new)] = c
        return MultiPoly(terms, variables)

    def _unify(self, other) -> tuple["MultiPoly", "MultiPoly"]:
        other = _as_poly(other, self.variables)
        if other.variables == self.variables:
            return self, other
        names = self.variables + tuple(v for v in other.variables if v not in self.variables)
        return self.with_variables(names), other.with_variables(names)

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        a, b = self._unify(other)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            s = terms.get(e, 0) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return _raw(terms, a.variables)

    __radd__ = __add__

    def __neg__(self):
        return _raw({e: -c for e, c in self.terms.items()}, self.variables)

    def __sub__(self, other):
        return self + (-_as_poly(other, self.variables))

    def __rsub__(self, other):
        return _as_poly(other, self.variables) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = _frac(other)
            if not other:
                return _raw({}, self.variables)
            return _raw({e: c * other for e, c in self.terms.items()}, self.variables)
        a, b = self._unify(other)
        terms: dict = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                s = terms.get(e, 0) + c1 * c2
                if s:
                    terms[e] = s
                else:
                    terms.pop(e, None)
        return _raw(terms, a.variables)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise PolynomialError("only nonnegative integer powers")
        result = MultiPoly.constant(1, self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            other = _frac(other)
            return self * (1 / other)
        return self.exact_div(other)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.constant(other, self.variables)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = self._unify(other)
        return a.terms == b.terms

    def __hash__(self):
        used = self.used_variables()
        trimmed = self.with_variables(used) if used != self.variables else self
        return hash((used, frozenset(trimmed.terms.items())))

    def __repr__(self):
        return f"MultiPoly({str(self)!r}, variables={self.variables})"

    def __str__(self):
        return render(self)

    # -- calculus / evaluation -----------------------------------------
    def diff(self, var: str) -> "MultiPoly":
        if var not in self.variables:
            return _raw({}, self.variables)
        i = self.variables.index(var)
        terms = {}
        for e, c in self.terms.items():
            if e[i]:
                new = list(e)
                new[i] -= 1
                terms[tuple(new)] = c * e[i]
        return _raw(terms, self.variables)

    def gradient(self, variables: Sequence[str] | None = None) -> list["MultiPoly"]:
        return [self.diff(v) for v in (variables or self.variables)]

    def subs(self, values: Mapping[str, object]) -> "MultiPoly":
        """Substitute exact values (or polynomials) for some variables."""
        result = _raw({}, self.variables)
        for e, c in self.terms.items():
            term = MultiPoly.constant(c, self.variables)
            rest = list(e)
            for i, v in enumerate(self.variables):
                if v in values and e[i]:
                    term = term * (_as_poly(values[v], self.variables) ** e[i])
                    rest[i] = 0
                elif v in values:
                    rest[i] = 0
            mono = _raw({tuple(rest): 1}, self.variables)
            result = result + term * mono
        return result

    def __call__(self, *point):
        """Evaluate at a point (exactly for rationals, in floating point otherwise)."""
        if len(point) == 1 and isinstance(point[0], (list, tuple, np.ndarray)):
            point = tuple(point[0])
        if len(point) != len(self.variables):
            raise PolynomialError("point dimension does not match variables")
        total = 0
        for e, c in self.terms.items():
            term = c if not any(isinstance(x, float) for x in point) else float(c)
            for x, k in zip(point, e):
                if k:
                    term = term * x ** k
            total = total + term
        return total

    def coeffs_in(self, var: str) -> list["MultiPoly"]:
        """Coefficients as a polynomial in ``var``; entry ``k`` multiplies ``var**k``."""
        if var not in self.variables:
            return [self] if self.terms else []
        i = self.variables.index(var)
        deg = self.degree(var)
        buckets: list[dict] = [dict() for _ in range(deg + 1)]
        for e, c in self.terms.items():
            new = list(e)
            k = new[i]
            new[i] = 0
            buckets[k][tuple(new)] = c
        return [_raw(b, self.variables) for b in buckets]

    def leading_coeff_in(self, var: str) -> "MultiPoly":
        cs = self.coeffs_in(var)
        return cs[-1] if cs else _raw({}, self.variables)

    def homogeneous_parts(self) -> dict[int, "MultiPoly"]:
        parts: dict[int, dict] = {}
        for e, c in self.terms.items():
            parts.setdefault(sum(e), {})[e] = c
        return {d: _raw(t, self.variables) for d, t in parts.items()}

    # -- normalization ---------------------------------------------------
    def content(self) -> Fraction:
        """Rational content: positive ``g`` with ``self / g`` integral and primitive."""
        if not self.terms:
            return Fraction(0)
        den = reduce(ilcm, (c.denominator for c in self.terms.values()), 1)
        num = reduce(igcd, (abs(c.numerator) * (den // c.denominator) for c in self.terms.values()), 0)
        return Fraction(num, den)

    def normalized(self) -> "MultiPoly":
        """Integer coefficients with gcd 1 and positive leading coefficient."""
        if not self.terms:
            return self
        g = self.content()
        if self.leading_coefficient() < 0:
            g = -g
        return self * (1 / g)

    def exact_div(self, other) -> "MultiPoly":
        """Quotient ``self / other``; raises if the division is not exact."""
        a, b = self._unify(other)
        if b.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if b.is_constant():
            return a * (1 / b.constant_value())
        lex = lambda t: t[0]  # noqa: E731
        b_lead_e, b_lead_c = max(b.terms.items(), key=lex)
        rem = dict(a.terms)
        quot: dict = {}
        b_items = list(b.terms.items())
        while rem:
            e, c = max(rem.items(), key=lex)
            shift = tuple(x - y for x, y in zip(e, b_lead_e))
            if any(s < 0 for s in shift):
                raise PolynomialError("division is not exact")
            q = c / b_lead_c
            quot[shift] = q
            for be, bc in b_items:
                t = tuple(x + y for x, y in zip(be, shift))
                s = rem.get(t, 0) - q * bc
                if s:
                    rem[t] = s
                else:
                    rem.pop(t, None)
        return _raw(quot, a.variables)

    # -- numerics --------------------------------------------------------
    def to_numeric(self) -> "NumericPoly":
        return NumericPoly(self)


def _raw(terms: dict, variables: tuple) -> MultiPoly:
    p = MultiPoly.__new__(MultiPoly)
    p.variables = variables
    p.terms = terms
    return p


def _as_poly(value, variables: Sequence[str] = ()) -> MultiPoly:
    if isinstance(value, MultiPoly):
        return value
    return MultiPoly.constant(_frac(value), variables)


class NumericPoly:
    """Vectorized floating-point evaluation of a :class:`MultiPoly`."""

    def __init__(self, poly: MultiPoly):
        self.variables = poly.variables
        items = poly.sorted_terms()
        n = len(poly.variables)
        self.exps = np.array([e for e, _ in items], dtype=int).reshape(len(items), n)
        self.coefs = np.array([float(c) for _, c in items], dtype=float)
        self.scale = float(np.abs(self.coefs).sum()) if len(items) else 0.0

    def __call__(self, points) -> np.ndarray | float:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if not len(self.coefs):
            out = np.zeros(pts.shape[0])
        else:
            mono = np.prod(pts[:, None, :] ** self.exps[None, :, :], axis=2)
            out = mono @ self.coefs
        return float(out[0]) if single else out


# -- rendering / parsing -----------------------------------------------------
def _fmt_coef(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def render(p: MultiPoly) -> str:
    """Canonical text form, e.g. ``'3/2 * p1^2 p2 - p2 + 1'``."""
    if p.is_zero():
        return "0"
    pieces = []
    for k, (e, c) in enumerate(p.sorted_terms()):
        mono = " ".join(v if d == 1 else f"{v}^{d}" for v, d in zip(p.variables, e) if d)
        mag = abs(c)
        if not mono:
            body = _fmt_coef(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{_fmt_coef(mag)} * {mono}"
        if k == 0:
            pieces.append(("-" if c < 0 else "") + body)
        else:
            pieces.append(("- " if c < 0 else "+ ") + body)
    return " ".join(pieces)


_TERM_SPLIT = re.compile(r"\s*([+-])\s*")
_FACTOR = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\^(\d+))?$")
_NUMBER = re.compile(r"^\d+(?:/\d+)?$|^\d*\.\d+$|^\d+\.\d*$")


def parse(text: str, variables: Sequence[str] | None = None) -> MultiPoly:
    """Parse the canonical text form produced by :func:`render`.

    Variables are taken in order of first appearance unless given.
    """
    text = text.strip()
    if not text:
        raise PolynomialError("empty polynomial text")
    chunks = _TERM_SPLIT.split(text)
    if chunks[0] == "":
        chunks = chunks[1:]
    else:
        chunks = ["+"] + chunks
    names = list(variables or [])
    parsed = []
    for sign, body in zip(chunks[0::2], chunks[1::2]):
        if not body:
            raise PolynomialError(f"dangling sign in {text!r}")
        coef = Fraction(1)
        powers: dict[str, int] = {}
        if "***" in body or re.search(r"\*\s+\*", body) or body.strip().startswith("*") or body.strip().endswith("*"):
            raise PolynomialError(f"stray '*' in {body!r}")
        for tok in re.sub(r"(?<!\*)\*(?!\*)", " ", body.replace("**", "^")).split():
            if _NUMBER.match(tok):
                coef *= Fraction(tok)
                continue
            m = _FACTOR.match(tok)
            if not m:
                raise PolynomialError(f"cannot parse token {tok!r}")
            name, exp = m.group(1), int(m.group(2) or 1)
            if name not in names:
                if variables is not None:
                    raise PolynomialError(f"unknown variable {name!r}")
                names.append(name)
            powers[name] = powers.get(name, 0) + exp
        parsed.append((-coef if sign == "-" else coef, powers))
    names = tuple(names)
    terms: dict = {}
    for coef, powers in parsed:
        e = tuple(powers.get(v, 0) for v in names)
        terms[e] = terms.get(e, 0) + coef
    return MultiPoly(terms, names)


# -- resultants and discriminants ---------------------------------------------
def sylvester_matrix(f: MultiPoly, g: MultiPoly, var: str) -> list[list[MultiPoly]]:
    f, g = f._unify(g)
    fc = f.coeffs_in(var)[::-1]
    gc = g.coeffs_in(var)[::-1]
    m, n = len(fc) - 1, len(gc) - 1
    zero = _raw({}, f.variables)
    size = m + n
    rows = []
    for i in range(n):
        rows.append([zero] * i + fc + [zero] * (size - m - 1 - i))
    for i in range(m):
        rows.append([zero] * i + gc + [zero] * (size - n - 1 - i))
    return rows


def _det_bareiss(mat: list[list[MultiPoly]]) -> MultiPoly:
    a = [list(row) for row in mat]
    size = len(a)
    if size == 0:
        raise PolynomialError("empty matrix")
    variables = a[0][0].variables
    sign = 1
    prev = MultiPoly.constant(1, variables)
    for k in range(size - 1):
        if a[k][k].is_zero():
            for i in range(k + 1, size):
                if not a[i][k].is_zero():
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return _raw({}, variables)
        piv = a[k][k]
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                a[i][j] = (a[i][j] * piv - a[i][k] * a[k][j]).exact_div(prev)
        prev = piv
    det = a[-1][-1]
    return -det if sign < 0 else det


def resultant(f: MultiPoly, g: MultiPoly, var: str) -> MultiPoly:
    """Resultant of ``f`` and ``g`` with respect to ``var``.

    Determinant of the Sylvester matrix built from the actual degrees in
    ``var``; the result is a polynomial in the remaining variables.
    """
    f = _as_poly(f)
    g = _as_poly(g)
    if f.is_zero() or g.is_zero():
        raise PolynomialError("resultant of the zero polynomial")
    if f.degree(var) < 1 or g.degree(var) < 1:
        raise PolynomialError(f"both polynomials need positive degree in {var!r}")
    return _det_bareiss(sylvester_matrix(f, g, var))


def discriminant(f: MultiPoly, var: str) -> MultiPoly:
    """``(-1)**(d(d-1)/2) * res(f, f') / lc(f)``; equals ``b^2 - 4ac`` for quadratics."""
    f = _as_poly(f)
    d = f.degree(var)
    if d < 2:
        raise PolynomialError(f"discriminant needs degree >= 2 in {var!r}")
    res = resultant(f, f.diff(var), var)
    disc = res.exact_div(f.leading_coeff_in(var))
    return -disc if (d * (d - 1) // 2) % 2 else disc


# -- gcd and squarefree parts -----------------------------------------------
def _prem(a: MultiPoly, b: MultiPoly, var: str) -> MultiPoly:
    """Pseudo-remainder of ``a`` by ``b`` in ``var``."""
    db = b.degree(var)
    lb = b.leading_coeff_in(var)
    x = MultiPoly.var(var, a.variables)
    r = a
    e = a.degree(var) - db + 1
    while not r.is_zero() and r.degree(var) >= db:
        lr = r.leading_coeff_in(var)
        r = lb * r - lr * b * x ** (r.degree(var) - db)
        e -= 1
    return r * lb ** e if e > 0 else r


def _content_in(f: MultiPoly, var: str) -> MultiPoly:
    coeffs = [c for c in f.coeffs_in(var) if not c.is_zero()]
    g = coeffs[0]
    for c in coeffs[1:]:
        if g.is_constant():
            break
        g = _gcd(g, c)
    return g.normalized() if not g.is_constant() else MultiPoly.constant(1, f.variables)


def _gcd(f: MultiPoly, g: MultiPoly) -> MultiPoly:
    f, g = f._unify(g)
    if f.is_zero():
        return g.normalized()
    if g.is_zero():
        return f.normalized()
    if f.is_constant() or g.is_constant():
        return MultiPoly.constant(1, f.variables)
    fu, gu = set(f.used_variables()), set(g.used_variables())
    var = next(v for v in f.variables if v in fu or v in gu)
    if var not in fu:
        return _gcd(f, _content_in(g, var))
    if var not in gu:
        return _gcd(_content_in(f, var), g)
    cf, cg = _content_in(f, var), _content_in(g, var)
    a, b = f.exact_div(cf), g.exact_div(cg)
    if a.degree(var) < b.degree(var):
        a, b = b, a
    while not b.is_zero() and b.degree(var) > 0:
        r = _prem(a, b, var)
        a, b = b, (r.exact_div(_content_in(r, var)) if not r.is_zero() else r)
    h = a if b.is_zero() else MultiPoly.constant(1, f.variables)
    if not h.is_constant():
        h = h.exact_div(_content_in(h, var))
    return (_gcd(cf, cg) * h).normalized()


def poly_gcd(*polys: MultiPoly) -> MultiPoly:
    """Normalized gcd (integer content 1, positive leading coefficient)."""
    polys = [_as_poly(p) for p in polys]
    if not polys:
        raise PolynomialError("gcd of nothing")
    result = polys[0]
    for p in polys[1:]:
        if result.is_constant() and not result.is_zero():
            break
        result = _gcd(result, p)
    return result.normalized()


def _check_nonzero(f: MultiPoly) -> MultiPoly:
    f = _as_poly(f)
    if f.is_zero():
        raise PolynomialError("zero polynomial")
    return f


def squarefree_part(f: MultiPoly) -> MultiPoly:
    """``f / gcd(f, df/dx1, ..., df/dxn)``, normalized (content 1, lc > 0)."""
    f = _check_nonzero(f)
    if f.is_constant():
        return MultiPoly.constant(1, f.variables)
    g = poly_gcd(f, *[f.diff(v) for v in f.used_variables()])
    return f.exact_div(g).normalized()


def is_squarefree(f: MultiPoly) -> bool:
    f = _check_nonzero(f)
    if f.is_constant():
        return True
    return poly_gcd(f, *[f.diff(v) for v in f.used_variables()]).is_constant()


def univariate_coefficients(f: MultiPoly, var: str) -> list[float]:
    """Float coefficients, highest degree first, of a polynomial in ``var`` only."""
    used = set(f.used_variables()) - {var}
    if used:
        raise PolynomialError(f"polynomial still depends on {sorted(used)}")
    return [float(c.constant_value()) if not c.is_zero() else 0.0
            for c in reversed(f.coeffs_in(var))]


def product(polys: Iterable[MultiPoly]) -> MultiPoly:
    polys = list(polys)
    return reduce(lambda a, b: a * b, polys[1:], polys[0])
