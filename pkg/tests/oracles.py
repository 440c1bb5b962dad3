"""Reference implementations used only by the tests.

Each oracle is written directly from closed-form definitions and shares no
code with the package under test.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar


# -- 2D multiple-eigenvalue oracle: brute-force sweep of the unit circle -------------
def christoffel_2d(comps: dict, theta):
    """Entries ``(h11, h22, h12)`` at ``p = (cos theta, sin theta)``."""
    c = {k: float(v) for k, v in comps.items()}
    p1, p2 = np.cos(theta), np.sin(theta)
    h11 = c["1111"] * p1 ** 2 + 2 * c["1112"] * p1 * p2 + c["1212"] * p2 ** 2
    h22 = c["1212"] * p1 ** 2 + 2 * c["1222"] * p1 * p2 + c["2222"] * p2 ** 2
    h12 = c["1112"] * p1 ** 2 + (c["1122"] + c["1212"]) * p1 * p2 + c["1222"] * p2 ** 2
    return h11, h22, h12


def circle_sweep_min_gap(comps: dict, samples: int = 4096) -> tuple[float, float]:
    """Minimum over the half circle of ``lambda1 - lambda2``, scaled by max |c|.

    A dense grid finds every basin; each local minimum is refined by bounded
    Brent search on the (conical, not squared) gap.
    """
    scale = max(1.0, max(abs(float(v)) for v in comps.values()))

    def gap(theta):
        h11, h22, h12 = christoffel_2d(comps, theta)
        return np.sqrt((h11 - h22) ** 2 + 4 * h12 ** 2) / scale

    theta = np.linspace(0.0, np.pi, samples, endpoint=False)
    g = gap(theta)
    best, arg = float(g.min()), float(theta[g.argmin()])
    step = np.pi / samples
    prev, nxt = np.roll(g, 1), np.roll(g, -1)
    for k in np.flatnonzero((g <= prev) & (g <= nxt)):
        res = minimize_scalar(gap, bounds=(theta[k] - step, theta[k] + step), method="bounded",
                              options={"xatol": 1e-15, "maxiter": 500})
        if res.fun < best:
            best, arg = float(res.fun), float(res.x)
    return best, arg


def oracle_has_multiple_eigenvalue(comps: dict, tol: float = 1e-7) -> bool:
    return circle_sweep_min_gap(comps)[0] < tol


def normalized_r(comps: dict) -> float:
    """``R / max|c|^4`` from the closed-form invariants (exact, then float)."""
    c = {k: Fraction(v) for k, v in comps.items()}
    d1 = (c["1212"] + c["1122"]) ** 2 - 4 * c["1112"] * c["1222"]
    d2 = (c["1112"] - c["1222"]) ** 2 + (c["1111"] - c["1212"]) * (c["2222"] - c["1212"])
    ell = c["1122"] * c["1222"] + c["1111"] * c["1222"] - c["1112"] * c["2222"] - c["1122"] * c["1112"]
    scale = max(Fraction(1), max(abs(v) for v in c.values()))
    return float((ell ** 2 - d1 * d2) / scale ** 4)


# -- 2x2 exact resultant of binary quadratics ------------------------------------------
def quadratic_resultant(a: tuple, b: tuple) -> Fraction:
    """``res(a0 + a1 t + a2 t^2, b0 + b1 t + b2 t^2)`` via the 4x4 Sylvester determinant."""
    a0, a1, a2 = a
    b0, b1, b2 = b
    m = [[a2, a1, a0, 0], [0, a2, a1, a0], [b2, b1, b0, 0], [0, b2, b1, b0]]
    return _det([[Fraction(x) for x in row] for row in m])


def _det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    return sum((-1) ** j * m[0][j] * _det([row[:j] + row[j + 1:] for row in m[1:]])
               for j in range(n) if m[0][j] != 0)


# -- conformal Riemannian geodesics -------------------------------------------------------
def riemannian_geodesic(speed, dspeed, x0, v0, t_end: float, t_eval=None):
    """Geodesic of ``g = |dx|^2 / c(r)^2`` with ``c = speed(r)``.

    With ``phi = -ln c`` the equation is
    ``x'' = -2 (grad phi . x') x' + |x'|^2 grad phi``.
    """
    n = len(x0)

    def rhs(_, z):
        x, v = z[:n], z[n:]
        r = np.linalg.norm(x)
        grad_phi = -dspeed(r) / speed(r) * x / r
        acc = -2.0 * (grad_phi @ v) * v + (v @ v) * grad_phi
        return np.concatenate([v, acc])

    sol = solve_ivp(rhs, (0.0, t_end), np.concatenate([x0, v0]), method="DOP853",
                    rtol=1e-12, atol=1e-14, t_eval=t_eval, dense_output=True)
    return sol


# -- straight-line geometry in an annulus -----------------------------------------------
def ray_circle_exit(x0, u, radius: float) -> float:
    """Positive distance along unit ``u`` from inside point ``x0`` to the circle."""
    b = float(np.dot(x0, u))
    c = float(np.dot(x0, x0)) - radius ** 2
    return -b + math.sqrt(b * b - c)


def ray_hits_inner(x0, u, radius: float) -> float | None:
    b = float(np.dot(x0, u))
    c = float(np.dot(x0, x0)) - radius ** 2
    disc = b * b - c
    if disc <= 0:
        return None
    t = -b - math.sqrt(disc)
    return t if t > 0 else None
