"""Geodesics of the qP Finsler function.

Geodesics are integrated as the co-geodesic flow of ``H = lambda_qP / 2``:
``x' = dH/dp``, ``p' = -dH/dx``. Its projection is the Finsler geodesic with
velocity ``y = dH/dp``, and ``F(x, y) = sqrt(lambda)`` is conserved, so unit
initial data give unit-speed geodesics. Rays are advanced in batches with
classical RK4 at a fixed step; boundary exits are located by bisection on
the last step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .christoffel import DegenerateDirectionError
from .finsler import as_field, legendre_inverse, qp_eigen, spray_coefficients, finsler_qp
from .stiffness import Annulus, Box, ConstantField, IsotropicRadialField, StiffnessField, make_isotropic

__all__ = [
    "GeodesicError",
    "GeodesicPath",
    "ShootResult",
    "TravelTimeTable",
    "HerglotzReport",
    "ExpansionFit",
    "hamiltonian_rhs",
    "boundary_distance",
    "integrate_geodesic",
    "integrate_geodesics",
    "shoot_between",
    "boundary_normal_exp",
    "herglotz_check",
    "lowest_point_expansion_check",
    "travel_time_data",
    "unit_covector",
]

GAP_TOL = 1e-10
EXIT_TOL = 1e-10


class GeodesicError(RuntimeError):
    pass


@dataclass
class GeodesicPath:
    """Samples ``(t, x, y)`` of a geodesic plus its covectors ``p``."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    h: float
    exit_time: float | None = None
    exit_point: np.ndarray | None = None
    exit_boundary: str | None = None
    energy_drift: float = 0.0
    speed: float = 1.0

    @property
    def samples(self) -> list[tuple[float, np.ndarray, np.ndarray]]:
        return [(float(t), x, y) for t, x, y in zip(self.t, self.x, self.y)]

    @property
    def exited(self) -> bool:
        return self.exit_time is not None

    def rows(self) -> list[list[float]]:
        return [[float(t), *map(float, x), *map(float, y)] for t, x, y in zip(self.t, self.x, self.y)]


def boundary_distance(domain, xs) -> np.ndarray:
    """Vectorized signed distance to the boundary (positive inside)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if domain is None:
        return np.full(len(xs), np.inf)
    if isinstance(domain, Annulus):
        r = np.linalg.norm(xs, axis=1)
        return np.minimum(r - domain.inner_radius, domain.outer_radius - r)
    if isinstance(domain, Box):
        return np.minimum(np.min(xs - np.asarray(domain.lower), axis=1),
                          np.min(np.asarray(domain.upper) - xs, axis=1))
    return np.array([domain.boundary_distance(x) for x in xs])


def _which_boundary(domain, x) -> str:
    if isinstance(domain, Annulus):
        r = float(np.linalg.norm(x))
        return "inner" if abs(r - domain.inner_radius) < abs(r - domain.outer_radius) else "outer"
    return "outer"


def _eig(field: StiffnessField, xs: np.ndarray, ps: np.ndarray):
    c = field.tensor_arrays(xs)
    gamma = np.einsum("kijml,kj,km->kil", c, ps, ps)
    w, vec = np.linalg.eigh(gamma)
    lam = w[:, -1]
    if np.any(lam <= 0) or np.any((lam - w[:, -2]) / lam < GAP_TOL):
        bad = int(np.argmin((lam - w[:, -2]) / np.where(lam > 0, lam, 1.0)))
        raise DegenerateDirectionError(f"qP branch not simple at x={xs[bad].tolist()}, p={ps[bad].tolist()}")
    return c, lam, vec[:, :, -1]


def hamiltonian_rhs(field: StiffnessField, xs: np.ndarray, ps: np.ndarray):
    """Batched ``(dH/dp, -dH/dx, lambda)`` for ``H = lambda / 2``."""
    c, lam, v = _eig(field, xs, ps)
    cv = np.einsum("kiaml,ki,kl->kam", c, v, v)
    dx = np.einsum("kam,km->ka", cv, ps)
    dc = field.tensor_gradients(xs)
    if dc is None:
        dp = np.zeros_like(ps)
    else:
        dcv = np.einsum("kmijal,ki,kl->kmja", dc, v, v)
        dp = -0.5 * np.einsum("kmja,kj,ka->km", dcv, ps, ps)
    return dx, dp, lam


def _rk4(field, xs, ps, h):
    h = np.asarray(h, dtype=float).reshape(-1, 1) if np.ndim(h) else h
    k1x, k1p, _ = hamiltonian_rhs(field, xs, ps)
    k2x, k2p, _ = hamiltonian_rhs(field, xs + 0.5 * h * k1x, ps + 0.5 * h * k1p)
    k3x, k3p, _ = hamiltonian_rhs(field, xs + 0.5 * h * k2x, ps + 0.5 * h * k2p)
    k4x, k4p, _ = hamiltonian_rhs(field, xs + h * k3x, ps + h * k3p)
    return (xs + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x),
            ps + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p))


def _bisect_exit(field, domain, xs, ps, h):
    """Per ray, the largest step ``tau`` in ``[0, h]`` keeping it inside, to EXIT_TOL."""
    lo = np.zeros(len(xs))
    hi = np.full(len(xs), float(h))
    while np.max(hi - lo) > EXIT_TOL:
        mid = 0.5 * (lo + hi)
        xm, _ = _rk4(field, xs, ps, mid)
        inside = boundary_distance(domain, xm) >= 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    tau = 0.5 * (lo + hi)
    xe, pe = _rk4(field, xs, ps, tau)
    return tau, xe, pe


def unit_covector(field, x, y) -> np.ndarray:
    """Legendre preimage of ``y`` rescaled so that ``lambda = 1``."""
    p = legendre_inverse(field, x, y).p
    return p / math.sqrt(qp_eigen(field, x, p).lam)


def integrate_geodesics(field, x0s, p0s, h: float = 1e-3, t_max: float | None = None,
                        domain=None, stop_at_boundary: bool = True,
                        max_steps: int = 1_000_000) -> list[GeodesicPath]:
    """Batched RK4 co-geodesic flow from initial covectors ``p0s``.

    Each ray stops at ``t_max`` (last step truncated) or at its first boundary
    crossing, whichever comes first. Without ``t_max`` every ray must exit.
    """
    field = as_field(field)
    domain = field.domain if domain is None else domain
    xs = np.array(x0s, dtype=float, ndmin=2)
    ps = np.array(p0s, dtype=float, ndmin=2)
    k = len(xs)
    if k == 0:
        return []
    if t_max is None and (not stop_at_boundary or domain is None):
        raise ValueError("need t_max when boundary stopping is off")
    if stop_at_boundary and np.any(boundary_distance(domain, xs) < -1e-12):
        raise GeodesicError("initial point outside the domain")
    times = [[0.0] for _ in range(k)]
    traj_x = [[xs[i].copy()] for i in range(k)]
    traj_p = [[ps[i].copy()] for i in range(k)]
    exits: list[tuple | None] = [None] * k
    active = np.arange(k)
    t = 0.0
    steps = 0
    while len(active):
        if steps >= max_steps:
            raise GeodesicError(f"step cap {max_steps} exceeded")
        step = h if t_max is None else min(h, t_max - t)
        if step <= 1e-15 * max(1.0, abs(t)):
            break
        nx, np_ = _rk4(field, xs[active], ps[active], step)
        steps += 1
        outside = (boundary_distance(domain, nx) < 0) if stop_at_boundary else np.zeros(len(active), bool)
        if t_max is not None:
            t_new = t_max if step < h else t + h
        else:
            t_new = t + h
        keep = []
        if np.any(outside):
            gone = active[outside]
            taus, xes, pes = _bisect_exit(field, domain, xs[gone], ps[gone], step)
            for i, tau, xe, pe in zip(gone, taus, xes, pes):
                times[i].append(t + tau)
                traj_x[i].append(xe)
                traj_p[i].append(pe)
                exits[i] = (t + tau, xe, _which_boundary(domain, xe))
        for j, i in enumerate(active):
            if not outside[j]:
                xs[i], ps[i] = nx[j], np_[j]
                times[i].append(t_new)
                traj_x[i].append(nx[j].copy())
                traj_p[i].append(np_[j].copy())
                keep.append(i)
        t = t_new
        active = np.array(keep, dtype=int)
        if t_max is not None and t >= t_max:
            break
    return [_finish(field, np.array(times[i]), np.array(traj_x[i]), np.array(traj_p[i]), h, exits[i])
            for i in range(k)]


def _finish(field, t, x, p, h, exit_info) -> GeodesicPath:
    y, _, lam = hamiltonian_rhs(field, x, p)
    speed = np.sqrt(lam)
    drift = float(np.max(np.abs(speed - speed[0])))
    path = GeodesicPath(t, x, y, p, h, energy_drift=drift, speed=float(speed[0]))
    if exit_info is not None:
        path.exit_time, path.exit_point, path.exit_boundary = exit_info
    return path


def integrate_geodesic(field, x0, y0, h: float = 1e-3, t_max: float | None = None, domain=None,
                       method: str = "hamiltonian", stop_at_boundary: bool = True,
                       max_steps: int = 1_000_000) -> GeodesicPath:
    """Geodesic with initial point ``x0`` and initial velocity ``y0``.

    ``hamiltonian`` integrates ``(x, p)`` with RK4; ``spray`` integrates
    ``x' = y, y' = -2 G(x, y)`` with RK4 and the analytic spray (slower, for
    cross-checks; requires ``t_max``).
    """
    field = as_field(field)
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    if not np.any(y0):
        raise ValueError("initial velocity must be nonzero")
    if method == "hamiltonian":
        p0 = legendre_inverse(field, x0, y0).p
        return integrate_geodesics(field, x0[None], p0[None], h, t_max, domain,
                                   stop_at_boundary, max_steps)[0]
    if method != "spray":
        raise ValueError(f"unknown method {method!r}")
    if t_max is None:
        raise ValueError("the spray integrator needs t_max")

    def rhs(x, y):
        return y, -2.0 * spray_coefficients(field, x, y)

    ts, xs, ys = [0.0], [x0], [y0]
    t, x, y = 0.0, x0, y0
    while t < t_max - 1e-15:
        s = min(h, t_max - t)
        k1 = rhs(x, y)
        k2 = rhs(x + 0.5 * s * k1[0], y + 0.5 * s * k1[1])
        k3 = rhs(x + 0.5 * s * k2[0], y + 0.5 * s * k2[1])
        k4 = rhs(x + s * k3[0], y + s * k3[1])
        x = x + s / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y = y + s / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t = t_max if s < h else t + h
        ts.append(t)
        xs.append(x)
        ys.append(y)
    ps = np.array([legendre_inverse(field, a, b).p for a, b in zip(xs, ys)])
    f = np.array([finsler_qp(field, a, b) for a, b in zip(xs, ys)])
    return GeodesicPath(np.array(ts), np.array(xs), np.array(ys), ps, h,
                        energy_drift=float(np.max(np.abs(f - f[0]))), speed=float(f[0]))


# -- shooting -------------------------------------------------------------------------
@dataclass
class ShootResult:
    path: GeodesicPath
    time: float
    converged: bool
    miss: float
    degenerate: bool = False
    restarts: int = 0

    def __iter__(self) -> Iterator:
        return iter((self.path, self.time))


def _sphere_from_angles(angles: np.ndarray) -> np.ndarray:
    if len(angles) == 1:
        return np.array([math.cos(angles[0]), math.sin(angles[0])])
    a, b = angles
    return np.array([math.sin(a) * math.cos(b), math.sin(a) * math.sin(b), math.cos(a)])


def _angles_from_sphere(u: np.ndarray) -> np.ndarray:
    if len(u) == 2:
        return np.array([math.atan2(u[1], u[0])])
    return np.array([math.acos(max(-1.0, min(1.0, u[2]))), math.atan2(u[1], u[0])])


def _restart_offsets(n: int) -> list[np.ndarray]:
    if n == 2:
        return [np.array([k * math.pi / 8 * (-1) ** k]) for k in range(8)]
    return [np.array([0.0, 0.0])] + [0.3 * np.array([math.cos(k * math.pi / 3.5), math.sin(k * math.pi / 3.5)])
                                     for k in range(7)]


def _unit_covectors(field, x, angles_list) -> np.ndarray:
    out = []
    for ang in angles_list:
        out.append(unit_covector(field, x, _sphere_from_angles(ang)))
    return np.array(out)


def shoot_between(field, x_a, x_b, domain=None, h: float = 2e-3, tol: float | None = None,
                  max_iter: int = 40) -> ShootResult:
    """Unit-speed geodesic from ``x_a`` to ``x_b`` by Newton shooting.

    Unknowns are the Euclidean direction angles of the initial velocity
    (normalized to F-unit length) and the arrival time. The time column of
    the Jacobian is the arrival velocity; angle columns use forward
    differences. Restarts from 8 perturbed initial directions.
    """
    field = as_field(field)
    domain = field.domain if domain is None else domain
    x_a = np.asarray(x_a, dtype=float)
    x_b = np.asarray(x_b, dtype=float)
    diam = domain.diameter if domain is not None else 1.0
    tol = 1e-7 * diam if tol is None else tol
    dist = float(np.linalg.norm(x_b - x_a))
    if dist <= 1e-14 * diam:
        p0 = unit_covector(field, x_a, np.eye(len(x_a))[0])
        y0, _, _ = hamiltonian_rhs(field, x_a[None], p0[None])
        path = GeodesicPath(np.zeros(1), x_a[None].copy(), y0, p0[None], h)
        return ShootResult(path, 0.0, True, 0.0, degenerate=True)
    u0 = (x_b - x_a) / dist
    base_angles = _angles_from_sphere(u0)
    t0 = dist * finsler_qp(field, x_a, u0)
    best = None
    for r, offset in enumerate(_restart_offsets(len(x_a))):
        res = _newton_shoot(field, x_a, x_b, base_angles + offset, t0, h, tol, max_iter)
        if res is not None and (best is None or res.miss < best.miss):
            best = res
            best.restarts = r
        if best is not None and best.converged:
            return best
    if best is None:
        raise GeodesicError("shooting failed from every restart")
    return best


def _endpoint(field, x_a, p0s, t):
    paths = integrate_geodesics(field, np.repeat(x_a[None], len(p0s), 0), p0s, h=_shoot_h(t),
                                t_max=t, stop_at_boundary=False)
    return paths


_H = {"h": 2e-3}


def _shoot_h(t: float) -> float:
    steps = max(1, math.ceil(t / _H["h"]))
    return t / steps


def _newton_shoot(field, x_a, x_b, angles, t, h, tol, max_iter):
    _H["h"] = h
    n = len(x_a)
    eps = 1e-6
    best = None
    for _ in range(max_iter):
        if t <= 0:
            t = 1e-3
        try:
            trial = [angles] + [angles + eps * e for e in np.eye(n - 1)]
            p0s = _unit_covectors(field, x_a, trial)
            paths = _endpoint(field, x_a, p0s, t)
        except (DegenerateDirectionError, GeodesicError, ValueError):
            return best
        end = paths[0].x[-1]
        miss_vec = end - x_b
        miss = float(np.linalg.norm(miss_vec))
        if best is None or miss < best.miss:
            best = ShootResult(paths[0], t, miss <= tol, miss)
        if miss <= tol:
            return best
        jac = np.zeros((n, n))
        for j in range(n - 1):
            jac[:, j] = (paths[j + 1].x[-1] - end) / eps
        jac[:, n - 1] = paths[0].y[-1]
        try:
            delta = np.linalg.solve(jac, -miss_vec)
        except np.linalg.LinAlgError:
            return best
        limit = 0.5
        scale = min(1.0, limit / max(1e-300, float(np.max(np.abs(delta[:-1])))) if n > 1 else 1.0)
        angles = angles + scale * delta[:-1]
        t = t + scale * delta[-1]
    return best


# -- boundary normal exponential map ----------------------------------------------------
def boundary_normal_exp(field, z, s: float, epsilon: float | None = None, h: float = 1e-3) -> np.ndarray:
    """Point reached at time ``s`` along the F-unit geodesic leaving ``z`` inward.

    The initial covector is the inward Euclidean conormal at ``z`` scaled to
    ``lambda = 1``; its Legendre image is the initial velocity.
    """
    field = as_field(field)
    domain = field.domain
    if domain is None:
        raise ValueError("field has no domain")
    z = np.asarray(z, dtype=float)
    if abs(boundary_distance(domain, z)[0]) > 1e-9:
        raise ValueError("z is not on the boundary")
    if epsilon is None:
        epsilon = _default_collar(domain)
    if not 0 <= s < epsilon:
        raise ValueError(f"s must lie in [0, {epsilon})")
    nu = domain.inward_normal(z)
    p0 = nu / math.sqrt(qp_eigen(field, z, nu).lam)
    y0, _, _ = hamiltonian_rhs(field, z[None], p0[None])
    if float(y0[0] @ nu) <= 1e-12 * np.linalg.norm(y0):
        raise GeodesicError("initial velocity is tangent to the boundary")
    if s == 0:
        return z.copy()
    steps = max(1, math.ceil(s / h))
    path = integrate_geodesics(field, z[None], p0[None], h=s / steps, t_max=s, stop_at_boundary=False)[0]
    return path.x[-1]


def _default_collar(domain) -> float:
    if isinstance(domain, Annulus):
        return 0.25 * (domain.outer_radius - domain.inner_radius)
    if isinstance(domain, Box):
        return 0.25 * float(np.min(np.subtract(domain.upper, domain.lower)))
    return 0.1 * domain.diameter


# -- Herglotz condition ------------------------------------------------------------------
@dataclass
class HerglotzReport:
    radii: np.ndarray
    margins: np.ndarray
    min_margin: float
    passed: bool
    tol: float

    def to_dict(self) -> dict:
        return {"min_margin": self.min_margin, "pass": self.passed, "tol": self.tol,
                "radii": self.radii.tolist(), "margins": self.margins.tolist()}


def _require_radial(field) -> None:
    if not isinstance(field.domain, Annulus):
        raise ValueError("Herglotz checks need a field on an annulus")
    if isinstance(field, ConstantField):
        c = field.tensor.as_float()
        iso = make_isotropic(field.dim, float(c.data[0, 0, 1, 1]), float(c.data[0, 1, 0, 1]))
        if np.allclose(iso.array(), c.array(), rtol=0, atol=1e-12 * max(1.0, c.norm())):
            return
    base = getattr(field, "base", field)
    if isinstance(base, IsotropicRadialField) and (base is field or not np.any(field.delta.array())):
        return
    raise ValueError("Herglotz checks need a spherically symmetric field")


def herglotz_check(field, radii: Sequence[float] | None = None, directions: int = 16,
                   tol: float = 1e-9, dr: float = 1e-5) -> HerglotzReport:
    """Check ``d/dr (r / v(r, phi)) > tol`` with ``v = 1 / F(r e1, u(phi))``.

    ``u(phi)`` runs over ``directions`` unit vectors at angle ``phi`` from the
    radial direction; the derivative is a central difference of step ``dr``.
    """
    field = as_field(field)
    _require_radial(field)
    dom = field.domain
    n = field.dim
    if radii is None:
        radii = np.linspace(dom.inner_radius, dom.outer_radius, 33)
    radii = np.asarray(radii, dtype=float)
    phis = np.pi * (np.arange(directions) + 0.5) / directions
    e1 = np.eye(n)[0]
    e2 = np.eye(n)[1]

    def q(r):
        return np.array([r * finsler_qp(field, r * e1, math.cos(ph) * e1 + math.sin(ph) * e2) for ph in phis])

    margins = np.array([np.min((q(r + dr) - q(r - dr)) / (2 * dr)) for r in radii])
    m = float(np.min(margins))
    return HerglotzReport(radii, margins, m, m > tol, tol)


# -- expansion at the lowest point ----------------------------------------------------------
@dataclass
class ExpansionFit:
    r0: float
    a: float
    slopes: tuple[float, float, float]
    r_triple_dot: float
    theta_double_dot: float
    window: tuple[float, float]
    h: float

    def within(self, band: float = 0.2) -> bool:
        return all(abs(s - k) <= band for s, k in zip(self.slopes, (2, 3, 4)))

    def to_dict(self) -> dict:
        return {"r0": self.r0, "a": self.a, "slopes": list(self.slopes),
                "r_triple_dot": self.r_triple_dot, "theta_double_dot": self.theta_double_dot,
                "window": list(self.window), "h": self.h}


def _accel(field, xs, ps):
    """``x'' = -H_pp H_x + H_px H_p`` for each sample."""
    out = np.zeros_like(xs)
    dcs = field.tensor_gradients(xs)
    for i, (x, p) in enumerate(zip(xs, ps)):
        e = qp_eigen(field, x, p)
        if dcs is None:
            continue
        h_pp = 0.5 * e.hessian()
        h_x = 0.5 * e.x_gradient(dcs[i])
        h_px = 0.5 * e.mixed(dcs[i])
        out[i] = -h_pp @ h_x + h_px @ (0.5 * e.gradient())
    return out


def lowest_point_expansion_check(field, r0: float, h: float = 1e-4, window: float | None = None,
                                 levels: int = 6, diff_step: float | None = None) -> ExpansionFit:
    """Fit the orders of ``E1 = r'' - a``, ``E2 = r' - a t``, ``E3 = r - r0 - a t^2 / 2``.

    The geodesic starts at ``(r0, 0, ...)`` with a tangential F-unit velocity,
    so ``r'(0) = 0``. ``a = r''(0)`` is evaluated from the analytic
    acceleration. ``r'''(0)`` and ``theta''(0)`` are estimated by symmetric
    differences of the forward and the backward geodesic.
    """
    field = as_field(field)
    _require_radial(field)
    dom = field.domain
    if not dom.inner_radius < r0 < dom.outer_radius:
        raise ValueError("r0 must lie in the open annulus")
    n = field.dim
    x0 = r0 * np.eye(n)[0]
    u = np.eye(n)[1]
    p0 = unit_covector(field, x0, u)
    speed = float(np.linalg.norm(hamiltonian_rhs(field, x0[None], p0[None])[0]))
    if window is None:
        window = 0.1 * r0 / speed
    steps = max(1, round(window / h))
    hh = window / steps
    fwd, bwd = integrate_geodesics(field, np.stack([x0, x0]), np.stack([p0, -p0]), h=hh,
                                   t_max=window, domain=dom)
    if fwd.exited or bwd.exited:
        raise GeodesicError("geodesic leaves the annulus inside the fit window")
    acc = _accel(field, fwd.x, fwd.p)
    r = np.linalg.norm(fwd.x, axis=1)
    xv = np.einsum("ki,ki->k", fwd.x, fwd.y)
    rdot = xv / r
    rddot = (np.einsum("ki,ki->k", fwd.y, fwd.y) + np.einsum("ki,ki->k", fwd.x, acc)) / r - xv ** 2 / r ** 3
    a = float(rddot[0])
    # dyadic sample indices: t = window / 2^k
    idx = [steps // 2 ** k for k in range(levels) if steps // 2 ** k >= 1]
    idx = sorted(set(idx))
    t = fwd.t[idx]
    errs = [np.abs(rddot[idx] - a), np.abs(rdot[idx] - a * t), np.abs(r[idx] - r0 - a * t ** 2 / 2)]
    slopes = tuple(float(np.polyfit(np.log(t), np.log(np.maximum(e, 1e-300)), 1)[0]) for e in errs)
    # symmetric differences with a moderate step
    k = max(1, (diff_step and round(diff_step / hh)) or steps // 8)
    d = fwd.t[k]
    rb = np.linalg.norm(bwd.x, axis=1)
    r3 = (r[2 * k] - 2 * r[k] + 2 * rb[k] - rb[2 * k]) / (2 * d ** 3)
    th_f = np.arctan2(fwd.x[k, 1], fwd.x[k, 0])
    th_b = np.arctan2(bwd.x[k, 1], bwd.x[k, 0])
    th2 = (th_f + th_b) / d ** 2
    return ExpansionFit(r0, a, slopes, float(abs(r3)), float(abs(th2)), (float(t[0]), float(t[-1])), hh)


# -- travel times -----------------------------------------------------------------------------
@dataclass
class TravelTimeTable:
    sources: np.ndarray
    receivers: np.ndarray
    times: np.ndarray  # (n_sources, n_receivers)
    converged: np.ndarray

    def rows(self) -> list[list]:
        out = []
        for i, s in enumerate(self.sources):
            for j, r in enumerate(self.receivers):
                out.append([*map(float, s), *map(float, r), float(self.times[i, j]), bool(self.converged[i, j])])
        return out


def travel_time_data(field, sources, receivers, h: float = 2e-3, pool=None) -> TravelTimeTable:
    """Shooting travel times from each source to each receiver."""
    field = as_field(field)
    sources = np.asarray(sources, dtype=float).reshape(-1, field.dim)
    receivers = np.asarray(receivers, dtype=float).reshape(-1, field.dim)
    pairs = [(s, r) for s in sources for r in receivers]
    mapper = pool.map if pool is not None else map
    results = list(mapper(_shoot_pair, [(field, s, r, h) for s, r in pairs]))
    times = np.array([t for t, _ in results], dtype=float).reshape(len(sources), len(receivers))
    conv = np.array([c for _, c in results], dtype=bool).reshape(len(sources), len(receivers))
    return TravelTimeTable(sources, receivers, times, conv)


def _shoot_pair(args):
    field, s, r, h = args
    try:
        res = shoot_between(field, s, r, h=h)
    except GeodesicError:
        return math.nan, False
    return res.time, res.converged
