"""The qP Hamiltonian, its Legendre transform and the induced Finsler function.

For a stiffness field ``c(x)`` the largest eigenvalue ``lambda(x, p)`` of the
Christoffel matrix is 2-homogeneous in ``p``. With ``H = lambda / 2`` the
fiber derivative ``y = dH/dp`` is the Legendre map; the Finsler function is
``F(x, y) = sqrt(lambda(x, p))`` at the preimage ``p`` of ``y``.

Derivatives of ``lambda`` in ``p`` and ``x`` are computed analytically from
the eigen-decomposition (Hellmann-Feynman and second-order perturbation),
which is valid while the top eigenvalue is simple.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .christoffel import DegenerateDirectionError
from .stiffness import ConstantField, StiffnessField, StiffnessTensor

__all__ = [
    "CotangentSample",
    "TangentSample",
    "FundamentalTensorSample",
    "LegendreError",
    "ConvexityError",
    "QPEigen",
    "as_field",
    "qp_eigen",
    "qp_hamiltonian",
    "qp_gradient",
    "qp_hessian",
    "qp_x_gradient",
    "legendre_forward",
    "legendre_inverse",
    "finsler_qp",
    "fundamental_tensor",
    "spray_coefficients",
    "finsler_battery",
]

GAP_TOL = 1e-10


class LegendreError(RuntimeError):
    """Newton inversion of the Legendre map failed; ``last`` holds the final iterate."""

    def __init__(self, message: str, last: np.ndarray | None = None):
        super().__init__(message)
        self.last = last


class ConvexityError(ValueError):
    """The fundamental tensor is not positive definite."""

    def __init__(self, message: str, eigenvalues: np.ndarray):
        super().__init__(message)
        self.eigenvalues = eigenvalues


@dataclass(frozen=True)
class CotangentSample:
    x: np.ndarray
    p: np.ndarray
    iterations: int = 0
    residual: float = 0.0


@dataclass(frozen=True)
class TangentSample:
    x: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class FundamentalTensorSample:
    g: np.ndarray
    condition: float


def as_field(field) -> StiffnessField:
    if isinstance(field, StiffnessTensor):
        return ConstantField(field)
    return field


@dataclass
class QPEigen:
    """Eigen-decomposition of ``Gamma(x, p)`` in descending order."""

    c: np.ndarray
    p: np.ndarray
    values: np.ndarray
    vectors: np.ndarray  # columns

    @property
    def lam(self) -> float:
        return float(self.values[0])

    @property
    def v(self) -> np.ndarray:
        return self.vectors[:, 0]

    def dgamma(self) -> np.ndarray:
        """``B[a] = dGamma/dp_a``, shape (n, n, n)."""
        cp = np.einsum("iakl,k->ail", self.c, self.p)
        return cp + cp.transpose(0, 2, 1)

    def gradient(self) -> np.ndarray:
        """``d lambda / dp = 2 v_i c_iakl p_k v_l``."""
        return 2.0 * np.einsum("i,iakl,k,l->a", self.v, self.c, self.p, self.v)

    def hessian(self) -> np.ndarray:
        v, vals, vecs = self.v, self.values, self.vectors
        c = self.c
        first = np.einsum("i,iabl,l->ab", v, c, v) + np.einsum("i,ibal,l->ab", v, c, v)
        b = self.dgamma()
        coup = np.einsum("ail,i,lk->ak", b, v, vecs[:, 1:])  # v^T B_a v_k
        denom = vals[0] - vals[1:]
        return first + 2.0 * (coup / denom) @ coup.T

    def x_gradient(self, dc: np.ndarray) -> np.ndarray:
        """``d lambda / dx_m = v_i dc[m]_ijkl p_j p_k v_l``."""
        return np.einsum("i,mijkl,j,k,l->m", self.v, dc, self.p, self.p, self.v)

    def mixed(self, dc: np.ndarray) -> np.ndarray:
        """``d^2 lambda / dp_a dx_m``, shape (n, n)."""
        v, vals, vecs = self.v, self.values, self.vectors
        dcp = np.einsum("miakl,k->mail", dc, self.p)
        db = dcp + dcp.transpose(0, 1, 3, 2)
        first = np.einsum("i,mail,l->am", v, db, v)
        gm = np.einsum("mijkl,j,k->mil", dc, self.p, self.p)
        cm = np.einsum("mil,i,lk->mk", gm, v, vecs[:, 1:])
        ca = np.einsum("ail,i,lk->ak", self.dgamma(), v, vecs[:, 1:])
        denom = vals[0] - vals[1:]
        return first + 2.0 * (ca / denom) @ cm.T


def qp_eigen(field, x, p, gap_tol: float = GAP_TOL) -> QPEigen:
    field = as_field(field)
    p = np.asarray(p, dtype=float)
    if not np.any(p):
        raise DegenerateDirectionError("p = 0")
    c = field.tensor_array(np.asarray(x, dtype=float))
    gamma = np.einsum("ijkl,j,k->il", c, p, p)
    w, vec = np.linalg.eigh(gamma)
    w, vec = w[::-1], vec[:, ::-1]
    if w[0] <= 0 or (w[0] - w[1]) / w[0] < gap_tol:
        raise DegenerateDirectionError(
            f"qP eigenvalue not simple at x={np.asarray(x).tolist()}, p={p.tolist()}: "
            f"eigenvalues {w.tolist()}")
    return QPEigen(c, p, w, vec)


def qp_hamiltonian(field, x, p) -> float:
    """Largest Christoffel eigenvalue ``lambda_qP(x, p)``."""
    return qp_eigen(field, x, p).lam


def qp_gradient(field, x, p) -> np.ndarray:
    return qp_eigen(field, x, p).gradient()


def qp_hessian(field, x, p) -> np.ndarray:
    return qp_eigen(field, x, p).hessian()


def qp_x_gradient(field, x, p) -> np.ndarray:
    field = as_field(field)
    return qp_eigen(field, x, p).x_gradient(field.tensor_gradient(np.asarray(x, float)))


def legendre_forward(field, x, p) -> TangentSample:
    """``y = d(lambda/2)/dp``."""
    x = np.asarray(x, dtype=float)
    return TangentSample(x, 0.5 * qp_eigen(field, x, p).gradient())


def legendre_inverse(field, x, y, tol: float = 1e-8, max_iter: int = 60) -> CotangentSample:
    """Solve ``legendre_forward(x, p) = y`` by damped Newton.

    Minimizes the convex merit ``lambda(p)/2 - y.p`` with the analytic
    Hessian and Armijo backtracking, started from a rescaled ``y``.
    """
    field = as_field(field)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ny = float(np.linalg.norm(y))
    if ny == 0.0:
        raise ValueError("y must be nonzero")
    u = y / ny
    p = y / (2.0 * qp_eigen(field, x, u).lam)
    e = qp_eigen(field, x, p)
    f = 0.5 * e.gradient()
    p = p * ny / np.linalg.norm(f)
    e = qp_eigen(field, x, p)
    res = 0.5 * e.gradient() - y
    target = 1e-15 * ny
    it = 0
    for it in range(1, max_iter + 1):
        rnorm = float(np.linalg.norm(res))
        if rnorm <= target:
            break
        step = -np.linalg.solve(0.5 * e.hessian(), res)
        merit = 0.5 * e.lam - y @ p
        slope = res @ step
        t = 1.0
        accepted = False
        while t > 1e-8:
            trial = p + t * step
            try:
                et = qp_eigen(field, x, trial)
            except DegenerateDirectionError:
                t *= 0.5
                continue
            rt = 0.5 * et.gradient() - y
            if 0.5 * et.lam - y @ trial <= merit + 1e-4 * t * slope or np.linalg.norm(rt) < rnorm:
                p, e, res, accepted = trial, et, rt, True
                break
            t *= 0.5
        if not accepted:
            break
    rnorm = float(np.linalg.norm(res))
    if rnorm > tol * ny:
        raise LegendreError(f"Legendre inversion stalled with residual {rnorm:.3e}", p)
    return CotangentSample(x, p, it, rnorm / ny)


def finsler_qp(field, x, y) -> float:
    """``F(x, y) = sqrt(lambda_qP(x, p))`` with ``p`` the Legendre preimage of ``y``."""
    p = legendre_inverse(field, x, y).p
    return math.sqrt(qp_eigen(field, x, p).lam)


def _dual_metric(field, x, y) -> np.ndarray:
    p = legendre_inverse(field, x, y).p
    return np.linalg.inv(0.5 * qp_eigen(field, x, p).hessian())


def fundamental_tensor(field, x, y, h: float = 1e-4, method: str = "fd") -> FundamentalTensorSample:
    """``g_ij = (1/2) d^2 F^2 / dy_i dy_j``.

    ``fd`` uses central second differences with step ``h |y|``; ``dual``
    inverts the analytic fiber Hessian of ``lambda / 2`` at the preimage.
    Raises :class:`ConvexityError` if ``g`` is not positive definite.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if method == "dual":
        g = _dual_metric(field, x, y)
    elif method == "fd":
        step = h * float(np.linalg.norm(y))

        def f2(v):
            return finsler_qp(field, x, v) ** 2

        eye = np.eye(n) * step
        g = np.zeros((n, n))
        base = f2(y)
        for i in range(n):
            g[i, i] = (f2(y + eye[i]) - 2.0 * base + f2(y - eye[i])) / step ** 2
            for j in range(i):
                g[i, j] = g[j, i] = (f2(y + eye[i] + eye[j]) - f2(y + eye[i] - eye[j])
                                     - f2(y - eye[i] + eye[j]) + f2(y - eye[i] - eye[j])) / (4 * step ** 2)
        g *= 0.5
    else:
        raise ValueError(f"unknown method {method!r}")
    g = 0.5 * (g + g.T)
    w = np.linalg.eigvalsh(g)
    if w[0] <= 0:
        raise ConvexityError(f"fundamental tensor not positive definite: eigenvalues {w.tolist()}", w)
    return FundamentalTensorSample(g, float(w[-1] / w[0]))


def spray_coefficients(field, x, y, method: str = "hamiltonian", step: float | None = None) -> np.ndarray:
    """Spray ``G`` with geodesics solving ``x'' + 2 G(x, x') = 0``.

    ``hamiltonian`` uses ``G = (H_pp H_x - H_px y) / 2`` at the Legendre
    preimage, all derivatives analytic. ``metric`` uses
    ``G^i = g^il (2 dg_jl/dx^k - dg_jk/dx^l) y^j y^k / 4`` with the dual
    fundamental tensor and central differences in ``x`` (step defaults to
    ``1e-5`` times the domain diameter).
    """
    field = as_field(field)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if method == "hamiltonian":
        p = legendre_inverse(field, x, y).p
        e = qp_eigen(field, x, p)
        dc = field.tensor_gradient(x)
        h_pp = 0.5 * e.hessian()
        h_x = 0.5 * e.x_gradient(dc)
        h_px = 0.5 * e.mixed(dc)
        return 0.5 * (h_pp @ h_x - h_px @ y)
    if method != "metric":
        raise ValueError(f"unknown method {method!r}")
    n = len(x)
    scale = field.domain.diameter if field.domain is not None else 1.0
    delta = step if step is not None else 1e-5 * scale
    dg = np.zeros((n, n, n))  # dg[k] = d g / d x_k
    for k in range(n):
        e = np.zeros(n)
        e[k] = delta
        if not (field.evaluable(x + e) and field.evaluable(x - e)):
            raise ValueError("x is too close to the domain boundary for the difference stencil")
        dg[k] = (_dual_metric(field, x + e, y) - _dual_metric(field, x - e, y)) / (2 * delta)
    g = _dual_metric(field, x, y)
    # term[l] = (2 dg_jl/dx_k - dg_jk/dx_l) y^j y^k
    term = 2.0 * np.einsum("kjl,j,k->l", dg, y, y) - np.einsum("ljk,j,k->l", dg, y, y)
    return 0.25 * np.linalg.solve(g, term)


def finsler_battery(field, samples: int = 200, seed: int = 0, points=None) -> dict:
    """Invariant checks at random admissible samples; returns worst residuals.

    Checks 2-homogeneity of ``lambda``, the Euler identities, the Legendre
    round trip, analytic vs. central-difference eigen-gradients, positive
    definiteness of ``g``, and the Legendre involution ``p.y - lambda/2 = lambda/2``.
    """
    field = as_field(field)
    rng = np.random.default_rng(seed)
    n = field.dim
    worst = {"homogeneity": 0.0, "euler_p": 0.0, "euler_y": 0.0, "round_trip": 0.0,
             "inverse_forward": 0.0, "gradient_fd": 0.0, "involution": 0.0,
             "g_euler": 0.0, "reversibility": 0.0}
    min_g_eig = math.inf
    skipped = 0
    for s in range(samples):
        x = points[s % len(points)] if points is not None else _random_point(field, rng)
        p = rng.standard_normal(n)
        p /= np.linalg.norm(p)
        try:
            e = qp_eigen(field, x, p)
        except DegenerateDirectionError:
            skipped += 1
            continue
        lam = e.lam
        grad = e.gradient()
        t = rng.uniform(0.5, 2.0)
        worst["homogeneity"] = max(worst["homogeneity"], abs(qp_eigen(field, x, t * p).lam - t * t * lam) / (t * t * lam))
        worst["euler_p"] = max(worst["euler_p"], abs(p @ grad - 2 * lam) / (2 * lam))
        y = 0.5 * grad
        worst["involution"] = max(worst["involution"], abs((p @ y - 0.5 * lam) - 0.5 * lam) / lam)
        back = legendre_inverse(field, x, y)
        worst["inverse_forward"] = max(worst["inverse_forward"], float(np.linalg.norm(back.p - p)))
        yr = rng.standard_normal(n)
        pr = legendre_inverse(field, x, yr).p
        worst["round_trip"] = max(worst["round_trip"],
                                  float(np.linalg.norm(legendre_forward(field, x, pr).y - yr) / np.linalg.norm(yr)))
        fd = np.zeros(n)
        hstep = 1e-5
        for a in range(n):
            d = np.zeros(n)
            d[a] = hstep
            fd[a] = (qp_eigen(field, x, p + d).lam - qp_eigen(field, x, p - d).lam) / (2 * hstep)
        worst["gradient_fd"] = max(worst["gradient_fd"], float(np.linalg.norm(fd - grad) / np.linalg.norm(grad)))
        fy = finsler_qp(field, x, yr)
        dy = np.zeros(n)
        hy = 1e-6 * np.linalg.norm(yr)
        for a in range(n):
            d = np.zeros(n)
            d[a] = hy
            dy[a] = (finsler_qp(field, x, yr + d) - finsler_qp(field, x, yr - d)) / (2 * hy)
        worst["euler_y"] = max(worst["euler_y"], abs(yr @ dy - fy) / fy)
        worst["reversibility"] = max(worst["reversibility"], abs(finsler_qp(field, x, -yr) - fy) / fy)
        try:
            g = fundamental_tensor(field, x, yr).g
            min_g_eig = min(min_g_eig, float(np.linalg.eigvalsh(g)[0]))
            worst["g_euler"] = max(worst["g_euler"], abs(yr @ g @ yr - fy * fy) / (fy * fy))
        except ConvexityError as err:
            min_g_eig = min(min_g_eig, float(err.eigenvalues[0]))
    limits = {"homogeneity": 1e-10, "euler_p": 1e-8, "euler_y": 1e-8, "round_trip": 1e-8,
              "inverse_forward": 1e-8, "gradient_fd": 1e-6, "involution": 1e-10,
              "g_euler": 1e-6, "reversibility": 1e-10}
    checks = {k: {"worst": float(worst[k]), "limit": limits[k], "pass": bool(worst[k] <= limits[k])}
              for k in worst}
    checks["g_positive_definite"] = {"worst": float(min_g_eig), "limit": 0.0, "pass": bool(min_g_eig > 0.0)}
    return {"samples": samples, "skipped": skipped, "checks": checks,
            "pass": all(v["pass"] for v in checks.values())}


def _random_point(field: StiffnessField, rng: np.random.Generator) -> np.ndarray:
    n = field.dim
    dom = field.domain
    if dom is None:
        return rng.uniform(-1.0, 1.0, n)
    if hasattr(dom, "inner_radius"):
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        return u * rng.uniform(dom.inner_radius, dom.outer_radius)
    return rng.uniform(dom.lower, dom.upper)
