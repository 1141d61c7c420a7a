"""Dirichlet eigenvalues of the vector p-Laplacian on (0, b).

The eigenvalues are lambda_n = (n / b)^p (p - 1) pi_p^p, where
pi_p = 2 * int_0^1 (1 - t^p)^(-1/p) dt, and the eigenfunctions are fixed
vectors times the scalar sin_p waves.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from .grid import DiscreteFunction, Grid, _trapezoid, differentiate, lp_norm

SINGULAR_DELTA = 1e-4
STRICT_MARGIN = 1e-12


@dataclass(frozen=True)
class EigenParams:
    p: float
    b: float
    N: int = 1

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("exponent out of range")
        if not self.b > 0:
            raise ValueError("interval length b must be positive")


@dataclass(frozen=True)
class PsiParams:
    xi: float
    theta: DiscreteFunction
    p: float


@lru_cache(maxsize=8)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _graded_panels(end):
    """Panels on [0, end] that halve in width towards ``end``."""
    edges = [0.0, 0.5]
    while 1.0 - edges[-1] > 2 * (1.0 - end):
        edges.append(1.0 - 0.5 * (1.0 - edges[-1]))
    edges.append(end)
    return np.array(edges)


def pi_p(p: float, nodes: int = 24) -> float:
    """2 * int_0^1 (1 - t^p)^(-1/p) dt by graded Gauss-Legendre.

    The integrable singularity at t = 1 is split off: on [1 - delta, 1]
    the two-term expansion 1 - t^p = p s (1 - (p - 1) s / 2 + ...),
    s = 1 - t, is integrated in closed form.
    """
    if not p > 1:
        raise ValueError("exponent out of range")
    delta = min(SINGULAR_DELTA, 1e-3 / p)
    x, w = _gauss_legendre(nodes)
    edges = _graded_panels(1.0 - delta)
    total = 0.0
    for a, c in zip(edges[:-1], edges[1:]):
        t = 0.5 * (c - a) * x + 0.5 * (c + a)
        total += 0.5 * (c - a) * np.dot(w, (1.0 - t**p) ** (-1.0 / p))
    k = 1.0 / p
    tail = p**-k * (delta ** (1 - k) / (1 - k) + (p - 1) / (2 * p) * delta ** (2 - k) / (2 - k))
    return 2.0 * (total + tail)


def lambda_n(params: EigenParams, n: int) -> float:
    if n < 1:
        raise ValueError("eigenvalue index starts at 1")
    p = params.p
    return (n / params.b) ** p * (p - 1) * pi_p(p) ** p


def lambda_1(p: float, b: float) -> float:
    return lambda_n(EigenParams(p, b), 1)


def _phi(z, e):
    return math.copysign(abs(z) ** e, z)


def _rk4_sinp(p, lam, t_end, m, substeps):
    """RK4 for w' = phi_{p'}(z), z' = -lam phi_p(w), w(0) = 0, z(0) = 1."""
    q = p / (p - 1)  # conjugate exponent
    h = t_end / (m * substeps)

    def rhs(w, z):
        return _phi(z, q - 1), -lam * _phi(w, p - 1)

    w = np.empty(m + 1)
    w[0] = 0.0
    wc, zc = 0.0, 1.0
    for i in range(m):
        for _ in range(substeps):
            k1w, k1z = rhs(wc, zc)
            k2w, k2z = rhs(wc + 0.5 * h * k1w, zc + 0.5 * h * k1z)
            k3w, k3z = rhs(wc + 0.5 * h * k2w, zc + 0.5 * h * k2z)
            k4w, k4z = rhs(wc + h * k3w, zc + h * k3z)
            wc += h * (k1w + 2 * k2w + 2 * k3w + k4w) / 6
            zc += h * (k1z + 2 * k2z + 2 * k3z + k4z) / 6
        if not (np.isfinite(wc) and np.isfinite(zc)) or abs(wc) > 1e100:
            raise ArithmeticError("eigenfunction integration failed")
        w[i + 1] = wc
    return w


def eigenfunction(params: EigenParams, n: int, direction, grid: Grid, substeps: int = 4) -> DiscreteFunction:
    """direction * sin_p-wave with n half-periods on [0, b], sup-norm 1.

    ``direction`` must be a unit vector in R^N.
    """
    d = np.atleast_1d(np.asarray(direction, dtype=float))
    if abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    if abs(grid.b - params.b) > 1e-12 * params.b:
        raise ValueError("grid length differs from the eigenproblem's b")
    lam = lambda_n(params, n)
    w = _rk4_sinp(params.p, lam, grid.b, grid.m, substeps)
    peak = np.abs(w).max()
    if not peak > 0:
        raise ArithmeticError("eigenfunction integration failed")
    return DiscreteFunction(grid, np.outer(w / peak, d))


def rayleigh(u: DiscreteFunction, p: float, du: DiscreteFunction | None = None) -> float:
    """||u'||_p^p / ||u||_p^p on the grid."""
    if du is None:
        du = differentiate(u)
    den = lp_norm(u, p) ** p
    if den == 0:
        raise ValueError("zero trial function")
    return lp_norm(du, p) ** p / den


def psi(u: DiscreteFunction, params: PsiParams, du: DiscreteFunction | None = None) -> float:
    """xi ||u'||_p^p - int theta |u|^p."""
    if du is None:
        du = differentiate(u)
    p = params.p
    weighted = _trapezoid(params.theta.values[:, 0] * u.magnitude() ** p, u.grid.h)
    return params.xi * lp_norm(du, p) ** p - float(weighted)


def check_theta(theta: DiscreteFunction, lambda1: float, xi: float, tol: float = 1e-12):
    """(ok, reason) for 0 <= theta <= lambda1 xi, strict on a whole subinterval."""
    th = theta.values[:, 0]
    cap = lambda1 * xi
    if np.any(th < -tol):
        return False, "theta negative somewhere"
    if np.any(th > cap + tol * max(1.0, abs(cap))):
        return False, "theta exceeds lambda1*xi"
    below = th < cap - STRICT_MARGIN
    if not np.any(below[1:] & below[:-1]):
        return False, "strict inequality set empty"
    return True, "ok"


def trial_battery(grid: Grid, p: float, dim: int, count: int, seed: int = 0):
    """Seed-deterministic trial paths vanishing at both ends.

    The sequence is prefix-stable: the first k trials do not depend on
    ``count``. It opens with the first few eigenfunctions, then mixes
    eigenfunction combinations and random piecewise-linear paths.
    """
    params = EigenParams(p, grid.b, dim)
    e1 = np.zeros(dim)
    e1[0] = 1.0
    n_eig = min(count, 4)
    eig = [eigenfunction(params, n, e1, grid) for n in range(1, 5)]
    for n in range(n_eig):
        yield eig[n]
    rng = np.random.default_rng(seed)
    t = grid.t
    for k in range(count - n_eig):
        if k % 2 == 0:
            coef = rng.standard_normal((4, dim)) / (1.0 + np.arange(4))[:, None] ** 2
            vals = sum(np.outer(eig[j].values[:, 0], coef[j]) for j in range(4))
        else:
            knots = int(rng.integers(2, 12))
            xs = np.concatenate([[0.0], np.sort(rng.uniform(0, grid.b, knots)), [grid.b]])
            ys = np.vstack([np.zeros(dim), rng.standard_normal((knots, dim)), np.zeros(dim)])
            vals = np.column_stack([np.interp(t, xs, ys[:, i]) for i in range(dim)])
        if not np.any(vals):
            vals = eig[0].values
        yield DiscreteFunction(grid, vals)


def estimate_c1(params: PsiParams, eigen: EigenParams, trials: int = 200, seed: int = 0) -> float:
    """Sampled min of psi(u) / ||u'||_p^p over a trial battery.

    Being a minimum over finitely many trials it over-estimates the true
    best constant of psi(u) >= c1 ||u'||_p^p.
    """
    grid = params.theta.grid
    ok, reason = check_theta(params.theta, lambda_n(eigen, 1), params.xi)
    if not ok:
        raise ValueError(f"psi coercivity violated numerically: {reason}")
    best = np.inf
    for u in trial_battery(grid, params.p, eigen.N, trials, seed):
        du = differentiate(u)
        scale = lp_norm(du, params.p)
        if scale == 0:
            continue
        u = u.with_values(u.values / scale)
        du = du.with_values(du.values / scale)
        best = min(best, psi(u, params, du))
    if not best > 0:
        raise ValueError("psi coercivity violated numerically")
    return float(best)
