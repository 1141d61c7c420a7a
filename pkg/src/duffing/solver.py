"""Dirichlet solves for -a(u')' - r |u'|^(p-2) u' in F(t, u).

The building block is the solution map ``K``: for data h it returns the
unique u with -a(u')' = h, u(0) = u(b) = 0, written as

    a(u'(t)) = c - int_0^t h(s) ds,   u(t) = int_0^t u'(s) ds,

with the constant c fixed by the monotone scalar/vector equation
int_0^b a^{-1}(c - H(t)) dt = 0. The inclusion is then solved by a
damped fixed-point iteration u <- K(f(u) + r |u'|^(p-2) u').
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .eigen import lambda_1
from .grid import DiscreteFunction, Grid, _cumtrapz, _trapezoid, c1_norm, differentiate, lp_norm
from .multimap import Centroid, GrowthWitness, Multimap, Projection, Strategy, select, selection_distance, \
    support_along_rays, _state_directions
from .operators import Operator

log = logging.getLogger(__name__)

SHOOT_TOL = 1e-10


class ShootingError(ArithmeticError):
    pass


class ConvergenceError(ArithmeticError):
    """Raised when the fixed-point iteration stalls; carries the last iterate."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Problem:
    op: Operator
    r: DiscreteFunction
    F: Multimap
    p: float
    grid: Grid

    def __post_init__(self):
        if self.op.p != self.p:
            raise ValueError("operator exponent differs from problem p")
        if self.op.dim != self.F.dim:
            raise ValueError("operator and multimap dimensions differ")
        if self.r.grid != self.grid or self.r.dim != 1:
            raise ValueError("r must be a scalar path on the problem grid")

    @property
    def dim(self) -> int:
        return self.F.dim

    @property
    def r_inf(self) -> float:
        return float(np.abs(self.r.values).max())


@dataclass
class SolveReport:
    u: DiscreteFunction
    du: DiscreteFunction
    f: DiscreteFunction
    residual_sup: float
    iterations: int
    c: np.ndarray
    converged: bool = True
    lam: float = 1.0
    apriori_bound: float | None = None
    within_bound: bool | None = None
    selection_gap: float = 0.0
    history: list = field(default_factory=list)

    @property
    def c1_norm(self) -> float:
        return c1_norm(self.u, self.du)

    def w1p_norm(self, p: float) -> float:
        return lp_norm(self.du, p)

    def boundary_error(self) -> float:
        return float(max(np.linalg.norm(self.u.values[0]), np.linalg.norm(self.u.values[-1])))


# shooting ----------------------------------------------------------------------------


def _phi_residual(op, H, h_step, c):
    """Phi(c) = trapezoid integral of a^{-1}(c + H(t))."""
    return _trapezoid(op.invert(c + H), h_step)


def _shoot_scalar(op, H, h_step, b, max_steps):
    Hs = H[:, 0]
    lo, hi = -Hs.max(), -Hs.min()
    if lo == hi:
        return np.array([lo])
    # a^{-1} is increasing, so Phi(-max H) <= 0 <= Phi(-min H)
    flo = _phi_residual(op, H, h_step, np.array([lo]))[0]
    fhi = _phi_residual(op, H, h_step, np.array([hi]))[0]
    if flo > 0 or fhi < 0:
        # bracket from monotonicity failed (rounding); widen by doubling
        width = max(hi - lo, 1.0)
        for _ in range(200):
            lo, hi = lo - width, hi + width
            width *= 2
            flo = _phi_residual(op, H, h_step, np.array([lo]))[0]
            fhi = _phi_residual(op, H, h_step, np.array([hi]))[0]
            if flo <= 0 <= fhi:
                break
        else:
            raise ShootingError("shooting solve diverged")
    if flo == 0:
        return np.array([lo])
    if fhi == 0:
        return np.array([hi])
    # Illinois-modified regula falsi; keeps a sign-checked bracket
    side = 0
    c, fc = lo, flo
    for _ in range(max_steps):
        c = (lo * fhi - hi * flo) / (fhi - flo)
        if not lo < c < hi:
            c = 0.5 * (lo + hi)
        fc = _phi_residual(op, H, h_step, np.array([c]))[0]
        if fc == 0 or abs(fc) <= SHOOT_TOL * 1e-3 or hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(c)):
            break
        if fc < 0:
            lo, flo = c, fc
            if side == -1:
                fhi *= 0.5
            side = -1
        else:
            hi, fhi = c, fc
            if side == 1:
                flo *= 0.5
            side = 1
    if abs(fc) > SHOOT_TOL * max(1.0, b):
        raise ShootingError("shooting solve diverged")
    return np.array([c])


def _shoot_vector(op, H, h_step, b, max_steps):
    n = H.shape[1]
    c = -H.mean(axis=0)
    F = _phi_residual(op, H, h_step, c)
    for _ in range(max_steps):
        res = np.abs(F).max()
        if res <= SHOOT_TOL * 1e-3:
            break
        # finite-difference Jacobian of the monotone map Phi
        J = np.empty((n, n))
        for j in range(n):
            step = 1e-7 * max(1.0, abs(c[j]))
            e = np.zeros(n)
            e[j] = step
            J[:, j] = (_phi_residual(op, H, h_step, c + e) - F) / step
        try:
            delta = -np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            delta = -F
        t = 1.0
        for _ in range(60):
            trial = c + t * delta
            Ft = _phi_residual(op, H, h_step, trial)
            if np.abs(Ft).max() < res:
                break
            t *= 0.5
        else:
            break
        c, F = trial, Ft
    if np.abs(F).max() > SHOOT_TOL * max(1.0, b):
        raise ShootingError("shooting solve diverged")
    return c


def shooting_constant(op: Operator, h: DiscreteFunction, max_steps: int = 200) -> np.ndarray:
    """c in R^N with int_0^b a^{-1}(c - int_0^t h) dt = 0 (trapezoid)."""
    H = -_cumtrapz(h.values, h.grid.h)
    if not np.any(H):
        return np.zeros(h.dim)
    if h.dim == 1:
        return _shoot_scalar(op, H, h.grid.h, h.grid.b, max_steps)
    return _shoot_vector(op, H, h.grid.h, h.grid.b, max_steps)


def solve_auxiliary(op: Operator, h: DiscreteFunction):
    """K(h): the solution of -a(u')' = h, u(0) = u(b) = 0.

    Returns ``(u, du, c)`` where ``c = a(u'(0))``.
    """
    H = -_cumtrapz(h.values, h.grid.h)
    c = shooting_constant(op, h)
    du = op.invert(c + H)
    u = _cumtrapz(du, h.grid.h)
    return DiscreteFunction(h.grid, u), DiscreteFunction(h.grid, du), c


def integrated_residual(op: Operator, du: np.ndarray, h: np.ndarray, step: float, lam: float = 1.0) -> float:
    """sup_i |a(u'(t_i)/lam) - a(u'(0)/lam) + int_0^{t_i} h|, the integrated form of -a(u'/lam)' = h."""
    A = op.eval(du / lam)
    return float(np.abs(A - A[0] + _cumtrapz(h, step)).max())


def differential_residual(op: Operator, du: DiscreteFunction, h: DiscreteFunction) -> float:
    """sup |-(a(u'))' - h| with a(u') differenced on the grid; meaningful for smooth h only."""
    A = DiscreteFunction(du.grid, op.eval(du.values))
    return float(np.abs(-differentiate(A).values - h.values).max())


# fixed point ------------------------------------------------------------------------


def damping_term(prob: Problem, du: np.ndarray) -> np.ndarray:
    """r(t) |u'|^(p-2) u'."""
    s = np.linalg.norm(du, axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(s > 0, np.power(np.where(s > 0, s, 1.0), prob.p - 2.0), 0.0)
    return prob.r.values * scale * du


def _c1_dist(u1, du1, u2, du2):
    return float(np.linalg.norm(u1 - u2, axis=1).max() + np.linalg.norm(du1 - du2, axis=1).max())


def _fixed_point(prob, strategy, damping, tol, max_iter, lam, u0, du0, f0):
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid, n = prob.grid, prob.dim
    u = np.zeros((grid.m + 1, n)) if u0 is None else np.array(u0.values)
    du = np.zeros((grid.m + 1, n)) if du0 is None else np.array(du0.values)
    f = f0
    history = []
    converged = False
    c = np.zeros(n)
    it = 0
    for it in range(1, max_iter + 1):
        f = select(prob.F, DiscreteFunction(grid, u), strategy, prev=f)
        h = DiscreteFunction(grid, f.values + damping_term(prob, du))
        ku, kdu, c = solve_auxiliary(prob.op, h)
        u_new = (1 - damping) * u + damping * lam * ku.values
        du_new = (1 - damping) * du + damping * lam * kdu.values
        step = _c1_dist(u_new, du_new, u, du)
        history.append(step)
        u, du = u_new, du_new
        if step < tol:
            converged = True
            break
    U, DU = DiscreteFunction(grid, u), DiscreteFunction(grid, du)
    f = select(prob.F, U, strategy, prev=f)
    h = f.values + damping_term(prob, du)
    report = SolveReport(
        u=U, du=DU, f=f,
        residual_sup=integrated_residual(prob.op, du, h, grid.h, lam),
        iterations=it, c=prob.op.eval(du[0] / lam), converged=converged, lam=lam,
        selection_gap=float(selection_distance(prob.F, U, f).max()),
        history=history,
    )
    return report


def default_strategy(F: Multimap) -> Strategy:
    return Projection()


def solve_duffing(prob: Problem, strategy: Strategy | None = None, damping: float = 0.5, tol: float = 1e-10,
                  max_iter: int = 500, u0: SolveReport | None = None, bound: float | None = None) -> SolveReport:
    """Solve the inclusion by the damped iteration u <- (1-w) u + w K(f(u) + r |u'|^(p-2) u').

    ``u0`` warm-starts from a previous report. Raises
    :class:`ConvergenceError` (with the last iterate attached) when
    ``max_iter`` is exhausted; existence of a solution does not imply
    this iteration converges.
    """
    strategy = strategy or default_strategy(prob.F)
    start = (u0.u, u0.du, u0.f) if u0 is not None else (None, None, None)
    rep = _fixed_point(prob, strategy, damping, tol, max_iter, 1.0, *start)
    if bound is not None:
        rep.apriori_bound = bound
        rep.within_bound = rep.w1p_norm(prob.p) <= bound
    if not rep.converged:
        raise ConvergenceError("fixed point did not converge", rep)
    return rep


def solve_branch(prob: Problem, lambdas, strategy: Strategy | None = None, tol: float = 1e-10,
                 damping: float = 0.5, max_iter: int = 500, bound: float | None = None) -> list:
    """Solve u = lam K(N(u)) along increasing lam in (0, 1], warm-starting each point."""
    lambdas = [float(x) for x in lambdas]
    if not lambdas or any(not 0 < x <= 1 for x in lambdas) or np.any(np.diff(lambdas) <= 0):
        raise ValueError("lambdas must increase within (0, 1]")
    strategy = strategy or default_strategy(prob.F)
    out = []
    prev = None
    for lam in lambdas:
        start = (prev.u, prev.du, prev.f) if prev is not None else (None, None, None)
        rep = _fixed_point(prob, strategy, damping, tol, max_iter, lam, *start)
        if bound is not None:
            rep.apriori_bound = bound
            rep.within_bound = rep.w1p_norm(prob.p) <= bound
        if not rep.converged:
            raise ConvergenceError(f"fixed point did not converge at lambda={lam:g}", rep)
        out.append(rep)
        prev = rep
    return out


# a priori bound ------------------------------------------------------------------------


def bound_from_norm(a_eps_l1: float, c1: float, eps: float, lambda1: float, p: float) -> float:
    """(||a_eps||_1 / (c1 - eps / lambda1))^(1/p)."""
    if not 0 < eps < lambda1 * c1:
        raise ValueError("epsilon outside the window (0, lambda1*c1)")
    return (a_eps_l1 / (c1 - eps / lambda1)) ** (1.0 / p)


def epsilon_envelope(prob: Problem, theta: DiscreteFunction, eps_values, radius: float = 1e4,
                     n_radii: int = 400) -> np.ndarray:
    """Sampled smallest a_eps(t) >= 0 with (h, x) <= a_eps(t) + (theta(t) + eps)|x|^p.

    Returns an array of shape (len(eps_values), m + 1): for every node the
    maximum over sampled x (rays of length up to ``radius``) and h in
    F(t, x) of (h, x) - (theta + eps)|x|^p, floored at zero.
    """
    t = prob.grid.t
    radii = np.concatenate([[0.0], np.geomspace(1e-4, radius, n_radii)])
    dirs = _state_directions(prob.dim)
    sup = support_along_rays(prob.F, t, radii, dirs)
    th = theta.values[:, 0][:, None]
    rows = np.arange(t.size)
    out = []
    for eps in np.atleast_1d(eps_values):
        g = sup - ((th + eps) * radii[None, :] ** prob.p)[:, :, None]
        flat = g.reshape(t.size, -1).argmax(axis=1)
        k, j = np.unravel_index(flat, g.shape[1:])
        coarse = g[rows, k, j]
        # refine the best ray between the neighbouring sampled radii
        lo = radii[np.maximum(k - 1, 0)]
        hi = radii[np.minimum(k + 1, radii.size - 1)]
        R = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, 65)[None, :]
        x = R[:, :, None] * dirs[j][:, None, :]
        T = np.broadcast_to(t[:, None], R.shape)
        h = prob.F.value(T, x).support(x)
        fine = np.einsum("...n,...n->...", h, x) - (th + eps) * R ** prob.p
        out.append(np.maximum(np.maximum(coarse, fine.max(axis=1)), 0.0))
    return np.array(out)


def apriori_bound(prob: Problem, eps: float, witness: GrowthWitness, c1: float, radius: float = 1e4) -> float:
    """Bound on ||u'||_p for every solution of u = lam K N(u), 0 < lam <= 1.

    Valid relative to the declared witness theta and to the sampled
    envelope a_eps (see :func:`epsilon_envelope`).
    """
    lam1 = lambda_1(prob.p, prob.grid.b)
    if not 0 < eps < lam1 * c1:
        raise ValueError("epsilon outside the window (0, lambda1*c1)")
    a_eps = epsilon_envelope(prob, witness.theta, [eps], radius)[0]
    return bound_from_norm(float(_trapezoid(a_eps, prob.grid.h)), c1, eps, lam1, prob.p)


def best_apriori_bound(prob: Problem, witness: GrowthWitness, c1: float, radius: float = 1e4,
                       fractions=np.linspace(0.05, 0.95, 19)):
    """Minimise the bound over eps = fraction * lambda1 * c1; returns (bound, eps)."""
    lam1 = lambda_1(prob.p, prob.grid.b)
    eps_values = np.asarray(fractions) * lam1 * c1
    env = epsilon_envelope(prob, witness.theta, eps_values, radius)
    best = (np.inf, None)
    for eps, a in zip(eps_values, env):
        b = bound_from_norm(float(_trapezoid(a, prob.grid.h)), c1, float(eps), lam1, prob.p)
        if b < best[0]:
            best = (b, float(eps))
    return best
