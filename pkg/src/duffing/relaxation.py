"""Nonconvex trajectories approximating a convexified solution in C^1.

The experiment solves the inclusion with F replaced by its convex hull,
then for each oscillation level n builds an extreme-point selection f_n
whose period averages reproduce the convex selection f, and solves the
nonconvex problem with a projection selection anchored at f_n. The C^1
distance between the two trajectories should shrink as n grows.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .eigen import lambda_1
from .grid import DiscreteFunction, _trapezoid, c1_norm
from .multimap import Oscillating, Projection, Strategy, select, selection_distance
from .operators import Operator, check_strong_monotonicity
from .solver import ConvergenceError, Problem, ShootingError, solve_duffing

log = logging.getLogger(__name__)

# xi_hat within rounding of zero counts as zero
XI_HAT_TOL = 1e-9


def xi_hat(op: Operator, r: DiscreteFunction, k_eta_sup: float, b: float, eta: float,
           samples: int = 4000, seed: int = 0) -> float:
    """c_hat_eta - ||r||_inf / sqrt(lambda1) - k_eta * b^2 (p = 2)."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    c_hat = check_strong_monotonicity(op, eta, samples, seed)["c_hat_eta"]
    r_inf = float(np.abs(r.values).max())
    return c_hat - r_inf / np.sqrt(lambda_1(2.0, b)) - k_eta_sup * b * b


@dataclass
class RelaxConfig:
    prob: Problem
    levels: list
    eps0: float = 1e-3
    eta: float = 1.0
    k_eta: float = 0.0
    target: float = 1e-2
    convex_strategy: Strategy = field(default_factory=Projection)
    tol: float = 1e-10
    damping: float = 0.5
    max_iter: int = 500
    probes: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.prob.p != 2:
            raise ValueError("relaxation experiment needs p = 2")
        self.levels = [int(n) for n in self.levels]
        if not self.levels or any(n < 0 for n in self.levels) or np.any(np.diff(self.levels) <= 0):
            raise ValueError("levels must be increasing non-negative integers")
        if not self.eps0 > 0:
            raise ValueError("eps0 must be positive")

    def admissibility(self) -> float:
        return xi_hat(self.prob.op, self.prob.r, self.k_eta, self.prob.grid.b, self.eta, seed=self.seed)


def weak_convergence_diagnostic(f_seq, f: DiscreteFunction, probes: int = 5) -> float:
    """max_{j <= probes, k} |int (f_n - f, sin(j pi t / b) e_k) dt| for the last f_n."""
    if not f_seq:
        raise ValueError("empty sequence")
    fn = f_seq[-1]
    if fn.grid != f.grid:
        raise ValueError("sequence and target on different grids")
    t, b = f.grid.t, f.grid.b
    diff = fn.values - f.values
    out = 0.0
    for j in range(1, probes + 1):
        w = np.sin(j * np.pi * t / b)[:, None]
        out = max(out, float(np.abs(_trapezoid(diff * w, f.grid.h)).max()))
    return out


def _c1_distance(a, b):
    return c1_norm(a.u.with_values(a.u.values - b.u.values), a.du.with_values(a.du.values - b.du.values))


def relax_experiment(cfg: RelaxConfig) -> list:
    """Rows ``{level, c1_distance, residual_sup, weak_diag, eps_n, status}`` ordered by level.

    Refuses to run (ValueError) when the admissibility constant is not
    positive. Per-level solver failures are recorded in ``status`` and the
    remaining levels still run.
    """
    xh = cfg.admissibility()
    if not xh > XI_HAT_TOL:
        raise ValueError(f"xi_hat nonpositive ({xh:.6g}); relaxation hypotheses fail")
    prob = cfg.prob
    convex = replace(prob, F=prob.F.hull())
    base = solve_duffing(convex, cfg.convex_strategy, cfg.damping, cfg.tol, cfg.max_iter)
    rows = []
    for level in cfg.levels:
        eps_n = cfg.eps0 / 2.0 ** level
        fn = select(prob.F, base.u, Oscillating(level, target=base.f))
        row = {"level": level, "eps_n": eps_n,
               "weak_diag": weak_convergence_diagnostic([fn], base.f, cfg.probes)}
        try:
            rep = solve_duffing(prob, Projection(anchor=fn), cfg.damping, cfg.tol, cfg.max_iter, u0=base)
        except (ConvergenceError, ShootingError) as exc:
            log.warning("level %d: %s", level, exc)
            rep = getattr(exc, "report", None)
            row.update(c1_distance=float("nan") if rep is None else _c1_distance(rep, base),
                       residual_sup=float("nan") if rep is None else rep.residual_sup,
                       status="diverged")
            rows.append(row)
            continue
        # the projection of f_n is an eps_n-approximate nearest selection
        dist_fn = selection_distance(prob.F, rep.u, fn)
        slack = float((np.linalg.norm(rep.f.values - fn.values, axis=1) - dist_fn).max())
        row.update(c1_distance=_c1_distance(rep, base), residual_sup=rep.residual_sup,
                   status="ok" if slack < eps_n else "selection outside approximate set")
        rows.append(row)
    return rows
