"""One machine-readable verdict over every hypothesis the existence and relaxation results need.

All checks are sampled: a pass means "not falsified on the samples",
never a proof. Each detail string says what was sampled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigen import EigenParams, PsiParams, estimate_c1, lambda_1
from .multimap import GrowthWitness, check_growth, check_lipschitz
from .operators import check_coercivity, check_strong_monotonicity
from .relaxation import XI_HAT_TOL
from .solver import Problem, best_apriori_bound

DEFAULT_RADII = (10.0, 100.0, 1000.0, 10000.0)


@dataclass
class HypothesisReport:
    lambda1: float
    xi: float
    c1_estimate: float | None
    xi_hat_eta: float | None
    apriori: float | None
    checks: list = field(default_factory=list)
    theorem_applicability: dict = field(default_factory=dict)
    theorem_details: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def passed(self, name: str) -> bool:
        return all(c["pass"] for c in self.checks if c["name"] == name or c["name"].startswith(name + "["))

    def to_json(self) -> dict:
        def num(x):
            return None if x is None or not math.isfinite(x) else float(x)

        constants = {"lambda1": num(self.lambda1), "xi": num(self.xi), "c1_estimate": num(self.c1_estimate),
                     "xi_hat_eta": num(self.xi_hat_eta), "apriori": num(self.apriori)}
        constants.update({k: num(v) for k, v in sorted(self.extra.items())})
        return {
            "constants": constants,
            "checks": sorted(self.checks, key=lambda c: c["name"]),
            "theorems": dict(sorted(self.theorem_applicability.items())),
            "theorem_details": dict(sorted(self.theorem_details.items())),
        }


def xi_constant(c0: float, r_inf: float, lambda1: float, p: float) -> float:
    """c0 - ||r||_inf / lambda1^(1/p)."""
    return c0 - r_inf / lambda1 ** (1.0 / p)


def compile_report(prob: Problem, witness: GrowthWitness, eta: float = 1.0, sample_radii=DEFAULT_RADII,
                   trials: int = 200, seed: int = 0) -> HypothesisReport:
    op, p, b = prob.op, prob.p, prob.grid.b
    lam1 = lambda_1(p, b)
    r_inf = prob.r_inf
    xi = xi_constant(op.c0, r_inf, lam1, p)
    checks = []

    coer = check_coercivity(op, seed=seed)
    checks.append({"name": "operator_coercivity", "pass": coer["pass"],
                   "detail": f"sampled: min (a(y),y)/|y|^p = {coer['c0_estimate']:.6g} vs declared c0 = {op.c0:g}"})
    checks.append({"name": "r_bounded", "pass": bool(np.all(np.isfinite(prob.r.values))),
                   "detail": f"max |r| over grid nodes = {r_inf:.6g}"})
    checks.append({"name": "xi_positive", "pass": bool(xi > 0),
                   "detail": f"xi = {xi:.6g}" if xi > 0 else "xi nonpositive"})
    checks.extend(check_growth(prob.F, witness, xi, lam1, sample_radii, p))

    c1 = None
    try:
        c1 = estimate_c1(PsiParams(xi, witness.theta, p), EigenParams(p, b, prob.dim), trials, seed)
        checks.append({"name": "psi_coercivity", "pass": True,
                       "detail": f"sampled over {trials} trial paths: c1 estimate {c1:.6g}"})
    except ValueError as exc:
        checks.append({"name": "psi_coercivity", "pass": False, "detail": f"sampled: {exc}"})

    apriori = None
    if c1 is not None:
        apriori, eps = best_apriori_bound(prob, witness, c1)
        checks.append({"name": "apriori_bound", "pass": bool(math.isfinite(apriori)),
                       "detail": f"sampled envelope at eps = {eps:.6g}: ||u'||_p <= {apriori:.6g}, "
                                 "valid relative to the declared witness"})

    # strong monotonicity and Lipschitz constant of F at radius eta
    mono = check_strong_monotonicity(op, eta, seed=seed)
    c_hat = mono["c_hat_eta"]
    k_est = check_lipschitz(prob.F, eta, t_nodes=np.linspace(0.0, b, 9), seed=seed)["k_eta_estimate"]
    k_eta = witness.k_eta if witness.k_eta is not None else k_est
    strong = p == 2 and coer["c0_estimate"] > 0 and c_hat > 0
    checks.append({"name": "operator_strong_monotonicity", "pass": bool(strong),
                   "detail": f"sampled on |y|,|v| <= {eta:g}: c_hat = {c_hat:.6g}"
                             + ("" if p == 2 else "; needs p = 2")})
    lip_ok = witness.k_eta is None or k_est <= witness.k_eta * (1 + 1e-6) + 1e-9
    checks.append({"name": "multimap_lipschitz", "pass": bool(lip_ok),
                   "detail": f"sampled on |x|,|v| <= {eta:g}: Hausdorff Lipschitz estimate {k_est:.6g}"
                             + (f", declared {witness.k_eta:g}" if witness.k_eta is not None else "")})
    xi_hat = None
    if p == 2:
        xi_hat = c_hat - r_inf / math.sqrt(lam1) - k_eta * b * b
        checks.append({"name": "xi_hat_positive", "pass": bool(xi_hat > XI_HAT_TOL),
                       "detail": f"xi_hat = {xi_hat:.6g} with k_eta = {k_eta:.6g}"})

    common = ["operator_coercivity", "r_bounded", "theta_window", "growth_limsup", "a_eta_bound", "psi_coercivity"]
    failed = [n for n in common if not all(c["pass"] for c in checks
                                           if c["name"] == n or c["name"].startswith(n + "["))]
    flags, details = {}, {}
    if not xi > 0:
        for k in ("thm6", "thm7", "thm8"):
            flags[k], details[k] = False, "xi nonpositive"
    else:
        base = "failed: " + ", ".join(failed) if failed else "ok"
        flags["thm6"] = not failed and prob.F.convex
        details["thm6"] = base if failed else ("ok" if prob.F.convex else "multimap not convex-valued")
        # every supported kind is closed-valued
        flags["thm7"] = not failed
        details["thm7"] = base
        reasons = list(failed)
        if p != 2:
            reasons.append("p != 2")
        if not strong:
            reasons.append("operator_strong_monotonicity")
        if not lip_ok:
            reasons.append("multimap_lipschitz")
        if xi_hat is not None and not xi_hat > XI_HAT_TOL:
            reasons.append("xi_hat nonpositive")
        flags["thm8"] = not reasons
        details["thm8"] = "ok" if not reasons else "failed: " + ", ".join(reasons)
    return HypothesisReport(
        lambda1=lam1, xi=xi, c1_estimate=c1, xi_hat_eta=xi_hat, apriori=apriori, checks=checks,
        theorem_applicability=flags, theorem_details=details,
        extra={"r_inf": r_inf, "c0": op.c0, "p": p, "b": b, "eta": eta, "k_eta": k_eta, "c_hat_eta": c_hat},
    )
