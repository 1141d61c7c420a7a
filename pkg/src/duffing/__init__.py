"""Numerical toolkit for quasilinear Duffing-type differential inclusions.

    -a(u')' - r(t) |u'|^(p-2) u'  in  F(t, u),   u(0) = u(b) = 0,   u in R^N
"""
from .eigen import EigenParams, eigenfunction, estimate_c1, lambda_1, lambda_n, pi_p, psi, rayleigh
from .grid import DiscreteFunction, Grid, cumulative_integral, differentiate, integrate, norms
from .hypotheses import HypothesisReport, compile_report
from .multimap import (Centroid, Extreme, GrowthWitness, Multimap, Oscillating, Projection, hausdorff,
                       select)
from .operators import Operator, curvature, exponential, linear, p_laplacian, pq_laplacian
from .relaxation import RelaxConfig, relax_experiment, weak_convergence_diagnostic, xi_hat
from .solver import (ConvergenceError, Problem, SolveReport, apriori_bound, shooting_constant,
                     solve_auxiliary, solve_branch, solve_duffing)

__version__ = "0.1.0"
