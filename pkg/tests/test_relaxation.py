import numpy as np
import pytest

from duffing import operators as ops
from duffing.grid import DiscreteFunction, Grid
from duffing.multimap import Multimap, Oscillating, select
from duffing.relaxation import RelaxConfig, relax_experiment, weak_convergence_diagnostic, xi_hat
from duffing.solver import Problem

from oracles import square_wave_second_primitive


def two_point_problem(b=0.5, m=1024, r=0.0):
    g = Grid(b, m)
    F = Multimap.extreme_of(Multimap.interval(-1, 1))
    return Problem(ops.linear(1.0), DiscreteFunction.constant(g, r), F, 2.0, g)


def test_xi_hat_examples():
    g = Grid(1.0, 64)
    op = ops.linear(1.0)
    assert xi_hat(op, DiscreteFunction.zeros(g), 0.0, 1.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    r = DiscreteFunction.constant(g, 0.25 * np.pi)
    assert xi_hat(op, r, 0.0, 1.0, 1.0) == pytest.approx(0.75, abs=1e-12)
    assert xi_hat(op, DiscreteFunction.zeros(g), 1.0, 1.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        xi_hat(op, r, 0.0, 1.0, 0.0)


def test_refuses_when_xi_hat_zero():
    cfg = RelaxConfig(two_point_problem(b=1.0), [2, 3], k_eta=1.0)
    with pytest.raises(ValueError, match="xi_hat nonpositive"):
        relax_experiment(cfg)


def test_needs_p2_and_valid_levels():
    g = Grid(1.0, 32)
    prob = Problem(ops.p_laplacian(3.0), DiscreteFunction.zeros(g), Multimap.interval(-1, 1), 3.0, g)
    with pytest.raises(ValueError):
        RelaxConfig(prob, [1])
    for levels in ([], [3, 2], [-1]):
        with pytest.raises(ValueError):
            RelaxConfig(two_point_problem(m=32), levels)


def test_square_wave_distances_match_closed_form():
    b = 0.5
    for m in (1024, 4096):
        rows = relax_experiment(RelaxConfig(two_point_problem(b, m), [2, 3, 4, 5]))
        t = np.linspace(0, b, m + 1)
        for row in rows:
            v, w = square_wave_second_primitive(t, b, row["level"], m)
            exact = np.abs(v).max() + np.abs(w).max()
            # node values at block edges cost O(2^level h) relative to the continuous wave
            assert row["c1_distance"] == pytest.approx(exact, rel=2 ** (row["level"] + 2) / m)
            assert row["status"] == "ok"


def test_square_wave_distances_shrink():
    rows = relax_experiment(RelaxConfig(two_point_problem(), [2, 3, 4, 5, 6, 7, 8]))
    d = [r["c1_distance"] for r in rows]
    assert all(a > b for a, b in zip(d, d[1:]))
    assert d[-1] < 1e-2
    assert [r["eps_n"] for r in rows] == [1e-3 / 2**n for n in range(2, 9)]


def test_halving_interval_does_not_increase_distances():
    long = relax_experiment(RelaxConfig(two_point_problem(0.5), [2, 3, 4]))
    short = relax_experiment(RelaxConfig(two_point_problem(0.25), [2, 3, 4]))
    assert all(s["c1_distance"] <= l["c1_distance"] for s, l in zip(short, long))


def test_singleton_field_has_zero_distance():
    g = Grid(1.0, 256)
    F = Multimap.singleton(lambda t, x: np.sin(3 * t) + 0.1 * np.cos(x[..., 0]))
    prob = Problem(ops.linear(1.0), DiscreteFunction.zeros(g), F, 2.0, g)
    rows = relax_experiment(RelaxConfig(prob, [1, 2], k_eta=0.1))
    assert all(r["c1_distance"] <= 1e-9 for r in rows)


def test_weak_diagnostic():
    g = Grid(0.5, 1024)
    f = DiscreteFunction.zeros(g)
    assert weak_convergence_diagnostic([f], f) == 0
    F = Multimap.extreme_of(Multimap.interval(-1, 1))
    diag = {n: weak_convergence_diagnostic([select(F, f, Oscillating(n, target=f))], f) for n in (4, 8)}
    assert diag[4] >= 1.5 * diag[8]
    with pytest.raises(ValueError):
        weak_convergence_diagnostic([], f)
    with pytest.raises(ValueError):
        weak_convergence_diagnostic([DiscreteFunction.zeros(Grid(1.0, 8))], f)
