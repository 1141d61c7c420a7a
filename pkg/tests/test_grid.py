import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from duffing.grid import (DiscreteFunction, Grid, cumulative_integral, differentiate, integrate, lp_norm,
                          norms)
from duffing.eigen import lambda_1


def fn(grid, f):
    return DiscreteFunction.from_callable(grid, f)


def test_grid_nodes():
    g = Grid(2.5, 10)
    assert g.t[0] == 0 and g.t[-1] == 2.5
    assert np.all(np.diff(g.t) > 0)
    assert np.allclose(np.diff(g.t), g.h, rtol=0, atol=1e-15)


@pytest.mark.parametrize("b,m", [(0, 10), (-1, 10), (1, 1)])
def test_grid_rejects_bad_input(b, m):
    with pytest.raises(ValueError):
        Grid(b, m)


def test_integrate_examples():
    g = Grid(1.0, 10)
    assert integrate(DiscreteFunction.zeros(g)) == 0
    assert integrate(fn(g, lambda t: t)) == 0.5
    assert abs(integrate(fn(Grid(1.0, 1000), lambda t: t**2)) - 1 / 3) < 1e-6


def test_nonfinite_rejected():
    with pytest.raises(ValueError, match="non-finite sample"):
        DiscreteFunction(Grid(1.0, 4), [0, 1, np.nan, 2, 3])


def test_cumulative_integral_examples():
    g = Grid(1.0, 16)
    H = cumulative_integral(DiscreteFunction.constant(g, 1.0))
    assert np.array_equal(H.values[:, 0], g.t)
    assert not np.any(cumulative_integral(DiscreteFunction.zeros(g, 2)).values)
    g = Grid(1.0, 1000)
    assert abs(cumulative_integral(fn(g, lambda t: 2 * t)).values[-1, 0] - 1) < 1e-6


def test_cumulative_end_equals_integral():
    g = Grid(1.7, 333)
    f = DiscreteFunction(g, np.random.default_rng(3).standard_normal((334, 3)))
    assert np.array_equal(cumulative_integral(f).values[-1], integrate(f))


def test_norm_examples():
    g = Grid(1.0, 1000)
    assert norms(DiscreteFunction.zeros(g), 2) == (0, 0, 0, 0)
    u = DiscreteFunction(g, np.column_stack([g.t, np.zeros_like(g.t)]))
    assert abs(norms(u, 2).Lp - 1 / np.sqrt(3)) < 1e-4
    s = fn(g, lambda t: np.sin(np.pi * t))
    assert abs(norms(s, 2).W1p - np.pi / np.sqrt(2)) < 1e-3
    n = norms(s, 2)
    assert n.C1 == pytest.approx(n.sup + np.abs(differentiate(s).values).max())


def test_norm_exponent_range():
    g = Grid(1.0, 8)
    with pytest.raises(ValueError, match="exponent out of range"):
        norms(DiscreteFunction.zeros(g), 1.0)
    with pytest.raises(ValueError, match="exponent out of range"):
        lp_norm(DiscreteFunction.zeros(g), 0.5)


def test_differentiate_examples():
    g = Grid(1.0, 100)
    assert np.allclose(differentiate(fn(g, lambda t: 3 * t)).values, 3, atol=1e-12)
    assert np.allclose(differentiate(DiscreteFunction.constant(g, 2.0)).values, 0, atol=1e-12)
    d = differentiate(fn(g, lambda t: t**2))
    assert abs(d.values[50, 0] - 1.0) < 1e-3
    # second order at the ends as well
    assert abs(d.values[0, 0]) < 1e-12 and abs(d.values[-1, 0] - 2) < 1e-12


def test_trapezoid_order_two():
    errs = [abs(integrate(fn(Grid(1.0, m), lambda t: t**2)) - 1 / 3) for m in (50, 100)]
    assert errs[0] / errs[1] >= 3.5


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 10_000))
def test_integrate_linear(alpha, beta, seed):
    g = Grid(1.3, 64)
    rng = np.random.default_rng(seed)
    f = DiscreteFunction(g, rng.standard_normal(65))
    h = DiscreteFunction(g, rng.standard_normal(65))
    lhs = integrate(DiscreteFunction(g, alpha * f.values + beta * h.values))
    rhs = alpha * integrate(f) + beta * integrate(h)
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(alpha) + abs(beta)) * 10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_discrete_poincare(seed):
    # smooth random sine series vanishing at both ends
    b = 2.0
    g = Grid(b, 1024)
    coef = np.random.default_rng(seed).standard_normal(6) / (1 + np.arange(6)) ** 2
    u = fn(g, lambda t: sum(c * np.sin((k + 1) * np.pi * t / b) for k, c in enumerate(coef)))
    n = norms(u, 2)
    assert n.W1p**2 >= lambda_1(2, b) * n.Lp**2 * (1 - 1e-2)
