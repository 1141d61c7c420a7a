import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from duffing.eigen import (EigenParams, PsiParams, check_theta, eigenfunction, estimate_c1, lambda_1, lambda_n,
                           pi_p, psi, rayleigh, trial_battery)
from duffing.grid import DiscreteFunction, Grid, differentiate

from oracles import lambda_closed, pi_p_closed, pi_p_quad


def test_pi_p_examples():
    assert abs(pi_p(2) - np.pi) < 1e-8
    assert abs(pi_p(3) - 4 * np.pi / (3 * np.sqrt(3))) < 1e-6
    assert pi_p(1.5) > pi_p(2) > pi_p(4)


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0, 3.0, 4.0, 7.5])
def test_pi_p_against_two_oracles(p):
    assert pi_p(p) == pytest.approx(pi_p_closed(p), rel=1e-8)
    assert pi_p(p) == pytest.approx(pi_p_quad(p), rel=1e-8)


def test_pi_p_node_refinement():
    for p in (1.5, 3.0):
        assert abs(pi_p(p, nodes=24) - pi_p(p, nodes=48)) < 1e-7


def test_exponent_out_of_range():
    for p in (1.0, 0.5):
        with pytest.raises(ValueError, match="exponent out of range"):
            pi_p(p)
        with pytest.raises(ValueError, match="exponent out of range"):
            EigenParams(p, 1.0)


def test_lambda_examples():
    assert abs(lambda_n(EigenParams(2, np.pi), 1) - 1) < 1e-8
    assert abs(lambda_n(EigenParams(2, 1.0), 2) - 4 * np.pi**2) < 1e-6
    for p in (1.5, 3.0):
        # exact up to rounding of the power
        assert lambda_n(EigenParams(p, 2.0), 3) == pytest.approx(lambda_n(EigenParams(p, 1.0), 3) / 2**p, rel=1e-14)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_lambda_sequence(p):
    params = EigenParams(p, 1.3)
    lams = [lambda_n(params, n) for n in range(1, 7)]
    assert np.all(np.diff(lams) > 0)
    for n, lam in enumerate(lams, 1):
        assert lam / lams[0] == pytest.approx(n**p, rel=1e-14)
        assert lam == pytest.approx(lambda_closed(p, 1.3, n), rel=1e-7)
    with pytest.raises(ValueError):
        lambda_n(params, 0)


def test_eigenfunction_classical():
    g = Grid(1.0, 512)
    d = np.array([0.6, 0.8])
    e = eigenfunction(EigenParams(2, 1.0, 2), 1, d, g)
    assert np.abs(e.values - np.outer(np.sin(np.pi * g.t), d)).max() < 1e-4


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_eigenfunction_boundary_and_sign_changes(p):
    g = Grid(1.0, 512)
    for n in (1, 2, 3):
        w = eigenfunction(EigenParams(p, 1.0), n, [1.0], g).values[:, 0]
        assert abs(w[0]) < 1e-6 and abs(w[-1]) < 1e-6
        interior = w[2:-2]
        changes = np.count_nonzero(np.diff(np.sign(interior[np.abs(interior) > 1e-9])))
        assert changes == n - 1


def test_eigenfunction_discrete_relation_p2():
    g = Grid(1.0, 1024)
    lam = lambda_1(2, 1.0)
    e = eigenfunction(EigenParams(2, 1.0), 1, [1.0], g)
    res = -differentiate(differentiate(e)).values - lam * e.values
    assert np.abs(res[2:-2]).max() < 1e-3 * lam


def test_eigenfunction_rejects_bad_direction():
    with pytest.raises(ValueError):
        eigenfunction(EigenParams(2, 1.0, 2), 1, [1.0, 1.0], Grid(1.0, 16))


def test_rayleigh_examples():
    g = Grid(1.0, 2048)
    for p in (1.5, 2.0, 3.0):
        e = eigenfunction(EigenParams(p, 1.0), 1, [1.0], g)
        assert rayleigh(e, p) == pytest.approx(lambda_1(p, 1.0), rel=1e-2)
    u = DiscreteFunction(g, g.t * (1 - g.t))
    assert abs(rayleigh(u, 2) - 10) < 1e-3
    with pytest.raises(ValueError, match="zero trial function"):
        rayleigh(DiscreteFunction.zeros(g), 2)


def test_psi_examples():
    g = Grid(1.0, 256)
    th0 = DiscreteFunction.zeros(g)
    assert psi(DiscreteFunction.zeros(g), PsiParams(1.0, th0, 2)) == 0
    u = DiscreteFunction(g, np.sin(np.pi * g.t))
    du = differentiate(u)
    assert psi(u, PsiParams(0.7, th0, 2)) == pytest.approx(0.7 * np.trapezoid(du.values[:, 0] ** 2, g.t), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 10), st.sampled_from([1.5, 2.0, 3.0]))
def test_psi_homogeneous(alpha, p):
    g = Grid(1.0, 256)
    theta = DiscreteFunction(g, 0.5 * lambda_1(p, 1.0) * (1 + np.sin(g.t)) / 2)
    params = PsiParams(1.0, theta, p)
    u = DiscreteFunction(g, np.sin(np.pi * g.t) + 0.3 * np.sin(3 * np.pi * g.t))
    assert psi(u.with_values(alpha * u.values), params) == pytest.approx(alpha**p * psi(u, params), rel=1e-9)


def test_psi_battery_nonnegative():
    b, p = np.pi, 2.0
    g = Grid(b, 1024)
    lam1 = lambda_1(p, b)
    theta = DiscreteFunction(g, lam1 * (0.5 + 0.49 * np.sin(g.t) ** 2))
    params = PsiParams(1.0, theta, p)
    worst = min(psi(u, params) for u in trial_battery(g, p, 1, 1000, seed=1))
    assert worst >= -1e-9


def test_check_theta_reasons():
    g = Grid(1.0, 64)
    cap = 2.0
    assert check_theta(DiscreteFunction.constant(g, 1.0), 1.0, cap)[0]
    assert check_theta(DiscreteFunction.constant(g, 2.0), 1.0, cap) == (False, "strict inequality set empty")
    assert not check_theta(DiscreteFunction.constant(g, -0.1), 1.0, cap)[0]
    assert not check_theta(DiscreteFunction.constant(g, 2.5), 1.0, cap)[0]


def test_c1_examples():
    b, p = np.pi, 2.0
    g = Grid(b, 1024)
    eig = EigenParams(p, b)
    assert estimate_c1(PsiParams(0.8, DiscreteFunction.zeros(g), p), eig) == pytest.approx(0.8, abs=1e-9)
    half = DiscreteFunction.constant(g, lambda_1(p, b) / 2)
    assert abs(estimate_c1(PsiParams(1.0, half, p), eig) - 0.5) < 1e-2
    ests = [estimate_c1(PsiParams(1.0, half, p), eig, trials=k) for k in (5, 20, 80)]
    assert ests[0] >= ests[1] >= ests[2]


def test_c1_rejects_bad_theta():
    g = Grid(1.0, 64)
    full = DiscreteFunction.constant(g, lambda_1(2, 1.0))
    with pytest.raises(ValueError, match="violated numerically"):
        estimate_c1(PsiParams(1.0, full, 2), EigenParams(2, 1.0))


def test_trial_battery_prefix_stable():
    g = Grid(1.0, 128)
    a = [u.values for u in trial_battery(g, 2.0, 2, 10, seed=4)]
    b = [u.values for u in trial_battery(g, 2.0, 2, 20, seed=4)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert all(abs(u[0]).max() == 0 and abs(u[-1]).max() < 1e-6 for u in b)
