import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from duffing import operators as ops


def families(dim):
    return {
        "p_laplacian_3": ops.p_laplacian(3.0, dim),
        "p_laplacian_1.5": ops.p_laplacian(1.5, dim),
        "pq_laplacian": ops.pq_laplacian(3.0, 1.5, dim),
        "curvature_3": ops.curvature(3.0, dim),
        "curvature_1.5": ops.curvature(1.5, dim),
        "exponential": ops.exponential(2.0, 2.0, -1.0, dim),
        "exponential_plus": ops.exponential(2.0, 2.0, 1.0, dim),
        "linear": ops.linear(2.5, dim),
        "piecewise": ops.piecewise_q(1.5, dim),
    }


def test_eval_examples():
    assert np.allclose(ops.p_laplacian(2.0, 2).eval([3.0, 4.0]), [3, 4])
    p3 = ops.p_laplacian(3.0, 2)
    assert np.allclose(p3.eval([1.0, 0.0]), [1, 0])
    assert np.allclose(p3.eval([2.0, 0.0]), [4, 0])
    assert np.allclose(ops.linear(2.0, 2).eval([1.0, -1.0]), [2, -2])
    assert np.array_equal(ops.p_laplacian(1.5, 2).eval([0.0, 0.0]), [0, 0])


def test_invert_examples():
    for op in families(2).values():
        assert np.array_equal(op.invert([0.0, 0.0]), [0, 0])
    assert np.allclose(ops.p_laplacian(3.0, 2).invert([4.0, 0.0]), [2, 0], atol=1e-12)


def test_exponential_identity():
    # p = 2, c = 2, offset = 1 reproduces 2 y exp(|y|^2) + y
    op = ops.exponential(2.0, 2.0, 1.0, 2)
    y = np.array([0.3, -0.4])
    assert np.allclose(op.eval(y), 2 * y * np.exp(y @ y) + y)


@pytest.mark.parametrize("name", list(families(3)))
def test_roundtrip(name):
    op = families(3)[name]
    rng = np.random.default_rng(11)
    d = rng.standard_normal((1000, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    radius = 2.0 if op.kind == "exponential" else 10.0  # exp(|y|^2) overflows beyond
    y = d * radius * rng.random((1000, 1))
    assert np.abs(op.invert(op.eval(y)) - y).max() < 1e-9
    z = op.eval(y)
    assert np.abs(op.eval(op.invert(z)) - z).max() <= 1e-9 * max(1.0, np.abs(z).max())


def test_inverse_out_of_bracket():
    op = ops.custom_radial(lambda s: np.arctan(s), c0=0.1, p=2.0)
    with pytest.raises(ArithmeticError, match="inverse out of bracket"):
        op.invert([3.0])


def test_coercivity_examples():
    assert ops.check_coercivity(ops.p_laplacian(2.0, 2))["c0_estimate"] == pytest.approx(1.0, abs=1e-14)
    assert ops.check_coercivity(ops.pq_laplacian(3.0, 2.0, 2))["c0_estimate"] >= 1.0
    bad = ops.Operator("linear", 1, 3.0, 2.0, {"c": 2.0}, profile=lambda s: 2.0 * s)
    res = ops.check_coercivity(bad)
    assert res["c0_estimate"] == pytest.approx(2.0) and not res["pass"]


def test_curvature_below_two_fails_coercivity():
    assert not ops.check_coercivity(ops.curvature(1.5, 1))["pass"]
    assert ops.check_coercivity(ops.curvature(3.0, 1))["pass"]


def test_strong_monotonicity_examples():
    assert ops.check_strong_monotonicity(ops.linear(2.5, 2), 3.0)["c_hat_eta"] == pytest.approx(2.5, abs=1e-12)
    assert ops.check_strong_monotonicity(ops.p_laplacian(2.0, 2), 1.0)["c_hat_eta"] == pytest.approx(1.0, abs=1e-12)
    est = ops.check_strong_monotonicity(ops.exponential(2.0, 2.0, 1.0, 2), 1.0)["c_hat_eta"]
    assert 3.0 - 1e-6 <= est < 3.1


def test_from_config():
    op = ops.from_config({"kind": "pq_laplacian", "params": {"q": 1.5}}, 2, 3.0)
    assert op.kind == "pq_laplacian" and op.dim == 2
    op = ops.from_config({"kind": "custom_radial", "params": {"expression": "s + s^3"}, "c0": 1.0}, 1, 2.0)
    assert np.allclose(op.invert(op.eval([1.7])), [1.7])
    with pytest.raises(ValueError):
        ops.from_config({"kind": "p_laplacian", "params": {"p": 3}}, 1, 2.0)
    with pytest.raises(ValueError):
        ops.from_config({"kind": "nope"}, 1, 2.0)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(families(2))), st.integers(0, 10_000))
def test_monotone_and_strict(name, seed):
    op = families(2)[name]
    rng = np.random.default_rng(seed)
    y, v = rng.uniform(-2, 2, (2, 200, 2))
    val = np.einsum("ij,ij->i", op.eval(y) - op.eval(v), y - v)
    assert np.all(val >= 0)
    far = np.linalg.norm(y - v, axis=1) > 1e-3
    assert np.all(val[far] > 1e-14)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(families(2))), st.floats(0, 2 * np.pi))
def test_radial_equivariance(name, angle):
    op = families(2)[name]
    Q = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    y = np.random.default_rng(0).uniform(-2, 2, (50, 2))
    lhs = op.eval(y @ Q.T)
    rhs = op.eval(y) @ Q.T
    assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(rhs).max())
