import numpy as np
import pytest

from duffing.expr import ExpressionError, compile_profile, compile_scalar, compile_time, compile_vector


def test_arithmetic_and_precedence():
    f = compile_time("1 + 2*3^2 - 4/2")
    assert f(0.0) == 17.0
    assert compile_time("-2^2")(0.0) == -4.0
    assert compile_time("2^3^2")(0.0) == 512.0
    assert compile_time("2**3")(0.0) == 8.0


def test_functions_and_constants():
    t = np.linspace(0, 1, 5)
    assert np.allclose(compile_time("sin(pi*t) + exp(0)")(t), np.sin(np.pi * t) + 1)
    assert np.allclose(compile_time("max(t, 0.5) - min(t, 0.5)")(t), np.abs(t - 0.5))
    assert compile_time("abs(-3) + sqrt(4) + log(e)")(0.0) == 6.0


def test_state_variables():
    f = compile_scalar("2*x1 - x2 + t", 2)
    x = np.array([[1.0, 3.0], [2.0, 0.0]])
    assert np.allclose(f(np.array([0.0, 1.0]), x), [-1.0, 5.0])
    g = compile_vector("2*x", 1)
    assert np.allclose(g(np.array([0.0]), np.array([[1.5]])), [[3.0]])
    h = compile_vector(["x2", "t"], 2)
    assert np.allclose(h(np.array([4.0]), np.array([[1.0, 2.0]])), [[2.0, 4.0]])


def test_profile_broadcast():
    assert compile_profile("2")(np.zeros(3)).shape == (3,)


@pytest.mark.parametrize("src", ["1 +", "foo(1)", "y + 1", "sin(1, 2)", "1 $ 2", "(1"])
def test_errors(src):
    with pytest.raises(ExpressionError):
        compile_scalar(src, 1)


def test_vector_arity():
    with pytest.raises(ExpressionError):
        compile_vector(["1", "2"], 1)
