import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcs_reduce.jets import (
    Jet2,
    JetError,
    JetOrderError,
    const,
    eval_jet,
    fd_oracle,
    jet_arith,
    var,
    variables,
)
from lcs_reduce.jets import cos as jcos
from lcs_reduce.jets import exp as jexp
from lcs_reduce.jets import sin as jsin


def test_product_rule_xy():
    x, y = variables([1.0, 2.0])
    j = x * y
    assert j.value == 2.0
    assert np.allclose(j.grad, [2.0, 1.0])
    assert j.hess[0, 1] == 1.0 and j.hess[1, 0] == 1.0
    assert j.hess[0, 0] == 0.0 and j.hess[1, 1] == 0.0


def test_exp_of_constant_zero():
    j = jet_arith("exp", const(0.0, 3))
    assert j.value == 1.0
    assert not j.grad.any() and not j.hess.any()


def test_sin_of_square_matches_fd_oracle():
    f = lambda c: jsin(c[0] * c[0])
    jet = eval_jet(f, [0.7])
    grad, hess = fd_oracle(f, [0.7], 1e-4)
    assert abs(jet.grad[0] - grad[0]) < 1e-6
    assert abs(jet.hess[0, 0] - hess[0, 0]) < 1e-6


def test_fd_oracle_bilinear_exact():
    grad, hess = fd_oracle(lambda c: c[0] * c[1], [1.0, 2.0], 1e-4)
    assert np.max(np.abs(grad - [2.0, 1.0])) < 1e-7
    assert abs(hess[0, 1] - 1.0) < 1e-6


def test_fd_oracle_constant():
    grad, hess = fd_oracle(lambda c: 5.0, [0.3, -0.2], 1e-4)
    assert not grad.any() and not hess.any()


def test_fd_oracle_rejects_bad_step():
    with pytest.raises(ValueError):
        fd_oracle(lambda c: c[0], [0.0], 0.0)


def test_fd_oracle_reports_domain_exit():
    def f(c):
        if c[0] < 0.0:
            return float("nan")
        return math.sqrt(c[0])

    with pytest.raises(ValueError):
        fd_oracle(f, [1e-6], 1e-4)


def test_dimension_mixing_rejected():
    with pytest.raises(JetError):
        var(1.0, 0, 2) + var(1.0, 0, 3)


def test_inverse_at_zero_rejected():
    with pytest.raises(JetError):
        jet_arith("inv", const(0.0, 1))


def test_unknown_op_rejected():
    with pytest.raises(JetError):
        jet_arith("arcsinh", const(0.0, 1))


def test_quotient_and_power():
    x, = variables([2.0])
    j = (1.0 / x) + x**3
    # d/dx (1/x + x^3) = -1/x^2 + 3x^2; second: 2/x^3 + 6x
    assert abs(j.grad[0] - (-0.25 + 12.0)) < 1e-12
    assert abs(j.hess[0, 0] - (0.25 + 12.0)) < 1e-12


def test_power_at_zero():
    x, = variables([0.0])
    j = x**2
    assert j.value == 0.0 and j.grad[0] == 0.0 and j.hess[0, 0] == 2.0
    with pytest.raises(JetError):
        x**0.5


def test_partial_lowers_order():
    x, y = variables([0.4, -0.2])
    j = jsin(x) * y
    dx = j.partial(0)
    assert dx.order == 1
    assert abs(dx.value - math.cos(0.4) * -0.2) < 1e-15
    assert abs(dx.grad[1] - math.cos(0.4)) < 1e-15
    with pytest.raises(JetOrderError):
        _ = dx.hess
    ddx = dx.partial(0)
    assert ddx.order == 0
    with pytest.raises(JetOrderError):
        _ = ddx.grad
    with pytest.raises(JetOrderError):
        ddx.partial(0)


def test_non_finite_rejected():
    with pytest.raises(JetError):
        Jet2(float("inf"), np.zeros(1), np.zeros((1, 1)))


_OPS = ["add", "mul", "sin", "cos", "exp", "inv", "neg"]


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.sampled_from(_OPS), min_size=1, max_size=10),
    st.lists(st.floats(min_value=-1.5, max_value=1.5), min_size=3, max_size=3),
)
def test_hessian_symmetric_through_chains(ops, point):
    """Composition chains of depth <= 10 keep the Hessian exactly symmetric."""
    coords = variables(point)
    acc = coords[0] + 0.3 * coords[1]
    other = jcos(coords[2]) + coords[0] * coords[1]
    for op in ops:
        if op == "add":
            acc = acc + other
        elif op == "mul":
            acc = acc * other
        elif op == "inv":
            acc = (acc * acc + 1.0).inv()
        elif op == "neg":
            acc = -acc
        else:
            acc = jet_arith(op, acc * 0.3)
    assert np.max(np.abs(acc.hess - acc.hess.T)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(min_value=-1.2, max_value=1.2), min_size=2, max_size=2))
def test_ad_matches_fd_on_smooth_function(point):
    f = lambda c: jexp(0.3 * c[0]) * jsin(c[1]) + c[0] * c[0] * c[1]
    jet = eval_jet(f, point)
    grad, hess = fd_oracle(f, point, 1e-4)
    assert np.max(np.abs(jet.grad - grad)) < 1e-6
    assert np.max(np.abs(jet.hess - hess)) < 1e-6
