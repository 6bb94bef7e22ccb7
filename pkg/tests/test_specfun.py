import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nanofiber_orbit import specfun
from nanofiber_orbit.errors import DomainError
from nanofiber_orbit.specfun import BesselKind, I, Ip, J, Jp, K, Kp, evaluate, evaluate_derivative

# 40-digit mpmath values
K0_1 = 0.42102443824070833334
J0_2 = 0.22389077914123566805
J1_2 = 0.57672480775687338720
K1_15 = 0.27738780045684381609
I2_3 = 2.2452124409299511546

MP = {"J": mpmath.besselj, "K": mpmath.besselk, "I": mpmath.besseli}


def test_frozen_values():
    assert K(0, 1.0) == pytest.approx(K0_1, rel=1e-10)
    assert J(0, 2.0) == pytest.approx(J0_2, rel=1e-10)
    assert J(1, 2.0) == pytest.approx(J1_2, rel=1e-10)
    assert K(1, 1.5) == pytest.approx(K1_15, rel=1e-10)
    assert I(2, 3.0) == pytest.approx(I2_3, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(kind=st.sampled_from("JKI"), order=st.integers(0, 2), x=st.floats(0.05, 40.0))
def test_against_mpmath(kind, order, x):
    want = float(MP[kind](order, x))
    got = evaluate(BesselKind(kind, order), x)
    if kind == "J":
        # absolute near the zeros of J
        assert abs(got - want) <= 1e-10 * max(1.0, abs(want))
    else:
        assert got == pytest.approx(want, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(kind=st.sampled_from("JKI"), order=st.integers(0, 2), x=st.floats(0.1, 30.0))
def test_derivative_against_mpmath(kind, order, x):
    want = float(mpmath.diff(lambda t: MP[kind](order, t), x))
    got = evaluate_derivative(BesselKind(kind, order), x)
    assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


def test_small_argument_limit():
    assert J(0, 1e-8) == pytest.approx(1.0, abs=1e-15)


def test_ik_product_decreasing():
    x = np.linspace(0.05, 10, 400)
    p = I(1, x) * K(1, x)
    oracle = np.array([float(mpmath.besseli(1, t) * mpmath.besselk(1, t)) for t in x])
    np.testing.assert_allclose(p, oracle, rtol=1e-10)
    assert np.all(np.diff(p) < 0)


def test_recurrence_derivatives():
    assert Jp(0, 2.0) == pytest.approx(-J(1, 2.0), rel=1e-14)
    assert Kp(0, 1.5) == pytest.approx(-K(1, 1.5), rel=1e-14)


@pytest.mark.parametrize("kind", ["J", "K", "I"])
@pytest.mark.parametrize("order", [0, 1, 2])
def test_finite_difference(kind, order):
    x, h = 3.0, 1e-5
    fd = (evaluate(BesselKind(kind, order), x + h) - evaluate(BesselKind(kind, order), x - h)) / (2 * h)
    assert evaluate_derivative(BesselKind(kind, order), x) == pytest.approx(fd, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("n", [0, 1])
def test_wronskian(n):
    x = np.linspace(0.1, 20, 500)
    w = I(n, x) * Kp(n, x) - Ip(n, x) * K(n, x)
    np.testing.assert_allclose(w, -1 / x, rtol=1e-9)


@pytest.mark.parametrize("n", [1])
def test_j_recurrence(n):
    x = np.linspace(0.1, 20, 500)
    lhs = J(n - 1, x) + J(n + 1, x)
    rhs = 2 * n / x * J(n, x)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-12)


def test_finite_over_range():
    x = np.geomspace(1e-6, 50, 2000)
    for kind in "JKI":
        for order in (0, 1, 2):
            assert np.all(np.isfinite(evaluate(BesselKind(kind, order), x)))
            assert np.all(np.isfinite(evaluate_derivative(BesselKind(kind, order), x)))


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_domain(x):
    with pytest.raises(DomainError):
        evaluate(BesselKind("K", 0), x)


def test_bad_kind():
    with pytest.raises(ValueError):
        BesselKind("Y", 0)
    with pytest.raises(ValueError):
        BesselKind("J", 3)


def test_scalar_in_scalar_out():
    assert isinstance(specfun.J(0, 1.0), float)
    assert specfun.J(0, np.array([1.0, 2.0])).shape == (2,)
