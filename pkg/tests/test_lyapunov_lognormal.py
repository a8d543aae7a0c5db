import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svasym import DomainError
from svasym.lyapunov_lognormal import (
    INFINITE,
    functional_value,
    lambda_ab,
    lambda_ab_grid,
    lyapunov_ln,
    optimal_profile,
    optimal_profile_deriv,
    solve_xi,
)


def test_xi_constructed_case():
    # a b^2 = pi^2 / 4 gives xi = pi / 4
    sol = solve_xi(1.0, math.pi / 2)
    assert sol.xi == pytest.approx(math.pi / 4, abs=1e-14)
    assert abs(sol.residual) < 1e-14


def test_xi_small_b():
    a, b = 2.0, 1e-4
    assert solve_xi(a, b).xi == pytest.approx(b * math.sqrt(a / 2), rel=1e-7)


def test_xi_large_ab2():
    assert solve_xi(1.0, 1e6).xi == pytest.approx(math.pi / 2, abs=1e-5)


def test_lambda_exact_value():
    assert lambda_ab(1.0, math.pi / 2) == pytest.approx(0.5 - 4 / math.pi, abs=1e-14)


def test_lambda_small_b_limit():
    assert abs(lambda_ab(2.0, 1e-3) + 2.0) < 1e-3


def test_lambda_edges():
    assert lambda_ab(0.0, 3.0) == 0.0
    assert lambda_ab(1.5, 0.0) == -1.5
    with pytest.raises(DomainError):
        lambda_ab(-1.0, 1.0)


@pytest.mark.parametrize("b", [1e3, 1e4])
def test_large_b_third_order_term(b):
    # lambda = -2 sqrt(2a)/b + pi^2/(2 b^2) - pi^2/(sqrt(2) b^3 sqrt(a)) + O(b^-4)
    a = 1.0
    r = lambda_ab(a, b) + 2 * math.sqrt(2 * a) / b - math.pi**2 / (2 * b * b)
    assert r * b**3 == pytest.approx(-(math.pi**2) / math.sqrt(2), rel=5e-3)


def test_large_a_relative_limit():
    # lambda / (-2 sqrt(2a)/b) -> 1 as a grows; the absolute gap tends to pi^2/(2 b^2)
    a, b = 1e6, 1.0
    lead = 2 * math.sqrt(2 * a) / b
    assert abs(lambda_ab(a, b) + lead) / lead < 1e-2
    assert lambda_ab(1e10, b) + 2 * math.sqrt(2e10) / b == pytest.approx(math.pi**2 / 2, rel=1e-3)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(1e-6, 1e4), b=st.floats(1e-6, 1e3))
def test_lambda_between_minus_a_and_zero(a, b):
    v = lambda_ab(a, b)
    assert -a - 1e-12 * a <= v <= 0.0


@settings(max_examples=50, deadline=None)
@given(a1=st.floats(0.01, 50.0), a2=st.floats(0.01, 50.0), b=st.floats(0.01, 20.0))
def test_lambda_nonincreasing_in_a(a1, a2, b):
    lo, hi = sorted((a1, a2))
    assert lambda_ab(hi, b) <= lambda_ab(lo, b) + 1e-12


def test_lyapunov_ln_cases():
    assert lyapunov_ln(0.3, 0.0, 0.5) == pytest.approx(-0.5 * 0.09 * 0.25, rel=1e-14)
    assert lyapunov_ln(0.3, 2.0, 0.0) == 0.0 and lyapunov_ln(0.3, 2.0, 1.0) == 0.0
    assert lyapunov_ln(0.3, 1.0, 2.0) is INFINITE
    assert lyapunov_ln(0.3, 1.0, -0.5) is INFINITE
    assert float(INFINITE) == math.inf and repr(INFINITE) == "Infinite"
    assert lyapunov_ln(0.3, 1e-10, 0.3) == pytest.approx(-0.5 * 0.09 * 0.3 * 0.7, rel=1e-4)


@pytest.mark.parametrize("a, b", [(1.0, 1.0), (4.0, 2.0), (0.5, 5.0)])
def test_profile_boundary_conditions(a, b):
    assert optimal_profile(a, b, 0.0) == pytest.approx(0.0, abs=1e-15)
    h = 1e-5
    dg1 = (optimal_profile(a, b, 1.0 + h) - optimal_profile(a, b, 1.0 - h)) / (2 * h)
    assert abs(dg1) < 1e-6
    assert optimal_profile_deriv(a, b, 1.0) == 0.0


@pytest.mark.parametrize("a, b", [(1.0, 1.0), (4.0, 2.0), (0.5, 5.0), (0.1, 0.3)])
def test_profile_derivative_matches_finite_differences(a, b):
    x = np.linspace(0.0, 1.0, 21)
    h = 1e-6
    fd = (optimal_profile(a, b, x + h) - optimal_profile(a, b, x - h)) / (2 * h)
    assert np.allclose(fd, optimal_profile_deriv(a, b, x), atol=1e-8)


@pytest.mark.parametrize("a, b", [(0.2, 0.5), (3.0, 7.0)])
def test_functional_value_matches_lambda(a, b):
    g = lambda x: optimal_profile(a, b, x)  # noqa: E731
    dg = lambda x: optimal_profile_deriv(a, b, x)  # noqa: E731
    assert functional_value(a, b, g, dg) == pytest.approx(lambda_ab(a, b), abs=1e-9)


@pytest.mark.parametrize("eps", [0.05, -0.05])
def test_perturbed_profile_is_worse(eps):
    a, b = 2.0, 1.5
    g = lambda x: optimal_profile(a, b, x) + eps * np.sin(np.pi * x / 2)  # noqa: E731
    dg = lambda x: optimal_profile_deriv(a, b, x) + eps * np.pi / 2 * np.cos(np.pi * x / 2)  # noqa: E731
    assert functional_value(a, b, g, dg) < lambda_ab(a, b)


def test_grid_shape():
    out = lambda_ab_grid([0.5, 1.0], [1.0, 2.0, 3.0])
    assert len(out) == 6 and out[0][:2] == (0.5, 1.0)
