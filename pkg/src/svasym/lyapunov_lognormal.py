"""Closed-form Lyapunov exponents of the schemes with a log-Euler asset update.

lambda(a, b) = sup_g ( -a int_0^1 exp(b g) dx - 1/2 int_0^1 g'^2 dx ),  g(0) = 0,

equals a (cos^2 xi - sin(2 xi) / xi) where xi in (0, pi/2) solves
2 xi^2 = a b^2 cos^2 xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .numerics import DEFAULT_SPEC, QuadratureSpec, integrate_adaptive


class _Infinite:
    """Tagged marker for a moment that is infinite."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Infinite"

    def __str__(self):
        return "inf"

    def __float__(self):
        return math.inf


INFINITE = _Infinite()


@dataclass(frozen=True)
class XiSolution:
    xi: float
    a: float
    b: float

    @property
    def residual(self) -> float:
        return 2.0 * self.xi**2 - self.a * self.b**2 * math.cos(self.xi) ** 2


def solve_xi(a: float, b: float) -> XiSolution:
    """Unique root of 2 xi^2 = a b^2 cos^2 xi on (0, pi/2)."""
    if not (a > 0 and b > 0):
        raise DomainError("solve_xi needs a > 0 and b > 0")
    k = a * b * b
    g = lambda x: 2.0 * x * x - k * math.cos(x) ** 2  # noqa: E731
    xi = brentq(g, 0.0, 0.5 * math.pi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return XiSolution(xi=xi, a=a, b=b)


def lambda_ab(a: float, b: float) -> float:
    if a < 0 or b < 0:
        raise DomainError("lambda_ab needs a >= 0 and b >= 0")
    if a == 0:
        return 0.0
    if b == 0:
        return -a
    xi = solve_xi(a, b).xi
    return a * (math.cos(xi) ** 2 - math.sin(2.0 * xi) / xi)


def lyapunov_ln(rho: float, beta: float, q: float):
    """lambda(rho, beta; q) for Log-Euler-Log-Euler and Log-Euler-Euler.

    Returns INFINITE when q < 0 or q > 1, since those moments are infinite.
    """
    if q < 0 or q > 1:
        return INFINITE
    if q == 0 or q == 1:
        return 0.0
    return lambda_ab(0.5 * rho * rho * q * (1.0 - q), 2.0 * math.sqrt(2.0 * beta))


def optimal_profile(a: float, b: float, x):
    """Maximizer g(x) = (1/b) log(cos^2 xi / cos^2(xi (x - 1)))."""
    xi = solve_xi(a, b).xi
    x = np.asarray(x, dtype=float)
    out = (2.0 / b) * (np.log(math.cos(xi)) - np.log(np.cos(xi * (x - 1.0))))
    return float(out) if out.ndim == 0 else out


def optimal_profile_deriv(a: float, b: float, x):
    xi = solve_xi(a, b).xi
    x = np.asarray(x, dtype=float)
    return (2.0 / b) * xi * np.tan(xi * (x - 1.0))


def functional_value(a: float, b: float, g, dg, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """-a int exp(b g) - 1/2 int g'^2 over [0, 1] for a profile g with derivative dg."""
    first = integrate_adaptive(lambda x: np.exp(b * g(x)), 0.0, 1.0, spec)
    second = integrate_adaptive(lambda x: dg(x) ** 2, 0.0, 1.0, spec)
    return -a * first - 0.5 * second


def lambda_ab_grid(a_values, b_values) -> list[tuple[float, float, float]]:
    return [(float(a), float(b), lambda_ab(float(a), float(b))) for a in a_values for b in b_values]
