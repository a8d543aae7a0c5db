"""Almost-sure growth rates and CLT variances of log|S_n| for the four schemes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonConvergent
from .numerics import DEFAULT_SPEC, QuadratureSpec, find_roots, gaussian_expectation
from .schemes import SchemeKind

EULER_ASSET = "EulerAsset"
LOG_EULER_ASSET = "LogEulerAsset"


@dataclass(frozen=True)
class LimitConstants:
    lln_slope: float
    clt_variance: float
    scheme_family: str


def lln_euler(rho: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """E[log|1 + rho eps|]."""
    if rho < 0:
        raise DomainError("rho must be nonnegative")
    if rho == 0:
        return 0.0
    return gaussian_expectation(lambda x: np.log(np.abs(1.0 + rho * x)), spec, singularity=-1.0 / rho)


def lln_root() -> float:
    """The rho in [1, 2] where E[log|1 + rho eps|] changes sign."""
    roots = find_roots(lln_euler, 1.0, 2.0, 9)
    if len(roots) != 1:
        raise NonConvergent(f"expected one sign change on [1, 2], found {len(roots)}")
    return roots[0]


def log_abs_second_moment(rho: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    if rho == 0:
        return 0.0
    return gaussian_expectation(lambda x: np.log(np.abs(1.0 + rho * x)) ** 2, spec, singularity=-1.0 / rho)


def var_log_abs(rho: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Var[log|1 + rho eps|]."""
    m = lln_euler(rho, spec)
    return log_abs_second_moment(rho, spec) - m * m


def var_abs(rho: float) -> float:
    """Var[|1 + rho eps|], the literal variant of the Euler-Euler CLT variance term."""
    if rho == 0:
        return 0.0
    c = 1.0 / rho
    # E|1 + rho eps| = rho E|eps + c| for a folded normal with mean c
    mean_abs = rho * (math.sqrt(2.0 / math.pi) * math.exp(-0.5 * c * c) + c * math.erf(c / math.sqrt(2.0)))
    return 1.0 + rho * rho - mean_abs**2


def H(x: float, rho: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """H(x) = E[log|1 + eps x / (1 + rho eps)|], split at both singular points."""
    if x == 0:
        return 0.0
    sing = [-1.0 / rho, -1.0 / (rho + x)] if rho + x != 0 else [-1.0 / rho]

    def g(e):
        return np.log(np.abs(1.0 + e * x / (1.0 + rho * e)))

    return gaussian_expectation(g, spec, singularity=sing)


# H differences are divided by 2h, so H needs tighter tolerances than the default.
# With Richardson the O(h^4) bias at h=1e-3 sits below the quadrature noise.
H_SPEC = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-11)


def H_prime0(rho: float, h: float = 1e-3, check_tol: float = 1e-4, spec: QuadratureSpec = H_SPEC) -> float:
    """Symmetric difference of H at +-h, checked against the same rule at +-2h."""
    if not rho > 0:
        raise DomainError("H'(0) needs rho > 0")
    d1 = (H(h, rho, spec) - H(-h, rho, spec)) / (2.0 * h)
    d2 = (H(2 * h, rho, spec) - H(-2 * h, rho, spec)) / (4.0 * h)
    if abs(d1 - d2) > check_tol * max(abs(d1), 1e-300):
        raise NonConvergent(f"H'(0) difference check failed: {d1} vs {d2}")
    # Richardson combination removes the O(h^2) term
    return (4.0 * d1 - d2) / 3.0


def clt_variance_euler(rho: float, beta: float, variant: str = "log") -> float:
    """2/3 H'(0)^2 rho^2 beta + Var[log|1 + rho eps|].

    variant="abs" swaps the second term for Var[|1 + rho eps|], the form
    sometimes quoted for the Euler-Euler scheme, so both can be compared.
    """
    if not rho > 0 or beta < 0:
        raise DomainError("need rho > 0 and beta >= 0")
    if variant == "log":
        tail = var_log_abs(rho)
    elif variant == "abs":
        tail = var_abs(rho)
    else:
        raise DomainError(f"unknown variant {variant!r}")
    if beta == 0:
        return tail
    hp = H_prime0(rho)
    return 2.0 / 3.0 * hp * hp * rho * rho * beta + tail


def clt_variance_lognormal(rho: float, beta: float) -> float:
    """rho^2 + 2/3 rho^4 beta."""
    if rho < 0 or beta < 0:
        raise DomainError("need rho >= 0 and beta >= 0")
    return rho * rho + 2.0 / 3.0 * rho**4 * beta


def lln_lognormal(rho: float) -> float:
    return -0.5 * rho * rho


def limit_constants(kind: SchemeKind, rho: float, beta: float, variant: str = "log") -> LimitConstants:
    """LLN slope and CLT variance; Euler-Euler shares the Euler-Log-Euler constants."""
    kind = SchemeKind.parse(kind)
    if kind.log_asset:
        return LimitConstants(lln_lognormal(rho), clt_variance_lognormal(rho, beta), LOG_EULER_ASSET)
    return LimitConstants(lln_euler(rho), clt_variance_euler(rho, beta, variant), EULER_ASSET)


def lln_curve(rhos) -> list[tuple[float, float]]:
    return [(float(r), lln_euler(float(r))) for r in rhos]
