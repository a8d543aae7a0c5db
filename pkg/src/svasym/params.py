"""Model inputs, the (rho, beta) asymptotic scaling and regime tagging."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ModelParams:
    """Market-level inputs of one discretized run.

    sigma0 and omega are quoted per square-root unit of time, tau is the
    time step and n the number of steps.  corr only affects simulation.
    """

    S0: float
    sigma0: float
    omega: float
    tau: float
    n: int
    corr: float = 0.0

    def __post_init__(self):
        if not self.S0 > 0:
            raise DomainError(f"S0 must be positive, got {self.S0}")
        if not self.sigma0 > 0:
            raise DomainError(f"sigma0 must be positive, got {self.sigma0}")
        if not self.omega >= 0:
            raise DomainError(f"omega must be nonnegative, got {self.omega}")
        if not self.tau > 0:
            raise DomainError(f"tau must be positive, got {self.tau}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if not -1.0 <= self.corr <= 1.0:
            raise DomainError(f"corr must lie in [-1, 1], got {self.corr}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def maturity(self) -> float:
        return self.n * self.tau

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "ModelParams":
        return cls(**d)


@dataclass(frozen=True)
class Scaling:
    """Asymptotic coordinates rho = sigma0*sqrt(tau), beta = omega^2 n^2 tau / 2."""

    rho: float
    beta: float
    q: float = 2

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        if not self.beta >= 0:
            raise DomainError(f"beta must be nonnegative, got {self.beta}")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "Scaling":
        return cls(**d)


class Regime(enum.Enum):
    LargeMaturity = "LargeMaturity"
    SmallMaturity = "SmallMaturity"
    FixedMaturity = "FixedMaturity"
    Other = "Other"


def scaling_from_market(p: ModelParams, q: float = 2) -> Scaling:
    rho = p.sigma0 * math.sqrt(p.tau)
    beta = 0.5 * p.omega**2 * p.n**2 * p.tau
    return Scaling(rho=rho, beta=beta, q=q)


def market_from_scaling(s: Scaling, n: int, tau: float, S0: float = 1.0) -> ModelParams:
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    sigma0 = s.rho / math.sqrt(tau)
    omega = math.sqrt(2.0 * s.beta / (n * n * tau))
    return ModelParams(S0=S0, sigma0=sigma0, omega=omega, tau=tau, n=int(n))


def _growth_exponent(ns, values) -> float:
    """Least-squares slope of log(value) against log(n)."""
    x = np.log(np.asarray(ns, float))
    y = np.log(np.asarray(values, float))
    return float(np.polyfit(x, y, 1)[0])


def classify_regime(sweep: Sequence[ModelParams], tol: float = 0.1) -> Regime:
    """Tag a parameter sweep by how tau, sigma0 and omega scale with n.

    Advisory only: solvers depend on (rho, beta, q) alone.  The sweep must
    contain at least two distinct step counts and keep omega > 0.
    """
    ns = [p.n for p in sweep]
    if len(set(ns)) < 2 or any(p.omega <= 0 for p in sweep):
        return Regime.Other
    e_tau = _growth_exponent(ns, [p.tau for p in sweep])
    e_sig = _growth_exponent(ns, [p.sigma0 for p in sweep])
    e_om = _growth_exponent(ns, [p.omega for p in sweep])

    def near(a, b):
        return abs(a - b) <= tol

    if near(e_tau, 0) and near(e_sig, 0) and near(e_om, -1):
        return Regime.LargeMaturity
    if near(e_tau, -2) and near(e_sig, 1) and near(e_om, 0):
        return Regime.SmallMaturity
    if near(e_tau, -1) and near(e_sig, 0.5) and near(e_om, -0.5):
        return Regime.FixedMaturity
    return Regime.Other
