"""Discretized Hull-White stochastic volatility: moment Lyapunov exponents,
phase-transition curves, exact finite-step moments and limit laws."""

from .errors import (
    CapacityExceeded,
    DomainError,
    NoTransition,
    NonConvergent,
    SvasymError,
    UnknownTarget,
)
from .params import ModelParams, Regime, Scaling, market_from_scaling, scaling_from_market
from .schemes import SchemeKind

__version__ = "0.1.0"

__all__ = [
    "CapacityExceeded",
    "DomainError",
    "ModelParams",
    "NoTransition",
    "NonConvergent",
    "Regime",
    "Scaling",
    "SchemeKind",
    "SvasymError",
    "UnknownTarget",
    "market_from_scaling",
    "scaling_from_market",
]
