"""Cumulant f_q, its derivative and the Legendre transform I_q of the tilted
Gaussian-moment law P(Y = 2j) proportional to C(q, 2j) (2j-1)!!."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .errors import DomainError

EXACT_MAX_Q = 20


def _check_q(q) -> int:
    if int(q) != q or q < 2:
        raise DomainError(f"moment order must be an integer >= 2, got {q}")
    return int(q)


def double_factorial(k: int) -> int:
    """k!! with the convention (-1)!! = 0!! = 1."""
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


@lru_cache(maxsize=None)
def int_weights(q: int) -> tuple[int, ...]:
    """w_j = q! / ((2j)! (q-2j)!) * (2j-1)!!  for j = 0..[q/2], exact integers."""
    return tuple(math.comb(q, 2 * j) * double_factorial(2 * j - 1) for j in range(q // 2 + 1))


@lru_cache(maxsize=None)
def log_weights(q: int) -> np.ndarray:
    """log w_j, computed through lgamma so that large q is safe."""
    if q <= EXACT_MAX_Q:
        lw = np.log(np.array(int_weights(q), dtype=float))
    else:
        # (2k-1)!! = (2k)! / (2^k k!), so the (2k)! factors cancel
        lw = np.array(
            [
                math.lgamma(q + 1) - math.lgamma(q - 2 * k + 1) - k * math.log(2.0) - math.lgamma(k + 1)
                for k in range(q // 2 + 1)
            ]
        )
    lw.setflags(write=False)
    return lw


def normalizer(q) -> float:
    """m(q) = sum_j w_j.  Exact integer arithmetic up to q = 20.

    Beyond that the sum is formed in floating point and OverflowError is
    raised once it no longer fits in a double.
    """
    q = _check_q(q)
    if q <= EXACT_MAX_Q:
        return sum(int_weights(q))
    # math.exp raises OverflowError itself once the sum leaves double range
    return math.exp(float(logsumexp(log_weights(q))))


@dataclass(frozen=True)
class TiltedLaw:
    q: int
    weights: tuple[float, ...]
    normalizer: float

    @classmethod
    def of(cls, q) -> "TiltedLaw":
        q = _check_q(q)
        lw = log_weights(q)
        p = np.exp(lw - logsumexp(lw))
        return cls(q=q, weights=tuple(p.tolist()), normalizer=normalizer(q))


def qhalf(q) -> int:
    return int(q) // 2


def cgf(q, theta):
    """f_q(theta) = log sum_j w_j exp(2 j theta), scalar or array theta."""
    q = _check_q(q)
    lw = log_weights(q)
    th = np.asarray(theta, dtype=float)
    j2 = 2.0 * np.arange(lw.size)
    out = logsumexp(lw + j2 * th[..., None], axis=-1)
    return float(out) if out.ndim == 0 else out


def tilted_log_probs(q, theta):
    """log p_j(theta) with p_j proportional to w_j exp(2 j theta); last axis is j."""
    q = _check_q(q)
    lw = log_weights(q)
    th = np.asarray(theta, dtype=float)
    z = lw + 2.0 * np.arange(lw.size) * th[..., None]
    return z - logsumexp(z, axis=-1, keepdims=True)


def cgf_deriv(q, theta):
    """f_q'(theta) = E_theta[Y], the mean of the tilted law."""
    p = np.exp(tilted_log_probs(q, theta))
    out = p @ (2.0 * np.arange(p.shape[-1]))
    return float(out) if np.ndim(out) == 0 else out


def _endpoint_rate(q: int) -> float:
    return -float(log_weights(q)[-1])


def _check_x(q: int, x: float) -> float:
    top = 2 * qhalf(q)
    if not (0.0 <= x <= top):
        raise DomainError(f"I_{q}(x) needs 0 <= x <= {top}, got {x}")
    return float(x)


def _xlogx(x: float) -> float:
    return 0.0 if x == 0.0 else x * math.log(x)


def rate_closed_form(q, x: float) -> float:
    """Closed-form I_q for q = 2..5."""
    q = _check_q(q)
    x = _check_x(q, x)
    top = 2 * qhalf(q)
    if q not in (2, 3, 4, 5):
        raise DomainError(f"no closed form for q={q}")
    if x == 0.0:
        return 0.0
    if x == top:
        return _endpoint_rate(q)
    if q == 2:
        return 0.5 * _xlogx(x) + 0.5 * _xlogx(2.0 - x) - math.log(2.0)
    if q == 3:
        return 0.5 * x * (math.log(x) - math.log(6.0 - 3.0 * x)) - math.log(6.0 / (6.0 - 3.0 * x))
    if q == 4:
        le = _log_pos_root(3.0 * (4.0 - x), 6.0 * (2.0 - x), x)
        eta = math.exp(le)
        return 0.5 * x * le - math.log(1.0 + 6.0 * eta + 3.0 * eta * eta)
    le = _log_pos_root(15.0 * (4.0 - x), 10.0 * (2.0 - x), x)
    eta = math.exp(le)
    return 0.5 * x * le - math.log(1.0 + 10.0 * eta + 15.0 * eta * eta)


def _log_pos_root(A: float, B: float, x: float) -> float:
    """log of the positive root of A eta^2 + B eta - x = 0 (A, x > 0), free of cancellation."""
    disc = math.sqrt(B * B + 4.0 * A * x)
    if B >= 0:
        return math.log(2.0) + math.log(x) - math.log(B + disc)
    return math.log(disc - B) - math.log(2.0 * A)


def legendre_theta(q, x: float) -> float:
    """theta* solving f_q'(theta) = x for 0 < x < 2[q/2]."""
    q = _check_q(q)
    x = _check_x(q, x)
    top = 2 * qhalf(q)
    if x == 0.0 or x == top:
        raise DomainError("theta* diverges at the endpoints")
    g = lambda t: cgf_deriv(q, t) - x  # noqa: E731
    lo, hi = -1.0, 1.0
    while g(lo) > 0:
        lo *= 2.0
    while g(hi) < 0:
        hi *= 2.0
    return brentq(g, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def rate_numeric(q, x: float) -> float:
    """I_q(x) = theta* x - f_q(theta*) from a bracketed solve of f_q' = x."""
    q = _check_q(q)
    x = _check_x(q, x)
    if x == 0.0:
        return 0.0
    if x == 2 * qhalf(q):
        return _endpoint_rate(q)
    th = legendre_theta(q, x)
    return th * x - cgf(q, th)


def rate(q, x: float) -> float:
    """Rate function I_q(x) on [0, 2[q/2]]; closed forms for q <= 5."""
    q = _check_q(q)
    if q <= 5:
        return rate_closed_form(q, x)
    return rate_numeric(q, x)
