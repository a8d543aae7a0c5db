"""Lyapunov exponent lambda(rho, beta; q) of the Euler-Log-Euler scheme.

The path-space supremum reduces to a one-dimensional problem in the
terminal value h1 = h(1) of the optimal profile:

    Lambda(h1) = f(h1) - beta^{-1/2} int_{log rho}^{h1} sqrt(f(h1) - f(x)) dx,

whose stationary points solve F(h1; rho) = 2 sqrt(beta) with

    F(a; rho) = int_{log rho}^{a} dx / sqrt(f(a) - f(x)).

Both integrals are taken after x = a - t^2.  Because
dLambda/dh1 = f'(h1) (1 - F(h1)/(2 sqrt(beta))), Lambda rises while
F < 2 sqrt(beta), so the outer roots of the equation are local maxima and
the global maximum switches between them across the phase-transition
curve beta_cr(rho).  The same holds for the Euler-Euler scheme.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .errors import DomainError, NoTransition, NonConvergent
from .numerics import (
    DEFAULT_SPEC,
    QuadratureSpec,
    golden_max,
    integrate_adaptive,
    maximize_scan_refine,
    roots_from_samples,
)
from .rate_functions import cgf, cgf_deriv, qhalf, rate, tilted_log_probs

BRANCH_ZERO = "BoundaryZero"
BRANCH_STATIONARY = "Stationary"
BRANCH_ENDPOINT = "BoundaryEndpoint"

_TAYLOR_T2 = 1e-4


def _check(rho, q):
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    if int(q) != q or q < 2:
        raise DomainError(f"q must be an integer >= 2, got {q}")
    return math.log(rho), int(q)


def _tilt(q: int, a: float):
    lp = tilted_log_probs(q, a)
    p = np.exp(lp)
    j2 = 2.0 * np.arange(p.size)
    return lp, p, j2


def _gap(lp, p, j2, t2):
    """D = f(a) - f(a - t^2) for an array of t^2, accurate for small and large t."""
    z = -np.multiply.outer(t2, j2)
    d = -logsumexp(lp + z, axis=-1)
    small = d < 0.5
    if np.any(small):
        d[small] = -np.log1p(np.expm1(z[small]) @ p)
    return d


def _cumulants(p, j2):
    m = p @ j2
    c = j2 - m
    return m, p @ c**2, p @ c**3, p @ c**4 - 3.0 * (p @ c**2) ** 2


def _F_integrand(q, a):
    lp, p, j2 = _tilt(q, a)
    fpa = float(p @ j2)

    def g(t):
        t2 = t * t
        d = _gap(lp, p, j2, t2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(t2 > 0, d / np.where(t2 > 0, t2, 1.0), fpa)
        return 2.0 / np.sqrt(ratio)

    return g


def _dF_integrand(q, a):
    lp, p, j2 = _tilt(q, a)
    k1, k2, k3, k4 = _cumulants(p, j2)

    def g(t):
        t2 = t * t
        safe = np.where(t2 > 0, t2, 1.0)
        d = _gap(lp, p, j2, t2)
        ratio = np.where(t2 > 0, d / safe, k1)
        # f'(a) - f'(a - t^2), divided by t^2
        w = lp - np.multiply.outer(t2, j2)
        px = np.exp(w - logsumexp(w, axis=-1, keepdims=True))
        direct = (k1 - px @ j2) / safe
        taylor = k2 - 0.5 * k3 * t2 + k4 * t2 * t2 / 6.0
        dfp = np.where(t2 < _TAYLOR_T2, taylor, direct)
        return -dfp * ratio**-1.5

    return g


def F_q(a: float, rho: float, q: int = 2, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """F_q(a; rho) = int_{log rho}^a dx / sqrt(f_q(a) - f_q(x))."""
    L, q = _check(rho, q)
    if a < L:
        raise DomainError(f"F_q needs a >= log rho = {L}, got {a}")
    if a == L:
        return 0.0
    return integrate_adaptive(_F_integrand(q, a), 0.0, math.sqrt(a - L), spec)


def dF_q(a: float, rho: float, q: int = 2, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Derivative of F_q(a; rho) in a, differentiated under the integral."""
    L, q = _check(rho, q)
    if not a > L:
        raise DomainError(f"dF_q needs a > log rho = {L}, got {a}")
    edge = 1.0 / math.sqrt(cgf(q, a) - cgf(q, L))
    return edge + integrate_adaptive(_dF_integrand(q, a), 0.0, math.sqrt(a - L), spec)


def lambda_from_h1(
    h1: float, rho: float, beta: float, q: int = 2, spec: QuadratureSpec = DEFAULT_SPEC
) -> float:
    """Lambda(h1) = f(h1) - beta^{-1/2} int_{log rho}^{h1} sqrt(f(h1) - f(x)) dx."""
    L, q = _check(rho, q)
    if h1 < L:
        raise DomainError(f"h1 must be >= log rho = {L}, got {h1}")
    if h1 == L:
        return cgf(q, L)
    if not beta > 0:
        raise DomainError("lambda_from_h1 needs beta > 0")
    lp, p, j2 = _tilt(q, h1)

    def g(t):
        return 2.0 * t * np.sqrt(np.maximum(_gap(lp, p, j2, t * t), 0.0))

    integral = integrate_adaptive(g, 0.0, math.sqrt(h1 - L), spec)
    return cgf(q, h1) - integral / math.sqrt(beta)


def d_of_h1(h1: float, rho: float, beta: float, q: int = 2) -> float:
    """Profile mean d = beta^{-1/2} sqrt(f(h1) - f(log rho))."""
    L, q = _check(rho, q)
    return math.sqrt(max(cgf(q, h1) - cgf(q, L), 0.0) / beta)


def lambda_d(q: int, d: float, rho: float, beta: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Functional Lambda_q(d) on d in [0, 2] for q in {2, 3}.

    Lambda = beta d^2 + log(1 + c rho^2)
             - beta d^3 (1 + c rho^2) int_0^1 y^2 dy / (1 + c rho^2 - exp(beta d^2 (y^2 - 1)))
    with c = 1 for q = 2 and c = 3 for q = 3.
    """
    if q not in (2, 3):
        raise DomainError("lambda_d is defined for q in {2, 3}")
    if not 0.0 <= d <= 2.0:
        raise DomainError(f"d must lie in [0, 2], got {d}")
    c = 1.0 if q == 2 else 3.0
    cr2 = c * rho * rho
    if d == 0.0 or beta == 0.0:
        return math.log1p(cr2)
    bd2 = beta * d * d

    def g(y):
        # (y - 1)(y + 1) is exact near y = 1, where the denominator is smallest
        return y * y / (cr2 - np.expm1(bd2 * (y - 1.0) * (y + 1.0)))

    integral = integrate_adaptive(g, 0.0, 1.0, spec)
    return bd2 + math.log1p(cr2) - beta * d**3 * (1.0 + cr2) * integral


def lambda_d_max(q: int, rho: float, beta: float, grid: int = 401) -> tuple[float, float]:
    """Dense-grid maximization of Lambda_q(d) over [0, 2]; returns (d*, value)."""
    return maximize_scan_refine(lambda d: lambda_d(q, d, rho, beta), 0.0, 2.0, grid)


# ------------------------------------------------------------ F profiles

_U_FINE = 8.0
_DU_FINE = 1.0 / 32.0
_DU_COARSE = 1.0 / 8.0


def _u_grid(u_max: float) -> np.ndarray:
    fine = np.arange(0.0, min(u_max, _U_FINE) + 1e-12, _DU_FINE)
    if u_max <= _U_FINE:
        return fine
    coarse = np.arange(_U_FINE + _DU_COARSE, u_max + 1e-12, _DU_COARSE)
    return np.concatenate([fine, coarse])


class _Profile:
    """F_q sampled on a u = sqrt(a - log rho) grid, extended on demand."""

    def __init__(self, q: int, rho: float):
        self.q = q
        self.rho = rho
        self.L = math.log(rho)
        self.u = np.zeros(1)
        self.F = np.zeros(1)
        self.lock = threading.Lock()

    def upto(self, u_max: float):
        with self.lock:
            if self.u[-1] < u_max - 1e-12:
                grid = _u_grid(u_max)
                new = grid[grid > self.u[-1] + 1e-12]
                vals = [F_q(self.L + x * x, self.rho, self.q) for x in new]
                self.u = np.concatenate([self.u, new])
                self.F = np.concatenate([self.F, vals])
            k = int(np.searchsorted(self.u, u_max + 1e-12))
            return self.u[:k], self.F[:k]


@lru_cache(maxsize=256)
def _profile(q: int, rho: float) -> _Profile:
    return _Profile(q, rho)


def _a_cap(L: float, beta: float, q: int) -> float:
    # f' <= 2[q/2] gives F(a) >= sqrt(2 (a - log rho) / [q/2]), so no root lies beyond
    return L + 2.0 * qhalf(q) * beta


def stationary_h1(rho: float, beta: float, q: int = 2) -> list[float]:
    """All roots h1 of F_q(h1; rho) = 2 sqrt(beta), ascending.

    The scan covers log rho < h1 <= log rho + 2[q/2] beta, beyond which no
    root can exist.  Tangential roots may be missed.
    """
    L, q = _check(rho, q)
    if not beta > 0:
        raise DomainError("stationary_h1 needs beta > 0")
    c = 2.0 * math.sqrt(beta)
    u_cap = math.sqrt(_a_cap(L, beta, q) - L)
    us, Fs = _profile(q, float(rho)).upto(u_cap)
    us = list(us)
    Fs = list(Fs)
    if us[-1] < u_cap:
        us.append(u_cap)
        Fs.append(F_q(L + u_cap * u_cap, rho, q))
    ys = [F - c for F in Fs]
    g = lambda u: F_q(L + u * u, rho, q) - c  # noqa: E731
    return [L + u * u for u in roots_from_samples(g, us, ys) if u > 0]


# ------------------------------------------------------------ bounds

@dataclass(frozen=True)
class Bounds:
    lower: float
    upper: float
    large_beta_slope: float
    large_rho_form: float


def bounds_and_asymptotics(rho: float, beta: float, q: int = 2) -> Bounds:
    """Two-sided bounds, the large-beta slope and the large-rho asymptote.

    The large-rho form coincides with the lower-bound expression: the
    difference between lambda and it vanishes as rho grows.
    """
    L, q = _check(rho, q)
    Q = qhalf(q)
    lower = 4.0 / 3.0 * beta * Q * Q + 2 * Q * L - rate(q, 2 * Q)
    upper = 4.0 / 3.0 * beta * Q * Q + cgf(q, L)
    return Bounds(lower=lower, upper=upper, large_beta_slope=4.0 / 3.0 * Q * Q, large_rho_form=lower)


# ------------------------------------------------------------ lambda

@dataclass(frozen=True)
class LyapunovResult:
    value: float
    branch: str
    h1: float | None
    d_star: float
    all_stationary_h1: tuple[float, ...] = ()
    endpoint_flag: bool = False


def lyapunov(rho: float, beta: float, q: int = 2) -> LyapunovResult:
    """lambda(rho, beta; q) as the best of all admissible candidates.

    Candidates: every stationary root, the d = 0 boundary f(log rho), and
    the d = 2[q/2] endpoint (direct functional for q <= 3, and the proven
    lower bound for every q).  endpoint_flag marks an endpoint win.
    """
    L, q = _check(rho, q)
    if not beta >= 0:
        raise DomainError("beta must be nonnegative")
    f0 = cgf(q, L)
    if beta == 0:
        return LyapunovResult(value=f0, branch=BRANCH_ZERO, h1=L, d_star=0.0)
    roots = stationary_h1(rho, beta, q)
    best = (f0, BRANCH_ZERO, L)
    for r in roots:
        v = lambda_from_h1(r, rho, beta, q)
        if v > best[0]:
            best = (v, BRANCH_STATIONARY, r)
    Q = qhalf(q)
    end = bounds_and_asymptotics(rho, beta, q).lower
    if q <= 3:
        end = max(end, lambda_d(q, 2.0, rho, beta))
    flag = end > best[0] + 1e-12
    if flag:
        return LyapunovResult(
            value=end, branch=BRANCH_ENDPOINT, h1=None, d_star=2.0 * Q,
            all_stationary_h1=tuple(roots), endpoint_flag=True,
        )
    v, branch, h1 = best
    return LyapunovResult(
        value=v, branch=branch, h1=h1, d_star=d_of_h1(h1, rho, beta, q),
        all_stationary_h1=tuple(roots),
    )


# ------------------------------------------------------------ Maxwell construction

def _extrema(phi: Callable[[float], float], xs, ys):
    """First interior local maximum of sampled phi and the following local minimum."""
    n = len(ys)
    i = next((k for k in range(1, n - 1) if ys[k - 1] < ys[k] >= ys[k + 1]), None)
    if i is None:
        return None
    j = next((k for k in range(i + 1, n - 1) if ys[k - 1] > ys[k] <= ys[k + 1]), None)
    if j is None:
        return None
    xmax, fmax = golden_max(phi, xs[i - 1], xs[i + 1], 1e-9)
    xmin, fmin = golden_max(lambda x: -phi(x), xs[j - 1], xs[j + 1], 1e-9)
    return xmax, fmax, xmin, -fmin


def _maxwell(phi, value, beta_of_c, x0, xmax, cmax, xmin, cmin, x_far, ctol=1e-9):
    """Level c in (cmin, cmax) where the outer solutions of phi(x) = c tie in value."""

    def outer_roots(c):
        r1 = brentq(lambda x: phi(x) - c, x0, xmax, xtol=1e-12)
        hi = x_far(c)
        r3 = brentq(lambda x: phi(x) - c, xmin, hi, xtol=1e-12)
        return r1, r3

    def delta(c):
        r1, r3 = outer_roots(c)
        b = beta_of_c(c)
        return value(r3, b) - value(r1, b)

    span = cmax - cmin
    lo = cmin + 1e-7 * span
    hi = cmax - 1e-7 * span
    dlo, dhi = delta(lo), delta(hi)
    if not (dlo < 0 < dhi):
        raise NonConvergent(f"branch values do not cross ({dlo:.3g}, {dhi:.3g})")
    c = brentq(delta, lo, hi, xtol=ctol)
    return c, outer_roots(c)


@dataclass(frozen=True)
class Transition:
    rho: float
    beta_cr: float
    h1_lower: float
    h1_upper: float
    d_lower: float
    d_upper: float


def _profile_extrema(q: int, rho: float):
    L = math.log(rho)
    us, Fs = _profile(q, float(rho)).upto(_U_FINE)
    phi = lambda u: F_q(L + u * u, rho, q)  # noqa: E731
    return _extrema(phi, list(us), list(Fs))


def critical_beta(rho: float, q: int = 2) -> Transition:
    """beta_cr(rho): the beta at which the two local maxima of Lambda tie."""
    L, q = _check(rho, q)
    ext = _profile_extrema(q, float(rho))
    if ext is None:
        raise NoTransition(f"no phase transition for q={q} at rho={rho}")
    umax, Fmax, umin, Fmin = ext
    phi = lambda u: F_q(L + u * u, rho, q)  # noqa: E731

    def value(u, beta):
        return lambda_from_h1(L + u * u, rho, beta, q)

    def u_far(c):
        # F grows without bound; the cap is where the lower bound on F reaches c
        return math.sqrt(qhalf(q) * c * c / 2.0) + 1e-9

    c, (u1, u3) = _maxwell(phi, value, lambda c: c * c / 4.0, 0.0, umax, Fmax, umin, Fmin, u_far)
    beta = c * c / 4.0
    h_lo, h_hi = L + u1 * u1, L + u3 * u3
    return Transition(
        rho=float(rho), beta_cr=beta, h1_lower=h_lo, h1_upper=h_hi,
        d_lower=d_of_h1(h_lo, rho, beta, q), d_upper=d_of_h1(h_hi, rho, beta, q),
    )


def _min_dF(q: int, rho: float):
    """Interior local minimum of F'(a) on the fine profile range, as (u, F'), or None."""
    L = math.log(rho)
    us = np.arange(_DU_FINE, _U_FINE + 1e-12, 2 * _DU_FINE)
    g = lambda u: dF_q(L + u * u, rho, q)  # noqa: E731
    vals = [g(u) for u in us]
    i = int(np.argmin(vals))
    if i == 0 or i == len(us) - 1:
        return None
    u, v = golden_max(lambda x: -g(x), us[i - 1], us[i + 1], 1e-9)
    return u, -v


@dataclass(frozen=True)
class CriticalPoint:
    q: int
    rho_c: float
    beta_c: float
    h1_c: float

    @property
    def inv_beta_c(self) -> float:
        return 1.0 / self.beta_c


def critical_point(q: int, rho_lo: float = 0.05, rho_hi: float = 0.8, rho_tol: float = 1e-4) -> CriticalPoint:
    """Endpoint (rho_c, beta_c) of the transition curve.

    Below rho_c the stationarity curve F(a) has a local maximum and
    minimum; they merge at an inflection point with F' = 0.  rho_c is
    bisected on the sign of the interior minimum of F', and
    beta_c = (F(a_c)/2)^2 at the merged point.
    """
    q = int(q)

    def sign(rho):
        m = _min_dF(q, rho)
        return 1.0 if m is None else math.copysign(1.0, m[1])

    lo, hi = rho_lo, rho_hi
    if sign(lo) > 0:
        raise NoTransition(f"no transition even at rho={lo}")
    if sign(hi) < 0:
        raise NonConvergent(f"transition persists at rho={hi}")
    while hi - lo > rho_tol:
        mid = 0.5 * (lo + hi)
        if sign(mid) < 0:
            lo = mid
        else:
            hi = mid
    rho_c = 0.5 * (lo + hi)
    m = _min_dF(q, rho_c)
    if m is None:
        m = _min_dF(q, lo)
    u = m[0]
    L = math.log(rho_c)
    a = L + u * u
    beta_c = (F_q(a, rho_c, q) / 2.0) ** 2
    return CriticalPoint(q=q, rho_c=rho_c, beta_c=beta_c, h1_c=a)


@dataclass(frozen=True)
class PhaseCurve:
    q: int
    samples: tuple[tuple[float, float], ...]
    critical_point: tuple[float, float]
    details: tuple[Transition, ...] = field(default=(), repr=False)


def default_rho_grid(rho_c: float, n: int = 12, rho_min: float = 0.01) -> list[float]:
    return list(np.geomspace(rho_min, 0.97 * rho_c, n))


def phase_curve(q: int, rho_grid: Sequence[float] | None = None) -> PhaseCurve:
    """Transition curve beta_cr(rho) on a rho grid plus its critical endpoint."""
    cp = critical_point(q)
    grid = default_rho_grid(cp.rho_c) if rho_grid is None else sorted(float(r) for r in rho_grid)
    bad = [r for r in grid if r >= cp.rho_c]
    if bad:
        raise NoTransition(f"rho={bad[0]} is not below rho_c={cp.rho_c:.6g} for q={q}")
    tr = tuple(critical_beta(r, q) for r in grid)
    return PhaseCurve(
        q=int(q),
        samples=tuple((t.rho, t.beta_cr) for t in tr),
        critical_point=(cp.rho_c, cp.beta_c),
        details=tr,
    )


def small_rho_asymptote(rho: float, q: int) -> float:
    """-2/3 log(c rho^2 / (1 + c rho^2)), c = 1 for q = 2 and 3 for q = 3."""
    if q not in (2, 3):
        raise DomainError("small-rho asymptote available for q in {2, 3}")
    c = 1.0 if q == 2 else 3.0
    x = c * rho * rho
    return -2.0 / 3.0 * math.log(x / (1.0 + x))


# ------------------------------------------------------------ mean field

def meanfield_value(a: float, rho: float, beta: float, q: int) -> float:
    return a * math.log(rho) + beta * a * a / 3.0 - rate(q, a)


def meanfield(rho: float, beta: float, q: int = 2, grid: int = 201) -> tuple[float, float]:
    """Constant-profile restriction: max over a of a log rho + beta a^2/3 - I_q(a).

    Returns (value, a_star).
    """
    L, q = _check(rho, q)
    a, v = maximize_scan_refine(lambda x: meanfield_value(x, rho, beta, q), 0.0, 2.0 * qhalf(q), grid)
    return v, a


def meanfield_phase(q: int, rho: float) -> float:
    """Closed-form mean-field transition curve for q in {2, 3}."""
    if q == 2:
        return -1.5 * math.log(rho)
    if q == 3:
        return -0.75 * math.log(3.0 * rho * rho)
    raise DomainError("closed-form mean-field phase curves exist for q in {2, 3}")


def meanfield_critical_point(q: int) -> tuple[float, float]:
    if q == 2:
        return math.exp(-1.0), 1.5
    if q == 3:
        return 1.0 / (math.sqrt(3.0) * math.e), 1.5
    raise DomainError("closed-form mean-field critical points exist for q in {2, 3}")


def meanfield_phase_numeric(q: int, rho: float) -> float:
    """Mean-field beta_cr from the tie of the two constant-profile maxima.

    Stationary points in theta = I_q'(a) satisfy
    Phi(theta) = 3 (theta - log rho) / (2 f'(theta)) = beta, the same
    fold structure as F = 2 sqrt(beta) in the exact problem.
    """
    L, q = _check(rho, q)
    phi = lambda t: 1.5 * (t - L) / cgf_deriv(q, t)  # noqa: E731
    xs = list(L + np.linspace(0.0, 12.0, 481)[1:])
    ys = [phi(x) for x in xs]
    ext = _extrema(phi, xs, ys)
    if ext is None:
        raise NoTransition(f"no mean-field transition for q={q} at rho={rho}")
    tmax, pmax, tmin, pmin = ext

    def value(t, beta):
        a = cgf_deriv(q, t)
        return a * L + beta * a * a / 3.0 - (t * a - cgf(q, t))

    def t_far(c):
        return L + 4.0 / 3.0 * c * qhalf(q) + 1.0

    c, _ = _maxwell(phi, value, lambda c: c, L, tmax, pmax, tmin, pmin, t_far, ctol=1e-10)
    return c
