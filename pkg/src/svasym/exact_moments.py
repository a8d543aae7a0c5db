"""Exact integer moments E[S_n^q] of the Euler-Log-Euler scheme.

With sigma_k = sigma0 exp(omega Z_k - omega^2 t_k / 2), averaging over the
asset noise of step k gives

    E_eps[(1 + sigma_k sqrt(tau) eps)^q] = sum_m a_m exp(2 m omega Z_k - m omega^2 t_k),
    a_m = C(q, 2m) (2m-1)!! rho^{2m}.

Backward induction keeps beta_i(z) = sum_j B_j exp(2 j omega z) and uses
E[exp(c omega Z_{i+1}) | Z_i = z] = exp(c omega z + c^2 omega^2 tau / 2).
Coefficients are stored as logarithms throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import CapacityExceeded, DomainError
from .params import ModelParams, Scaling, scaling_from_market
from .rate_functions import log_weights

MAX_ENTRIES = 10_000_000


@dataclass(frozen=True)
class MomentTable:
    log_moment: float  # log(E[S_n^q] / S0^q)
    q: int
    n: int
    params: ModelParams

    @property
    def log_raw_moment(self) -> float:
        return self.log_moment + self.q * math.log(self.params.S0)


def _log_a(q: int, rho: float) -> np.ndarray:
    if q == 1:
        return np.zeros(1)
    lw = log_weights(q)
    return lw + 2.0 * np.arange(lw.size) * math.log(rho)


def _check_q(q) -> int:
    if int(q) != q or q < 1:
        raise DomainError(f"q must be a positive integer, got {q}")
    return int(q)


def moment_dp(q: int, p: ModelParams) -> MomentTable:
    """E[S_n^q] / S0^q by backward induction over the volatility Brownian motion."""
    q = _check_q(q)
    Q = q // 2
    if Q * p.n + 1 > MAX_ENTRIES:
        raise CapacityExceeded(f"coefficient layer of {Q * p.n + 1} entries exceeds {MAX_ENTRIES}")
    rho = p.sigma0 * math.sqrt(p.tau)
    la = _log_a(q, rho)
    m = np.arange(Q + 1)
    w2t = p.omega**2 * p.tau
    logB = np.zeros(1)
    for i in range(p.n - 1, -1, -1):
        j = np.arange(logB.size)
        cond = logB + 2.0 * j * j * w2t  # E[.|Z_i] of the next layer
        fac = la - m * w2t * i  # a_m exp(-m omega^2 t_i)
        terms = np.full((Q + 1, logB.size + Q), -np.inf)
        for mm in range(Q + 1):
            terms[mm, mm : mm + logB.size] = cond + fac[mm]
        logB = logsumexp(terms, axis=0)
    return MomentTable(log_moment=float(logsumexp(logB)), q=q, n=p.n, params=p)


def moment_bruteforce(q: int, p: ModelParams) -> float:
    """log(E[S_n^q] / S0^q) by enumerating all per-step moment indices.

    Each index vector (m_0..m_{n-1}) contributes
    prod a_{m_k} exp(-omega^2 tau sum_k k m_k + omega^2 tau / 2 sum_j c_j^2),
    c_j = sum_{k >= j} 2 m_k, the second factor being the Gaussian moment
    generating function of the volatility increments.
    """
    q = _check_q(q)
    if p.n > 8 or q > 6:
        raise CapacityExceeded("brute force is limited to n <= 8 and q <= 6")
    Q = q // 2
    rho = p.sigma0 * math.sqrt(p.tau)
    la = _log_a(q, rho)
    w2t = p.omega**2 * p.tau
    idx = np.array(list(itertools.product(range(Q + 1), repeat=p.n)), dtype=float)
    k = np.arange(p.n)
    c = np.cumsum((2.0 * idx)[:, ::-1], axis=1)[:, ::-1]  # c[:, j] = sum_{k>=j} 2 m_k
    mgf = 0.5 * w2t * np.sum(c[:, 1:] ** 2, axis=1)
    drift = -w2t * (idx @ k)
    logs = la[idx.astype(int)].sum(axis=1) + drift + mgf
    return float(logsumexp(logs))


def finite_lyapunov(q: int, p: ModelParams) -> float:
    """lambda_{q,n} = log(E[S_n^q] / S0^q) / n."""
    return moment_dp(q, p).log_moment / p.n


@dataclass(frozen=True)
class LnVol:
    finite: float
    asymptotic: float
    log_moment: float
    lambda_qn: float
    scaling: Scaling


def ln_equiv_vol(q: int, p: ModelParams, with_asymptotic: bool = True) -> LnVol:
    """Log-normal equivalent volatility of the q-th moment at t_n = n tau.

    finite: sqrt(2 log(E[S_n^q]/S0^q) / (q (q-1) t_n)) from the exact moment;
    asymptotic: sqrt(2 lambda(rho, beta; q) / (q (q-1) tau)).
    """
    q = _check_q(q)
    if q < 2:
        raise DomainError("ln_equiv_vol needs q >= 2")
    mt = moment_dp(q, p)
    s = scaling_from_market(p, q)
    fin = math.sqrt(2.0 * mt.log_moment / (q * (q - 1) * p.maturity))
    asym = float("nan")
    if with_asymptotic:
        from .lyapunov_euler import lyapunov

        lam = lyapunov(s.rho, s.beta, q).value
        asym = math.sqrt(2.0 * lam / (q * (q - 1) * p.tau))
    return LnVol(finite=fin, asymptotic=asym, log_moment=mt.log_moment, lambda_qn=mt.log_moment / p.n, scaling=s)


@dataclass(frozen=True)
class ExplosionThreshold:
    omega_cr: float
    rho: float
    beta_cr: float


def explosion_threshold(sigma0: float, tau: float, n: int, q: int = 2) -> ExplosionThreshold:
    """Vol-of-vol at which (rho, beta) crosses the transition curve beta_cr(rho)."""
    from .lyapunov_euler import critical_beta

    rho = sigma0 * math.sqrt(tau)
    b = critical_beta(rho, q).beta_cr
    return ExplosionThreshold(omega_cr=math.sqrt(2.0 * b / (n * n * tau)), rho=rho, beta_cr=b)


MOMENT_COLUMNS = ["q", "n", "omega", "sigma0", "tau", "rho", "beta", "log_moment", "lambda_qn", "sigma_ln"]


def moment_row(q: int, p: ModelParams) -> dict:
    mt = moment_dp(q, p)
    s = scaling_from_market(p, q)
    sig = math.sqrt(2.0 * mt.log_moment / (q * (q - 1) * p.maturity)) if q >= 2 else float("nan")
    return {
        "q": q, "n": p.n, "omega": p.omega, "sigma0": p.sigma0, "tau": p.tau,
        "rho": s.rho, "beta": s.beta, "log_moment": mt.log_moment,
        "lambda_qn": mt.log_moment / p.n, "sigma_ln": sig,
    }
