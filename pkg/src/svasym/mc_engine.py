"""Monte Carlo estimators with error bars for moments, LLN slopes and CLT variances.

All reductions run over per-path arrays in path order with exactly rounded
summation (math.fsum), so an estimate depends only on (seed, n_paths) and
never on the number of worker threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .limit_laws import clt_variance_euler, lln_euler, lln_lognormal
from .params import ModelParams, scaling_from_market
from .schemes import SchemeKind, TerminalSample, simulate_terminal

LOG_SPACE_GUARD = 1e300
JACKKNIFE_BLOCKS = 100
TAIL_TOP = 10
TAIL_SHARE = 0.5


class TailDominanceWarning(UserWarning):
    """A handful of paths carry most of a moment estimate; its error bar is unreliable."""


@dataclass(frozen=True)
class McConfig:
    n_paths: int
    seed: int = 0
    workers: int | None = None
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 2:
            raise DomainError("n_paths must be at least 2")
        if self.antithetic and self.n_paths % 2:
            raise DomainError("antithetic sampling needs an even n_paths")


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n_eff: int
    log_space: bool = False
    tail_dominated: bool = False
    n_excluded: int = 0


def _fsum_mean_se(y: np.ndarray) -> tuple[float, float]:
    n = y.size
    mean = math.fsum(y.tolist()) / n
    dev = y - mean
    var = math.fsum((dev * dev).tolist()) / (n - 1)
    return mean, math.sqrt(var / n)


def _pair_means(x: np.ndarray, antithetic: bool) -> np.ndarray:
    if not antithetic:
        return x
    return 0.5 * (x[0::2] + x[1::2])


def _simulate(kind, p, cfg: McConfig) -> TerminalSample:
    return simulate_terminal(kind, p, cfg.n_paths, cfg.seed, workers=cfg.workers, antithetic=cfg.antithetic)


def tail_share(values: np.ndarray, top: int = TAIL_TOP) -> float:
    a = np.abs(values)
    total = math.fsum(a.tolist())
    if total == 0 or not math.isfinite(total):
        return 1.0 if not math.isfinite(total) else 0.0
    k = min(top, a.size)
    big = np.sort(np.partition(a, a.size - k)[a.size - k :])
    return math.fsum(big.tolist()) / total


def estimate_moment(kind, q: float, p: ModelParams, cfg: McConfig) -> Estimate:
    """Mean of S_n^q with its standard error.

    Switches to log space (mean holds log E[S_n^q], std_error the relative
    error) once any path exceeds 1e300 in magnitude.
    """
    kind = SchemeKind.parse(kind)
    ts = _simulate(kind, p, cfg)
    qla = q * ts.log_abs
    if kind.log_asset or float(q).is_integer() and int(q) % 2 == 0:
        sgn = np.where(ts.sign == 0, 0.0, 1.0)
    elif float(q).is_integer():
        sgn = ts.sign
    else:
        raise DomainError("non-integer q needs a positive asset (log-Euler asset update)")
    peak = float(np.max(qla[sgn != 0])) if np.any(sgn != 0) else -np.inf
    log_space = peak > math.log(LOG_SPACE_GUARD)
    shift = peak if log_space else 0.0
    with np.errstate(under="ignore"):
        x = sgn * np.exp(qla - shift)
    dominated = tail_share(x) > TAIL_SHARE
    if dominated:
        warnings.warn(
            f"top {TAIL_TOP} paths carry more than {TAIL_SHARE:.0%} of the moment sum",
            TailDominanceWarning,
            stacklevel=2,
        )
    y = _pair_means(x, cfg.antithetic)
    mean, se = _fsum_mean_se(y)
    if log_space:
        return Estimate(mean=shift + math.log(mean), std_error=se / mean, n_eff=y.size,
                        log_space=True, tail_dominated=dominated)
    return Estimate(mean=mean, std_error=se, n_eff=y.size, tail_dominated=dominated)


def estimate_lln(kind, p: ModelParams, cfg: McConfig) -> Estimate:
    """Mean of log|S_n| / n over paths with S_n != 0."""
    kind = SchemeKind.parse(kind)
    ts = _simulate(kind, p, cfg)
    z = ts.log_abs / p.n
    ok = ts.sign != 0
    if cfg.antithetic:
        keep = ok[0::2] & ok[1::2]
        y = (0.5 * (z[0::2] + z[1::2]))[keep]
        excluded = int(2 * (keep.size - keep.sum()))
    else:
        y = z[ok]
        excluded = int((~ok).sum())
    mean, se = _fsum_mean_se(y)
    return Estimate(mean=mean, std_error=se, n_eff=y.size, n_excluded=excluded)


def default_slope(kind, p: ModelParams) -> float:
    kind = SchemeKind.parse(kind)
    rho = scaling_from_market(p).rho
    return lln_lognormal(rho) if kind.log_asset else lln_euler(rho)


def jackknife_variance(x: np.ndarray, blocks: int = JACKKNIFE_BLOCKS) -> tuple[float, float]:
    """Sample variance of x and its delete-one-block jackknife standard error.

    Blocks are contiguous runs in path order, so antithetic pairs stay together.
    """
    n = x.size
    if n < 2 * blocks:
        raise DomainError(f"need at least {2 * blocks} samples for {blocks} jackknife blocks")
    mean = math.fsum(x.tolist()) / n
    c = x - mean
    s1 = math.fsum(c.tolist())
    s2 = math.fsum((c * c).tolist())
    var = (s2 - s1 * s1 / n) / (n - 1)
    edges = np.linspace(0, n, blocks + 1).astype(int)
    edges -= edges % 2
    edges[-1] = n
    thetas = []
    for b in range(blocks):
        blk = c[edges[b] : edges[b + 1]]
        m = n - blk.size
        b1 = s1 - math.fsum(blk.tolist())
        b2 = s2 - math.fsum((blk * blk).tolist())
        thetas.append((b2 - b1 * b1 / m) / (m - 1))
    th = np.array(thetas)
    tbar = math.fsum(thetas) / blocks
    se = math.sqrt((blocks - 1) / blocks * math.fsum(((th - tbar) ** 2).tolist()))
    return var, se


def estimate_clt_variance(kind, p: ModelParams, cfg: McConfig, slope: float | None = None) -> Estimate:
    """Variance of (log|S_n| - slope n) / sqrt(n) with a jackknife standard error."""
    kind = SchemeKind.parse(kind)
    if slope is None:
        slope = default_slope(kind, p)
    ts = _simulate(kind, p, cfg)
    ok = ts.sign != 0
    x = (ts.log_abs[ok] - math.log(p.S0) - slope * p.n) / math.sqrt(p.n)
    var, se = jackknife_variance(x)
    return Estimate(mean=var, std_error=se, n_eff=x.size, n_excluded=int((~ok).sum()))


def clt_target(kind, p: ModelParams, variant: str = "log") -> float:
    from .limit_laws import clt_variance_lognormal

    kind = SchemeKind.parse(kind)
    s = scaling_from_market(p)
    if kind.log_asset:
        return clt_variance_lognormal(s.rho, s.beta)
    return clt_variance_euler(s.rho, s.beta, variant)


ESTIMATE_COLUMNS = ["estimator", "value", "std_error", "n_paths", "seed"]


def estimate_row(name: str, est: Estimate, cfg: McConfig) -> dict:
    return {"estimator": name, "value": est.mean, "std_error": est.std_error,
            "n_paths": cfg.n_paths, "seed": cfg.seed}
