"""The four Euler-Maruyama discretizations and a counter-based noise source.

Noise for step k of path i is a pure function of (seed, i, k): one
Philox4x32-10 block keyed by the seed, with counter (k, i_lo, i_hi, 0),
gives two uniforms and a Box-Muller pair (eps, v).  Paths can therefore be
produced in any order, by any number of threads, with identical results.
"""

from __future__ import annotations

import csv
import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numba as nb
import numpy as np

from .params import ModelParams

BLOCK_PATHS = 8192


class SchemeKind(enum.Enum):
    EulerLogEuler = "euler-log-euler"
    LogEulerLogEuler = "log-euler-log-euler"
    EulerEuler = "euler-euler"
    LogEulerEuler = "log-euler-euler"

    @property
    def log_asset(self) -> bool:
        return self in (SchemeKind.LogEulerLogEuler, SchemeKind.LogEulerEuler)

    @property
    def log_vol(self) -> bool:
        return self in (SchemeKind.EulerLogEuler, SchemeKind.LogEulerLogEuler)

    @classmethod
    def parse(cls, name) -> "SchemeKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for k in cls:
            if key in (k.value, k.name.lower()):
                return k
        raise ValueError(f"unknown scheme {name!r}; expected one of {[k.value for k in cls]}")


@dataclass(frozen=True)
class PathState:
    s: float
    sigma: float
    step_index: int = 0


@dataclass(frozen=True)
class NoisePair:
    eps: float
    v: float

    def effective_eps(self, corr: float) -> float:
        return corr * self.v + math.sqrt(max(0.0, 1.0 - corr * corr)) * self.eps


def step(kind: SchemeKind, st: PathState, noise: NoisePair, p: ModelParams) -> PathState:
    """Advance one time step.  The asset update uses the pre-update sigma."""
    sqt = math.sqrt(p.tau)
    e = noise.effective_eps(p.corr)
    if kind.log_asset:
        s = st.s * math.exp(st.sigma * sqt * e - 0.5 * st.sigma**2 * p.tau)
    else:
        s = st.s * (1.0 + st.sigma * sqt * e)
    if kind.log_vol:
        sig = st.sigma * math.exp(p.omega * sqt * noise.v - 0.5 * p.omega**2 * p.tau)
    else:
        sig = st.sigma * (1.0 + p.omega * sqt * noise.v)
    return PathState(s=s, sigma=sig, step_index=st.step_index + 1)


# ---------------------------------------------------------------- Philox4x32-10

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)


@nb.njit(cache=True, nogil=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten-round Philox4x32 block; all arguments and results are uint64 < 2^32."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _S32
        lo0 = p0 & _MASK
        hi1 = p1 >> _S32
        lo1 = p1 & _MASK
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = (k0 + _W0) & _MASK
        k1 = (k1 + _W1) & _MASK
    return c0, c1, c2, c3


@nb.njit(cache=True, nogil=True)
def _gauss_pair(seed, path, k):
    s = np.uint64(seed)
    i = np.uint64(path)
    x0, x1, x2, x3 = philox4x32(
        np.uint64(k) & _MASK, i & _MASK, i >> _S32, np.uint64(0), s & _MASK, s >> _S32
    )
    # 53-bit uniforms; u1 in (0, 1] keeps the logarithm finite
    u1 = 1.0 - ((x0 >> np.uint64(5)) * 67108864.0 + (x1 >> np.uint64(6))) / 9007199254740992.0
    u2 = ((x2 >> np.uint64(5)) * 67108864.0 + (x3 >> np.uint64(6))) / 9007199254740992.0
    r = math.sqrt(-2.0 * math.log(u1))
    a = 2.0 * math.pi * u2
    return r * math.cos(a), r * math.sin(a)


def gaussian_pair(seed: int, path_index: int, k: int) -> NoisePair:
    eps, v = _gauss_pair(seed, path_index, k)
    return NoisePair(eps=float(eps), v=float(v))


def gaussian_pair_stream(seed: int, path_index: int) -> Iterator[NoisePair]:
    """Deterministic, unbounded sequence of noise pairs for one path."""
    k = 0
    while True:
        yield gaussian_pair(seed, path_index, k)
        k += 1


@nb.njit(cache=True, nogil=True)
def _fill_pairs(seed, path, n, out):
    for k in range(n):
        e, v = _gauss_pair(seed, path, k)
        out[k, 0] = e
        out[k, 1] = v


def gaussian_pairs(seed: int, path_index: int, n: int) -> np.ndarray:
    """First n pairs of a path as an (n, 2) array of (eps, v)."""
    out = np.empty((n, 2))
    _fill_pairs(seed, path_index, n, out)
    return out


# ---------------------------------------------------------------- path kernel

_KIND_CODE = {
    SchemeKind.EulerLogEuler: 0,
    SchemeKind.LogEulerLogEuler: 1,
    SchemeKind.EulerEuler: 2,
    SchemeKind.LogEulerEuler: 3,
}


@nb.njit(cache=True, nogil=True)
def _simulate_block(code, S0, sigma0, omega, tau, n, corr, seed, start, stop, antithetic, logabs, sign):
    sqt = math.sqrt(tau)
    cperp = math.sqrt(max(0.0, 1.0 - corr * corr))
    log_asset = code == 1 or code == 3
    log_vol = code == 0 or code == 1
    vdrift = -0.5 * omega * omega * tau
    for i in range(start, stop):
        src = i
        flip = 1.0
        if antithetic and (i % 2 == 1):
            src = i - 1
            flip = -1.0
        la = math.log(S0)
        sg = 1.0
        sig = sigma0
        for k in range(n):
            e0, v = _gauss_pair(seed, src, k)
            e0 *= flip
            v *= flip
            e = corr * v + cperp * e0
            if log_asset:
                la += sig * sqt * e - 0.5 * sig * sig * tau
            else:
                fac = 1.0 + sig * sqt * e
                if fac < 0.0:
                    sg = -sg
                    fac = -fac
                if fac == 0.0:
                    la = -np.inf
                    sg = 0.0
                else:
                    la += math.log(fac)
            if log_vol:
                sig *= math.exp(omega * sqt * v + vdrift)
            else:
                sig *= 1.0 + omega * sqt * v
        logabs[i - start] = la
        sign[i - start] = sg


def default_workers() -> int:
    env = os.environ.get("SVASYM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True)
class TerminalSample:
    """Per-path terminal values in path order.

    log_abs is log|S_n| (-inf with sign 0 on the measure-zero event S_n = 0).
    """

    log_abs: np.ndarray
    sign: np.ndarray

    @property
    def s(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return self.sign * np.exp(self.log_abs)

    @property
    def zero_mask(self) -> np.ndarray:
        return self.sign == 0.0


def simulate_terminal(
    kind: SchemeKind,
    p: ModelParams,
    n_paths: int,
    seed: int,
    workers: int | None = None,
    antithetic: bool = False,
) -> TerminalSample:
    """Terminal values of n_paths independent paths.

    Path i draws its noise from (seed, i) only.  With antithetic set, odd
    path 2m+1 reuses the noise of path 2m with both signs flipped.  Blocks
    of paths are fanned out to a thread pool; output is independent of the
    worker count.
    """
    kind = SchemeKind.parse(kind)
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    workers = default_workers() if workers is None else max(1, int(workers))
    logabs = np.empty(n_paths)
    sign = np.empty(n_paths)
    code = _KIND_CODE[kind]
    starts = list(range(0, n_paths, BLOCK_PATHS))

    def run(start):
        stop = min(start + BLOCK_PATHS, n_paths)
        _simulate_block(
            code, p.S0, p.sigma0, p.omega, p.tau, p.n, p.corr, seed, start, stop,
            antithetic, logabs[start:stop], sign[start:stop],
        )

    if workers == 1 or len(starts) == 1:
        for st in starts:
            run(st)
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(run, starts))
    return TerminalSample(log_abs=logabs, sign=sign)


def simulate_path(kind: SchemeKind, p: ModelParams, seed: int, path_index: int) -> list[PathState]:
    """Full trajectory of one path through the pure-Python step()."""
    kind = SchemeKind.parse(kind)
    st = PathState(s=p.S0, sigma=p.sigma0, step_index=0)
    out = [st]
    for noise, _ in zip(gaussian_pair_stream(seed, path_index), range(p.n)):
        st = step(kind, st, noise, p)
        out.append(st)
    return out


def dump_paths(kind: SchemeKind, p: ModelParams, seed: int, n_paths: int, directory) -> list[Path]:
    """Write one CSV per path with columns step,s,sigma."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = []
    for i in range(n_paths):
        fn = d / f"path_{i:06d}.csv"
        with fn.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "s", "sigma"])
            for st in simulate_path(kind, p, seed, i):
                w.writerow([st.step_index, f"{st.s:.12g}", f"{st.sigma:.12g}"])
        files.append(fn)
    return files
