"""Quadrature, root bracketing and scan-and-refine maximization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NonConvergent

GAUSS_CUTOFF = 12.0
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_MAX_ACTIVE = 2_000_000


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_depth: int = 60

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise DomainError("max_depth must be at least 1")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError("bracket needs lo < hi")
        if np.sign(self.f_lo) == np.sign(self.f_hi):
            raise DomainError("bracket endpoints must have opposite signs")


def _vectorize(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap f so it maps a 1-d array to an array of the same shape.

    Integrands written with numpy are called once per batch; scalar-only
    callables fall back to a Python loop.
    """

    def g(x: np.ndarray) -> np.ndarray:
        try:
            y = np.asarray(f(x), dtype=float)
        except (TypeError, ValueError):
            y = np.array([f(float(xi)) for xi in x], dtype=float)
        if y.shape != x.shape:
            y = np.broadcast_to(y, x.shape).astype(float)
        return y

    return g


def integrate_adaptive(
    f: Callable,
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    panels: int = 4,
) -> float:
    """Adaptive Simpson quadrature of f over [a, b].

    Subintervals are refined breadth-first, so every level is one batched
    call of f.  A subinterval is accepted once the two-half Simpson sum
    differs from the whole-interval rule by at most 15 times its share of
    max(abs_tol, rel_tol*|I|); the accepted value includes the Richardson
    correction.  Raises NonConvergent when max_depth is exhausted.
    """
    a = float(a)
    b = float(b)
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b = b, a
        sign = -1.0
    g = _vectorize(f)
    width = b - a

    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    vals = g(np.concatenate([edges, mid]))
    fl, fh, fm = vals[:panels], vals[1 : panels + 1], vals[panels + 1 :]
    whole = (hi - lo) / 6.0 * (fl + 4.0 * fm + fh)

    accepted: list[float] = []
    for depth in range(spec.max_depth + 1):
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        k = lo.size
        v = g(np.concatenate([lm, rm]))
        flm, frm = v[:k], v[k:]
        left = (mid - lo) / 6.0 * (fl + 4.0 * flm + fm)
        right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fh)
        delta = left + right - whole

        estimate = math.fsum(accepted) + float(np.sum(left + right))
        scale = max(spec.abs_tol, spec.rel_tol * abs(estimate))
        ok = np.abs(delta) <= 15.0 * scale * (hi - lo) / width
        accepted.extend((left + right + delta / 15.0)[ok].tolist())
        if ok.all():
            return sign * math.fsum(accepted)

        bad = ~ok
        if depth == spec.max_depth or 2 * int(bad.sum()) > _MAX_ACTIVE:
            raise NonConvergent(
                f"adaptive Simpson did not converge on [{a}, {b}] "
                f"(depth {depth}, {int(bad.sum())} open subintervals)"
            )
        if np.any(lm[bad] <= lo[bad]) or np.any(rm[bad] >= hi[bad]):
            raise NonConvergent("subinterval width fell below floating point resolution")
        lo, mid, hi = (
            np.concatenate([lo[bad], mid[bad]]),
            np.concatenate([lm[bad], rm[bad]]),
            np.concatenate([mid[bad], hi[bad]]),
        )
        fl, fm, fh = (
            np.concatenate([fl[bad], fm[bad]]),
            np.concatenate([flm[bad], frm[bad]]),
            np.concatenate([fm[bad], fh[bad]]),
        )
        whole = np.concatenate([left[bad], right[bad]])
    raise NonConvergent("unreachable")  # pragma: no cover


def _normal_pdf(x):
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def gaussian_expectation(
    g: Callable,
    spec: QuadratureSpec = DEFAULT_SPEC,
    singularity: float | Iterable[float] | None = None,
) -> float:
    """E[g(Z)] for standard normal Z, truncated to |x| <= 12.

    The domain is split at each declared singular point.  Next to a
    singular point s the substitution x = s +/- u^4 turns a logarithmic
    singularity into a bounded integrand; where the substituted x rounds
    back onto s the Jacobian weight vanishes and the point contributes 0.
    """
    if singularity is None:
        sing: list[float] = []
    elif np.ndim(singularity) == 0:
        sing = [float(singularity)]
    else:
        sing = [float(s) for s in singularity]
    pts = sorted({s for s in sing if -GAUSS_CUTOFF < s < GAUSS_CUTOFF})
    gv = _vectorize(g)

    def plain(x):
        return gv(x) * _normal_pdf(x)

    def from_left(s):
        def h(u):
            x = s + u**4
            out = gv(x) * _normal_pdf(x) * 4.0 * u**3
            return np.where(x == s, 0.0, out)

        return h

    def from_right(s):
        def h(u):
            x = s - u**4
            out = gv(x) * _normal_pdf(x) * 4.0 * u**3
            return np.where(x == s, 0.0, out)

        return h

    edges = [-GAUSS_CUTOFF] + pts + [GAUSS_CUTOFF]
    parts = []
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for lo, hi in zip(edges[:-1], edges[1:]):
            lsing = lo in pts
            rsing = hi in pts
            if not (lsing or rsing):
                parts.append(integrate_adaptive(plain, lo, hi, spec))
                continue
            m = 0.5 * (lo + hi)
            if lsing:
                parts.append(integrate_adaptive(from_left(lo), 0.0, (m - lo) ** 0.25, spec))
            else:
                parts.append(integrate_adaptive(plain, lo, m, spec))
            if rsing:
                parts.append(integrate_adaptive(from_right(hi), 0.0, (hi - m) ** 0.25, spec))
            else:
                parts.append(integrate_adaptive(plain, m, hi, spec))
    return math.fsum(parts)


def roots_from_samples(
    f: Callable[[float], float],
    xs: Sequence[float],
    ys: Sequence[float],
    xtol: float = 1e-12,
) -> list[float]:
    """Refine every sign change of the sampled values ys = f(xs).

    Grid points where f is exactly zero are returned as roots.  A
    tangential root without a sign change is missed.
    """
    roots: list[float] = []
    n = len(xs)
    for i in range(n):
        if ys[i] == 0.0:
            roots.append(float(xs[i]))
            continue
        if i + 1 < n and ys[i + 1] != 0.0 and np.sign(ys[i]) != np.sign(ys[i + 1]):
            if not (np.isfinite(ys[i]) and np.isfinite(ys[i + 1])):
                continue
            roots.append(float(brentq(f, xs[i], xs[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)))
    return roots


def find_roots(f: Callable[[float], float], lo: float, hi: float, grid: int = 64) -> list[float]:
    """All sign-change roots of f on [lo, hi] found on a uniform grid.

    grid is the number of sample points, both endpoints included.  Each
    bracket is refined to 1e-12 in x.  Roots come back in ascending order.
    """
    if grid < 2:
        raise DomainError("grid must be at least 2")
    xs = np.linspace(lo, hi, grid)
    ys = [float(f(float(x))) for x in xs]
    return roots_from_samples(f, xs, ys)


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-10):
    """Golden-section search for a maximum of a unimodal f on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
        if c >= d:  # interval no longer resolvable in floating point
            break
    if fc >= fd:
        return c, fc
    return d, fd


def maximize_scan_refine(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    grid: int = 65,
    xtol: float = 1e-10,
) -> tuple[float, float]:
    """Grid scan plus golden-section refinement of the best grid point.

    Endpoint values compete with the refined interior candidate and ties
    go to the smaller argument.
    """
    if grid < 3:
        raise DomainError("grid must be at least 3")
    xs = np.linspace(lo, hi, grid)
    ys = np.array([float(f(float(x))) for x in xs])
    i = int(np.argmax(ys))
    cands = [(float(xs[j]), float(ys[j])) for j in range(grid)]
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, grid - 1)]
    cands.append(tuple(map(float, golden_max(f, a, b, xtol))))
    best = max(cands, key=lambda c: (c[1], -c[0]))
    return best
