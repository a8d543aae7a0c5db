"""Data series for the reference figures and the critical-point table."""

from __future__ import annotations

import math

import numpy as np

from .errors import UnknownTarget
from .exact_moments import ln_equiv_vol
from .lyapunov_euler import (
    bounds_and_asymptotics,
    critical_beta,
    critical_point,
    lyapunov,
    meanfield_phase,
)
from .lyapunov_lognormal import lambda_ab
from .params import ModelParams

TARGETS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "table1")


def _lambda_sweep(q, rhos, betas, bound_rho):
    rows = []
    for rho in rhos:
        for b in betas:
            r = lyapunov(rho, float(b), q)
            row = {"q": q, "rho": rho, "beta": float(b), "lambda": r.value,
                   "d_star": r.d_star, "branch": r.branch}
            if rho == bound_rho:
                bd = bounds_and_asymptotics(rho, float(b), q)
                row["lower"], row["upper"] = bd.lower, bd.upper
            rows.append(row)
    return rows


def fig1():
    rhos = [0.05, 0.1, 0.2, 0.3, 0.348, 0.4, 0.5]
    cols = ["q", "rho", "beta", "lambda", "d_star", "branch", "lower", "upper"]
    return _lambda_sweep(2, rhos, np.linspace(0.0, 6.0, 25), 0.05), cols


def fig2():
    rhos = [0.05, 0.1, 0.201, 0.3]
    cols = ["q", "rho", "beta", "lambda", "d_star", "branch", "lower", "upper"]
    return _lambda_sweep(3, rhos, np.linspace(0.0, 6.0, 25), 0.05), cols


def fig3():
    rows = []
    for b in (0.5, 1.0, 2.0, 4.0):
        for a in np.linspace(0.0, 4.0, 41):
            rows.append({"panel": "vs_a", "a": float(a), "b": b, "lambda": lambda_ab(float(a), b)})
    for a in (0.5, 1.0, 2.0, 4.0):
        for b in np.linspace(0.0, 10.0, 41):
            rows.append({"panel": "vs_b", "a": a, "b": float(b), "lambda": lambda_ab(a, float(b))})
    return rows, ["panel", "a", "b", "lambda"]


def table1():
    rows = []
    for q in range(2, 8):
        cp = critical_point(q)
        rows.append({"q": q, "rho_c": cp.rho_c, "beta_c": cp.beta_c, "inv_beta_c": cp.inv_beta_c})
    return rows, ["q", "rho_c", "beta_c", "inv_beta_c"]


def fig4(n_rho: int = 10):
    rows = []
    for q in range(2, 8):
        cp = critical_point(q)
        for rho in np.geomspace(0.01, 0.97 * cp.rho_c, n_rho):
            b = critical_beta(float(rho), q).beta_cr
            rows.append({"series": "exact", "q": q, "rho": float(rho), "beta_cr": b, "inv_beta_cr": 1.0 / b})
        rows.append({"series": "exact_critical", "q": q, "rho": cp.rho_c, "beta_cr": cp.beta_c,
                     "inv_beta_cr": cp.inv_beta_c})
    for q, rc in ((2, math.exp(-1.0)), (3, 1.0 / (math.sqrt(3.0) * math.e))):
        for rho in np.geomspace(0.01, rc, n_rho):
            b = meanfield_phase(q, float(rho))
            rows.append({"series": "meanfield", "q": q, "rho": float(rho), "beta_cr": b, "inv_beta_cr": 1.0 / b})
    return rows, ["series", "q", "rho", "beta_cr", "inv_beta_cr"]


def _sigma_rows(panel, q, sigma0, tau, n, omegas):
    rows = []
    for om in omegas:
        v = ln_equiv_vol(q, ModelParams(S0=1.0, sigma0=sigma0, omega=float(om), tau=tau, n=n))
        rows.append({"panel": panel, "q": q, "n": n, "sigma0": sigma0, "tau": tau, "omega": float(om),
                     "sigma_ln_finite": v.finite, "sigma_ln_asymptotic": v.asymptotic})
    return rows


SIGMA_COLUMNS = ["panel", "q", "n", "sigma0", "tau", "omega", "sigma_ln_finite", "sigma_ln_asymptotic"]


def fig5():
    rows = []
    for n in (10, 20, 40):
        rows += _sigma_rows("upper", 2, 0.2, 1.0 / n, n, np.linspace(0.0, 1.2, 31))
    for s0 in (0.05, 0.1, 0.2, 0.5):
        rows += _sigma_rows("lower", 2, s0, 0.25, 80, np.linspace(0.0, 0.1, 26))
    return rows, SIGMA_COLUMNS


def fig6():
    rows = []
    for q in (2, 3):
        rows += _sigma_rows("main", q, 0.2, 0.25, 40, np.linspace(0.0, 0.2, 41))
    return rows, SIGMA_COLUMNS


_BUILDERS = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6,
             "table1": table1}


def build(target: str):
    try:
        return _BUILDERS[target]()
    except KeyError:
        raise UnknownTarget(f"unknown target {target!r}; choose from {', '.join(TARGETS)}") from None
