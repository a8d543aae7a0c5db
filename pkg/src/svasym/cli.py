"""Command-line front end: every solver and reproduction target as a CSV-emitting subcommand.

Exit codes: 0 success, 2 configuration or domain error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .emit import write_csv
from .errors import CapacityExceeded, NoTransition, NonConvergent, UnknownTarget
from .exact_moments import MOMENT_COLUMNS, explosion_threshold, ln_equiv_vol, moment_row
from .limit_laws import limit_constants
from .lyapunov_euler import critical_point, default_rho_grid, lyapunov, phase_curve
from .lyapunov_lognormal import lyapunov_ln
from .mc_engine import (
    ESTIMATE_COLUMNS,
    McConfig,
    clt_target,
    default_slope,
    estimate_clt_variance,
    estimate_lln,
    estimate_moment,
    estimate_row,
)
from .params import ModelParams, scaling_from_market
from .reproduce import TARGETS, build
from .schemes import SchemeKind, dump_paths

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENT = 3

SCHEMES = [k.value for k in SchemeKind]
MARKET_DEFAULTS = {"S0": 1.0, "sigma0": None, "omega": None, "tau": None, "n": None, "corr": 0.0}


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    if isinstance(text, list):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _add_market(p: argparse.ArgumentParser, corr: bool = False) -> None:
    p.add_argument("--S0", type=float, help="initial asset price (default 1)")
    p.add_argument("--sigma0", type=float, help="initial volatility")
    p.add_argument("--omega", type=float, help="vol-of-vol")
    p.add_argument("--tau", type=float, help="time step")
    p.add_argument("--n", type=int, help="number of steps")
    if corr:
        p.add_argument("--corr", type=float, help="asset/vol noise correlation in [-1, 1] (default 0)")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="svasym", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON file with option values; flags override it")
        p.add_argument("--out", help="output CSV path (default stdout)")
        return p

    p = cmd("lyapunov", "moment Lyapunov exponent with branch diagnostics")
    p.add_argument("--scheme", choices=SCHEMES, help="default euler-log-euler")
    p.add_argument("--rho", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--q", type=float, help="moment order (default 2)")
    _add_market(p)

    p = cmd("phase-curve", "transition curve beta_cr(rho) and its critical point")
    p.add_argument("--q", type=int, help="moment order (default 2)")
    p.add_argument("--rho-grid", help="comma-separated rho values below rho_c")
    p.add_argument("--n-rho", type=int, help="size of the default rho grid (default 12)")

    p = cmd("exact-moments", "exact finite-n moments and log-normal equivalent vols")
    p.add_argument("--q", type=int, help="moment order (default 2)")
    p.add_argument("--omega-grid", help="comma-separated omega sweep replacing --omega")
    p.add_argument("--asymptotic", action="store_const", const=True,
                   help="also report the large-n log-normal equivalent vol")
    _add_market(p)

    p = cmd("simulate", "Monte Carlo estimates with error bars")
    p.add_argument("--scheme", choices=SCHEMES, help="default euler-log-euler")
    _add_market(p, corr=True)
    p.add_argument("--n-paths", type=int, help="number of paths (default 100000)")
    p.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p.add_argument("--workers", type=int, help="worker threads (default SVASYM_THREADS or cpu count)")
    p.add_argument("--antithetic", action="store_const", const=True, help="antithetic path pairs")
    p.add_argument("--estimators", help="comma list from moment,lln,clt (default moment,lln,clt)")
    p.add_argument("--moment-q", type=float, help="moment order for the moment estimator (default 1)")
    p.add_argument("--dump-paths", help="directory for per-path CSV traces")
    p.add_argument("--dump-count", type=int, help="number of traced paths (default 10)")

    p = cmd("limits", "LLN slope and CLT variance of log|S_n|")
    p.add_argument("--scheme", choices=SCHEMES, help="default euler-log-euler")
    p.add_argument("--rho", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--variant", choices=["log", "abs"], help="Euler-asset variance term (default log)")

    p = cmd("explosion-threshold", "vol-of-vol at which moments explode")
    p.add_argument("--sigma0", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=int, help="moment order (default 2)")

    p = cmd("reproduce", "data series behind a figure or table")
    p.add_argument("target", nargs="?", help=f"one of {', '.join(TARGETS)}")
    return ap


DEFAULTS = {
    "lyapunov": {"scheme": "euler-log-euler", "rho": None, "beta": None, "q": 2.0, **MARKET_DEFAULTS},
    "phase-curve": {"q": 2, "rho_grid": None, "n_rho": 12},
    "exact-moments": {"q": 2, "omega_grid": None, "asymptotic": False, **MARKET_DEFAULTS},
    "simulate": {"scheme": "euler-log-euler", **MARKET_DEFAULTS, "n_paths": 100_000, "seed": 0,
                 "workers": None, "antithetic": False, "estimators": "moment,lln,clt", "moment_q": 1.0,
                 "dump_paths": None, "dump_count": 10},
    "limits": {"scheme": "euler-log-euler", "rho": None, "beta": None, "variant": "log"},
    "explosion-threshold": {"sigma0": None, "tau": None, "n": None, "q": 2},
    "reproduce": {"target": None},
}
for _d in DEFAULTS.values():
    _d["out"] = None
del DEFAULTS["lyapunov"]["corr"], DEFAULTS["exact-moments"]["corr"]


def _resolve(args: argparse.Namespace) -> dict:
    """Merge built-in defaults, the --config document and explicit flags (in rising priority)."""
    defaults = DEFAULTS[args.command]
    merged = dict(defaults)
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        doc = {k.replace("-", "_"): v for k, v in doc.items()}
        unknown = sorted(set(doc) - set(defaults))
        if unknown:
            raise ConfigError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        merged.update(doc)
    for k in defaults:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    return merged


def _require(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _market(cfg: dict, corr: bool = False) -> ModelParams:
    _require(cfg, "sigma0", "omega", "tau", "n")
    return ModelParams(S0=float(cfg["S0"]), sigma0=float(cfg["sigma0"]), omega=float(cfg["omega"]),
                       tau=float(cfg["tau"]), n=int(cfg["n"]), corr=float(cfg.get("corr", 0.0)) if corr else 0.0)


def _rho_beta(cfg: dict) -> tuple[float, float]:
    if cfg.get("rho") is not None or cfg.get("beta") is not None:
        _require(cfg, "rho", "beta")
        return float(cfg["rho"]), float(cfg["beta"])
    s = scaling_from_market(_market(cfg))
    return s.rho, s.beta


def _cmd_lyapunov(cfg):
    kind = SchemeKind.parse(cfg["scheme"])
    rho, beta = _rho_beta(cfg)
    q = float(cfg["q"])
    row = {"scheme": kind.value, "rho": rho, "beta": beta, "q": q}
    if kind.log_asset:
        row.update({"lambda": float(lyapunov_ln(rho, beta, q)), "branch": "ClosedForm"})
    else:
        r = lyapunov(rho, beta, q)
        row.update({"lambda": r.value, "branch": r.branch, "h1": r.h1, "d_star": r.d_star,
                    "n_stationary": len(r.all_stationary_h1), "endpoint_flag": r.endpoint_flag})
    cols = ["scheme", "rho", "beta", "q", "lambda", "branch", "h1", "d_star", "n_stationary", "endpoint_flag"]
    return [row], cols, ()


def _cmd_phase_curve(cfg):
    q = int(cfg["q"])
    grid = _floats(cfg["rho_grid"]) if cfg["rho_grid"] is not None else None
    if grid is None:
        grid = default_rho_grid(critical_point(q).rho_c, n=int(cfg["n_rho"]))
    pc = phase_curve(q, grid)
    rows = [{"q": q, "rho": t.rho, "beta_cr": t.beta_cr, "inv_beta_cr": 1.0 / t.beta_cr,
             "h1_lower": t.h1_lower, "h1_upper": t.h1_upper, "d_lower": t.d_lower, "d_upper": t.d_upper}
            for t in pc.details]
    rc, bc = pc.critical_point
    footer = [f"critical_point rho_c={rc:.12g} beta_c={bc:.12g} inv_beta_c={1.0 / bc:.12g}"]
    cols = ["q", "rho", "beta_cr", "inv_beta_cr", "h1_lower", "h1_upper", "d_lower", "d_upper"]
    return rows, cols, footer


def _cmd_exact_moments(cfg):
    q = int(cfg["q"])
    omegas = _floats(cfg["omega_grid"]) if cfg["omega_grid"] is not None else None
    if omegas is None:
        _require(cfg, "omega")
        omegas = [float(cfg["omega"])]
    rows = []
    cols = list(MOMENT_COLUMNS)
    if cfg["asymptotic"]:
        cols.append("sigma_ln_asymptotic")
    for om in omegas:
        p = _market({**cfg, "omega": om})
        row = moment_row(q, p)
        if cfg["asymptotic"]:
            row["sigma_ln_asymptotic"] = ln_equiv_vol(q, p).asymptotic
        rows.append(row)
    return rows, cols, ()


def _cmd_simulate(cfg):
    kind = SchemeKind.parse(cfg["scheme"])
    p = _market(cfg, corr=True)
    mc = McConfig(n_paths=int(cfg["n_paths"]), seed=int(cfg["seed"]),
                  workers=None if cfg["workers"] is None else int(cfg["workers"]),
                  antithetic=bool(cfg["antithetic"]))
    names = [x.strip() for x in str(cfg["estimators"]).split(",") if x.strip()]
    bad = [x for x in names if x not in ("moment", "lln", "clt")]
    if bad:
        raise ConfigError(f"unknown estimator(s): {', '.join(bad)}")
    rows = []
    for name in names:
        if name == "moment":
            q = float(cfg["moment_q"])
            row = estimate_row(f"moment_q{q:g}", estimate_moment(kind, q, p, mc), mc)
            row["target"] = p.S0 if q == 1 else None
        elif name == "lln":
            row = estimate_row("lln", estimate_lln(kind, p, mc), mc)
            row["target"] = default_slope(kind, p)
        else:
            row = estimate_row("clt", estimate_clt_variance(kind, p, mc), mc)
            row["target"] = clt_target(kind, p)
        row["scheme"] = kind.value
        rows.append(row)
    if cfg["dump_paths"]:
        dump_paths(kind, p, int(cfg["seed"]), int(cfg["dump_count"]), cfg["dump_paths"])
    return rows, ["scheme", *ESTIMATE_COLUMNS, "target"], ()


def _cmd_limits(cfg):
    kind = SchemeKind.parse(cfg["scheme"])
    _require(cfg, "rho", "beta")
    rho, beta = float(cfg["rho"]), float(cfg["beta"])
    lc = limit_constants(kind, rho, beta, cfg["variant"])
    row = {"scheme": kind.value, "rho": rho, "beta": beta, "lln_slope": lc.lln_slope,
           "clt_variance": lc.clt_variance, "scheme_family": lc.scheme_family}
    return [row], ["scheme", "rho", "beta", "lln_slope", "clt_variance", "scheme_family"], ()


def _cmd_explosion(cfg):
    _require(cfg, "sigma0", "tau", "n")
    et = explosion_threshold(float(cfg["sigma0"]), float(cfg["tau"]), int(cfg["n"]), int(cfg["q"]))
    row = {"sigma0": cfg["sigma0"], "tau": cfg["tau"], "n": int(cfg["n"]), "q": int(cfg["q"]),
           "rho": et.rho, "beta_cr": et.beta_cr, "omega_cr": et.omega_cr}
    return [row], ["sigma0", "tau", "n", "q", "rho", "beta_cr", "omega_cr"], ()


def _cmd_reproduce(cfg):
    if cfg["target"] is None:
        raise ConfigError(f"reproduce needs a target: {', '.join(TARGETS)}")
    rows, cols = build(str(cfg["target"]))
    return rows, cols, ()


COMMANDS = {
    "lyapunov": _cmd_lyapunov,
    "phase-curve": _cmd_phase_curve,
    "exact-moments": _cmd_exact_moments,
    "simulate": _cmd_simulate,
    "limits": _cmd_limits,
    "explosion-threshold": _cmd_explosion,
    "reproduce": _cmd_reproduce,
}


def run(argv: list[str] | None = None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG
    try:
        cfg = _resolve(args)
        rows, cols, footer = COMMANDS[args.command](cfg)
        write_csv(rows, cols, cfg["out"], footer)
    except NonConvergent as e:
        print(f"svasym: numerical non-convergence: {e}", file=sys.stderr)
        return EXIT_NONCONVERGENT
    except (UnknownTarget, NoTransition, CapacityExceeded, ValueError, TypeError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"svasym: {type(e).__name__}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
