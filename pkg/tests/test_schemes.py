import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from svasym import ModelParams, SchemeKind
from svasym.emit import read_csv
from svasym.exact_moments import moment_dp
from svasym.schemes import (
    NoisePair,
    PathState,
    dump_paths,
    gaussian_pair,
    gaussian_pair_stream,
    gaussian_pairs,
    philox4x32,
    simulate_path,
    simulate_terminal,
    step,
)

U = np.uint64


@pytest.mark.parametrize(
    "ctr, key, want",
    [
        # Random123 known-answer vectors for philox4x32-10
        ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
        ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
        (
            (0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344),
            (0xA4093822, 0x299F31D0),
            (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1),
        ),
    ],
)
def test_philox_known_answers(ctr, key, want):
    got = philox4x32(*(U(c) for c in ctr), *(U(k) for k in key))
    assert tuple(int(x) for x in got) == want


def test_scheme_names_round_trip():
    for k in SchemeKind:
        assert SchemeKind.parse(k.value) is k
        assert SchemeKind.parse(k.name) is k
    with pytest.raises(ValueError):
        SchemeKind.parse("milstein")


def _p(**kw):
    base = dict(S0=1.0, sigma0=0.2, omega=0.0, tau=0.25, n=10)
    base.update(kw)
    return ModelParams(**base)


def test_step_examples():
    st0 = PathState(1.0, 0.2)
    out = step(SchemeKind.EulerLogEuler, st0, NoisePair(0.0, 0.0), _p())
    assert (out.s, out.sigma, out.step_index) == (1.0, 0.2, 1)
    out = step(SchemeKind.LogEulerLogEuler, st0, NoisePair(1.0, 0.0), _p())
    assert out.s == pytest.approx(math.exp(0.1 - 0.005), rel=1e-15)
    out = step(SchemeKind.EulerEuler, PathState(1.0, 1.0), NoisePair(0.0, -1.0), _p(omega=0.2, sigma0=1.0))
    assert out.sigma == pytest.approx(0.9, rel=1e-15)


def test_effective_eps():
    n = NoisePair(0.3, -1.2)
    assert n.effective_eps(1.0) == -1.2
    assert n.effective_eps(-1.0) == 1.2
    assert n.effective_eps(0.0) == 0.3


def test_stream_deterministic_and_indexed():
    a = list(zip(gaussian_pair_stream(5, 17), range(6)))
    b = [gaussian_pair(5, 17, k) for k in range(6)]
    assert [x for x, _ in a] == b
    assert np.array_equal(gaussian_pairs(5, 17, 6), np.array([[x.eps, x.v] for x in b]))
    assert gaussian_pair(5, 17, 0) != gaussian_pair(6, 17, 0)
    assert gaussian_pair(5, 17, 0) != gaussian_pair(5, 18, 0)


def test_gaussian_draws_mean_and_normality():
    z = gaussian_pairs(2024, 3, 500_000)
    v = z[:, 1]
    assert abs(v.mean()) < 4 / math.sqrt(v.size)
    assert abs(z[:, 0].var() - 1.0) < 5 * math.sqrt(2.0 / z.shape[0])
    assert abs(np.corrcoef(z[:, 0], z[:, 1])[0, 1]) < 4 / math.sqrt(z.shape[0])
    # chi-square goodness of fit on 50 equiprobable bins
    edges = stats.norm.ppf(np.linspace(0, 1, 51))
    counts, _ = np.histogram(z.ravel(), bins=edges)
    _, pval = stats.chisquare(counts)
    assert pval > 1e-4


def test_gaussian_draws_across_paths_independent():
    z = np.array([gaussian_pairs(1, i, 1)[0] for i in range(20_000)])
    assert abs(np.corrcoef(z[:-1, 1], z[1:, 1])[0, 1]) < 4 / math.sqrt(z.shape[0])


@pytest.mark.parametrize("kind", list(SchemeKind))
@pytest.mark.parametrize("corr", [-0.6, 0.0, 1.0])
def test_kernel_matches_python_steps(kind, corr):
    p = _p(omega=0.3, corr=corr, n=25)
    ts = simulate_terminal(kind, p, 40, seed=9, workers=1)
    for i in range(40):
        s = simulate_path(kind, p, 9, i)[-1].s
        assert ts.s[i] == pytest.approx(s, rel=1e-12)


def test_log_vol_path_is_exact_lognormal():
    p = _p(omega=0.4, n=30)
    path = simulate_path(SchemeKind.LogEulerLogEuler, p, 3, 0)
    z = np.cumsum(gaussian_pairs(3, 0, 30)[:, 1]) * math.sqrt(p.tau)
    t = p.tau * np.arange(1, 31)
    want = p.sigma0 * np.exp(p.omega * z - 0.5 * p.omega**2 * t)
    assert np.allclose([x.sigma for x in path[1:]], want, rtol=1e-12)


@pytest.mark.parametrize("kind", [SchemeKind.LogEulerLogEuler, SchemeKind.LogEulerEuler])
def test_log_asset_positive(kind):
    ts = simulate_terminal(kind, _p(sigma0=3.0, omega=1.0, n=50), 5000, seed=1)
    assert np.all(ts.sign == 1.0)


def test_zero_vol_of_vol_is_gbm():
    p = _p(n=20)
    ts = simulate_terminal(SchemeKind.LogEulerLogEuler, p, 100_000, seed=11)
    rho2 = p.sigma0**2 * p.tau
    se = ts.log_abs.std(ddof=1) / math.sqrt(ts.log_abs.size)
    assert abs(ts.log_abs.mean() - (-0.5 * rho2 * p.n)) < 3 * se


def test_one_step_martingale():
    ts = simulate_terminal(SchemeKind.EulerLogEuler, _p(n=1, omega=0.5), 200_000, seed=4)
    s = ts.s
    assert abs(s.mean() - 1.0) < 3 * s.std(ddof=1) / math.sqrt(s.size)


def test_two_step_second_moment_matches_exact():
    p = _p(n=2, omega=0.3)
    s2 = simulate_terminal(SchemeKind.EulerLogEuler, p, 400_000, seed=8).s ** 2
    exact = math.exp(moment_dp(2, p).log_moment)
    assert abs(s2.mean() - exact) < 3 * s2.std(ddof=1) / math.sqrt(s2.size)


def test_worker_count_invariance():
    p = _p(omega=0.3, n=15, corr=0.4)
    a = simulate_terminal(SchemeKind.EulerEuler, p, 30_000, seed=2, workers=1)
    b = simulate_terminal(SchemeKind.EulerEuler, p, 30_000, seed=2, workers=7)
    assert np.array_equal(a.log_abs, b.log_abs) and np.array_equal(a.sign, b.sign)


def test_antithetic_pairs_mirror_noise():
    p = _p(omega=0.0, n=1)
    ts = simulate_terminal(SchemeKind.EulerLogEuler, p, 10, seed=5, antithetic=True)
    # one Euler step with constant vol: S-1 flips sign between partners
    assert np.allclose(ts.s[0::2] - 1.0, -(ts.s[1::2] - 1.0), atol=1e-15)
    plain = simulate_terminal(SchemeKind.EulerLogEuler, p, 10, seed=5)
    assert np.array_equal(ts.s[0::2], plain.s[0::2])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**63 - 1), path=st.integers(0, 2**40))
def test_pairs_finite_for_any_counter(seed, path):
    z = gaussian_pairs(seed, path, 4)
    assert np.all(np.isfinite(z))


def test_dump_paths(tmp_path):
    p = _p(omega=0.2, n=5)
    files = dump_paths(SchemeKind.EulerEuler, p, 3, 2, tmp_path)
    rows, _ = read_csv(files[1])
    assert [int(r["step"]) for r in rows] == list(range(6))
    assert float(rows[-1]["s"]) == pytest.approx(simulate_path(SchemeKind.EulerEuler, p, 3, 1)[-1].s, rel=1e-11)
