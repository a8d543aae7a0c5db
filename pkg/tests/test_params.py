import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svasym import DomainError, ModelParams, Scaling, market_from_scaling, scaling_from_market
from svasym.params import Regime, classify_regime


@pytest.mark.parametrize(
    "kw, rho, beta",
    [
        (dict(sigma0=1.0, tau=1.0, n=1, omega=0.0), 1.0, 0.0),
        (dict(sigma0=2.0, tau=0.25, n=10, omega=0.2), 1.0, 0.5),
        (dict(sigma0=0.2, tau=0.25, n=80, omega=0.0620), 0.1, 0.5 * 0.062**2 * 6400 * 0.25),
    ],
)
def test_scaling_examples(kw, rho, beta):
    s = scaling_from_market(ModelParams(S0=1.0, **kw))
    assert s.rho == pytest.approx(rho, rel=1e-14)
    assert s.beta == pytest.approx(beta, rel=1e-14, abs=0)


def test_scaling_worked_example_beta_near_3075():
    s = scaling_from_market(ModelParams(S0=1.0, sigma0=0.2, omega=0.0620, tau=0.25, n=80))
    assert s.beta == pytest.approx(3.075, abs=0.002)


def test_market_from_scaling_examples():
    p = market_from_scaling(Scaling(0.1, 3.075), n=80, tau=0.25)
    assert p.sigma0 == pytest.approx(0.2, rel=1e-14)
    assert p.omega == pytest.approx(0.0620, abs=1e-4)
    p = market_from_scaling(Scaling(1.0, 0.0), n=5, tau=1.0)
    assert p.sigma0 == 1.0 and p.omega == 0.0


@settings(max_examples=200, deadline=None)
@given(
    rho=st.floats(1e-4, 10.0),
    beta=st.floats(0.0, 100.0),
    n=st.integers(1, 10_000),
    tau=st.floats(1e-4, 10.0),
)
def test_round_trip(rho, beta, n, tau):
    s = scaling_from_market(market_from_scaling(Scaling(rho, beta), n, tau))
    assert s.rho == pytest.approx(rho, rel=1e-12)
    assert s.beta == pytest.approx(beta, rel=1e-12, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(omega=st.floats(1e-3, 2.0), n=st.integers(1, 500), k=st.integers(2, 20))
def test_beta_invariant_under_regime_one_rescaling(omega, n, k):
    a = scaling_from_market(ModelParams(1.0, 0.2, omega, 0.5, n))
    b = scaling_from_market(ModelParams(1.0, 0.2, omega / k, 0.5, k * n))
    assert b.beta == pytest.approx(a.beta, rel=1e-12)


@pytest.mark.parametrize(
    "kw",
    [
        dict(S0=0.0, sigma0=0.2, omega=0.1, tau=1.0, n=1),
        dict(S0=1.0, sigma0=0.0, omega=0.1, tau=1.0, n=1),
        dict(S0=1.0, sigma0=0.2, omega=-0.1, tau=1.0, n=1),
        dict(S0=1.0, sigma0=0.2, omega=0.1, tau=0.0, n=1),
        dict(S0=1.0, sigma0=0.2, omega=0.1, tau=1.0, n=0),
        dict(S0=1.0, sigma0=0.2, omega=0.1, tau=1.0, n=1, corr=1.5),
    ],
)
def test_model_params_validation(kw):
    with pytest.raises(DomainError):
        ModelParams(**kw)


def test_scaling_validation():
    with pytest.raises(DomainError):
        Scaling(0.0, 1.0)
    with pytest.raises(DomainError):
        Scaling(0.1, -1.0)


def test_json_round_trip():
    p = ModelParams(S0=2.0, sigma0=0.3, omega=0.1, tau=0.25, n=40, corr=-0.5)
    assert ModelParams.from_json(p.to_json()) == p
    s = Scaling(0.1, 2.0, 3)
    assert Scaling.from_json(s.to_json()) == s


def _sweep(f):
    return [f(n) for n in (10, 20, 40, 80)]


@pytest.mark.parametrize(
    "make, regime",
    [
        (lambda n: ModelParams(1.0, 0.2, 1.0 / n, 0.25, n), Regime.LargeMaturity),
        (lambda n: ModelParams(1.0, 0.2 * n, 0.3, 1.0 / n**2, n), Regime.SmallMaturity),
        (lambda n: ModelParams(1.0, 0.2 * math.sqrt(n), 0.3 / math.sqrt(n), 1.0 / n, n), Regime.FixedMaturity),
        (lambda n: ModelParams(1.0, 0.2, 0.3, 0.25, n), Regime.Other),
    ],
)
def test_classify_regime(make, regime):
    assert classify_regime(_sweep(make)) is regime


def test_classify_single_n_is_other():
    assert classify_regime([ModelParams(1.0, 0.2, 0.1, 0.25, 10)] * 3) is Regime.Other
