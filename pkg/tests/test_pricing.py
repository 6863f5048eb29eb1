import math

import numpy as np
import pytest

from derexpo import (
    MarketEnv,
    Payoff,
    Portfolio,
    ReturnModel,
    ValuationPair,
    VarianceBelief,
    instrument_value,
    payoff_matrix,
    payoff_value,
    portfolio_values,
    price_density_grid,
    valuation_difference,
    value_instruments,
)
from oracles import black_scholes_call


def test_payoff_intrinsic_values():
    assert payoff_value(Payoff.call(1.0), 1.2) == pytest.approx(0.2)
    assert payoff_value(Payoff.put(0.8), 1.0) == 0.0
    assert payoff_value(Payoff.put(1.0), 0.75) == 0.25
    assert payoff_value(Payoff.cash(), 17.0) == 1.0
    assert payoff_value(Payoff.forward(), 0.93) == 0.93


def test_payoff_vectorized():
    x = np.array([0.5, 1.0, 1.5])
    np.testing.assert_allclose(payoff_value(Payoff.call(1.0), x), [0.0, 0.0, 0.5])
    np.testing.assert_allclose(payoff_value(Payoff.put(1.0), x), [0.5, 0.0, 0.0])


def test_piecewise_linear_payoff():
    # a butterfly-like profile with flat extrapolation
    profile = Payoff.piecewise([(0.9, 0.0), (1.0, 0.1), (1.1, 0.0)])
    x = np.array([0.5, 0.95, 1.0, 1.05, 1.3])
    np.testing.assert_allclose(payoff_value(profile, x), [0.0, 0.05, 0.1, 0.05, 0.0])

    sloped = Payoff.piecewise([(1.0, 0.0)], left_slope=-1.0, right_slope=1.0)
    np.testing.assert_allclose(payoff_value(sloped, np.array([0.8, 1.0, 1.25])), [0.2, 0.0, 0.25])


def test_payoff_validation():
    with pytest.raises(ValueError):
        Payoff("swaption")
    with pytest.raises(ValueError):
        Payoff.call(0.0)
    with pytest.raises(ValueError):
        Payoff.put(-1.0)
    with pytest.raises(ValueError):
        Payoff.piecewise([(1.0, 0.0), (0.9, 0.1)])
    with pytest.raises(ValueError):
        Payoff("cash", strike=1.0)


def test_payoff_labels():
    assert Payoff.call(1.0).label == "call@1"
    assert Payoff.put(0.8).label == "put@0.8"
    assert Payoff.cash().label == "cash"


def test_market_env_validation():
    env = MarketEnv(r=0.03, t=2.0)
    assert np.isclose(env.discount, math.exp(-0.06), rtol=1e-15)
    assert np.isclose(env.growth * env.discount, 1.0, rtol=1e-15)
    with pytest.raises(ValueError):
        MarketEnv(r=0.03, t=0.0)
    with pytest.raises(ValueError):
        MarketEnv(r=math.inf, t=1.0)


def test_cash_value_is_discount_factor(env, implied_density):
    value = instrument_value(implied_density, Payoff.cash(), env)
    assert np.isclose(value, env.discount, rtol=0, atol=1e-8)


def test_forward_value_is_discounted_mean(env, subjective_model, subjective_density):
    value = instrument_value(subjective_density, Payoff.forward(), env)
    assert np.isclose(value, env.discount * subjective_model.mu, rtol=0, atol=1e-6)


def test_call_value_matches_black_scholes():
    r, t = 0.05, 1.0
    total_var = 0.04
    model = ReturnModel(mu=math.exp(r * t), belief=VarianceBelief(alpha=total_var, beta=0.0))
    density = price_density_grid(model)
    env = MarketEnv(r=r, t=t)
    got = instrument_value(density, Payoff.call(1.0), env)
    want = black_scholes_call(1.0, total_var, r, t)
    assert np.isclose(got, want, rtol=0, atol=1e-6)


def test_put_call_parity(env, subjective_model, subjective_density):
    for strike in (0.8, 0.9, 1.0, 1.1, 1.2):
        call = instrument_value(subjective_density, Payoff.call(strike), env)
        put = instrument_value(subjective_density, Payoff.put(strike), env)
        want = env.discount * (subjective_model.mu - strike)
        assert np.isclose(call - put, want, rtol=0, atol=1e-6)


def test_call_put_strike_monotonicity(env, subjective_density):
    strikes = np.linspace(0.6, 1.4, 17)
    calls = [instrument_value(subjective_density, Payoff.call(k), env) for k in strikes]
    puts = [instrument_value(subjective_density, Payoff.put(k), env) for k in strikes]
    assert np.all(np.diff(calls) <= 1e-12)
    assert np.all(np.diff(puts) >= -1e-12)


def test_payoff_matrix_shape(subjective_density, payoffs_3):
    mat = payoff_matrix(payoffs_3, subjective_density.nodes)
    assert mat.shape == (3, subjective_density.nodes.size)
    np.testing.assert_array_equal(mat[1], payoff_value(payoffs_3[1], subjective_density.nodes))


def test_portfolio_validation():
    with pytest.raises(ValueError):
        Portfolio(np.array([[1.0, 2.0]]))
    with pytest.raises(ValueError):
        Portfolio(np.array([np.nan]))
    p = Portfolio([1.0, -2.0])
    assert len(p) == 2
    with pytest.raises(ValueError):
        p.quantities[0] = 5.0  # frozen


def test_portfolio_values_arithmetic():
    vals = [ValuationPair(0.10, 0.12), ValuationPair(0.05, 0.04)]
    market, subjective = portfolio_values(vals, [2.0, -1.0])
    assert market == pytest.approx(0.15)
    assert subjective == pytest.approx(0.20)

    market, subjective = portfolio_values(vals, [0.0, 0.0])
    assert market == 0.0
    assert subjective == 0.0


def test_portfolio_values_linearity():
    vals = [ValuationPair(0.10, 0.12), ValuationPair(0.05, 0.04)]
    m1, s1 = portfolio_values(vals, [1.5, -0.5])
    m2, s2 = portfolio_values(vals, [3.0, -1.0])
    assert np.isclose(m2, 2 * m1, rtol=1e-14)
    assert np.isclose(s2, 2 * s1, rtol=1e-14)


def test_portfolio_values_length_mismatch():
    with pytest.raises(ValueError):
        portfolio_values([ValuationPair(0.1, 0.1)], [1.0, 2.0])


def test_valuation_difference_arithmetic():
    vals = [ValuationPair(0.10, 0.12)]
    assert valuation_difference(vals, [1.0]) == pytest.approx(0.02)
    assert valuation_difference(vals, [-1.0]) == pytest.approx(-0.02)


def test_valuation_difference_vanishes_for_identical_densities(implied_density, env, payoffs_2):
    vals = value_instruments(implied_density, implied_density, payoffs_2, env)
    rng = np.random.default_rng(7)
    for _ in range(20):
        q = rng.normal(size=2) * 3
        assert valuation_difference(vals, q) == 0.0


def test_valuation_difference_exactly_linear(implied_density, subjective_density, env, payoffs_2):
    vals = value_instruments(implied_density, subjective_density, payoffs_2, env)
    rng = np.random.default_rng(11)
    for _ in range(20):
        n, m = rng.normal(size=2), rng.normal(size=2)
        a, b = rng.normal(size=2)
        lhs = valuation_difference(vals, a * n + b * m)
        rhs = a * valuation_difference(vals, n) + b * valuation_difference(vals, m)
        assert np.isclose(lhs, rhs, rtol=1e-12, atol=1e-15)


def test_value_instruments_pairs(implied_density, subjective_density, env, payoffs_2):
    vals = value_instruments(implied_density, subjective_density, payoffs_2, env)
    assert len(vals) == 2
    for payoff, pair in zip(payoffs_2, vals):
        assert pair.market_value == instrument_value(implied_density, payoff, env)
        assert pair.subjective_value == instrument_value(subjective_density, payoff, env)
        assert pair.edge == pair.subjective_value - pair.market_value
