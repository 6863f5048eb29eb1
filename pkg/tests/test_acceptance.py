"""End-to-end acceptance checks.

Each test pins one behavioural guarantee of the package at its stated
tolerance, against independent references (closed forms, brute force
enumeration, Monte Carlo). These are intentionally heavier than the
unit tests; the whole module still runs in well under two minutes.
"""

import itertools
import math
import time

import numpy as np
import pytest

from derexpo import (
    DEFAULT_QUADRATURE,
    Direction,
    ExposureProblem,
    LossModel,
    MarketEnv,
    Payoff,
    QuadratureSpec,
    ReturnModel,
    RiskConstraint,
    VarianceBelief,
    analytic_logreturn_stats,
    exposure_from_unit_risks,
    instrument_value,
    marginal_logreturn_pdf,
    price_density_grid,
    risk_measure,
    scan,
    to_cartesian,
)
from derexpo.cli import load_scenario, build_problem
from oracles import (
    black_scholes_call,
    black_scholes_put,
    oracle_azimuth_grid,
    oracle_polar_grid,
    sample_prices,
    scan_oracle,
)


def test_logreturn_moments_match_closed_forms():
    """Numeric mean/second central moment of the log-return density match
    the closed forms within 1e-6 across a 36-point parameter grid, fast."""
    start = time.perf_counter()
    worst_mean, worst_var = 0.0, 0.0
    for mu, alpha, beta in itertools.product(
        (0.9, 1.0, 1.1), (0.01, 0.04, 0.09), (0.0, 0.1, 0.3, 0.6)
    ):
        model = ReturnModel(mu=mu, belief=VarianceBelief(alpha=alpha, beta=beta))
        lam, xi = analytic_logreturn_stats(model)
        l = np.linspace(lam - 14.0 * math.sqrt(xi), lam + 14.0 * math.sqrt(xi), 8001)
        pdf = marginal_logreturn_pdf(l, model, DEFAULT_QUADRATURE)
        mean = np.trapezoid(l * pdf, l)
        var = np.trapezoid((l - mean) ** 2 * pdf, l)
        worst_mean = max(worst_mean, abs(mean - lam))
        worst_var = max(worst_var, abs(var - xi))
        assert abs(mean - lam) < 1e-6
        assert abs(var - xi) < 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    print(f"moments PASS: |mean err| <= {worst_mean:.2e}, |var err| <= {worst_var:.2e}, {elapsed:.2f}s")


def test_fixed_variance_limit_is_black_scholes():
    """With a point variance belief and mu = e^{rt}, option values reproduce
    the closed-form benchmark within 1e-6."""
    r, t = 0.03, 1.0
    env = MarketEnv(r=r, t=t)
    quad = QuadratureSpec(log_return_nodes=20001, log_return_halfwidth=12.0)
    worst = 0.0
    for total_var in (0.01, 0.04):
        model = ReturnModel(mu=math.exp(r * t), belief=VarianceBelief(alpha=total_var))
        grid = price_density_grid(model, quad)
        for strike in (0.8, 0.9, 1.0, 1.1, 1.2):
            vc = instrument_value(grid, Payoff.call(strike), env)
            vp = instrument_value(grid, Payoff.put(strike), env)
            ec = abs(vc - black_scholes_call(strike, total_var, r, t))
            ep = abs(vp - black_scholes_put(strike, total_var, r, t))
            worst = max(worst, ec, ep)
            assert ec < 1e-6
            assert ep < 1e-6
    print(f"pricing limit PASS: max |BS error| = {worst:.2e}")


def test_put_call_parity_both_belief_widths():
    """Call minus put equals the discounted forward difference within 1e-6,
    with and without variance uncertainty."""
    env = MarketEnv(r=0.03, t=1.0)
    mu = 1.1
    worst = 0.0
    for beta in (0.0, 0.3):
        model = ReturnModel(mu=mu, belief=VarianceBelief(alpha=0.04, beta=beta))
        grid = price_density_grid(model, DEFAULT_QUADRATURE)
        for strike in (0.8, 0.9, 1.0, 1.1, 1.2):
            vc = instrument_value(grid, Payoff.call(strike), env)
            vp = instrument_value(grid, Payoff.put(strike), env)
            gap = abs(vc - vp - env.discount * (mu - strike))
            worst = max(worst, gap)
            assert gap < 1e-6
    print(f"parity PASS: max parity gap = {worst:.2e}")


def test_risk_measures_scale_homogeneously(implied_density, subjective_density, payoffs_3, env):
    """rho_j(lambda q) = lambda^j rho_j(q) to 1e-9 relative for j >= 1 and
    exactly for j = 0, over random portfolios."""
    model = LossModel.from_implied(implied_density, subjective_density, payoffs_3, env)
    rng = np.random.default_rng(404)
    for _ in range(100):
        q = rng.normal(scale=2.0, size=3)
        base = {j: risk_measure(j, q, model) for j in range(4)}
        for lam in (0.5, 2.0, 7.0):
            scaled_q = lam * q
            assert risk_measure(0, scaled_q, model) == base[0]
            for j in (1, 2, 3):
                assert np.isclose(
                    risk_measure(j, scaled_q, model), lam**j * base[j], rtol=1e-9, atol=0
                )
    print("homogeneity PASS: holds on 100 random portfolios")


def test_radial_bound_exact_reference_values():
    """The radial bound reproduces hand-computed values exactly and the
    probability gate rejects infeasible directions."""
    fe = exposure_from_unit_risks([0.05], (RiskConstraint(order=1, bound=0.1),))
    assert fe.status == "feasible" and fe.n_max == 2.0

    fe = exposure_from_unit_risks([0.04], (RiskConstraint(order=2, bound=0.16),))
    assert fe.status == "feasible" and fe.n_max == 2.0

    fe = exposure_from_unit_risks(
        [0.7, 0.05],
        (RiskConstraint(order=0, bound=0.5), RiskConstraint(order=1, bound=0.1)),
    )
    assert fe.status == "infeasible" and fe.n_max == 0.0 and fe.binding_constraint == 0
    print("radial bound PASS: synthetic values exact")


def test_sweep_matches_bruteforce_enumeration(
    problem_2, problem_3, implied_density, subjective_density, payoffs_2, payoffs_3, env
):
    """The vectorized sweep agrees with a plain-loop enumeration: same
    optimum node, xi within 1e-12, node by node."""
    constraints = (RiskConstraint(order=1, bound=0.1),)

    start = time.perf_counter()
    records_2, opt_2 = scan((360,), constraints, problem_2)
    records_3, opt_3 = scan((90, 180), constraints, problem_3)
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0

    xis_2, best_2 = scan_oracle(
        implied_density, subjective_density, payoffs_2, env, constraints,
        [oracle_azimuth_grid(360)],
    )
    np.testing.assert_allclose([r.best_xi for r in records_2], xis_2, rtol=0, atol=1e-12)
    np.testing.assert_array_equal(opt_2.direction.angles, best_2[1])
    assert abs(opt_2.xi - best_2[0]) <= 1e-12

    xis_3, best_3 = scan_oracle(
        implied_density, subjective_density, payoffs_3, env, constraints,
        [oracle_polar_grid(90), oracle_azimuth_grid(180)],
    )
    np.testing.assert_allclose([r.best_xi for r in records_3], xis_3, rtol=0, atol=1e-12)
    np.testing.assert_array_equal(opt_3.direction.angles, best_3[1])
    assert abs(opt_3.xi - best_3[0]) <= 1e-12
    print(f"sweep vs oracle PASS: scan == oracle at 360 and 90x180 nodes, scans took {elapsed:.2f}s")


def test_third_instrument_never_hurts(problem_2, problem_3):
    """Adding an instrument cannot lower the constrained optimum, and the
    alpha_1 = 90 deg slice of the 3-instrument sweep reproduces the
    2-instrument sweep within 1e-10."""
    constraints = (RiskConstraint(order=1, bound=0.1),)
    records_2, opt_2 = scan((720,), constraints, problem_2)
    records_3, opt_3 = scan((91, 720), constraints, problem_3)
    assert opt_3.xi >= opt_2.xi

    slice_rows = records_3[45 * 720 : 46 * 720]
    assert len(slice_rows) == 720
    for rec2, rec3 in zip(records_2, slice_rows):
        assert abs(rec3.direction.angles[0] - math.pi / 2) < 1e-12
        assert rec3.direction.angles[1] == rec2.direction.angles[0]
        assert abs(rec3.feasible.n_max - rec2.feasible.n_max) < 1e-10
        assert abs(rec3.best_xi - rec2.best_xi) < 1e-10
    print(f"monotonicity PASS: xi_3 = {opt_3.xi:.8f} >= xi_2 = {opt_2.xi:.8f}, slice matches")


def test_coordinate_conversions_and_shipped_optimum(scenario_dir):
    """Angle-to-quantity conversion matches the documented reference values,
    and the shipped scenario has a unique optimum that is short the put and
    long the call."""
    q2 = to_cartesian(2.38, Direction(np.radians([286.0]))).quantities
    np.testing.assert_allclose(q2, [0.66, -2.29], atol=0.01)
    q3 = to_cartesian(3.14, Direction(np.radians([80.0, 284.0]))).quantities
    np.testing.assert_allclose(q3, [0.55, 0.75, -3.0], atol=0.01)

    scenario = load_scenario(scenario_dir / "two_instrument.toml")
    problem, _, _ = build_problem(scenario)
    records, optimum = scan(None, scenario.constraints, problem)
    best = np.array([r.best_xi for r in records])
    near_max = np.sum(best >= best.max() - 1e-12)
    assert near_max == 1  # unique grid optimum
    q_call, q_put = optimum.quantities
    assert q_call > 0.0
    assert q_put < 0.0
    print(f"compositions PASS: unique optimum, quantities = ({q_call:.4f}, {q_put:.4f})")


def test_risk_bounds_and_monte_carlo_check(
    implied_density, subjective_density, payoffs_3, env, subjective_model
):
    """rho_0 stays in [0, 1] and every rho_j is nonnegative; rho_1 for a
    short put agrees with a 10^7-draw Monte Carlo estimate within 3 SE."""
    model = LossModel.from_implied(implied_density, subjective_density, payoffs_3, env)
    rng = np.random.default_rng(77)
    for _ in range(1000):
        q = rng.normal(scale=3.0, size=3)
        rho0 = risk_measure(0, q, model)
        assert 0.0 <= rho0 <= 1.0
        for j in (1, 2, 3):
            assert risk_measure(j, q, model) >= 0.0

    # short one put struck at 0.8 (instrument index 2)
    portfolio = np.array([0.0, 0.0, -1.0])
    rho1 = risk_measure(1, portfolio, model)

    strike = 0.8
    growth = env.growth
    v_bar = model.market_values[2]
    mc_rng = np.random.default_rng(2026)
    total, total_sq, n_draws = 0.0, 0.0, 0
    for _ in range(10):
        x = sample_prices(subjective_model, 1_000_000, mc_rng)
        loss = growth * v_bar - np.maximum(strike - x, 0.0)
        g = np.where(loss < 0.0, -loss, 0.0)
        total += float(np.sum(g))
        total_sq += float(np.sum(g * g))
        n_draws += x.size
    mean = total / n_draws
    var = (total_sq - n_draws * mean * mean) / (n_draws - 1)
    se = math.sqrt(var / n_draws)
    assert abs(rho1 - mean) <= 3.0 * se
    print(f"risk properties PASS: rho_1 = {rho1:.6f}, MC = {mean:.6f} +/- {se:.1e}")
