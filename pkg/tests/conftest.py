import math
from pathlib import Path

import pytest

from derexpo import (
    ExposureProblem,
    MarketEnv,
    Payoff,
    ReturnModel,
    VarianceBelief,
    price_density_grid,
)

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture(scope="session")
def env():
    return MarketEnv(r=0.03, t=1.0)


@pytest.fixture(scope="session")
def implied_model():
    # implied gross return e^{rt}: market carries no drift edge
    return ReturnModel(mu=math.exp(0.03), belief=VarianceBelief(alpha=0.04, beta=0.3))


@pytest.fixture(scope="session")
def subjective_model():
    return ReturnModel(mu=1.10, belief=VarianceBelief(alpha=0.04, beta=0.3))


@pytest.fixture(scope="session")
def implied_density(implied_model):
    return price_density_grid(implied_model)


@pytest.fixture(scope="session")
def subjective_density(subjective_model):
    return price_density_grid(subjective_model)


@pytest.fixture(scope="session")
def payoffs_2():
    return (Payoff.call(1.0), Payoff.put(0.8))


@pytest.fixture(scope="session")
def payoffs_3():
    return (Payoff.put(1.0), Payoff.call(1.0), Payoff.put(0.8))


@pytest.fixture(scope="session")
def problem_2(implied_density, subjective_density, payoffs_2, env):
    return ExposureProblem.from_densities(implied_density, subjective_density, payoffs_2, env)


@pytest.fixture(scope="session")
def problem_3(implied_density, subjective_density, payoffs_3, env):
    return ExposureProblem.from_densities(implied_density, subjective_density, payoffs_3, env)


@pytest.fixture(scope="session")
def scenario_dir():
    return SCENARIO_DIR
