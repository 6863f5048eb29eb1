"""European payoff profiles and their valuation under a price density.

An instrument's value is the discounted expectation of its payoff under
either the market-implied density (market price) or the investor's own
density (subjective value). Portfolio values are linear in the contract
counts, and the valuation difference between the subjective and market
view is the objective the exposure optimizer maximizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import DensityGrid

PAYOFF_KINDS = ("call", "put", "cash", "forward", "piecewise-linear")


@dataclass(frozen=True)
class Payoff:
    """Payoff profile f(x) of a European instrument at expiry price x.

    ``kind`` is one of "call", "put", "cash", "forward" or
    "piecewise-linear". Calls and puts carry a strike (fraction of spot).
    Piecewise-linear profiles interpolate ``breakpoints`` (strictly
    increasing in x) and extrapolate with ``left_slope``/``right_slope``.
    """

    kind: str
    strike: float | None = None
    breakpoints: tuple[tuple[float, float], ...] | None = None
    left_slope: float = 0.0
    right_slope: float = 0.0

    def __post_init__(self):
        if self.kind not in PAYOFF_KINDS:
            raise ValueError(f"unknown payoff kind {self.kind!r}, expected one of {PAYOFF_KINDS}")
        if self.kind in ("call", "put"):
            if self.strike is None or not self.strike > 0.0:
                raise ValueError(f"{self.kind} payoff requires a positive strike, got {self.strike}")
        elif self.kind == "piecewise-linear":
            pts = self.breakpoints
            if not pts:
                raise ValueError("piecewise-linear payoff requires at least one breakpoint")
            pts = tuple((float(x), float(v)) for x, v in pts)
            xs = [x for x, _ in pts]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise ValueError("piecewise-linear breakpoints must be strictly increasing in x")
            object.__setattr__(self, "breakpoints", pts)
        elif self.strike is not None or self.breakpoints is not None:
            raise ValueError(f"{self.kind} payoff takes no strike or breakpoints")

    @classmethod
    def call(cls, strike: float) -> "Payoff":
        return cls("call", strike=strike)

    @classmethod
    def put(cls, strike: float) -> "Payoff":
        return cls("put", strike=strike)

    @classmethod
    def cash(cls) -> "Payoff":
        return cls("cash")

    @classmethod
    def forward(cls) -> "Payoff":
        return cls("forward")

    @classmethod
    def piecewise(cls, breakpoints, left_slope: float = 0.0, right_slope: float = 0.0) -> "Payoff":
        return cls(
            "piecewise-linear",
            breakpoints=tuple(breakpoints),
            left_slope=left_slope,
            right_slope=right_slope,
        )

    @property
    def label(self) -> str:
        if self.kind in ("call", "put"):
            return f"{self.kind}@{self.strike:g}"
        if self.kind == "piecewise-linear":
            return f"piecewise-linear[{len(self.breakpoints)}pts]"
        return self.kind


@dataclass(frozen=True)
class MarketEnv:
    """Discounting environment: continuously compounded rate and horizon."""

    r: float
    t: float

    def __post_init__(self):
        if not math.isfinite(self.r):
            raise ValueError(f"interest rate must be finite, got {self.r}")
        if not (self.t > 0.0 and math.isfinite(self.t)):
            raise ValueError(f"time to expiry must be positive, got {self.t}")

    @property
    def discount(self) -> float:
        return math.exp(-self.r * self.t)

    @property
    def growth(self) -> float:
        return math.exp(self.r * self.t)


@dataclass(frozen=True)
class Portfolio:
    """Signed contract counts, one entry per instrument."""

    quantities: np.ndarray

    def __post_init__(self):
        q = np.array(self.quantities, dtype=np.float64)
        if q.ndim != 1 or q.size < 1:
            raise ValueError("quantities must be a 1-d vector with at least one entry")
        if not np.all(np.isfinite(q)):
            raise ValueError("quantities must be finite")
        q.flags.writeable = False
        object.__setattr__(self, "quantities", q)

    def __len__(self) -> int:
        return self.quantities.size


def as_quantities(portfolio) -> np.ndarray:
    """Accept a Portfolio or a bare vector of contract counts."""
    if isinstance(portfolio, Portfolio):
        return portfolio.quantities
    return Portfolio(np.asarray(portfolio)).quantities


@dataclass(frozen=True)
class ValuationPair:
    """Per-contract market price and subjective value of one instrument."""

    market_value: float
    subjective_value: float

    def __post_init__(self):
        if not (math.isfinite(self.market_value) and math.isfinite(self.subjective_value)):
            raise ValueError("valuations must be finite")

    @property
    def edge(self) -> float:
        return self.subjective_value - self.market_value


def payoff_value(payoff: Payoff, x):
    """Evaluate the payoff at final price ``x`` (vectorized)."""
    x = np.asarray(x, dtype=np.float64)
    if payoff.kind == "call":
        out = np.maximum(x - payoff.strike, 0.0)
    elif payoff.kind == "put":
        out = np.maximum(payoff.strike - x, 0.0)
    elif payoff.kind == "cash":
        out = np.ones_like(x)
    elif payoff.kind == "forward":
        out = x.copy()
    else:
        xs = np.array([p[0] for p in payoff.breakpoints])
        vs = np.array([p[1] for p in payoff.breakpoints])
        out = np.interp(x, xs, vs)
        out = np.where(x < xs[0], vs[0] + payoff.left_slope * (x - xs[0]), out)
        out = np.where(x > xs[-1], vs[-1] + payoff.right_slope * (x - xs[-1]), out)
    return out if out.ndim else float(out)


def payoff_matrix(payoffs, nodes: np.ndarray) -> np.ndarray:
    """Stack payoff values on a price grid, one row per instrument."""
    return np.ascontiguousarray([payoff_value(p, nodes) for p in payoffs], dtype=np.float64)


def instrument_value(density: DensityGrid, payoff: Payoff, env: MarketEnv) -> float:
    """Discounted expected payoff under the given price density."""
    return env.discount * density.expect(payoff_value(payoff, density.nodes))


def value_instruments(
    implied: DensityGrid, subjective: DensityGrid, payoffs, env: MarketEnv
) -> list[ValuationPair]:
    """Market and subjective per-contract values for each instrument."""
    return [
        ValuationPair(
            market_value=instrument_value(implied, p, env),
            subjective_value=instrument_value(subjective, p, env),
        )
        for p in payoffs
    ]


def portfolio_values(valuations, portfolio) -> tuple[float, float]:
    """Market and subjective portfolio values (both linear in quantities)."""
    q = as_quantities(portfolio)
    if len(valuations) != q.size:
        raise ValueError(f"portfolio has {q.size} entries but {len(valuations)} valuations given")
    market = np.array([v.market_value for v in valuations])
    subjective = np.array([v.subjective_value for v in valuations])
    return float(q @ market), float(q @ subjective)


def valuation_difference(valuations, portfolio) -> float:
    """Subjective minus market portfolio value; the quantity to maximize."""
    market_pv, subjective_pv = portfolio_values(valuations, portfolio)
    return subjective_pv - market_pv
