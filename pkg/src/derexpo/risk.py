"""Profit/loss at expiry and the loss-based risk measure family.

The loss of a position is its payoff at expiry minus the grown-forward
market price paid for it. Risk measure ``rho_j`` is the expectation, under
the subjective price density, of the j-th power of the negative part of
that profit/loss: ``rho_0`` is the probability of losing money, ``rho_1``
the expected loss, and higher orders penalize large losses harder.

Because profit/loss is linear in the contract counts, ``rho_j`` scales as
``lambda**j`` when the whole position is scaled by ``lambda > 0``; the
exposure optimizer exploits this radial structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .dist import DensityGrid
from .pricing import MarketEnv, Payoff, as_quantities, payoff_matrix, payoff_value


@dataclass(frozen=True)
class RiskConstraint:
    """Upper bound on one risk measure: rho_order <= bound."""

    order: int
    bound: float

    def __post_init__(self):
        if not (isinstance(self.order, (int, np.integer)) and self.order >= 0):
            raise ValueError(f"constraint order must be an integer >= 0, got {self.order}")
        if not self.bound > 0.0:
            raise ValueError(f"constraint bound must be positive, got {self.bound}")
        if self.order == 0 and self.bound > 1.0:
            raise ValueError(f"order-0 bound is a probability and must be <= 1, got {self.bound}")


@dataclass(frozen=True)
class LossModel:
    """Everything needed to evaluate losses: subjective density, payoff
    profiles, per-contract market prices and the discounting environment.

    Market prices are stored per instrument (not as a single portfolio
    value) so that the loss, and with it every rho_j, scales linearly when
    the contract counts are scaled.
    """

    density: DensityGrid
    payoffs: tuple[Payoff, ...]
    market_values: np.ndarray
    env: MarketEnv

    def __post_init__(self):
        payoffs = tuple(self.payoffs)
        if not payoffs:
            raise ValueError("at least one instrument is required")
        mv = np.array(self.market_values, dtype=np.float64)
        if mv.shape != (len(payoffs),):
            raise ValueError(
                f"market_values has shape {mv.shape}, expected ({len(payoffs)},) to match payoffs"
            )
        if not np.all(np.isfinite(mv)):
            raise ValueError("market values must be finite")
        mv.flags.writeable = False
        object.__setattr__(self, "payoffs", payoffs)
        object.__setattr__(self, "market_values", mv)

    @classmethod
    def from_implied(
        cls,
        implied: DensityGrid,
        subjective: DensityGrid,
        payoffs,
        env: MarketEnv,
    ) -> "LossModel":
        """Price the instruments off the implied density to get market values."""
        from .pricing import instrument_value

        payoffs = tuple(payoffs)
        mv = np.array([instrument_value(implied, p, env) for p in payoffs])
        return cls(density=subjective, payoffs=payoffs, market_values=mv, env=env)

    @property
    def n_instruments(self) -> int:
        return len(self.payoffs)

    @cached_property
    def node_weights(self) -> np.ndarray:
        """Quadrature weight times density at each price node."""
        w = self.density.weights * self.density.density
        w.flags.writeable = False
        return w

    @cached_property
    def loss_basis(self) -> np.ndarray:
        """Per-instrument loss profile on the grid: f_k(x_i) - e^{rt} V_k.

        The loss of a portfolio q is ``q @ loss_basis`` evaluated columnwise.
        """
        basis = payoff_matrix(self.payoffs, self.density.nodes)
        basis -= self.env.growth * self.market_values[:, None]
        basis.flags.writeable = False
        return basis

    def market_pv(self, portfolio) -> float:
        """Market value of the portfolio at the stored per-contract prices."""
        return float(as_quantities(portfolio) @ self.market_values)


def loss_at(x, portfolio, model: LossModel):
    """Profit/loss at expiry price ``x``: payoff minus grown market cost."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0):
        raise ValueError("final price must be nonnegative")
    q = as_quantities(portfolio)
    if q.size != model.n_instruments:
        raise ValueError(f"portfolio has {q.size} entries, model has {model.n_instruments}")
    final = sum(qi * payoff_value(p, x) for qi, p in zip(q, model.payoffs))
    out = final - model.env.growth * model.market_pv(q)
    return out if np.ndim(out) else float(out)


def loss_fn_g(l, order: int):
    """Penalized loss: the indicator of a strict loss for order 0, otherwise
    the negative part of profit/loss raised to ``order``.

    A profit/loss of exactly 0 counts as no loss, so an empty position is
    riskless at every order.
    """
    if not (isinstance(order, (int, np.integer)) and order >= 0):
        raise ValueError(f"order must be an integer >= 0, got {order}")
    l = np.asarray(l, dtype=np.float64)
    if order == 0:
        out = (l < 0.0).astype(np.float64)
    else:
        out = np.where(l < 0.0, -l, 0.0) ** order
    return out if out.ndim else float(out)


def risk_measure(order: int, portfolio, model: LossModel) -> float:
    """Expectation of the order-th penalized loss under the subjective density."""
    q = as_quantities(portfolio)
    if q.size != model.n_instruments:
        raise ValueError(f"portfolio has {q.size} entries, model has {model.n_instruments}")
    losses = q @ model.loss_basis
    return float(model.node_weights @ loss_fn_g(losses, order))
