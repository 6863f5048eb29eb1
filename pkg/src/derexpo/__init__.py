"""Derivative exposure toolkit.

Values European payoff portfolios under two final-price densities (the
market-implied one and a subjective one), both built from a Gaussian
log-return model with log-normally uncertain variance; measures downside
risk through loss moments; and finds the risk-constrained exposure
(radius and direction in contract-count space) with the largest
subjective-minus-market value.
"""

from .dist import (
    DEFAULT_QUADRATURE,
    DensityGrid,
    QuadratureSpec,
    ReturnModel,
    VarianceBelief,
    analytic_logreturn_stats,
    conditional_logreturn_pdf,
    log_mean_nu,
    logreturn_grid,
    marginal_logreturn_pdf,
    price_density_grid,
    variance_mixture_nodes,
    variance_moments,
    variance_pdf,
)
from .exposure import (
    DEFAULT_EXPOSURE_CAP,
    FEASIBLE,
    INFEASIBLE,
    UNBOUNDED_CAPPED,
    Direction,
    ExposureProblem,
    FeasibleExposure,
    Optimum,
    PolarDecomposition,
    ScanRecord,
    angle_grids,
    default_resolution,
    evaluate_direction,
    exposure_from_unit_risks,
    from_cartesian,
    max_exposure,
    scan,
    stochastic_refine,
    to_cartesian,
)
from .kernels import available_backends, direction_risks
from .pricing import (
    MarketEnv,
    Payoff,
    Portfolio,
    ValuationPair,
    as_quantities,
    instrument_value,
    payoff_matrix,
    payoff_value,
    portfolio_values,
    valuation_difference,
    value_instruments,
)
from .risk import LossModel, RiskConstraint, loss_at, loss_fn_g, risk_measure

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_EXPOSURE_CAP",
    "DEFAULT_QUADRATURE",
    "DensityGrid",
    "Direction",
    "ExposureProblem",
    "FEASIBLE",
    "FeasibleExposure",
    "INFEASIBLE",
    "LossModel",
    "MarketEnv",
    "Optimum",
    "Payoff",
    "PolarDecomposition",
    "Portfolio",
    "QuadratureSpec",
    "ReturnModel",
    "RiskConstraint",
    "ScanRecord",
    "UNBOUNDED_CAPPED",
    "ValuationPair",
    "VarianceBelief",
    "analytic_logreturn_stats",
    "angle_grids",
    "as_quantities",
    "available_backends",
    "conditional_logreturn_pdf",
    "default_resolution",
    "direction_risks",
    "evaluate_direction",
    "exposure_from_unit_risks",
    "from_cartesian",
    "instrument_value",
    "log_mean_nu",
    "logreturn_grid",
    "loss_at",
    "loss_fn_g",
    "marginal_logreturn_pdf",
    "max_exposure",
    "payoff_matrix",
    "payoff_value",
    "portfolio_values",
    "price_density_grid",
    "risk_measure",
    "scan",
    "stochastic_refine",
    "to_cartesian",
    "valuation_difference",
    "value_instruments",
    "variance_mixture_nodes",
    "variance_moments",
    "variance_pdf",
    "__version__",
]
