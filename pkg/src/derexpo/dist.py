"""Log-return and final-price densities under an uncertain variance.

The return model is a Gaussian for the log return whose variance is itself
uncertain: the variance follows a log-normal belief with median ``alpha``
and log-space spread ``beta``. Marginalizing over the variance produces a
heavier-tailed mixture that still has gross mean return ``mu`` by
construction. ``beta = 0`` is the degenerate known-variance case and
recovers the plain log-normal price model.

Prices are quoted as fractions of spot (spot normalized to 1), so strikes
like 0.8 read as "80% of spot" and a gross return ``mu`` of 1.05 means a
5% expected simple return over the horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class VarianceBelief:
    """Log-normal belief about the per-horizon variance of log returns.

    ``alpha`` is the median variance; ``beta`` is the standard deviation of
    ``ln(variance)``. ``beta = 0`` means the variance is known to be exactly
    ``alpha``.
    """

    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if not (self.beta >= 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be >= 0 and finite, got {self.beta}")

    @property
    def is_degenerate(self) -> bool:
        return self.beta == 0.0

    @property
    def gamma(self) -> float:
        """Convexity factor exp(beta^2 / 2) of the variance belief."""
        return math.exp(0.5 * self.beta * self.beta)


@dataclass(frozen=True)
class ReturnModel:
    """Gross mean return over the horizon plus a variance belief."""

    mu: float
    belief: VarianceBelief

    def __post_init__(self):
        if not (self.mu > 0.0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be positive and finite, got {self.mu}")


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization controls for density construction.

    ``log_return_nodes`` (odd, >= 3) and ``log_return_halfwidth`` (in
    multiples of the effective log-return standard deviation) define the
    uniform log-return grid. ``variance_nodes`` and ``variance_halfwidth``
    (in multiples of ``beta`` in log-variance space) control the
    Gauss-Legendre rule used to mix over the uncertain variance.
    """

    log_return_nodes: int = 2001
    log_return_halfwidth: float = 10.0
    variance_nodes: int = 101
    variance_halfwidth: float = 8.0

    def __post_init__(self):
        m = self.log_return_nodes
        if not (isinstance(m, int) and m >= 3 and m % 2 == 1):
            raise ValueError(f"log_return_nodes must be an odd integer >= 3, got {m}")
        if not (isinstance(self.variance_nodes, int) and self.variance_nodes >= 1):
            raise ValueError(f"variance_nodes must be an integer >= 1, got {self.variance_nodes}")
        if not self.log_return_halfwidth > 0.0:
            raise ValueError("log_return_halfwidth must be positive")
        if not self.variance_halfwidth > 0.0:
            raise ValueError("variance_halfwidth must be positive")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class DensityGrid:
    """Discretized final-price density: nodes, quadrature weights, pdf values.

    Expectations are computed as ``sum(weights * density * f(nodes))``. Any
    tabulated density can be wrapped in this type as long as the nodes are
    positive and strictly increasing, the weights positive, the density
    nonnegative, and the total mass is 1 up to ``norm_tol``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    density: np.ndarray
    norm_tol: float = 1e-4

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=np.float64)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        density = np.ascontiguousarray(self.density, dtype=np.float64)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.shape != density.shape:
            raise ValueError("nodes, weights and density must be 1-d arrays of equal length")
        if not np.all(nodes > 0.0):
            raise ValueError("price nodes must be positive")
        if not np.all(np.diff(nodes) > 0.0):
            raise ValueError("price nodes must be strictly increasing")
        if not np.all(weights > 0.0):
            raise ValueError("quadrature weights must be positive")
        if not np.all(density >= 0.0):
            raise ValueError("density values must be nonnegative")
        mass = float(weights @ density)
        if abs(mass - 1.0) > self.norm_tol:
            raise ValueError(f"density mass {mass!r} deviates from 1 by more than {self.norm_tol}")
        for name, arr in (("nodes", nodes), ("weights", weights), ("density", density)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def mass(self) -> float:
        return float(self.weights @ self.density)

    def mean(self) -> float:
        """Expected final price E[x]."""
        return float(self.weights @ (self.density * self.nodes))

    def expect(self, values: np.ndarray) -> float:
        """Expectation of a function tabulated on the grid nodes."""
        return float(self.weights @ (self.density * np.asarray(values, dtype=np.float64)))


def log_mean_nu(mu: float, sigma2: float) -> float:
    """Mean of the log return given gross return ``mu`` and variance ``sigma2``.

    The shift ``-sigma2/2`` makes E[exp(log return)] equal ``mu``.
    """
    if not mu > 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    if sigma2 < 0.0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    return math.log(mu) - 0.5 * sigma2


def conditional_logreturn_pdf(l, mu: float, sigma2: float):
    """Normal log-return density at ``l`` for a known variance ``sigma2``.

    Vectorized over ``l``. The known-variance case must have ``sigma2 > 0``;
    callers handle the degenerate belief by substituting its median variance.
    """
    if not sigma2 > 0.0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    nu = log_mean_nu(mu, sigma2)
    l = np.asarray(l, dtype=np.float64)
    z = l - nu
    out = np.exp(-0.5 * z * z / sigma2) / (_SQRT_2PI * math.sqrt(sigma2))
    return out if out.ndim else float(out)

def variance_pdf(sigma2, belief: VarianceBelief):
    """Log-normal density of the variance belief, evaluated at ``sigma2``.

    Vectorized over ``sigma2``. Undefined for a degenerate belief; callers
    must branch on ``belief.is_degenerate`` instead of taking a limit.
    """
    if belief.is_degenerate:
        raise ValueError("variance_pdf is undefined for beta = 0 (degenerate belief)")
    sigma2 = np.asarray(sigma2, dtype=np.float64)
    if np.any(sigma2 <= 0.0):
        raise ValueError("sigma2 must be positive")
    z = (np.log(sigma2) - math.log(belief.alpha)) / belief.beta
    out = np.exp(-0.5 * z * z) / (sigma2 * belief.beta * _SQRT_2PI)
    return out if out.ndim else float(out)


def variance_mixture_nodes(belief: VarianceBelief, quad: QuadratureSpec = DEFAULT_QUADRATURE):
    """Variance nodes and mixture weights for the marginalization integral.

    Gauss-Legendre in u = ln(variance) over ``ln(alpha) +/- halfwidth*beta``;
    the log-normal belief becomes a plain Gaussian in u, so the weights are
    the rule weights times that Gaussian. Returns ``(variances, weights)``
    with weights summing to 1 up to the truncated tail mass.
    """
    if belief.is_degenerate:
        return np.array([belief.alpha]), np.array([1.0])
    u0 = math.log(belief.alpha)
    half = quad.variance_halfwidth * belief.beta
    x, w = leggauss(quad.variance_nodes)
    u = u0 + half * x
    z = (u - u0) / belief.beta
    mix = (half * w) * np.exp(-0.5 * z * z) / (belief.beta * _SQRT_2PI)
    return np.exp(u), mix


def marginal_logreturn_pdf(l, model: ReturnModel, quad: QuadratureSpec = DEFAULT_QUADRATURE):
    """Log-return density after mixing the Gaussian over the variance belief.

    Vectorized over ``l``. For a degenerate belief this is exactly the
    conditional density at the median variance.
    """
    belief = model.belief
    if belief.is_degenerate:
        return conditional_logreturn_pdf(l, model.mu, belief.alpha)
    sigma2, mix = variance_mixture_nodes(belief, quad)
    l = np.asarray(l, dtype=np.float64)
    nu = math.log(model.mu) - 0.5 * sigma2
    z = l[..., None] - nu
    comps = np.exp(-0.5 * z * z / sigma2) / (_SQRT_2PI * np.sqrt(sigma2))
    out = comps @ mix
    return out if out.ndim else float(out)


def variance_moments(belief: VarianceBelief) -> tuple[float, float]:
    """First and second moments of the variance under the belief.

    Returns ``(alpha*gamma, alpha^2*gamma^4)`` with gamma = exp(beta^2/2);
    the degenerate case gives ``(alpha, alpha^2)``.
    """
    a, g = belief.alpha, belief.gamma
    return a * g, (a * a) * (g ** 4)


def analytic_logreturn_stats(model: ReturnModel) -> tuple[float, float]:
    """Closed-form mean and variance of the marginal log-return density.

    mean = ln(mu) - s2/2 and variance = s2 + (s4 - s2^2)/4, where s2 and s4
    are the variance-belief moments.
    """
    s2, s4 = variance_moments(model.belief)
    lam = math.log(model.mu) - 0.5 * s2
    xi = s2 + 0.25 * (s4 - s2 * s2)
    return lam, xi


def logreturn_grid(model: ReturnModel, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> np.ndarray:
    """Uniform log-return grid spanning the analytic mean +/- halfwidth stds."""
    lam, xi = analytic_logreturn_stats(model)
    half = quad.log_return_halfwidth * math.sqrt(xi)
    return np.linspace(lam - half, lam + half, quad.log_return_nodes)


def price_density_grid(model: ReturnModel, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> DensityGrid:
    """Tabulate the final-price density of ``model`` as a DensityGrid.

    Nodes are exp of a uniform log-return grid; the density is transformed by
    the change of variables x = exp(l), and trapezoid weights in l are carried
    to the price axis so expectations stay plain weighted sums.
    """
    l = logreturn_grid(model, quad)
    pdf_l = marginal_logreturn_pdf(l, model, quad)
    x = np.exp(l)
    step = l[1] - l[0]
    coeff = np.full(l.shape, step)
    coeff[0] = coeff[-1] = 0.5 * step
    return DensityGrid(nodes=x, weights=coeff * x, density=pdf_l / x)
