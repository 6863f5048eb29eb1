"""Exposure directions on the unit sphere and the constrained optimizer.

A portfolio of N instruments is split into an exposure radius (the
Euclidean norm of the contract counts) and N-1 exposure angles. Risk
measures scale radially, so each direction admits a largest radius that
still satisfies every risk constraint, and the valuation difference along
the ray is just the radius times the per-unit difference. The optimizer
scans an angle grid, takes each direction to its maximum feasible radius,
and keeps the direction with the largest achievable valuation difference;
a seeded stochastic hill climb can then polish the grid optimum.

Angle convention: the last angle is azimuthal in [0, 2*pi) and all earlier
ones are polar in [0, pi]. With two instruments the single angle covers
the full circle so every sign combination of the two counts is reachable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import kernels
from .pricing import Portfolio, ValuationPair, as_quantities
from .risk import LossModel, RiskConstraint

TWO_PI = 2.0 * math.pi

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNBOUNDED_CAPPED = "unbounded-capped"

DEFAULT_EXPOSURE_CAP = 1e6


@dataclass(frozen=True)
class Direction:
    """Exposure angles in radians; polar angles first, azimuthal last."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.array(self.angles, dtype=np.float64)
        if a.ndim != 1 or a.size < 1:
            raise ValueError("a direction needs at least one angle")
        if not np.all(np.isfinite(a)):
            raise ValueError("angles must be finite")
        if a.size > 1 and (np.any(a[:-1] < 0.0) or np.any(a[:-1] > math.pi)):
            raise ValueError("polar angles must lie in [0, pi]")
        if not (0.0 <= a[-1] < TWO_PI):
            raise ValueError("the azimuthal angle must lie in [0, 2*pi)")
        a.flags.writeable = False
        object.__setattr__(self, "angles", a)

    @property
    def n_instruments(self) -> int:
        return self.angles.size + 1

    def degrees(self) -> np.ndarray:
        return np.degrees(self.angles)

    @classmethod
    def wrap(cls, angles) -> "Direction":
        """Fold arbitrary angles into the valid ranges (reflecting polar ones)."""
        a = np.array(angles, dtype=np.float64)
        if a.size > 1:
            folded = np.mod(a[:-1], TWO_PI)
            a[:-1] = np.where(folded > math.pi, TWO_PI - folded, folded)
        az = math.fmod(a[-1], TWO_PI)
        if az < 0.0:
            az += TWO_PI
        if az >= TWO_PI:  # fmod rounding can land exactly on the period
            az = 0.0
        a[-1] = az
        return cls(a)


@dataclass(frozen=True)
class FeasibleExposure:
    """Largest admissible exposure radius along one direction.

    ``status`` is "feasible", "infeasible" (an order-0 constraint already
    fails at any positive size) or "unbounded-capped" (no constrained
    measure grows with size, so the configured cap applies).
    ``unit_rhos`` holds the risk measures of the unit portfolio, one per
    constraint.
    """

    status: str
    n_max: float
    binding_constraint: int | None
    unit_rhos: np.ndarray

    def __post_init__(self):
        if self.status not in (FEASIBLE, INFEASIBLE, UNBOUNDED_CAPPED):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == FEASIBLE and not self.n_max > 0.0:
            raise ValueError("a feasible direction must have a positive n_max")


@dataclass(frozen=True)
class ScanRecord:
    """Outcome at one grid direction: feasibility, unit edge, achievable edge."""

    direction: Direction
    feasible: FeasibleExposure
    unit_xi: float
    best_xi: float

    def __post_init__(self):
        usable = self.feasible.status != INFEASIBLE and self.unit_xi > 0.0
        expected = self.feasible.n_max * self.unit_xi if usable else 0.0
        if self.best_xi != expected:
            raise ValueError("best_xi must equal n_max * unit_xi for usable directions, else 0")


@dataclass(frozen=True)
class Optimum:
    """Selected exposure: direction, radius, contract counts and edge."""

    direction: Direction
    n: float
    quantities: np.ndarray
    xi: float

    def __post_init__(self):
        if self.n < 0.0:
            raise ValueError("exposure radius must be nonnegative")
        if self.xi < 0.0:
            raise ValueError("the achievable valuation difference is never negative")
        q = np.array(self.quantities, dtype=np.float64)
        if not np.array_equal(q, to_cartesian(self.n, self.direction).quantities):
            raise ValueError("quantities must equal the cartesian image of (n, direction)")
        q.flags.writeable = False
        object.__setattr__(self, "quantities", q)


@dataclass(frozen=True)
class ExposureProblem:
    """Scenario data the optimizer needs: a loss model plus unit valuations."""

    loss_model: LossModel
    valuations: tuple[ValuationPair, ...]

    def __post_init__(self):
        vals = tuple(self.valuations)
        if len(vals) != self.loss_model.n_instruments:
            raise ValueError("one valuation pair per instrument is required")
        market = np.array([v.market_value for v in vals])
        if not np.allclose(market, self.loss_model.market_values, rtol=1e-9, atol=1e-12):
            raise ValueError("valuation market prices disagree with the loss model")
        object.__setattr__(self, "valuations", vals)

    @classmethod
    def from_densities(cls, implied, subjective, payoffs, env) -> "ExposureProblem":
        from .pricing import value_instruments

        vals = value_instruments(implied, subjective, payoffs, env)
        model = LossModel(
            density=subjective,
            payoffs=tuple(payoffs),
            market_values=np.array([v.market_value for v in vals]),
            env=env,
        )
        return cls(loss_model=model, valuations=tuple(vals))

    @property
    def n_instruments(self) -> int:
        return self.loss_model.n_instruments

    @cached_property
    def edge(self) -> np.ndarray:
        """Per-contract subjective-minus-market value."""
        e = np.array([v.edge for v in self.valuations])
        e.flags.writeable = False
        return e


def _unit_vectors(angles: np.ndarray) -> np.ndarray:
    """Unit quantity vectors for a batch of angle rows, shape (D, N)."""
    n_dir, m = angles.shape
    q = np.empty((n_dir, m + 1))
    sin_cum = np.cumprod(np.sin(angles), axis=1)
    q[:, 0] = np.cos(angles[:, 0])
    for j in range(1, m):
        q[:, j] = np.cos(angles[:, j]) * sin_cum[:, j - 1]
    q[:, m] = sin_cum[:, m - 1]
    return q


def to_cartesian(n: float, direction: Direction) -> Portfolio:
    """Contract counts for exposure radius ``n`` along ``direction``."""
    if n < 0.0:
        raise ValueError("exposure radius must be nonnegative")
    return Portfolio(n * _unit_vectors(direction.angles[None, :])[0])


class PolarDecomposition(NamedTuple):
    n: float
    direction: Direction
    degenerate: bool


def from_cartesian(portfolio) -> PolarDecomposition:
    """Exposure radius and angles of a quantity vector.

    The zero vector has no direction; it is returned with all angles zero
    and the ``degenerate`` flag set.
    """
    q = as_quantities(portfolio)
    if q.size < 2:
        raise ValueError("exposure angles require at least 2 instruments")
    m = q.size - 1
    n = float(np.linalg.norm(q))
    if n == 0.0:
        return PolarDecomposition(0.0, Direction(np.zeros(m)), True)
    angles = np.zeros(m)
    for j in range(m - 1):
        angles[j] = math.atan2(float(np.linalg.norm(q[j + 1 :])), q[j])
    az = math.atan2(q[-1], q[-2]) % TWO_PI
    if az >= TWO_PI:
        az = 0.0
    angles[m - 1] = az
    return PolarDecomposition(n, Direction(angles), False)


def _constraint_orders(constraints) -> tuple[np.ndarray, np.ndarray]:
    """Unique risk orders to evaluate and the per-constraint column map."""
    orders = [c.order for c in constraints]
    unique = sorted(set(orders))
    col = {o: i for i, o in enumerate(unique)}
    return np.array(unique, dtype=np.int64), np.array([col[o] for o in orders])


def _constraint_risks(problem: ExposureProblem, quantities, constraints, backend=None) -> np.ndarray:
    """Unit risk measures, one column per constraint (orders deduplicated)."""
    if len(constraints) == 0:
        raise ValueError("at least one risk constraint is required")
    unique, colmap = _constraint_orders(constraints)
    model = problem.loss_model
    rhos = kernels.direction_risks(
        model.loss_basis, model.node_weights, quantities, unique, backend=backend
    )
    return rhos[:, colmap]


def exposure_from_unit_risks(unit_rhos, constraints, n_cap: float = DEFAULT_EXPOSURE_CAP) -> FeasibleExposure:
    """Apply the radial scaling law to unit risk measures.

    Order-0 constraints act as feasibility gates (the loss probability does
    not change with positive size). Every higher order j caps the radius at
    ``(bound / unit_rho) ** (1/j)``; the smallest cap binds. If nothing
    binds, the direction is risk-free under the given constraints and the
    configured cap is reported instead of an infinite radius.
    """
    constraints = tuple(constraints)
    if not constraints:
        raise ValueError("at least one risk constraint is required")
    rhos = np.array(unit_rhos, dtype=np.float64)
    if rhos.shape != (len(constraints),):
        raise ValueError("one unit risk value per constraint is required")
    for i, c in enumerate(constraints):
        if c.order == 0 and rhos[i] > c.bound:
            return FeasibleExposure(INFEASIBLE, 0.0, i, rhos)
    n_max = math.inf
    binding = None
    for i, c in enumerate(constraints):
        if c.order >= 1:
            cand = math.inf if rhos[i] == 0.0 else (c.bound / rhos[i]) ** (1.0 / c.order)
            if cand < n_max:
                n_max, binding = cand, i
    if math.isinf(n_max):
        return FeasibleExposure(UNBOUNDED_CAPPED, n_cap, None, rhos)
    return FeasibleExposure(FEASIBLE, n_max, binding, rhos)


def max_exposure(
    direction: Direction,
    constraints,
    problem: ExposureProblem,
    n_cap: float = DEFAULT_EXPOSURE_CAP,
    backend: str | None = None,
) -> FeasibleExposure:
    """Largest exposure radius along ``direction`` satisfying every constraint."""
    unit = _unit_vectors(direction.angles[None, :])
    rhos = _constraint_risks(problem, unit, tuple(constraints), backend)[0]
    return exposure_from_unit_risks(rhos, constraints, n_cap)


def default_resolution(n_instruments: int) -> tuple[int, ...]:
    """Grid nodes per angle: dense for 2-3 instruments, coarse above."""
    if n_instruments == 2:
        return (720,)
    if n_instruments == 3:
        return (180, 360)
    return (32,) * (n_instruments - 1)


def angle_grids(n_instruments: int, resolution) -> list[np.ndarray]:
    """Per-angle node arrays: closed [0, pi] for polar angles, periodic
    [0, 2*pi) for the azimuthal one."""
    n_angles = n_instruments - 1
    if resolution is None:
        res = default_resolution(n_instruments)
    elif isinstance(resolution, (int, np.integer)):
        res = (int(resolution),) * n_angles
    else:
        res = tuple(int(r) for r in resolution)
    if len(res) != n_angles:
        raise ValueError(f"expected {n_angles} per-angle resolutions, got {len(res)}")
    if any(r < 8 for r in res):
        raise ValueError("grid resolution must be at least 8 nodes per angle")
    grids = []
    for j, r in enumerate(res):
        if j == n_angles - 1:
            grids.append(np.arange(r) * (TWO_PI / r))
        else:
            grids.append(np.linspace(0.0, math.pi, r))
    return grids


def scan(
    resolution,
    constraints,
    problem: ExposureProblem,
    n_cap: float = DEFAULT_EXPOSURE_CAP,
    backend: str | None = None,
) -> tuple[list[ScanRecord], Optimum]:
    """Evaluate every grid direction and select the best achievable edge.

    Returns all per-direction records (rows in lexicographic angle order)
    and the optimum. Directions are compared by achievable valuation
    difference with ties broken toward the lexicographically smallest angle
    vector; doing nothing (the zero portfolio) is the floor, so the optimum
    never has a negative edge.
    """
    n = problem.n_instruments
    if n < 2:
        raise ValueError("exposure angles require at least 2 instruments")
    constraints = tuple(constraints)
    if not constraints:
        raise ValueError("at least one risk constraint is required")
    grids = angle_grids(n, resolution)
    mesh = np.meshgrid(*grids, indexing="ij")
    angles = np.stack([m.ravel() for m in mesh], axis=1)
    unit = _unit_vectors(angles)
    rhos = _constraint_risks(problem, unit, constraints, backend)
    unit_xi = unit @ problem.edge
    n_dir = angles.shape[0]

    violated = np.zeros(n_dir, dtype=bool)
    gate_idx = np.full(n_dir, -1, dtype=np.int64)
    for i, c in enumerate(constraints):
        if c.order == 0:
            bad = rhos[:, i] > c.bound
            gate_idx[bad & ~violated] = i
            violated |= bad
    cand_min = np.full(n_dir, np.inf)
    cand_idx = np.full(n_dir, -1, dtype=np.int64)
    for i, c in enumerate(constraints):
        if c.order >= 1:
            with np.errstate(divide="ignore"):
                cand = (c.bound / rhos[:, i]) ** (1.0 / c.order)
            better = cand < cand_min
            cand_min[better] = cand[better]
            cand_idx[better] = i

    capped = np.isinf(cand_min) & ~violated
    feasible = ~violated & ~capped
    n_max = np.where(violated, 0.0, np.where(capped, n_cap, cand_min))
    best = np.where(~violated & (unit_xi > 0.0), n_max * unit_xi, 0.0)

    records = []
    for idx in range(n_dir):
        if violated[idx]:
            status, binding = INFEASIBLE, int(gate_idx[idx])
        elif capped[idx]:
            status, binding = UNBOUNDED_CAPPED, None
        else:
            status, binding = FEASIBLE, int(cand_idx[idx])
        fe = FeasibleExposure(status, float(n_max[idx]), binding, rhos[idx])
        records.append(
            ScanRecord(Direction(angles[idx]), fe, float(unit_xi[idx]), float(best[idx]))
        )

    k = int(np.argmax(best))
    if best[k] <= 0.0:
        optimum = Optimum(Direction(np.zeros(n - 1)), 0.0, np.zeros(n), 0.0)
    else:
        d = Direction(angles[k])
        radius = float(n_max[k])
        optimum = Optimum(d, radius, to_cartesian(radius, d).quantities, float(best[k]))
    return records, optimum


def evaluate_direction(
    direction: Direction,
    constraints,
    problem: ExposureProblem,
    n_cap: float = DEFAULT_EXPOSURE_CAP,
    backend: str | None = None,
) -> ScanRecord:
    """Single-direction version of a scan row."""
    fe = max_exposure(direction, constraints, problem, n_cap, backend)
    unit_xi = float(_unit_vectors(direction.angles[None, :])[0] @ problem.edge)
    usable = fe.status != INFEASIBLE and unit_xi > 0.0
    best = fe.n_max * unit_xi if usable else 0.0
    return ScanRecord(direction, fe, unit_xi, best)


def stochastic_refine(
    seed_optimum: Optimum,
    constraints,
    problem: ExposureProblem,
    iterations: int,
    rng_seed: int = 0,
    initial_step: float = math.pi / 90,
    n_cap: float = DEFAULT_EXPOSURE_CAP,
    backend: str | None = None,
) -> Optimum:
    """Seeded stochastic hill climb in angle space around a scan optimum.

    Proposes Gaussian angle perturbations with a step that shrinks on
    rejection and grows on acceptance; only improvements are accepted, so
    the result never has a smaller edge than the seed. Fully deterministic
    for a fixed ``rng_seed``.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    if iterations == 0 or seed_optimum.n == 0.0:
        return seed_optimum
    rng = np.random.default_rng(rng_seed)
    current = seed_optimum.direction.angles.copy()
    best_record: ScanRecord | None = None
    best_xi = seed_optimum.xi
    step = initial_step
    for _ in range(iterations):
        proposal = Direction.wrap(current + step * rng.standard_normal(current.size))
        record = evaluate_direction(proposal, constraints, problem, n_cap, backend)
        if record.best_xi > best_xi:
            best_record, best_xi = record, record.best_xi
            current = proposal.angles.copy()
            step = min(step * 1.4, math.pi / 8)
        else:
            step = max(step * 0.95, 1e-7)
    if best_record is None:
        return seed_optimum
    radius = best_record.feasible.n_max
    d = best_record.direction
    return Optimum(d, radius, to_cartesian(radius, d).quantities, best_record.best_xi)
