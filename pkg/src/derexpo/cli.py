"""Command line front end: TOML scenarios in, reports and scan surfaces out.

A scenario file bundles the implied and subjective return models, the
market environment, the instrument list and the risk constraints, plus
optional scan and quadrature settings. ``price`` values each instrument
under both densities; ``scan`` sweeps the exposure angles, writes the
per-direction surface as CSV and the optimum as JSON. All numeric output
uses 17 significant digits so reruns are byte-identical.

Exit codes: 0 success, 2 validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .dist import (
    DEFAULT_QUADRATURE,
    DensityGrid,
    QuadratureSpec,
    ReturnModel,
    VarianceBelief,
    analytic_logreturn_stats,
    marginal_logreturn_pdf,
    price_density_grid,
)
from .exposure import (
    DEFAULT_EXPOSURE_CAP,
    INFEASIBLE,
    ExposureProblem,
    Optimum,
    max_exposure,
    scan,
    stochastic_refine,
)
from .pricing import MarketEnv, Payoff
from .risk import RiskConstraint

DENSITY_TABLE_POINTS = 1001


class ScenarioError(ValueError):
    """Invalid, unreadable or unparseable scenario input."""


@dataclass(frozen=True)
class Scenario:
    """Everything one run needs, as loaded from a scenario file."""

    implied: ReturnModel
    subjective: ReturnModel
    env: MarketEnv
    instruments: tuple[Payoff, ...]
    constraints: tuple[RiskConstraint, ...]
    grid: int | tuple[int, ...] | None = None
    quad: QuadratureSpec = DEFAULT_QUADRATURE
    n_cap: float = DEFAULT_EXPOSURE_CAP
    seed: int = 0

    def __post_init__(self):
        instruments = tuple(self.instruments)
        constraints = tuple(self.constraints)
        if not instruments:
            raise ScenarioError("at least one instrument is required")
        if not constraints:
            raise ScenarioError("at least one risk constraint is required")
        if self.grid is not None:
            if len(instruments) < 2:
                raise ScenarioError("a grid resolution requires at least 2 instruments")
            if not isinstance(self.grid, int):
                grid = tuple(self.grid)
                if len(grid) != len(instruments) - 1:
                    raise ScenarioError(
                        f"grid resolution lists {len(grid)} angles, "
                        f"but {len(instruments)} instruments have {len(instruments) - 1}"
                    )
                object.__setattr__(self, "grid", grid)
        if not self.n_cap > 0.0:
            raise ScenarioError(f"n_cap must be positive, got {self.n_cap}")
        if self.seed < 0:
            raise ScenarioError(f"seed must be >= 0, got {self.seed}")
        object.__setattr__(self, "instruments", instruments)
        object.__setattr__(self, "constraints", constraints)

    @property
    def n_instruments(self) -> int:
        return len(self.instruments)


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ScenarioError(f"{where}: missing required field '{key}'")
    return table[key]


def _reject_unknown(table: dict, allowed: set[str], where: str) -> None:
    extra = sorted(set(table) - allowed)
    if extra:
        raise ScenarioError(f"{where}: unknown field(s): {', '.join(extra)}")


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{where}: expected an integer, got {value!r}")
    return value


def _as_table(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(f"{where}: expected a table")
    return value


def _return_model(table: dict, where: str) -> ReturnModel:
    _reject_unknown(table, {"mu", "alpha", "beta"}, where)
    mu = _as_float(_require(table, "mu", where), f"{where}.mu")
    alpha = _as_float(_require(table, "alpha", where), f"{where}.alpha")
    beta = _as_float(table.get("beta", 0.0), f"{where}.beta")
    try:
        return ReturnModel(mu=mu, belief=VarianceBelief(alpha=alpha, beta=beta))
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _market_env(table: dict, where: str) -> MarketEnv:
    _reject_unknown(table, {"rate", "horizon"}, where)
    r = _as_float(_require(table, "rate", where), f"{where}.rate")
    t = _as_float(_require(table, "horizon", where), f"{where}.horizon")
    try:
        return MarketEnv(r=r, t=t)
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _payoff(table: dict, where: str) -> Payoff:
    table = _as_table(table, where)
    kind = _require(table, "kind", where)
    try:
        if kind in ("call", "put"):
            _reject_unknown(table, {"kind", "strike"}, where)
            strike = _as_float(_require(table, "strike", where), f"{where}.strike")
            return Payoff(kind, strike=strike)
        if kind in ("cash", "forward"):
            _reject_unknown(table, {"kind"}, where)
            return Payoff(kind)
        if kind == "piecewise-linear":
            _reject_unknown(table, {"kind", "breakpoints", "left_slope", "right_slope"}, where)
            raw = _require(table, "breakpoints", where)
            if not isinstance(raw, list) or not all(
                isinstance(p, list) and len(p) == 2 for p in raw
            ):
                raise ScenarioError(f"{where}.breakpoints: expected a list of [x, value] pairs")
            pts = tuple(
                (_as_float(p[0], f"{where}.breakpoints"), _as_float(p[1], f"{where}.breakpoints"))
                for p in raw
            )
            return Payoff.piecewise(
                pts,
                left_slope=_as_float(table.get("left_slope", 0.0), f"{where}.left_slope"),
                right_slope=_as_float(table.get("right_slope", 0.0), f"{where}.right_slope"),
            )
        raise ScenarioError(f"{where}.kind: unknown payoff kind {kind!r}")
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"{where}: {exc}") from None


def _constraint(table: dict, where: str) -> RiskConstraint:
    table = _as_table(table, where)
    _reject_unknown(table, {"order", "bound"}, where)
    order = _as_int(_require(table, "order", where), f"{where}.order")
    bound = _as_float(_require(table, "bound", where), f"{where}.bound")
    try:
        return RiskConstraint(order=order, bound=bound)
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _quadrature(table: dict, where: str) -> QuadratureSpec:
    allowed = {
        "log_return_nodes",
        "log_return_halfwidth",
        "variance_nodes",
        "variance_halfwidth",
    }
    _reject_unknown(table, allowed, where)
    kwargs = {}
    for key in ("log_return_nodes", "variance_nodes"):
        if key in table:
            kwargs[key] = _as_int(table[key], f"{where}.{key}")
    for key in ("log_return_halfwidth", "variance_halfwidth"):
        if key in table:
            kwargs[key] = _as_float(table[key], f"{where}.{key}")
    try:
        return QuadratureSpec(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def scenario_from_dict(data: dict, where: str = "scenario") -> Scenario:
    """Build and validate a Scenario from parsed key/value data."""
    data = _as_table(data, where)
    _reject_unknown(
        data,
        {"description", "implied", "subjective", "env", "instruments", "constraints", "scan", "quadrature"},
        where,
    )
    implied = _return_model(_as_table(_require(data, "implied", where), f"{where}.implied"), f"{where}.implied")
    subjective = _return_model(
        _as_table(_require(data, "subjective", where), f"{where}.subjective"), f"{where}.subjective"
    )
    env = _market_env(_as_table(_require(data, "env", where), f"{where}.env"), f"{where}.env")

    raw_instruments = _require(data, "instruments", where)
    if not isinstance(raw_instruments, list) or not raw_instruments:
        raise ScenarioError(f"{where}.instruments: expected a non-empty array of tables")
    instruments = tuple(
        _payoff(tbl, f"{where}.instruments[{i}]") for i, tbl in enumerate(raw_instruments)
    )

    raw_constraints = _require(data, "constraints", where)
    if not isinstance(raw_constraints, list) or not raw_constraints:
        raise ScenarioError(f"{where}.constraints: expected a non-empty array of tables")
    constraints = tuple(
        _constraint(tbl, f"{where}.constraints[{i}]") for i, tbl in enumerate(raw_constraints)
    )

    scan_table = _as_table(data.get("scan", {}), f"{where}.scan")
    _reject_unknown(scan_table, {"resolution", "n_cap", "seed"}, f"{where}.scan")
    grid: int | tuple[int, ...] | None = None
    if "resolution" in scan_table:
        raw_res = scan_table["resolution"]
        if isinstance(raw_res, list):
            grid = tuple(_as_int(r, f"{where}.scan.resolution") for r in raw_res)
        else:
            grid = _as_int(raw_res, f"{where}.scan.resolution")
    n_cap = _as_float(scan_table.get("n_cap", DEFAULT_EXPOSURE_CAP), f"{where}.scan.n_cap")
    seed = _as_int(scan_table.get("seed", 0), f"{where}.scan.seed")

    quad = _quadrature(_as_table(data.get("quadrature", {}), f"{where}.quadrature"), f"{where}.quadrature")

    return Scenario(
        implied=implied,
        subjective=subjective,
        env=env,
        instruments=instruments,
        constraints=constraints,
        grid=grid,
        quad=quad,
        n_cap=n_cap,
        seed=seed,
    )


def load_scenario(path) -> Scenario:
    """Parse and validate a TOML scenario file."""
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ScenarioError(f"{p}: cannot read scenario file ({exc})") from None
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ScenarioError(f"{p}: invalid TOML: {exc}") from None
    return scenario_from_dict(data, where=str(p))


def build_problem(scenario: Scenario) -> tuple[ExposureProblem, DensityGrid, DensityGrid]:
    """Tabulate both densities and assemble the optimizer inputs."""
    implied = price_density_grid(scenario.implied, scenario.quad)
    subjective = price_density_grid(scenario.subjective, scenario.quad)
    problem = ExposureProblem.from_densities(
        implied, subjective, scenario.instruments, scenario.env
    )
    return problem, implied, subjective


def tabulate_densities(scenario: Scenario, points: int = DENSITY_TABLE_POINTS):
    """Both price densities on one shared log-spaced grid (plot-ready).

    Returns ``(x, implied_pdf, subjective_pdf)`` covering the union of the
    two models' quadrature ranges.
    """
    quad = scenario.quad
    lo, hi = math.inf, -math.inf
    for model in (scenario.implied, scenario.subjective):
        lam, xi = analytic_logreturn_stats(model)
        half = quad.log_return_halfwidth * math.sqrt(xi)
        lo, hi = min(lo, lam - half), max(hi, lam + half)
    l = np.linspace(lo, hi, points)
    x = np.exp(l)
    implied_pdf = marginal_logreturn_pdf(l, scenario.implied, quad) / x
    subjective_pdf = marginal_logreturn_pdf(l, scenario.subjective, quad) / x
    return x, implied_pdf, subjective_pdf


def cmd_price(scenario: Scenario) -> dict:
    """Per-instrument market/subjective values plus tabulated densities.

    All numbers come straight from the library; the CLI layer only formats.
    """
    problem, _, _ = build_problem(scenario)
    rows = [
        {
            "label": payoff.label,
            "market_value": val.market_value,
            "subjective_value": val.subjective_value,
            "difference": val.edge,
        }
        for payoff, val in zip(scenario.instruments, problem.valuations)
    ]
    x, implied_pdf, subjective_pdf = tabulate_densities(scenario)
    return {
        "instruments": rows,
        "density_table": {
            "x": x,
            "implied_pdf": implied_pdf,
            "subjective_pdf": subjective_pdf,
        },
    }


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _constraint_columns(constraints) -> list[str]:
    """One CSV column name per constraint; repeated orders get a suffix."""
    seen: dict[str, int] = {}
    names = []
    for c in constraints:
        base = f"rho_{c.order}_unit"
        k = seen.get(base, 0)
        seen[base] = k + 1
        names.append(base if k == 0 else f"{base}_{k + 1}")
    return names


def _write_densities(path: Path, scenario: Scenario) -> None:
    x, implied_pdf, subjective_pdf = tabulate_densities(scenario)
    rows = (
        [_fmt(a), _fmt(b), _fmt(c)] for a, b, c in zip(x, implied_pdf, subjective_pdf)
    )
    _write_csv(path, ["x", "implied_pdf", "subjective_pdf"], rows)


def _summarize(optimum: Optimum, scenario: Scenario, problem: ExposureProblem) -> dict:
    if optimum.n == 0.0:
        status, binding = "feasible", None
    else:
        fe = max_exposure(optimum.direction, scenario.constraints, problem, scenario.n_cap)
        status, binding = fe.status, fe.binding_constraint
    return {
        "angles_deg": [float(a) for a in optimum.direction.degrees()],
        "n": float(optimum.n),
        "quantities": [float(q) for q in optimum.quantities],
        "xi": float(optimum.xi),
        "binding_constraint": binding,
        "status": status,
    }


def cmd_scan(
    scenario: Scenario,
    out_dir,
    resolution=None,
    refine_iterations: int = 0,
    seed: int | None = None,
) -> dict:
    """Sweep the angle grid, write scan.csv / summary.json / densities.csv.

    ``resolution`` overrides the scenario's grid; ``seed`` overrides its
    refinement seed. Returns the summary dictionary that was written.
    """
    if scenario.n_instruments < 2:
        raise ScenarioError(
            "scan needs at least 2 instruments: exposure angles parameterize "
            "direction in quantity space, and 1 instrument has no angle"
        )
    problem, _, _ = build_problem(scenario)
    res = resolution if resolution is not None else scenario.grid
    records, optimum = scan(res, scenario.constraints, problem, n_cap=scenario.n_cap)
    if refine_iterations:
        optimum = stochastic_refine(
            optimum,
            scenario.constraints,
            problem,
            refine_iterations,
            rng_seed=scenario.seed if seed is None else seed,
            n_cap=scenario.n_cap,
        )

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    n_angles = scenario.n_instruments - 1
    header = [f"alpha_{j}_deg" for j in range(1, n_angles + 1)]
    header += _constraint_columns(scenario.constraints)
    header += ["n_max", "status", "xi_best"]

    def rows():
        for rec in records:
            fe = rec.feasible
            if fe.status != INFEASIBLE and rec.unit_xi > 0.0:
                drift = abs(rec.best_xi - fe.n_max * rec.unit_xi)
                if drift > 1e-9 * max(1.0, abs(rec.best_xi)):
                    raise RuntimeError("scan row violates best_xi = n_max * unit_xi")
            cells = [_fmt(a) for a in rec.direction.degrees()]
            cells += [_fmt(r) for r in fe.unit_rhos]
            cells += [_fmt(fe.n_max), fe.status, _fmt(rec.best_xi)]
            yield cells

    _write_csv(out / "scan.csv", header, rows())
    summary = _summarize(optimum, scenario, problem)
    with open(out / "summary.json", "w", encoding="utf-8", newline="") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    _write_densities(out / "densities.csv", scenario)
    return summary


def _print_price_report(report: dict, stream=None) -> None:
    stream = stream or sys.stdout
    rows = report["instruments"]
    width = max(10, max(len(r["label"]) for r in rows))
    print(f"{'instrument':<{width}}  {'market':>14}  {'subjective':>14}  {'difference':>14}", file=stream)
    for r in rows:
        print(
            f"{r['label']:<{width}}  {r['market_value']:>14.8f}  "
            f"{r['subjective_value']:>14.8f}  {r['difference']:>14.8f}",
            file=stream,
        )


def _print_scan_summary(summary: dict, out_dir, stream=None) -> None:
    stream = stream or sys.stdout
    angles = ", ".join(f"{a:.4f}" for a in summary["angles_deg"])
    quantities = ", ".join(f"{q:.6f}" for q in summary["quantities"])
    print(f"optimum: xi = {summary['xi']:.10g}  n = {summary['n']:.10g}  angles_deg = [{angles}]", file=stream)
    print(f"quantities: [{quantities}]", file=stream)
    binding = summary["binding_constraint"]
    bound_note = "none" if binding is None else f"constraint {binding}"
    print(f"status: {summary['status']} (binding: {bound_note})", file=stream)
    print(f"wrote scan.csv, summary.json, densities.csv to {out_dir}", file=stream)


def _parse_resolution(text: str):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty resolution")
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid resolution {text!r}") from None
    return values[0] if len(values) == 1 else tuple(values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="derexpo",
        description="Value European derivative portfolios under subjective vs implied "
        "densities and optimize risk-constrained exposure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    price = sub.add_parser("price", help="value each instrument under both densities")
    price.add_argument("--config", required=True, help="scenario TOML file")
    price.add_argument("--out", help="optional directory for report.json and densities.csv")

    scan_p = sub.add_parser("scan", help="sweep exposure angles and report the optimum")
    scan_p.add_argument("--config", required=True, help="scenario TOML file")
    scan_p.add_argument("--out", required=True, help="output directory")
    scan_p.add_argument(
        "--resolution",
        type=_parse_resolution,
        default=None,
        metavar="R",
        help="nodes per angle, a single int or comma-separated per angle",
    )
    scan_p.add_argument("--refine", type=int, default=0, metavar="ITERS", help="stochastic refinement iterations")
    scan_p.add_argument("--seed", type=int, default=None, metavar="S", help="refinement seed (overrides scenario)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.config)
        if args.command == "price":
            report = cmd_price(scenario)
            _print_price_report(report)
            if args.out is not None:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
                with open(out / "report.json", "w", encoding="utf-8", newline="") as fh:
                    json.dump({"instruments": report["instruments"]}, fh, indent=2)
                    fh.write("\n")
                _write_densities(out / "densities.csv", scenario)
                print(f"wrote report.json, densities.csv to {out}")
        else:
            summary = cmd_scan(
                scenario,
                args.out,
                resolution=args.resolution,
                refine_iterations=args.refine,
                seed=args.seed,
            )
            _print_scan_summary(summary, args.out)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
