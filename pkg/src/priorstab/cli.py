"""Command-line surface: analyze, path, scenarios, baselines.

Exit codes: 0 success, 2 malformed input or parameter, 3 inputs that do not
fit together, 4 internal solver failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import __version__
from .beliefs import default_catalog
from .core import DecisionProblem, Prior
from .io import (
    INADMISSIBLE,
    NOT_BAYES,
    ConsistencyError,
    InputError,
    format_number,
    load_costs,
    load_daily,
    load_monthly,
    load_priors,
    load_utilities,
    load_weights,
    write_data_rows,
    write_json,
    write_rows,
)
from .lp import BandBox, SolverError
from .scenarios import (
    generic_labels,
    kmeans_partition,
    label_regimes,
    monthly_features,
    portfolio_returns,
    utility_matrix,
)
from .selection import (
    CostAssignment,
    gamma_aggregate,
    rex_score,
    selection_path,
    variance_cost,
)
from .stability import BisectionConfig, NeedKind, RadiusKind, stability_profile

__all__ = ["main", "run"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="priorstab",
        description="Stability analysis of Bayes-optimal acts under banded prior perturbations.",
    )
    parser.add_argument("--version", action="version", version=f"priorstab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    analyze = sub.add_parser(
        "analyze",
        help="robustness radius and contamination need for every (act, prior) pair",
    )
    analyze.add_argument("--utilities", required=True, help="utilities CSV (act,<state>,...)")
    analyze.add_argument(
        "--priors", help="priors CSV (prior,<state>,...); packaged catalog when omitted"
    )
    analyze.add_argument(
        "--tol", type=float, default=1e-6, help="bisection tolerance (default 1e-6)"
    )
    analyze.add_argument("--out", default=".", help="output directory (default .)")
    analyze.set_defaults(func=cmd_analyze)

    path = sub.add_parser(
        "path", help="cost-adjusted selection path over the trade-off weight lambda"
    )
    path.add_argument("--utilities", required=True)
    path.add_argument("--priors", help="priors CSV; packaged catalog when omitted")
    path.add_argument("--prior", help="prior name (may be omitted with a single-prior file)")
    path.add_argument(
        "--cost-mode", choices=("variance", "file"), default="variance",
        help="per-act costs: utility-row variance, or an explicit file",
    )
    path.add_argument("--costs", help="costs CSV (act,cost); required with --cost-mode file")
    path.add_argument("--lambda-max", type=float, default=3.0, help="grid endpoint (default 3)")
    path.add_argument("--grid", type=float, default=0.01, help="grid step (default 0.01)")
    path.add_argument("--tol", type=float, default=1e-6)
    path.add_argument("--out", default=".")
    path.set_defaults(func=cmd_path)

    scen = sub.add_parser(
        "scenarios", help="build a regime-conditioned utility matrix from return data"
    )
    scen.add_argument("--monthly", required=True, help="monthly CSV (date,<asset>,...[,market_vol])")
    scen.add_argument("--weights", required=True, help="weights CSV (portfolio,<asset>,...)")
    scen.add_argument("--daily", help="daily CSV (date,<market>) for realized volatility")
    scen.add_argument("--market", help="market asset column (default: first asset)")
    scen.add_argument("--seed", type=int, default=42, help="clustering seed (default 42)")
    scen.add_argument("--k", type=int, default=4, help="number of regimes (default 4)")
    scen.add_argument("--out", default=".")
    scen.set_defaults(func=cmd_scenarios)

    base = sub.add_parser(
        "baselines", help="band-envelope and trust-blend rankings for comparison"
    )
    base.add_argument("--utilities", required=True)
    base.add_argument("--priors", help="priors CSV; packaged catalog when omitted")
    base.add_argument("--prior", help="prior name (may be omitted with a single-prior file)")
    base.add_argument("--epsilon", type=float, default=0.1, help="band radius (default 0.1)")
    base.add_argument("--eta", type=float, default=0.5, help="pessimism weight (default 0.5)")
    base.add_argument("--mu", type=float, default=0.5, help="trust weight (default 0.5)")
    base.add_argument("--out", default=".")
    base.set_defaults(func=cmd_baselines)
    return parser


def _in_unit_interval(value: float, flag: str) -> float:
    if not 0.0 <= value <= 1.0:
        raise InputError(f"{flag} must lie in [0, 1], got {value!r}")
    return float(value)


def _resolve_priors(priors_arg, problem: DecisionProblem) -> list[Prior]:
    if priors_arg:
        states, priors = load_priors(priors_arg)
        source = priors_arg
    else:
        catalog = default_catalog()
        states, priors = catalog.states, list(catalog.entries)
        source = "packaged prior catalog"
    if set(states) != set(problem.states):
        raise ConsistencyError(
            f"{source}: prior states {list(states)} do not match "
            f"utility states {list(problem.states)}"
        )
    if states != problem.states:
        index = [states.index(s) for s in problem.states]
        priors = [Prior(p.name, p.mass[index]) for p in priors]
    return priors


def _select_prior(priors: list[Prior], name: str | None) -> Prior:
    if name is None:
        if len(priors) == 1:
            return priors[0]
        raise InputError(
            f"--prior is required when several priors are available "
            f"({', '.join(p.name for p in priors)})"
        )
    for p in priors:
        if p.name == name:
            return p
    raise InputError(f"no prior named {name!r} (available: {', '.join(p.name for p in priors)})")


def _rob_cell(row):
    return row.radius.epsilon if row.radius.kind is RadiusKind.VALUE else NOT_BAYES


def _con_cell(row):
    return row.need.epsilon if row.need.kind is NeedKind.VALUE else INADMISSIBLE


def cmd_analyze(args) -> int:
    problem = load_utilities(args.utilities)
    priors = _resolve_priors(args.priors, problem)
    config = BisectionConfig(tolerance=args.tol)
    profile = stability_profile(problem, priors, config)

    csv_rows = []
    json_rows = []
    for row in profile.rows:
        csv_rows.extend(
            [
                (row.prior, row.act, "expected_utility", row.expected_utility),
                (row.prior, row.act, "is_bayes", row.is_bayes),
                (row.prior, row.act, "rob", _rob_cell(row)),
                (row.prior, row.act, "con", _con_cell(row)),
            ]
        )
        certificate = None
        if row.need.kind is NeedKind.INFEASIBLE:
            certificate = {
                "weights": {act: w for act, w in row.need.certificate.weights.items()},
                "margins": [float(m) for m in row.need.certificate.margins],
            }
        json_rows.append(
            {
                "prior": row.prior,
                "act": row.act,
                "is_bayes": row.is_bayes,
                "expected_utility": row.expected_utility,
                "rob": _rob_cell(row),
                "con": _con_cell(row),
                "certificate": certificate,
            }
        )
    write_rows(os.path.join(args.out, "stability.csv"), ["prior", "act", "measure", "value"], csv_rows)
    write_json(
        os.path.join(args.out, "stability.json"),
        {
            "report": "stability",
            "tolerance": config.tolerance,
            "acts": list(problem.acts),
            "states": list(problem.states),
            "priors": [{"name": p.name, "mass": [float(x) for x in p.mass]} for p in priors],
            "rows": json_rows,
        },
    )
    for prior in priors:
        bayes = [r.act for r in profile.for_prior(prior.name) if r.is_bayes]
        print(f"{prior.name}: optimal {', '.join(bayes)}")
    print(f"wrote stability.csv and stability.json to {args.out}")
    return 0


def _cost_assignment(args, problem: DecisionProblem) -> CostAssignment:
    if args.cost_mode == "variance":
        if args.costs:
            raise InputError("--costs is only read with --cost-mode file")
        return variance_cost(problem)
    if not args.costs:
        raise InputError("--cost-mode file requires --costs")
    table = load_costs(args.costs)
    missing = [a for a in problem.acts if a not in table]
    extra = [a for a in table if a not in problem.acts]
    if missing or extra:
        raise ConsistencyError(
            f"{args.costs}: cost acts do not match utility acts "
            f"(missing: {missing}, unknown: {extra})"
        )
    return CostAssignment(problem.acts, [table[a] for a in problem.acts])


def cmd_path(args) -> int:
    problem = load_utilities(args.utilities)
    priors = _resolve_priors(args.priors, problem)
    prior = _select_prior(priors, args.prior)
    if not args.lambda_max > 0.0:
        raise InputError(f"--lambda-max must be positive, got {args.lambda_max!r}")
    if not args.grid > 0.0:
        raise InputError(f"--grid must be positive, got {args.grid!r}")
    costs = _cost_assignment(args, problem)
    config = BisectionConfig(tolerance=args.tol)
    profile = stability_profile(problem, [prior], config)
    path = selection_path(profile, costs, prior.name, args.lambda_max, args.grid)

    lines_rows = []
    lines_json = []
    for line in path.lines:
        intercept = INADMISSIBLE if line.inadmissible else line.intercept
        cost = costs.normalized(line.act)
        lines_rows.append((line.act, intercept, line.slope, cost))
        lines_json.append(
            {
                "act": line.act,
                "intercept": intercept,
                "slope": line.slope,
                "cost": cost,
                "inadmissible": line.inadmissible,
            }
        )
    by_act = {line.act: line for line in path.lines}
    grid_rows = [
        (lam, act, by_act[act].at(lam))
        for lam, act in zip(path.lambda_grid, path.grid_selected)
    ]
    write_rows(os.path.join(args.out, "path_lines.csv"), ["act", "intercept", "slope", "cost"], lines_rows)
    write_rows(os.path.join(args.out, "path_grid.csv"), ["lambda", "act", "score"], grid_rows)
    write_rows(
        os.path.join(args.out, "path_breakpoints.csv"),
        ["lambda"],
        [(b,) for b in path.breakpoints],
    )
    write_json(
        os.path.join(args.out, "path.json"),
        {
            "report": "path",
            "prior": prior.name,
            "lambda_max": float(args.lambda_max),
            "grid_step": float(args.grid),
            "cost_mode": args.cost_mode,
            "lines": lines_json,
            "breakpoints": [float(b) for b in path.breakpoints],
            "segments": [
                {"lo": seg.lo, "hi": seg.hi, "act": seg.act} for seg in path.segments
            ],
            "grid": [
                {"lambda": float(lam), "selected": act, "score": by_act[act].at(lam)}
                for lam, act in zip(path.lambda_grid, path.grid_selected)
            ],
        },
    )
    for seg in path.segments:
        print(f"lambda in [{format_number(seg.lo)}, {format_number(seg.hi)}]: {seg.act}")
    print(f"wrote path_grid.csv, path_lines.csv, path_breakpoints.csv, path.json to {args.out}")
    return 0


def cmd_scenarios(args) -> int:
    panel = load_monthly(args.monthly)
    book = load_weights(args.weights)
    if args.k < 1:
        raise InputError(f"--k must be at least 1, got {args.k}")
    market = args.market if args.market else panel.assets[0]
    if market not in panel.assets:
        raise InputError(f"--market {market!r} is not a column of {args.monthly}")
    if args.daily:
        daily_market, daily = load_daily(args.daily)
        if daily_market != market:
            raise ConsistencyError(
                f"{args.daily}: daily column {daily_market!r} is not the market asset {market!r}"
            )
        if panel.volatility is None:
            panel = replace(panel, daily=daily)
        else:
            print("note: monthly file carries market_vol; daily file ignored")
    if set(book.assets) != set(panel.assets):
        raise ConsistencyError(
            f"{args.weights}: weight assets {sorted(book.assets)} do not match "
            f"monthly assets {sorted(panel.assets)}"
        )

    features = monthly_features(panel, market)
    model = kmeans_partition(features, k=args.k, seed=args.seed, months=panel.months)
    model = label_regimes(model) if args.k == 4 else generic_labels(model)
    returns = portfolio_returns(panel, book)
    problem = utility_matrix(returns, model, book.names)

    write_data_rows(
        os.path.join(args.out, "regimes.csv"),
        ["month", "cluster", "label"],
        [
            (month, int(cluster), model.labels[int(cluster)])
            for month, cluster in zip(panel.months, model.assignment)
        ],
    )
    write_data_rows(
        os.path.join(args.out, "utilities.csv"),
        ["act", *problem.states],
        [(act, *problem.row(act)) for act in problem.acts],
    )
    sizes = {model.labels[j]: int((model.assignment == j).sum()) for j in range(model.k)}
    print("regime sizes: " + ", ".join(f"{name}={sizes[name]}" for name in problem.states))
    print(f"wrote regimes.csv and utilities.csv to {args.out}")
    return 0


def cmd_baselines(args) -> int:
    problem = load_utilities(args.utilities)
    priors = _resolve_priors(args.priors, problem)
    prior = _select_prior(priors, args.prior)
    epsilon = _in_unit_interval(args.epsilon, "--epsilon")
    eta = _in_unit_interval(args.eta, "--eta")
    mu = _in_unit_interval(args.mu, "--mu")

    band = BandBox(prior.mass, epsilon)
    worst = gamma_aggregate(problem, band, "minimax")
    best = gamma_aggregate(problem, band, "maximax")
    mixed = gamma_aggregate(problem, band, "mix", eta)
    rex = rex_score(problem, prior, mu)

    rows = []
    for act in problem.acts:
        rows.append((prior.name, act, "gamma_min", worst.values[act]))
        rows.append((prior.name, act, "gamma_max", best.values[act]))
        rows.append((prior.name, act, "rex", rex.values[act]))
    write_rows(os.path.join(args.out, "baselines.csv"), ["prior", "act", "measure", "value"], rows)
    print(f"band radius {format_number(epsilon)} around {prior.name}")
    print(f"worst-case optimal: {', '.join(worst.optimal)}")
    print(f"best-case optimal: {', '.join(best.optimal)}")
    print(f"mixed (eta={format_number(eta)}) optimal: {', '.join(mixed.optimal)}")
    print(f"trust blend (mu={format_number(mu)}) optimal: {', '.join(rex.optimal)}")
    print(f"wrote baselines.csv to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_usage(file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InputError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"internal solver error: {exc}", file=sys.stderr)
        return 4


def run() -> None:
    raise SystemExit(main())
