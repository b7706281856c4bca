"""Command-line interface.

Subcommands: plan, publish, estimate, attack, experiment, frontier, sd-demo.
Exit codes: 0 success, 2 configuration error, 3 data error.  Every randomized
subcommand requires --seed; all outputs are plain files, nothing touches the
network.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import figures
from .adversary import (
    classify_leakage,
    impossibility_frontier,
    posterior_exclusive_worstcase,
    posterior_independent,
)
from .dataio import load_published_view, parse_schema_decl
from .errors import ConfigError, DataError
from .estimator import error_bound, estimate, guarantee_radius
from .harness import DEFAULT_BANDS, RunConfig, publish, run_experiment
from .mechanism import (
    MINIMAL_BETA,
    PLANNER_POLICIES,
    MechanismParams,
    PrivacyBudget,
    UtilityBudget,
    expected_view_size,
    plan_parameters,
    view_size_ratio,
)
from .oracle import meaningfulness_experiment
from .queries import parse_query


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _parse_bands(text: str) -> tuple[int, ...]:
    try:
        bands = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"bands must be a comma list of integers, got {text!r}") from None
    if not bands:
        raise ConfigError("bands must not be empty")
    return bands


def _cmd_plan(args) -> int:
    plan = plan_parameters(
        args.n, args.m, args.k, args.gamma, policy=args.policy, failure_prob=args.failure_prob
    )
    rho = error_bound(plan.utility)
    _emit(
        {
            "alpha": plan.params.alpha,
            "beta": plan.params.beta,
            "d": plan.privacy.d,
            "gamma": plan.privacy.gamma,
            "k": plan.privacy.k,
            "r": plan.utility.r,
            "failure_prob": plan.utility.failure_prob,
            "rho": rho,
            "rho_sqrt_n": guarantee_radius(rho, args.n),
            "expected_view_size": expected_view_size(args.n, args.m, plan.params),
            "size_ratio_limit": view_size_ratio(args.k, args.gamma),
        }
    )
    return 0


def _run_config(args, **extra) -> RunConfig:
    return RunConfig(
        input_path=args.input,
        schema=parse_schema_decl(args.schema),
        out_dir=args.out_dir,
        seed=args.seed,
        k=args.k,
        gamma=args.gamma,
        alpha=args.alpha,
        beta=args.beta,
        policy=args.policy,
        **extra,
    )


def _cmd_publish(args) -> int:
    result = publish(_run_config(args))
    _emit(
        {
            "rows_read": result.rows_read,
            "n": result.instance.size,
            "view_size": result.view.view.size,
            "alpha": result.view.params.alpha,
            "beta": result.view.params.beta,
            "paths": {k: str(v) for k, v in result.paths.items()},
        }
    )
    return 0


def _cmd_estimate(args) -> int:
    view = load_published_view(args.view_dir)
    query = parse_query(args.query, view.domain.schema)
    utility = None
    if args.r is not None:
        utility = UtilityBudget(r=args.r, failure_prob=args.failure_prob)
    report = estimate(
        query, view, utility=utility, instance_size=args.n, clamp=args.clamp
    )
    _emit(
        {
            "query": query.text(),
            "estimate": report.estimate,
            "n_v": report.n_v,
            "n_d": report.n_d,
            "alpha": report.alpha,
            "beta": report.beta,
            "guarantee_radius": report.guarantee_radius,
        }
    )
    return 0


def _cmd_attack(args) -> int:
    params = MechanismParams(args.alpha, args.beta)
    budget = PrivacyBudget(d=args.d, gamma=args.gamma)
    if args.model == "independent":
        posterior = posterior_independent(args.prior, params, args.case == "present")
    else:
        posterior = posterior_exclusive_worstcase(args.prior, params)
    verdict = classify_leakage(args.prior, posterior, budget)
    _emit(
        {
            "model": args.model,
            "case": args.case if args.model == "independent" else "worst-case",
            "prior": args.prior,
            "posterior": posterior,
            "leakage": verdict.kind,
            "d": budget.d,
            "gamma": budget.gamma,
        }
    )
    return 0


def _cmd_experiment(args) -> int:
    config = _run_config(
        args,
        max_arity=args.arity,
        max_queries=args.max_queries,
        ranges_per_attribute=args.ranges_per_attribute,
        bands=_parse_bands(args.bands),
        large_query_threshold=args.threshold,
        write_figures=not args.no_figures,
        write_view=args.write_view,
    )
    result = run_experiment(config)
    payload = dict(result.summary)
    payload["paths"] = {k: str(v) for k, v in result.paths.items()}
    _emit(payload)
    return 0


def _parse_gamma_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ConfigError("gamma grid must be a single value or lo:hi:count")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 2 or not lo < hi:
        raise ConfigError("gamma grid needs lo < hi and count >= 2")
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _cmd_frontier(args) -> int:
    gammas = _parse_gamma_grid(args.gamma_grid)
    thresholds = [impossibility_frontier(args.n, args.m, g, args.c) for g in gammas]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "frontier.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["gamma", "d_threshold"])
        for g, d in zip(gammas, thresholds):
            writer.writerow([repr(g), repr(d)])
    paths = {"frontier": str(csv_path)}
    if not args.no_figures:
        paths["figure"] = str(figures.frontier_figure(gammas, thresholds, out_dir / "frontier.png"))
    _emit(
        {
            "n": args.n,
            "m": args.m,
            "c": args.c,
            "points": [{"gamma": g, "d_threshold": d} for g, d in zip(gammas, thresholds)],
            "paths": paths,
        }
    )
    return 0


def _parse_sweep(text: str) -> list[tuple[float, float]]:
    pairs = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        bits = part.split(":")
        if len(bits) != 2:
            raise ConfigError(f"sweep entries are alpha:beta pairs, got {part!r}")
        pairs.append((float(bits[0]), float(bits[1])))
    if not pairs:
        raise ConfigError("sweep is empty")
    return pairs


def _cmd_sd_demo(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pairs = _parse_sweep(args.sweep) if args.sweep else [(args.alpha, args.beta)]
    if any(v is None for pair in pairs for v in pair):
        raise ConfigError("give --alpha and --beta, or a --sweep list")

    rows = []
    reports = []
    for alpha, beta in pairs:
        report = meaningfulness_experiment(
            args.m,
            args.n,
            MechanismParams(alpha, beta),
            query_fraction_f=args.f,
            sd_threshold=args.sd_threshold,
            meaningless_fraction=args.fraction,
        )
        reports.append((alpha, beta, report))
        rows.append(
            {
                "alpha": alpha,
                "beta": beta,
                "fraction_below_threshold": report.fraction_below_threshold,
                "meaningless": report.meaningless,
                "query_count": len(report.per_query_sd),
            }
        )

    sd_path = out_dir / "sd_per_query.csv"
    with sd_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["alpha", "beta", "query_mask", "sd"])
        for alpha, beta, report in reports:
            for mask, sd in zip(report.query_masks, report.per_query_sd):
                writer.writerow([repr(alpha), repr(beta), mask, repr(sd)])
    paths = {"per_query": str(sd_path)}

    if not args.no_figures:
        last = reports[-1][2]
        paths["figure"] = str(
            figures.sd_figure(last.per_query_sd, last.sd_threshold, out_dir / "sd.png")
        )
        if len(reports) > 1:
            gaps = [alpha - beta for alpha, beta, _ in reports]
            fractions = [r.fraction_below_threshold for _, _, r in reports]
            paths["sweep_figure"] = str(
                figures.sweep_figure(gaps, fractions, out_dir / "sd_sweep.png")
            )
    _emit({"m": args.m, "n": args.n, "f": args.f, "runs": rows, "paths": paths})
    return 0


def _add_mechanism_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="input relation CSV (header row first)")
    parser.add_argument("--schema", required=True, help="schema declaration: name:kind,...")
    parser.add_argument("--out-dir", required=True, help="output directory")
    parser.add_argument("--seed", required=True, type=int, help="RNG seed (mandatory)")
    parser.add_argument("--k", type=float, help="prior multiplier (planned mode)")
    parser.add_argument("--gamma", type=float, help="posterior bound (planned mode)")
    parser.add_argument("--alpha", type=float, help="retention probability (explicit mode)")
    parser.add_argument("--beta", type=float, help="insertion probability (explicit mode)")
    parser.add_argument(
        "--policy", default=MINIMAL_BETA, choices=PLANNER_POLICIES, help="planner beta policy"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anonview",
        description="Publish noisy views of relations and analyze their utility and leakage.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="derive mechanism parameters from a privacy budget")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--m", required=True, type=int)
    p.add_argument("--k", required=True, type=float)
    p.add_argument("--gamma", required=True, type=float)
    p.add_argument("--policy", default=MINIMAL_BETA, choices=PLANNER_POLICIES)
    p.add_argument("--failure-prob", default=0.05, type=float)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("publish", help="anonymize a relation and write the release files")
    _add_mechanism_arguments(p)
    p.set_defaults(func=_cmd_publish)

    p = sub.add_parser("estimate", help="answer a counting query from a published view")
    p.add_argument("--view-dir", required=True, help="directory written by publish")
    p.add_argument("--query", required=True, help="query text (empty string counts everything)")
    p.add_argument("--r", type=float, help="utility constant for the guarantee radius")
    p.add_argument("--failure-prob", default=0.05, type=float)
    p.add_argument("--n", type=int, help="true instance size, if known")
    p.add_argument("--clamp", action="store_true", help="clamp the estimate to [0, n]")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("attack", help="posterior and leakage classification for one tuple")
    p.add_argument("--prior", required=True, type=float)
    p.add_argument("--alpha", required=True, type=float)
    p.add_argument("--beta", required=True, type=float)
    p.add_argument("--d", required=True, type=float)
    p.add_argument("--gamma", required=True, type=float)
    p.add_argument("--model", default="independent", choices=("independent", "exclusive"))
    p.add_argument("--case", default="present", choices=("present", "absent"))
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("experiment", help="sweep a query family over a fresh view")
    _add_mechanism_arguments(p)
    p.add_argument("--arity", default=3, type=int, help="maximum predicates per query")
    p.add_argument("--max-queries", type=int, help="cap on the family size (seeded subsample)")
    p.add_argument("--ranges-per-attribute", default=8, type=int)
    p.add_argument("--bands", default=",".join(str(b) for b in DEFAULT_BANDS))
    p.add_argument("--threshold", default=500, type=int, help="large-query cutoff for the summary")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--write-view", action="store_true", help="also write the publish files")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("frontier", help="prior-bound frontier calculator")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--m", required=True, type=int)
    p.add_argument("--c", required=True, type=float, help="caller-supplied frontier constant")
    p.add_argument("--gamma-grid", required=True, help="gamma value or lo:hi:count")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_frontier)

    p = sub.add_parser("sd-demo", help="balanced-query distinguishability experiment (exact)")
    p.add_argument("--m", required=True, type=int)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--f", default=0.2, type=float, help="query balance half-width")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--sweep", help="comma list of alpha:beta pairs")
    p.add_argument("--sd-threshold", default=0.5, type=float)
    p.add_argument("--fraction", default=2.0 / 3.0, type=float)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_sd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
