"""File-level workflows: publish a view, run the query experiment, summarize errors.

The experiment writes one scatter record per query (its text, the true count,
the estimate, the absolute error, and the domain count) plus a summary with
band-coverage fractions and the theoretical guarantee radius; a rendered
scatter figure lands next to the CSV.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import figures
from .dataio import (
    DOMAIN_FILE,
    PARAMS_FILE,
    VIEW_FILE,
    load_relation,
    write_domain_json,
    write_params_json,
    write_relation_csv,
)
from .errors import ConfigError, DataError
from .estimator import error_bound, guarantee_radius
from .mechanism import (
    MINIMAL_BETA,
    MechanismParams,
    ParameterPlan,
    PublishedView,
    UtilityBudget,
    anonymize,
    expected_view_size,
    plan_parameters,
)
from .model import Relation, Schema, build_domain, domain_size
from .queries import QueryCounter, QueryFamilySpec, generate_query_family

SCATTER_FILE = "scatter.csv"
SUMMARY_FILE = "summary.json"
SCATTER_FIGURE = "scatter.png"

DEFAULT_BANDS = (250, 500, 1000, 2000)

# distinct seed-derivation tags so the shuffle and the query family never
# share a stream with the mechanism
_SHUFFLE_TAG = 0x5F1E
_FAMILY_TAG = 0xFA41


@dataclass(frozen=True)
class RunConfig:
    """Inputs for publish / experiment runs.

    Exactly one of (k, gamma) and (alpha, beta) must be given: either the
    planner derives the mechanism parameters or they are set explicitly.
    """

    input_path: str | Path
    schema: Schema
    out_dir: str | Path
    seed: int | None = None
    k: float | None = None
    gamma: float | None = None
    alpha: float | None = None
    beta: float | None = None
    policy: str = MINIMAL_BETA
    failure_prob: float = 0.05
    max_arity: int = 3
    max_queries: int | None = None
    ranges_per_attribute: int = 8
    bands: tuple[int, ...] = DEFAULT_BANDS
    large_query_threshold: int = 500
    write_figures: bool = True
    write_view: bool = False

    def __post_init__(self):
        planned = self.k is not None or self.gamma is not None
        explicit = self.alpha is not None or self.beta is not None
        if planned and explicit:
            raise ConfigError("give either (k, gamma) or (alpha, beta), not both")
        if planned and (self.k is None or self.gamma is None):
            raise ConfigError("planned runs need both k and gamma")
        if explicit and (self.alpha is None or self.beta is None):
            raise ConfigError("explicit runs need both alpha and beta")
        if not planned and not explicit:
            raise ConfigError("give either (k, gamma) or (alpha, beta)")
        if not self.bands or any(b <= 0 for b in self.bands):
            raise ConfigError("bands must be positive widths")

    @property
    def planned(self) -> bool:
        return self.k is not None

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("this run is randomized; a seed is mandatory")
        return self.seed


@dataclass(frozen=True)
class PublishResult:
    view: PublishedView
    instance: Relation
    rows_read: int
    plan: ParameterPlan | None
    paths: dict[str, Path]


def _resolve_parameters(
    config: RunConfig, n: int, m: int
) -> tuple[MechanismParams, ParameterPlan | None]:
    if config.planned:
        plan = plan_parameters(
            n, m, config.k, config.gamma, policy=config.policy, failure_prob=config.failure_prob
        )
        return plan.params, plan
    return MechanismParams(config.alpha, config.beta), None


def _params_payload(
    config: RunConfig, params: MechanismParams, plan: ParameterPlan | None, n: int, m: int
) -> dict:
    payload = {
        "alpha": params.alpha,
        "beta": params.beta,
        "seed": config.require_seed(),
        "n": n,
        "m": m,
        "expected_view_size": expected_view_size(n, m, params),
    }
    if plan is not None:
        payload["planner"] = {
            "k": config.k,
            "gamma": config.gamma,
            "policy": config.policy,
            "d": plan.privacy.d,
            "r": plan.utility.r,
            "failure_prob": plan.utility.failure_prob,
        }
    return payload


def publish(config: RunConfig) -> PublishResult:
    """Anonymize the input and write view.csv, domain.json, params.json.

    View rows are shuffled with a seed-derived stream before writing so the
    file order carries no trace of which rows were retained versus injected.
    Identical configs produce byte-identical files.
    """
    seed = config.require_seed()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    loaded = load_relation(config.input_path, config.schema)
    instance = loaded.relation
    domain = build_domain(instance)
    n, m = instance.size, domain_size(domain)
    params, plan = _resolve_parameters(config, n, m)

    view = anonymize(instance, domain, params, seed)
    rows = sorted(view.view.tuples)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence((seed, _SHUFFLE_TAG)))
    order = shuffle_rng.permutation(len(rows))
    shuffled = [rows[i] for i in order]

    paths = {
        "view": out_dir / VIEW_FILE,
        "domain": out_dir / DOMAIN_FILE,
        "params": out_dir / PARAMS_FILE,
    }
    write_relation_csv(paths["view"], domain.schema, shuffled)
    write_domain_json(paths["domain"], domain)
    write_params_json(paths["params"], _params_payload(config, params, plan, n, m))
    return PublishResult(
        view=view, instance=instance, rows_read=loaded.rows_read, plan=plan, paths=paths
    )


@dataclass(frozen=True)
class ScatterRecord:
    """One experiment dot: x = Q(I), y = EST(Q, V)."""

    query_text: str
    q_of_i: int
    est: float
    abs_error: float
    n_d: int


@dataclass(frozen=True)
class ExperimentResult:
    records: list[ScatterRecord]
    summary: dict
    paths: dict[str, Path]


def _summarize_records(
    q_of_i: np.ndarray,
    est: np.ndarray,
    bands: tuple[int, ...],
    threshold: int,
) -> dict:
    abs_err = np.abs(q_of_i - est)
    large = q_of_i >= threshold
    summary: dict = {
        "query_count": int(len(q_of_i)),
        "large_query_threshold": int(threshold),
        "large_query_count": int(large.sum()),
        "band_coverage": {str(b): float((abs_err <= b).mean()) for b in bands},
    }
    if large.any():
        summary["band_coverage_large"] = {
            str(b): float((abs_err[large] <= b).mean()) for b in bands
        }
        summary["mean_signed_error_large"] = float((est[large] - q_of_i[large]).mean())
    else:
        summary["band_coverage_large"] = None
        summary["mean_signed_error_large"] = None
    return summary


def run_experiment(config: RunConfig) -> ExperimentResult:
    """Publish a view in memory and sweep a selection-query family over it.

    Writes scatter.csv (one record per query), summary.json, and a rendered
    scatter figure; the same config and seed give byte-identical outputs.
    """
    seed = config.require_seed()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    loaded = load_relation(config.input_path, config.schema)
    instance = loaded.relation
    domain = build_domain(instance)
    n, m = instance.size, domain_size(domain)
    params, plan = _resolve_parameters(config, n, m)
    if params.alpha == params.beta:
        raise ConfigError("alpha must differ from beta for the estimator to exist")

    view = anonymize(instance, domain, params, seed)

    family_spec = QueryFamilySpec(
        max_arity=config.max_arity,
        max_queries=config.max_queries,
        ranges_per_attribute=config.ranges_per_attribute,
        seed=(seed ^ _FAMILY_TAG),
    )
    family = generate_query_family(domain, family_spec)
    if not family:
        raise ConfigError("query family is empty")

    instance_counter = QueryCounter(domain, instance)
    view_counter = QueryCounter(domain, view.view)
    q_of_i = instance_counter.count_many(family).astype(float)
    n_v = view_counter.count_many(family).astype(float)
    n_d = instance_counter.domain_counts(family)
    est = (n_v - params.beta * n_d) / (params.alpha - params.beta)

    records = [
        ScatterRecord(
            query_text=q.text(),
            q_of_i=int(qi),
            est=float(e),
            abs_error=float(abs(qi - e)),
            n_d=int(nd),
        )
        for q, qi, e, nd in zip(family, q_of_i, est, n_d)
    ]

    summary = _summarize_records(q_of_i, est, config.bands, config.large_query_threshold)
    summary["n"] = n
    summary["m"] = m
    summary["alpha"] = params.alpha
    summary["beta"] = params.beta
    summary["seed"] = seed
    if plan is not None:
        utility = plan.utility
    elif params.beta > 0:
        # the r for which beta sits exactly at the utility checker's bound
        utility = UtilityBudget(r=4.0 * params.beta * m / n, failure_prob=config.failure_prob)
    else:
        utility = None
    if utility is not None:
        rho = error_bound(utility)
        summary["r"] = utility.r
        summary["failure_prob"] = utility.failure_prob
        summary["rho"] = rho
        summary["rho_sqrt_n"] = guarantee_radius(rho, n)
    else:
        summary["r"] = None
        summary["failure_prob"] = None
        summary["rho"] = None
        summary["rho_sqrt_n"] = None

    paths = {"scatter": out_dir / SCATTER_FILE, "summary": out_dir / SUMMARY_FILE}
    with paths["scatter"].open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["query", "q_of_i", "est", "abs_error", "n_d"])
        for rec in records:
            writer.writerow(
                [rec.query_text, rec.q_of_i, repr(rec.est), repr(rec.abs_error), rec.n_d]
            )
    paths["summary"].write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    if config.write_view:
        publish_paths = publish(config)
        paths.update(publish_paths.paths)
    if config.write_figures:
        paths["figure"] = out_dir / SCATTER_FIGURE
        figures.scatter_figure(
            q_of_i, est, band=max(config.bands), path=paths["figure"]
        )
    return ExperimentResult(records=records, summary=summary, paths=paths)


def read_scatter(path: str | Path) -> list[ScatterRecord]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"scatter file {path} does not exist")
    records = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["query", "q_of_i", "est", "abs_error", "n_d"]:
            raise DataError(f"unexpected scatter header {header!r}")
        for row_no, row in enumerate(reader, start=2):
            if len(row) != 5:
                raise DataError(f"scatter row {row_no} is malformed")
            try:
                records.append(
                    ScatterRecord(row[0], int(row[1]), float(row[2]), float(row[3]), int(row[4]))
                )
            except ValueError as exc:
                raise DataError(f"scatter row {row_no}: {exc}") from None
    if not records:
        raise DataError(f"scatter file {path} has no records")
    return records


def summarize_errors(
    scatter_path: str | Path, bands: tuple[int, ...] = DEFAULT_BANDS
) -> dict:
    """Band-coverage fractions, overall and split by true-count deciles.

    Small queries are expected to be far off (even negative); the decile split
    makes that visible without burying the well-estimated large queries.
    """
    records = read_scatter(scatter_path)
    q = np.array([r.q_of_i for r in records], dtype=float)
    err = np.array([r.abs_error for r in records], dtype=float)
    summary: dict = {
        "bands": list(bands),
        "query_count": len(records),
        "overall": {str(b): float((err <= b).mean()) for b in bands},
        "deciles": [],
    }
    edges = np.unique(np.quantile(q, np.linspace(0.0, 1.0, 11)))
    if len(edges) < 2:
        edges = np.array([q.min(), q.max() + 1.0])
    for lo, hi in zip(edges[:-1], edges[1:]):
        upper = (q <= hi) if hi == edges[-1] else (q < hi)
        mask = (q >= lo) & upper
        if not mask.any():
            continue
        summary["deciles"].append(
            {
                "q_of_i_low": float(lo),
                "q_of_i_high": float(hi),
                "count": int(mask.sum()),
                "coverage": {str(b): float((err[mask] <= b).mean()) for b in bands},
            }
        )
    return summary
