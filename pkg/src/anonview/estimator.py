"""Counting-query estimation from a published view, with the error calculus.

EST(Q, V) = (n_V - beta*n_D) / (alpha - beta) where n_V = |Q ∩ V| and
n_D = |Q ∩ D|.  The estimate is deterministic given the view and is left
unclamped by default: wildly negative answers for small queries are part of
the privacy story, not a bug.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .mechanism import MechanismParams, PublishedView, UtilityBudget
from .model import ConjunctiveQuery, domain_size, eval_query_domain, eval_query_instance


@dataclass(frozen=True)
class EstimateReport:
    estimate: float
    n_v: int
    n_d: int
    alpha: float
    beta: float
    guarantee_radius: float | None = None


def estimate_from_counts(
    n_v: float,
    n_d: float,
    params: MechanismParams,
    clamp: bool = False,
    instance_size: int | None = None,
) -> float:
    if params.alpha == params.beta:
        raise ConfigError("estimator undefined (division by zero): alpha equals beta")
    est = (n_v - params.beta * n_d) / (params.alpha - params.beta)
    if clamp:
        est = max(0.0, est)
        if instance_size is not None:
            est = min(float(instance_size), est)
    return est


def estimate(
    query: ConjunctiveQuery,
    view: PublishedView,
    utility: UtilityBudget | None = None,
    instance_size: int | None = None,
    clamp: bool = False,
) -> EstimateReport:
    """Estimate |Q ∩ I| from the published view.

    When a utility budget is supplied the report carries the guarantee radius
    rho*sqrt(n).  The true instance size is unknown to an analyst, so when
    `instance_size` is not given it is itself estimated from the view via the
    all-domain query (floored at zero).
    """
    if query.schema != view.domain.schema:
        raise ValueError("query and view schemas differ")
    n_v = eval_query_instance(query, view.view)
    n_d = eval_query_domain(query, view.domain)
    est = estimate_from_counts(n_v, n_d, view.params, clamp=clamp, instance_size=instance_size)
    radius = None
    if utility is not None:
        if instance_size is not None:
            size = float(instance_size)
        else:
            size = max(
                0.0,
                estimate_from_counts(view.view.size, domain_size(view.domain), view.params),
            )
        radius = guarantee_radius(error_bound(utility), size)
    return EstimateReport(
        estimate=est,
        n_v=n_v,
        n_d=n_d,
        alpha=view.params.alpha,
        beta=view.params.beta,
        guarantee_radius=radius,
    )


def error_bound(utility: UtilityBudget) -> float:
    """rho = 2*sqrt(3*r*ln(2/failure_prob)); the error exceeds rho*sqrt(n) with
    probability at most failure_prob under the utility checker's conditions."""
    return 2.0 * math.sqrt(3.0 * utility.r * math.log(2.0 / utility.failure_prob))


def error_bound_from_multiplier(k: float, gamma: float, failure_prob: float) -> float:
    """The same bound expressed through the planner inputs (r = 4k/gamma)."""
    if k <= 0 or not 0.0 < gamma < 1.0:
        raise ConfigError("need k > 0 and gamma in (0, 1)")
    if not 0.0 < failure_prob < 1.0:
        raise ConfigError("failure_prob must lie in (0, 1)")
    return 4.0 * math.sqrt(3.0 * (k / gamma) * math.log(2.0 / failure_prob))


def guarantee_radius(rho: float, n: float) -> float:
    """rho*sqrt(n), the absolute-error radius of the guarantee."""
    if rho < 0:
        raise ConfigError("rho must be nonnegative")
    if n < 0:
        raise ConfigError("instance size must be nonnegative")
    return rho * math.sqrt(n)
