"""The insert-remove mechanism: parameter calculus, planning, and sampling.

The mechanism keeps each true row independently with probability alpha and
injects rows of the domain that are not in the instance at rate beta, then
publishes the per-attribute domains together with (alpha, beta).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError
from .model import DomainDescriptor, Relation, domain_size

MINIMAL_BETA = "minimal-beta"
SIMPLE_BETA = "simple-beta"
PLANNER_POLICIES = (MINIMAL_BETA, SIMPLE_BETA)

# Rejection sampling aborts once this many proposals have been consumed with
# fewer than 10% accepted; it signals a misconfigured dense regime.
_GUARD_MIN_ATTEMPTS = 1000
_GUARD_MIN_ACCEPT_RATE = 0.10


@dataclass(frozen=True)
class MechanismParams:
    """Retention probability alpha and insertion probability beta."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")


@dataclass(frozen=True)
class PrivacyBudget:
    """Prior bound d and posterior bound gamma; optionally the multiplier k with d = k*n/m."""

    d: float
    gamma: float
    k: float | None = None

    def __post_init__(self):
        if not 0.0 < self.d < 1.0:
            raise ConfigError(f"prior bound d must lie in (0, 1), got {self.d}")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"posterior bound gamma must lie in (0, 1), got {self.gamma}")
        if self.d >= self.gamma:
            raise ConfigError(f"budget requires d < gamma, got d={self.d}, gamma={self.gamma}")

    @classmethod
    def from_prior_multiplier(cls, k: float, n: int, m: int, gamma: float) -> "PrivacyBudget":
        if k <= 0:
            raise ConfigError("prior multiplier k must be positive")
        if not 1 <= n <= m:
            raise ConfigError("need 1 <= n <= m")
        return cls(d=k * n / m, gamma=gamma, k=k)

    def multiplier_consistent(self, n: int, m: int, rel_tol: float = 1e-12) -> bool:
        """True when the recorded k actually reproduces d = k*n/m for these sizes."""
        if self.k is None:
            return True
        expected = self.k * n / m
        return abs(self.d - expected) <= rel_tol * max(abs(self.d), abs(expected))


@dataclass(frozen=True)
class UtilityBudget:
    """Accuracy constant r and the acceptable failure probability of the guarantee."""

    r: float
    failure_prob: float

    def __post_init__(self):
        if self.r <= 0:
            raise ConfigError(f"utility constant r must be positive, got {self.r}")
        if not 0.0 < self.failure_prob < 1.0:
            raise ConfigError(f"failure_prob must lie in (0, 1), got {self.failure_prob}")


@dataclass(frozen=True)
class CheckResult:
    """Pass/fail verdict; failed inequalities are spelled out in `violations`."""

    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class PublishedView:
    """The released artifact plus the seed that produced it.

    The seed is recorded for reproducibility only; it is not part of the
    public release (the serializer keeps it out of the public files).
    """

    domain: DomainDescriptor
    view: Relation
    params: MechanismParams
    seed: int


class ParameterPlan(NamedTuple):
    params: MechanismParams
    privacy: PrivacyBudget
    utility: UtilityBudget


def check_privacy_params(params: MechanismParams, budget: PrivacyBudget) -> CheckResult:
    """Sufficient conditions for the mechanism to be (d, gamma)-private.

    Requires alpha <= 1 - d/gamma and beta >= (d/gamma)((1-gamma)/(1-d))*alpha,
    within the mechanism's beta <= alpha regime (with beta above alpha, absence
    from the view becomes evidence of presence and the guarantee genuinely
    fails; the enumeration oracle exhibits witnesses).
    """
    ratio = budget.d / budget.gamma
    alpha_cap = 1.0 - ratio
    beta_floor = ratio * ((1.0 - budget.gamma) / (1.0 - budget.d)) * params.alpha
    violations = []
    if params.alpha > alpha_cap:
        violations.append(
            f"alpha {params.alpha:.6g} > 1 - d/gamma = {alpha_cap:.6g}"
        )
    if params.beta < beta_floor:
        violations.append(
            f"beta {params.beta:.6g} < (d/gamma)((1-gamma)/(1-d))*alpha = {beta_floor:.6g}"
        )
    if params.beta > params.alpha:
        violations.append(
            f"beta {params.beta:.6g} > alpha {params.alpha:.6g} (outside the retention-dominant regime)"
        )
    return CheckResult(not violations, tuple(violations))


def check_utility_params(
    params: MechanismParams, n: int, m: int, utility: UtilityBudget
) -> CheckResult:
    """Conditions under which the estimator's additive-error guarantee holds."""
    if n < 1:
        raise ConfigError("instance size n must be at least 1")
    if m < n:
        raise ConfigError("domain size m must be at least n")
    beta_cap = (utility.r / 4.0) * (n / m)
    violations = []
    if params.alpha < 0.5:
        violations.append(f"alpha {params.alpha:.6g} < 1/2")
    if params.beta > beta_cap:
        violations.append(f"beta {params.beta:.6g} > (r/4)(n/m) = {beta_cap:.6g}")
    return CheckResult(not violations, tuple(violations))


def plan_parameters(
    n: int,
    m: int,
    k: float,
    gamma: float,
    policy: str = MINIMAL_BETA,
    failure_prob: float = 0.05,
) -> ParameterPlan:
    """Pick alpha = 1/2 and a beta that satisfies both checkers.

    minimal-beta places beta at the privacy checker's lower bound; simple-beta
    uses the coarser beta = d/gamma = (k/gamma)(n/m).  Either way the returned
    utility budget carries r = 4k/gamma.
    """
    if policy not in PLANNER_POLICIES:
        raise ConfigError(f"unknown planner policy {policy!r}; expected one of {PLANNER_POLICIES}")
    if k <= 0:
        raise ConfigError("prior multiplier k must be positive")
    if not 0.0 < gamma < 1.0:
        raise ConfigError(f"gamma must lie in (0, 1), got {gamma}")
    if n < 1 or m < n:
        raise ConfigError("need 1 <= n <= m")
    d = k * n / m
    if not d < gamma / 2.0:
        raise ConfigError(
            f"budget too aggressive for alpha = 1/2 plan: d = {d:.6g} >= gamma/2 = {gamma / 2:.6g}"
        )
    alpha = 0.5
    utility = UtilityBudget(r=4.0 * k / gamma, failure_prob=failure_prob)
    if policy == MINIMAL_BETA:
        beta = (d / gamma) * ((1.0 - gamma) / (1.0 - d)) * alpha
    else:
        # beta = d/gamma, written through the utility checker's float path so
        # the planned beta sits exactly on (r/4)(n/m) rather than one ulp over
        beta = (utility.r / 4.0) * (n / m)
    params = MechanismParams(alpha, beta)
    privacy = PrivacyBudget(d=d, gamma=gamma, k=k)
    return ParameterPlan(params, privacy, utility)


def expected_view_size(n: int, m: int, params: MechanismParams) -> float:
    """n*alpha + (m - n)*beta, the mean published size."""
    if m < n:
        raise ConfigError("domain size m must be at least n")
    return n * params.alpha + (m - n) * params.beta


def view_size_ratio(k: float, gamma: float) -> float:
    """Expected |V|/|I| in the large-domain limit of the planned parameters: 1/2 + k/gamma."""
    if k <= 0:
        raise ConfigError("prior multiplier k must be positive")
    if gamma <= 0:
        raise ConfigError("gamma must be positive")
    if gamma >= 1:
        warnings.warn(
            f"gamma = {gamma} lies outside (0, 1); the ratio is a formula endpoint, "
            "not a usable budget",
            stacklevel=2,
        )
    return 0.5 + k / gamma


def _sample_outside(
    domain: DomainDescriptor,
    exclude_packed: np.ndarray,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw `count` distinct packed codes uniformly from the domain minus `exclude_packed`.

    Per-attribute uniform index draws with rejection of duplicates and of
    excluded rows; the domain is never materialized. Acceptance below 10%
    (after a warm-up) aborts: the requested view is too dense for rejection.
    """
    sizes = domain.attribute_sizes
    accepted = np.empty(0, dtype=np.int64)
    attempts = 0
    need = count
    while need > 0:
        batch = need + need // 2 + 16
        draws = np.empty((batch, len(sizes)), dtype=np.int64)
        for j, s in enumerate(sizes):
            draws[:, j] = rng.integers(0, s, size=batch)
        packed = domain.pack_codes(draws)
        fresh = packed[~np.isin(packed, exclude_packed) & ~np.isin(packed, accepted)]
        # order-preserving dedupe so the batch behaves like sequential draws
        _, first = np.unique(fresh, return_index=True)
        fresh = fresh[np.sort(first)]
        take = fresh[:need]
        accepted = np.concatenate([accepted, take])
        need -= len(take)
        attempts += batch
        if attempts >= _GUARD_MIN_ATTEMPTS and (count - need) < _GUARD_MIN_ACCEPT_RATE * attempts:
            raise RuntimeError(
                "insertion sampling acceptance fell below 10%: the domain is too dense "
                "relative to the requested insertions"
            )
    return accepted


def anonymize(
    instance: Relation,
    domain: DomainDescriptor,
    params: MechanismParams,
    seed: int,
) -> PublishedView:
    """Publish a noisy view of the instance.

    Every instance row is retained independently with probability alpha. The
    injected-row count is drawn Binomial(m - n, beta), then that many distinct
    rows are sampled uniformly without replacement from the domain minus the
    instance. Identical arguments yield bit-identical views: the removal and
    insertion passes consume independent streams derived from the seed, with
    removal draws indexed by the sorted instance order.
    """
    if instance.schema != domain.schema:
        raise ValueError("instance and domain schemas differ")
    m = domain_size(domain)
    rows = sorted(instance.tuples)
    n = len(rows)
    codes = domain.encode_rows(rows)
    instance_packed = np.sort(domain.pack_codes(codes)) if n else np.empty(0, dtype=np.int64)

    root = np.random.SeedSequence(seed)
    remove_stream, insert_stream = (np.random.default_rng(s) for s in root.spawn(2))

    if n:
        keep = remove_stream.random(n) < params.alpha
        kept = [row for row, flag in zip(rows, keep) if flag]
    else:
        kept = []

    inserted: list = []
    outside = m - n
    if outside > 0:
        to_insert = int(insert_stream.binomial(outside, params.beta))
        if to_insert:
            drawn = _sample_outside(domain, instance_packed, to_insert, insert_stream)
            inserted = domain.decode_codes(domain.unpack_codes(drawn))

    view = Relation._trusted(instance.schema, frozenset(kept).union(inserted))
    return PublishedView(domain=domain, view=view, params=params, seed=seed)
