"""Exact brute-force machinery on tiny domains.

View distributions, Bayesian posteriors, statistical difference, and the
desk-scale distinguishability experiments are all computed by exhausting every
subset of the domain, so domain sizes are capped hard.  This module is the
independent oracle against which the closed forms in `adversary` and the
production sampler in `mechanism` are verified.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Mapping

import numpy as np

from .errors import ConfigError, DataError
from .mechanism import MechanismParams, anonymize
from .model import DomainDescriptor, Relation, Row, domain_size

ORACLE_DOMAIN_CAP = 20
_TABLE_DOMAIN_CAP = 16
_EXPERIMENT_DOMAIN_CAP = 12
_INDIST_DOMAIN_CAP = 10
_MASS_TOL = 1e-12


def domain_rows(domain: DomainDescriptor, cap: int = ORACLE_DOMAIN_CAP) -> tuple[Row, ...]:
    """All rows of the cross product, lexicographic. Tiny domains only."""
    m = domain_size(domain)
    if m > cap:
        raise ConfigError(f"oracle domain too large: m = {m} exceeds the cap of {cap}")
    return tuple(itertools.product(*domain.values))


def _subset_probs(inclusion: np.ndarray) -> np.ndarray:
    """probs[mask] = prod_j (inclusion[j] if bit j of mask else 1 - inclusion[j]).

    Index bit j corresponds to element j of the universe; the returned array
    has length 2**len(inclusion) and sums to 1.
    """
    probs = np.ones(1)
    for q in inclusion:
        probs = np.concatenate([probs * (1.0 - q), probs * q])
    return probs


def _mask_of(universe: tuple, members: Iterable) -> int:
    index = {row: j for j, row in enumerate(universe)}
    mask = 0
    for row in members:
        try:
            mask |= 1 << index[row]
        except KeyError:
            raise DataError(f"row {row!r} is not in the distribution's universe") from None
    return mask


@dataclass(frozen=True, eq=False)
class ViewDistribution:
    """Probability of every subset of a tiny universe, indexed by bitmask over `rows`."""

    rows: tuple[Hashable, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        if len(self.probabilities) != 1 << len(self.rows):
            raise ValueError("need one probability per subset of the universe")
        if np.any(self.probabilities < 0):
            raise ValueError("probabilities must be nonnegative")
        total = float(self.probabilities.sum())
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    def prob(self, view_rows: Iterable) -> float:
        return float(self.probabilities[_mask_of(self.rows, view_rows)])

    def items(self) -> Iterator[tuple[frozenset, float]]:
        for mask, p in enumerate(self.probabilities):
            members = frozenset(r for j, r in enumerate(self.rows) if mask >> j & 1)
            yield members, float(p)


def statistical_difference(a: ViewDistribution, b: ViewDistribution) -> float:
    """Sum_x |a(x) - b(x)| over the shared universe; ranges over [0, 2]."""
    if a.rows != b.rows:
        raise ConfigError("distributions live on different universes")
    return float(np.abs(a.probabilities - b.probabilities).sum())


def exact_view_distribution(
    instance: Relation, domain: DomainDescriptor, params: MechanismParams
) -> ViewDistribution:
    """Exact output distribution of the mechanism on this instance.

    Models the idealized per-row semantics: every row of the domain lands in
    the view independently, with probability alpha for instance rows and beta
    for the rest.  The production sampler's binomial-count-then-sample
    procedure induces the identical distribution (a test pins this down).
    """
    rows = domain_rows(domain)
    for row in instance.tuples:
        if row not in domain:
            raise DataError(f"instance row {row!r} lies outside the domain")
    member = np.array([row in instance.tuples for row in rows])
    inclusion = np.where(member, params.alpha, params.beta)
    return ViewDistribution(rows, _subset_probs(inclusion))


# ---------------------------------------------------------------------------
# Adversary priors


@dataclass(frozen=True, eq=False)
class IndependentPrior:
    """Tuple-independent prior: each domain row occurs with its own probability.

    Rows missing from the mapping never occur (probability 0); probability 1
    marks rows the adversary already knows.
    """

    domain: tuple[Row, ...]
    probabilities: Mapping[Row, float]

    def __post_init__(self):
        members = set(self.domain)
        for row, p in self.probabilities.items():
            if row not in members:
                raise ConfigError(f"prior row {row!r} is not in the domain")
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"prior probability {p} outside [0, 1]")

    def marginal(self, row: Row) -> float:
        return float(self.probabilities.get(row, 0.0))

    def is_bounded(self, d: float) -> bool:
        """d-bounded: every marginal is either at most d or exactly 1."""
        return all(self.marginal(r) <= d or self.marginal(r) == 1.0 for r in self.domain)

    def instances(self) -> Iterator[tuple[frozenset[Row], float]]:
        certain = [r for r in self.domain if self.marginal(r) == 1.0]
        uncertain = [(r, self.marginal(r)) for r in self.domain if 0.0 < self.marginal(r) < 1.0]
        if len(uncertain) > ORACLE_DOMAIN_CAP:
            raise ConfigError("too many uncertain rows to enumerate")
        for picks in itertools.product((False, True), repeat=len(uncertain)):
            prob = 1.0
            chosen = list(certain)
            for (row, p), take in zip(uncertain, picks):
                if take:
                    prob *= p
                    chosen.append(row)
                else:
                    prob *= 1.0 - p
            yield frozenset(chosen), prob


@dataclass(frozen=True, eq=False)
class ExclusivePrior:
    """Disjoint exclusion sets; exactly one member of each set occurs.

    Rows outside every set never occur.  Sets are mutually independent.
    """

    domain: tuple[Row, ...]
    groups: tuple[Mapping[Row, float], ...]

    def __post_init__(self):
        members = set(self.domain)
        seen: set[Row] = set()
        for group in self.groups:
            if not group:
                raise ConfigError("exclusion sets must be nonempty")
            mass = 0.0
            for row, p in group.items():
                if row not in members:
                    raise ConfigError(f"prior row {row!r} is not in the domain")
                if row in seen:
                    raise ConfigError(f"row {row!r} appears in two exclusion sets")
                seen.add(row)
                if p < 0.0:
                    raise ConfigError("prior probabilities must be nonnegative")
                mass += p
            if abs(mass - 1.0) > _MASS_TOL:
                raise ConfigError(f"exclusion set mass {mass!r} does not sum to 1")

    def marginal(self, row: Row) -> float:
        for group in self.groups:
            if row in group:
                return float(group[row])
        return 0.0

    def is_bounded(self, d: float) -> bool:
        return all(self.marginal(r) <= d or self.marginal(r) == 1.0 for r in self.domain)

    def instances(self) -> Iterator[tuple[frozenset[Row], float]]:
        choices = [[(r, p) for r, p in group.items() if p > 0.0] for group in self.groups]
        for combo in itertools.product(*choices):
            prob = 1.0
            for _, p in combo:
                prob *= p
            yield frozenset(r for r, _ in combo), prob


@dataclass(frozen=True, eq=False)
class ExplicitPrior:
    """Full probability mapping over instances of a tiny domain."""

    domain: tuple[Row, ...]
    instance_probabilities: Mapping[frozenset, float]

    def __post_init__(self):
        if len(self.domain) > ORACLE_DOMAIN_CAP:
            raise ConfigError("explicit priors are limited to tiny domains")
        members = set(self.domain)
        mass = 0.0
        for inst, p in self.instance_probabilities.items():
            if not frozenset(inst) <= members:
                raise ConfigError(f"instance {set(inst)!r} leaves the domain")
            if p < 0.0:
                raise ConfigError("instance probabilities must be nonnegative")
            mass += p
        if abs(mass - 1.0) > _MASS_TOL:
            raise ConfigError(f"instance probabilities sum to {mass!r}, not 1")

    def marginal(self, row: Row) -> float:
        return float(
            sum(p for inst, p in self.instance_probabilities.items() if row in inst)
        )

    def instances(self) -> Iterator[tuple[frozenset[Row], float]]:
        for inst, p in self.instance_probabilities.items():
            yield frozenset(inst), float(p)


PriorModel = IndependentPrior | ExclusivePrior | ExplicitPrior


def _view_rows(view: Relation | Iterable[Row]) -> frozenset:
    if isinstance(view, Relation):
        return frozenset(view.tuples)
    return frozenset(view)


def exact_posterior(
    prior: PriorModel, params: MechanismParams, view: Relation | Iterable[Row], row: Row
) -> float:
    """Posterior Pr[row in instance | view] by exhaustive Bayes over the prior.

    Sums Pr[view | instance] * Pr[instance] over every instance the prior can
    produce; no closed form is consulted anywhere.
    """
    rows = prior.domain
    if row not in set(rows):
        raise ConfigError(f"row {row!r} is not in the prior's domain")
    present = _view_rows(view)
    stray = present - set(rows)
    if stray:
        raise DataError(f"view rows {sorted(stray)!r} lie outside the prior's domain")
    in_view = tuple(r in present for r in rows)
    a, b = params.alpha, params.beta
    total = 0.0
    hit = 0.0
    for inst, p1 in prior.instances():
        if p1 == 0.0:
            continue
        p2 = 1.0
        for r, iv in zip(rows, in_view):
            if r in inst:
                p2 *= a if iv else 1.0 - a
            else:
                p2 *= b if iv else 1.0 - b
        w = p1 * p2
        total += w
        if row in inst:
            hit += w
    if total == 0.0:
        raise DataError("view impossible under this prior and mechanism")
    return hit / total


@dataclass(frozen=True, eq=False)
class PosteriorTable:
    """Posterior of every domain row conditioned on every possible view.

    posteriors[j, mask] = Pr[rows[j] in instance | view == mask]; NaN where the
    view has probability zero.  view_probabilities is the view marginal.
    """

    rows: tuple[Row, ...]
    posteriors: np.ndarray
    view_probabilities: np.ndarray


def posterior_table(prior: PriorModel, params: MechanismParams) -> PosteriorTable:
    """Vectorized counterpart of exact_posterior for whole-domain sweeps."""
    rows = prior.domain
    m = len(rows)
    if m > _TABLE_DOMAIN_CAP:
        raise ConfigError(f"posterior table needs m <= {_TABLE_DOMAIN_CAP}, got {m}")
    insts = list(prior.instances())
    member = np.array([[r in inst for r in rows] for inst, _ in insts])
    weights = np.array([p for _, p in insts])
    per_view = np.stack(
        [_subset_probs(np.where(member[i], params.alpha, params.beta)) for i in range(len(insts))]
    )
    joint = per_view * weights[:, None]
    marginal = joint.sum(axis=0)
    numer = member.T.astype(float) @ joint
    with np.errstate(invalid="ignore", divide="ignore"):
        post = np.where(marginal > 0.0, numer / marginal, np.nan)
    return PosteriorTable(rows=rows, posteriors=post, view_probabilities=marginal)


# ---------------------------------------------------------------------------
# Desk-scale experiments


def indistinguishability_epsilon(params: MechanismParams, m: int, n: int) -> float:
    """Exact max log-likelihood-ratio over equal-size instances differing by one swap.

    Enumerates every view of an m-row universe and every ordered pair of
    size-n instances at symmetric difference 2.  Returns math.inf when some
    view is possible under one instance and impossible under the other.
    """
    if m > _INDIST_DOMAIN_CAP:
        raise ConfigError(f"indistinguishability enumeration needs m <= {_INDIST_DOMAIN_CAP}")
    if not 1 <= n < m:
        raise ConfigError("need 1 <= n < m so that a one-swap pair exists")
    a, b = params.alpha, params.beta
    probs: dict[int, np.ndarray] = {}
    for combo in itertools.combinations(range(m), n):
        mask = sum(1 << j for j in combo)
        inclusion = np.array([a if mask >> j & 1 else b for j in range(m)])
        probs[mask] = _subset_probs(inclusion)
    best = 1.0
    for mask, pa in probs.items():
        members = [j for j in range(m) if mask >> j & 1]
        outside = [j for j in range(m) if not mask >> j & 1]
        for x in members:
            for y in outside:
                other = (mask ^ (1 << x)) | (1 << y)
                pb = probs[other]
                if np.any((pa > 0.0) & (pb == 0.0)):
                    return math.inf
                valid = pa > 0.0
                if valid.any():
                    best = max(best, float((pa[valid] / pb[valid]).max()))
    return math.log(best)


@dataclass(frozen=True, eq=False)
class MeaningfulnessReport:
    """Outcome of the balanced-query distinguishability experiment."""

    fraction_below_threshold: float
    per_query_sd: tuple[float, ...]
    query_masks: tuple[int, ...]
    meaningless: bool
    sd_threshold: float
    meaningless_fraction: float


def meaningfulness_experiment(
    m: int,
    n: int,
    params: MechanismParams,
    query_fraction_f: float,
    sd_threshold: float = 0.5,
    meaningless_fraction: float = 2.0 / 3.0,
) -> MeaningfulnessReport:
    """Can balanced queries' answers be told apart from the published view?

    For every query Q with |Q|/m inside the balance band [ (1-f)/2, (1+f)/2 ],
    compares the view distribution conditioned on "the instance lies inside Q"
    against "the instance avoids Q", under the uniform prior over size-n
    instances, and reports the fraction of queries whose statistical
    difference falls below the threshold.  Exact enumeration, no sampling.
    The defaults (1/2, 2/3) are the conventional constants; both are exposed
    as parameters.
    """
    if m > _EXPERIMENT_DOMAIN_CAP:
        raise ConfigError(f"experiment needs m <= {_EXPERIMENT_DOMAIN_CAP}, got {m}")
    if not 1 <= n <= m:
        raise ConfigError("need 1 <= n <= m")
    if not 0.0 <= query_fraction_f < 1.0:
        raise ConfigError("query_fraction_f must lie in [0, 1)")

    lo = (1.0 - query_fraction_f) / 2.0
    hi = (1.0 + query_fraction_f) / 2.0
    admissible_sizes = [
        s
        for s in range(m + 1)
        if lo - 1e-9 <= s / m <= hi + 1e-9 and s >= n and m - s >= n
    ]
    if not admissible_sizes:
        raise ConfigError(
            "no admissible query: the balance band leaves no query that both "
            "events can satisfy"
        )

    inst_index: dict[int, int] = {}
    inclusion_rows = []
    for combo in itertools.combinations(range(m), n):
        mask = sum(1 << j for j in combo)
        inst_index[mask] = len(inclusion_rows)
        inclusion_rows.append(
            _subset_probs(
                np.array([params.alpha if mask >> j & 1 else params.beta for j in range(m)])
            )
        )
    inst_probs = np.stack(inclusion_rows)

    masks: list[int] = []
    sds: list[float] = []
    for size in admissible_sizes:
        for combo in itertools.combinations(range(m), size):
            qmask = sum(1 << j for j in combo)
            complement = [j for j in range(m) if not qmask >> j & 1]
            inside = [
                inst_index[sum(1 << j for j in sub)]
                for sub in itertools.combinations(combo, n)
            ]
            outside = [
                inst_index[sum(1 << j for j in sub)]
                for sub in itertools.combinations(complement, n)
            ]
            pa = inst_probs[inside].mean(axis=0)
            pb = inst_probs[outside].mean(axis=0)
            masks.append(qmask)
            sds.append(float(np.abs(pa - pb).sum()))

    below = sum(1 for sd in sds if sd < sd_threshold)
    fraction = below / len(sds)
    return MeaningfulnessReport(
        fraction_below_threshold=fraction,
        per_query_sd=tuple(sds),
        query_masks=tuple(masks),
        meaningless=fraction >= meaningless_fraction,
        sd_threshold=sd_threshold,
        meaningless_fraction=meaningless_fraction,
    )


@dataclass(frozen=True, eq=False)
class BreachReport:
    """Outcome of the all-or-nothing correlated-prior demo."""

    posterior_of_s: float
    expected_posterior: float
    view: Relation


def correlated_breach_demo(
    instance: Relation, domain: DomainDescriptor, params: MechanismParams, seed: int
) -> BreachReport:
    """All-or-nothing prior on the instance: a view usually gives the set away.

    Builds the two-point prior {instance: 1/2, empty: 1/2}, draws one view
    with the production sampler, and returns the exact posterior of "the whole
    set is present" given that view, together with its expectation over views
    drawn when the set is present.
    """
    rows = domain_rows(domain)
    for row in instance.tuples:
        if row not in domain:
            raise DataError(f"instance row {row!r} lies outside the domain")
    member = np.array([row in instance.tuples for row in rows])
    present = _subset_probs(np.where(member, params.alpha, params.beta))
    absent = _subset_probs(np.full(len(rows), params.beta))

    published = anonymize(instance, domain, params, seed)
    mask = _mask_of(rows, published.view.tuples)
    denom = present[mask] + absent[mask]
    if denom == 0.0:
        raise DataError("drawn view impossible under the two-point prior")
    posterior = float(present[mask] / denom)

    total = present + absent
    with np.errstate(invalid="ignore", divide="ignore"):
        post_all = np.where(total > 0.0, present / total, 0.0)
    expected = float((present * post_all).sum())
    return BreachReport(posterior_of_s=posterior, expected_posterior=expected, view=published.view)
