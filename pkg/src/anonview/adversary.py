"""Bayesian leakage calculus: closed-form posteriors, budget conversions, and
the leakage taxonomy.

Exact brute-force counterparts of these formulas live in `oracle`; the test
suite checks the two routes against each other on tiny domains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .mechanism import CheckResult, MechanismParams, PrivacyBudget

LEAKAGE_NONE = "none"
LEAKAGE_POSITIVE = "positive"
LEAKAGE_NEGATIVE = "negative"


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {p}")


def posterior_independent(p: float, params: MechanismParams, present_in_view: bool) -> float:
    """Posterior of a tuple with independent prior p, given its view membership.

    present: alpha*p / (alpha*p + beta*(1-p))
    absent:  (1-alpha)*p / ((1-alpha)*p + (1-beta)*(1-p))
    """
    _check_prob("prior", p)
    a, b = params.alpha, params.beta
    if present_in_view:
        numer = a * p
        denom = a * p + b * (1.0 - p)
    else:
        numer = (1.0 - a) * p
        denom = (1.0 - a) * p + (1.0 - b) * (1.0 - p)
    if denom == 0.0:
        raise ConfigError("event has zero probability under these parameters")
    return numer / denom


def posterior_exclusive_worstcase(p: float, params: MechanismParams) -> float:
    """Posterior when the view shows the tuple and nothing else from its exclusion set.

    alpha*(1-beta)*p / (alpha*(1-beta)*p + beta*(1-alpha)*(1-p)); this is the
    leakiest view an exclusion-set adversary can observe.
    """
    _check_prob("prior", p)
    a, b = params.alpha, params.beta
    numer = a * (1.0 - b) * p
    denom = numer + b * (1.0 - a) * (1.0 - p)
    if denom == 0.0:
        raise ConfigError("event has zero probability under these parameters")
    return numer / denom


@dataclass(frozen=True)
class LeakageVerdict:
    kind: str  # one of LEAKAGE_NONE / LEAKAGE_POSITIVE / LEAKAGE_NEGATIVE
    prior: float
    posterior: float
    budget: PrivacyBudget


def classify_leakage(prior: float, posterior: float, budget: PrivacyBudget) -> LeakageVerdict:
    """Positive leakage: prior <= d but posterior > gamma.  Negative leakage:
    posterior/prior < d/gamma.  Both boundaries are inclusive of 'no leak'."""
    if prior <= 0.0:
        raise ConfigError("prior must be positive (posterior/prior ratio undefined)")
    if prior > 1.0:
        raise ConfigError(f"prior must lie in (0, 1], got {prior}")
    _check_prob("posterior", posterior)
    kind = LEAKAGE_NONE
    if prior <= budget.d and posterior > budget.gamma:
        kind = LEAKAGE_POSITIVE
    elif posterior / prior < budget.d / budget.gamma:
        kind = LEAKAGE_NEGATIVE
    return LeakageVerdict(kind=kind, prior=prior, posterior=posterior, budget=budget)


def check_exclusive_safe(params: MechanismParams, budget: PrivacyBudget) -> CheckResult:
    """No positive leakage against exclusion-set adversaries.

    Hypothesis: alpha = 1/2 exactly.  The insertion rate must clear
    2*(d/gamma)*((1-gamma)/(1-d)); the stricter factor-2 form is used.  Both
    extreme views are additionally certified at p = d: the one showing only
    the tuple, and its mirror showing every other set member, which becomes
    the leaky view once beta exceeds 1/2; the closed forms of all remaining
    views interpolate between these two.
    """
    if params.alpha != 0.5:
        raise ConfigError("theorem hypothesis requires alpha = 1/2")
    floor = 2.0 * (budget.d / budget.gamma) * ((1.0 - budget.gamma) / (1.0 - budget.d))
    violations = []
    if params.beta < floor:
        violations.append(
            f"beta {params.beta:.6g} < 2(d/gamma)((1-gamma)/(1-d)) = {floor:.6g}"
        )
    else:
        worst = posterior_exclusive_worstcase(budget.d, params)
        if worst > budget.gamma:
            violations.append(
                f"worst-case posterior {worst:.6g} exceeds gamma = {budget.gamma:.6g}"
            )
        mirror = posterior_exclusive_worstcase(
            budget.d, MechanismParams(1.0 - params.alpha, 1.0 - params.beta)
        )
        if mirror > budget.gamma:
            violations.append(
                f"mirrored worst-case posterior {mirror:.6g} exceeds gamma = "
                f"{budget.gamma:.6g} (insertion rate high enough that absence leaks)"
            )
    return CheckResult(not violations, tuple(violations))


def gamma_from_relative(d: float, delta: float) -> float:
    """Absolute posterior bound implied by a relative budget: gamma = d*e^delta."""
    if not 0.0 < d < 1.0:
        raise ConfigError(f"d must lie in (0, 1), got {d}")
    if delta < 0.0:
        raise ConfigError("delta must be nonnegative")
    gamma = d * math.exp(delta)
    if gamma >= 1.0:
        raise ConfigError(f"budget degenerate: d*e^delta = {gamma:.6g} >= 1")
    return gamma


def delta_from_absolute(d: float, gamma: float) -> float:
    """Relative budget implied by an absolute one: e^delta = (gamma/d)(1-d)/(1-gamma)."""
    if not 0.0 < d < gamma < 1.0:
        raise ConfigError(f"need 0 < d < gamma < 1, got d={d}, gamma={gamma}")
    return math.log((gamma / d) * ((1.0 - d) / (1.0 - gamma)))


def epsilon_from_relative(delta: float) -> float:
    """Output-indistinguishability exponent implied by relative privacy: 2*delta + 2*ln 2."""
    if delta < 0.0:
        raise ConfigError("delta must be nonnegative")
    return 2.0 * delta + 2.0 * math.log(2.0)


def impossibility_frontier(n: int, m: int, gamma: float, c: float) -> float:
    """Prior level (1/c)(gamma/(1-gamma))(n/sqrt(m)) at or above which no
    meaningful mechanism can stay (d, gamma)-private.

    This is an order-of-magnitude frontier: the constant c is existential and
    must be supplied by the caller, it is never computed here.
    """
    if c <= 0:
        raise ConfigError("constant c must be positive")
    if not 0.0 < gamma < 1.0:
        raise ConfigError(f"gamma must lie in (0, 1), got {gamma}")
    if m < 1:
        raise ConfigError("domain size m must be at least 1")
    if n < 0:
        raise ConfigError("instance size n must be nonnegative")
    return (1.0 / c) * (gamma / (1.0 - gamma)) * (n / math.sqrt(m))
