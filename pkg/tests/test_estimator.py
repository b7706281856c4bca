import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anonview.errors import ConfigError
from anonview.estimator import (
    error_bound,
    error_bound_from_multiplier,
    estimate,
    estimate_from_counts,
    guarantee_radius,
)
from anonview.mechanism import MechanismParams, UtilityBudget, anonymize
from anonview.model import ConjunctiveQuery, ValueRange, eval_query_instance
from anonview.queries import QueryCounter
from conftest import SCORES_SCHEMA, grid_instance


def test_identity_mechanism_is_exact(scores_relation, scores_domain):
    view = anonymize(scores_relation, scores_domain, MechanismParams(1.0, 0.0), 5)
    q = ConjunctiveQuery(SCORES_SCHEMA, (("score", ValueRange(90, 100)),))
    report = estimate(q, view)
    assert report.estimate == eval_query_instance(q, scores_relation) == report.n_v


def test_pure_noise_level_gives_zero():
    params = MechanismParams(0.5, 0.1)
    assert estimate_from_counts(4.0, 40, params) == 0.0


def test_worked_example():
    params = MechanismParams(0.5, 0.1)
    assert estimate_from_counts(8, 40, params) == pytest.approx(10.0)


def test_alpha_equals_beta_is_rejected():
    with pytest.raises(ConfigError, match="division by zero"):
        estimate_from_counts(5, 10, MechanismParams(0.3, 0.3))


@given(
    st.integers(min_value=0, max_value=10**6),
    st.integers(min_value=0, max_value=10**6),
    st.floats(min_value=0.01, max_value=1.0),
    st.floats(min_value=0.0, max_value=0.99),
)
@settings(max_examples=200)
def test_mean_view_count_inverts_exactly(q_of_i, extra, alpha, beta):
    """Q(I) = (mu_V - beta*n_D)/(alpha - beta) with mu_V = alpha*Q(I) + beta*(n_D - Q(I))."""
    if beta >= alpha:
        return
    n_d = q_of_i + extra
    mu_v = alpha * q_of_i + beta * (n_d - q_of_i)
    est = estimate_from_counts(mu_v, n_d, MechanismParams(alpha, beta))
    assert est == pytest.approx(q_of_i, rel=1e-9, abs=1e-6)


def test_clamping_is_opt_in():
    params = MechanismParams(0.5, 0.1)
    raw = estimate_from_counts(0, 100, params)
    assert raw < 0
    assert estimate_from_counts(0, 100, params, clamp=True) == 0.0
    assert estimate_from_counts(1000, 100, params, clamp=True, instance_size=50) == 50.0


def test_error_bound_values():
    rho = error_bound(UtilityBudget(r=200.0, failure_prob=0.05))
    assert rho == pytest.approx(2.0 * math.sqrt(3.0 * 200.0 * math.log(40.0)))
    assert rho == pytest.approx(94.1, abs=0.05)
    # failure_prob -> 2 drives the bound to zero but is outside the accepted range
    with pytest.raises(ConfigError):
        UtilityBudget(r=200.0, failure_prob=2.0)


def test_error_bound_forms_agree():
    k, gamma, fp = 10.0, 0.2, 0.05
    via_r = error_bound(UtilityBudget(r=4.0 * k / gamma, failure_prob=fp))
    via_k = error_bound_from_multiplier(k, gamma, fp)
    assert via_r == pytest.approx(via_k, rel=1e-12)


def test_guarantee_radius():
    assert guarantee_radius(0.0, 100) == 0.0
    assert guarantee_radius(3.5, 1) == 3.5
    assert guarantee_radius(94.1, 30162) == pytest.approx(16342.4, abs=1.0)
    with pytest.raises(ConfigError):
        guarantee_radius(-1.0, 4)


def test_estimate_report_carries_radius(scores_relation, scores_domain):
    view = anonymize(scores_relation, scores_domain, MechanismParams(1.0, 0.0), 5)
    q = ConjunctiveQuery(SCORES_SCHEMA, ())
    budget = UtilityBudget(r=4.0, failure_prob=0.1)
    known = estimate(q, view, utility=budget, instance_size=6)
    assert known.guarantee_radius == pytest.approx(error_bound(budget) * math.sqrt(6))
    # with the size unknown it is itself estimated from the view (here exact)
    derived = estimate(q, view, utility=budget)
    assert derived.guarantee_radius == pytest.approx(known.guarantee_radius)


def test_counter_matches_reference_evaluation():
    rel, dom = grid_instance(200, (9, 7, 5), seed=7)
    counter = QueryCounter(dom, rel)
    rng = np.random.default_rng(3)
    queries = []
    for _ in range(40):
        predicates = []
        for j, s in enumerate((9, 7, 5)):
            if rng.random() < 0.6:
                lo = int(rng.integers(0, s))
                hi = int(rng.integers(lo, s))
                predicates.append((f"a{j}", ValueRange(lo, hi)))
        queries.append(ConjunctiveQuery(dom.schema, tuple(predicates)))
    fast = counter.count_many(queries)
    slow = [eval_query_instance(q, rel) for q in queries]
    assert fast.tolist() == slow


def test_unbiasedness_quick_monte_carlo():
    """Small-scale version of the unbiasedness property; the acceptance suite
    runs the full-size one."""
    rel, dom = grid_instance(100, (20, 20), seed=11)
    params = MechanismParams(0.5, 0.01)
    q = ConjunctiveQuery(dom.schema, (("a0", ValueRange(0, 9)),))
    true = eval_query_instance(q, rel)
    n_d = 10 * 20
    trials = 2000
    ests = np.empty(trials)
    for seed in range(trials):
        view = anonymize(rel, dom, params, seed).view
        n_v = eval_query_instance(q, view)
        ests[seed] = estimate_from_counts(n_v, n_d, params)
    stderr = ests.std(ddof=1) / math.sqrt(trials)
    assert abs(ests.mean() - true) <= 4 * stderr
