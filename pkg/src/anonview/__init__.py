"""anonview: publish noisy views of relations and reason about what they leak.

The mechanism keeps each true row with probability alpha and injects random
domain rows at rate beta; counting queries on the view are debiased by a
closed-form estimator with an additive sqrt(n)-scale error guarantee, and a
brute-force Bayesian oracle verifies every leakage claim on tiny domains.
"""

from .adversary import (
    LEAKAGE_NEGATIVE,
    LEAKAGE_NONE,
    LEAKAGE_POSITIVE,
    LeakageVerdict,
    check_exclusive_safe,
    classify_leakage,
    delta_from_absolute,
    epsilon_from_relative,
    gamma_from_relative,
    impossibility_frontier,
    posterior_exclusive_worstcase,
    posterior_independent,
)
from .errors import ConfigError, DataError, QueryParseError
from .estimator import (
    EstimateReport,
    error_bound,
    error_bound_from_multiplier,
    estimate,
    estimate_from_counts,
    guarantee_radius,
)
from .harness import (
    RunConfig,
    ScatterRecord,
    publish,
    run_experiment,
    summarize_errors,
)
from .dataio import load_published_view, load_relation, parse_schema_decl
from .mechanism import (
    MINIMAL_BETA,
    SIMPLE_BETA,
    CheckResult,
    MechanismParams,
    ParameterPlan,
    PrivacyBudget,
    PublishedView,
    UtilityBudget,
    anonymize,
    check_privacy_params,
    check_utility_params,
    expected_view_size,
    plan_parameters,
    view_size_ratio,
)
from .model import (
    ConjunctiveQuery,
    DomainDescriptor,
    Relation,
    Schema,
    ValueRange,
    ValueSet,
    build_domain,
    domain_size,
    eval_query_domain,
    eval_query_instance,
)
from .oracle import (
    BreachReport,
    ExclusivePrior,
    ExplicitPrior,
    IndependentPrior,
    MeaningfulnessReport,
    ViewDistribution,
    correlated_breach_demo,
    exact_posterior,
    exact_view_distribution,
    indistinguishability_epsilon,
    meaningfulness_experiment,
    posterior_table,
    statistical_difference,
)
from .queries import QueryCounter, QueryFamilySpec, generate_query_family, parse_query

__version__ = "0.1.0"

__all__ = [
    "BreachReport",
    "CheckResult",
    "ConfigError",
    "ConjunctiveQuery",
    "DataError",
    "DomainDescriptor",
    "EstimateReport",
    "ExclusivePrior",
    "ExplicitPrior",
    "IndependentPrior",
    "LEAKAGE_NEGATIVE",
    "LEAKAGE_NONE",
    "LEAKAGE_POSITIVE",
    "LeakageVerdict",
    "MINIMAL_BETA",
    "MeaningfulnessReport",
    "MechanismParams",
    "ParameterPlan",
    "PrivacyBudget",
    "PublishedView",
    "QueryCounter",
    "QueryFamilySpec",
    "QueryParseError",
    "Relation",
    "RunConfig",
    "SIMPLE_BETA",
    "ScatterRecord",
    "Schema",
    "UtilityBudget",
    "ValueRange",
    "ValueSet",
    "ViewDistribution",
    "anonymize",
    "build_domain",
    "check_exclusive_safe",
    "check_privacy_params",
    "check_utility_params",
    "classify_leakage",
    "correlated_breach_demo",
    "delta_from_absolute",
    "domain_size",
    "epsilon_from_relative",
    "error_bound",
    "error_bound_from_multiplier",
    "estimate",
    "estimate_from_counts",
    "eval_query_domain",
    "eval_query_instance",
    "exact_posterior",
    "exact_view_distribution",
    "expected_view_size",
    "gamma_from_relative",
    "generate_query_family",
    "guarantee_radius",
    "impossibility_frontier",
    "indistinguishability_epsilon",
    "load_published_view",
    "load_relation",
    "meaningfulness_experiment",
    "parse_query",
    "parse_schema_decl",
    "plan_parameters",
    "posterior_exclusive_worstcase",
    "posterior_independent",
    "posterior_table",
    "publish",
    "run_experiment",
    "statistical_difference",
    "summarize_errors",
    "view_size_ratio",
]
