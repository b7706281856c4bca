import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anonview.errors import DataError
from anonview.model import (
    ConjunctiveQuery,
    DomainDescriptor,
    Relation,
    Schema,
    ValueRange,
    ValueSet,
    build_domain,
    checked_product,
    domain_size,
    eval_query_domain,
    eval_query_instance,
)
from conftest import SCORES_ROWS, SCORES_SCHEMA


def test_schema_rejects_bad_declarations():
    with pytest.raises(ValueError):
        Schema(("a", "a"), ("int", "int"))
    with pytest.raises(ValueError):
        Schema(("a", ""), ("int", "int"))
    with pytest.raises(ValueError):
        Schema(("a",), ("float",))
    with pytest.raises(ValueError):
        Schema((), ())


def test_validate_row_checks_arity_and_kinds():
    schema = Schema(("age", "name"), ("int", "str"))
    assert schema.validate_row((3, "x")) == (3, "x")
    with pytest.raises(DataError):
        schema.validate_row((3,))
    with pytest.raises(DataError):
        schema.validate_row(("3", "x"))
    with pytest.raises(DataError):
        schema.validate_row((3, 4))
    with pytest.raises(DataError):
        schema.validate_row((True, "x"))  # bools are not integers here


def test_relation_set_semantics():
    schema = Schema(("a",), ("int",))
    rel = Relation.from_rows(schema, [(1,), (2,), (1,)])
    assert rel.size == 2
    assert (1,) in rel and (3,) not in rel


def test_build_domain_single_tuple():
    schema = Schema(("age", "nationality"), ("int", "str"))
    rel = Relation.from_rows(schema, [(25, "British")])
    dom = build_domain(rel)
    assert dom.values == ((25,), ("British",))
    assert domain_size(dom) == 1


def test_build_domain_scores_table(scores_relation):
    dom = build_domain(scores_relation)
    assert dom.attribute_sizes == (6, 3, 5)
    assert dom.values[2] == (82, 90, 94, 97, 99)
    assert domain_size(dom) == 90


def test_build_domain_rejects_empty_relation():
    schema = Schema(("a",), ("int",))
    with pytest.raises(DataError, match="cannot derive active domain"):
        build_domain(Relation.from_rows(schema, []))


def test_domain_size_values():
    assert checked_product([1, 1, 1]) == 1
    assert checked_product([6, 3, 5]) == 90
    with pytest.raises(OverflowError):
        checked_product([2**32, 2**32, 2**32])


def test_eval_query_instance_examples(scores_relation):
    everything = ConjunctiveQuery(SCORES_SCHEMA, ())
    assert eval_query_instance(everything, scores_relation) == 6

    q = ConjunctiveQuery(
        SCORES_SCHEMA,
        (("age", ValueRange(26, 32)), ("score", ValueRange(90, 100))),
    )
    # independent check: a plain scan of the rows
    brute = sum(1 for r in SCORES_ROWS if 26 <= r[0] <= 32 and 90 <= r[2] <= 100)
    assert brute == 2
    assert eval_query_instance(q, scores_relation) == 2

    absent = ConjunctiveQuery(SCORES_SCHEMA, (("nationality", ValueSet(frozenset({"French"}))),))
    assert eval_query_instance(absent, scores_relation) == 0


def test_eval_query_instance_schema_mismatch(scores_relation):
    other = Schema(("x",), ("int",))
    q = ConjunctiveQuery(other, ())
    with pytest.raises(ValueError, match="schemas differ"):
        eval_query_instance(q, scores_relation)


def test_eval_query_domain_product_counting():
    schema = Schema(("a", "b"), ("int", "str"))
    dom = DomainDescriptor(schema, ((1, 2, 3, 4), ("p", "q", "r", "s", "t")))
    assert eval_query_domain(ConjunctiveQuery(schema, ()), dom) == 20
    q = ConjunctiveQuery(
        schema,
        (("a", ValueSet(frozenset({1, 2}))), ("b", ValueSet(frozenset({"p", "q", "r"})))),
    )
    assert eval_query_domain(q, dom) == 6
    zero = ConjunctiveQuery(schema, (("a", ValueRange(10, 20)),))
    assert eval_query_domain(zero, dom) == 0


def test_query_rejects_bad_predicates():
    schema = Schema(("a", "b"), ("int", "str"))
    with pytest.raises(ValueError, match="range predicate"):
        ConjunctiveQuery(schema, (("b", ValueRange(1, 2)),))
    with pytest.raises(ValueError, match="appears in two"):
        ConjunctiveQuery(
            schema,
            (("a", ValueRange(1, 2)), ("a", ValueRange(3, 4))),
        )
    with pytest.raises(KeyError):
        ConjunctiveQuery(schema, (("c", ValueRange(1, 2)),))
    with pytest.raises(ValueError):
        ValueRange(5, 4)


def test_encode_decode_round_trip(scores_relation, scores_domain):
    rows = sorted(scores_relation.tuples)
    codes = scores_domain.encode_rows(rows)
    assert scores_domain.decode_codes(codes) == rows
    packed = scores_domain.pack_codes(codes)
    assert np.array_equal(scores_domain.unpack_codes(packed), codes)
    with pytest.raises(DataError, match="outside the published domain"):
        scores_domain.encode_rows([(99, "British", 99)])


# --- randomized properties -------------------------------------------------

_domains = st.lists(st.integers(min_value=1, max_value=8), min_size=1, max_size=4)


@st.composite
def _domain_and_query(draw):
    sizes = draw(_domains)
    schema = Schema(
        tuple(f"c{j}" for j in range(len(sizes))), tuple("int" for _ in sizes)
    )
    dom = DomainDescriptor(schema, tuple(tuple(range(s)) for s in sizes))
    predicates = []
    for j, s in enumerate(sizes):
        choice = draw(st.integers(min_value=0, max_value=2))
        if choice == 1:
            lo = draw(st.integers(min_value=0, max_value=s - 1))
            hi = draw(st.integers(min_value=lo, max_value=s + 1))
            predicates.append((f"c{j}", ValueRange(lo, hi)))
        elif choice == 2:
            vals = draw(
                st.sets(st.integers(min_value=0, max_value=s), min_size=1, max_size=s)
            )
            predicates.append((f"c{j}", ValueSet(frozenset(vals))))
    return dom, ConjunctiveQuery(schema, tuple(predicates))


@given(_domain_and_query())
@settings(max_examples=150, deadline=None)
def test_domain_count_matches_cross_product_enumeration(case):
    dom, query = case
    brute = sum(1 for row in itertools.product(*dom.values) if query.matches(row))
    assert eval_query_domain(query, dom) == brute


@given(_domain_and_query(), st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=100, deadline=None)
def test_instance_count_bounded_by_size_and_domain_count(case, seed):
    dom, query = case
    m = domain_size(dom)
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, min(m, 30) + 1))
    packed = rng.choice(m, size=n, replace=False)
    rows = [tuple(int(c) for c in r) for r in dom.unpack_codes(np.sort(packed))]
    rel = Relation.from_rows(dom.schema, rows)
    count = eval_query_instance(query, rel)
    assert count <= min(rel.size, eval_query_domain(query, dom))
    rebuilt = build_domain(rel)
    for sub, full in zip(rebuilt.values, dom.values):
        assert set(sub) <= set(full)
