"""Query mini-language, selection-query family generation, and batched counting.

Grammar accepted by parse_query (clauses joined by `and`):

    attr=value            single-value membership
    attr in {v1,v2,...}   membership
    attr in [lo,hi]       inclusive integer range

Tokens may not contain spaces, commas, or braces.  Values are converted
according to the attribute's declared kind.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, QueryParseError
from .model import (
    KIND_STR,
    ConjunctiveQuery,
    DomainDescriptor,
    Predicate,
    Relation,
    Schema,
    ValueRange,
    ValueSet,
    checked_product,
)

_EQ_RE = re.compile(r"^\s*([^\s=]+)\s*=\s*([^\s{}\[\],]+)\s*$")
_SET_RE = re.compile(r"^\s*([^\s=]+)\s+in\s+\{([^{}]*)\}\s*$")
_RANGE_RE = re.compile(r"^\s*([^\s=]+)\s+in\s+\[([^\[\]]*)\]\s*$")
_AND_RE = re.compile(r"\s+and\s+")


def _convert(token: str, attr: str, kind: str, position: int) -> int | str:
    token = token.strip()
    if not token:
        raise QueryParseError(f"empty value for attribute {attr!r} at position {position}")
    if kind == KIND_STR:
        return token
    try:
        return int(token)
    except ValueError:
        raise QueryParseError(
            f"attribute {attr!r} expects an integer, got {token!r} at position {position}"
        ) from None


def parse_query(text: str, schema: Schema) -> ConjunctiveQuery:
    """Parse query text against a schema; empty text is the all-domain query."""
    if not text.strip():
        return ConjunctiveQuery(schema, ())
    predicates: dict[str, Predicate] = {}
    clauses: list[tuple[int, str]] = []
    last = 0
    for sep in _AND_RE.finditer(text):
        clauses.append((last, text[last : sep.start()]))
        last = sep.end()
    clauses.append((last, text[last:]))

    for position, clause in clauses:
        if match := _EQ_RE.match(clause):
            attr, raw = match.groups()
            kind = _kind(schema, attr, position)
            _add_predicate(predicates, attr, ValueSet(frozenset({_convert(raw, attr, kind, position)})), position)
        elif match := _SET_RE.match(clause):
            attr, raw = match.groups()
            kind = _kind(schema, attr, position)
            values = frozenset(_convert(tok, attr, kind, position) for tok in raw.split(","))
            _add_predicate(predicates, attr, ValueSet(values), position)
        elif match := _RANGE_RE.match(clause):
            attr, raw = match.groups()
            kind = _kind(schema, attr, position)
            if kind == KIND_STR:
                raise QueryParseError(
                    f"range predicate on non-integer attribute {attr!r} at position {position}"
                )
            parts = raw.split(",")
            if len(parts) != 2:
                raise QueryParseError(f"range needs exactly two endpoints at position {position}")
            lo = _convert(parts[0], attr, kind, position)
            hi = _convert(parts[1], attr, kind, position)
            if lo > hi:
                raise QueryParseError(f"empty range [{lo},{hi}] at position {position}")
            _add_predicate(predicates, attr, ValueRange(lo, hi), position)
        else:
            raise QueryParseError(f"cannot parse clause {clause.strip()!r} at position {position}")
    return ConjunctiveQuery.from_mapping(schema, predicates)


def _kind(schema: Schema, attr: str, position: int) -> str:
    try:
        return schema.kind_of(attr)
    except KeyError:
        raise QueryParseError(f"unknown attribute {attr!r} at position {position}") from None


def _add_predicate(predicates: dict, attr: str, pred: Predicate, position: int) -> None:
    if attr in predicates:
        raise QueryParseError(f"attribute {attr!r} repeated at position {position}")
    predicates[attr] = pred


# ---------------------------------------------------------------------------
# Query family generation


@dataclass(frozen=True)
class QueryFamilySpec:
    """What "all selection queries up to an arity" means concretely.

    Equality predicates are enumerated exhaustively for string attributes;
    integer attributes get `ranges_per_attribute` inclusive ranges whose
    endpoints are sampled from the active-domain quantiles (a documented,
    seeded choice: exhaustive ranges would be unbounded).
    """

    max_arity: int = 3
    max_queries: int | None = None
    ranges_per_attribute: int = 8
    seed: int | None = None


def _sampled_ranges(values: tuple, count: int, rng: np.random.Generator) -> list[ValueRange]:
    n = len(values)
    seen = set()
    out: list[ValueRange] = []
    for _ in range(count * 4):
        if len(out) >= count:
            break
        a, b = rng.integers(0, n, size=2)
        lo, hi = (int(a), int(b)) if a <= b else (int(b), int(a))
        pair = (values[lo], values[hi])
        if pair not in seen:
            seen.add(pair)
            out.append(ValueRange(pair[0], pair[1]))
    return out


def generate_query_family(
    domain: DomainDescriptor, spec: QueryFamilySpec
) -> list[ConjunctiveQuery]:
    """Deterministic selection-query family over attribute subsets up to max_arity."""
    schema = domain.schema
    if spec.max_arity < 1:
        raise ConfigError("max_arity must be at least 1")
    needs_rng = any(kind != KIND_STR for kind in schema.kinds) or spec.max_queries is not None
    if needs_rng and spec.seed is None:
        raise ConfigError("a seed is required to sample range predicates or subsample the family")
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed)) if needs_rng else None

    per_attr: list[list[Predicate]] = []
    for attr, kind, values in zip(schema.attributes, schema.kinds, domain.values):
        if kind == KIND_STR:
            per_attr.append([ValueSet(frozenset({v})) for v in values])
        else:
            per_attr.append(_sampled_ranges(values, spec.ranges_per_attribute, rng))

    family: list[ConjunctiveQuery] = []
    indices = range(schema.arity)
    for arity in range(1, min(spec.max_arity, schema.arity) + 1):
        for subset in itertools.combinations(indices, arity):
            for combo in itertools.product(*(per_attr[j] for j in subset)):
                predicates = tuple(
                    (schema.attributes[j], pred) for j, pred in zip(subset, combo)
                )
                family.append(ConjunctiveQuery(schema, predicates))
    if spec.max_queries is not None and len(family) > spec.max_queries:
        picked = rng.choice(len(family), size=spec.max_queries, replace=False)
        family = [family[i] for i in np.sort(picked)]
    return family


# ---------------------------------------------------------------------------
# Batched counting


class QueryCounter:
    """Vectorized |Q ∩ rows| for batches of queries over one fixed relation.

    Rows are encoded once; queries sharing an attribute subset share a
    contingency table built with one bincount pass.  Counts agree exactly with
    eval_query_instance (a property test pins this down).
    """

    # contingency tables beyond this many cells fall back to per-query masks
    _TABLE_CELL_CAP = 50_000_000

    def __init__(self, domain: DomainDescriptor, relation: Relation):
        if domain.schema != relation.schema:
            raise ValueError("domain and relation schemas differ")
        self.domain = domain
        self._codes = domain.encode_rows(relation.tuples)
        self._size = len(self._codes)
        self._tables: dict[tuple[int, ...], np.ndarray] = {}

    def _matched_codes(self, query: ConjunctiveQuery) -> list[tuple[int, np.ndarray]]:
        out = []
        for attr, pred in query.predicates:
            j = self.domain.schema.index(attr)
            values = self.domain.values[j]
            matched = np.array([i for i, v in enumerate(values) if pred.matches(v)], dtype=np.int64)
            out.append((j, matched))
        return out

    def _table(self, subset: tuple[int, ...]) -> np.ndarray:
        table = self._tables.get(subset)
        if table is None:
            sizes = [self.domain.attribute_sizes[j] for j in subset]
            cells = np.zeros(self._size, dtype=np.int64)
            for j, s in zip(subset, sizes):
                cells = cells * s + self._codes[:, j]
            flat = np.bincount(cells, minlength=int(np.prod(sizes)))
            table = flat.reshape(sizes)
            self._tables[subset] = table
        return table

    def count(self, query: ConjunctiveQuery) -> int:
        return int(self.count_many([query])[0])

    def count_many(self, queries: list[ConjunctiveQuery]) -> np.ndarray:
        out = np.empty(len(queries), dtype=np.int64)
        for i, query in enumerate(queries):
            if query.schema != self.domain.schema:
                raise ValueError("query and relation schemas differ")
            matched = self._matched_codes(query)
            if not matched:
                out[i] = self._size
                continue
            if any(len(codes) == 0 for _, codes in matched):
                out[i] = 0
                continue
            subset = tuple(j for j, _ in matched)
            cell_count = checked_product([self.domain.attribute_sizes[j] for j in subset])
            if cell_count <= self._TABLE_CELL_CAP:
                table = self._table(subset)
                out[i] = int(table[np.ix_(*(codes for _, codes in matched))].sum())
            else:
                mask = np.ones(self._size, dtype=bool)
                for j, codes in matched:
                    lut = np.zeros(self.domain.attribute_sizes[j], dtype=bool)
                    lut[codes] = True
                    mask &= lut[self._codes[:, j]]
                out[i] = int(mask.sum())
        return out

    def domain_counts(self, queries: list[ConjunctiveQuery]) -> np.ndarray:
        """n_D per query: the product of per-attribute matched-value counts."""
        out = np.empty(len(queries), dtype=np.int64)
        for i, query in enumerate(queries):
            matched = self._matched_codes(query)
            counts = dict((j, len(codes)) for j, codes in matched)
            sizes = [
                counts.get(j, self.domain.attribute_sizes[j])
                for j in range(self.domain.schema.arity)
            ]
            out[i] = checked_product(sizes)
        return out
