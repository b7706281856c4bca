"""Relational vocabulary: schemas, relations, active domains, counting queries.

Everything here is immutable after construction and every operation is a pure
function, so values can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError

Value = int | str
Row = tuple[Value, ...]

KIND_INT = "int"
KIND_STR = "str"
VALUE_KINDS = (KIND_INT, KIND_STR)

# All domain arithmetic is exact; cross products beyond this width are refused
# rather than silently degraded to floats.
MAX_DOMAIN_SIZE = 2**63 - 1


def _check_value(name: str, kind: str, value: Value) -> None:
    if kind == KIND_INT:
        if not isinstance(value, int) or isinstance(value, bool):
            raise DataError(f"attribute {name!r} expects an integer, got {value!r}")
    elif not isinstance(value, str):
        raise DataError(f"attribute {name!r} expects a string, got {value!r}")


@dataclass(frozen=True)
class Schema:
    """Ordered attribute names, each with a value kind ('int' or 'str')."""

    attributes: tuple[str, ...]
    kinds: tuple[str, ...]

    def __post_init__(self):
        if len(self.attributes) != len(self.kinds):
            raise ValueError("one kind per attribute required")
        if not self.attributes:
            raise ValueError("schema needs at least one attribute")
        if len(set(self.attributes)) != len(self.attributes):
            raise ValueError("attribute names must be unique")
        if any(not name for name in self.attributes):
            raise ValueError("attribute names must be nonempty")
        for kind in self.kinds:
            if kind not in VALUE_KINDS:
                raise ValueError(f"unknown value kind {kind!r}")

    @property
    def arity(self) -> int:
        return len(self.attributes)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.attributes)}

    def index(self, attribute: str) -> int:
        try:
            return self._index[attribute]
        except KeyError:
            raise KeyError(f"unknown attribute {attribute!r}") from None

    def kind_of(self, attribute: str) -> str:
        return self.kinds[self.index(attribute)]

    def validate_row(self, values: Iterable[Value]) -> Row:
        row = tuple(values)
        if len(row) != self.arity:
            raise DataError(f"row arity {len(row)} does not match schema arity {self.arity}")
        for name, kind, v in zip(self.attributes, self.kinds, row):
            _check_value(name, kind, v)
        return row


@dataclass(frozen=True)
class Relation:
    """A set of rows over a fixed schema; duplicate rows collapse silently."""

    schema: Schema
    tuples: frozenset[Row]

    def __post_init__(self):
        for row in self.tuples:
            self.schema.validate_row(row)

    @classmethod
    def from_rows(cls, schema: Schema, rows: Iterable[Iterable[Value]]) -> "Relation":
        return cls(schema, frozenset(schema.validate_row(r) for r in rows))

    @classmethod
    def _trusted(cls, schema: Schema, tuples: frozenset[Row]) -> "Relation":
        # Skips per-row validation; callers must guarantee the rows are valid.
        obj = object.__new__(cls)
        object.__setattr__(obj, "schema", schema)
        object.__setattr__(obj, "tuples", tuples)
        return obj

    @property
    def size(self) -> int:
        return len(self.tuples)

    def __contains__(self, row: Row) -> bool:
        return row in self.tuples


@dataclass(frozen=True)
class DomainDescriptor:
    """Per-attribute active-domain value lists; the domain is their cross product.

    The full cross product is never materialized: membership, counting, and
    sampling all work on the per-attribute lists.
    """

    schema: Schema
    values: tuple[tuple[Value, ...], ...]

    def __post_init__(self):
        if len(self.values) != self.schema.arity:
            raise ValueError("one value list per attribute required")
        for name, kind, vals in zip(self.schema.attributes, self.schema.kinds, self.values):
            if not vals:
                raise ValueError(f"attribute {name!r} has an empty active domain")
            if list(vals) != sorted(set(vals)):
                raise ValueError(f"active domain of {name!r} must be sorted and duplicate-free")
            for v in vals:
                _check_value(name, kind, v)

    @property
    def attribute_sizes(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.values)

    @cached_property
    def _codes(self) -> tuple[dict[Value, int], ...]:
        return tuple({v: i for i, v in enumerate(vals)} for vals in self.values)

    def __contains__(self, row: Row) -> bool:
        return len(row) == self.schema.arity and all(
            v in codes for v, codes in zip(row, self._codes)
        )

    def encode_rows(self, rows: Iterable[Row]) -> np.ndarray:
        """Rows -> per-attribute value indexes, shape (len(rows), arity)."""
        codes = self._codes
        out = []
        for row in rows:
            try:
                out.append([codes[j][v] for j, v in enumerate(row)])
            except (KeyError, IndexError):
                raise DataError(f"row {row!r} lies outside the published domain") from None
        return np.asarray(out, dtype=np.int64).reshape(-1, self.schema.arity)

    def decode_codes(self, matrix: np.ndarray) -> list[Row]:
        cols = []
        for j in range(self.schema.arity):
            vals = self.values[j]
            cols.append([vals[c] for c in matrix[:, j].tolist()])
        return [tuple(row) for row in zip(*cols)]

    def pack_codes(self, matrix: np.ndarray) -> np.ndarray:
        """Mixed-radix scalar code per row; fits int64 because m is width-checked."""
        domain_size(self)
        packed = np.zeros(len(matrix), dtype=np.int64)
        for j, s in enumerate(self.attribute_sizes):
            packed = packed * s + matrix[:, j]
        return packed

    def unpack_codes(self, packed: np.ndarray) -> np.ndarray:
        out = np.empty((len(packed), self.schema.arity), dtype=np.int64)
        rest = packed.astype(np.int64, copy=True)
        for j in reversed(range(self.schema.arity)):
            s = self.attribute_sizes[j]
            out[:, j] = rest % s
            rest //= s
        return out


@dataclass(frozen=True)
class ValueSet:
    """Membership predicate: the attribute value must be one of these."""

    values: frozenset[Value]

    def __post_init__(self):
        if not self.values:
            raise ValueError("membership predicate needs at least one value")

    def matches(self, value: Value) -> bool:
        return value in self.values


@dataclass(frozen=True)
class ValueRange:
    """Inclusive integer range predicate."""

    low: int
    high: int

    def __post_init__(self):
        if self.low > self.high:
            raise ValueError(f"empty range [{self.low}, {self.high}]")

    def matches(self, value: Value) -> bool:
        return self.low <= value <= self.high


Predicate = ValueSet | ValueRange


def _format_value(v: Value) -> str:
    return str(v)


@dataclass(frozen=True)
class ConjunctiveQuery:
    """Per-attribute predicates; attributes without one match any value.

    As a subset of the domain the query is the cross product of the
    per-attribute matched-value sets, which keeps counting on the domain a
    product of small per-attribute counts.
    """

    schema: Schema
    predicates: tuple[tuple[str, Predicate], ...] = ()

    def __post_init__(self):
        seen = set()
        for attr, pred in self.predicates:
            idx = self.schema.index(attr)
            if attr in seen:
                raise ValueError(f"attribute {attr!r} appears in two predicates")
            seen.add(attr)
            kind = self.schema.kinds[idx]
            if isinstance(pred, ValueRange):
                if kind != KIND_INT:
                    raise ValueError(f"range predicate on non-integer attribute {attr!r}")
            else:
                for v in pred.values:
                    _check_value(attr, kind, v)
        # canonical order: schema attribute order
        ordered = tuple(sorted(self.predicates, key=lambda p: self.schema.index(p[0])))
        object.__setattr__(self, "predicates", ordered)

    @classmethod
    def from_mapping(cls, schema: Schema, predicates: dict[str, Predicate]) -> "ConjunctiveQuery":
        return cls(schema, tuple(predicates.items()))

    def predicate_for(self, attribute: str) -> Predicate | None:
        for attr, pred in self.predicates:
            if attr == attribute:
                return pred
        return None

    def matches(self, row: Row) -> bool:
        for attr, pred in self.predicates:
            if not pred.matches(row[self.schema.index(attr)]):
                return False
        return True

    def text(self) -> str:
        """Render in the query mini-language; parse_query inverts this."""
        clauses = []
        for attr, pred in self.predicates:
            if isinstance(pred, ValueRange):
                clauses.append(f"{attr} in [{pred.low},{pred.high}]")
            elif len(pred.values) == 1:
                (v,) = pred.values
                clauses.append(f"{attr}={_format_value(v)}")
            else:
                vals = ",".join(_format_value(v) for v in sorted(pred.values))
                clauses.append(f"{attr} in {{{vals}}}")
        return " and ".join(clauses)


def checked_product(sizes: Sequence[int]) -> int:
    """Exact product of per-attribute counts, refusing results beyond int64."""
    total = 1
    for s in sizes:
        if s < 0:
            raise ValueError("negative count")
        total *= s
        if total > MAX_DOMAIN_SIZE:
            raise OverflowError(
                f"domain size exceeds the exact integer width ({MAX_DOMAIN_SIZE})"
            )
    return total


def build_domain(relation: Relation) -> DomainDescriptor:
    """Active domain of each attribute, read off the relation's observed values."""
    if relation.size == 0:
        raise DataError("cannot derive active domain from an empty relation")
    cols = list(zip(*relation.tuples))
    values = tuple(tuple(sorted(set(col))) for col in cols)
    return DomainDescriptor(relation.schema, values)


def domain_size(descriptor: DomainDescriptor) -> int:
    """m, the exact number of rows in the cross product of the active domains."""
    return checked_product(descriptor.attribute_sizes)


def eval_query_instance(query: ConjunctiveQuery, relation: Relation) -> int:
    """|Q ∩ I|: rows of the relation matching every predicate."""
    if query.schema != relation.schema:
        raise ValueError("query and relation schemas differ")
    return sum(1 for row in relation.tuples if query.matches(row))


def matched_count(pred: Predicate | None, values: Sequence[Value]) -> int:
    if pred is None:
        return len(values)
    return sum(1 for v in values if pred.matches(v))


def eval_query_domain(query: ConjunctiveQuery, descriptor: DomainDescriptor) -> int:
    """|Q ∩ D| by per-attribute product counting; the domain is never enumerated."""
    if query.schema != descriptor.schema:
        raise ValueError("query and domain schemas differ")
    counts = [
        matched_count(query.predicate_for(attr), vals)
        for attr, vals in zip(descriptor.schema.attributes, descriptor.values)
    ]
    return checked_product(counts)
