"""Shared fixtures and synthetic instance builders."""

from __future__ import annotations

import numpy as np
import pytest

from anonview.model import DomainDescriptor, Relation, Schema

# the worked example relation used throughout the unit tests
SCORES_SCHEMA = Schema(("age", "nationality", "score"), ("int", "str", "int"))
SCORES_ROWS = (
    (25, "British", 99),
    (27, "British", 97),
    (21, "Indian", 82),
    (32, "Indian", 90),
    (33, "American", 94),
    (36, "American", 94),
)


@pytest.fixture
def scores_relation() -> Relation:
    return Relation.from_rows(SCORES_SCHEMA, SCORES_ROWS)


@pytest.fixture
def scores_domain(scores_relation) -> DomainDescriptor:
    from anonview.model import build_domain

    return build_domain(scores_relation)


def grid_instance(
    n: int, sizes: tuple[int, ...], seed: int
) -> tuple[Relation, DomainDescriptor]:
    """A synthetic integer-attribute instance inside an explicit full grid domain."""
    schema = Schema(
        tuple(f"a{j}" for j in range(len(sizes))),
        tuple("int" for _ in sizes),
    )
    domain = DomainDescriptor(schema, tuple(tuple(range(s)) for s in sizes))
    m = int(np.prod([int(s) for s in sizes], dtype=object))
    rng = np.random.default_rng(seed)
    packed = rng.choice(m, size=n, replace=False)
    codes = domain.unpack_codes(np.sort(packed))
    rows = [tuple(int(c) for c in row) for row in codes]
    return Relation.from_rows(schema, rows), domain


# Active-domain sizes of the census-style surrogate; their product is the
# published domain size 648_023_040.
SURROGATE_SIZES = (72, 7, 16, 7, 14, 5, 2, 41, 2)
SURROGATE_N = 30162


def census_surrogate(seed: int = 20240817) -> tuple[Relation, Schema]:
    """A 9-attribute surrogate matching the case study's n and active-domain sizes.

    The first max(size) rows cycle through every attribute's value list so the
    active domains are covered exactly; the rest is uniform.
    """
    names = (
        "age",
        "workclass",
        "education",
        "marital_status",
        "occupation",
        "race",
        "sex",
        "native_country",
        "income",
    )
    kinds = ("int",) + ("str",) * 8
    schema = Schema(names, kinds)
    values: list[tuple] = [tuple(range(17, 17 + SURROGATE_SIZES[0]))]
    for name, size in zip(names[1:], SURROGATE_SIZES[1:]):
        values.append(tuple(f"{name[:3]}{i:02d}" for i in range(size)))

    rng = np.random.default_rng(seed)
    rows: list[tuple] = []
    seen = set()
    for r in range(max(SURROGATE_SIZES)):
        row = tuple(values[j][r % SURROGATE_SIZES[j]] for j in range(len(values)))
        if row not in seen:
            seen.add(row)
            rows.append(row)
    while len(rows) < SURROGATE_N:
        batch = rng.integers(0, SURROGATE_SIZES, size=(SURROGATE_N, len(values)))
        for code in batch:
            row = tuple(values[j][c] for j, c in enumerate(code))
            if row not in seen:
                seen.add(row)
                rows.append(row)
                if len(rows) == SURROGATE_N:
                    break
    return Relation.from_rows(schema, rows), schema


def write_relation_csv_file(path, schema: Schema, rows) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(schema.attributes)
        for row in rows:
            writer.writerow([str(v) for v in row])
