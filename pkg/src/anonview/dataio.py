"""Serialization: relation CSV files, domain JSON, and mechanism parameters.

A published view consists of three files in one directory:

    view.csv     the released rows (header + shuffled data rows)
    domain.json  the per-attribute active-domain lists and value kinds
    params.json  alpha, beta, the seed, planner inputs, and the size prediction

view.csv and domain.json are the public release; params.json additionally
records the seed and is operator metadata.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import ConfigError, DataError
from .mechanism import MechanismParams, PublishedView
from .model import (
    KIND_INT,
    KIND_STR,
    DomainDescriptor,
    Relation,
    Row,
    Schema,
    Value,
)

VIEW_FILE = "view.csv"
DOMAIN_FILE = "domain.json"
PARAMS_FILE = "params.json"


def parse_schema_decl(text: str) -> Schema:
    """Parse an inline schema declaration: "name:kind,name:kind,..."."""
    attributes = []
    kinds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise ConfigError(f"schema entry {part!r} is not of the form name:kind")
        name, kind = part.rsplit(":", 1)
        name, kind = name.strip(), kind.strip()
        if kind not in (KIND_INT, KIND_STR):
            raise ConfigError(f"schema entry {part!r}: kind must be 'int' or 'str'")
        attributes.append(name)
        kinds.append(kind)
    if not attributes:
        raise ConfigError("schema declaration is empty")
    try:
        return Schema(tuple(attributes), tuple(kinds))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


class LoadedRelation(NamedTuple):
    relation: Relation
    rows_read: int


def _parse_cell(raw: str, kind: str, row_no: int, attr: str) -> Value:
    if kind == KIND_STR:
        return raw
    try:
        return int(raw)
    except ValueError:
        raise DataError(
            f"row {row_no}, column {attr!r}: {raw!r} is not an integer"
        ) from None


def load_relation(path: str | Path, schema: Schema) -> LoadedRelation:
    """Read a header-first CSV file into a relation; duplicate rows collapse."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file {path} does not exist")
    rows: list[Row] = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        if tuple(header) != schema.attributes:
            raise DataError(
                f"header {header!r} does not match the declared attributes "
                f"{list(schema.attributes)!r}"
            )
        for row_no, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != schema.arity:
                raise DataError(
                    f"row {row_no}: expected {schema.arity} cells, found {len(record)}"
                )
            rows.append(
                tuple(
                    _parse_cell(raw, kind, row_no, attr)
                    for raw, kind, attr in zip(record, schema.kinds, schema.attributes)
                )
            )
    return LoadedRelation(Relation.from_rows(schema, rows), len(rows))


def write_relation_csv(path: str | Path, schema: Schema, rows: Iterable[Row]) -> None:
    """Write rows in the given order; no flags or extra columns are emitted."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(schema.attributes)
        for row in rows:
            writer.writerow([str(v) for v in row])


def write_domain_json(path: str | Path, domain: DomainDescriptor) -> None:
    payload = {
        "attributes": [
            {"name": name, "kind": kind, "values": list(values)}
            for name, kind, values in zip(
                domain.schema.attributes, domain.schema.kinds, domain.values
            )
        ]
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_domain_json(path: str | Path) -> DomainDescriptor:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = payload["attributes"]
        schema = Schema(
            tuple(e["name"] for e in entries),
            tuple(e["kind"] for e in entries),
        )
        values = tuple(tuple(e["values"]) for e in entries)
        return DomainDescriptor(schema, values)
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise DataError(f"malformed domain file {path}: {exc}") from None


def write_params_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_params_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (ValueError, OSError) as exc:
        raise DataError(f"malformed params file {path}: {exc}") from None


def load_published_view(directory: str | Path) -> PublishedView:
    """Reassemble a PublishedView from a publish output directory."""
    directory = Path(directory)
    domain = read_domain_json(directory / DOMAIN_FILE)
    params_payload = read_params_json(directory / PARAMS_FILE)
    try:
        params = MechanismParams(
            alpha=float(params_payload["alpha"]), beta=float(params_payload["beta"])
        )
        seed = int(params_payload["seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed params file in {directory}: {exc}") from None
    loaded = load_relation(directory / VIEW_FILE, domain.schema)
    return PublishedView(domain=domain, view=loaded.relation, params=params, seed=seed)
