"""Cube ingestion from CSV, scenario-store JSON round-trip, and row export.

Formats are deliberately plain: RFC 4180 CSV for cubes and exports, one JSON
document for a scenario store. Both are deterministic byte-for-byte given
the same state (selections serialize sorted, entry order is preserved).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .algebra import FactoredQuery
from .cube import DataCube, Dimension, Query, Row, Schema, STAR, Selection
from .engine import AnyRow
from .errors import (
    DuplicateValueError,
    MalformedDocumentError,
    MeasureParseError,
    MissingColumnError,
    SchemaMismatchError,
    UnknownDimensionError,
    UnknownValueError,
)
from .scenarios import Scenario, ScenarioStore


@dataclass(frozen=True)
class CubeManifest:
    """Which CSV columns are dimensions and which are measures."""

    dimensions: tuple[str, ...]
    measures: tuple[str, ...]
    source: str = ""

    def __post_init__(self):
        if not self.dimensions or not self.measures:
            raise SchemaMismatchError("manifest needs dimensions and measures")
        overlap = set(self.dimensions) & set(self.measures)
        if overlap:
            raise SchemaMismatchError(
                f"columns listed as both dimension and measure: {sorted(overlap)}"
            )


def load_cube(csv_text: str, manifest: CubeManifest) -> DataCube:
    """Parse delimited text into an immutable cube.

    The first line must be a header naming every manifest column. Real value
    sets are inferred per dimension column in first-seen order; rows keep
    file order; duplicates are kept.
    """
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise MissingColumnError("input has no header row") from None
    positions: dict[str, int] = {}
    for col in (*manifest.dimensions, *manifest.measures):
        if col not in header:
            raise MissingColumnError(f"column {col!r} missing from header")
        positions[col] = header.index(col)

    dim_pos = [positions[d] for d in manifest.dimensions]
    measure_pos = [positions[m] for m in manifest.measures]
    seen: dict[str, dict[str, None]] = {d: {} for d in manifest.dimensions}
    value_owner: dict[str, str] = {}
    raw_rows: list[tuple[tuple[str, ...], tuple[float, ...]]] = []

    for line_no, record in enumerate(reader, start=2):
        if not record or (len(record) == 1 and record[0] == ""):
            continue
        if len(record) < len(header):
            raise MissingColumnError(
                f"line {line_no}: expected {len(header)} fields, got {len(record)}"
            )
        coords = []
        for d, pos in zip(manifest.dimensions, dim_pos):
            v = record[pos].strip()
            owner = value_owner.get(v)
            if owner is not None and owner != d:
                raise DuplicateValueError(
                    f"line {line_no}: value {v!r} already belongs to "
                    f"dimension {owner!r}"
                )
            value_owner[v] = d
            seen[d][v] = None
            coords.append(v)
        measures = []
        for m, pos in zip(manifest.measures, measure_pos):
            cell = record[pos].strip()
            try:
                x = float(cell)
            except ValueError:
                raise MeasureParseError(
                    f"line {line_no}: {cell!r} is not a number for measure {m!r}"
                ) from None
            if not math.isfinite(x):
                raise MeasureParseError(
                    f"line {line_no}: measure {m!r} must be finite, got {cell!r}"
                )
            measures.append(x)
        raw_rows.append((tuple(coords), tuple(measures)))

    schema = Schema(
        tuple(Dimension(d, tuple(seen[d])) for d in manifest.dimensions),
        tuple(manifest.measures),
    )
    return DataCube(schema, tuple(Row(c, m) for c, m in raw_rows))


def format_number(x: float) -> str:
    """Fixed notation, at most 9 fractional digits, trailing zeros trimmed."""
    if x == 0:
        return "0"
    s = f"{x:.9f}".rstrip("0").rstrip(".")
    return s if s not in ("", "-") else "0"


def export_rows(schema: Schema, rows: Sequence[AnyRow]) -> str:
    """CSV text: dimensions then measures as header, one line per row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*schema.dim_names, *schema.measures])
    for t in rows:
        writer.writerow([*t.coords, *(format_number(v) for v in t.measures)])
    return buf.getvalue()


# -- query / store documents ------------------------------------------------

def query_to_json(q: Query) -> dict:
    """{dimension: sorted value list | "*"} with every dimension present."""
    out: dict[str, object] = {}
    for d, sel in zip(q.dims, q.selections):
        out[d] = "*" if sel is STAR else sorted(sel)
    return out


def query_from_json(doc: Mapping, schema: Schema) -> Query:
    """Inverse of query_to_json; omitted dimensions default to STAR."""
    if not isinstance(doc, Mapping):
        raise MalformedDocumentError(f"query must be an object, got {type(doc).__name__}")
    unknown = set(doc) - set(schema.dim_names)
    if unknown:
        raise UnknownDimensionError(f"unknown dimensions {sorted(unknown)}")
    sels: list[Selection] = []
    for d in schema.dim_names:
        raw = doc.get(d, "*")
        if raw == "*":
            sels.append(STAR)
        elif isinstance(raw, (list, tuple)) and all(isinstance(v, str) for v in raw):
            sels.append(frozenset(raw))
        else:
            raise MalformedDocumentError(
                f"selection for {d!r} must be \"*\" or a list of strings"
            )
    return Query(schema.dim_names, tuple(sels))


def _factors_to_json(schema: Schema, factors: tuple[float, ...]) -> dict:
    return {m: f for m, f in zip(schema.measures, factors)}


def store_to_document(store: ScenarioStore) -> dict:
    schema = store.schema
    return {
        "scenarios": [
            {
                "value": scn.value,
                "dimension": scn.dimension,
                "entries": [
                    {
                        "key": query_to_json(key),
                        "values": [
                            {
                                "query": query_to_json(fq.query),
                                "factors": _factors_to_json(schema, fq.factors),
                            }
                            for fq in values
                        ],
                    }
                    for key, values in scn.entries.items()
                ],
            }
            for scn in store.all()
        ]
    }


def save_store(store: ScenarioStore) -> str:
    """Serialize a scenario store to its JSON document."""
    return json.dumps(store_to_document(store), indent=2) + "\n"


def _require(doc: Mapping, field: str, kind: type) -> object:
    if field not in doc:
        raise MalformedDocumentError(f"missing field {field!r}")
    value = doc[field]
    if not isinstance(value, kind):
        raise MalformedDocumentError(
            f"field {field!r} must be {kind.__name__}, got {type(value).__name__}"
        )
    return value


def load_store(text: str, cube: DataCube) -> ScenarioStore:
    """Parse and validate a store document against a cube's schema."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"not valid JSON: {exc}") from None
    return store_from_document(doc, cube)


def store_from_document(doc: object, cube: DataCube) -> ScenarioStore:
    """Build a store from an already-parsed document.

    Value queries must name real values only. Keys may carry scenario values
    — including values of scenarios deleted after the entry was stored —
    so key values are only checked structurally.
    """
    if not isinstance(doc, dict):
        raise MalformedDocumentError("top level must be an object")
    scenarios = _require(doc, "scenarios", list)

    schema = cube.schema
    store = ScenarioStore(schema)
    for s_doc in scenarios:
        if not isinstance(s_doc, dict):
            raise MalformedDocumentError("each scenario must be an object")
        value = _require(s_doc, "value", str)
        dimension = _require(s_doc, "dimension", str)
        scn = store.create_scenario(value, dimension)
        for e_doc in _require(s_doc, "entries", list):
            if not isinstance(e_doc, dict):
                raise MalformedDocumentError("each entry must be an object")
            key = query_from_json(_require(e_doc, "key", dict), schema)
            values: list[FactoredQuery] = []
            for v_doc in _require(e_doc, "values", list):
                if not isinstance(v_doc, dict):
                    raise MalformedDocumentError("each value must be an object")
                q = query_from_json(_require(v_doc, "query", dict), schema)
                _check_real_only(q, schema)
                factors_doc = _require(v_doc, "factors", dict)
                vec = [1.0] * len(schema.measures)
                for m, f in factors_doc.items():
                    if not isinstance(f, (int, float)) or isinstance(f, bool):
                        raise MalformedDocumentError(
                            f"factor for {m!r} must be a number"
                        )
                    vec[schema.measure_index(m)] = float(f)
                values.append(FactoredQuery(q, tuple(vec)))
            scn.entries[key] = values
    return store


def _check_real_only(q: Query, schema: Schema) -> None:
    for dim, sel in zip(schema.dimensions, q.selections):
        if sel is STAR:
            continue
        bad = sel - dim.value_set
        if bad:
            raise UnknownValueError(
                f"stored value query names non-real values {sorted(bad)} "
                f"for dimension {dim.name!r}"
            )
