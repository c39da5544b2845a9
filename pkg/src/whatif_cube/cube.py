"""Immutable in-memory data cube: schema, rows, queries, and scan primitives.

A cube holds an ordered multiset of rows over named dimensions and numeric
measures. Queries select per dimension either the wildcard (every value) or
an explicit value set; the primitives here (`select`, `select_modify`,
`cube_union`, `intersect_query`) are pure and never touch the cube in place.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    BadFactorError,
    SchemaMismatchError,
    UnknownDimensionError,
    UnknownMeasureError,
    UnknownValueError,
)


class Star:
    """Wildcard selection: stands for every value of a dimension.

    Kept symbolic (a singleton, never expanded into a value set) so queries
    stay valid when new values appear later.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "*"


STAR = Star()

#: A per-dimension selection: the wildcard or an explicit (possibly empty) set.
Selection = Union[Star, frozenset]


@dataclass(frozen=True)
class Dimension:
    """A named categorical axis with its ordered set of real values."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "value_set", frozenset(self.values))

    value_set: frozenset = field(init=False, repr=False, compare=False)


@dataclass(frozen=True)
class Schema:
    """Dimensions plus measures; the shape every row and query must fit.

    Value strings are globally unique: each one belongs to exactly one
    dimension, so a bare value always identifies its axis.
    """

    dimensions: tuple[Dimension, ...]
    measures: tuple[str, ...]

    def __post_init__(self):
        if not self.dimensions:
            raise SchemaMismatchError("schema needs at least one dimension")
        if not self.measures:
            raise SchemaMismatchError("schema needs at least one measure")
        dim_names = [d.name for d in self.dimensions]
        if len(set(dim_names)) != len(dim_names):
            raise SchemaMismatchError("dimension names must be unique")
        if len(set(self.measures)) != len(self.measures):
            raise SchemaMismatchError("measure names must be unique")
        overlap = set(dim_names) & set(self.measures)
        if overlap:
            raise SchemaMismatchError(
                f"names used as both dimension and measure: {sorted(overlap)}"
            )
        value_dim: dict[str, str] = {}
        for d in self.dimensions:
            for v in d.values:
                if v in value_dim:
                    raise SchemaMismatchError(
                        f"value {v!r} appears in dimensions "
                        f"{value_dim[v]!r} and {d.name!r}"
                    )
                value_dim[sys.intern(v)] = d.name
        object.__setattr__(self, "_value_dim", value_dim)
        object.__setattr__(self, "_dim_index", {n: i for i, n in enumerate(dim_names)})
        object.__setattr__(
            self, "_measure_index", {n: i for i, n in enumerate(self.measures)}
        )

    _value_dim: dict = field(init=False, repr=False, compare=False)
    _dim_index: dict = field(init=False, repr=False, compare=False)
    _measure_index: dict = field(init=False, repr=False, compare=False)

    @classmethod
    def build(
        cls,
        dimensions: Mapping[str, Iterable[str]],
        measures: Sequence[str],
    ) -> "Schema":
        dims = tuple(Dimension(n, tuple(vs)) for n, vs in dimensions.items())
        return cls(dims, tuple(measures))

    @property
    def dim_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    def dim_index(self, name: str) -> int:
        try:
            return self._dim_index[name]
        except KeyError:
            raise UnknownDimensionError(f"unknown dimension {name!r}") from None

    def dimension(self, name: str) -> Dimension:
        return self.dimensions[self.dim_index(name)]

    def measure_index(self, name: str) -> int:
        try:
            return self._measure_index[name]
        except KeyError:
            raise UnknownMeasureError(f"unknown measure {name!r}") from None

    def dimension_of_real_value(self, value: str) -> str | None:
        """Dimension a real value belongs to, or None if not a real value."""
        return self._value_dim.get(value)

    def is_real_value(self, value: str) -> bool:
        return value in self._value_dim


@dataclass(frozen=True)
class Query:
    """Per-dimension selections, aligned with a schema's dimension order.

    Selections may name real values or scenario values; which kind a value
    is gets decided by the schema / scenario registry, not by the query.
    """

    dims: tuple[str, ...]
    selections: tuple[Selection, ...]

    def __post_init__(self):
        if len(self.dims) != len(self.selections):
            raise SchemaMismatchError("one selection required per dimension")

    @classmethod
    def star(cls, dims: Sequence[str]) -> "Query":
        return cls(tuple(dims), tuple(STAR for _ in dims))

    @classmethod
    def of(
        cls,
        dims: Sequence[str],
        selections: Mapping[str, Union[str, Iterable[str]]],
    ) -> "Query":
        """Build a query from a mapping; unlisted dimensions default to STAR.

        A selection of "*" (or STAR) is the wildcard; anything else is taken
        as an iterable of value strings.
        """
        unknown = set(selections) - set(dims)
        if unknown:
            raise UnknownDimensionError(f"unknown dimensions {sorted(unknown)}")
        sels = []
        for d in dims:
            raw = selections.get(d, STAR)
            if raw is STAR or (isinstance(raw, str) and raw == "*"):
                sels.append(STAR)
            elif isinstance(raw, str):
                sels.append(frozenset((raw,)))
            else:
                sels.append(frozenset(raw))
        return cls(tuple(dims), tuple(sels))

    def selection(self, dim: str) -> Selection:
        try:
            i = self.dims.index(dim)
        except ValueError:
            raise UnknownDimensionError(f"unknown dimension {dim!r}") from None
        return self.selections[i]

    def with_selection(self, dim: str, sel: Selection) -> "Query":
        i = self.dims.index(dim)
        sels = list(self.selections)
        sels[i] = sel
        return Query(self.dims, tuple(sels))

    def named_values(self) -> list[str]:
        """Every value named explicitly anywhere in the query (STARs excluded)."""
        out: list[str] = []
        for sel in self.selections:
            if sel is not STAR:
                out.extend(sorted(sel))
        return out

    def __repr__(self) -> str:
        parts = []
        for d, sel in zip(self.dims, self.selections):
            if sel is STAR:
                parts.append(f"{d}=*")
            else:
                parts.append(f"{d}={{{','.join(sorted(sel))}}}")
        return f"Query({'; '.join(parts)})"


@dataclass(frozen=True)
class Row:
    """One value per dimension plus one numeric value per measure."""

    coords: tuple[str, ...]
    measures: tuple[float, ...]


@dataclass(frozen=True)
class DataCube:
    """Read-only cube: a schema and an ordered multiset of conforming rows.

    Immutable after construction; duplicate rows are kept as-is. Safe to
    share across concurrent readers.
    """

    schema: Schema
    rows: tuple[Row, ...]

    def __post_init__(self):
        n_dims = len(self.schema.dimensions)
        n_measures = len(self.schema.measures)
        for idx, row in enumerate(self.rows):
            if len(row.coords) != n_dims or len(row.measures) != n_measures:
                raise SchemaMismatchError(f"row {idx} does not fit the schema")
            for dim, value in zip(self.schema.dimensions, row.coords):
                if value not in dim.value_set:
                    raise UnknownValueError(
                        f"row {idx}: {value!r} is not a real value of {dim.name!r}"
                    )
            for m, v in zip(self.schema.measures, row.measures):
                if not math.isfinite(v):
                    raise BadFactorError(
                        f"row {idx}: measure {m!r} is not finite"
                    )

    def __len__(self) -> int:
        return len(self.rows)


def row_matches(row: Row, q: Query) -> bool:
    """True iff every dimension's selection is STAR or contains the row's value."""
    if len(row.coords) != len(q.selections):
        raise SchemaMismatchError("row and query have different dimension counts")
    for value, sel in zip(row.coords, q.selections):
        if sel is STAR:
            continue
        if value not in sel:
            return False
    return True


def _check_query_dims(schema: Schema, q: Query) -> None:
    if q.dims != schema.dim_names:
        raise SchemaMismatchError(
            f"query dimensions {q.dims} do not match schema {schema.dim_names}"
        )


def select(cube: DataCube, q: Query) -> list[Row]:
    """All cube rows matching q, in cube order.

    q must name real values only; hypothetical values are rejected here and
    handled by the evaluation engine instead.
    """
    _check_query_dims(cube.schema, q)
    for dim, sel in zip(cube.schema.dimensions, q.selections):
        if sel is STAR:
            continue
        bad = sel - dim.value_set
        if bad:
            raise UnknownValueError(
                f"{sorted(bad)} are not real values of {dim.name!r}; "
                "use the evaluation engine for scenario values"
            )
    return [t for t in cube.rows if row_matches(t, q)]


def select_modify(
    schema: Schema,
    rows: Sequence[Row],
    factors: Mapping[str, float] | None = None,
    mapping: Mapping[str, str] | None = None,
) -> list[Row]:
    """Copy rows, multiplying measures by per-measure factors and replacing
    the value of each mapped dimension.

    The mapping target may be a value unknown to the schema (that is the
    point: it is how hypothetical rows get their scenario coordinates).
    Empty factors and empty mapping return the input unchanged.
    """
    factors = dict(factors or {})
    mapping = dict(mapping or {})
    factor_vec = [1.0] * len(schema.measures)
    for name, f in factors.items():
        if not math.isfinite(f):
            raise BadFactorError(f"factor for {name!r} is not finite: {f!r}")
        factor_vec[schema.measure_index(name)] = float(f)
    subst: list[tuple[int, str]] = []
    for dim_name, new_value in mapping.items():
        subst.append((schema.dim_index(dim_name), new_value))

    out = []
    for t in rows:
        coords = t.coords
        if subst:
            c = list(coords)
            for i, v in subst:
                c[i] = v
            coords = tuple(c)
        measures = tuple(m * f for m, f in zip(t.measures, factor_vec))
        out.append(Row(coords, measures))
    return out


def cube_union(a: Sequence[Row], b: Sequence[Row]) -> list[Row]:
    """Multiset concatenation; duplicates are preserved."""
    rows = list(a)
    if rows and b:
        n_dims, n_measures = len(rows[0].coords), len(rows[0].measures)
        probe = b[0]
        if len(probe.coords) != n_dims or len(probe.measures) != n_measures:
            raise SchemaMismatchError("operands have different shapes")
    rows.extend(b)
    return rows


def intersect_query(a: Query, b: Query) -> Query:
    """Per-dimension intersection: STAR is the identity, sets intersect.

    A dimension may come out empty; callers that care must check coverage.
    """
    if a.dims != b.dims:
        raise SchemaMismatchError("queries have different dimensions")
    sels = []
    for x, y in zip(a.selections, b.selections):
        if x is STAR:
            sels.append(y)
        elif y is STAR:
            sels.append(x)
        else:
            sels.append(x & y)
    return Query(a.dims, tuple(sels))
