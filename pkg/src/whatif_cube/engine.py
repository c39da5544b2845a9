"""Materialization and aggregation over the virtual cube.

The virtual cube is the union of the real rows and every row a scenario
could simulate. It is never stored: ``materialize`` produces the slice of it
matching a query, and ``evaluate`` aggregates the same slice in a single
scan without building rows at all. Both share one plan step: for each
scenario named in the query, find the stored keys that apply and derive a
real-row guard from each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from .algebra import covers_all_dimensions, extract_scenarios, real_subquery
from .cube import DataCube, Query, Row, Schema, STAR, intersect_query, row_matches
from .errors import BadAggregationError, BadQueryError
from .scenarios import Scenario, ScenarioStore

AGGREGATION_FUNCTIONS = ("sum", "count", "avg", "min", "max")


@dataclass(frozen=True)
class Provenance:
    """Where a simulated row came from: owning scenario, stored key, index of
    the value query under that key, and the source row's position."""

    scenario: str
    key: Query
    value_index: int
    row_index: int


@dataclass(frozen=True)
class SimulatedRow:
    """A row of the virtual cube that does not exist in the real data.

    Coordinates carry scenario values on every dimension a scenario in the
    key substitutes; measures are the source row's measures times the stored
    factors.
    """

    coords: tuple[str, ...]
    measures: tuple[float, ...]
    provenance: Provenance


AnyRow = Union[Row, SimulatedRow]


@dataclass(frozen=True)
class AggregationSpec:
    """An aggregation function over a measure or a product of measures.

    The expression is evaluated per row, after factor scaling, before
    aggregation; ``count`` needs no expression.
    """

    function: str
    expression: tuple[str, ...] = ()

    def __post_init__(self):
        if self.function not in AGGREGATION_FUNCTIONS:
            raise BadAggregationError(
                f"unknown aggregation {self.function!r}; "
                f"expected one of {AGGREGATION_FUNCTIONS}"
            )
        if self.function != "count" and not self.expression:
            raise BadAggregationError(
                f"{self.function} needs a measure expression"
            )

    @classmethod
    def parse(cls, text: str) -> "AggregationSpec":
        """Parse ``fn:measure`` or ``fn:m1*m2``; bare ``count`` is allowed."""
        fn, sep, expr = text.partition(":")
        fn = fn.strip()
        if not sep:
            return cls(fn)
        measures = tuple(m.strip() for m in expr.split("*"))
        if any(not m for m in measures):
            raise BadAggregationError(f"bad aggregation expression {expr!r}")
        return cls(fn, measures)

    def __str__(self) -> str:
        if not self.expression:
            return self.function
        return f"{self.function}:{'*'.join(self.expression)}"


class _ExactSum:
    """Error-free running sum (Shewchuk partials), so that accumulation
    order never changes the result."""

    __slots__ = ("partials",)

    def __init__(self):
        self.partials: list[float] = []

    def add(self, x: float) -> None:
        partials = self.partials
        i = 0
        for y in partials:
            if abs(x) < abs(y):
                x, y = y, x
            hi = x + y
            lo = y - (hi - x)
            if lo:
                partials[i] = lo
                i += 1
            x = hi
        partials[i:] = [x]

    def merge(self, other: "_ExactSum") -> None:
        for x in other.partials:
            self.add(x)

    def value(self) -> float:
        return math.fsum(self.partials)


class Accumulator:
    """Mergeable aggregation state fed one expression value per matched row."""

    def __init__(self, spec: AggregationSpec, schema: Schema):
        self.spec = spec
        self._indices = tuple(schema.measure_index(m) for m in spec.expression)
        self._count = 0
        self._sum = _ExactSum()
        self._min: float | None = None
        self._max: float | None = None

    def add_row(self, measures: Sequence[float]) -> None:
        self._count += 1
        fn = self.spec.function
        if fn == "count":
            return
        value = 1.0
        for i in self._indices:
            value *= measures[i]
        if fn in ("sum", "avg"):
            self._sum.add(value)
        elif fn == "min":
            self._min = value if self._min is None else min(self._min, value)
        elif fn == "max":
            self._max = value if self._max is None else max(self._max, value)

    def merge(self, other: "Accumulator") -> None:
        if other.spec != self.spec:
            raise BadAggregationError("cannot merge accumulators of different specs")
        self._count += other._count
        self._sum.merge(other._sum)
        for attr, pick in (("_min", min), ("_max", max)):
            mine, theirs = getattr(self, attr), getattr(other, attr)
            if theirs is not None:
                setattr(self, attr, theirs if mine is None else pick(mine, theirs))

    def result(self) -> float | int | None:
        """Final value; empty input yields 0 for sum, 0 for count, and None
        (an explicit empty signal, never NaN) for avg/min/max."""
        fn = self.spec.function
        if fn == "count":
            return self._count
        if fn == "sum":
            return self._sum.value()
        if fn == "avg":
            return self._sum.value() / self._count if self._count else None
        return self._min if fn == "min" else self._max


@dataclass(frozen=True)
class EvaluationResult:
    values: tuple[float | int | None, ...]
    row_count: int


@dataclass(frozen=True)
class Comparison:
    value1: float | int | None
    value2: float | int | None
    difference: float | None
    ratio: float | None


@dataclass(frozen=True)
class _KeyPlan:
    scenario: Scenario
    key: Query
    guard: Query  # real-only row filter derived from key ∩ E
    values: tuple  # FactoredQuery list snapshot
    substitutions: tuple[tuple[int, str], ...]


def _validate_eval_query(store: ScenarioStore, e: Query) -> None:
    store.validate_query(e)
    if not covers_all_dimensions(e):
        raise BadQueryError("query has an empty selection for a dimension")


def _substitutions(schema: Schema, key: Query, owner: Scenario) -> tuple[tuple[int, str], ...]:
    """Dimension substitutions a key implies for its simulated rows.

    Every non-real value in the key replaces its dimension's coordinate; the
    owner's value is applied last so it wins any same-dimension conflict.
    Derived from the key itself (not the live registry) so rows simulate
    identically even after a referenced scenario was deleted.
    """
    subs: list[tuple[int, str]] = []
    for i, (dim, sel) in enumerate(zip(schema.dimensions, key.selections)):
        if sel is STAR:
            continue
        for v in sorted(sel):
            if v != owner.value and v not in dim.value_set:
                subs.append((i, v))
    subs.append((schema.dim_index(owner.dimension), owner.value))
    return tuple(subs)


def _key_plans(cube: DataCube, store: ScenarioStore, e: Query) -> list[_KeyPlan]:
    """For each scenario named in e, the stored keys that apply and the
    real-row guard each one contributes."""
    schema = cube.schema
    plans: list[_KeyPlan] = []
    for scn in extract_scenarios(e, store):
        for key, values in scn.entries.items():
            key_part = intersect_query(key, e)
            if not covers_all_dimensions(key_part):
                continue
            guard = real_subquery(key_part, schema)
            plans.append(
                _KeyPlan(
                    scenario=scn,
                    key=key,
                    guard=guard,
                    values=tuple(values),
                    substitutions=_substitutions(schema, key, scn),
                )
            )
    return plans


def materialize(cube: DataCube, store: ScenarioStore, e: Query) -> list[AnyRow]:
    """The slice of the virtual cube matching e.

    Real rows come first, in cube order; then, per scenario and stored key,
    a simulated row for every (source row, value query) pair the key admits.
    One pair yields exactly one simulated row; overlapping value queries may
    legitimately duplicate.
    """
    _validate_eval_query(store, e)
    plans = _key_plans(cube, store, e)

    out: list[AnyRow] = [t for t in cube.rows if row_matches(t, e)]
    for plan in plans:
        for row_index, t in enumerate(cube.rows):
            if not row_matches(t, plan.guard):
                continue
            for value_index, fq in enumerate(plan.values):
                if not row_matches(t, fq.query):
                    continue
                coords = list(t.coords)
                for i, v in plan.substitutions:
                    coords[i] = v
                measures = tuple(m * f for m, f in zip(t.measures, fq.factors))
                out.append(
                    SimulatedRow(
                        tuple(coords),
                        measures,
                        Provenance(
                            plan.scenario.value, plan.key, value_index, row_index
                        ),
                    )
                )
    return out


def evaluate(
    cube: DataCube,
    store: ScenarioStore,
    e: Query,
    specs: Sequence[AggregationSpec],
) -> EvaluationResult:
    """Aggregate the virtual-cube slice matching e in one pass over the real
    rows, without simulating any row.

    Equals aggregating ``materialize(cube, store, e)`` — exactly for sum,
    count, min and max (the sum accumulator is order-independent), and to
    1e-9 relative for avg.
    """
    _validate_eval_query(store, e)
    plans = _key_plans(cube, store, e)
    schema = cube.schema
    accumulators = [Accumulator(spec, schema) for spec in specs]
    row_count = 0

    for t in cube.rows:
        if row_matches(t, e):
            row_count += 1
            for acc in accumulators:
                acc.add_row(t.measures)
        for plan in plans:
            if not row_matches(t, plan.guard):
                continue
            for fq in plan.values:
                if not row_matches(t, fq.query):
                    continue
                row_count += 1
                scaled = tuple(m * f for m, f in zip(t.measures, fq.factors))
                for acc in accumulators:
                    acc.add_row(scaled)

    return EvaluationResult(
        tuple(acc.result() for acc in accumulators), row_count
    )


def compare(
    cube: DataCube,
    store: ScenarioStore,
    e1: Query,
    e2: Query,
    spec: AggregationSpec,
) -> Comparison:
    """Evaluate one aggregation under two queries and report the variance.

    The ratio is omitted (None) when the first value is zero or either side
    has no value.
    """
    v1 = evaluate(cube, store, e1, [spec]).values[0]
    v2 = evaluate(cube, store, e2, [spec]).values[0]
    if v1 is None or v2 is None:
        return Comparison(v1, v2, None, None)
    difference = v2 - v1
    ratio = v2 / v1 if v1 != 0 else None
    return Comparison(v1, v2, difference, ratio)
