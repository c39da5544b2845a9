"""Scenario-aware query operators.

These are the building blocks used when a query mixing real and hypothetical
values has to be reduced to queries over real rows only:

- ``extract_scenarios``   which scenarios a query names
- ``real_subquery``       strip hypothetical values, leaving a real-only query
- ``atomic_decompose``    split a query into atomic queries (per dimension:
                          one scenario value alone, or real values only)
- ``resolve``             fold lists of factored queries into one by pairwise
                          intersection, multiplying factors
- ``scenario_queries``    merged key -> value-queries view over scenarios
- ``augment``             add a scenario value to its own dimension's selection
- ``covers_all_dimensions``  the non-empty-per-dimension guard
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

from .cube import Query, Schema, Selection, STAR, intersect_query
from .errors import BadFactorError, UnknownValueError

if TYPE_CHECKING:  # pragma: no cover
    from .scenarios import Scenario, ScenarioStore


@dataclass(frozen=True)
class FactoredQuery:
    """A real-values-only query plus one multiplicative factor per measure.

    ``factors`` is aligned with the schema's measure order; a factor of 1
    leaves that measure unchanged.
    """

    query: Query
    factors: tuple[float, ...]

    def __post_init__(self):
        for f in self.factors:
            if not math.isfinite(f):
                raise BadFactorError(f"factor is not finite: {f!r}")

    def scaled(self, outer: Sequence[float]) -> "FactoredQuery":
        """Compose with outer per-measure factors (multiplication)."""
        return FactoredQuery(
            self.query, tuple(f * o for f, o in zip(self.factors, outer))
        )


def factors_vector(schema: Schema, factors: Mapping[str, float] | None) -> tuple[float, ...]:
    """Per-measure factor tuple from a name->number mapping; missing measures
    default to 1."""
    vec = [1.0] * len(schema.measures)
    for name, f in (factors or {}).items():
        if not math.isfinite(f):
            raise BadFactorError(f"factor for {name!r} is not finite: {f!r}")
        vec[schema.measure_index(name)] = float(f)
    return tuple(vec)


def covers_all_dimensions(q: Query) -> bool:
    """True iff every dimension's selection is STAR or non-empty."""
    return all(sel is STAR or len(sel) > 0 for sel in q.selections)


def extract_scenarios(q: Query, store: "ScenarioStore") -> list["Scenario"]:
    """Scenarios whose value appears anywhere in q, in registration order.

    Values that are neither real nor registered scenarios are rejected.
    """
    named: set[str] = set()
    schema = store.schema
    for sel in q.selections:
        if sel is STAR:
            continue
        for v in sel:
            if schema.is_real_value(v):
                continue
            scn = store.get(v)
            if scn is None:
                raise UnknownValueError(f"unknown value {v!r}")
            named.add(v)
    return [s for s in store.all() if s.value in named]


def real_subquery(q: Query, schema: Schema) -> Query:
    """Strip every value that is not a real value of its dimension.

    A dimension left with no values becomes STAR, so the result always
    matches some real sub-space.
    """
    sels: list[Selection] = []
    for dim, sel in zip(schema.dimensions, q.selections):
        if sel is STAR:
            sels.append(STAR)
            continue
        kept = sel & dim.value_set
        sels.append(kept if kept else STAR)
    return Query(q.dims, tuple(sels))


def is_atomic_query(q: Query, schema: Schema) -> bool:
    """Atomic: each dimension holds either exactly one non-real (scenario)
    value, or only real values (at least one, STAR included)."""
    for dim, sel in zip(schema.dimensions, q.selections):
        if sel is STAR:
            continue
        if not sel:
            return False
        non_real = [v for v in sel if v not in dim.value_set]
        if non_real and (len(non_real) > 1 or len(sel) > 1):
            return False
    return True


def atomic_decompose(q: Query, schema: Schema, store: "ScenarioStore") -> list[Query]:
    """All combinations of the scenario values in q, one per dimension at a
    time, with each dimension's real values kept together as one block.

    Returns an empty list when any dimension has an empty selection. Scenario
    values are enumerated in registration order, the real block last; the
    output is ordered lexicographically by dimension order.
    """
    options_per_dim: list[list[Selection]] = []
    registration = {s.value: i for i, s in enumerate(store.all())}
    for dim, sel in zip(schema.dimensions, q.selections):
        if sel is STAR:
            options_per_dim.append([STAR])
            continue
        if not sel:
            return []
        scenario_vals = sorted(
            (v for v in sel if v not in dim.value_set),
            key=lambda v: (registration.get(v, len(registration)), v),
        )
        real_vals = sel & dim.value_set
        options: list[Selection] = [frozenset((v,)) for v in scenario_vals]
        if real_vals:
            options.append(real_vals)
        options_per_dim.append(options)
    return [Query(q.dims, combo) for combo in itertools.product(*options_per_dim)]


def resolve(query_sets: Sequence[Sequence[FactoredQuery]]) -> list[FactoredQuery]:
    """Left-fold lists of factored queries into one list.

    Each pair (one from each side) is intersected dimension-wise with factors
    multiplied per measure; pairs whose intersection comes out empty on any
    dimension are dropped. A single input list is returned unchanged; the
    result is empty only when every pair was dropped.
    """
    if not query_sets:
        raise ValueError("resolve needs at least one set of queries")
    acc = list(query_sets[0])
    for nxt in query_sets[1:]:
        merged: list[FactoredQuery] = []
        for left in acc:
            for right in nxt:
                q = intersect_query(left.query, right.query)
                if not covers_all_dimensions(q):
                    continue
                factors = tuple(a * b for a, b in zip(left.factors, right.factors))
                merged.append(FactoredQuery(q, factors))
        acc = merged
    return acc


def scenario_queries(
    scenarios: Sequence["Scenario"],
) -> dict[Query, list[FactoredQuery]]:
    """Merged view of every scenario's stored key -> value-queries entries.

    Keys from distinct scenarios stay distinct because each key carries its
    owner's scenario value; on the off chance two keys coincide their value
    lists are concatenated.
    """
    merged: dict[Query, list[FactoredQuery]] = {}
    for scn in scenarios:
        for key, values in scn.entries.items():
            merged.setdefault(key, []).extend(values)
    return merged


def augment(q: Query, value: str, dimension: str) -> Query:
    """Add a scenario value to the selection of its own dimension.

    Other dimensions are untouched; a STAR selection stays STAR (the wildcard
    already stands for the whole dimension). Idempotent.
    """
    sel = q.selection(dimension)
    if sel is STAR:
        return q
    return q.with_selection(dimension, sel | {value})
