"""Scenario registry and the association of queries with scenarios.

A scenario introduces one hypothetical dimension value. It never stores rows:
it stores an ordered map from atomic *key queries* to lists of factored
*real* queries. Association reduces an arbitrary query (which may name other
scenarios) to that two-tier form, so every scenario stands on its own once
created: later edits or deletions of the scenarios it was built from do not
touch it, and no dependency cycles can exist in stored state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .algebra import (
    FactoredQuery,
    atomic_decompose,
    augment,
    covers_all_dimensions,
    extract_scenarios,
    factors_vector,
    resolve,
    scenario_queries,
)
from .cube import Query, Schema, STAR, intersect_query
from .errors import (
    BadIndexError,
    BadQueryError,
    EmptyResolutionError,
    MissingEntryError,
    NameCollisionError,
    SelfReferenceError,
    UnknownScenarioError,
    UnknownValueError,
)

#: A stored association: the key query and the value queries filed under it.
Entry = tuple[Query, list[FactoredQuery]]


@dataclass
class Scenario:
    """One hypothetical dimension value and the queries that define its rows.

    ``dimension`` is fixed for the scenario's lifetime; ``entries`` maps each
    atomic key query (which always names ``value`` on its own dimension) to
    the real queries, with per-measure factors, that simulate its rows.
    """

    value: str
    dimension: str
    entries: dict[Query, list[FactoredQuery]] = field(default_factory=dict)

    def clone(self) -> "Scenario":
        return Scenario(
            self.value,
            self.dimension,
            {k: list(v) for k, v in self.entries.items()},
        )


class ScenarioStore:
    """Registry of scenarios over one schema, in registration order.

    Mutations are not thread-safe; serialize writers. Readers holding a
    reference to a store the writer no longer mutates (see ``clone``) always
    observe a consistent state.
    """

    def __init__(self, schema: Schema):
        self.schema = schema
        self._scenarios: dict[str, Scenario] = {}

    def __len__(self) -> int:
        return len(self._scenarios)

    def all(self) -> list[Scenario]:
        return list(self._scenarios.values())

    def get(self, value: str) -> Scenario | None:
        return self._scenarios.get(value)

    def scenario(self, value: str) -> Scenario:
        scn = self._scenarios.get(value)
        if scn is None:
            raise UnknownScenarioError(f"no scenario named {value!r}")
        return scn

    def is_scenario_value(self, value: str) -> bool:
        return value in self._scenarios

    def clone(self) -> "ScenarioStore":
        out = ScenarioStore(self.schema)
        out._scenarios = {v: s.clone() for v, s in self._scenarios.items()}
        return out

    # -- validation -------------------------------------------------------

    def validate_query(self, q: Query) -> None:
        """Check that q fits the schema and that every named value belongs to
        the dimension it is listed under (as a real value or a scenario)."""
        if q.dims != self.schema.dim_names:
            raise BadQueryError(
                f"query dimensions {q.dims} do not match schema "
                f"{self.schema.dim_names}"
            )
        for dim, sel in zip(self.schema.dimensions, q.selections):
            if sel is STAR:
                continue
            for v in sel:
                if v in dim.value_set:
                    continue
                scn = self._scenarios.get(v)
                if scn is None:
                    real_dim = self.schema.dimension_of_real_value(v)
                    if real_dim is not None:
                        raise UnknownValueError(
                            f"{v!r} belongs to dimension {real_dim!r}, "
                            f"not {dim.name!r}"
                        )
                    raise UnknownValueError(f"unknown value {v!r}")
                if scn.dimension != dim.name:
                    raise UnknownValueError(
                        f"scenario {v!r} belongs to dimension "
                        f"{scn.dimension!r}, not {dim.name!r}"
                    )

    # -- operations -------------------------------------------------------

    def create_scenario(self, value: str, dimension: str) -> Scenario:
        """Register an empty scenario for a new value on an existing dimension."""
        self.schema.dim_index(dimension)
        if self.schema.is_real_value(value):
            raise NameCollisionError(f"{value!r} is already a real value")
        if value in self._scenarios:
            raise NameCollisionError(f"scenario {value!r} already exists")
        scn = Scenario(value, dimension)
        self._scenarios[value] = scn
        return scn

    def associate_query(
        self,
        target: str,
        q: Query,
        factors: Mapping[str, float] | None = None,
    ) -> list[Entry]:
        """Associate a query (possibly naming other scenarios) with a scenario.

        The query is reduced to entries of the two-tier store form. A query
        naming only real values is stored directly under its augmented key.
        Otherwise it is split into atomic queries; for each atomic, the value
        lists of every applicable key of the scenarios it names are gathered
        and folded with ``resolve``, and the caller's factors are multiplied
        into each resulting query's factors.

        All entries are computed before any is stored, so a failed
        association leaves the store untouched. Returns the stored entries.
        """
        scn = self.scenario(target)
        self.validate_query(q)
        if not covers_all_dimensions(q):
            raise BadQueryError("query has an empty selection for a dimension")
        if target in set(q.named_values()):
            raise SelfReferenceError(
                f"query associated with {target!r} must not name {target!r}"
            )
        outer = factors_vector(self.schema, factors)

        named = extract_scenarios(q, self)
        new_entries: list[Entry] = []
        if not named:
            key = augment(q, target, scn.dimension)
            new_entries.append((key, [FactoredQuery(q, outer)]))
        else:
            for atom in atomic_decompose(q, self.schema, self):
                atom_scenarios = extract_scenarios(atom, self)
                if not atom_scenarios:
                    key = augment(atom, target, scn.dimension)
                    new_entries.append((key, [FactoredQuery(atom, outer)]))
                    continue
                merged = scenario_queries(atom_scenarios)
                gathered = [
                    values
                    for key_q, values in merged.items()
                    if covers_all_dimensions(intersect_query(key_q, atom))
                ]
                if not gathered:
                    raise EmptyResolutionError(
                        f"no stored queries of {[s.value for s in atom_scenarios]} "
                        f"apply to {atom!r}"
                    )
                resolved = resolve(gathered)
                if not resolved:
                    raise EmptyResolutionError(
                        f"stored queries of {[s.value for s in atom_scenarios]} "
                        f"have no common rows for {atom!r}"
                    )
                key = augment(atom, target, scn.dimension)
                new_entries.append(
                    (key, [fq.scaled(outer) for fq in resolved])
                )

        for key, values in new_entries:
            if key in scn.entries:
                scn.entries[key].extend(values)
            else:
                scn.entries[key] = list(values)
        return new_entries

    def remove_entry(self, target: str, key: Query) -> Entry:
        """Drop one key (and its value queries) from a scenario."""
        scn = self.scenario(target)
        if key not in scn.entries:
            raise MissingEntryError(f"scenario {target!r} has no entry {key!r}")
        return key, scn.entries.pop(key)

    def update_factors(
        self,
        target: str,
        key: Query,
        value_index: int,
        factors: Mapping[str, float],
    ) -> FactoredQuery:
        """Replace only the named factors of one stored value query."""
        scn = self.scenario(target)
        if key not in scn.entries:
            raise MissingEntryError(f"scenario {target!r} has no entry {key!r}")
        values = scn.entries[key]
        if not 0 <= value_index < len(values):
            raise BadIndexError(
                f"value index {value_index} out of range 0..{len(values) - 1}"
            )
        old = values[value_index]
        vec = list(old.factors)
        for name, f in factors.items():
            vec[self.schema.measure_index(name)] = float(f)
        updated = FactoredQuery(old.query, tuple(vec))
        values[value_index] = updated
        return updated

    def delete_scenario(self, value: str) -> Scenario:
        """Unregister a scenario. Other scenarios are untouched: their stored
        entries reference real values only, so nothing dangles."""
        scn = self.scenario(value)
        del self._scenarios[value]
        return scn
