"""Operator tests: scenario extraction, real subqueries, atomic decomposition,
resolution, the merged key map, augmentation, and coverage."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, strategies as st

from whatif_cube import (
    FactoredQuery,
    Query,
    STAR,
    Schema,
    ScenarioStore,
    atomic_decompose,
    augment,
    covers_all_dimensions,
    extract_scenarios,
    intersect_query,
    is_atomic_query,
    real_subquery,
    resolve,
    row_matches,
    scenario_queries,
)
from whatif_cube.cube import Row
from whatif_cube.errors import UnknownValueError

from conftest import make_query

DIMS = ("Year", "Supplier", "Product")


def q(**sel) -> Query:
    return Query.of(DIMS, sel)


class TestExtractScenarios:
    def test_single_scenario(self, cube, su3_store):
        named = extract_scenarios(
            q(Year=["2011"], Supplier=["SU3"], Product=["P1", "P2"]), su3_store
        )
        assert [s.value for s in named] == ["SU3"]

    def test_real_only_query(self, cube, su3_store):
        assert extract_scenarios(q(Year=["2011"]), su3_store) == []

    def test_mixed_query_names_both(self, cube, paper_store):
        named = extract_scenarios(
            q(Year=["2012"], Supplier=["SU1", "SU3"], Product=["P1", "P2"]),
            paper_store,
        )
        assert [s.value for s in named] == ["SU3", "2012"]

    def test_unknown_value_rejected(self, cube, su3_store):
        with pytest.raises(UnknownValueError):
            extract_scenarios(q(Supplier=["SU9"]), su3_store)


class TestRealSubquery:
    def test_strips_scenario_values_star_when_empty(self, cube):
        out = real_subquery(
            q(Year=["2011", "2012"], Supplier=["SU3"], Product=["P1", "P2"]),
            cube.schema,
        )
        assert out == q(Year=["2011"], Supplier="*", Product=["P1", "P2"])

    def test_identity_on_real_query(self, cube):
        query = q(Year=["2011"], Product=["P1"])
        assert real_subquery(query, cube.schema) == query

    def test_atomic_key_intersection_case(self, cube):
        # evaluation query ⟨2011, SU3, P3⟩ against the wide non-atomic key
        key = q(Year=["2011"], Supplier=["SU2", "SU3"], Product=["P1", "P2", "P3"])
        e = q(Year=["2011"], Supplier=["SU3"], Product=["P3"])
        out = real_subquery(intersect_query(key, e), cube.schema)
        assert out == q(Year=["2011"], Supplier="*", Product="*")

    def test_idempotent(self, cube):
        query = q(Year=["2011", "2012"], Supplier=["SU3"])
        once = real_subquery(query, cube.schema)
        assert real_subquery(once, cube.schema) == once


class TestAtomicDecompose:
    def test_scenario_and_real_block_split(self, cube, su3_store):
        atoms = atomic_decompose(
            q(Year=["2011"], Supplier=["SU2", "SU3"], Product=["P1", "P2"]),
            cube.schema,
            su3_store,
        )
        assert atoms == [
            q(Year=["2011"], Supplier=["SU3"], Product=["P1", "P2"]),
            q(Year=["2011"], Supplier=["SU2"], Product=["P1", "P2"]),
        ]

    def test_real_only_query_is_its_own_atom(self, cube, su3_store):
        query = q(Year=["2011"], Supplier=["SU1", "SU2"])
        assert atomic_decompose(query, cube.schema, su3_store) == [query]

    def test_empty_dimension_yields_nothing(self, cube, su3_store):
        assert (
            atomic_decompose(q(Supplier=[]), cube.schema, su3_store) == []
        )

    def test_members_are_atomic(self, cube, paper_store):
        query = q(
            Year=["2011", "2012"], Supplier=["SU1", "SU2", "SU3"], Product=["P1"]
        )
        atoms = atomic_decompose(query, cube.schema, paper_store)
        assert len(atoms) == 4  # {2012, 2011-block} x {SU3, SU1+SU2-block}
        for atom in atoms:
            assert is_atomic_query(atom, cube.schema)


class TestResolve:
    def test_single_set_unchanged(self, cube):
        fq = FactoredQuery(q(Supplier=["SU2"]), (1.0, 0.9))
        assert resolve([[fq]]) == [fq]

    def test_factor_composition(self, cube):
        outer = FactoredQuery(q(), (3.0, 1.0))
        inner = FactoredQuery(q(Supplier=["SU2"]), (1.0, 0.9))
        out = resolve([[outer], [inner]])
        assert len(out) == 1
        assert out[0].factors == (3.0, 0.9)
        assert out[0].query == q(Supplier=["SU2"])

    def test_complementary_pairs_dropped(self, cube):
        a = FactoredQuery(q(Supplier=["SU1"]), (1.0, 1.0))
        b = FactoredQuery(q(Supplier=["SU2"]), (1.0, 1.0))
        assert resolve([[a], [b]]) == []

    def test_partial_drop_keeps_survivors(self, cube):
        a = FactoredQuery(q(Supplier=["SU1"]), (2.0, 1.0))
        b = FactoredQuery(q(Supplier=["SU2"]), (1.0, 1.0))
        c = FactoredQuery(q(Supplier=["SU1", "SU2"]), (1.0, 0.5))
        out = resolve([[a, b], [c]])
        assert [fq.query.selection("Supplier") for fq in out] == [
            frozenset({"SU1"}),
            frozenset({"SU2"}),
        ]
        assert [fq.factors for fq in out] == [(2.0, 0.5), (1.0, 0.5)]


class TestScenarioQueries:
    def test_single_scenario_map(self, cube, su3_store):
        mapping = scenario_queries([su3_store.scenario("SU3")])
        key = q(Year=["2011"], Supplier=["SU2", "SU3"], Product=["P1", "P2"])
        assert list(mapping) == [key]
        (fq,) = mapping[key]
        assert fq.query == q(Year=["2011"], Supplier=["SU2"], Product=["P1", "P2"])
        assert fq.factors == (1.0, 0.9)

    def test_empty_input(self):
        assert scenario_queries([]) == {}

    def test_redefined_2012_two_keys(self, cube, paper_store):
        mapping = scenario_queries([paper_store.scenario("2012")])
        assert list(mapping) == [
            q(Year=["2011", "2012"], Supplier=["SU1"], Product=["P1", "P2"]),
            q(Year=["2011", "2012"], Supplier=["SU3"], Product=["P1", "P2"]),
        ]
        values = list(mapping.values())
        assert values[0][0].query == q(
            Year=["2011"], Supplier=["SU1"], Product=["P1", "P2"]
        )
        assert values[0][0].factors == (2.0, 1.0)
        assert values[1][0].query == q(
            Year=["2011"], Supplier=["SU2"], Product=["P1", "P2"]
        )
        assert values[1][0].factors == (3.0, 0.9)

    def test_keys_contain_owner_value(self, cube, paper_store):
        for scn in paper_store.all():
            dim_index = cube.schema.dim_index(scn.dimension)
            for key in scn.entries:
                sel = key.selections[dim_index]
                assert sel is STAR or scn.value in sel


class TestAugment:
    def test_adds_to_own_dimension_only(self):
        out = augment(q(Year=["2011"], Supplier=["SU1"], Product=["P1", "P2"]), "2012", "Year")
        assert out == q(Year=["2011", "2012"], Supplier=["SU1"], Product=["P1", "P2"])

    def test_eq10_key(self):
        out = augment(q(Year=["2011"], Supplier=["SU2"], Product=["P1", "P2"]), "SU3", "Supplier")
        assert out == q(Year=["2011"], Supplier=["SU2", "SU3"], Product=["P1", "P2"])

    def test_idempotent(self):
        once = augment(q(Year=["2011"]), "2012", "Year")
        assert augment(once, "2012", "Year") == once

    def test_star_stays_star(self):
        assert augment(q(), "2012", "Year").selection("Year") is STAR

    def test_real_part_unchanged(self, cube):
        query = q(Year=["2011"], Supplier=["SU1"])
        out = augment(query, "2012", "Year")
        assert real_subquery(out, cube.schema) == real_subquery(query, cube.schema)


class TestCoversAllDimensions:
    def test_star_and_sets(self):
        assert covers_all_dimensions(q(Year=["2011"], Product=["P1"]))

    def test_empty_selection(self):
        assert not covers_all_dimensions(q(Supplier=[]))

    def test_atomic_key_exclusion_case(self):
        key = q(Year=["2011"], Supplier=["SU2"], Product=["P1", "P2", "P3"])
        e = q(Year=["2011"], Supplier=["SU3"], Product=["P3"])
        assert not covers_all_dimensions(intersect_query(key, e))


# -- properties over a small universe ---------------------------------------

SCHEMA = Schema.build({"D1": ["a", "b"], "D2": ["x", "y"]}, ["M"])
SCENARIOS = {"D1": ["s1", "s2"], "D2": ["t1"]}


def _registry() -> ScenarioStore:
    store = ScenarioStore(SCHEMA)
    for dim, values in SCENARIOS.items():
        for v in values:
            store.create_scenario(v, dim)
    return store


def _selection(dim: str, scenario_values: list[str]):
    pool = list(SCHEMA.dimension(dim).values) + scenario_values
    return st.one_of(
        st.just(STAR),
        st.frozensets(st.sampled_from(pool), min_size=1, max_size=len(pool)),
    )


def _arbitrary_query():
    return st.builds(
        lambda s1, s2: Query(("D1", "D2"), (s1, s2)),
        _selection("D1", SCENARIOS["D1"]),
        _selection("D2", SCENARIOS["D2"]),
    )


@given(_arbitrary_query())
def test_real_subquery_never_keeps_scenario_values(query):
    out = real_subquery(query, SCHEMA)
    for dim, sel in zip(SCHEMA.dimensions, out.selections):
        if sel is not STAR:
            assert sel <= dim.value_set
    assert real_subquery(out, SCHEMA) == out


@given(_arbitrary_query())
def test_atomic_decomposition_partitions_the_virtual_space(query):
    """Every real-or-scenario coordinate tuple matches q iff it matches
    exactly one atom of the decomposition."""
    store = _registry()
    atoms = atomic_decompose(query, SCHEMA, store)
    for atom in atoms:
        assert is_atomic_query(atom, SCHEMA)
    universes = [
        list(SCHEMA.dimension(d).values) + SCENARIOS[d] for d in ("D1", "D2")
    ]
    for coords in itertools.product(*universes):
        probe = Row(tuple(coords), (0.0,))
        in_query = row_matches(probe, query)
        hits = sum(row_matches(probe, atom) for atom in atoms)
        assert hits == (1 if in_query else 0)


@given(
    st.lists(
        st.lists(
            st.sampled_from([0.5, 1.0, 2.0]), min_size=1, max_size=2
        ),
        min_size=1,
        max_size=3,
    )
)
def test_resolve_factor_law(factor_sets):
    """With never-dropping queries, each output factor is the product of one
    factor from each input set, exactly."""
    sets = [
        [FactoredQuery(Query.star(("D1", "D2")), (f, 1.0)) for f in factors]
        for factors in factor_sets
    ]
    out = resolve(sets)
    expected = sorted(
        _prod(pick) for pick in itertools.product(*factor_sets)
    )
    assert sorted(fq.factors[0] for fq in out) == expected


def _prod(values):
    result = 1.0
    for v in values:
        result *= v
    return result
