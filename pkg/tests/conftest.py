"""Shared fixtures: the four-row sourcing cube and its scenario setups."""

from __future__ import annotations

import pytest

from whatif_cube import CubeManifest, Query, ScenarioStore, load_cube


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(n, text): acceptance criterion number and summary"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and report.when == "call":
        number, text = marker.args
        if report.passed:
            status = "PASS"
        elif hasattr(report, "wasxfail"):
            status = "FAIL (expected: documented spec defect)"
        else:
            status = "FAIL"
        print(f"\nacceptance criterion {number}: {status} — {text}", flush=True)

SOURCING_CSV = """\
Year,Supplier,Product,Volume,Cost
2011,SU1,P1,10,1.0
2011,SU1,P2,11,1.5
2011,SU2,P1,12,1.1
2011,SU2,P2,13,1.4
"""

MANIFEST = CubeManifest(("Year", "Supplier", "Product"), ("Volume", "Cost"))


def make_query(schema, **selections) -> Query:
    """Query from keyword selections; unlisted dimensions are STAR."""
    return Query.of(schema.dim_names, selections)


@pytest.fixture
def cube():
    return load_cube(SOURCING_CSV, MANIFEST)


@pytest.fixture
def store(cube):
    return ScenarioStore(cube.schema)


@pytest.fixture
def su3_store(cube, store):
    """Supplier scenario SU3: SU2's rows at a 10% cost discount."""
    store.create_scenario("SU3", "Supplier")
    store.associate_query(
        "SU3",
        make_query(cube.schema, Year=["2011"], Supplier=["SU2"], Product=["P1", "P2"]),
        {"Volume": 1, "Cost": 0.9},
    )
    return store


@pytest.fixture
def plain_2012_store(cube, store):
    """Year scenario 2012 from real blocks only: SU1 doubled, SU2 tripled."""
    store.create_scenario("2012", "Year")
    store.associate_query(
        "2012",
        make_query(cube.schema, Year=["2011"], Supplier=["SU1"]),
        {"Volume": 2, "Cost": 1},
    )
    store.associate_query(
        "2012",
        make_query(cube.schema, Year=["2011"], Supplier=["SU2"]),
        {"Volume": 3, "Cost": 1},
    )
    return store


@pytest.fixture
def paper_store(cube, su3_store):
    """SU3 plus the 2012 scenario redefined on top of it: SU1 doubled,
    SU3 (resolving to discounted SU2 rows) tripled."""
    store = su3_store
    store.create_scenario("2012", "Year")
    store.associate_query(
        "2012",
        make_query(cube.schema, Year=["2011"], Supplier=["SU1"], Product=["P1", "P2"]),
        {"Volume": 2, "Cost": 1},
    )
    store.associate_query(
        "2012",
        make_query(cube.schema, Year=["2011"], Supplier=["SU3"], Product=["P1", "P2"]),
        {"Volume": 3, "Cost": 1},
    )
    return store
