"""In-memory what-if analysis over a read-only data cube.

New hypothetical dimension values ("scenarios") are stored as queries plus
per-measure factors instead of materialized rows; ad-hoc queries spanning
real and hypothetical data simulate the scenario rows on the fly.
"""

from .algebra import (
    FactoredQuery,
    atomic_decompose,
    augment,
    covers_all_dimensions,
    extract_scenarios,
    factors_vector,
    is_atomic_query,
    real_subquery,
    resolve,
    scenario_queries,
)
from .cube import (
    DataCube,
    Dimension,
    Query,
    Row,
    Schema,
    STAR,
    cube_union,
    intersect_query,
    row_matches,
    select,
    select_modify,
)
from .engine import (
    AggregationSpec,
    Comparison,
    EvaluationResult,
    Provenance,
    SimulatedRow,
    compare,
    evaluate,
    materialize,
)
from .errors import WhatIfError
from .persistence import (
    CubeManifest,
    export_rows,
    load_cube,
    load_store,
    save_store,
)
from .scenarios import Scenario, ScenarioStore

__all__ = [
    "AggregationSpec",
    "Comparison",
    "CubeManifest",
    "DataCube",
    "Dimension",
    "EvaluationResult",
    "FactoredQuery",
    "Provenance",
    "Query",
    "Row",
    "STAR",
    "Scenario",
    "ScenarioStore",
    "Schema",
    "SimulatedRow",
    "WhatIfError",
    "atomic_decompose",
    "augment",
    "compare",
    "covers_all_dimensions",
    "cube_union",
    "evaluate",
    "export_rows",
    "extract_scenarios",
    "factors_vector",
    "intersect_query",
    "is_atomic_query",
    "load_cube",
    "load_store",
    "materialize",
    "real_subquery",
    "resolve",
    "row_matches",
    "save_store",
    "scenario_queries",
    "select",
    "select_modify",
]
