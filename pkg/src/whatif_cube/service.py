"""HTTP service exposing the cube, scenarios, and evaluation to clients.

One in-memory session per process: a cube, a scenario store, and a revision
counter bumped by every successful mutation. Mutations are serialized and
applied copy-on-write — a request either fully replaces the session state or
leaves it untouched — so concurrent readers always see a consistent
snapshot and never a half-applied change.
"""

from __future__ import annotations

import argparse
import threading
from dataclasses import dataclass
from typing import Callable, Mapping

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .cube import DataCube
from .engine import (
    AggregationSpec,
    AnyRow,
    SimulatedRow,
    compare,
    evaluate,
    materialize,
)
from .errors import (
    BadQueryError,
    MalformedDocumentError,
    NoCubeError,
    WhatIfError,
)
from .persistence import (
    CubeManifest,
    load_cube,
    query_from_json,
    query_to_json,
    store_from_document,
    store_to_document,
)
from .scenarios import Scenario, ScenarioStore

_STATUS = {
    "NO_CUBE": 409,
    "NAME_COLLISION": 409,
    "UNKNOWN_SCENARIO": 404,
    "MISSING_ENTRY": 404,
}


@dataclass(frozen=True)
class SessionState:
    cube: DataCube | None
    store: ScenarioStore | None
    revision: int


class Session:
    """Holds the current state behind an atomic reference.

    Readers grab the reference without locking; writers compute a fresh
    state under the lock and swap it in.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._state = SessionState(None, None, 0)

    def snapshot(self) -> SessionState:
        return self._state

    def loaded(self) -> SessionState:
        state = self._state
        if state.cube is None or state.store is None:
            raise NoCubeError("no cube loaded; PUT /api/cube first")
        return state

    def mutate(self, fn: Callable[[SessionState], SessionState]) -> SessionState:
        with self._lock:
            new = fn(self._state)
            self._state = new
            return new


def _scenario_view(schema, scn: Scenario) -> dict:
    return {
        "value": scn.value,
        "dimension": scn.dimension,
        "entries": [
            {
                "key": query_to_json(key),
                "values": [
                    {
                        "query": query_to_json(fq.query),
                        "factors": {
                            m: f for m, f in zip(schema.measures, fq.factors)
                        },
                    }
                    for fq in values
                ],
            }
            for key, values in scn.entries.items()
        ],
    }


def _row_view(schema, row: AnyRow) -> dict:
    out = {
        "coords": dict(zip(schema.dim_names, row.coords)),
        "measures": dict(zip(schema.measures, row.measures)),
        "simulated": isinstance(row, SimulatedRow),
    }
    if isinstance(row, SimulatedRow):
        p = row.provenance
        out["provenance"] = {
            "scenario": p.scenario,
            "key": query_to_json(p.key),
            "valueIndex": p.value_index,
            "rowIndex": p.row_index,
        }
    return out


def _parse_factors(raw: object) -> dict[str, float]:
    if raw is None:
        return {}
    if not isinstance(raw, Mapping):
        raise BadQueryError("factors must be an object of measure -> number")
    out = {}
    for m, f in raw.items():
        if not isinstance(f, (int, float)) or isinstance(f, bool):
            raise BadQueryError(f"factor for {m!r} must be a number")
        out[str(m)] = float(f)
    return out


def _parse_specs(raw: object) -> list[AggregationSpec]:
    if not isinstance(raw, list) or not raw:
        raise BadQueryError("specs must be a non-empty list")
    specs = []
    for item in raw:
        if isinstance(item, str):
            specs.append(AggregationSpec.parse(item))
        elif isinstance(item, Mapping):
            expr = item.get("expression", "")
            measures = tuple(
                m.strip() for m in str(expr).split("*") if m.strip()
            ) if expr else ()
            specs.append(AggregationSpec(str(item.get("function", "")), measures))
        else:
            raise BadQueryError("each spec must be a string or an object")
    return specs


def create_app() -> FastAPI:
    app = FastAPI(title="whatif-cube", docs_url=None, redoc_url=None)
    session = Session()
    app.state.session = session

    @app.exception_handler(WhatIfError)
    async def _domain_error(_req: Request, exc: WhatIfError):
        body = {"error": exc.code, "message": exc.message}
        if exc.detail is not None:
            body["detail"] = exc.detail
        return JSONResponse(status_code=_STATUS.get(exc.code, 400), content=body)

    # -- cube and schema ----------------------------------------------------

    @app.put("/api/cube")
    async def put_cube(body: dict):
        manifest_doc = body.get("manifest")
        if not isinstance(manifest_doc, dict):
            raise MalformedDocumentError("body needs a manifest object")
        csv_text = body.get("csv")
        if not isinstance(csv_text, str):
            raise MalformedDocumentError("body needs csv text")
        manifest = CubeManifest(
            tuple(manifest_doc.get("dimensions") or ()),
            tuple(manifest_doc.get("measures") or ()),
            str(manifest_doc.get("source", "")),
        )
        cube = load_cube(csv_text, manifest)

        def apply(state: SessionState) -> SessionState:
            return SessionState(cube, ScenarioStore(cube.schema), state.revision + 1)

        state = session.mutate(apply)
        return {
            "rowCount": len(cube.rows),
            "schema": _schema_view(state),
            "revision": state.revision,
        }

    def _schema_view(state: SessionState) -> dict:
        cube, store = state.cube, state.store
        dims = []
        for dim in cube.schema.dimensions:
            values = [{"value": v, "scenario": False} for v in dim.values]
            for scn in store.all():
                if scn.dimension == dim.name:
                    values.append({"value": scn.value, "scenario": True})
            dims.append({"name": dim.name, "values": values})
        return {"dimensions": dims, "measures": list(cube.schema.measures)}

    @app.get("/api/schema")
    async def get_schema():
        state = session.loaded()
        view = _schema_view(state)
        view["revision"] = state.revision
        view["rowCount"] = len(state.cube.rows)
        return view

    # -- scenarios ----------------------------------------------------------

    @app.get("/api/scenarios")
    async def list_scenarios():
        state = session.loaded()
        return {
            "scenarios": [
                _scenario_view(state.cube.schema, s) for s in state.store.all()
            ],
            "revision": state.revision,
        }

    @app.post("/api/scenarios", status_code=201)
    async def create_scenario(body: dict):
        value = body.get("value")
        dimension = body.get("dimension")
        if not isinstance(value, str) or not isinstance(dimension, str):
            raise MalformedDocumentError("body needs value and dimension strings")

        def apply(state: SessionState) -> SessionState:
            if state.cube is None:
                raise NoCubeError("no cube loaded; PUT /api/cube first")
            store = state.store.clone()
            store.create_scenario(value, dimension)
            return SessionState(state.cube, store, state.revision + 1)

        state = session.mutate(apply)
        return {
            "scenario": _scenario_view(state.cube.schema, state.store.scenario(value)),
            "revision": state.revision,
        }

    @app.delete("/api/scenarios/{value}")
    async def delete_scenario(value: str):
        def apply(state: SessionState) -> SessionState:
            if state.cube is None:
                raise NoCubeError("no cube loaded; PUT /api/cube first")
            store = state.store.clone()
            store.delete_scenario(value)
            return SessionState(state.cube, store, state.revision + 1)

        state = session.mutate(apply)
        return {"deleted": value, "revision": state.revision}

    @app.post("/api/scenarios/{value}/queries")
    async def associate(value: str, body: dict):
        factors = _parse_factors(body.get("factors"))
        stored_entries: list = []

        def apply(state: SessionState) -> SessionState:
            if state.cube is None:
                raise NoCubeError("no cube loaded; PUT /api/cube first")
            store = state.store.clone()
            q = query_from_json(body.get("query") or {}, state.cube.schema)
            stored_entries.extend(store.associate_query(value, q, factors))
            return SessionState(state.cube, store, state.revision + 1)

        state = session.mutate(apply)
        schema = state.cube.schema
        return {
            "stored": [
                {
                    "key": query_to_json(key),
                    "values": [
                        {
                            "query": query_to_json(fq.query),
                            "factors": {
                                m: f for m, f in zip(schema.measures, fq.factors)
                            },
                        }
                        for fq in values
                    ],
                }
                for key, values in stored_entries
            ],
            "scenario": _scenario_view(schema, state.store.scenario(value)),
            "revision": state.revision,
        }

    @app.patch("/api/scenarios/{value}/queries")
    async def patch_factors(value: str, body: dict):
        factors = _parse_factors(body.get("factors"))
        value_index = body.get("valueIndex", 0)
        if not isinstance(value_index, int) or isinstance(value_index, bool):
            raise BadQueryError("valueIndex must be an integer")

        def apply(state: SessionState) -> SessionState:
            if state.cube is None:
                raise NoCubeError("no cube loaded; PUT /api/cube first")
            store = state.store.clone()
            key = query_from_json(body.get("key") or {}, state.cube.schema)
            store.update_factors(value, key, value_index, factors)
            return SessionState(state.cube, store, state.revision + 1)

        state = session.mutate(apply)
        return {
            "scenario": _scenario_view(state.cube.schema, state.store.scenario(value)),
            "revision": state.revision,
        }

    @app.delete("/api/scenarios/{value}/queries")
    async def delete_entry(value: str, body: dict):
        def apply(state: SessionState) -> SessionState:
            if state.cube is None:
                raise NoCubeError("no cube loaded; PUT /api/cube first")
            store = state.store.clone()
            key = query_from_json(body.get("key") or {}, state.cube.schema)
            store.remove_entry(value, key)
            return SessionState(state.cube, store, state.revision + 1)

        state = session.mutate(apply)
        return {
            "scenario": _scenario_view(state.cube.schema, state.store.scenario(value)),
            "revision": state.revision,
        }

    # -- evaluation ---------------------------------------------------------

    @app.post("/api/evaluate")
    async def post_evaluate(body: dict):
        state = session.loaded()
        q = query_from_json(body.get("query") or {}, state.cube.schema)
        specs = _parse_specs(body.get("specs"))
        result = evaluate(state.cube, state.store, q, specs)
        return {
            "results": list(result.values),
            "rowCount": result.row_count,
            "revision": state.revision,
        }

    @app.post("/api/materialize")
    async def post_materialize(body: dict):
        state = session.loaded()
        q = query_from_json(body.get("query") or {}, state.cube.schema)
        limit = body.get("limit")
        if limit is not None and (not isinstance(limit, int) or limit < 0):
            raise BadQueryError("limit must be a non-negative integer")
        rows = materialize(state.cube, state.store, q)
        shown = rows if limit is None else rows[:limit]
        return {
            "rows": [_row_view(state.cube.schema, r) for r in shown],
            "total": len(rows),
            "revision": state.revision,
        }

    @app.post("/api/compare")
    async def post_compare(body: dict):
        state = session.loaded()
        schema = state.cube.schema
        q1 = query_from_json(body.get("query1") or {}, schema)
        q2 = query_from_json(body.get("query2") or {}, schema)
        specs = _parse_specs([body.get("spec") or ""])
        result = compare(state.cube, state.store, q1, q2, specs[0])
        return {
            "value1": result.value1,
            "value2": result.value2,
            "difference": result.difference,
            "ratio": result.ratio,
            "revision": state.revision,
        }

    # -- store save / load --------------------------------------------------

    @app.get("/api/store")
    async def get_store():
        state = session.loaded()
        return {"store": store_to_document(state.store), "revision": state.revision}

    @app.put("/api/store")
    async def put_store(body: dict):
        def apply(state: SessionState) -> SessionState:
            if state.cube is None:
                raise NoCubeError("no cube loaded; PUT /api/cube first")
            doc = body.get("store")
            if doc is None:
                raise MalformedDocumentError("body needs a store document")
            store = store_from_document(doc, state.cube)
            return SessionState(state.cube, store, state.revision + 1)

        state = session.mutate(apply)
        return {"revision": state.revision}

    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="whatif-cube-service",
        description="Serve the what-if cube API (and optionally the web UI).",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument(
        "--static",
        default=None,
        help="directory of built UI assets to serve at /",
    )
    args = parser.parse_args(argv)

    app = create_app()
    if args.static:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=args.static, html=True), name="ui")

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
