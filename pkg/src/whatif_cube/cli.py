"""Command-line front door: load a cube, manage scenarios, evaluate, export.

State lives in files: the cube is a CSV named by --cube (with --dimensions /
--measures), the scenario store is a JSON file named by --store. Scenario
subcommands rewrite the store file; eval and materialize only read.

Exit codes: 0 ok, 2 usage error, 3 domain error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cube import DataCube, Query, STAR, Selection
from .engine import AggregationSpec, evaluate, materialize
from .errors import BadQueryError, WhatIfError
from .persistence import (
    CubeManifest,
    export_rows,
    format_number,
    load_cube,
    load_store,
    save_store,
)
from .scenarios import ScenarioStore

USAGE_EXIT = 2
DOMAIN_EXIT = 3


def parse_query(text: str, schema) -> Query:
    """Parse `Dim=v1,v2;Dim2=*;Dim3=v3`; unlisted dimensions default to STAR."""
    selections: dict[str, Selection] = {}
    pos = 0
    for part in text.split(";"):
        stripped = part.strip()
        if not stripped:
            pos += len(part) + 1
            continue
        name, sep, values = stripped.partition("=")
        name = name.strip()
        if not sep or not name:
            raise BadQueryError(
                f"query position {pos}: expected Dim=values, got {stripped!r}"
            )
        if name not in schema.dim_names:
            raise BadQueryError(
                f"query position {pos}: unknown dimension {name!r}"
            )
        if name in selections:
            raise BadQueryError(
                f"query position {pos}: dimension {name!r} listed twice"
            )
        values = values.strip()
        if values == "*":
            selections[name] = STAR
        else:
            vals = [v.strip() for v in values.split(",")]
            if not values or any(not v for v in vals):
                raise BadQueryError(
                    f"query position {pos}: empty value in selection for {name!r}"
                )
            selections[name] = frozenset(vals)
        pos += len(part) + 1
    sels = tuple(selections.get(d, STAR) for d in schema.dim_names)
    return Query(schema.dim_names, sels)


def format_query(q: Query) -> str:
    """Inverse of parse_query, values sorted for stable output."""
    parts = []
    for d, sel in zip(q.dims, q.selections):
        parts.append(f"{d}=*" if sel is STAR else f"{d}={','.join(sorted(sel))}")
    return ";".join(parts)


def _parse_factor_flags(pairs: list[str]) -> dict[str, float]:
    factors = {}
    for pair in pairs or []:
        name, sep, raw = pair.partition("=")
        if not sep:
            raise BadQueryError(f"factor {pair!r} must look like Measure=number")
        try:
            factors[name.strip()] = float(raw)
        except ValueError:
            raise BadQueryError(f"factor {pair!r}: {raw!r} is not a number") from None
    return factors


def _load_cube_arg(args) -> DataCube:
    manifest = CubeManifest(
        tuple(v.strip() for v in args.dimensions.split(",") if v.strip()),
        tuple(v.strip() for v in args.measures.split(",") if v.strip()),
        source=args.cube,
    )
    return load_cube(Path(args.cube).read_text(), manifest)


def _load_store_arg(args, cube: DataCube) -> ScenarioStore:
    path = getattr(args, "store", None)
    if not path or not Path(path).exists():
        return ScenarioStore(cube.schema)
    return load_store(Path(path).read_text(), cube)


def _write_store(args, store: ScenarioStore) -> None:
    Path(args.store).write_text(save_store(store))


def _print_entries(schema, entries) -> None:
    for key, values in entries:
        print(f"key: {format_query(key)}")
        for fq in values:
            factors = " ".join(
                f"{m}={format_number(f)}" for m, f in zip(schema.measures, fq.factors)
            )
            print(f"  query: {format_query(fq.query)} factors: {factors}")


def _add_cube_flags(p: argparse.ArgumentParser, store_required: bool = False):
    p.add_argument("--cube", required=True, help="cube CSV path")
    p.add_argument("--dimensions", required=True, help="comma-separated dimension columns")
    p.add_argument("--measures", required=True, help="comma-separated measure columns")
    p.add_argument(
        "--store",
        required=store_required,
        default=None,
        help="scenario store JSON path",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="whatif-cube",
        description="What-if analysis over an in-memory data cube.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load", help="parse a cube and print its shape")
    _add_cube_flags(p)

    scenario = sub.add_parser("scenario", help="manage scenarios")
    scen_sub = scenario.add_subparsers(dest="scenario_command", required=True)

    p = scen_sub.add_parser("create", help="register a new scenario value")
    p.add_argument("value")
    p.add_argument("--dimension", required=True)
    _add_cube_flags(p, store_required=True)

    p = scen_sub.add_parser("add-query", help="associate a query with a scenario")
    p.add_argument("target")
    p.add_argument("-q", "--query", required=True)
    p.add_argument(
        "-f",
        "--factor",
        action="append",
        default=[],
        metavar="MEASURE=N",
        help="per-measure factor (default 1)",
    )
    _add_cube_flags(p, store_required=True)

    p = scen_sub.add_parser("rm", help="delete a scenario, or one entry with --key")
    p.add_argument("value")
    p.add_argument("--key", default=None, help="key query text; removes one entry")
    _add_cube_flags(p, store_required=True)

    p = sub.add_parser("eval", help="aggregate over real and scenario rows")
    p.add_argument("-q", "--query", required=True)
    p.add_argument(
        "-a",
        "--aggregate",
        action="append",
        required=True,
        metavar="FN:EXPR",
        help="aggregation, e.g. sum:Volume*Cost (repeatable)",
    )
    _add_cube_flags(p)

    p = sub.add_parser("materialize", help="emit matching rows as CSV")
    p.add_argument("-q", "--query", required=True)
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    _add_cube_flags(p)

    store_cmd = sub.add_parser("store", help="store file utilities")
    store_sub = store_cmd.add_subparsers(dest="store_command", required=True)

    p = store_sub.add_parser("save", help="re-serialize a store deterministically")
    p.add_argument("--out", default=None, help="write here instead of stdout")
    _add_cube_flags(p, store_required=True)

    p = store_sub.add_parser("load", help="validate a store against a cube")
    _add_cube_flags(p, store_required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", default=None, help="UI asset directory")

    return parser


def _run(args) -> int:
    if args.command == "serve":
        from . import service

        argv = ["--host", args.host, "--port", str(args.port)]
        if args.static:
            argv += ["--static", args.static]
        return service.main(argv)

    cube = _load_cube_arg(args)

    if args.command == "load":
        dims = ", ".join(
            f"{d.name}({len(d.values)})" for d in cube.schema.dimensions
        )
        print(f"dimensions: {dims}")
        print(f"measures: {', '.join(cube.schema.measures)}")
        print(f"rows: {len(cube.rows)}")
        return 0

    store = _load_store_arg(args, cube)

    if args.command == "scenario":
        if args.scenario_command == "create":
            store.create_scenario(args.value, args.dimension)
            _write_store(args, store)
            print(f"created {args.value} on {args.dimension}")
        elif args.scenario_command == "add-query":
            q = parse_query(args.query, cube.schema)
            factors = _parse_factor_flags(args.factor)
            stored = store.associate_query(args.target, q, factors)
            _write_store(args, store)
            _print_entries(cube.schema, stored)
        elif args.scenario_command == "rm":
            if args.key is None:
                store.delete_scenario(args.value)
                print(f"deleted {args.value}")
            else:
                key = parse_query(args.key, cube.schema)
                store.remove_entry(args.value, key)
                print(f"removed entry {format_query(key)}")
            _write_store(args, store)
        return 0

    if args.command == "eval":
        q = parse_query(args.query, cube.schema)
        specs = [AggregationSpec.parse(a) for a in args.aggregate]
        result = evaluate(cube, store, q, specs)
        for value in result.values:
            if value is None:
                print("null")
            elif isinstance(value, int):
                print(value)
            else:
                print(format_number(value))
        return 0

    if args.command == "materialize":
        q = parse_query(args.query, cube.schema)
        rows = materialize(cube, store, q)
        text = export_rows(cube.schema, rows)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0

    if args.command == "store":
        if args.store_command == "save":
            text = save_store(store)
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
        elif args.store_command == "load":
            print(f"scenarios: {len(store)}")
            for scn in store.all():
                print(f"  {scn.value} on {scn.dimension}: {len(scn.entries)} entries")
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except WhatIfError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return DOMAIN_EXIT
    except OSError as exc:
        print(f"error [IO]: {exc}", file=sys.stderr)
        return DOMAIN_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
