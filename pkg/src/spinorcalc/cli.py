"""Command line: run scenarios, certify backends, list equations."""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys

import jsonschema

from .fields import FieldError
from .geometry import GeometryError, make_geometry
from .algebra import Signature
from .operators import (
    OperatorError,
    PreconditionError,
    SingularityError,
    equation_table,
)
from .scenario import (
    ScenarioError,
    bundled_scenarios,
    certification,
    read_document,
    run_scenario,
    validate,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_SCHEMA = 2
EXIT_PRECONDITION = 3
EXIT_SINGULAR = 4


def _emit(obj: dict, out):
    obj = dict(obj, timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    out.write(json.dumps(obj, sort_keys=True, indent=2, default=str) + "\n")


def _error(kind: str, message: str, out, **extra) -> None:
    print(f"error ({kind}): {message}", file=sys.stderr)
    _emit({"error": dict(kind=kind, message=message, **extra)}, out)


def _load(path: str, out):
    try:
        return read_document(path)
    except FileNotFoundError:
        _error("schema", f"no such scenario file: {path}", out)
    except json.JSONDecodeError as exc:
        _error("schema", f"invalid JSON: {exc}", out)
    return None


def cmd_run(args, out) -> int:
    doc = _load(args.file, out)
    if doc is None:
        return EXIT_SCHEMA
    try:
        report = run_scenario(doc, points=args.points, seed=args.seed,
                              tolerance_scale=args.tolerance_scale)
    except jsonschema.ValidationError as exc:
        _error("schema", exc.message, out, path=list(exc.absolute_path))
        return EXIT_SCHEMA
    except PreconditionError as exc:
        _error("precondition", str(exc), out, equation=exc.equation)
        return EXIT_PRECONDITION
    except SingularityError as exc:
        _error("singularity", str(exc), out)
        return EXIT_SINGULAR
    except (ScenarioError, OperatorError, FieldError, GeometryError) as exc:
        _error("schema", str(exc), out)
        return EXIT_SCHEMA
    _emit(report, out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_certify(args, out) -> int:
    doc = _load(args.file, out)
    if doc is None:
        return EXIT_SCHEMA
    try:
        validate({k: doc[k] for k in ("signature", "geometry", "points") if k in doc}, "geometry")
        g = make_geometry(Signature(tuple(doc["signature"])), doc["geometry"])
    except jsonschema.ValidationError as exc:
        _error("schema", exc.message, out, path=list(exc.absolute_path))
        return EXIT_SCHEMA
    except GeometryError as exc:
        _error("schema", str(exc), out)
        return EXIT_SCHEMA
    pts = doc.get("points", {})
    count = args.points or pts.get("count", 100)
    seed = args.seed if args.seed is not None else pts.get("seed", 0)
    rep = certification(g, count, seed)
    rep["seed"] = seed
    _emit(rep, out)
    return EXIT_OK if rep["status"] == "pass" else EXIT_FAIL


def cmd_list(args, out) -> int:
    rows = equation_table()
    if args.json:
        out.write(json.dumps(rows, indent=2, ensure_ascii=False) + "\n")
        return EXIT_OK
    width = max(len(r["id"]) for r in rows)
    for r in rows:
        out.write(f"{r['id']:<{width}}  {r['subject']:<8}  {r['equation']}\n")
    return EXIT_OK


def cmd_scenarios(args, out) -> int:
    for name, path in sorted(bundled_scenarios().items()):
        out.write(f"{name}  {path}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinorcalc",
                                 description="Check spinor and form identities numerically.")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file (or bundled scenario name)")
    r.add_argument("file")
    r.add_argument("--points", type=int, default=None)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--tolerance-scale", type=float, default=1.0)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("certify", help="certify the curvature of a geometry backend")
    c.add_argument("file")
    c.add_argument("--points", type=int, default=None)
    c.add_argument("--seed", type=int, default=None)
    c.set_defaults(func=cmd_certify)

    le = sub.add_parser("list-equations", help="print the equation ids")
    le.add_argument("--json", action="store_true")
    le.set_defaults(func=cmd_list)

    ls = sub.add_parser("scenarios", help="list bundled scenarios")
    ls.set_defaults(func=cmd_scenarios)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if getattr(args, "points", None) is not None and args.points < 1:
        _error("schema", "--points must be positive", out)
        return EXIT_SCHEMA
    return args.func(args, out)


def main_entry():  # pragma: no cover
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
