"""Command-line interface.

Exit codes: 0 success, 1 other failure, 2 parse or usage error,
3 inconclusive enumeration, 4 isolation failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import pipeline
from .cubical import CarrierError, GridError
from .dynamics import IsolationError, format_multivalued_map, parse_multivalued_map
from .fixtures import FIXTURES, get_fixture
from .fpgroup import CosetLimitError, SearchLimitError, WordError, parse_images, parse_presentation
from .interval import ExpressionError
from .shifteq import compare_homological_indices, parse_graded_json

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_INCONCLUSIVE, EXIT_ISOLATION = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def _emit(args, report: dict, text_lines: list[str]) -> None:
    if getattr(args, "timing", False):
        report["timing_seconds"] = round(time.perf_counter() - args._t0, 3)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print("\n".join(text_lines))


def _fmt_groups(items) -> str:
    parts = []
    for d in items:
        g = [("Z" if d["betti"] == 1 else f"Z^{d['betti']}")] if d["betti"] else []
        g += [f"Z/{t}" for t in d["torsion"]]
        parts.append(f"  H{d['degree']} = {' + '.join(g) or '0'}")
    return "\n".join(parts)


# --------------------------------------------------------------------------
# enclosure input shared by enclose / index / torus


def _enclosure_from_args(args):
    if getattr(args, "example", None):
        fx = get_fixture(args.example)
        if not fx.has_map:
            raise UsageError(f"example {fx.name!r} has no interval map")
        return pipeline.enclosure(fx.expr, fx.grid), fx.seed, {"example": fx.name}
    if getattr(args, "enclosure", None):
        F = parse_multivalued_map(_read(args.enclosure))
        return F, args.seed, {"enclosure": args.enclosure, "seed": args.seed}
    if args.expr and args.grid:
        F = pipeline.enclosure(args.expr, args.grid, workers=getattr(args, "workers", 1))
        return F, args.seed, {"expr": args.expr, "grid": args.grid, "seed": args.seed}
    raise UsageError("give --example, --enclosure, or both --expr and --grid")


def cmd_enclose(args) -> int:
    if not (args.expr and args.grid):
        raise UsageError("enclose needs --expr and --grid")
    F = pipeline.enclosure(args.expr, args.grid, workers=args.workers)
    if args.output:
        Path(args.output).write_text(format_multivalued_map(F))
    stats = {"command": "enclose", "input": {"expr": args.expr, "grid": args.grid},
             **pipeline.enclosure_stats(F)}
    if args.output:
        stats["output"] = args.output
    lines = [
        f"grid: {args.grid}  cells: {stats['cells']}",
        f"fiber size: min {stats['min_fiber']}, max {stats['max_fiber']}",
        "fiber histogram: " + ", ".join(f"{k}:{v}" for k, v in stats["fiber_histogram"].items()),
        f"escaping cells: {len(stats['escapes'])}"
        + (" " + " ".join(str(tuple(c)) for c in stats["escapes"]) if stats["escapes"] else ""),
    ]
    if args.print_map:
        lines.append(format_multivalued_map(F).rstrip())
    _emit(args, stats, lines)
    return EXIT_OK


def cmd_index(args) -> int:
    F, seed, echo = _enclosure_from_args(args)
    rep = pipeline.index_report(F, seed, echo)
    lines = [
        f"N: {rep['pair']['N_cells']} cells, L: {rep['pair']['L_cells']} cells, "
        f"verified: {'yes' if rep['verified'] else 'no'}",
        "relative homology H(N, L):",
        _fmt_groups(rep["relative_homology"]),
    ]
    _emit(args, rep, lines)
    return EXIT_OK


def cmd_torus(args) -> int:
    if args.example:
        fx = get_fixture(args.example)
        rep = pipeline.torus_for_fixture(fx, args.mode)
    elif args.images:
        if args.mode != "self-map":
            raise UsageError("--images supports only --mode self-map")
        names, words = parse_images(_read(args.images))
        rep = pipeline.torus_from_words(len(names), words, {"images": args.images})
    else:
        F, seed, echo = _enclosure_from_args(args)
        rep = pipeline.torus_from_enclosure(F, seed, args.mode, echo)
    lines = [f"mode: {rep['mode']}", "mapping torus:", _fmt_groups(rep["homology"]),
             "reduced mapping torus:", _fmt_groups(rep["reduced_homology"])]
    for n, M in rep["index_map"].items():
        if M:
            lines.append(f"index map on H{n}: {M}")
    if "fiber_acyclic" in rep:
        lines.append(f"fiber acyclicity: {'pass' if rep['fiber_acyclic'] else 'FAIL'}")
    for w in rep["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    _emit(args, rep, lines)
    return EXIT_OK


def cmd_pi1(args) -> int:
    if args.presentation:
        P = parse_presentation(_read(args.presentation))
        echo = {"presentation": args.presentation}
    else:
        if args.example:
            fx = get_fixture(args.example)
            names, words = fx.circles, fx.words()
            echo = {"example": fx.name, "reduced": args.reduced}
        elif args.images:
            names, words = parse_images(_read(args.images))
            echo = {"images": args.images, "reduced": args.reduced}
        else:
            raise UsageError("give --example, --images or --presentation")
        P = pipeline.presentation_for(names, words, args.reduced)
    rep = pipeline.pi1_report(P, args.max_index, echo, coset_cap=args.coset_cap,
                              node_cap=args.node_cap, order=args.order)
    lines = [f"presentation: {P}",
             f"abelianization: {rep['abelianization']}",
             f"subgroup indices (index <= {args.max_index}): {rep['indices']}",
             f"abelian invariants: {rep['abelian_invariants']}"]
    if "order" in rep:
        lines.append(f"order: {rep['order']}")
    _emit(args, rep, lines)
    return EXIT_OK


def cmd_shift_eq(args) -> int:
    a = parse_graded_json(_read(args.a) if not args.a.lstrip().startswith(("[", "{")) else args.a)
    b = parse_graded_json(_read(args.b) if not args.b.lstrip().startswith(("[", "{")) else args.b)
    ok, per = compare_homological_indices(a, b)
    rep = {"command": "shift-eq", "field": "Q", "shift_equivalent": ok,
           "degrees": [v.to_json() for v in per]}
    lines = [f"degree {v.degree}: {'shift equivalent' if v.equivalent else 'not shift equivalent'}"
             f"  [{', '.join(v.invariants_a) or '-'}] vs [{', '.join(v.invariants_b) or '-'}]"
             for v in per]
    lines.append("overall: " + ("shift equivalent over Q" if ok else "not shift equivalent over Q"))
    _emit(args, rep, lines)
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        a, b = json.loads(_read(args.report_a)), json.loads(_read(args.report_b))
    except json.JSONDecodeError as exc:
        raise UsageError(f"report is not JSON: {exc}") from None
    try:
        rep = pipeline.compare_reports(a, b)
    except pipeline.ReportError as exc:
        raise UsageError(str(exc)) from None
    same = rep["verdict"] == "not distinguished"
    lines = [rep["detail"] if same else f"distinguishable: {rep['detail']}"]
    lines += [f"  {c['invariant']}: {'same' if c['equal'] else 'different'}" for c in rep["checks"]]
    _emit(args, rep, lines)
    return EXIT_OK


def cmd_example(args) -> int:
    if args.action == "list":
        rep = {"examples": [{"name": f.name, "description": f.description,
                             "kind": "interval map" if f.has_map else "wedge of circles"}
                            for f in FIXTURES.values()]}
        lines = [f"{f.name:12s} {f.description}" for f in FIXTURES.values()]
    else:
        if not args.name:
            raise UsageError("example show needs a name")
        fx = get_fixture(args.name)
        rep = {"name": fx.name, "description": fx.description, "expr": fx.expr, "grid": fx.grid,
               "seed": fx.seed, "images": fx.images_text()}
        lines = [f"{k}: {v}" for k, v in rep.items() if v and k != "images"]
        if fx.images:
            lines.append("images:\n" + fx.images_text().rstrip())
    _emit(args, rep, lines)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--timing", action="store_true", help="add wall-clock time to the report")

    src = argparse.ArgumentParser(add_help=False)
    src.add_argument("--example", help="named example (see 'example list')")
    src.add_argument("--expr", help="map as a prefix s-expression, e.g. '(mul 2 (var 0))'")
    src.add_argument("--grid", help="grid spec 'lo hi n; lo hi n'")
    src.add_argument("--enclosure", help="multivalued map file written by 'enclose -o'")
    src.add_argument("--seed", help="seed boxes 'lo hi, lo hi | ...' (default: whole grid)")

    p = argparse.ArgumentParser(prog="torusindex", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("enclose", parents=[common], help="cubical enclosure of a map")
    e.add_argument("--expr", required=True)
    e.add_argument("--grid", required=True)
    e.add_argument("-o", "--output", help="write the multivalued map to this file")
    e.add_argument("--print-map", action="store_true", help="also print the map in text mode")
    e.add_argument("--workers", type=int, default=1)
    e.set_defaults(func=cmd_enclose)

    i = sub.add_parser("index", parents=[common, src], help="build and verify an index pair")
    i.set_defaults(func=cmd_index)

    t = sub.add_parser("torus", parents=[common, src], help="mapping-torus homology")
    t.add_argument("--images", help="file of lines 'a -> word' (wedge of circles)")
    t.add_argument("--mode", choices=["self-map", "pq"], default="self-map")
    t.set_defaults(func=cmd_torus)

    g = sub.add_parser("pi1", parents=[common], help="fundamental group of the mapping torus")
    g.add_argument("--example")
    g.add_argument("--images", help="file of lines 'a -> word'")
    g.add_argument("--presentation", help="file with 'gens:' and 'rel:' lines")
    g.add_argument("--reduced", action="store_true", help="collapse the base circle")
    g.add_argument("--max-index", type=int, default=3)
    g.add_argument("--coset-cap", type=int, default=10**6)
    g.add_argument("--node-cap", type=int, default=10**6)
    g.add_argument("--order", action="store_true", help="also enumerate cosets of the trivial subgroup")
    g.set_defaults(func=cmd_pi1)

    s = sub.add_parser("shift-eq", parents=[common], help="shift equivalence over Q")
    s.add_argument("a", help="JSON matrix (or per-degree dict), inline or a file")
    s.add_argument("b")
    s.set_defaults(func=cmd_shift_eq)

    c = sub.add_parser("compare", parents=[common], help="compare two torus or pi1 reports")
    c.add_argument("report_a")
    c.add_argument("report_b")
    c.set_defaults(func=cmd_compare)

    x = sub.add_parser("example", parents=[common], help="built-in examples")
    x.add_argument("action", choices=["list", "show"])
    x.add_argument("name", nargs="?")
    x.set_defaults(func=cmd_example)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_PARSE
    args._t0 = time.perf_counter()
    try:
        return args.func(args)
    except IsolationError as exc:
        print(f"isolation failure: {exc}", file=sys.stderr)
        if exc.cells:
            print("offending cells: " + " ".join(str(c) for c in exc.cells), file=sys.stderr)
        return EXIT_ISOLATION
    except (CosetLimitError, SearchLimitError) as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except CarrierError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, ExpressionError, GridError, WordError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
