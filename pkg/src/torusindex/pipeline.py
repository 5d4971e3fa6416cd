"""End-to-end runs producing JSON-ready reports.

Reports contain only deterministic data (sorted cells, fixed key order), so
repeated runs on the same input give byte-identical output.
"""
from __future__ import annotations

from fractions import Fraction

from .cubical import BASEPOINT, Grid
from .dynamics import (
    IndexPair, MultivaluedMap, build_index_pair, carrier_chain_map, drop_basepoint,
    enclose_graph, verify_index_pair,
)
from .fixtures import Fixture, parse_seed
from .fpgroup import (
    Presentation, Word, abelianization, low_index_subgroups, pi1_reduced_torus,
    pi1_unreduced_torus, todd_coxeter,
)
from .homalg import HomologyGroup, induced_map_on_homology
from .interval import parse_map
from .shifteq import compare_homological_indices
from .torus import (
    algebraic_mapping_torus, check_fiber_acyclicity, graph_torus, homology_through,
    index_map_torus, wedge_map,
)


class ReportError(ValueError):
    """Reports of different kinds or with missing fields."""


def _groups_json(groups) -> list[dict]:
    return [g.to_json(n) for n, g in enumerate(groups)]


def _groups_from_json(items) -> list[HomologyGroup]:
    return [HomologyGroup(d["betti"], tuple(d["torsion"])) for d in sorted(items, key=lambda d: d["degree"])]


def _matrix_json(M) -> list[list]:
    out = []
    for row in M:
        out.append([int(x) if Fraction(x).denominator == 1 else str(Fraction(x)) for x in row])
    return out


# --------------------------------------------------------------------------
# enclosure and index pair


def enclosure(expr: str, grid: str, workers: int = 1) -> MultivaluedMap:
    return enclose_graph(parse_map(expr), Grid.parse(grid), workers=workers)


def enclosure_stats(F: MultivaluedMap) -> dict:
    sizes = F.fiber_sizes()
    hist: dict[int, int] = {}
    for s in sizes.values():
        hist[s] = hist.get(s, 0) + 1
    return {
        "grid": F.grid.format(),
        "cells": len(sizes),
        "min_fiber": min(sizes.values(), default=0),
        "max_fiber": max(sizes.values(), default=0),
        "fiber_histogram": {str(k): hist[k] for k in sorted(hist)},
        "escapes": [list(c) for c in sorted(F.escapes)],
    }


def index_pair_for(F: MultivaluedMap, seed: str | None) -> IndexPair:
    return build_index_pair(F, parse_seed(seed, F.grid))


def pair_json(pair: IndexPair) -> dict:
    return {
        "N_cells": len(pair.N),
        "L_cells": len(pair.L),
        "N": [list(c) for c in sorted(pair.N)],
        "L": [list(c) for c in sorted(pair.L)],
    }


def index_report(F: MultivaluedMap, seed: str | None, echo: dict) -> dict:
    pair = index_pair_for(F, seed)
    verdict = verify_index_pair(F, pair)
    return {
        "command": "index",
        "input": echo,
        "pair": pair_json(pair),
        "verified": verdict.ok,
        "relative_homology": _groups_json(homology_through(pair.relative_homology(), F.grid.dim)),
    }


# --------------------------------------------------------------------------
# tori


def _index_maps(phi_rel, top: int) -> dict:
    out = {}
    for n in range(top + 1):
        free, _ = induced_map_on_homology(phi_rel, n)
        out[str(n)] = _matrix_json(free)
    return out


def torus_from_enclosure(F: MultivaluedMap, seed: str | None, mode: str, echo: dict) -> dict:
    pair = index_pair_for(F, seed)
    dim_x = F.grid.dim if pair.N - pair.L else 0
    report = {"command": "torus", "input": echo, "mode": mode, "pair": {
        "N_cells": len(pair.N), "L_cells": len(pair.L)}}
    warnings = []
    phi = carrier_chain_map(F, pair, pointed=False)
    if mode == "self-map":
        full = index_map_torus(F, pair)
        red = index_map_torus(F, pair, reduced=True)
    elif mode == "pq":
        verdict = check_fiber_acyclicity(F, pair)
        report["fiber_acyclic"] = verdict.ok
        if not verdict.ok:
            bad = [repr(c) if c is BASEPOINT else list(c) for c in verdict.violations["fiber"]]
            report["acyclicity_failures"] = bad
            warnings.append("fiber acyclicity fails; Tor(p,q) need not match the index torus")
        full = graph_torus(F, pair)
        red = graph_torus(F, pair, reduced=True)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    report["homology"] = _groups_json(homology_through(full.homology(), dim_x + 1))
    report["reduced_homology"] = _groups_json(homology_through(red.homology(), dim_x + 1))
    report["index_map"] = _index_maps(phi, dim_x)
    report["warnings"] = warnings
    return report


def torus_from_words(n: int, images: list[Word], echo: dict) -> dict:
    phi = wedge_map(n, images)
    full = algebraic_mapping_torus(phi.source, phi)
    rel = drop_basepoint(phi)
    red = algebraic_mapping_torus(rel.source, rel)
    dim_x = 1 if n else 0
    return {
        "command": "torus",
        "input": echo,
        "mode": "self-map",
        "homology": _groups_json(homology_through(full.homology(), dim_x + 1)),
        "reduced_homology": _groups_json(homology_through(red.homology(), dim_x + 1)),
        "index_map": _index_maps(rel, dim_x),
        "warnings": [],
    }


def torus_for_fixture(fx: Fixture, mode: str = "self-map") -> dict:
    echo = {"example": fx.name}
    if fx.has_map:
        return torus_from_enclosure(enclosure(fx.expr, fx.grid), fx.seed, mode, echo)
    if mode != "self-map":
        raise ValueError(f"example {fx.name!r} has no enclosure; only --mode self-map applies")
    return torus_from_words(len(fx.circles), fx.words(), echo)


# --------------------------------------------------------------------------
# groups


def presentation_for(circles, images, reduced: bool) -> Presentation:
    n = len(circles)
    if reduced:
        return pi1_reduced_torus(n, images, circles)
    return pi1_unreduced_torus(n, images, circles, loop="z" if "z" not in circles else "t")


def pi1_report(P: Presentation, max_index: int, echo: dict, coset_cap: int = 10**6,
               node_cap: int = 10**6, order: bool = False) -> dict:
    """Raises CosetLimitError / SearchLimitError when inconclusive."""
    recs = low_index_subgroups(P, max_index, node_cap=node_cap)
    report = {
        "command": "pi1",
        "input": echo,
        "presentation": P.format(),
        "abelianization": abelianization(P).gap_invariants(),
        "max_index": max_index,
        "indices": [r.index for r in recs],
        "abelian_invariants": [r.gap_invariants() for r in recs],
        "subgroups": [
            {"index": r.index, "abelian_invariants": r.gap_invariants(),
             "generators": [w.format(P.generators) for w in r.generators]}
            for r in recs
        ],
    }
    if order:
        report["order"] = todd_coxeter(P, [], coset_cap).index
    return report


# --------------------------------------------------------------------------
# comparison


def _pad(groups, n):
    return groups + [HomologyGroup()] * (n - len(groups))


def compare_reports(a: dict, b: dict) -> dict:
    """Compare two torus reports or two pi1 reports.

    The invariants are sound but incomplete, so the verdict is either
    "distinguishable" or "not distinguished" (at the compared depth).
    """
    kind = a.get("command")
    if kind != b.get("command") or kind not in ("torus", "pi1"):
        raise ReportError(f"cannot compare a {a.get('command')!r} report with a {b.get('command')!r} report")
    checks = []
    try:
        if kind == "torus":
            for key in ("homology", "reduced_homology"):
                ga, gb = _groups_from_json(a[key]), _groups_from_json(b[key])
                n = max(len(ga), len(gb))
                checks.append({"invariant": key, "equal": _pad(ga, n) == _pad(gb, n)})
            if "index_map" in a and "index_map" in b:
                ma = {int(k): v for k, v in a["index_map"].items()}
                mb = {int(k): v for k, v in b["index_map"].items()}
                ok, per = compare_homological_indices(ma, mb)
                checks.append({"invariant": "homological_index_shift_equivalence", "equal": ok,
                               "degrees": [v.to_json() for v in per]})
            depth = "homology"
        else:
            d = min(a["max_index"], b["max_index"])
            checks.append({"invariant": "abelianization", "equal": a["abelianization"] == b["abelianization"]})
            fa = [(i, inv) for i, inv in zip(a["indices"], a["abelian_invariants"]) if i <= d]
            fb = [(i, inv) for i, inv in zip(b["indices"], b["abelian_invariants"]) if i <= d]
            checks.append({"invariant": f"low_index_subgroups_upto_{d}", "equal": fa == fb})
            depth = f"index {d}"
    except (KeyError, TypeError) as exc:
        raise ReportError(f"malformed report: missing {exc}") from None
    same = all(c["equal"] for c in checks)
    return {
        "command": "compare",
        "kind": kind,
        "verdict": "not distinguished" if same else "distinguishable",
        "detail": f"not distinguished at depth {depth}" if same else
                  "differs in " + ", ".join(c["invariant"] for c in checks if not c["equal"]),
        "checks": checks,
    }
