"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import json
import random

from torusindex.cli import main
from torusindex.cubical import Grid
from torusindex.dynamics import build_index_pair, enclose_graph
from torusindex.fixtures import FIXTURES, parse_seed
from torusindex.fpgroup import (
    Presentation, fingerprint, low_index_subgroups, pi1_reduced_torus, pi1_unreduced_torus,
    todd_coxeter,
)
from torusindex.homalg import determinant, matmul, smith_normal_form
from torusindex.interval import parse_map
from torusindex.pipeline import compare_reports, torus_for_fixture
from torusindex.shifteq import shift_equivalent
from torusindex.torus import (
    algebraic_mapping_torus, check_fiber_acyclicity, graph_torus, homology_through, index_map_torus,
)

from conftest import random_chain_map, random_cubical_complex
from test_torus import _les_check


def run_criterion(capsys, number, compute):
    """Run ``compute() -> (ok, detail)`` and print one PASS/FAIL line."""
    try:
        ok, detail = compute()
    except Exception as exc:           # any crash is a failed criterion
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {number} failed: {detail}"


def cli_json(capsys, *argv):
    code = main([*argv, "--json"])
    out, err = capsys.readouterr()
    assert code == 0, err
    return json.loads(out)


def groups(items):
    return [(d["betti"], tuple(d["torsion"])) for d in items]


def test_criterion_1_gap_output(capsys):
    def compute():
        rep = cli_json(capsys, "pi1", "--example", "degree2", "--max-index", "3")
        expected = [[0], [0, 3], [0, 7], [0]]
        pairs = sorted(zip(rep["indices"], map(tuple, rep["abelian_invariants"])))
        ok = rep["indices"] == [1, 2, 3, 3] and pairs == sorted(zip([1, 2, 3, 3], map(tuple, expected)))
        return ok, f"indices {rep['indices']}, invariants {rep['abelian_invariants']}"
    run_criterion(capsys, 1, compute)


def test_criterion_2_commutator(capsys):
    def compute():
        rep = cli_json(capsys, "pi1", "--example", "commutator", "--max-index", "5")
        found = any(s["index"] == 5 and s["abelian_invariants"] == [0, 3, 8] for s in rep["subgroups"])
        cmp = compare_reports(torus_for_fixture(FIXTURES["commutator"]), torus_for_fixture(FIXTURES["trivial"]))
        ok = found and cmp["verdict"] == "not distinguished"
        return ok, f"index-5 Z x Z/3 x Z/8 found: {found}; homology comparison: {cmp['verdict']}"
    run_criterion(capsys, 2, compute)


def test_criterion_3_horseshoe_u(capsys):
    def compute():
        fx = FIXTURES["horseshoe-u"]
        fp = fingerprint(pi1_unreduced_torus(2, fx.words(), fx.circles), 3)
        # oracle: Z has exactly one subgroup of each index d, again isomorphic to Z
        ok = (fp.abelianization == (0,) and fp.indices == (1, 2, 3) and fp.invariants == ((0,),) * 3
              and fp == fingerprint(Presentation(("z",), ()), 3))
        return ok, f"abelianization {list(fp.abelianization)}, indices {list(fp.indices)}"
    run_criterion(capsys, 3, compute)


def test_criterion_4_horseshoe_g(capsys):
    def compute():
        hg, d2 = FIXTURES["horseshoe-g"], FIXTURES["degree2"]
        a = fingerprint(pi1_unreduced_torus(2, hg.words(), hg.circles), 3)
        b = fingerprint(pi1_unreduced_torus(1, d2.words(), d2.circles), 3)
        order = todd_coxeter(pi1_reduced_torus(2, hg.words(), hg.circles)).index
        return a == b and order == 1, f"fingerprints equal: {a == b}; reduced group order {order}"
    run_criterion(capsys, 4, compute)


def test_criterion_5_torus_homology(capsys):
    def compute():
        expected = {
            "trivial": [(1, ()), (1, ())],
            "f1": [(1, ()), (2, ()), (1, ())],
            "g-minus2x": [(1, ()), (1, (2,)), (0, ())],
            "degree2": [(1, ()), (1, ()), (0, ())],
        }
        got = {name: groups(torus_for_fixture(FIXTURES[name])["homology"]) for name in expected}
        return got == expected, "; ".join(f"{k} {v}" for k, v in got.items())
    run_criterion(capsys, 5, compute)


def test_criterion_6_shift_equivalence(capsys):
    def compute():
        rng = random.Random(6)
        samples = [[[0, -1], [-1, 0]], [[2, 1], [1, 1]]]
        while len(samples) < 20:
            B = [[rng.randint(-5, 5) for _ in range(2)] for _ in range(2)]
            if determinant(B):
                samples.append(B)
        f2 = torus_for_fixture(FIXTURES["f2"])["index_map"]["1"]
        ok = all(not shift_equivalent([[1]], B) for B in samples) and not shift_equivalent([[1]], f2)
        return ok, f"identity on Q vs {len(samples)} invertible 2x2 matrices and the f2 index map {f2}"
    run_criterion(capsys, 6, compute)


def test_criterion_7_pipeline_equivalence(capsys):
    def compute():
        fx = FIXTURES["f1"]
        F = enclose_graph(parse_map(fx.expr), Grid.parse(fx.grid))
        pair = build_index_pair(F, parse_seed(fx.seed, F.grid))
        acyclic = check_fiber_acyclicity(F, pair).ok
        same = True
        for reduced in (False, True):
            a = index_map_torus(F, pair, reduced=reduced).homology()
            b = graph_torus(F, pair, reduced=reduced).homology()
            n = max(len(a), len(b)) - 1
            same &= homology_through(a, n) == homology_through(b, n)
        return acyclic and same, f"fiber acyclic: {acyclic}; cone(p - q) = cone(id - f) in all degrees: {same}"
    run_criterion(capsys, 7, compute)


def test_criterion_8_property_suites(capsys, rng):
    def compute():
        failed = []
        # (a) LES rank identity
        try:
            for _ in range(20):
                C = random_cubical_complex(rng)
                _les_check(C, random_chain_map(rng, C, C))
        except AssertionError:
            failed.append("a")
        # (b) commutativity
        for _ in range(20):
            C, D = random_cubical_complex(rng), random_cubical_complex(rng)
            phi, psi = random_chain_map(rng, C, D), random_chain_map(rng, D, C)
            a = algebraic_mapping_torus(C, psi @ phi).homology()
            b = algebraic_mapping_torus(D, phi @ psi).homology()
            n = max(len(a), len(b)) - 1
            if homology_through(a, n) != homology_through(b, n):
                failed.append("b")
                break
        # (c) index-pair independence
        F = enclose_graph(parse_map("(mul 2 (var 0))"), Grid.parse("-2 2 16"))
        p1 = build_index_pair(F, F.grid.cells())
        p2 = build_index_pair(F, parse_seed("-3/2 3/2", F.grid))
        if p1 == p2 or index_map_torus(F, p1).homology() != index_map_torus(F, p2).homology():
            failed.append("c")
        # (d) structural invariants of Smith forms and coset tables
        for _ in range(50):
            m, n = rng.randint(1, 5), rng.randint(1, 5)
            A = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(m)]
            snf = smith_normal_form(A)
            nz = [x for x in snf.diagonal if x]
            if (matmul(matmul(snf.U, A), snf.V) != snf.D or abs(determinant(snf.U)) != 1
                    or abs(determinant(snf.V)) != 1 or any(b % a for a, b in zip(nz, nz[1:]))):
                failed.append("d")
                break
        for fx in (FIXTURES["degree2"], FIXTURES["commutator"]):
            P = pi1_unreduced_torus(len(fx.circles), fx.words(), fx.circles)
            for r in low_index_subgroups(P, 4):
                r.table.check(P.relators, r.generators)
        detail = "LES ranks (20 maps), commutativity (20 pairs), pair independence, SNF and coset tables"
        return not failed, detail + (f"; failing parts: {failed}" if failed else "")
    run_criterion(capsys, 8, compute)
