import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from sympy import Matrix, QQ, ZZ, symbols
from sympy.matrices.normalforms import invariant_factors, smith_normal_form as sympy_snf

from torusindex.cubical import ChainComplex, ChainMap, CubicalSet, Grid, chain_complex, relative_chain_complex
from torusindex.homalg import (
    BoundaryError, HomologyGroup, check_boundary, determinant, homology, homology_basis,
    induced_map_on_homology, matmul, normalize_diagonal, rational_canonical_form, smith_diagonal,
    smith_normal_form,
)

from conftest import random_cubical_complex

X = symbols("x")


def assert_smith(A, snf):
    m = len(A)
    n = len(A[0]) if m else 0
    assert matmul(matmul(snf.U, A), snf.V) == snf.D
    assert abs(determinant(snf.U)) == 1
    assert abs(determinant(snf.V)) == 1
    assert matmul(snf.U, snf.Uinv) == [[int(i == j) for j in range(m)] for i in range(m)]
    assert matmul(snf.V, snf.Vinv) == [[int(i == j) for j in range(n)] for i in range(n)]
    d = snf.diagonal
    for i in range(m):
        for j in range(n):
            if i != j:
                assert snf.D[i][j] == 0
    assert all(x >= 0 for x in d)
    nz = [x for x in d if x]
    assert all(nz[i + 1] % nz[i] == 0 for i in range(len(nz) - 1))
    assert d == nz + [0] * (len(d) - len(nz))


def test_snf_examples():
    snf = smith_normal_form([[2]])
    assert snf.diagonal == [2]
    snf = smith_normal_form([[2, 4], [6, 8]])
    assert snf.diagonal == [2, 4]
    assert_smith([[2, 4], [6, 8]], snf)
    Z = [[0, 0, 0], [0, 0, 0]]
    snf = smith_normal_form(Z)
    assert snf.diagonal == [0, 0]
    assert snf.U == [[1, 0], [0, 1]]
    assert snf.V == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_snf_unpacks_as_triple():
    U, D, V = smith_normal_form([[4, 6]])
    assert D == [[2, 0]]


matrices = st.integers(1, 5).flatmap(
    lambda m: st.integers(1, 5).flatmap(
        lambda n: st.lists(st.lists(st.integers(-20, 20), min_size=n, max_size=n), min_size=m, max_size=m)))


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_snf_structure_and_sympy_oracle(A):
    snf = smith_normal_form(A)
    assert_smith(A, snf)
    ref = sympy_snf(Matrix(A), domain=ZZ)
    ref_diag = sorted((abs(int(ref[i, i])) for i in range(min(ref.shape))), key=lambda x: (x == 0, x))
    assert snf.diagonal == ref_diag


@settings(max_examples=100, deadline=None)
@given(matrices)
def test_sparse_diagonal_agrees_with_dense(A):
    cols = [tuple((i, A[i][j]) for i in range(len(A)) if A[i][j]) for j in range(len(A[0]))]
    dense = [x for x in smith_normal_form(A).diagonal if x]
    sparse = [x for x in smith_diagonal(cols, len(A)) if x]
    assert sparse == dense


def test_normalize_diagonal_keeps_rank():
    assert normalize_diagonal([2, 3]) == [1, 6]
    assert normalize_diagonal([4, 6, 5]) == [1, 2, 60]


def test_homology_group_validation_and_gap():
    with pytest.raises(ValueError):
        HomologyGroup(0, (4, 2))
    with pytest.raises(ValueError):
        HomologyGroup(0, (1,))
    g = HomologyGroup.from_diagonal(1, [3, 8])
    assert g == HomologyGroup(1, (24,))
    assert g.gap_invariants() == [0, 3, 8]
    assert str(g) == "Z + Z/24"
    assert g.to_json(1) == {"degree": 1, "betti": 1, "torsion": [24]}


def circle():
    grid = Grid.parse("0 4 4")
    N = CubicalSet.from_cells(grid, grid.cells())
    # glue the two ends: relative complex of [0,4] modulo its endpoints
    ends = CubicalSet(grid, frozenset({(0,), (8,)}))
    return relative_chain_complex(N, ends, basepoint=True)


def test_homology_examples():
    assert [str(h) for h in homology(circle())] == ["Z", "Z"]
    square = chain_complex(CubicalSet.from_cells(Grid.parse("0 2 2; 0 2 2"), [(0, 0), (0, 1), (1, 0), (1, 1)]))
    assert [str(h) for h in square.homology()] == ["Z", "0", "0"]
    annulus_cells = [(i, j) for i in range(3) for j in range(3) if (i, j) != (1, 1)]
    annulus = chain_complex(CubicalSet.from_cells(Grid.parse("0 3 3; 0 3 3"), annulus_cells))
    assert [str(h) for h in annulus.homology()] == ["Z", "Z", "0"]


def test_rp2_like_torsion():
    # one vertex, one edge e, one face with boundary 2e
    C = ChainComplex([["v"], ["e"], ["f"]], [[()], [()], [((0, 2),)]])
    assert [str(h) for h in C.homology()] == ["Z", "Z/2", "0"]


def test_boundary_error():
    C = ChainComplex([["v", "w"], ["e"], ["f"]], [[(), ()], [((0, 1), (1, -1))], [((0, 1),)]])
    with pytest.raises(BoundaryError):
        check_boundary(C)
    with pytest.raises(BoundaryError):
        homology(C)


def _unimodular(rng, n):
    M = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i != j:
            k = rng.randint(-2, 2)
            M[i] = [a + k * b for a, b in zip(M[i], M[j])]
    if n and rng.random() < 0.5:
        M[0] = [-x for x in M[0]]
    return M


def _inverse_int(M):
    snf = smith_normal_form(M)
    # U M V = I  =>  M^-1 = V U
    assert snf.diagonal == [1] * len(M)
    return matmul(snf.V, snf.U)


def test_homology_invariant_under_change_of_basis():
    rng = random.Random(7)
    for _ in range(10):
        C = random_cubical_complex(rng)
        P = [_unimodular(rng, C.size(n)) for n in range(len(C.basis))]
        Pinv = [_inverse_int(M) if M else [] for M in P]
        bds = [[()] * C.size(0)]
        for n in range(1, len(C.basis)):
            D = [[0] * C.size(n) for _ in range(C.size(n - 1))]
            for j, col in enumerate(C.boundary(n)):
                for i, v in col:
                    D[i][j] = v
            D2 = matmul(matmul(P[n - 1], D), Pinv[n])
            bds.append([tuple((i, D2[i][j]) for i in range(len(D2)) if D2[i][j]) for j in range(C.size(n))])
        C2 = ChainComplex(C.basis, bds)
        check_boundary(C2)
        assert homology(C2) == homology(C)


def test_homology_basis_and_induced_identity():
    C = circle()
    basis = homology_basis(C, 1)
    assert len(basis.free_cycles) == 1
    ident = ChainMap.identity(C)
    free, tors = induced_map_on_homology(ident, 1)
    assert free == [[1]] and tors == []
    zero = ChainMap(C, C, [])
    free, _ = induced_map_on_homology(zero, 1)
    assert free == [[0]]


def test_induced_map_rejects_non_chain_map():
    C = circle()
    bad = ChainMap.from_function(C, C, lambda x: [(x, 1)] if C.degree_of(x) == 1 else [])
    with pytest.raises(ValueError):
        induced_map_on_homology(bad, 1)


def _rcf(A):
    return [tuple(p) for p in rational_canonical_form(A)]


def _poly(*coeffs):
    return tuple(Fraction(c) for c in coeffs)


def test_rcf_examples():
    assert _rcf([[1, 0], [0, 1]]) == [_poly(-1, 1), _poly(-1, 1)]
    assert _rcf([[0, 1], [0, 0]]) == [_poly(0, 0, 1)]
    assert _rcf([[0, 1], [1, 0]]) == [_poly(-1, 0, 1)]
    assert _rcf([]) == []


def _sympy_factors(A):
    n = len(A)
    M = Matrix(n, n, lambda i, j: (X if i == j else 0) - A[i][j])
    out = []
    for p in invariant_factors(M, domain=QQ[X]):
        poly = QQ[X].to_sympy(p).as_poly(X)
        if poly.degree() > 0:
            c = poly.monic().all_coeffs()[::-1]
            out.append(tuple(Fraction(int(x.p), int(x.q)) for x in c))
    return out


square_matrices = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=n, max_size=n))


@settings(max_examples=60, deadline=None)
@given(square_matrices)
def test_rcf_matches_sympy_invariant_factors(A):
    assert _rcf(A) == _sympy_factors(A)


def test_rcf_similarity_invariance():
    rng = random.Random(3)
    for _ in range(30):
        n = rng.randint(1, 5)
        A = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        P = _unimodular(rng, n)
        B = matmul(matmul(P, A), _inverse_int(P))
        assert _rcf(A) == _rcf(B)


def test_rcf_distinguishes_scaling():
    assert _rcf([[1, 0], [0, 1]]) != _rcf([[2, 0], [0, 2]])
