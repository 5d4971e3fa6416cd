from fractions import Fraction as Q

import pytest

from torusindex.cubical import (
    BASEPOINT, CarrierError, ChainComplex, ChainMap, CubicalSet, Grid, GridError, acyclic_carrier_map,
    box_in_cells, box_meets_only_within, chain_complex, format_cubical_set,
    parse_cubical_set, pointed_complex, relative_chain_complex, solve_integer,
)
from torusindex.interval import Box, Interval


def test_grid_parse_and_geometry():
    g = Grid.parse("grid: -2 2 8")
    assert g.shape == (8,) and g.width(0) == Q(1, 2)
    assert g.cell_box((4,)) == Box([Interval(0, Q(1, 2))])
    assert g.cell_of_point([Q(1, 4)]) == (4,)
    assert Grid.parse(g.format()) == g
    with pytest.raises(GridError):
        Grid.parse("0 1 0")
    with pytest.raises(GridError):
        Grid.parse("1 0 3")


def test_cells_meeting_uses_closed_cells():
    g = Grid.parse("-2 2 8")
    cells, escapes = g.cells_meeting(Box([Interval(0, 1)]))
    assert sorted(cells) == [(3,), (4,), (5,), (6,)]
    assert not escapes
    cells, escapes = g.cells_meeting(Box([Interval(0, 0)]))
    assert sorted(cells) == [(3,), (4,)]
    cells, escapes = g.cells_meeting(Box([Interval(Q(7, 4), 3)]))
    assert sorted(cells) == [(7,)] and escapes


def test_box_predicates():
    g = Grid.parse("-2 2 8")
    N = {(i,) for i in range(8)}
    L = {(0,), (1,), (6,), (7,)}
    assert box_in_cells(g, Box([Interval(-1, 1)]), {(2,), (3,), (4,), (5,)})
    assert not box_in_cells(g, Box([Interval(-1, Q(11, 10))]), {(2,), (3,), (4,), (5,)})
    # [1, 2] meets |N| only inside |L|
    assert box_meets_only_within(g, Box([Interval(1, 3)]), N, L)
    assert not box_meets_only_within(g, Box([Interval(Q(9, 10), 3)]), N, L)


def test_cubical_set_closure_and_io():
    g = Grid.parse("0 2 2; 0 2 2")
    s = CubicalSet.from_cells(g, [(0, 0)])
    assert len(s) == 9
    assert s.top_cells() == frozenset({(0, 0)})
    text = format_cubical_set(s)
    assert parse_cubical_set(text, g) == s
    with pytest.raises(GridError):
        CubicalSet.from_cells(g, [(2, 0)])


def test_boundary_squares_to_zero_on_cube():
    g = Grid.parse("0 1 1; 0 1 1; 0 1 1")
    C = chain_complex(CubicalSet.from_cells(g, [(0, 0, 0)]))
    assert C.sizes == [8, 12, 6, 1]
    assert [str(h) for h in C.homology()] == ["Z", "0", "0", "0"]


def test_relative_and_pointed_models():
    g = Grid.parse("-2 2 8")
    N = CubicalSet.from_cells(g, g.cells())
    L = CubicalSet.from_cells(g, [(0,), (1,), (6,), (7,)])
    rel = relative_chain_complex(N, L)
    assert [str(h) for h in rel.homology()] == ["0", "Z"]
    pt = pointed_complex(N, L)
    assert BASEPOINT in pt.basis[0]
    assert [str(h) for h in pt.homology()] == ["Z", "Z"]
    # empty L: the basepoint is a disjoint point
    empty = CubicalSet(g, frozenset())
    assert [str(h) for h in pointed_complex(N, empty).homology()] == ["Z^2", "0"]
    with pytest.raises(GridError):
        relative_chain_complex(L, N)


def test_chain_map_algebra():
    g = Grid.parse("0 2 2")
    C = chain_complex(CubicalSet.from_cells(g, g.cells()))
    I = ChainMap.identity(C)
    assert (I + I).dense(0) == [[2 * int(i == j) for j in range(3)] for i in range(3)]
    assert (I - I).dense(1) == [[0, 0], [0, 0]]
    assert (I @ I).dense(1) == I.dense(1)
    assert I.is_chain_map()
    bad = ChainMap.from_function(C, C, lambda x: [(x, 1)] if C.degree_of(x) == 0 else [])
    assert not bad.is_chain_map()


def test_solve_integer():
    assert solve_integer([[2, 0], [0, 3]], [4, 9], 2) == [2, 3]
    assert solve_integer([[2]], [3], 1) is None
    assert solve_integer([[1, 1]], [0], 2) is not None


def test_acyclic_carrier_identity_and_failure():
    g = Grid.parse("0 2 2; 0 2 2")
    s = CubicalSet.from_cells(g, g.cells())
    C = chain_complex(s)
    from torusindex.cubical import cube_closure
    phi = acyclic_carrier_map(C, C, lambda q: set(cube_closure(q)))
    assert phi.dense(2) == ChainMap.identity(C).dense(2)
    annulus = CubicalSet.from_cells(Grid.parse("0 3 3; 0 3 3"),
                                    [(i, j) for i in range(3) for j in range(3) if (i, j) != (1, 1)])
    A = chain_complex(annulus)
    with pytest.raises(CarrierError):
        acyclic_carrier_map(A, A, lambda q: set(annulus.cubes))


def test_subcomplex_must_be_closed():
    C = ChainComplex([["v", "w"], ["e"]], [[(), ()], [((0, -1), (1, 1))]])
    with pytest.raises(ValueError):
        C.subcomplex(["e", "v"])
    assert C.subcomplex(["v"]).sizes == [1]
