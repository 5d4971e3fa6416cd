"""Mapping-torus chain complexes.

Both torus models are mapping cones. For ``δ: A -> B`` the cone has
``B_n ⊕ A_{n-1}`` in degree ``n`` and ``∂(b, a) = (∂b + δa, -∂a)``:

* the algebraic torus of a self-map ``f`` of ``C`` is ``cone(id - f)``;
* the torus ``Tor(p, q)`` of a graph cover ``Z`` with projections
  ``p, q: Z -> X`` is ``cone(p - q)``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .cubical import (
    BASEPOINT, CarrierError, ChainComplex, ChainMap, CubicalSet, GridError,
    chain_complex, cube_cells, cube_faces,
)
from .dynamics import IndexPair, MultivaluedMap, Verdict, carrier_chain_map, drop_basepoint
from .homalg import HomologyGroup


@dataclass(frozen=True)
class TorusComplex:
    """A mapping cone together with the data it was built from."""

    complex: ChainComplex
    source: ChainComplex
    target: ChainComplex
    delta: ChainMap
    kind: str = "cone"

    def homology(self) -> list[HomologyGroup]:
        return self.complex.homology()

    def to_json(self) -> list[dict]:
        return [g.to_json(n) for n, g in enumerate(self.homology())]


def mapping_cone(delta: ChainMap, kind: str = "cone") -> TorusComplex:
    A, B = delta.source, delta.target
    top = max(len(B.basis), len(A.basis) + 1)
    basis = []
    for n in range(top):
        cells = [("b", x) for x in (B.basis[n] if n < len(B.basis) else [])]
        if 0 <= n - 1 < len(A.basis):
            cells += [("a", y) for y in A.basis[n - 1]]
        basis.append(cells)

    def boundary(label):
        part, x = label
        if part == "b":
            n = B.degree_of(x)
            return [(("b", z), v) for z, v in B.boundary_of(n, x).items()] if n else []
        n = A.degree_of(x)
        out = [(("b", z), v) for z, v in delta.image(n, x).items()]
        if n:
            out += [(("a", z), -v) for z, v in A.boundary_of(n, x).items()]
        return out

    C = ChainComplex.from_boundary_function(basis, boundary)
    _check_square_zero(C)
    return TorusComplex(C, A, B, delta, kind)


def _check_square_zero(C: ChainComplex) -> None:
    for n in range(2, len(C.basis)):
        d1, d2 = C.boundary(n - 1), C.boundary(n)
        for j, col in enumerate(d2):
            acc: dict[int, int] = {}
            for k, v in col:
                for i, w in d1[k]:
                    acc[i] = acc.get(i, 0) + v * w
            if any(acc.values()):
                raise ValueError(f"cone boundary does not square to zero (degree {n}, cell {j})")


def _same_complex(a: ChainComplex, b: ChainComplex) -> bool:
    return a is b or a.basis == b.basis


def algebraic_mapping_torus(C: ChainComplex, f: ChainMap) -> TorusComplex:
    """``cone(id - f)`` for a chain self-map ``f`` of ``C``."""
    if not (_same_complex(f.source, C) and _same_complex(f.target, C)):
        raise ValueError("f must be an endomorphism of C")
    ident = ChainMap.identity(C)
    return mapping_cone(ident - ChainMap(C, C, f.matrices), kind="self-map")


def torus_pq(CZ: ChainComplex, CX: ChainComplex, p: ChainMap, q: ChainMap) -> TorusComplex:
    """``cone(p - q)`` for two chain maps ``CZ -> CX``."""
    for name, m in (("p", p), ("q", q)):
        if not (_same_complex(m.source, CZ) and _same_complex(m.target, CX)):
            raise ValueError(f"{name} must map CZ to CX")
    return mapping_cone(ChainMap(CZ, CX, p.matrices) - ChainMap(CZ, CX, q.matrices), kind="pq")


# --------------------------------------------------------------------------
# graph complexes


def _union_fiber(F: MultivaluedMap, cube, Ncells: set, Lcubes: frozenset, pointed: bool) -> set:
    """Second-factor labels over ``cube``: the cubes of the closed union of
    ``F(c) ∩ N`` over the cells ``c`` of ``N`` containing ``cube``, with
    ``L`` collapsed to the basepoint."""
    cells = set()
    for c in cube_cells(cube):
        if c in Ncells:
            cells |= F(c) & Ncells
    J = CubicalSet.from_cells(F.grid, cells).cubes
    labels = {q for q in J if q not in Lcubes}
    if pointed and J & Lcubes:
        labels.add(BASEPOINT)
    return labels


def graph_fibers(F: MultivaluedMap, pair: IndexPair, pointed: bool = True) -> dict:
    """Fiber of ``p: Z -> X`` over every cell of the quotient ``X = N/L``.

    The fiber over the basepoint is the basepoint together with the fibers
    over cells having a face in ``L`` (their closures reach the basepoint),
    which keeps ``Z`` closed under faces.
    """
    if pair.grid != F.grid:
        raise GridError("pair and map live in different grids")
    if not pointed and pair.L:
        raise ValueError("an unpointed graph complex needs L = ∅")
    Ncells = set(pair.N)
    Lcubes = pair.L_set.cubes
    X = pair.pointed_complex() if pointed else chain_complex(pair.N_set)
    fibers = {}
    for cells in X.basis:
        for s in cells:
            if s is not BASEPOINT:
                fibers[s] = _union_fiber(F, s, Ncells, Lcubes, pointed)
    if pointed:
        star = {BASEPOINT}
        for s, J in fibers.items():
            if any(f in Lcubes for f in _all_faces(s)):
                star |= J
        fibers[BASEPOINT] = star
    return fibers


def _all_faces(cube):
    seen, stack = set(), [cube]
    while stack:
        q = stack.pop()
        for f, _ in cube_faces(q):
            if f not in seen:
                seen.add(f)
                stack.append(f)
    return seen


def graph_complex(F: MultivaluedMap, pair: IndexPair, pointed: bool = True, reduced: bool = False):
    """Cellular chains of the graph cover ``Z ⊂ X × X`` and its projections.

    ``X`` is the pointed quotient ``N/L`` (or the plain complex of ``N`` when
    ``pointed`` is false and ``L`` is empty). A product cell ``σ × τ`` has
    ``∂(σ×τ) = ∂σ × τ + (-1)^{dim σ} σ × ∂τ``; ``p`` keeps ``σ`` when
    ``τ`` is a vertex and ``q`` keeps ``τ`` when ``σ`` is a vertex.
    With ``reduced`` the basepoint cell and ``(*, *)`` are divided out.
    Returns ``(CZ, CX, p, q)``.
    """
    if reduced and not pointed:
        raise ValueError("reduced needs the pointed model")
    fibers = graph_fibers(F, pair, pointed)
    X = pair.pointed_complex() if pointed else chain_complex(pair.N_set)
    Xbd = {x: (X.boundary_of(n, x) if n else {}) for n, b in enumerate(X.basis) for x in b}
    Xdim = {x: n for n, b in enumerate(X.basis) for x in b}
    drop = {BASEPOINT, (BASEPOINT, BASEPOINT)} if reduced else set()

    cells: dict[int, list] = {}
    for s in sorted(fibers, key=_sort_key):
        for t in sorted(fibers[s], key=_sort_key):
            if t not in Xdim:
                raise CarrierError(f"fiber label {t!r} is not a cell of X")
            if (s, t) not in drop:
                cells.setdefault(Xdim[s] + Xdim[t], []).append((s, t))
    top = max(cells, default=-1)
    basis = [cells.get(n, []) for n in range(top + 1)]

    def boundary(label):
        s, t = label
        out = [((a, t), v) for a, v in Xbd[s].items()]
        sign = -1 if Xdim[s] % 2 else 1
        out += [((s, b), sign * v) for b, v in Xbd[t].items()]
        return out

    CZ = ChainComplex.from_boundary_function(basis, boundary)
    # every face must be a cell of Z
    members = {x for b in CZ.basis for x in b}
    for label in members:
        for y, _ in boundary(label):
            if y not in members and y not in drop:
                raise CarrierError(f"graph complex is not closed: {y!r} missing")
    if reduced:
        X = ChainComplex.from_boundary_function(
            [[x for x in b if x is not BASEPOINT] for b in X.basis], lambda x: Xbd[x].items())
    p = ChainMap.from_function(CZ, X, lambda st: [(st[0], 1)] if Xdim[st[1]] == 0 and st[0] not in drop else [])
    q = ChainMap.from_function(CZ, X, lambda st: [(st[1], 1)] if Xdim[st[0]] == 0 and st[1] not in drop else [])
    p.check()
    q.check()
    return CZ, X, p, q


def _sort_key(label):
    return (0, ()) if label is BASEPOINT else (1, label)


def check_fiber_acyclicity(F: MultivaluedMap, pair: IndexPair | None = None,
                           pointed: bool = True) -> Verdict:
    """Every fiber of the graph cover has the homology of a point.

    Without a pair the fibers are the cubical sets ``F(c)`` for the domain
    cells ``c``; with a pair they are the fibers of ``Z -> N/L`` over every
    cell of the quotient, basepoint included.
    """
    bad = []
    if pair is None:
        for c in sorted(F.images):
            C = chain_complex(CubicalSet.from_cells(F.grid, F(c)))
            if not C.is_acyclic():
                bad.append(c)
    else:
        X = pair.pointed_complex() if pointed else chain_complex(pair.N_set)
        for s, J in sorted(graph_fibers(F, pair, pointed).items(), key=lambda kv: _sort_key(kv[0])):
            try:
                ok = X.subcomplex(J).is_acyclic()
            except ValueError:
                ok = False
            if not ok:
                bad.append(s)
    return Verdict(not bad, {"fiber": bad} if bad else {})


# --------------------------------------------------------------------------
# pipelines


def index_map_torus(F: MultivaluedMap, pair: IndexPair, reduced: bool = False) -> TorusComplex:
    """``cone(id - f♯)`` with ``f♯`` the carrier chain map of the index map."""
    phi = carrier_chain_map(F, pair, pointed=not reduced)
    return algebraic_mapping_torus(phi.source, phi)


def graph_torus(F: MultivaluedMap, pair: IndexPair, reduced: bool = False,
                pointed: bool = True) -> TorusComplex:
    """``cone(p♯ - q♯)`` on the graph cover of the index map."""
    CZ, CX, p, q = graph_complex(F, pair, pointed=pointed, reduced=reduced)
    return torus_pq(CZ, CX, p, q)


# --------------------------------------------------------------------------
# wedges of circles


def wedge_of_circles(n: int) -> ChainComplex:
    """Pointed cellular chains of a wedge of ``n`` circles: one vertex
    ``BASEPOINT`` and edges ``1..n`` with zero boundary."""
    basis = [[BASEPOINT], list(range(1, n + 1))] if n else [[BASEPOINT]]
    return ChainComplex.from_boundary_function(basis, lambda x: [])


def wedge_map(n: int, images) -> ChainMap:
    """Cellular chain map of a pointed self-map of the wedge sending circle
    ``i`` along the word ``images[i-1]`` (signed generator indices)."""
    if len(images) != n:
        raise ValueError(f"expected {n} image words, got {len(images)}")
    C = wedge_of_circles(n)

    def image(x):
        if x is BASEPOINT:
            return [(BASEPOINT, 1)]
        sums: dict[int, int] = {}
        for g in images[x - 1]:
            if not 1 <= abs(g) <= n:
                raise ValueError(f"image of circle {x} uses generator {abs(g)}")
            sums[abs(g)] = sums.get(abs(g), 0) + (1 if g > 0 else -1)
        return sorted(sums.items())

    return ChainMap.from_function(C, C, image)


def homology_through(groups, top: int) -> list[HomologyGroup]:
    """``groups`` cut or padded to degrees ``0..top``; nontrivial groups
    above ``top`` are kept."""
    groups = list(groups)
    while len(groups) > top + 1 and groups[-1].is_trivial:
        groups.pop()
    return groups + [HomologyGroup()] * (top + 1 - len(groups))
