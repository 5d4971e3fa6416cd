"""Combinatorial multivalued maps, invariant parts and strong index pairs."""
from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .cubical import (
    BASEPOINT, CarrierError, Cell, ChainComplex, ChainMap, CubicalSet, Grid, GridError,
    acyclic_carrier_map, box_in_cells, box_meets_only_within, cube_cells,
    pointed_complex, relative_chain_complex,
)
from .interval import Box, Interval, MapExpr, evaluate_interval


class IsolationError(RuntimeError):
    """The invariant part reaches the boundary of the seed region."""

    def __init__(self, message: str, cells: Iterable[Cell] = ()):
        super().__init__(message)
        self.cells = sorted(cells)


@dataclass(frozen=True)
class MultivaluedMap:
    """Top cell -> nonempty set of top cells of the same grid.

    ``boxes`` optionally records, per domain cell, the box the cell's image
    is known to lie in; ``escapes`` flags cells whose image box leaves the
    grid. Both are filled in by :func:`enclose_graph`.
    """

    grid: Grid
    images: Mapping[Cell, frozenset]
    boxes: Mapping[Cell, Box] = field(default_factory=dict)
    escapes: frozenset = frozenset()

    def __post_init__(self):
        imgs = {}
        for c, vals in self.images.items():
            c = tuple(c)
            if not self.grid.in_range(c):
                raise GridError(f"domain cell {c} outside the grid")
            vals = frozenset(tuple(v) for v in vals)
            for v in vals:
                if not self.grid.in_range(v):
                    raise GridError(f"image cell {v} of {c} outside the grid")
            imgs[c] = vals
        object.__setattr__(self, "images", imgs)
        object.__setattr__(self, "escapes", frozenset(tuple(c) for c in self.escapes))

    @property
    def domain(self) -> frozenset:
        return frozenset(self.images)

    def __call__(self, cell: Cell) -> frozenset:
        return self.images.get(tuple(cell), frozenset())

    def image_of(self, cells: Iterable[Cell]) -> set:
        out = set()
        for c in cells:
            out |= self(c)
        return out

    def preimages(self) -> dict:
        pre: dict = {c: set() for c in self.images}
        for c, vals in self.images.items():
            for v in vals:
                pre.setdefault(v, set()).add(c)
        return pre

    def graph_cells(self) -> list[tuple[Cell, Cell]]:
        """Top cells ``c x c'`` of the product grid covering the graph."""
        return sorted((c, v) for c, vals in self.images.items() for v in vals)

    def graph_set(self) -> CubicalSet:
        G = self.grid.product(self.grid)
        return CubicalSet.from_cells(G, [c + v for c, v in self.graph_cells()])

    def fiber_sizes(self) -> dict:
        return {c: len(v) for c, v in self.images.items()}

    def has_boxes(self) -> bool:
        return bool(self.boxes) and all(c in self.boxes for c in self.images)


def enclose_graph(expr: MapExpr, grid: Grid, workers: int = 1) -> MultivaluedMap:
    """Cubical enclosure of ``expr`` on ``grid``.

    Each top cell maps to every top cell whose closed box meets the interval
    image of the cell's box; cells whose image box leaves the grid box are
    flagged in ``escapes`` (their in-grid image cells are still listed).
    """
    if expr.dim != grid.dim:
        raise GridError(f"map has arity {expr.dim}, grid has dimension {grid.dim}")
    cells = grid.cells()

    def one(cell):
        box = evaluate_interval(expr, grid.cell_box(cell))
        hit, esc = grid.cells_meeting(box)
        return cell, box, frozenset(hit), esc

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, cells))
    else:
        results = [one(c) for c in cells]
    images, boxes, escapes = {}, {}, set()
    for cell, box, hit, esc in results:
        images[cell] = hit
        boxes[cell] = box
        if esc:
            escapes.add(cell)
    return MultivaluedMap(grid, images, boxes, frozenset(escapes))


# --------------------------------------------------------------------------
# invariant sets

def invariant_part(F: MultivaluedMap, M: Iterable[Cell]) -> frozenset:
    """Largest ``A ⊂ M`` in which every cell has a successor and a
    predecessor in ``A``: the combinatorial invariant part of ``M``."""
    A = set(tuple(c) for c in M)
    pre = F.preimages()
    succ_count = {c: len(F(c) & A) for c in A}
    pred_count = {c: len(pre.get(c, set()) & A) for c in A}
    queue = sorted(c for c in A if not succ_count[c] or not pred_count[c])
    while queue:
        c = queue.pop()
        if c not in A:
            continue
        A.discard(c)
        for p in pre.get(c, ()):
            if p in A:
                succ_count[p] -= 1
                if succ_count[p] == 0:
                    queue.append(p)
        for s in F(c):
            if s in A:
                pred_count[s] -= 1
                if pred_count[s] == 0:
                    queue.append(s)
    return frozenset(A)


def inv_n(F: MultivaluedMap, M: Iterable[Cell], n: int) -> frozenset:
    """Cells ``x_n`` of paths ``x_0 -> ... -> x_2n`` lying in ``M``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    M = frozenset(tuple(c) for c in M)
    forward = set(M)
    for _ in range(n):
        forward = F.image_of(forward) & M
    backward = set(M)
    for _ in range(n):
        backward = {c for c in M if F(c) & backward}
    return frozenset(forward & backward)


def neighborhood(grid: Grid, cells: Iterable[Cell]) -> set:
    """Cells touching any of ``cells``, including cells beyond the grid."""
    out = set()
    for c in cells:
        for off in _offsets(grid.dim):
            out.add(tuple(a + b for a, b in zip(c, off)))
    return out


def _offsets(d: int):
    from itertools import product
    return product((-1, 0, 1), repeat=d)


# --------------------------------------------------------------------------
# index pairs

@dataclass(frozen=True)
class IndexPair:
    grid: Grid
    N: frozenset
    L: frozenset

    def __post_init__(self):
        N = frozenset(tuple(c) for c in self.N)
        L = frozenset(tuple(c) for c in self.L)
        if not L <= N:
            raise ValueError("L must be contained in N")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "L", L)

    @property
    def N_set(self) -> CubicalSet:
        return CubicalSet.from_cells(self.grid, self.N)

    @property
    def L_set(self) -> CubicalSet:
        return CubicalSet.from_cells(self.grid, self.L)

    @property
    def exit_free(self) -> frozenset:
        return self.N - self.L

    def relative_complex(self):
        return relative_chain_complex(self.N_set, self.L_set)

    def pointed_complex(self):
        return pointed_complex(self.N_set, self.L_set)

    def relative_homology(self):
        return self.relative_complex().homology()


@dataclass
class Verdict:
    ok: bool
    violations: dict[str, list] = field(default_factory=dict)

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": {k: [list(c) for c in v] for k, v in self.violations.items()}}


def _escapes_region(F: MultivaluedMap, c: Cell, region: set) -> bool:
    """Whether the image of ``c`` may leave ``|region|``."""
    if F.has_boxes():
        return not box_in_cells(F.grid, F.boxes[c], region)
    return c in F.escapes or not F(c) <= region


def _enters_outside(F: MultivaluedMap, c: Cell, N: set, L: set) -> bool:
    """Whether the image of ``c`` may meet ``|N|`` outside ``|L|``."""
    if F.has_boxes():
        return not box_meets_only_within(F.grid, F.boxes[c], N, L)
    return not (F(c) & N) <= L


def verify_index_pair(F: MultivaluedMap, pair: IndexPair) -> Verdict:
    """Check the strong index pair conditions for ``F``.

    (i) ``F(L) ∩ N ⊂ L``; (ii) ``F(N \\ L) ⊂ N``; (iii) the invariant part of
    ``N \\ L`` touches neither ``L`` nor cells outside ``N``. When ``F``
    carries image boxes, (i) and (ii) are decided on the boxes against the
    closed unions ``|N|``, ``|L|``; otherwise cellwise.
    """
    N, L = set(pair.N), set(pair.L)
    v1 = sorted(c for c in L if _enters_outside(F, c, N, L))
    v2 = sorted(c for c in N - L if _escapes_region(F, c, N))
    inv = invariant_part(F, N - L)
    v3 = sorted(c for c in inv if neighborhood(pair.grid, [c]) - (N - L))
    viol = {}
    if v1:
        viol["exit_set"] = v1
    if v2:
        viol["forward_closed"] = v2
    if v3:
        viol["isolation"] = v3
    return Verdict(not viol, viol)


def build_index_pair(F: MultivaluedMap, seed: Iterable[Cell]) -> IndexPair:
    """Grow a strong index pair around the invariant part of ``seed``.

    ``N`` is the forward closure of the invariant part inside the seed;
    ``L`` starts as the cells of ``N`` whose image may leave ``|N|`` and is
    closed under ``F`` inside ``N``. Cells are processed in lexicographic
    order so the output is reproducible.
    """
    seed = frozenset(tuple(c) for c in seed)
    A = invariant_part(F, seed)
    if not A:
        return IndexPair(F.grid, frozenset(), frozenset())
    touching = sorted(c for c in A if neighborhood(F.grid, [c]) - seed)
    if touching:
        raise IsolationError("invariant part touches the boundary of the seed", touching)

    N = set(A)
    frontier = sorted(A)
    while frontier:
        new = sorted((F.image_of(frontier) & seed) - N)
        N.update(new)
        frontier = new
    L = {c for c in sorted(N) if _escapes_region(F, c, N)}
    frontier = sorted(L)
    while frontier:
        new = sorted((F.image_of(frontier) & N) - L)
        L.update(new)
        frontier = new
    # pick up cells whose image meets |N \ L| only through shared faces
    changed = True
    while changed:
        changed = False
        for c in sorted(L):
            if _enters_outside(F, c, N, L):
                bad = sorted(v for v in F(c) & (N - L))
                L.update(bad)
                changed = bool(bad)
        for c in sorted(N - L):
            if _escapes_region(F, c, N):
                L.add(c)
                changed = True

    pair = IndexPair(F.grid, frozenset(N), frozenset(L))
    verdict = verify_index_pair(F, pair)
    if not verdict:
        cells = [c for v in verdict.violations.values() for c in v]
        raise IsolationError(f"could not certify an index pair: {sorted(verdict.violations)}", cells)
    return pair


# --------------------------------------------------------------------------
# index map on chains

def _carrier_cells(F: MultivaluedMap, cube, domain: set) -> set:
    """Top cells carrying the image of the closed cube: cells meeting the
    intersection of the image boxes of the domain cells containing it."""
    owners = [c for c in cube_cells(cube) if c in domain]
    if not owners:
        raise CarrierError(f"cube {cube} is not in the domain")
    if F.has_boxes():
        box = F.boxes[owners[0]]
        for c in owners[1:]:
            box = box.intersect(F.boxes[c])
            if box is None:
                raise CarrierError(f"image boxes around {cube} do not overlap")
        return set(F.grid.cells_meeting(box)[0])
    out = set(F(owners[0]))
    for c in owners[1:]:
        out &= F(c)
    return out


def carrier_chain_map(F: MultivaluedMap, src: IndexPair, dst: IndexPair | None = None,
                      pointed: bool = True) -> ChainMap:
    """Chain map of the index map ``N/L -> N'/L'`` selected from ``F``.

    The carrier of a cube of ``N \\ L`` is the block of cells meeting the
    (intersected) image boxes, restricted to ``N'``, with everything in
    ``L'`` collapsed to the basepoint. Requires the image of ``N \\ L`` to
    stay in ``N'`` (strong index pair) and every carrier to be acyclic.
    With ``pointed=False`` the basepoint is divided out, giving the map on
    the relative chains ``C(N, L) -> C(N', L')``.
    """
    dst = dst or src
    if src.grid != F.grid or dst.grid != F.grid:
        raise GridError("pair and map live in different grids")
    Nsrc, Ndst = set(src.N), set(dst.N)
    Ldst_cubes = dst.L_set.cubes
    S = src.pointed_complex()
    T = dst.pointed_complex()
    for c in sorted(src.exit_free):
        if _escapes_region(F, c, Ndst):
            raise CarrierError(f"image of cell {c} may leave the target N")

    def carrier(cube):
        cells = _carrier_cells(F, cube, Nsrc) & Ndst
        J = CubicalSet.from_cells(F.grid, cells).cubes
        labels = {q for q in J if q not in Ldst_cubes}
        if J & Ldst_cubes or not labels:
            labels.add(BASEPOINT)
        return labels

    phi = acyclic_carrier_map(S, T, carrier, fixed={BASEPOINT: {BASEPOINT: 1}})
    phi.check()
    if pointed:
        return phi
    return drop_basepoint(phi)


def drop_basepoint(phi: ChainMap) -> ChainMap:
    """Induced map on the quotients by the basepoint (which must be fixed)."""
    S = _without_basepoint(phi.source)
    T = _without_basepoint(phi.target)
    out = ChainMap.from_function(
        S, T, lambda x: [(y, v) for y, v in phi.image(S.degree_of(x), x).items() if y is not BASEPOINT])
    out.check()
    return out


def _without_basepoint(C):
    basis = [[x for x in b if x is not BASEPOINT] for b in C.basis]
    return ChainComplex.from_boundary_function(basis, C._boundary_labels)


# --------------------------------------------------------------------------
# text format

_LINE = re.compile(r"^\s*\(([^)]*)\)\s*->\s*(.*?)\s*(?:;\s*(.*))?$")


def _cell(text: str) -> Cell:
    return tuple(int(t) for t in re.split(r"[\s,]+", text.strip()) if t)


def format_multivalued_map(F: MultivaluedMap) -> str:
    """``grid: ...`` header, then ``(c) -> (c1),(c2)`` per domain cell,
    optionally followed by ``; box lo hi, lo hi`` and ``; escapes``."""
    lines = [F.grid.format()]
    for c in sorted(F.images):
        body = ",".join("(" + " ".join(map(str, v)) + ")" for v in sorted(F.images[c]))
        extra = []
        if c in F.boxes:
            extra.append("box " + ", ".join(f"{iv.lo} {iv.hi}" for iv in F.boxes[c]))
        if c in F.escapes:
            extra.append("escapes")
        line = "(" + " ".join(map(str, c)) + ") -> " + body
        if extra:
            line += " ; " + " ; ".join(extra)
        lines.append(line)
    return "\n".join(lines) + "\n"


def parse_multivalued_map(text: str) -> MultivaluedMap:
    grid = None
    images, boxes, escapes = {}, {}, set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("grid:"):
            grid = Grid.parse(line)
            continue
        m = _LINE.match(line)
        if not m:
            raise GridError(f"line {lineno}: expected '(c) -> (c1),(c2)', got {line!r}")
        try:
            c = _cell(m.group(1))
            vals = frozenset(_cell(v) for v in re.findall(r"\(([^)]*)\)", m.group(2)))
            for part in (m.group(3) or "").split(";"):
                part = part.strip()
                if part == "escapes":
                    escapes.add(c)
                elif part.startswith("box"):
                    ivs = [p.split() for p in part[3:].split(",")]
                    boxes[c] = Box([Interval(a, b) for a, b in ivs])
                elif part:
                    raise ValueError(f"unknown annotation {part!r}")
        except ValueError as exc:
            raise GridError(f"line {lineno}: {exc}") from None
        images[c] = vals
    if grid is None:
        raise GridError("missing 'grid:' header")
    return MultivaluedMap(grid, images, boxes, frozenset(escapes))
