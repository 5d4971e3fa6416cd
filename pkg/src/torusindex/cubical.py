"""Uniform cubical grids, cubical sets and their integral chain complexes.

An elementary cube is stored in *doubled coordinates*: a tuple with one int
per axis, where an even value ``2i`` is the grid vertex ``i`` and an odd
value ``2i+1`` the edge between vertices ``i`` and ``i+1``. The top cell
with multi-index ``(i1, ..., id)`` is therefore ``(2*i1+1, ..., 2*id+1)``
and the dimension of a cube is its number of odd coordinates.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Hashable, Iterable, Sequence

from .homalg import HomologyGroup, homology, smith_normal_form
from .interval import Box, Interval, to_rational

Cell = tuple[int, ...]     # top-cell multi-index
Cube = tuple[int, ...]     # doubled coordinates


class _Basepoint:
    """The point a collapsed subspace is sent to."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "*"

    def __reduce__(self):
        return (_Basepoint, ())


BASEPOINT = _Basepoint()


class GridError(ValueError):
    pass


class CarrierError(ValueError):
    """A carrier is not acyclic, so no chain selector is guaranteed."""


# --------------------------------------------------------------------------
# grids

@dataclass(frozen=True)
class Grid:
    """Uniform subdivision of a box into ``shape[k]`` cells along axis ``k``."""

    box: Box
    shape: tuple[int, ...]

    def __post_init__(self):
        box = self.box if isinstance(self.box, Box) else Box(self.box)
        shape = tuple(int(n) for n in self.shape)
        if len(shape) != box.dim:
            raise GridError("grid shape and box dimension differ")
        if any(n <= 0 for n in shape):
            raise GridError("cell counts must be positive")
        if any(iv.width <= 0 for iv in box):
            raise GridError("grid box must have positive width in every axis")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def uniform(cls, bounds: Sequence[tuple], shape: Sequence[int]) -> "Grid":
        return cls(Box(bounds), tuple(shape))

    @classmethod
    def parse(cls, spec: str) -> "Grid":
        """``"lo hi n; lo hi n; ..."`` with rational endpoints, optionally
        prefixed by ``grid:``."""
        spec = spec.strip()
        if spec.startswith("grid:"):
            spec = spec[5:]
        bounds, shape = [], []
        for part in spec.split(";"):
            toks = part.split()
            if len(toks) != 3:
                raise GridError(f"grid axis must be 'lo hi n', got {part.strip()!r}")
            lo, hi = to_rational(toks[0]), to_rational(toks[1])
            if lo >= hi:
                raise GridError(f"grid axis needs lo < hi, got {part.strip()!r}")
            bounds.append((lo, hi))
            if not toks[2].isdigit():
                raise GridError(f"cell count must be a positive integer, got {toks[2]!r}")
            shape.append(int(toks[2]))
        return cls.uniform(bounds, shape)

    def format(self) -> str:
        return "grid: " + "; ".join(f"{iv.lo} {iv.hi} {n}" for iv, n in zip(self.box, self.shape))

    @property
    def dim(self) -> int:
        return len(self.shape)

    def width(self, k: int) -> Fraction:
        return self.box[k].width / self.shape[k]

    def vertex(self, k: int, i: int) -> Fraction:
        return self.box[k].lo + i * self.width(k)

    def in_range(self, cell: Cell) -> bool:
        return len(cell) == self.dim and all(0 <= c < n for c, n in zip(cell, self.shape))

    def cells(self) -> list[Cell]:
        return list(product(*(range(n) for n in self.shape)))

    def cell_box(self, cell: Cell) -> Box:
        return Box([(self.vertex(k, c), self.vertex(k, c + 1)) for k, c in enumerate(cell)])

    def cube_box(self, cube: Cube) -> Box:
        return Box([(self.vertex(k, q // 2), self.vertex(k, (q + 1) // 2)) for k, q in enumerate(cube)])

    def cell_of_point(self, x: Sequence) -> Cell | None:
        """Some top cell containing ``x`` (the lowest index on shared faces)."""
        out = []
        for k, xk in enumerate(x):
            iv = self.box[k]
            if not (iv.lo <= xk <= iv.hi):
                return None
            i = int((Fraction(xk) - iv.lo) / self.width(k))
            out.append(min(i, self.shape[k] - 1))
        return tuple(out)

    def _axis_range(self, k: int, iv: Interval) -> tuple[int, int]:
        """Index range (possibly beyond the grid) of cells meeting ``iv``."""
        w, lo = self.width(k), self.box[k].lo
        first = _ceil((iv.lo - lo) / w) - 1
        last = _floor((iv.hi - lo) / w)
        return first, last

    def cells_meeting(self, box: Box) -> tuple[list[Cell], bool]:
        """Top cells whose closed box meets ``box``, and whether ``box``
        leaves the grid's bounding box."""
        ranges = []
        escapes = not self.box.contains(box)
        for k, iv in enumerate(box):
            a, b = self._axis_range(k, iv)
            ranges.append(range(max(a, 0), min(b, self.shape[k] - 1) + 1))
        return list(product(*ranges)), escapes

    def pieces(self, box: Box) -> list[list[tuple[int, ...]]]:
        """Per axis, the relatively open pieces the grid cuts ``box`` into,
        each given by the cell indices containing it (indices may lie
        outside the grid)."""
        out = []
        for k, iv in enumerate(box):
            w, lo = self.width(k), self.box[k].lo
            a, b = self._axis_range(k, iv)
            axis = []
            for i in range(a, b + 1):
                left, right = lo + i * w, lo + (i + 1) * w
                if left < iv.hi and iv.lo < right:
                    axis.append((i,))
            g0, g1 = _ceil((iv.lo - lo) / w), _floor((iv.hi - lo) / w)
            for g in range(g0, g1 + 1):
                axis.append((g - 1, g))
            out.append(axis)
        return out

    def product(self, other: "Grid") -> "Grid":
        return Grid(Box(list(self.box) + list(other.box)), self.shape + other.shape)

    def factor(self, which: str) -> "Grid":
        d = self.dim // 2
        if self.dim % 2:
            raise GridError("not a product grid")
        sl = slice(0, d) if which == "first" else slice(d, None)
        return Grid(Box(list(self.box)[sl]), self.shape[sl])


def _floor(q: Fraction) -> int:
    return q.numerator // q.denominator


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def box_in_cells(grid: Grid, box: Box, cells: set) -> bool:
    """Exact test of ``box ⊂ |cells|`` for the closed union of top cells."""
    for combo in product(*grid.pieces(box)):
        if not any(c in cells for c in product(*combo)):
            return False
    return True


def box_meets_only_within(grid: Grid, box: Box, outer: set, inner: set) -> bool:
    """Exact test of ``box ∩ |outer| ⊂ |inner|``."""
    for combo in product(*grid.pieces(box)):
        owners = list(product(*combo))
        if any(c in outer for c in owners) and not any(c in inner for c in owners):
            return False
    return True


# --------------------------------------------------------------------------
# elementary cubes

def top_cube(cell: Cell) -> Cube:
    return tuple(2 * c + 1 for c in cell)


def cube_to_cell(cube: Cube) -> Cell:
    return tuple(q // 2 for q in cube)


def cube_dim(cube: Cube) -> int:
    return sum(q & 1 for q in cube)


def cube_faces(cube: Cube) -> list[tuple[Cube, int]]:
    """Codimension-one faces with their signs in the cubical boundary.

    ``d(I1 x ... x Id) = sum_k (-1)^{m_k} (upper_k - lower_k)`` where ``m_k``
    counts nondegenerate factors before axis ``k``.
    """
    out = []
    m = 0
    for k, q in enumerate(cube):
        if q & 1:
            sign = -1 if m % 2 else 1
            out.append((cube[:k] + (q + 1,) + cube[k + 1:], sign))
            out.append((cube[:k] + (q - 1,) + cube[k + 1:], -sign))
            m += 1
    return out


def cube_closure(cube: Cube) -> list[Cube]:
    axes = [(q - 1, q, q + 1) if q & 1 else (q,) for q in cube]
    return list(product(*axes))


def cube_cells(cube: Cube) -> list[Cell]:
    """Top cells (multi-indices) whose closure contains the cube; may lie
    outside the grid."""
    axes = [(q // 2,) if q & 1 else (q // 2 - 1, q // 2) for q in cube]
    return list(product(*axes))


def cube_sort_key(cube: Cube):
    return (cube_dim(cube), cube)


@dataclass(frozen=True)
class CubicalSet:
    """A face-closed finite set of elementary cubes in one grid."""

    grid: Grid
    cubes: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        closed = set()
        for q in self.cubes:
            q = tuple(q)
            if len(q) != self.grid.dim or any(not 0 <= c <= 2 * n for c, n in zip(q, self.grid.shape)):
                raise GridError(f"cube {q} outside the grid")
            closed.update(cube_closure(q))
        object.__setattr__(self, "cubes", frozenset(closed))

    @classmethod
    def from_cells(cls, grid: Grid, cells: Iterable[Cell]) -> "CubicalSet":
        cells = [tuple(c) for c in cells]
        for c in cells:
            if not grid.in_range(c):
                raise GridError(f"cell {c} outside the grid")
        return cls(grid, frozenset(top_cube(c) for c in cells))

    def top_cells(self) -> frozenset:
        d = self.grid.dim
        return frozenset(cube_to_cell(q) for q in self.cubes if cube_dim(q) == d)

    def __contains__(self, cube) -> bool:
        return cube in self.cubes

    def __len__(self) -> int:
        return len(self.cubes)

    def __or__(self, other: "CubicalSet") -> "CubicalSet":
        _same_grid(self, other)
        return CubicalSet(self.grid, self.cubes | other.cubes)

    def issubset(self, other: "CubicalSet") -> bool:
        return self.cubes <= other.cubes

    def by_degree(self) -> list[list[Cube]]:
        top = max((cube_dim(q) for q in self.cubes), default=-1)
        out = [[] for _ in range(top + 1)]
        for q in self.cubes:
            out[cube_dim(q)].append(q)
        return [sorted(x) for x in out]


def _same_grid(a: CubicalSet, b: CubicalSet):
    if a.grid != b.grid:
        raise GridError("cubical sets live in different grids")


def parse_cubical_set(text: str, grid: Grid | None = None) -> CubicalSet:
    """Text format: a ``grid: ...`` header then one top cell per line as
    whitespace-separated indices; ``#`` starts a comment."""
    cells = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("grid:"):
            grid = Grid.parse(line)
            continue
        toks = re.split(r"[\s,()]+", line.strip("() "))
        try:
            cells.append(tuple(int(t) for t in toks if t))
        except ValueError:
            raise GridError(f"line {lineno}: bad cell {line!r}") from None
    if grid is None:
        raise GridError("missing 'grid:' header")
    return CubicalSet.from_cells(grid, cells)


def format_cubical_set(s: CubicalSet) -> str:
    lines = [s.grid.format()]
    lines += [" ".join(map(str, c)) for c in sorted(s.top_cells())]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# chain complexes and chain maps

Column = tuple[tuple[int, int], ...]


class ChainComplex:
    """Finitely generated free chain complex over Z.

    ``basis[n]`` lists hashable labels of degree ``n``; ``boundary(n)`` is
    the matrix of ``d_n : C_n -> C_{n-1}`` column-major, each column a tuple
    of ``(row, value)`` pairs.
    """

    def __init__(self, basis: Sequence[Sequence[Hashable]], boundaries: Sequence[Sequence[Column]]):
        self.basis = [list(b) for b in basis]
        while self.basis and not self.basis[-1]:
            self.basis.pop()
        self.index = [{x: i for i, x in enumerate(b)} for b in self.basis]
        self._bd = [list(boundaries[n]) if n < len(boundaries) else [] for n in range(len(self.basis))]
        if self.basis:
            self._bd[0] = [() for _ in self.basis[0]]
        for n, cols in enumerate(self._bd):
            if len(cols) != len(self.basis[n]):
                raise ValueError(f"degree {n}: {len(cols)} columns for {len(self.basis[n])} cells")

    @classmethod
    def from_boundary_function(cls, basis, boundary_of: Callable[[Hashable], Iterable[tuple[Hashable, int]]]):
        """Build from labels and a function giving a label's boundary as
        ``(label, coefficient)`` pairs; labels absent from the basis are
        dropped (relative chains)."""
        basis = [list(b) for b in basis]
        index = [{x: i for i, x in enumerate(b)} for b in basis]
        bds = [[() for _ in basis[0]]] if basis else []
        for n in range(1, len(basis)):
            cols = []
            for x in basis[n]:
                acc: dict[int, int] = {}
                for y, c in boundary_of(x):
                    i = index[n - 1].get(y)
                    if i is not None:
                        acc[i] = acc.get(i, 0) + c
                cols.append(tuple(sorted((i, v) for i, v in acc.items() if v)))
            bds.append(cols)
        return cls(basis, bds)

    @property
    def sizes(self) -> list[int]:
        return [len(b) for b in self.basis]

    @property
    def top_degree(self) -> int:
        return len(self.basis) - 1

    def size(self, n: int) -> int:
        return len(self.basis[n]) if 0 <= n < len(self.basis) else 0

    def boundary(self, n: int) -> list[Column]:
        if 0 < n < len(self._bd):
            return self._bd[n]
        return [() for _ in range(self.size(n))]

    def boundary_of(self, n: int, label) -> dict:
        col = self.boundary(n)[self.index[n][label]]
        return {self.basis[n - 1][i]: v for i, v in col}

    def homology(self) -> list[HomologyGroup]:
        return homology(self)

    def reduced_homology(self) -> list[HomologyGroup]:
        h = self.homology()
        if h and h[0].betti > 0:
            h[0] = HomologyGroup(h[0].betti - 1, h[0].torsion)
        return h

    def is_acyclic(self) -> bool:
        """Reduced homology vanishes (and the complex is nonempty)."""
        if not self.basis or not self.basis[0]:
            return False
        return all(g.is_trivial for g in self.reduced_homology())

    def subcomplex(self, labels: Iterable[Hashable]) -> "ChainComplex":
        keep = set(labels)
        basis = [[x for x in b if x in keep] for b in self.basis]
        # subcomplexes must be closed under boundary
        for n in range(1, len(basis)):
            for x in basis[n]:
                bad = [y for y in self.boundary_of(n, x) if y not in keep]
                if bad:
                    raise ValueError(f"{x} has boundary cells {bad} outside the subcomplex")
        return ChainComplex.from_boundary_function(basis, self._boundary_labels)

    def _boundary_labels(self, x):
        n = self.degree_of(x)
        return self.boundary_of(n, x).items()

    def degree_of(self, label) -> int:
        for n, idx in enumerate(self.index):
            if label in idx:
                return n
        raise KeyError(label)

    def __repr__(self):
        return f"ChainComplex(sizes={self.sizes})"


class ChainMap:
    """Degree-0 chain map; ``matrices[n]`` is column-major like boundaries."""

    def __init__(self, source: ChainComplex, target: ChainComplex, matrices: Sequence[Sequence[Column]]):
        self.source, self.target = source, target
        self.matrices = [list(matrices[n]) if n < len(matrices) else [() for _ in range(source.size(n))]
                         for n in range(len(source.basis))]
        for n, cols in enumerate(self.matrices):
            if len(cols) != source.size(n):
                raise ValueError(f"degree {n}: {len(cols)} columns for {source.size(n)} cells")
            for col in cols:
                for i, _ in col:
                    if not 0 <= i < target.size(n):
                        raise ValueError(f"degree {n}: row {i} outside target")

    @classmethod
    def from_function(cls, source, target, image_of: Callable[[Hashable], Iterable[tuple[Hashable, int]]]):
        mats = []
        for n, b in enumerate(source.basis):
            cols = []
            for x in b:
                acc: dict[int, int] = {}
                for y, c in image_of(x):
                    i = target.index[n].get(y) if n < len(target.index) else None
                    if i is None:
                        raise GridError(f"image {y} of {x} is not a degree-{n} cell of the target")
                    acc[i] = acc.get(i, 0) + c
                cols.append(tuple(sorted((i, v) for i, v in acc.items() if v)))
            mats.append(cols)
        return cls(source, target, mats)

    @classmethod
    def identity(cls, C: ChainComplex) -> "ChainMap":
        return cls(C, C, [[((i, 1),) for i in range(C.size(n))] for n in range(len(C.basis))])

    @classmethod
    def from_dense(cls, source, target, dense: Sequence[Sequence[Sequence[int]]]) -> "ChainMap":
        """``dense[n]`` is a (target rows) x (source cols) integer matrix."""
        mats = []
        for n in range(len(source.basis)):
            M = dense[n] if n < len(dense) else []
            cols = []
            for j in range(source.size(n)):
                cols.append(tuple((i, M[i][j]) for i in range(target.size(n)) if M[i][j]))
            mats.append(cols)
        return cls(source, target, mats)

    def dense(self, n: int) -> list[list[int]]:
        M = [[0] * self.source.size(n) for _ in range(self.target.size(n))]
        if n < len(self.matrices):
            for j, col in enumerate(self.matrices[n]):
                for i, v in col:
                    M[i][j] += v
        return M

    def apply(self, n: int, vec: Sequence[int]) -> list[int]:
        out = [0] * self.target.size(n)
        if n < len(self.matrices):
            for j, col in enumerate(self.matrices[n]):
                if vec[j]:
                    for i, v in col:
                        out[i] += v * vec[j]
        return out

    def image(self, n: int, label) -> dict:
        col = self.matrices[n][self.source.index[n][label]]
        return {self.target.basis[n][i]: v for i, v in col}

    def _combine(self, other: "ChainMap", s: int) -> "ChainMap":
        if other.source is not self.source and other.source.basis != self.source.basis:
            raise ValueError("chain maps have different sources")
        if other.target is not self.target and other.target.basis != self.target.basis:
            raise ValueError("chain maps have different targets")
        mats = []
        for n in range(len(self.source.basis)):
            cols = []
            for a, b in zip(self.matrices[n], other.matrices[n]):
                acc = dict(a)
                for i, v in b:
                    acc[i] = acc.get(i, 0) + s * v
                cols.append(tuple(sorted((i, v) for i, v in acc.items() if v)))
            mats.append(cols)
        return ChainMap(self.source, self.target, mats)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __matmul__(self, other: "ChainMap") -> "ChainMap":
        """Composition ``self ∘ other``."""
        mats = []
        for n in range(len(other.source.basis)):
            cols = []
            for col in other.matrices[n]:
                acc: dict[int, int] = {}
                for k, v in col:
                    for i, w in self.matrices[n][k]:
                        acc[i] = acc.get(i, 0) + v * w
                cols.append(tuple(sorted((i, v) for i, v in acc.items() if v)))
            mats.append(cols)
        return ChainMap(other.source, self.target, mats)

    def check(self) -> None:
        """Raise unless ``d φ_n == φ_{n-1} d`` in every degree."""
        S, T = self.source, self.target
        for n in range(1, len(S.basis)):
            for j in range(S.size(n)):
                left: dict[int, int] = {}
                for k, v in self.matrices[n][j]:
                    for i, w in T.boundary(n)[k]:
                        left[i] = left.get(i, 0) + v * w
                right: dict[int, int] = {}
                for k, v in S.boundary(n)[j]:
                    for i, w in self.matrices[n - 1][k]:
                        right[i] = right.get(i, 0) + v * w
                if {i: v for i, v in left.items() if v} != {i: v for i, v in right.items() if v}:
                    raise ValueError(f"not a chain map: degree {n}, cell {S.basis[n][j]!r}")

    def is_chain_map(self) -> bool:
        try:
            self.check()
        except ValueError:
            return False
        return True


# --------------------------------------------------------------------------
# cubical complexes

def chain_complex(s: CubicalSet) -> ChainComplex:
    """Cubical chain complex with the alternating-sign boundary."""
    return ChainComplex.from_boundary_function(s.by_degree(), cube_faces)


def relative_chain_complex(N: CubicalSet, L: CubicalSet, basepoint: bool = False) -> ChainComplex:
    """Chains of ``N`` modulo ``L``.

    Without ``basepoint`` the homology is ``H(N, L)``, the reduced homology of
    ``N/L``. With ``basepoint`` an extra 0-cell ``BASEPOINT`` stands for the
    collapsed ``L`` (a disjoint point when ``L`` is empty) and the homology
    is the unreduced homology of the pointed space ``N/L``.
    """
    _same_grid(N, L)
    if not L.issubset(N):
        raise GridError("L is not contained in N")
    rel = [[q for q in cubes if q not in L.cubes] for cubes in N.by_degree()]
    if not basepoint:
        return ChainComplex.from_boundary_function(rel, cube_faces)
    if not rel:
        rel = [[]]
    rel[0] = [BASEPOINT] + rel[0]

    def faces(q):
        if q is BASEPOINT:
            return []
        if cube_dim(q) == 1:
            return [(BASEPOINT if f in L.cubes else f, s) for f, s in cube_faces(q)]
        return cube_faces(q)

    return ChainComplex.from_boundary_function(rel, faces)


def pointed_complex(N: CubicalSet, L: CubicalSet) -> ChainComplex:
    return relative_chain_complex(N, L, basepoint=True)


def split_cube(cube: Cube) -> tuple[Cube, Cube]:
    d = len(cube) // 2
    return cube[:d], cube[d:]


def projection_chain_map(Z: CubicalSet, which: str, target: ChainComplex,
                         target_grid: Grid | None = None) -> ChainMap:
    """Chain map induced by ``p(x, y) = x`` (``which="first"``) or
    ``q(x, y) = y`` (``which="second"``) on a cubical set in a product grid.

    A cube goes to its projection when that keeps its dimension and to 0
    otherwise.
    """
    if which not in ("first", "second"):
        raise ValueError("which must be 'first' or 'second'")
    if target_grid is not None and Z.grid.factor(which) != target_grid:
        raise GridError("target grid is not the requested factor of Z's grid")
    source = chain_complex(Z)

    def image(q):
        x, y = split_cube(q)
        keep, drop = (x, y) if which == "first" else (y, x)
        return [(keep, 1)] if cube_dim(drop) == 0 else []

    return ChainMap.from_function(source, target, image)


def product_label_projection(which: str):
    """Image function for cells labelled ``(σ, τ)`` of a product complex."""
    def image(label):
        a, b = label
        keep, drop = (a, b) if which == "first" else (b, a)
        return [(keep, 1)] if _label_dim(drop) == 0 else []
    return image


def _label_dim(label) -> int:
    return 0 if label is BASEPOINT else cube_dim(label)


# --------------------------------------------------------------------------
# acyclic carriers

def solve_integer(A: Sequence[Sequence[int]], b: Sequence[int], ncols: int) -> list[int] | None:
    """An integer solution of ``A x = b`` or ``None``."""
    m = len(A)
    if m == 0:
        return [0] * ncols
    snf = smith_normal_form(A, ncols=ncols)
    ub = [sum(u * v for u, v in zip(row, b)) for row in snf.U]
    y = [0] * ncols
    for i in range(m):
        d = snf.D[i][i] if i < ncols else 0
        if d:
            if ub[i] % d:
                return None
            y[i] = ub[i] // d
        elif ub[i]:
            return None
    return [sum(snf.V[i][j] * y[j] for j in range(ncols)) for i in range(ncols)]


def acyclic_carrier_map(source: ChainComplex, target: ChainComplex,
                        carrier: Callable[[Hashable], Iterable[Hashable]],
                        fixed: dict | None = None,
                        check_acyclic: bool = True) -> ChainMap:
    """Chain map ``φ`` with ``φ(σ)`` supported on ``carrier(σ)``.

    ``carrier(σ)`` must be a set of target labels spanning an acyclic
    subcomplex and be monotone (faces get sub-carriers). Built degree by
    degree: vertices go to the least vertex of their carrier (``BASEPOINT``
    first), higher cells to an integer solution of ``d c = φ(dσ)`` inside
    the carrier. ``fixed`` pins images of chosen labels (e.g. basepoint).
    """
    fixed = fixed or {}
    images: list[dict] = []
    cache: dict[frozenset, ChainComplex] = {}
    for n, cells in enumerate(source.basis):
        deg_images = {}
        for x in cells:
            if x in fixed:
                deg_images[x] = dict(fixed[x])
                continue
            labels = frozenset(carrier(x))
            sub = cache.get(labels)
            if sub is None:
                sub = target.subcomplex(labels)
                if check_acyclic and not sub.is_acyclic():
                    raise CarrierError(f"carrier of {x!r} is not acyclic")
                cache[labels] = sub
            if n == 0:
                verts = sub.basis[0] if sub.basis else []
                if not verts:
                    raise CarrierError(f"carrier of {x!r} is empty")
                v = BASEPOINT if BASEPOINT in verts else min(verts)
                deg_images[x] = {v: 1}
                continue
            # right-hand side φ(dσ), which must live in the carrier
            rhs: dict = {}
            for y, c in source.boundary_of(n, x).items():
                for z, w in images[n - 1][y].items():
                    rhs[z] = rhs.get(z, 0) + c * w
            rhs = {z: v for z, v in rhs.items() if v}
            if n - 1 >= len(sub.basis) or any(z not in sub.index[n - 1] for z in rhs):
                raise CarrierError(f"boundary image of {x!r} leaves its carrier")
            top = sub.basis[n] if n < len(sub.basis) else []
            A = [[0] * len(top) for _ in sub.basis[n - 1]]
            for j, col in enumerate(sub.boundary(n) if top else []):
                for i, v in col:
                    A[i][j] = v
            b = [rhs.get(z, 0) for z in sub.basis[n - 1]]
            sol = solve_integer(A, b, len(top))
            if sol is None:
                raise CarrierError(f"no chain in the carrier of {x!r} bounds its boundary image")
            deg_images[x] = {top[j]: v for j, v in enumerate(sol) if v}
        images.append(deg_images)
    return ChainMap.from_function(source, target, lambda x: images[source.degree_of(x)][x].items())
