"""Named example systems shipped with the package.

Two kinds: interval maps on a grid (an enclosure and an index pair are
computed) and pointed self-maps of a wedge of circles given by the words
their circles are sent to.
"""
from __future__ import annotations

from dataclasses import dataclass

from .cubical import Grid
from .fpgroup import Word, parse_word
from .interval import Box, Interval, to_rational


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    expr: str | None = None
    grid: str | None = None
    seed: str | None = None           # None = every cell of the grid
    circles: tuple[str, ...] = ()
    images: tuple[str, ...] = ()

    @property
    def has_map(self) -> bool:
        return self.expr is not None

    def words(self) -> list[Word]:
        return [parse_word(w, self.circles) for w in self.images]

    def images_text(self) -> str:
        return "".join(f"{c} -> {w}\n" for c, w in zip(self.circles, self.images))


FIXTURES = {f.name: f for f in [
    Fixture("f1", "x -> 2x, isolated fixed point 0; index map is the identity on a circle",
            expr="(mul 2 (var 0))", grid="-2 2 16",
            circles=("a",), images=("a",)),
    Fixture("g-minus2x", "x -> -2x, isolated fixed point 0; index map has degree -1",
            expr="(mul -2 (var 0))", grid="-2 2 16",
            circles=("a",), images=("a^-1",)),
    Fixture("f2", "x -> -x^3, the period-two orbit {-1, 1}; index map swaps two circles",
            expr="(neg (pow (var 0) 3))", grid="-2 2 128", seed="-3/2 -1/2 | 1/2 3/2",
            circles=("a", "b"), images=("b^-1", "a^-1")),
    Fixture("degree2", "degree-two self-map of a circle, a -> a^2",
            circles=("a",), images=("a^2",)),
    Fixture("commutator", "wedge of two circles, a -> a b a^-1 b^-1, b -> a^-1 b a b^-1",
            circles=("a", "b"), images=("a b a^-1 b^-1", "a^-1 b a b^-1")),
    Fixture("horseshoe-u", "horseshoe index map on a wedge of two circles, a -> a b, b -> b^-1 a^-1",
            circles=("a", "b"), images=("a b", "b^-1 a^-1")),
    Fixture("horseshoe-g", "horseshoe index map on a wedge of two circles, a -> a b, b -> a b",
            circles=("a", "b"), images=("a b", "a b")),
    Fixture("trivial", "empty invariant set; the index is the pointed one-point space",
            circles=(), images=()),
]}


def get_fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown example {name!r}; known: {', '.join(FIXTURES)}") from None


def parse_seed(spec: str | None, grid: Grid) -> list[tuple[int, ...]]:
    """Top cells lying in a union of boxes ``lo hi, lo hi | lo hi, ...``
    (one ``lo hi`` pair per axis, boxes separated by ``|``). ``None`` or
    ``all`` selects the whole grid."""
    if spec is None or spec.strip() in ("", "all"):
        return grid.cells()
    boxes = []
    for part in spec.split("|"):
        axes = [a.split() for a in part.split(",")]
        if len(axes) != grid.dim or any(len(a) != 2 for a in axes):
            raise ValueError(f"seed box {part.strip()!r} needs one 'lo hi' pair per axis")
        boxes.append(Box([Interval(to_rational(a), to_rational(b)) for a, b in axes]))
    return [c for c in grid.cells() if any(b.contains(grid.cell_box(c)) for b in boxes)]
