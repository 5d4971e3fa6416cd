"""Finitely presented groups: words, presentations of mapping-torus groups,
coset enumeration, low-index subgroups and their abelian invariants.

Words are tuples of nonzero ints: ``+i`` is generator ``i`` (1-based) and
``-i`` its inverse.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .homalg import HomologyGroup, smith_diagonal


class WordError(ValueError):
    pass


class CosetLimitError(RuntimeError):
    """Coset enumeration did not close within the coset cap."""


class SearchLimitError(RuntimeError):
    """Low-index search exceeded its node cap."""


# --------------------------------------------------------------------------
# words

class Word(tuple):
    """Immutable word in signed generator indices."""

    def __new__(cls, letters: Iterable[int] = ()):
        letters = tuple(int(x) for x in letters)
        if any(x == 0 for x in letters):
            raise WordError("generator index 0 is not allowed")
        return super().__new__(cls, letters)

    def reduce(self) -> "Word":
        out: list[int] = []
        for x in self:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return Word(out)

    def cyclic_reduce(self) -> "Word":
        w = list(self.reduce())
        i, j = 0, len(w) - 1
        while i < j and w[i] == -w[j]:
            i += 1
            j -= 1
        return Word(w[i:j + 1])

    def inverse(self) -> "Word":
        return Word(-x for x in reversed(self))

    def __mul__(self, other) -> "Word":
        return Word(tuple(self) + tuple(other)).reduce()

    def __pow__(self, k: int) -> "Word":
        base = self if k >= 0 else self.inverse()
        return Word(tuple(base) * abs(k)).reduce()

    def exponent_sums(self, ngens: int) -> list[int]:
        out = [0] * ngens
        for x in self:
            out[abs(x) - 1] += 1 if x > 0 else -1
        return out

    def max_generator(self) -> int:
        return max((abs(x) for x in self), default=0)

    def format(self, names: Sequence[str]) -> str:
        if not self:
            return "1"
        parts, i = [], 0
        while i < len(self):
            j = i
            while j < len(self) and self[j] == self[i]:
                j += 1
            g, k = names[abs(self[i]) - 1], (j - i) * (1 if self[i] > 0 else -1)
            parts.append(g if k == 1 else f"{g}^{k}")
            i = j
        return " ".join(parts)

    def __repr__(self):
        return f"Word({list(self)})"


def _tokenizer(names: Sequence[str]):
    alts = "|".join(re.escape(n) for n in sorted(names, key=len, reverse=True))
    return re.compile(rf"\s*(?:({alts})(?:\s*\^\s*(-?\d+))?|(1)(?![\d^]))")


def parse_word(text: str, names: Sequence[str]) -> Word:
    """Parse ``a b^-1 a^2`` (spaces optional when names are unambiguous)."""
    tok = _tokenizer(names)
    index = {n: i + 1 for i, n in enumerate(names)}
    out: list[int] = []
    pos, text = 0, text.strip()
    while pos < len(text):
        m = tok.match(text, pos)
        if not m or m.end() == pos:
            raise WordError(f"cannot parse word at column {pos + 1}: {text[pos:]!r}")
        if m.group(1):
            g = index[m.group(1)]
            k = int(m.group(2)) if m.group(2) else 1
            out.extend([g if k > 0 else -g] * abs(k))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return Word(out).reduce()


def parse_relation(text: str, names: Sequence[str]) -> Word:
    """A relator ``w`` or a relation ``u = v`` (stored as ``u v^-1``)."""
    sides = text.split("=")
    if len(sides) > 2:
        raise WordError(f"more than one '=' in {text!r}")
    w = parse_word(sides[0], names)
    if len(sides) == 2:
        w = w * parse_word(sides[1], names).inverse()
    return w


# --------------------------------------------------------------------------
# presentations

@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...] = ()

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(set(gens)) != len(gens):
            raise WordError("duplicate generator names")
        rels = []
        for r in self.relators:
            r = Word(r).cyclic_reduce()
            if r.max_generator() > len(gens):
                raise WordError(f"relator {list(r)} uses an undeclared generator")
            if r and r not in rels:
                rels.append(r)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relators", tuple(rels))

    @property
    def ngens(self) -> int:
        return len(self.generators)

    def format(self) -> str:
        lines = ["gens: " + ", ".join(self.generators)]
        lines += ["rel: " + r.format(self.generators) for r in self.relators]
        return "\n".join(lines) + "\n"

    def __str__(self):
        rels = ", ".join(r.format(self.generators) for r in self.relators)
        return f"< {', '.join(self.generators)} | {rels} >"


def parse_presentation(text: str) -> Presentation:
    """``gens: a, b, z`` followed by ``rel: a z = z a b`` lines."""
    gens = None
    rels = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, body = line.partition(":")
        key = key.strip()
        try:
            if key == "gens":
                gens = _parse_names(body)
            elif key == "rel":
                if gens is None:
                    raise WordError("'rel:' before 'gens:'")
                rels.append(parse_relation(body, gens))
            else:
                raise WordError(f"expected 'gens:' or 'rel:', got {line!r}")
        except WordError as exc:
            raise WordError(f"line {lineno}: {exc}") from None
    if gens is None:
        raise WordError("missing 'gens:' line")
    return Presentation(gens, tuple(rels))


def _parse_names(body: str) -> tuple[str, ...]:
    names = tuple(n for n in re.split(r"[\s,]+", body.strip()) if n)
    for n in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", n):
            raise WordError(f"bad generator name {n!r}")
    return names


def parse_images(text: str) -> tuple[tuple[str, ...], list[Word]]:
    """Lines ``a -> a b`` giving the image of each generator, in order."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise WordError(f"line {lineno}: expected 'g -> word', got {line!r}")
        lhs, rhs = (s.strip() for s in line.split("->", 1))
        entries.append((lineno, lhs, rhs))
    names = tuple(lhs for _, lhs, _ in entries)
    _parse_names(" ".join(names))
    if len(set(names)) != len(names):
        raise WordError("a generator has two images")
    images = []
    for lineno, _, rhs in entries:
        try:
            images.append(parse_word(rhs, names))
        except WordError as exc:
            raise WordError(f"line {lineno}: {exc}") from None
    return names, images


def format_images(names: Sequence[str], images: Sequence[Word]) -> str:
    return "".join(f"{n} -> {w.format(names)}\n" for n, w in zip(names, images))


def default_names(n: int) -> tuple[str, ...]:
    letters = [c for c in "abcdefghijklmnopqrstuvwxy"]
    if n <= len(letters):
        return tuple(letters[:n])
    return tuple(f"a{i + 1}" for i in range(n))


def _check_images(n: int, images: Sequence[Word]) -> list[Word]:
    images = [Word(w).reduce() for w in images]
    if len(images) != n:
        raise WordError(f"expected {n} image words, got {len(images)}")
    for w in images:
        if w.max_generator() > n:
            raise WordError(f"image word {list(w)} uses a generator beyond {n}")
    return images


def pi1_unreduced_torus(n: int, images: Sequence[Word], names: Sequence[str] | None = None,
                        loop: str = "z") -> Presentation:
    """``< a_1..a_n, z | a_i z = z φ(a_i) >`` for a map of a wedge of circles."""
    images = _check_images(n, images)
    names = tuple(names or default_names(n))
    if loop in names:
        raise WordError(f"loop generator {loop!r} clashes with a circle name")
    z = n + 1
    rels = [Word([i + 1, z]) * w.inverse() * Word([-z]) for i, w in enumerate(images)]
    return Presentation(names + (loop,), tuple(rels))


def pi1_reduced_torus(n: int, images: Sequence[Word], names: Sequence[str] | None = None) -> Presentation:
    """``< a_1..a_n | a_i = φ(a_i) >``: the torus with the base circle collapsed."""
    images = _check_images(n, images)
    names = tuple(names or default_names(n))
    return Presentation(names, tuple(Word([i + 1]) * w.inverse() for i, w in enumerate(images)))


# --------------------------------------------------------------------------
# abelianization

def abelianization(P: Presentation) -> HomologyGroup:
    cols = []
    for r in P.relators:
        sums = r.exponent_sums(P.ngens)
        cols.append(tuple((i, v) for i, v in enumerate(sums) if v))
    diag = smith_diagonal(cols, P.ngens) if cols else []
    rank = sum(1 for d in diag if d)
    return HomologyGroup.from_diagonal(P.ngens - rank, [abs(d) for d in diag if d])


# --------------------------------------------------------------------------
# coset tables

def _col(g: int) -> int:
    return 2 * (abs(g) - 1) + (g < 0)


@dataclass(frozen=True)
class CosetTable:
    """Action of the generators on the cosets of a subgroup.

    ``rows[c][2*i]`` is ``c * g_i`` and ``rows[c][2*i+1]`` is ``c * g_i^-1``;
    coset 0 is the subgroup itself. Entries are ``None`` only in open tables.
    """

    ngens: int
    rows: tuple[tuple, ...]
    closed: bool = True

    @property
    def index(self) -> int:
        return len(self.rows)

    def act(self, c: int, w: Iterable[int]) -> int | None:
        for g in w:
            c = self.rows[c][_col(g)]
            if c is None:
                return None
        return c

    def check(self, relators: Iterable[Word] = (), subgroup: Iterable[Word] = ()) -> None:
        """Raise unless the table is complete, consistent and satisfies the
        relators at every coset and the subgroup words at coset 0."""
        n = self.index
        for c, row in enumerate(self.rows):
            if len(row) != 2 * self.ngens:
                raise ValueError(f"row {c} has {len(row)} columns")
            for x, d in enumerate(row):
                if d is None or not 0 <= d < n:
                    raise ValueError(f"entry ({c}, {x}) undefined or out of range")
                if self.rows[d][x ^ 1] != c:
                    raise ValueError(f"columns {x} and {x ^ 1} are not inverse at coset {c}")
        for r in relators:
            for c in range(n):
                if self.act(c, r) != c:
                    raise ValueError(f"relator {list(r)} does not fix coset {c}")
        for w in subgroup:
            if self.act(0, w) != 0:
                raise ValueError(f"subgroup word {list(w)} does not fix coset 0")

    def standardize(self) -> "CosetTable":
        """Renumber cosets in order of first appearance (row by row)."""
        order = {0: 0}
        queue = [0]
        i = 0
        while i < len(queue):
            for d in self.rows[queue[i]]:
                if d is not None and d not in order:
                    order[d] = len(queue)
                    queue.append(d)
            i += 1
        rows = [None] * len(queue)
        for old, new in order.items():
            rows[new] = tuple(None if d is None else order[d] for d in self.rows[old])
        return CosetTable(self.ngens, tuple(rows), self.closed)


class _Enumerator:
    """HLT coset enumeration with lookahead (Holt, Handbook of CGT, ch. 5)."""

    def __init__(self, ngens: int, relators: Sequence[Word], cap: int):
        self.m = 2 * ngens
        self.rels = [tuple(_col(g) for g in r) for r in relators]
        self.table: list[list] = [[None] * self.m]
        self.parent = [0]
        self.live = 1
        self.cap = cap

    def alive(self, c: int) -> bool:
        return self.parent[c] == c

    def find(self, c: int) -> int:
        p = self.parent
        root = c
        while p[root] != root:
            root = p[root]
        while p[c] != root:
            p[c], c = root, p[c]
        return root

    def define(self, c: int, x: int) -> None:
        if self.live >= self.cap:
            self.lookahead()
            if self.live >= self.cap:
                raise CosetLimitError(f"coset enumeration exceeded {self.cap} cosets")
            if not self.alive(c) or self.table[c][x] is not None:
                return
        d = len(self.table)
        self.table.append([None] * self.m)
        self.parent.append(d)
        self.live += 1
        self.table[c][x] = d
        self.table[d][x ^ 1] = c

    def lookahead(self) -> None:
        for c in range(len(self.table)):
            for r in self.rels:
                if not self.alive(c):
                    break
                self.scan(c, r, fill=False)

    def _merge(self, k: int, l: int, queue: list) -> None:
        k, l = self.find(k), self.find(l)
        if k == l:
            return
        if k > l:
            k, l = l, k
        self.parent[l] = k
        self.live -= 1
        queue.append(l)

    def coincidence(self, a: int, b: int) -> None:
        queue: list[int] = []
        self._merge(a, b, queue)
        i = 0
        T = self.table
        while i < len(queue):
            e = queue[i]
            i += 1
            for x in range(self.m):
                f = T[e][x]
                if f is None:
                    continue
                if T[f][x ^ 1] == e:
                    T[f][x ^ 1] = None
                e1, f1 = self.find(e), self.find(f)
                if T[e1][x] is not None:
                    self._merge(f1, T[e1][x], queue)
                elif T[f1][x ^ 1] is not None:
                    self._merge(e1, T[f1][x ^ 1], queue)
                else:
                    T[e1][x] = f1
                    T[f1][x ^ 1] = e1

    def scan(self, c: int, w: Sequence[int], fill: bool = True) -> None:
        T = self.table
        f, b, i, j = c, c, 0, len(w) - 1
        while True:
            while i <= j and T[f][w[i]] is not None:
                f = T[f][w[i]]
                i += 1
            if i > j:
                if f != c:
                    self.coincidence(f, c)
                return
            while j >= i and T[b][w[j] ^ 1] is not None:
                b = T[b][w[j] ^ 1]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                T[f][w[i]] = b
                T[b][w[i] ^ 1] = f
                return
            if not fill:
                return
            self.define(f, w[i])
            if not self.alive(f) or not self.alive(c):
                return

    def run(self, subgroup: Sequence[Word]) -> CosetTable:
        for w in subgroup:
            self.scan(0, [_col(g) for g in w])
        c = 0
        while c < len(self.table):
            if self.alive(c):
                for r in self.rels:
                    if not self.alive(c):
                        break
                    self.scan(c, r)
                for x in range(self.m):
                    if self.alive(c) and self.table[c][x] is None:
                        self.define(c, x)
            c += 1
        live = [c for c in range(len(self.table)) if self.alive(c)]
        pos = {c: i for i, c in enumerate(live)}
        rows = tuple(tuple(pos[self.find(d)] for d in self.table[c]) for c in live)
        return CosetTable(self.m // 2, rows).standardize()


def todd_coxeter(P: Presentation, subgroup: Sequence[Word] = (), coset_limit: int = 10**6) -> CosetTable:
    """Closed coset table of ``<subgroup>`` in ``P``.

    Raises :class:`CosetLimitError` if more than ``coset_limit`` live cosets
    are needed; this says nothing about whether the index is finite.
    """
    if coset_limit < 1:
        raise ValueError("coset_limit must be at least 1")
    subgroup = [Word(w).reduce() for w in subgroup]
    for w in subgroup:
        if w.max_generator() > P.ngens:
            raise WordError(f"subgroup word {list(w)} uses an undeclared generator")
    table = _Enumerator(P.ngens, P.relators, coset_limit).run(subgroup)
    table.check(P.relators, subgroup)
    return table


# --------------------------------------------------------------------------
# Reidemeister-Schreier

def schreier_transversal(table: CosetTable) -> list[Word]:
    """Coset representatives along a breadth-first spanning tree."""
    reps: list[Word | None] = [None] * table.index
    reps[0] = Word()
    queue = deque([0])
    while queue:
        c = queue.popleft()
        for x in range(2 * table.ngens):
            d = table.rows[c][x]
            if reps[d] is None:
                g = x // 2 + 1
                reps[d] = Word(tuple(reps[c]) + ((g if x % 2 == 0 else -g),))
                queue.append(d)
    return reps


@dataclass(frozen=True)
class SubgroupPresentation:
    presentation: Presentation
    generator_words: tuple[Word, ...]     # Schreier generators in the parent's letters
    transversal: tuple[Word, ...]


def subgroup_presentation(P: Presentation, table: CosetTable) -> SubgroupPresentation:
    """Reidemeister-Schreier presentation of the subgroup with the given
    closed coset table."""
    if not table.closed or any(d is None for row in table.rows for d in row):
        raise ValueError("coset table is not closed")
    if table.ngens != P.ngens:
        raise ValueError("coset table and presentation have different generator counts")
    reps = schreier_transversal(table)
    tree = set()
    for d in range(1, table.index):
        last = reps[d][-1]
        c = table.act(d, [-last])
        tree.add((c, abs(last)) if last > 0 else (d, abs(last)))
    symbols: dict[tuple[int, int], int] = {}
    words = []
    for c in range(table.index):
        for g in range(1, P.ngens + 1):
            if (c, g) not in tree:
                symbols[(c, g)] = len(symbols) + 1
                d = table.rows[c][_col(g)]
                words.append(reps[c] * Word([g]) * reps[d].inverse())

    def rewrite(c: int, w: Word) -> Word:
        out = []
        for g in w:
            if g > 0:
                s = symbols.get((c, g))
                if s:
                    out.append(s)
                c = table.rows[c][_col(g)]
            else:
                c = table.rows[c][_col(g)]
                s = symbols.get((c, -g))
                if s:
                    out.append(-s)
        return Word(out)

    rels = [rewrite(c, r) for r in P.relators for c in range(table.index)]
    names = tuple(f"s{i}" for i in range(1, len(symbols) + 1))
    return SubgroupPresentation(Presentation(names, tuple(rels)), tuple(words), tuple(reps))


# --------------------------------------------------------------------------
# low-index subgroups

@dataclass(frozen=True)
class SubgroupRecord:
    index: int
    invariants: HomologyGroup
    generators: tuple[Word, ...] = field(compare=False)
    table: CosetTable = field(compare=False, repr=False)

    def gap_invariants(self) -> list[int]:
        return self.invariants.gap_invariants()

    def sort_key(self):
        return (self.index, self.gap_invariants())


class _LowIndex:
    def __init__(self, P: Presentation, n: int, node_cap: int):
        self.m = 2 * P.ngens
        self.n = n
        self.node_cap = node_cap
        self.nodes = 0
        rels = set()
        for r in P.relators:
            for w in (r, r.inverse()):
                for k in range(len(w)):
                    rels.add(tuple(_col(g) for g in w[k:] + w[:k]))
        self.rels = sorted(rels, key=lambda r: (len(r), r))
        self.found: list[tuple[tuple, ...]] = []

    def search(self):
        table = [[None] * self.m]
        if self._deduce(table) is None:
            return []
        self._extend(table)
        return self.found

    def _first_gap(self, table):
        for c, row in enumerate(table):
            for x, d in enumerate(row):
                if d is None:
                    return c, x
        return None

    def _extend(self, table):
        self.nodes += 1
        if self.nodes > self.node_cap:
            raise SearchLimitError(f"low-index search exceeded {self.node_cap} nodes")
        gap = self._first_gap(table)
        if gap is None:
            if self._canonical(table, complete=True):
                self.found.append(tuple(tuple(r) for r in table))
            return
        c, x = gap
        options = [d for d in range(len(table)) if table[d][x ^ 1] is None]
        if len(table) < self.n:
            options.append(len(table))
        for d in options:
            t = [list(r) for r in table]
            if d == len(t):
                t.append([None] * self.m)
            if t[d][x ^ 1] is not None:
                continue
            t[c][x] = d
            t[d][x ^ 1] = c
            if self._deduce(t) is None:
                continue
            if not self._canonical(t, complete=False):
                continue
            self._extend(t)

    def _deduce(self, t):
        """Close ``t`` under relator deductions; ``None`` on a conflict."""
        changed = True
        while changed:
            changed = False
            for c in range(len(t)):
                for r in self.rels:
                    f, i = c, 0
                    while i < len(r) and t[f][r[i]] is not None:
                        f = t[f][r[i]]
                        i += 1
                    if i == len(r):
                        if f != c:
                            return None
                        continue
                    b, j = c, len(r) - 1
                    while j > i and t[b][r[j] ^ 1] is not None:
                        b = t[b][r[j] ^ 1]
                        j -= 1
                    if j == i:
                        x = r[i]
                        if t[b][x ^ 1] is not None and t[b][x ^ 1] != f:
                            return None
                        t[f][x] = b
                        t[b][x ^ 1] = f
                        changed = True
        return t

    def _canonical(self, t, complete: bool) -> bool:
        """False if renumbering from another coset gives a smaller table."""
        for k in range(1, len(t)):
            order = {k: 0}
            inv = [k]
            verdict = 0
            for row in range(len(t)):
                if row >= len(inv):
                    verdict = 2     # renumbered table runs out: undecided
                    break
                old = inv[row]
                for x in range(self.m):
                    d = t[old][x]
                    mine = t[row][x]
                    if d is None or mine is None:
                        verdict = 2
                        break
                    if d not in order:
                        order[d] = len(inv)
                        inv.append(d)
                    if order[d] != mine:
                        verdict = -1 if order[d] < mine else 1
                        break
                if verdict:
                    break
            if verdict == -1:
                return False
        return True


def low_index_subgroups(P: Presentation, max_index: int, node_cap: int = 10**6) -> list[SubgroupRecord]:
    """One record per conjugacy class of subgroups of index at most
    ``max_index``, sorted by index and then by GAP-style invariants."""
    if max_index < 1:
        raise ValueError("max_index must be at least 1")
    tables = _LowIndex(P, max_index, node_cap).search()
    out = []
    for rows in tables:
        table = CosetTable(P.ngens, rows)
        table.check(P.relators)
        sub = subgroup_presentation(P, table)
        out.append(SubgroupRecord(table.index, abelianization(sub.presentation),
                                  sub.generator_words, table))
    out.sort(key=SubgroupRecord.sort_key)
    return out


# --------------------------------------------------------------------------
# fingerprints and simplification

@dataclass(frozen=True)
class Fingerprint:
    """Computable isomorphism invariants: the abelianization and the
    abelian invariants of the subgroups of index at most ``depth``."""

    depth: int
    abelianization: tuple[int, ...]
    indices: tuple[int, ...]
    invariants: tuple[tuple[int, ...], ...]

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "abelianization": list(self.abelianization),
            "indices": list(self.indices),
            "abelian_invariants": [list(x) for x in self.invariants],
        }


def fingerprint(P: Presentation, depth: int, node_cap: int = 10**6) -> Fingerprint:
    recs = low_index_subgroups(P, depth, node_cap)
    return Fingerprint(
        depth,
        tuple(abelianization(P).gap_invariants()),
        tuple(r.index for r in recs),
        tuple(tuple(r.gap_invariants()) for r in recs),
    )


def simplify(P: Presentation) -> Presentation:
    """Tietze pre-pass: repeatedly drop a generator that occurs exactly once
    in some relator, substituting its solution into the other relators."""
    gens = list(P.generators)
    rels = [Word(r) for r in P.relators]
    while True:
        hit = None
        for k, r in enumerate(sorted(rels, key=len)):
            for g in range(1, len(gens) + 1):
                if sum(1 for x in r if abs(x) == g) == 1:
                    hit = (rels.index(r), r, g)
                    break
            if hit:
                break
        if hit is None:
            break
        k, r, g = hit
        i = next(i for i, x in enumerate(r) if abs(x) == g)
        # r = u g^e v = 1  =>  g^e = u^-1 v^-1
        u, v, e = Word(r[:i]), Word(r[i + 1:]), r[i]
        sol = u.inverse() * v.inverse()
        if e < 0:
            sol = sol.inverse()
        del rels[k]
        new = []
        for w in rels:
            out = []
            for x in w:
                if abs(x) == g:
                    out.extend(sol if x > 0 else sol.inverse())
                else:
                    out.append(x)
            new.append(Word(out))
        rels = [Word(x - 1 if abs(x) > g and x > 0 else x + 1 if abs(x) > g else x for x in w)
                for w in new]
        del gens[g - 1]
    return Presentation(tuple(gens), tuple(rels))
