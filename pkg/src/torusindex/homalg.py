"""Exact integer linear algebra: Smith normal form, homology, induced maps,
rational canonical form.

Matrices are plain lists of rows of Python ints (or Fractions for the
rational routines); Python ints are arbitrary precision so no coefficient
growth is ever truncated.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list[int]]


class BoundaryError(ValueError):
    """Raised when a purported chain complex has a nonzero ``d∘d``."""


@dataclass(frozen=True, order=True)
class HomologyGroup:
    """A finitely generated abelian group ``Z^betti + Z/t1 + ... + Z/tk``.

    Torsion coefficients are kept in invariant-factor form: each entry is at
    least 2 and divides the next.
    """

    betti: int = 0
    torsion: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.betti < 0:
            raise ValueError("betti number must be nonnegative")
        t = tuple(int(x) for x in self.torsion)
        if any(x < 2 for x in t):
            raise ValueError(f"torsion entries must be >= 2, got {t}")
        if any(t[i + 1] % t[i] for i in range(len(t) - 1)):
            raise ValueError(f"torsion must form a divisibility chain, got {t}")
        object.__setattr__(self, "torsion", t)

    @classmethod
    def from_diagonal(cls, free: int, diagonal: Sequence[int]) -> "HomologyGroup":
        """Group ``Z^free + sum Z/d`` for arbitrary nonnegative ``d`` (0 means Z)."""
        extra = sum(1 for d in diagonal if d == 0)
        return cls(free + extra, tuple(invariant_factors_of(d for d in diagonal if d > 1)))

    @property
    def is_trivial(self) -> bool:
        return self.betti == 0 and not self.torsion

    def gap_invariants(self) -> list[int]:
        """Abelian invariants in GAP's convention: 0 per free factor, then
        the prime-power decomposition of the torsion, sorted."""
        out = [0] * self.betti
        for t in self.torsion:
            out.extend(_prime_powers(t))
        return sorted(out)

    def to_json(self, degree: int | None = None) -> dict:
        d = {"betti": self.betti, "torsion": list(self.torsion)}
        if degree is not None:
            d = {"degree": degree, **d}
        return d

    def __str__(self) -> str:
        parts = []
        if self.betti == 1:
            parts.append("Z")
        elif self.betti > 1:
            parts.append(f"Z^{self.betti}")
        parts.extend(f"Z/{t}" for t in self.torsion)
        return " + ".join(parts) if parts else "0"


def _prime_powers(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            q = 1
            while n % p == 0:
                n //= p
                q *= p
            out.append(q)
        p += 1
    if n > 1:
        out.append(n)
    return out


def normalize_diagonal(values) -> list[int]:
    """Rewrite a multiset of nonzero diagonal entries (absolute values) as a
    divisibility chain of the same length describing the same group."""
    vals = sorted(abs(v) for v in values)
    # repeated (gcd, lcm) replacement converges to the invariant-factor form
    changed = True
    while changed:
        changed = False
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                a, b = vals[i], vals[j]
                if b % a:
                    g = gcd(a, b)
                    vals[i], vals[j] = g, a * b // g
                    changed = True
        vals.sort()
    return vals


def invariant_factors_of(values) -> list[int]:
    """Torsion coefficients (entries >= 2, divisibility chain) of the group
    presented by the given diagonal entries."""
    return [v for v in normalize_diagonal(v for v in values if v) if v > 1]


# --------------------------------------------------------------------------
# dense helpers

def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(m: int, n: int) -> Matrix:
    return [[0] * n for _ in range(m)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    if not A:
        return []
    inner = len(B)
    ncols = len(B[0]) if B else 0
    if any(len(row) != inner for row in A):
        raise ValueError("matrix shapes do not match")
    Bt = list(zip(*B)) if B else [() for _ in range(ncols)]
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A: Sequence[Sequence], x: Sequence) -> list:
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def transpose(A: Sequence[Sequence], ncols: int | None = None) -> list[list]:
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def determinant(A: Sequence[Sequence]) -> Fraction:
    """Exact determinant by Gaussian elimination over Q."""
    M = [[Fraction(x) for x in row] for row in A]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            if M[r][c]:
                f = M[r][c] / M[c][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return det


# --------------------------------------------------------------------------
# Smith normal form with transforms

@dataclass
class SmithForm:
    """``U @ A @ V == D`` with ``U``, ``V`` unimodular.

    ``Uinv`` and ``Vinv`` are maintained alongside so that coordinates can be
    moved between bases without a separate inversion.
    """

    U: Matrix
    D: Matrix
    V: Matrix
    Uinv: Matrix
    Vinv: Matrix

    @property
    def diagonal(self) -> list[int]:
        return [self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)

    def __iter__(self):
        yield self.U
        yield self.D
        yield self.V


def smith_normal_form(A: Sequence[Sequence[int]], ncols: int | None = None) -> SmithForm:
    """Smith normal form of an integer matrix.

    ``ncols`` is needed only to describe an ``m x n`` matrix with ``m == 0``.
    Pivots are chosen with minimal absolute value to keep intermediate
    entries small.
    """
    m = len(A)
    n = len(A[0]) if m else (ncols or 0)
    D = [[int(x) for x in row] for row in A]
    U, Uinv = identity(m), identity(m)
    V, Vinv = identity(n), identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]
        for row in Uinv:
            row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def add_row(src, dst, k):
        # row_dst += k * row_src
        if k:
            D[dst] = [a + k * b for a, b in zip(D[dst], D[src])]
            U[dst] = [a + k * b for a, b in zip(U[dst], U[src])]
            for row in Uinv:
                row[src] -= k * row[dst]

    def add_col(src, dst, k):
        # col_dst += k * col_src
        if k:
            for row in D:
                row[dst] += k * row[src]
            for row in V:
                row[dst] += k * row[src]
            Vinv[src] = [a - k * b for a, b in zip(Vinv[src], Vinv[dst])]

    def negate_row(i):
        D[i] = [-a for a in D[i]]
        U[i] = [-a for a in U[i]]
        for row in Uinv:
            row[i] = -row[i]

    t = 0
    while t < min(m, n):
        # minimal nonzero entry in the trailing block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = D[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = D[t][t]
            dirty = False
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(t, i, -(D[i][t] // p))
                    if D[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(t, j, -(D[t][j] // p))
                    if D[t][j]:
                        dirty = True
            if dirty:
                # move the smallest remainder into the pivot slot and retry
                cand = [(abs(D[i][t]), i, t) for i in range(t + 1, m) if D[i][t]]
                cand += [(abs(D[t][j]), t, j) for j in range(t + 1, n) if D[t][j]]
                _, i, j = min(cand)
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            # pivot must divide the whole trailing block
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if D[i][j] % p), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if D[t][t] < 0:
            negate_row(t)
        t += 1
    return SmithForm(U, D, V, Uinv, Vinv)


# --------------------------------------------------------------------------
# sparse diagonalization (no transforms) for homology of larger complexes

def smith_diagonal(columns: Sequence[Sequence[tuple[int, int]]], nrows: int) -> list[int]:
    """Nonzero Smith invariants of a sparse matrix given column-major as
    lists of ``(row, value)``; returns the divisibility-normalized list."""
    rows: dict[int, dict[int, int]] = {}
    cols: dict[int, set[int]] = {}
    for j, col in enumerate(columns):
        for i, v in col:
            if v:
                rows.setdefault(i, {})[j] = rows.get(i, {}).get(j, 0) + v
    for i in list(rows):
        rows[i] = {j: v for j, v in rows[i].items() if v}
        if not rows[i]:
            del rows[i]
        for j in rows.get(i, ()):
            cols.setdefault(j, set()).add(i)

    def set_entry(i, j, v):
        if v:
            rows.setdefault(i, {})[j] = v
            cols.setdefault(j, set()).add(i)
        else:
            r = rows.get(i)
            if r is not None and j in r:
                del r[j]
                if not r:
                    del rows[i]
                c = cols[j]
                c.discard(i)
                if not c:
                    del cols[j]

    diag = []
    while rows:
        # prefer unit pivots in short rows; fall back to minimal magnitude
        best = None
        for i, r in rows.items():
            for j, v in r.items():
                key = (abs(v), len(r) + len(cols[j]))
                if best is None or key < best[0]:
                    best = (key, i, j)
            if best[0][0] == 1 and best[0][1] <= 4:
                break
        _, pi, pj = best
        while True:
            p = rows[pi][pj]
            dirty = False
            for i in sorted(cols[pj] - {pi}):
                q = rows[i][pj] // p
                for j, v in list(rows[pi].items()):
                    set_entry(i, j, rows.get(i, {}).get(j, 0) - q * v)
                if pj in rows.get(i, {}):
                    dirty = True
            for j in sorted(set(rows[pi]) - {pj}):
                q = rows[pi][j] // p
                for i in list(cols[pj]):
                    set_entry(i, j, rows.get(i, {}).get(j, 0) - q * rows[i][pj])
                if j in rows.get(pi, {}):
                    dirty = True
            if not dirty:
                break
            # a smaller remainder exists in the pivot row or column
            cand = [(abs(rows[i][pj]), i, pj) for i in cols[pj]]
            cand += [(abs(v), pi, j) for j, v in rows[pi].items()]
            _, pi, pj = min(cand)
        diag.append(abs(rows[pi][pj]))
        set_entry(pi, pj, 0)
    return normalize_diagonal(diag)


# --------------------------------------------------------------------------
# homology

def homology(complex_) -> list[HomologyGroup]:
    """Integral homology ``H_n = ker d_n / im d_{n+1}`` in every degree of a
    chain complex (anything exposing ``sizes`` and ``boundary(n)``)."""
    check_boundary(complex_)
    sizes = complex_.sizes
    top = len(sizes)
    ranks, torsions = [0] * (top + 1), [[] for _ in range(top + 1)]
    for n in range(1, top):
        diag = smith_diagonal(complex_.boundary(n), sizes[n - 1])
        ranks[n] = len(diag)
        torsions[n] = [d for d in diag if d > 1]
    return [HomologyGroup(sizes[n] - ranks[n] - ranks[n + 1], tuple(torsions[n + 1]))
            for n in range(top)]


def check_boundary(complex_) -> None:
    """Raise :class:`BoundaryError` unless ``d_{n-1} d_n == 0`` everywhere."""
    for n in range(2, len(complex_.sizes)):
        lower = complex_.boundary(n - 1)
        for j, col in enumerate(complex_.boundary(n)):
            acc: dict[int, int] = {}
            for i, v in col:
                for k, w in lower[i]:
                    acc[k] = acc.get(k, 0) + v * w
            if any(acc.values()):
                raise BoundaryError(f"d{n-1} d{n} != 0 at column {j} of degree {n}")


@dataclass
class HomologyBasis:
    """SNF-derived generators of ``H_n`` and a projector onto them.

    ``cycles`` are chain-coordinate columns: first the torsion generators
    (order given by ``torsion``), then the free generators.
    """

    degree: int
    group: HomologyGroup
    torsion_cycles: list[list[int]]
    free_cycles: list[list[int]]
    _to_kernel: Matrix        # chain coords -> kernel coords (rows of Vinv)
    _kernel_to_h: Matrix      # kernel coords -> adapted coords (U of the B->Z SNF)
    _orders: list[int]        # diagonal entry per adapted coordinate (0 = free)

    def coordinates(self, cycle: Sequence[int]) -> tuple[list[int], list[int]]:
        """Coordinates of a cycle: (torsion residues, free coordinates)."""
        k = matvec(self._to_kernel, cycle)
        y = matvec(self._kernel_to_h, k)
        tors, free = [], []
        for yi, d in zip(y, self._orders):
            if d == 0:
                free.append(yi)
            elif d > 1:
                tors.append(yi % d)
        return tors, free


def homology_basis(complex_, n: int) -> HomologyBasis:
    sizes = complex_.sizes
    cn = sizes[n] if n < len(sizes) else 0
    dn = _dense(complex_.boundary(n), sizes[n - 1] if n > 0 else 0, cn) if n > 0 else zeros(0, cn)
    up = _dense(complex_.boundary(n + 1), cn, sizes[n + 1]) if n + 1 < len(sizes) else zeros(cn, 0)

    # kernel of d_n: the columns of V past the rank
    snf = smith_normal_form(dn, ncols=cn)
    r = snf.rank
    kernel = [[snf.V[i][j] for i in range(cn)] for j in range(r, cn)]   # list of columns
    to_kernel = [snf.Vinv[j][:] for j in range(r, cn)]

    # express image of d_{n+1} in kernel coordinates, then diagonalize
    k = len(kernel)
    B = matmul(to_kernel, up) if k else []
    nb = len(up[0]) if up else 0
    snf2 = smith_normal_form(B, ncols=nb) if k else None
    if snf2 is None:
        diag, Umat, Uinv = [], identity(0), identity(0)
    else:
        diag, Umat, Uinv = snf2.diagonal, snf2.U, snf2.Uinv
    orders = [diag[i] if i < len(diag) else 0 for i in range(k)]
    # adapted kernel basis = kernel @ Uinv
    adapted = [[sum(kernel[c][i] * Uinv[c][j] for c in range(k)) for i in range(cn)]
               for j in range(k)]
    torsion_cycles = [adapted[j] for j in range(k) if orders[j] > 1]
    free_cycles = [adapted[j] for j in range(k) if orders[j] == 0]
    group = HomologyGroup(len(free_cycles), tuple(d for d in orders if d > 1))
    return HomologyBasis(n, group, torsion_cycles, free_cycles, to_kernel, Umat, orders)


def _dense(columns, nrows: int, ncols: int) -> Matrix:
    M = zeros(nrows, ncols)
    for j, col in enumerate(columns):
        for i, v in col:
            M[i][j] += v
    return M


def induced_map_on_homology(chain_map, n: int) -> tuple[Matrix, Matrix]:
    """Matrix of ``phi_*`` on ``H_n`` in the SNF-derived bases.

    Returns ``(free, torsion)``: ``free[i][j]`` is the i-th free coordinate of
    the image of the j-th free generator; ``torsion[i][j]`` the i-th torsion
    residue of the image of the j-th torsion generator.
    """
    chain_map.check()
    src = homology_basis(chain_map.source, n)
    dst = homology_basis(chain_map.target, n)
    free, tors = [], []
    for z in src.free_cycles:
        t, f = dst.coordinates(chain_map.apply(n, z))
        free.append(f)
    for z in src.torsion_cycles:
        t, f = dst.coordinates(chain_map.apply(n, z))
        tors.append(t)
    return (transpose(free, len(dst.free_cycles)) if free else [[] for _ in dst.free_cycles],
            transpose(tors, len(dst.torsion_cycles)) if tors else [[] for _ in dst.torsion_cycles])


# --------------------------------------------------------------------------
# rational matrices and canonical form

def to_fraction_matrix(A) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in A]


def rref(A: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q and the pivot columns."""
    M = to_fraction_matrix(A)
    m = len(M)
    n = len(M[0]) if m else 0
    # sparse rows: column -> nonzero value
    rows = [{j: x for j, x in enumerate(row) if x} for row in M]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if c in rows[i]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][c]
        prow = {j: x / pv for j, x in rows[r].items()}
        rows[r] = prow
        for i in range(m):
            if i != r and c in rows[i]:
                f = rows[i][c]
                row = rows[i]
                for j, x in prow.items():
                    y = row.get(j, 0) - f * x
                    if y:
                        row[j] = y
                    else:
                        row.pop(j, None)
        pivots.append(c)
        r += 1
        if r == m:
            break
    R = [[row.get(j, Fraction(0)) for j in range(n)] for row in rows]
    return R, pivots


def rank_q(A) -> int:
    return len(rref(A)[1]) if A and A[0] else 0


def nullspace_q(A, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis (as vectors) of the rational nullspace."""
    n = len(A[0]) if A else (ncols or 0)
    if not A:
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    R, piv = rref(A)
    free = [c for c in range(n) if c not in piv]
    out = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(R, piv):
            v[pc] = -row[f]
        out.append(v)
    return out


# polynomials over Q: coefficient lists, lowest degree first, no trailing zeros

def _ptrim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _padd(p, q):
    n = max(len(p), len(q))
    return _ptrim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def _pmul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _ptrim(out)


def _pdivmod(p, q):
    p = list(p)
    quot = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    lead = q[-1]
    while len(p) >= len(q) and p:
        k = len(p) - len(q)
        c = p[-1] / lead
        quot[k] = c
        for i, b in enumerate(q):
            p[i + k] -= c * b
        _ptrim(p)
    return _ptrim(quot), p


def _monic(p):
    return [c / p[-1] for c in p] if p else []


def rational_canonical_form(A: Sequence[Sequence]) -> list[tuple[Fraction, ...]]:
    """Invariant factors of a square rational matrix.

    Each factor is a monic polynomial given as a coefficient tuple (constant
    term first); each divides the next, and two matrices are similar over Q
    exactly when these lists agree. Computed as the Smith form of ``xI - A``
    over ``Q[x]``.
    """
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("matrix must be square")
    M = [[_ptrim([-Fraction(A[i][j]), Fraction(int(i == j))]) for j in range(n)]
         for i in range(n)]
    diag = []
    t = 0
    while t < n:
        best = None
        for i in range(t, n):
            for j in range(t, n):
                if M[i][j] and (best is None or len(M[i][j]) < best[0]):
                    best = (len(M[i][j]), i, j)
        if best is None:
            diag.extend([[]] * (n - t))
            break
        _, i, j = best
        M[t], M[i] = M[i], M[t]
        for row in M:
            row[t], row[j] = row[j], row[t]
        while True:
            p = M[t][t]
            dirty = False
            for i in range(t + 1, n):
                if M[i][t]:
                    q, _ = _pdivmod(M[i][t], p)
                    M[i] = [_padd(a, _pmul([-c for c in q], b)) for a, b in zip(M[i], M[t])]
                    dirty |= bool(M[i][t])
            for j in range(t + 1, n):
                if M[t][j]:
                    q, _ = _pdivmod(M[t][j], p)
                    negq = [-c for c in q]
                    for row in M:
                        row[j] = _padd(row[j], _pmul(negq, row[t]))
                    dirty |= bool(M[t][j])
            if dirty:
                cand = [(len(M[i][t]), i, t) for i in range(t + 1, n) if M[i][t]]
                cand += [(len(M[t][j]), t, j) for j in range(t + 1, n) if M[t][j]]
                _, i, j = min(cand)
                M[t], M[i] = M[i], M[t]
                for row in M:
                    row[t], row[j] = row[j], row[t]
                continue
            bad = next((i for i in range(t + 1, n) for j in range(t + 1, n)
                        if M[i][j] and _pdivmod(M[i][j], p)[1]), None)
            if bad is None:
                break
            M[t] = [_padd(a, b) for a, b in zip(M[t], M[bad])]
        diag.append(_monic(M[t][t]))
        t += 1
    return [tuple(p) for p in diag if len(p) > 1]


def format_polynomial(coeffs: Sequence[Fraction], var: str = "x") -> str:
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if mono and c in (1, -1):
            s = ("-" if c < 0 else "+") + mono
        else:
            s = ("-" if c < 0 else "+") + str(abs(c)) + mono
        terms.append(s)
    out = "".join(terms).lstrip("+")
    return out or "0"
