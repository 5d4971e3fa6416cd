"""Shift equivalence of linear endomorphisms over Q.

Over a field two endomorphisms are shift equivalent exactly when their
invertible parts, the restrictions to the eventual images, are similar.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .homalg import determinant, format_polynomial, matmul, rational_canonical_form, rref
from .interval import to_rational

Matrix = list[list[Fraction]]


def as_matrix(A) -> Matrix:
    """Square rational matrix from nested lists of ints, Fractions or
    ``"p/q"`` strings."""
    M = [[to_rational(x) for x in row] for row in A]
    if any(len(row) != len(M) for row in M):
        raise ValueError("matrix must be square")
    return M


def _power(A: Matrix, k: int) -> Matrix:
    n = len(A)
    R = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for _ in range(k):
        R = matmul(A, R)
    return R


def invertible_part(A) -> Matrix:
    """Matrix of ``A`` restricted to ``im(A^n)`` (``n`` = size) in an
    echelon basis of that image. The result is invertible, possibly 0x0."""
    A = as_matrix(A)
    n = len(A)
    if n == 0:
        return []
    P = _power(A, n)
    # column space basis of A^n: pivot rows of rref(P^T)
    R, piv = rref([list(col) for col in zip(*P)])
    basis = [R[i] for i in range(len(piv))]
    k = len(basis)
    if k == 0:
        return []
    # coordinates of A b_j in the basis: basis vectors have unit pivots
    out = [[Fraction(0)] * k for _ in range(k)]
    for j, b in enumerate(basis):
        Ab = [sum(A[i][t] * b[t] for t in range(n)) for i in range(n)]
        for i, p in enumerate(piv):
            out[i][j] = Ab[p]
    if determinant(out) == 0:
        raise ArithmeticError("restriction to the eventual image is singular")
    return out


def shift_equivalent(A, B) -> bool:
    """Shift equivalence over Q (sizes may differ)."""
    return rational_canonical_form(invertible_part(A)) == rational_canonical_form(invertible_part(B))


@dataclass(frozen=True)
class DegreeVerdict:
    degree: int
    equivalent: bool
    invariants_a: tuple[str, ...]
    invariants_b: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "shift_equivalent": self.equivalent,
            "invariant_factors_a": list(self.invariants_a),
            "invariant_factors_b": list(self.invariants_b),
        }


def _factors(A) -> tuple[str, ...]:
    return tuple(format_polynomial(p) for p in rational_canonical_form(invertible_part(A)))


def compare_homological_indices(maps_a: Mapping[int, Sequence] | Sequence,
                                maps_b: Mapping[int, Sequence] | Sequence) -> tuple[bool, list[DegreeVerdict]]:
    """Degree-wise shift equivalence; missing degrees count as 0x0 maps.

    Inputs are dicts ``degree -> matrix`` or lists indexed by degree.
    """
    a = dict(maps_a) if isinstance(maps_a, Mapping) else dict(enumerate(maps_a))
    b = dict(maps_b) if isinstance(maps_b, Mapping) else dict(enumerate(maps_b))
    verdicts = []
    for n in sorted(set(a) | set(b)):
        fa, fb = _factors(a.get(n, [])), _factors(b.get(n, []))
        verdicts.append(DegreeVerdict(n, fa == fb, fa, fb))
    return all(v.equivalent for v in verdicts), verdicts


def parse_matrix_json(text: str) -> Matrix:
    return as_matrix(json.loads(text))


def parse_graded_json(text: str) -> dict[int, Matrix]:
    """``{"1": [[...]], ...}`` or a list of matrices indexed by degree."""
    data = json.loads(text)
    if isinstance(data, dict):
        return {int(k): as_matrix(v) for k, v in data.items()}
    if data and all(isinstance(x, list) and (not x or isinstance(x[0], list)) for x in data):
        return {n: as_matrix(m) for n, m in enumerate(data)}
    return {0: as_matrix(data)}
