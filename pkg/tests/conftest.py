import random
from fractions import Fraction
from math import lcm

import pytest

from torusindex.cubical import ChainMap, CubicalSet, Grid, chain_complex
from torusindex.homalg import nullspace_q


def random_cubical_complex(rng: random.Random, shape=(2, 2), density=0.6):
    """Chain complex of a random union of top cells in a small 2D grid."""
    grid = Grid.uniform([(0, shape[0]), (0, shape[1])], shape)
    cells = [c for c in grid.cells() if rng.random() < density] or [grid.cells()[0]]
    return chain_complex(CubicalSet.from_cells(grid, cells))


def random_chain_map(rng: random.Random, A, B, spread=2):
    """Random integer chain map A -> B.

    The entries of every f_n are unknowns; d f = f d is a linear system and a
    random small integer combination of its rational nullspace basis
    (denominators cleared) is a chain map.
    """
    offs, k = [], 0
    for n in range(len(A.basis)):
        offs.append(k)
        k += A.size(n) * B.size(n)

    def var(n, i, j):           # entry (row i of B_n, column j of A_n)
        return offs[n] + i * A.size(n) + j

    rows = []
    for n in range(1, len(A.basis)):
        dA = A.boundary(n)
        dB = B.boundary(n) if n < len(B.basis) else []
        for i in range(B.size(n - 1)):
            for j in range(A.size(n)):
                row = [0] * k
                # (d_B f_n)[i, j] = sum_t dB[i, t] f_n[t, j]
                for t, col in enumerate(dB):
                    for r, v in col:
                        if r == i:
                            row[var(n, t, j)] += v
                # (f_{n-1} d_A)[i, j] = sum_t f_{n-1}[i, t] dA[t, j]
                for t, v in dA[j]:
                    row[var(n - 1, i, t)] -= v
                if any(row):
                    rows.append(row)
    basis = nullspace_q(rows, k) if rows else [[Fraction(int(a == b)) for a in range(k)] for b in range(k)]
    vec = [0] * k
    for b in basis:
        scale = lcm(*(Fraction(x).denominator for x in b)) if b else 1
        c = rng.randint(-spread, spread)
        for idx, x in enumerate(b):
            vec[idx] += c * int(x * scale)
    dense = []
    for n in range(len(A.basis)):
        M = [[vec[var(n, i, j)] for j in range(A.size(n))] for i in range(B.size(n))]
        dense.append(M)
    phi = ChainMap.from_dense(A, B, dense)
    phi.check()
    return phi


@pytest.fixture
def rng():
    return random.Random(20261018)
