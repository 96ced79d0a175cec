"""Exact integer linear algebra over the ambient lattice Z^n.

Vectors are tuples of Python ints and matrices are tuples of row tuples.
Python integers never wrap, but every public routine still refuses values
outside the signed 64-bit range so that data handed to the compiled kernels
in :mod:`toric_sarkisov._kernels` is always representable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

Rational = Fraction
IntVector = tuple[int, ...]
IntMatrix = tuple[IntVector, ...]

INT64_MAX = 2**63 - 1

# Per-call verification of transforms; switched on by the test suite.
CHECKS = os.environ.get("TORIC_SARKISOV_CHECKS", "") not in ("", "0")


class LatticeError(ValueError):
    pass


class LatticeOverflowError(OverflowError):
    pass


def check_int64(values: Iterable[int]) -> None:
    for x in values:
        if x > INT64_MAX or x < -INT64_MAX:
            raise LatticeOverflowError(f"integer {x} exceeds the 64-bit range")


def as_matrix(rows: Sequence[Sequence[int]]) -> IntMatrix:
    m = tuple(tuple(int(x) for x in row) for row in rows)
    if m and any(len(r) != len(m[0]) for r in m):
        raise LatticeError("ragged matrix")
    for row in m:
        check_int64(row)
    return m


def transpose(M: Sequence[Sequence[int]]) -> IntMatrix:
    return tuple(zip(*M)) if M else ()


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> tuple:
    Bt = list(zip(*B))
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in Bt) for row in A)


def matvec(A: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(sum(a * x for a, x in zip(row, v)) for row in A)


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def vgcd(v: Iterable[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, x)
    return g


def primitive_part(v: Sequence[int]) -> tuple[IntVector, int]:
    """Split ``v`` as ``g * w`` with ``w`` primitive and ``g > 0``."""
    v = tuple(int(x) for x in v)
    g = vgcd(v)
    if g == 0:
        raise LatticeError("zero vector has no primitive part")
    return tuple(x // g for x in v), g


def det(M: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (fraction-free Bareiss)."""
    n = len(M)
    if n == 0:
        return 1
    A = [list(row) for row in M]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * A[n - 1][n - 1]


def adjugate(M: Sequence[Sequence[int]]) -> IntMatrix:
    """Integer adjugate, so that ``M @ adj(M) == det(M) * I``."""
    n = len(M)
    if n == 1:
        return ((1,),)
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1 :] for k, row in enumerate(M) if k != i]
            adj[j][i] = (-1) ** (i + j) * det([list(r) for r in minor])
    return tuple(tuple(r) for r in adj)


def rank(M: Sequence[Sequence[int]]) -> int:
    if not M:
        return 0
    return sum(1 for row in hermite_form(M) if any(row))


def solve(S: Sequence[Sequence[int]], b: Sequence) -> tuple[Fraction, ...]:
    """Exact solution of the square system ``S x = b``."""
    D = det(S)
    if D == 0:
        raise LatticeError("degenerate configuration")
    return tuple(Fraction(x) / D for x in matvec(adjugate(S), b))


def _swap_rows(A, i, j):
    A[i], A[j] = A[j], A[i]


def _swap_cols(A, i, j):
    for row in A:
        row[i], row[j] = row[j], row[i]


@dataclass(frozen=True)
class SmithData:
    """``U @ M @ V == diag(factors)`` with unimodular ``U`` and ``V``.

    ``factors`` has length ``min(rows, cols)``; trailing zeros record rank
    deficiency.
    """

    factors: IntVector
    U: IntMatrix
    V: IntMatrix

    @property
    def rank(self) -> int:
        return sum(1 for d in self.factors if d)

    @property
    def invariant_factors(self) -> IntVector:
        return tuple(d for d in self.factors if d)

    def diagonal(self) -> IntMatrix:
        m, n = len(self.U), len(self.V)
        return tuple(
            tuple(self.factors[i] if i == j and i < len(self.factors) else 0 for j in range(n))
            for i in range(m)
        )


def smith_form(M: Sequence[Sequence[int]]) -> SmithData:
    A = [list(r) for r in as_matrix(M)]
    m = len(A)
    n = len(A[0]) if m else 0
    U = identity(m)
    V = identity(n)
    for k in range(min(m, n)):
        while True:
            piv = None
            best = 0
            for i in range(k, m):
                row = A[i]
                for j in range(k, n):
                    x = row[j]
                    if x and (piv is None or abs(x) < best):
                        piv, best = (i, j), abs(x)
                        if best == 1:
                            break
                if best == 1:
                    break
            if piv is None:
                break
            i, j = piv
            if i != k:
                _swap_rows(A, i, k)
                _swap_rows(U, i, k)
            if j != k:
                _swap_cols(A, j, k)
                _swap_cols(V, j, k)
            p = A[k][k]
            clean = True
            for i in range(k + 1, m):
                q = A[i][k] // p
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[k])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[k])]
                if A[i][k]:
                    clean = False
            for j in range(k + 1, n):
                q = A[k][j] // p
                if q:
                    for row in A:
                        row[j] -= q * row[k]
                    for row in V:
                        row[j] -= q * row[k]
                if A[k][j]:
                    clean = False
            if not clean:
                continue
            bad = next(
                (i for i in range(k + 1, m) for j in range(k + 1, n) if A[i][j] % p),
                None,
            )
            if bad is not None:
                A[k] = [a + b for a, b in zip(A[k], A[bad])]
                U[k] = [a + b for a, b in zip(U[k], U[bad])]
                continue
            break
        if A[k][k] < 0:
            A[k] = [-a for a in A[k]]
            U[k] = [-a for a in U[k]]
    factors = tuple(A[i][i] for i in range(min(m, n)))
    for row in (*U, *V):
        check_int64(row)
    data = SmithData(factors, tuple(map(tuple, U)), tuple(map(tuple, V)))
    if CHECKS:
        assert matmul(matmul(data.U, M), data.V) == data.diagonal() if m and n else True
        assert abs(det(data.U)) == 1 and abs(det(data.V)) == 1
        nz = data.invariant_factors
        assert all(nz[i + 1] % nz[i] == 0 for i in range(len(nz) - 1))
    return data


def hermite_form(M: Sequence[Sequence[int]], with_transform: bool = False):
    """Row-style Hermite normal form ``H = U @ M``.

    Pivots are positive and entries above a pivot are reduced into
    ``[0, pivot)``; zero rows sit at the bottom.
    """
    A = [list(r) for r in as_matrix(M)]
    m = len(A)
    n = len(A[0]) if m else 0
    U = identity(m)
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            rows = [i for i in range(r, m) if A[i][c]]
            if not rows:
                break
            i = min(rows, key=lambda i: abs(A[i][c]))
            if i != r:
                _swap_rows(A, i, r)
                _swap_rows(U, i, r)
            done = True
            for i in range(r + 1, m):
                if A[i][c]:
                    q = A[i][c] // A[r][c]
                    A[i] = [a - q * b for a, b in zip(A[i], A[r])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[r])]
                    if A[i][c]:
                        done = False
            if done:
                break
        if r < m and A[r][c]:
            if A[r][c] < 0:
                A[r] = [-a for a in A[r]]
                U[r] = [-a for a in U[r]]
            p = A[r][c]
            for i in range(r):
                q = A[i][c] // p
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[r])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[r])]
            r += 1
    H = tuple(map(tuple, A))
    for row in H:
        check_int64(row)
    if with_transform:
        return H, tuple(map(tuple, U))
    return H


def sublattice_index(rays: Sequence[Sequence[int]]) -> int:
    """Index in Z^n of the lattice generated by ``rays``."""
    rays = as_matrix(rays)
    if not rays:
        raise LatticeError("degenerate configuration")
    n = len(rays[0])
    snf = smith_form(transpose(rays))
    if snf.rank < n:
        raise LatticeError("degenerate configuration")
    out = 1
    for d in snf.invariant_factors:
        out *= d
    return out


def kernel_basis(M: Sequence[Sequence[int]]) -> IntMatrix:
    """Saturated basis (as rows, in Hermite form) of ``{x in Z^n : M x = 0}``."""
    M = as_matrix(M)
    if not M:
        raise LatticeError("empty matrix")
    n = len(M[0])
    snf = smith_form(M)
    r = snf.rank
    cols = [tuple(snf.V[i][j] for i in range(n)) for j in range(r, n)]
    if not cols:
        return ()
    K = hermite_form(cols)
    return tuple(row for row in K if any(row))


def box_group(rays: Sequence[Sequence[int]]) -> tuple[int, np.ndarray, np.ndarray]:
    """Generators of ``Z^n / <rays>`` as barycentric vectors scaled by |det|.

    Returns ``(D, gens, orders)``: column ``j`` of ``gens`` holds ``D * t``
    for the ``j``-th cyclic generator, which has order ``orders[j]``.
    ``rays`` are the columns' generators given as rows.
    """
    S = transpose(rays)
    snf = smith_form(S)
    n = len(S)
    if snf.rank < n:
        raise LatticeError("rays are linearly dependent")
    D = 1
    for d in snf.factors:
        D *= d
    idx = [j for j, d in enumerate(snf.factors) if d > 1]
    gens = np.zeros((n, len(idx)), dtype=np.int64)
    orders = np.zeros(len(idx), dtype=np.int64)
    for c, j in enumerate(idx):
        d = snf.factors[j]
        orders[c] = d
        for i in range(n):
            gens[i, c] = (snf.V[i][j] * (D // d)) % D
    return D, gens, orders


def box_points(rays: Sequence[Sequence[int]]) -> list[tuple[IntVector, tuple[Fraction, ...]]]:
    """All lattice points ``sum t_i r_i`` with every ``t_i`` in ``[0, 1)``.

    Exactly ``|det|`` points, the origin included, each paired with its
    barycentric coefficients; sorted by coefficient vector.
    """
    rays = as_matrix(rays)
    D, gens, orders = box_group(rays)
    T = _kernels.group_elements(gens, orders, D)
    out = []
    for row in T:
        t = tuple(Fraction(int(x), D) for x in row)
        p = tuple(sum(int(x) * r[i] for x, r in zip(row, rays)) // D for i in range(len(rays[0])))
        out.append((p, t))
    out.sort(key=lambda pt: pt[1])
    return out


def box_points_scan(rays: Sequence[Sequence[int]]) -> list[tuple[IntVector, tuple[Fraction, ...]]]:
    """Bounding-box oracle for :func:`box_points`; slow, for tests only."""
    rays = as_matrix(rays)
    n = len(rays[0])
    S = transpose(rays)
    D = det(S)
    if D == 0:
        raise LatticeError("rays are linearly dependent")
    # integer adjugate, so t = adj @ p / D without any division in the loop
    adj = np.array(
        [[(-1) ** (i + j) * det([r[:i] + r[i + 1 :] for k, r in enumerate(S) if k != j]) for j in range(n)] for i in range(n)],
        dtype=np.int64,
    )
    if D < 0:
        adj, D = -adj, -D
    lo = [sum(min(0, r[i]) for r in rays) for i in range(n)]
    hi = [sum(max(0, r[i]) for r in rays) for i in range(n)]
    grid = np.array(list(product(*(range(a, b + 1) for a, b in zip(lo, hi)))), dtype=np.int64)
    num = grid @ adj.T
    keep = np.all((num >= 0) & (num < D), axis=1)
    out = [
        (tuple(int(x) for x in p), tuple(Fraction(int(x), D) for x in t)) for p, t in zip(grid[keep], num[keep])
    ]
    out.sort(key=lambda pt: pt[1])
    return out
