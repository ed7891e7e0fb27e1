"""
Linear algebra over the residue field F_p.

Vectors are tuples of residues, matrices are row-major tuples of rows. Tangent
classes of a ball are indexed in lexicographic residue order, first
coordinate most significant.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import List, Sequence, Tuple

from .errors import InvalidDirection

Vector = Tuple[int, ...]
Matrix = Tuple[Tuple[int, ...], ...]


@lru_cache(maxsize=None)
def all_classes(p: int, d: int) -> Tuple[Vector, ...]:
    return tuple(product(range(p), repeat=d))


def class_index(c: Sequence[int], p: int) -> int:
    index = 0
    for residue in c:
        index = index * p + residue
    return index


def class_from_index(index: int, p: int, d: int) -> Vector:
    residues = [0] * d
    for i in range(d - 1, -1, -1):
        index, residues[i] = divmod(index, p)
    return tuple(residues)


def vec_add(a: Sequence[int], b: Sequence[int], p: int) -> Vector:
    return tuple((x + y) % p for x, y in zip(a, b))


def vec_sub(a: Sequence[int], b: Sequence[int], p: int) -> Vector:
    return tuple((x - y) % p for x, y in zip(a, b))


def vec_scale(c: int, a: Sequence[int], p: int) -> Vector:
    return tuple((c * x) % p for x in a)


def mat_vec(m: Matrix, v: Sequence[int], p: int) -> Vector:
    return tuple(sum(a * x for a, x in zip(row, v)) % p for row in m)


def mat_mul(a: Matrix, b: Matrix, p: int) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) % p for col in cols) for row in a)


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m))


def identity(d: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def _eliminate(rows: List[List[int]], p: int) -> Tuple[int, int]:
    """In-place row reduction; returns (rank, determinant of the square prefix)."""
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    det = 1
    rank = 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if rows[r][col] % p), None)
        if pivot is None:
            det = 0
            continue
        if pivot != rank:
            rows[rank], rows[pivot] = rows[pivot], rows[rank]
            det = -det
        inv = pow(rows[rank][col], -1, p)
        det = det * rows[rank][col] % p
        rows[rank] = [x * inv % p for x in rows[rank]]
        for r in range(n_rows):
            if r != rank and rows[r][col] % p:
                factor = rows[r][col]
                rows[r] = [(x - factor * y) % p for x, y in zip(rows[r], rows[rank])]
        rank += 1
        if rank == n_rows:
            break
    return rank, det % p


def det_mod(m: Matrix, p: int) -> int:
    rows = [list(row) for row in m]
    rank, det = _eliminate(rows, p)
    return det if rank == len(rows) else 0


def rank_mod(vectors: Sequence[Sequence[int]], p: int) -> int:
    rows = [[x % p for x in v] for v in vectors]
    if not rows:
        return 0
    return _eliminate(rows, p)[0]


def inverse_mod(m: Matrix, p: int) -> Matrix:
    d = len(m)
    rows = [list(row) + list(e) for row, e in zip(m, identity(d))]
    # only the left block is used for pivoting
    for col in range(d):
        pivot = next((r for r in range(col, d) if rows[r][col] % p), None)
        if pivot is None:
            raise ValueError("matrix is singular mod p")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = pow(rows[col][col], -1, p)
        rows[col] = [x * inv % p for x in rows[col]]
        for r in range(d):
            if r != col and rows[r][col] % p:
                factor = rows[r][col]
                rows[r] = [(x - factor * y) % p for x, y in zip(rows[r], rows[col])]
    return tuple(tuple(row[d:]) for row in rows)


def canonical_direction(k: Sequence[int], p: int) -> Vector:
    """Representative of ``F_p^* k`` whose first nonzero coordinate is 1."""
    k = tuple(x % p for x in k)
    lead = next((x for x in k if x), 0)
    if not lead:
        raise InvalidDirection("direction vector is zero mod p")
    return vec_scale(pow(lead, -1, p), k, p)


__all__ = [
    "Vector",
    "Matrix",
    "all_classes",
    "class_index",
    "class_from_index",
    "vec_add",
    "vec_sub",
    "vec_scale",
    "mat_vec",
    "mat_mul",
    "transpose",
    "identity",
    "det_mod",
    "rank_mod",
    "inverse_mod",
    "canonical_direction",
]
