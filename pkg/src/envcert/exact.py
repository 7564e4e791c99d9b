"""Exact rational scalars, vectors and matrices.

Scalars are :class:`fractions.Fraction` (always in lowest terms). Vectors are
tuples of fractions and matrices are tuples of row tuples. Nothing in this
module rounds, except :func:`rationalize`, which is the single entry point from
binary floating point into the exact world.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple  # tuple[Fraction, ...]
Matrix = tuple  # tuple[tuple[Fraction, ...], ...]

DEFAULT_MAX_DENOMINATOR = 10**6


class RankDeficient(ArithmeticError):
    pass


class Inconsistent(ArithmeticError):
    pass


class NotFinite(ValueError):
    pass


def q(value) -> Fraction:
    """Coerce ints, fractions and rational strings ("3/4", "-2", "0.1") to Fraction.

    Floats are rejected; use :func:`rationalize` for those.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def fmt(x: Fraction) -> str:
    """Serialize as "num/den", dropping "/1" for integers."""
    return str(x)


def vec(values: Iterable) -> Vector:
    return tuple(q(v) for v in values)


def mat(rows: Iterable[Iterable]) -> Matrix:
    out = tuple(tuple(q(v) for v in row) for row in rows)
    if out and len({len(r) for r in out}) != 1:
        raise ValueError("matrix rows have different lengths")
    return out


def shape(M: Matrix) -> tuple[int, int]:
    return len(M), (len(M[0]) if M else 0)


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def zeros(r: int, k: int) -> Matrix:
    return tuple(tuple(Fraction(0) for _ in range(k)) for _ in range(r))


def transpose(M: Matrix) -> Matrix:
    return tuple(zip(*M))


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    if shape(A)[1] != len(B):
        raise ValueError(f"shape mismatch {shape(A)} @ {shape(B)}")
    cols = transpose(B)
    return tuple(
        tuple(sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols)
        for row in A
    )


def mat_vec(A: Matrix, v: Sequence[Fraction]) -> Vector:
    if shape(A)[1] != len(v):
        raise ValueError(f"shape mismatch {shape(A)} @ ({len(v)},)")
    return tuple(sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in A)


def mat_sub(A: Matrix, B: Matrix) -> Matrix:
    if shape(A) != shape(B):
        raise ValueError(f"shape mismatch {shape(A)} - {shape(B)}")
    return tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    if shape(A) != shape(B):
        raise ValueError(f"shape mismatch {shape(A)} + {shape(B)}")
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_scale(s: Fraction, A: Matrix) -> Matrix:
    return tuple(tuple(s * a for a in row) for row in A)


def vec_add(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vector:
    if len(a) != len(b):
        raise ValueError("vector length mismatch")
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vector:
    if len(a) != len(b):
        raise ValueError("vector length mismatch")
    return tuple(x - y for x, y in zip(a, b))


def hstack(*blocks: Matrix) -> Matrix:
    """Horizontal concatenation; blocks with zero columns are allowed."""
    rows = {len(b) for b in blocks}
    if len(rows) != 1:
        raise ValueError("hstack blocks have different row counts")
    n = rows.pop()
    return tuple(tuple(x for b in blocks for x in b[i]) for i in range(n))


def column(v: Sequence[Fraction]) -> Matrix:
    return tuple((x,) for x in v)


def diag(v: Sequence[Fraction]) -> Matrix:
    n = len(v)
    return tuple(tuple(v[i] if i == j else Fraction(0) for j in range(n)) for i in range(n))


def mat_inf_norm(M) -> Fraction:
    """Induced infinity norm: largest absolute row sum.

    A flat vector is treated as a column, so its norm is the largest absolute entry.
    """
    if not M:
        return Fraction(0)
    if not isinstance(M[0], (tuple, list)):
        return max(abs(x) for x in M)
    return max(sum((abs(x) for x in row), Fraction(0)) for row in M)


def _reduce(H: Matrix, rhs: Sequence[Sequence[Fraction]], *, strict: bool):
    """Gauss-Jordan elimination of [H | rhs] processed row by row.

    For every row the pivot is the remaining column with the largest absolute
    entry (ties go to the lowest index). Returns (pivot column per kept row,
    reduced H rows, reduced rhs rows). Zero rows either raise RankDeficient
    (``strict``) or are checked for consistency and dropped.
    """
    r, k = shape(H)
    A = [list(row) for row in H]
    B = [list(row) for row in rhs]
    pivots: list[int | None] = []
    used: set[int] = set()
    for i in range(r):
        best, col = Fraction(0), None
        for j in range(k):
            if j not in used and abs(A[i][j]) > best:
                best, col = abs(A[i][j]), j
        if col is None:
            if strict:
                raise RankDeficient(f"no pivot in row {i}")
            if any(x != 0 for x in B[i]):
                raise Inconsistent(f"row {i} reduces to 0 = nonzero")
            pivots.append(None)
            continue
        used.add(col)
        pivots.append(col)
        piv = A[i][col]
        A[i] = [x / piv for x in A[i]]
        B[i] = [x / piv for x in B[i]]
        for m in range(r):
            if m != i and A[m][col] != 0:
                factor = A[m][col]
                A[m] = [x - factor * y for x, y in zip(A[m], A[i])]
                B[m] = [x - factor * y for x, y in zip(B[m], B[i])]
    return pivots, A, B


def right_inverse(H: Matrix) -> Matrix:
    """Exact right inverse H+ with H @ H+ == I for a full-row-rank H (r <= k).

    Non-pivot rows of H+ are zero, so the result is deterministic.
    """
    r, k = shape(H)
    if r == 0 or k < r:
        raise RankDeficient(f"{r}x{k} matrix cannot have full row rank")
    pivots, _, B = _reduce(H, identity(r), strict=True)
    Hp = [[Fraction(0)] * r for _ in range(k)]
    for i, col in enumerate(pivots):
        Hp[col] = list(B[i])
    return tuple(tuple(row) for row in Hp)


def linear_solve(H: Matrix, y: Sequence[Fraction]) -> Vector:
    """Exact solution of H x = y with free variables set to zero."""
    r, k = shape(H)
    if len(y) != r:
        raise ValueError("right-hand side length mismatch")
    pivots, _, B = _reduce(H, column(y), strict=False)
    x = [Fraction(0)] * k
    for i, col in enumerate(pivots):
        if col is not None:
            x[col] = B[i][0]
    return tuple(x)


def rationalize(v: float, max_denominator: int = DEFAULT_MAX_DENOMINATOR, mode: str = "cfrac") -> Fraction:
    """Convert a finite float to a rational.

    ``cfrac``: closest rational with denominator <= max_denominator (continued
    fraction convergents and semiconvergents). ``dyadic``: the exact binary value.
    """
    if not math.isfinite(v):
        raise NotFinite(f"cannot rationalize {v!r}")
    exact = Fraction(v)
    if mode == "dyadic":
        return exact
    if mode != "cfrac":
        raise ValueError(f"unknown rationalization mode {mode!r}")
    if max_denominator < 1:
        raise ValueError("max_denominator must be positive")
    return exact.limit_denominator(max_denominator)


def rationalize_matrix(M, max_denominator: int = DEFAULT_MAX_DENOMINATOR, mode: str = "cfrac") -> Matrix:
    return tuple(tuple(rationalize(float(x), max_denominator, mode) for x in row) for row in M)


def rationalize_vector(v, max_denominator: int = DEFAULT_MAX_DENOMINATOR, mode: str = "cfrac") -> Vector:
    return tuple(rationalize(float(x), max_denominator, mode) for x in v)


def parse_vector(data) -> Vector:
    return tuple(q(x) for x in data)


def parse_matrix(data) -> Matrix:
    return mat(data)


def dump_vector(v: Sequence[Fraction]) -> list[str]:
    return [fmt(x) for x in v]


def dump_matrix(M: Matrix) -> list[list[str]]:
    return [[fmt(x) for x in row] for row in M]
