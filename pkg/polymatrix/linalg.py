"""
Exact rational linear algebra helpers.

Vectors and matrices are carried as tuples of Fraction in the hot loops and
converted to sympy matrices for elimination, nullspaces and products that
need to be exact.
"""

import math
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import sympy as sp

Vector = Tuple[Fraction, ...]
Rows = Tuple[Vector, ...]


def to_fraction(value) -> Fraction:
    """Exact Fraction from an int, Fraction or sympy rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    rational = sp.Rational(value)
    if not rational.is_Rational:
        raise ValueError(f"not a rational value: {value!r}")
    return Fraction(int(rational.p), int(rational.q))


def to_sympy_scalar(value) -> sp.Rational:
    value = to_fraction(value)
    return sp.Rational(value.numerator, value.denominator)


def to_sympy(rows: Sequence[Sequence]) -> sp.Matrix:
    """Mutable sympy matrix from nested rationals."""
    rows = [list(r) for r in rows]
    if not rows:
        return sp.zeros(0, 0)
    return sp.Matrix([[to_sympy_scalar(v) for v in r] for r in rows])


def column(vector: Sequence) -> sp.Matrix:
    return sp.Matrix([to_sympy_scalar(v) for v in vector])


def from_sympy(matrix: sp.MatrixBase) -> Rows:
    return tuple(tuple(to_fraction(matrix[i, j]) for j in range(matrix.cols)) for i in range(matrix.rows))


def vector_from_sympy(matrix: sp.MatrixBase) -> Vector:
    return tuple(to_fraction(v) for v in matrix)


def identity(n: int) -> Rows:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def zeros(rows: int, cols: int) -> Rows:
    return tuple(tuple(Fraction(0) for _ in range(cols)) for _ in range(rows))


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v) if a and b), Fraction(0))


def mat_vec(rows: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector:
    return tuple(dot(r, v) for r in rows)


def mat_mul(left: Sequence[Sequence[Fraction]], right: Sequence[Sequence[Fraction]]) -> Rows:
    cols = list(zip(*right))
    return tuple(tuple(dot(r, c) for c in cols) for r in left)


def transpose(rows: Sequence[Sequence[Fraction]]) -> Rows:
    return tuple(tuple(c) for c in zip(*rows))


def is_skew(rows: Sequence[Sequence[Fraction]]) -> bool:
    n = len(rows)
    return all(rows[i][j] == -rows[j][i] for i in range(n) for j in range(n))


def nullspace(rows: Sequence[Sequence[Fraction]], cols: Optional[int] = None) -> List[Vector]:
    """Exact basis of the right kernel; an empty row list has the full space as kernel."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(cols or 0)) for i in range(cols or 0)]
    return [vector_from_sympy(v) for v in to_sympy(rows).nullspace()]


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows:
        return 0
    return to_sympy(rows).rank()


def solve_affine(
    rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction], cols: Optional[int] = None
) -> Optional[Tuple[Vector, List[Vector]]]:
    """
    Exact solution set of rows · x = rhs.

    Returns a particular solution (free variables set to zero) and a kernel
    basis, or None when the system is inconsistent.
    """
    ncols = cols if cols is not None else len(rows[0])
    if not rows:
        return tuple(Fraction(0) for _ in range(ncols)), nullspace([], ncols)
    augmented = to_sympy([list(r) + [b] for r, b in zip(rows, rhs)])
    reduced, pivots = augmented.rref()
    if ncols in pivots:
        return None
    particular = [Fraction(0)] * ncols
    for row_index, pivot in enumerate(pivots):
        particular[pivot] = to_fraction(reduced[row_index, ncols])
    return tuple(particular), nullspace(rows, ncols)


def minimal_norm(particular: Sequence[Fraction], kernel: Sequence[Sequence[Fraction]]) -> Vector:
    """Project a particular solution onto the orthogonal complement of the kernel."""
    if not kernel:
        return tuple(particular)
    K = to_sympy(kernel).T
    x = column(particular)
    correction = K * (K.T * K).inv() * (K.T * x)
    return vector_from_sympy(x - correction)


def left_inverse(rows: Sequence[Sequence[Fraction]]) -> Rows:
    """(BᵀB)⁻¹Bᵀ for a matrix B with independent columns."""
    B = to_sympy(rows)
    return from_sympy((B.T * B).inv() * B.T)


def primitive_integer(vector: Sequence[Fraction]) -> Vector:
    """Scale by a positive factor to coprime integers, keeping the sign pattern."""
    vector = [to_fraction(v) for v in vector]
    denominators = [v.denominator for v in vector if v]
    if not denominators:
        return tuple(vector)
    lcm = 1
    for d in denominators:
        lcm = lcm * d // math.gcd(lcm, d)
    integers = [int(v * lcm) for v in vector]
    divisor = 0
    for value in integers:
        divisor = math.gcd(divisor, value)
    return tuple(Fraction(v // divisor) for v in integers)


def rationalize(value: float, max_denominator: int) -> Fraction:
    return Fraction(value).limit_denominator(max_denominator)


def integer_scaled(rows: Iterable[Sequence[Fraction]]) -> Tuple[Tuple[Tuple[int, ...], ...], int]:
    """Integer matrix and common denominator with rows == integers / denominator."""
    rows = [tuple(to_fraction(v) for v in r) for r in rows]
    lcm = 1
    for r in rows:
        for v in r:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    return tuple(tuple(int(v * lcm) for v in r) for r in rows), lcm


def to_float_rows(rows: Sequence[Sequence[Fraction]]) -> List[List[float]]:
    return [[float(v) for v in r] for r in rows]
