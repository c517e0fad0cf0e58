"""Small dense linear algebra over an arbitrary scalar field.

Matrices are tuples/lists of row lists. Everything here is sized for the
dimensions this package meets (d <= ~15), so plain Gaussian elimination
with exact division is both adequate and, in the exact modes, certified.
"""

from __future__ import annotations

from typing import Sequence

from .errors import DimensionMismatch, NotSquare
from .fields import Field

Matrix = Sequence[Sequence]
Vector = Sequence


def zeros(rows: int, cols: int, field: Field) -> list[list]:
    z = field.zero
    return [[z] * cols for _ in range(rows)]


def identity(n: int, field: Field) -> list[list]:
    m = zeros(n, n, field)
    for i in range(n):
        m[i][i] = field.one
    return m


def transpose(a: Matrix) -> list[list]:
    return [list(col) for col in zip(*a)]


def mat_vec(a: Matrix, v: Vector):
    if a and len(a[0]) != len(v):
        raise DimensionMismatch(f"{len(a[0])}-column matrix times {len(v)}-vector")
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def vec_dot(u: Vector, v: Vector):
    if len(u) != len(v):
        raise DimensionMismatch("dot product of unequal lengths")
    return sum(x * y for x, y in zip(u, v))


def mat_mul(a: Matrix, b: Matrix) -> list[list]:
    if a and b and len(a[0]) != len(b):
        raise DimensionMismatch(f"{len(a[0])} columns times {len(b)} rows")
    bt = transpose(b)
    return [[vec_dot(row, col) for col in bt] for row in a]


def mat_sub(a: Matrix, b: Matrix) -> list[list]:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a: Matrix, t) -> list[list]:
    return [[x * t for x in row] for row in a]


def trace(a: Matrix):
    if a and len(a) != len(a[0]):
        raise NotSquare("trace of a non-square matrix")
    return sum(a[i][i] for i in range(len(a)))


def mat_eq(a: Matrix, b: Matrix, field: Field) -> bool:
    if len(a) != len(b) or (a and len(a[0]) != len(b[0])):
        return False
    return all(
        field.is_zero(x - y) for ra, rb in zip(a, b) for x, y in zip(ra, rb)
    )


def _pivot_row(col: list, start: int, field: Field) -> int | None:
    """Pivot choice: first nonzero entry (exact) or max-abs entry (float)."""
    if field.is_exact:
        for i in range(start, len(col)):
            if not field.is_zero(col[i]):
                return i
        return None
    best, best_abs = None, None
    for i in range(start, len(col)):
        v = abs(col[i])
        if not field.is_zero(col[i]) and (best_abs is None or v > best_abs):
            best, best_abs = i, v
    return best


def _eliminate(work: list[list], field: Field) -> tuple[list[int], list[int]]:
    """Row-reduce in place; returns (pivot rows, pivot columns)."""
    rows, cols = len(work), len(work[0]) if work else 0
    piv_rows: list[int] = []
    piv_cols: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        p = _pivot_row([work[i][c] for i in range(rows)], r, field)
        if p is None:
            continue
        work[r], work[p] = work[p], work[r]
        pv = work[r][c]
        work[r] = [x / pv for x in work[r]]
        for i in range(rows):
            if i != r and not field.is_zero(work[i][c]):
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        piv_rows.append(r)
        piv_cols.append(c)
        r += 1
    return piv_rows, piv_cols


def rank(a: Matrix, field: Field) -> int:
    work = [list(row) for row in a]
    if not work:
        return 0
    _, piv_cols = _eliminate(work, field)
    return len(piv_cols)


def solve_linear(a: Matrix, b: Vector, field: Field) -> list | None:
    """Solve the square system ``a x = b``; None if singular."""
    n = len(a)
    if any(len(row) != n for row in a):
        raise NotSquare("solve_linear requires a square matrix")
    work = [list(row) + [bb] for row, bb in zip(a, b)]
    _, piv_cols = _eliminate(work, field)
    if len(piv_cols) != n or any(c >= n for c in piv_cols):
        return None
    x = [field.zero] * n
    for r, c in enumerate(piv_cols):
        x[c] = work[r][n]
    return x


def inverse(a: Matrix, field: Field) -> list[list] | None:
    n = len(a)
    if any(len(row) != n for row in a):
        raise NotSquare("inverse requires a square matrix")
    work = [list(row) + ident_row for row, ident_row in zip(a, identity(n, field))]
    _, piv_cols = _eliminate(work, field)
    if len(piv_cols) != n or any(c >= n for c in piv_cols):
        return None
    inv = [[field.zero] * n for _ in range(n)]
    for r, c in enumerate(piv_cols):
        inv[c] = work[r][n:]
    return inv


def kernel_basis(a: Matrix, field: Field) -> list[list]:
    """Columns spanning the null space of ``a`` (list of vectors)."""
    if not a:
        return []
    cols = len(a[0])
    work = [list(row) for row in a]
    _, piv_cols = _eliminate(work, field)
    piv_set = set(piv_cols)
    free_cols = [c for c in range(cols) if c not in piv_set]
    basis = []
    for fc in free_cols:
        v = [field.zero] * cols
        v[fc] = field.one
        for r, pc in enumerate(piv_cols):
            v[pc] = -work[r][fc]
        basis.append(v)
    return basis
