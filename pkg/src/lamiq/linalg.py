"""Exact dense linear algebra over the rationals.

Vectors are tuples of gmpy2.mpq, matrices are lists/tuples of such rows.
Everything here is exact; pivot selection never divides by zero, and
rank-deficient or inconsistent systems are reported, not raised.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rational import QQ, ZERO


def qvec(values) -> tuple:
    return tuple(QQ(v) for v in values)


def qmat(rows) -> list:
    return [qvec(r) for r in rows]


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(u, c):
    c = QQ(c)
    return tuple(c * a for a in u)


def vec_dot(u, v):
    s = ZERO
    for a, b in zip(u, v):
        s += a * b
    return s


def vec_norm2(u):
    s = ZERO
    for a in u:
        s += a * a
    return s


def mat_mul_vec(rows, v):
    return tuple(vec_dot(r, v) for r in rows)


def mat_mul(a, b):
    bt = list(zip(*b))
    return [tuple(vec_dot(ra, cb) for cb in bt) for ra in a]


def mat_transpose(a):
    return [tuple(col) for col in zip(*a)]


def identity(n):
    one, zero = QQ(1), QQ(0)
    return [tuple(one if i == j else zero for j in range(n)) for i in range(n)]


def det(rows) -> QQ:
    """Determinant by exact Gaussian elimination with partial (first nonzero) pivoting."""
    n = len(rows)
    a = [list(r) for r in rows]
    sign = 1
    d = QQ(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if a[r][col] != 0:
                piv = r
                break
        if piv is None:
            return ZERO
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        pval = a[col][col]
        d *= pval
        for r in range(col + 1, n):
            f = a[r][col] / pval
            if f == 0:
                continue
            arow, crow = a[r], a[col]
            for c in range(col + 1, n):
                arow[c] -= f * crow[c]
    return d if sign > 0 else -d


def gram_matrix(vectors) -> list:
    return [tuple(vec_dot(u, v) for v in vectors) for u in vectors]


def gram_det(vectors) -> QQ:
    return det(gram_matrix(vectors))


@dataclass
class SolveReport:
    """Outcome of an exact linear solve: either a unique solution or a rank report."""

    solution: tuple | None
    rank: int
    consistent: bool
    parametric: bool  # consistent but underdetermined

    @property
    def unique(self) -> bool:
        return self.solution is not None


def solve_linear(a_rows, b) -> SolveReport:
    """Solve A x = b exactly (A is m x n).

    Full pivoting over the nonzero entries; returns the unique solution when it
    exists, otherwise a rank/consistency report (inconsistency is an outcome
    here, not an exception).
    """
    m = len(a_rows)
    n = len(a_rows[0]) if m else 0
    a = [list(row) + [QQ(bv)] for row, bv in zip(a_rows, b)]
    col_of_pivot = []
    used_cols = set()
    rank = 0
    for _ in range(min(m, n)):
        piv = None
        best = None
        for r in range(rank, m):
            for c in range(n):
                if c in used_cols:
                    continue
                v = a[r][c]
                if v != 0:
                    # full pivoting contract: any nonzero pivot is exact; prefer
                    # small operands to slow coefficient growth
                    size = abs(v.numerator) + abs(v.denominator)
                    if best is None or size < best:
                        best = size
                        piv = (r, c)
        if piv is None:
            break
        r0, c0 = piv
        a[rank], a[r0] = a[r0], a[rank]
        used_cols.add(c0)
        col_of_pivot.append(c0)
        pval = a[rank][c0]
        prow = a[rank]
        for r in range(m):
            if r == rank:
                continue
            f = a[r][c0] / pval
            if f == 0:
                continue
            arow = a[r]
            for c in range(n + 1):
                arow[c] -= f * prow[c]
        rank += 1
    consistent = all(a[r][n] == 0 for r in range(rank, m))
    if not consistent:
        return SolveReport(None, rank, False, False)
    if rank < n:
        return SolveReport(None, rank, True, True)
    x = [ZERO] * n
    for r, c in enumerate(col_of_pivot):
        x[c] = a[r][n] / a[r][c]
    return SolveReport(tuple(x), rank, True, False)


def mat_inverse(rows) -> list | None:
    """Exact inverse, or None when singular."""
    n = len(rows)
    a = [list(r) + list(idr) for r, idr in zip(rows, identity(n))]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if a[r][col] != 0:
                piv = r
                break
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        pval = a[col][col]
        a[col] = [v / pval for v in a[col]]
        prow = a[col]
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            if f == 0:
                continue
            arow = a[r]
            for c in range(2 * n):
                arow[c] -= f * prow[c]
    return [tuple(row[n:]) for row in a]


class RowBasis:
    """Incremental exact row-space basis; used for rank and span membership."""

    def __init__(self, width: int):
        self.width = width
        self.rows: list[list] = []
        self.pivot_cols: list[int] = []

    def reduce(self, row) -> list:
        r = list(row)
        for brow, pc in zip(self.rows, self.pivot_cols):
            f = r[pc]
            if f != 0:
                f = f / brow[pc]
                for c in range(self.width):
                    r[c] -= f * brow[c]
        return r

    def contains(self, row) -> bool:
        return all(v == 0 for v in self.reduce(row))

    def add(self, row) -> bool:
        """Insert the row if independent; returns True when rank grew."""
        r = self.reduce(row)
        for c in range(self.width):
            if r[c] != 0:
                self.rows.append(r)
                self.pivot_cols.append(c)
                return True
        return False

    @property
    def rank(self) -> int:
        return len(self.rows)


def affine_rank(points, limit: int | None = None) -> int:
    """Dimension of the affine span of exact points.

    With ``limit`` set, stops scanning once the rank exceeds ``limit`` (used to
    reject over-rank candidates early); the returned value is then > limit.
    """
    if not points:
        return -1
    base = points[0]
    rb = RowBasis(len(base))
    for p in points[1:]:
        rb.add(vec_sub(p, base))
        if limit is not None and rb.rank > limit:
            return rb.rank
    return rb.rank


def independent_point_subset(points, target_rank: int) -> list[int]:
    """Indices i (excluding 0) such that points[i]-points[0] form an affine basis.

    Raises IndexError upward if fewer than target_rank independent directions exist;
    callers verify rank beforehand.
    """
    base = points[0]
    rb = RowBasis(len(base))
    chosen = []
    for i, p in enumerate(points[1:], start=1):
        if rb.add(vec_sub(p, base)):
            chosen.append(i)
            if rb.rank == target_rank:
                return chosen
    raise ValueError(f"span has rank {rb.rank}, needed {target_rank}")
