"""Exact rational linear programming for vertex enumeration.

Maximizes c.x over {x : a_i . x <= b_i} by running the revised simplex method
with Bland's anti-cycling rule on the dual (min b.y, sum y_i a_i = c, y >= 0),
whose basis has size n instead of the facet count.  At optimality the simplex
multipliers are exactly the primal optimizer, which is a vertex because the
basis rows are independent and tight; the result is validated exactly against
every constraint before being returned.
"""

from __future__ import annotations

from .errors import InputError, InternalConsistencyError
from .linalg import vec_dot
from .rational import QQ, ZERO


class LPResult:
    __slots__ = ("x", "objective", "basis")

    def __init__(self, x, objective, basis):
        self.x = x
        self.objective = objective
        self.basis = basis


def maximize(rows: list[tuple], rhs: list, objective) -> LPResult:
    """Exact max of objective . x subject to rows[i] . x <= rhs[i].

    Raises InputError when the program is unbounded (the constraint set is not
    a bounded cell description).
    """
    n = len(objective)
    m = len(rows)
    objective = tuple(QQ(v) for v in objective)
    rhs = [QQ(v) for v in rhs]
    cols = [tuple(QQ(v) for v in row) for row in rows]  # dual columns = facet normals

    # Artificial start: artificial j has column sign(c_j) * e_j, so B = diag(signs),
    # B^-1 = diag(signs), and the initial basic values |c_j| are feasible.
    art_sign = [QQ(1) if objective[j] >= 0 else QQ(-1) for j in range(n)]
    basis = [m + j for j in range(n)]
    basis_set = set(basis)
    binv = [tuple(art_sign[i] if i == j else ZERO for j in range(n)) for i in range(n)]
    values = [art_sign[j] * objective[j] for j in range(n)]

    def multipliers(costs_by_pos):
        u = [ZERO] * n
        for i, cbi in enumerate(costs_by_pos):
            if cbi != 0:
                row = binv[i]
                for k in range(n):
                    u[k] += cbi * row[k]
        return u

    def pivot(d, leave_pos, entering, ratio):
        piv = d[leave_pos]
        new_row = tuple(v / piv for v in binv[leave_pos])
        for i in range(n):
            if i == leave_pos or d[i] == 0:
                continue
            f = d[i]
            binv[i] = tuple(a - f * b for a, b in zip(binv[i], new_row))
            values[i] -= f * ratio
        binv[leave_pos] = new_row
        values[leave_pos] = ratio
        basis_set.discard(basis[leave_pos])
        basis_set.add(entering)
        basis[leave_pos] = entering

    def run(cost_of):
        while True:
            u = multipliers([cost_of(j) for j in basis])
            entering = -1
            for j in range(m):
                if j in basis_set:
                    continue
                if cost_of(j) - vec_dot(u, cols[j]) < 0:
                    entering = j  # Bland: smallest improving index
                    break
            if entering < 0:
                return
            d = [vec_dot(binv[i], cols[entering]) for i in range(n)]
            leave_pos = -1
            best_ratio = None
            for i in range(n):
                if d[i] > 0:
                    ratio = values[i] / d[i]
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and basis[i] < basis[leave_pos])
                    ):
                        best_ratio = ratio
                        leave_pos = i
            if leave_pos < 0:
                raise InternalConsistencyError("dual unbounded; primal side is infeasible")
            pivot(d, leave_pos, entering, best_ratio)

    # Phase 1: drive the artificial variables to zero.
    run(lambda j: ZERO if j < m else QQ(1))
    if any(basis[i] >= m and values[i] != 0 for i in range(n)):
        raise InputError("objective is not bounded over the constraint set")
    for i in range(n):
        if basis[i] < m:
            continue
        # degenerate artificial: swap it for any real column with a nonzero tableau entry
        swapped = False
        for j in range(m):
            if j in basis_set:
                continue
            dji = vec_dot(binv[i], cols[j])
            if dji != 0:
                # the leaving artificial sits at value 0, so the ratio is 0 and
                # feasibility is untouched whatever the pivot sign
                d = [vec_dot(binv[r], cols[j]) for r in range(n)]
                pivot(d, i, j, values[i] / d[i])
                swapped = True
                break
        if not swapped:
            raise InternalConsistencyError("constraint normals do not span the space")

    # Phase 2: minimize the true dual objective b.y.
    run(lambda j: rhs[j])

    x = tuple(multipliers([rhs[j] for j in basis]))
    for row, b in zip(cols, rhs):
        if vec_dot(row, x) > b:
            raise InternalConsistencyError("simplex produced an infeasible point")
    obj = vec_dot(objective, x)
    dual_obj = ZERO
    for v, j in zip(values, basis):
        dual_obj += v * rhs[j]
    if obj != dual_obj:
        raise InternalConsistencyError("strong duality certificate failed")
    return LPResult(x, obj, tuple(sorted(basis)))
