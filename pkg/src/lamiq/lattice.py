"""Generator matrices, the laminated stacking template, exact closest-point
search, and relevant-vector computation.

Closest points are found by depth-first branch and bound over integer
coordinates with exact rational radius bookkeeping; ties are kept, because
ties are what define phase boundaries.  Relevant vectors come from the
doubled-lattice coset criterion: a nonzero coset of 2L in L contributes a
facet pair exactly when it has exactly two minimal-norm members.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError, InternalConsistencyError
from .linalg import (
    det,
    gram_matrix,
    mat_inverse,
    mat_mul_vec,
    qmat,
    qvec,
    vec_add,
    vec_dot,
    vec_norm2,
    vec_scale,
    vec_sub,
)
from .rational import QQ, ZERO, rational_round
from .symmetry import GroupSpec, orbit_vectors


class GeneratorMatrix:
    """Rows are basis vectors; lattice points are integer row combinations."""

    def __init__(self, rows):
        self.rows = [qvec(r) for r in rows]
        self.n = len(self.rows)
        if any(len(r) != self.n for r in self.rows):
            raise InputError("generator matrix must be square")
        self._det = det(self.rows)
        if self._det == 0:
            raise InputError("generator rows are linearly dependent")
        self._inv = None
        self._cvp = None

    @property
    def determinant(self) -> QQ:
        return self._det

    @property
    def inverse(self) -> list:
        if self._inv is None:
            self._inv = mat_inverse(self.rows)
        return self._inv

    def point(self, z) -> tuple:
        """Lattice point from integer coefficients z."""
        out = [ZERO] * self.n
        for zi, row in zip(z, self.rows):
            if zi:
                out = [o + zi * ri for o, ri in zip(out, row)]
        return tuple(out)

    def coefficients(self, x) -> tuple:
        """Exact coefficients c with c . rows = x (rational, integer iff x in lattice)."""
        inv_cols = list(zip(*self.inverse))
        return mat_mul_vec(inv_cols, x)

    def contains(self, x) -> bool:
        return all(c.denominator == 1 for c in self.coefficients(x))

    def scaled(self, factor) -> "GeneratorMatrix":
        factor = QQ(factor)
        return GeneratorMatrix([vec_scale(r, factor) for r in self.rows])

    def _cvp_data(self):
        """Cached exact LDL^T data for branch-and-bound enumeration."""
        if self._cvp is None:
            g = gram_matrix(self.rows)
            n = self.n
            lower = [[ZERO] * n for _ in range(n)]
            diag = [ZERO] * n
            for i in range(n):
                s = g[i][i]
                for k in range(i):
                    s -= lower[i][k] * lower[i][k] * diag[k]
                if s <= 0:
                    raise InternalConsistencyError("Gram matrix not positive definite")
                diag[i] = s
                lower[i][i] = QQ(1)
                for j in range(i + 1, n):
                    t = g[j][i]
                    for k in range(i):
                        t -= lower[j][k] * lower[i][k] * diag[k]
                    lower[j][i] = t / s
            ginv = mat_inverse(g)
            self._cvp = (lower, diag, ginv)
        return self._cvp


def closest_points(basis: GeneratorMatrix, x) -> list[tuple]:
    """All lattice points at exactly minimal squared distance from x.

    Output is deterministic: sorted lexicographically by integer coordinates.
    """
    zs = closest_coefficients(basis, x)
    return sorted(basis.point(z) for z in zs)


def closest_coefficients(basis: GeneratorMatrix, x) -> list[tuple]:
    """Integer coefficient vectors of all closest lattice points to x."""
    x = qvec(x)
    n = basis.n
    lower, diag, ginv = basis._cvp_data()
    bx = tuple(vec_dot(row, x) for row in basis.rows)
    w = mat_mul_vec(ginv, bx)  # real solution in lattice coordinates (G is symmetric)

    # Babai rounding gives a valid exact starting radius.
    z0 = tuple(rational_round(wi) for wi in w)
    best = _qform_value(lower, diag, [QQ(zi) - wi for zi, wi in zip(z0, w)])

    ties: list[tuple] = []

    u = [ZERO] * n  # u_i = z_i - w_i once fixed
    t = [ZERO] * n  # t_i = sum_{j>i} u_j * lower[j][i]
    z = [0] * n

    def descend(i, partial):
        nonlocal best, ties
        if i < 0:
            if partial < best:
                best = partial
                ties = [tuple(z)]
            elif partial == best:
                ties.append(tuple(z))
            return
        ti = ZERO
        for j in range(i + 1, n):
            ti += u[j] * lower[j][i]
        center = w[i] - ti
        zc = rational_round(center)
        # walk each side of the center separately: squared deviation is
        # monotone per side, so the first over-bound value ends that side
        for start, step in ((zc, 1), (zc - 1, -1)):
            zi = start
            while True:
                dev = QQ(zi) - center
                value = partial + diag[i] * dev * dev
                if value > best:
                    break
                z[i] = zi
                u[i] = QQ(zi) - w[i]
                descend(i - 1, value)
                zi += step
        u[i] = ZERO

    descend(n - 1, ZERO)
    ties.sort()
    return ties


def points_in_ball(basis: GeneratorMatrix, radius2, center=None) -> list[tuple]:
    """All lattice points with squared distance <= radius2 from center (exact)."""
    n = basis.n
    center = qvec(center) if center is not None else tuple([ZERO] * n)
    radius2 = QQ(radius2)
    lower, diag, ginv = basis._cvp_data()
    bx = tuple(vec_dot(row, center) for row in basis.rows)
    w = mat_mul_vec(ginv, bx)
    out: list[tuple] = []
    u = [ZERO] * n
    z = [0] * n

    def descend(i, partial):
        if i < 0:
            out.append(basis.point(z))
            return
        ti = ZERO
        for j in range(i + 1, n):
            ti += u[j] * lower[j][i]
        c = w[i] - ti
        zc = rational_round(c)
        for start, step in ((zc, 1), (zc - 1, -1)):
            zi = start
            while True:
                dev = QQ(zi) - c
                value = partial + diag[i] * dev * dev
                if value > radius2:
                    break
                z[i] = zi
                u[i] = QQ(zi) - w[i]
                descend(i - 1, value)
                zi += step
        u[i] = ZERO

    descend(n - 1, ZERO)
    return sorted(out)


def _qform_value(lower, diag, u) -> QQ:
    n = len(u)
    total = ZERO
    for i in range(n):
        yi = u[i]
        for j in range(i + 1, n):
            yi += u[j] * lower[j][i]
        total += diag[i] * yi * yi
    return total


@dataclass
class RelevantVectorSet:
    """Facet-defining lattice vectors, closed under negation."""

    vectors: list[tuple]
    coefficients: list[tuple]  # integer rows z with z . B = vector
    norms2: list[QQ]
    orbits: list[list[int]] = field(default_factory=list)  # index groups, when a group is given

    def __len__(self):
        return len(self.vectors)


def relevant_vectors(basis: GeneratorMatrix, group: GroupSpec | None = None) -> RelevantVectorSet:
    """Voronoi's criterion via the doubled-lattice coset method.

    For each of the 2^n - 1 nonzero cosets of 2L in L, find every minimal-norm
    coset member; the coset contributes its +/- pair exactly when two minima
    exist.
    """
    n = basis.n
    doubled = basis.scaled(2)
    found: dict[tuple, tuple] = {}
    for mask in range(1, 2**n):
        c = [(mask >> k) & 1 for k in range(n)]
        v0 = basis.point(c)
        minus_v0 = tuple(-v for v in v0)
        near = closest_points(doubled, minus_v0)
        members = [vec_add(v0, p) for p in near]
        if len(members) == 2:
            a, b = members
            if vec_add(a, b) != tuple([ZERO] * n):
                raise InternalConsistencyError("minimal coset pair is not symmetric")
            for m in members:
                found[m] = tuple(int(z) for z in basis.coefficients(m))
    vectors = sorted(found)
    coeffs = [found[v] for v in vectors]
    norms = [vec_norm2(v) for v in vectors]
    rset = RelevantVectorSet(vectors, coeffs, norms)
    if group is not None:
        index_of = {v: i for i, v in enumerate(vectors)}
        seen: set[int] = set()
        for i, v in enumerate(vectors):
            if i in seen:
                continue
            orb = []
            for w in orbit_vectors(v, group):
                j = index_of.get(w)
                if j is None:
                    raise InternalConsistencyError(
                        "group does not permute the relevant vectors"
                    )
                orb.append(j)
                seen.add(j)
            rset.orbits.append(sorted(orb))
        rset.orbits.sort(key=lambda orb: orb[0])
    return rset


def relevant_from_patterns(rset: RelevantVectorSet, basis: GeneratorMatrix) -> RelevantVectorSet:
    """Re-instantiate relevant vectors at another parameter from their integer
    coordinate patterns, preserving facet order (the combinatorial identity of
    each facet across a phase)."""
    vectors = [basis.point(z) for z in rset.coefficients]
    norms = [vec_norm2(v) for v in vectors]
    return RelevantVectorSet(vectors, list(rset.coefficients), norms, rset.orbits)


def laminate(base: GeneratorMatrix, offset, a) -> GeneratorMatrix:
    """Stacking template: block matrix [[B, 0], [offset, a]]; det = a * det(B)."""
    a = QQ(a)
    offset = qvec(offset)
    if len(offset) != base.n:
        raise InputError("offset dimension must match the base lattice")
    if a <= 0:
        raise InputError("stacking height must be positive")
    rows = [tuple(r) + (ZERO,) for r in base.rows]
    rows.append(tuple(offset) + (a,))
    return GeneratorMatrix(rows)


@dataclass
class LaminatedFamily:
    """One-parameter family: (n-1)-D base, in-plane offset, free stacking height."""

    base: GeneratorMatrix
    offset: tuple
    name: str = "family"
    group: GroupSpec | None = None
    default_parameter: str | None = None  # optional "p/q" carried by spec files

    def __post_init__(self):
        self.offset = qvec(self.offset)
        if len(self.offset) != self.base.n:
            raise InputError("offset dimension must match the base lattice")

    @property
    def dim(self) -> int:
        return self.base.n + 1

    def instantiate(self, a) -> GeneratorMatrix:
        return laminate(self.base, self.offset, a)


def d8_generator() -> GeneratorMatrix:
    rows = [[0] * 8 for _ in range(8)]
    rows[0][0] = 2
    for i in range(1, 8):
        rows[i][0] = 1
        rows[i][i] = 1
    return GeneratorMatrix(rows)


def ae9_family() -> LaminatedFamily:
    from .symmetry import ae9_group

    return LaminatedFamily(
        d8_generator(), [QQ(1, 2)] * 8, name="ae9", group=ae9_group()
    )


def ae9(a) -> GeneratorMatrix:
    """The 9-D laminated generator with free bottom-right entry a > 0."""
    a = QQ(a)
    if a <= 0:
        raise InputError(f"parameter must be positive, got {a}")
    return laminate(d8_generator(), [QQ(1, 2)] * 8, a)
