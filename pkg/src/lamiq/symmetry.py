"""Origin-preserving lattice symmetries and orbit machinery.

Isometries are rational orthogonal matrices; the ones that matter here are
signed permutations, which get a compact encoding (entry i holds ±(j+1),
meaning output coordinate i is ±input coordinate j) and vectorized orbit
closure.  Orbits are computed by explicit breadth-first closure with exact
deduplication, never by stabilizer-chain group theory: the largest orbit this
pipeline meets is well within BFS range.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError, InternalConsistencyError, ResourceError
from .linalg import mat_mul_vec, qmat, qvec, vec_dot
from .rational import QQ

DEFAULT_ORBIT_CAP = 10**7


class Isometry:
    """A rational orthogonal matrix acting on row vectors: x -> x applied coordinatewise.

    ``sperm`` is the signed-permutation encoding when one exists (None otherwise).
    """

    __slots__ = ("matrix", "sperm")

    def __init__(self, matrix, sperm=None):
        self.matrix = tuple(qvec(r) for r in matrix)
        self.sperm = tuple(sperm) if sperm is not None else _detect_sperm(self.matrix)

    @staticmethod
    def from_sperm(sperm) -> "Isometry":
        n = len(sperm)
        rows = []
        for i in range(n):
            row = [QQ(0)] * n
            j = abs(sperm[i]) - 1
            row[j] = QQ(1) if sperm[i] > 0 else QQ(-1)
            rows.append(row)
        return Isometry(rows, sperm=sperm)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def apply(self, vec) -> tuple:
        if self.sperm is not None:
            out = []
            for s in self.sperm:
                v = vec[abs(s) - 1]
                out.append(v if s > 0 else -v)
            return tuple(out)
        return mat_mul_vec(self.matrix, vec)

    def is_orthogonal(self) -> bool:
        n = self.dim
        for i in range(n):
            for j in range(i, n):
                d = vec_dot(self.matrix[i], self.matrix[j])
                if d != (1 if i == j else 0):
                    return False
        return True

    def __eq__(self, other):
        return isinstance(other, Isometry) and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        if self.sperm is not None:
            return f"Isometry(sperm={list(self.sperm)})"
        return f"Isometry({self.dim}x{self.dim})"


def _detect_sperm(matrix) -> tuple | None:
    n = len(matrix)
    sperm = []
    for i in range(n):
        nz = [(j, v) for j, v in enumerate(matrix[i]) if v != 0]
        if len(nz) != 1 or abs(nz[0][1]) != 1:
            return None
        j, v = nz[0]
        sperm.append((j + 1) if v > 0 else -(j + 1))
    if sorted(abs(s) for s in sperm) != list(range(1, n + 1)):
        return None
    return tuple(sperm)


def compose_sperm(g, t):
    """Signed-permutation composition g∘t (apply t, then g)."""
    out = []
    for gi in g:
        ti = t[abs(gi) - 1]
        out.append(ti if gi > 0 else -ti)
    return tuple(out)


def invert_sperm(s):
    out = [0] * len(s)
    for i, si in enumerate(s):
        j = abs(si) - 1
        out[j] = (i + 1) if si > 0 else -(i + 1)
    return tuple(out)


IDENTITY_SPERM_9 = tuple(range(1, 10))


class GroupSpec:
    """A finite group given by isometry generators, with an optional claimed order."""

    def __init__(self, generators: list[Isometry], claimed_order: int | None = None):
        if not generators:
            raise InputError("group needs at least one generator")
        dims = {g.dim for g in generators}
        if len(dims) != 1:
            raise InputError("mixed-dimension group generators")
        self.generators = list(generators)
        self.claimed_order = claimed_order
        self.dim = generators[0].dim

    def all_signed_perms(self) -> bool:
        return all(g.sperm is not None for g in self.generators)

    def verify_preserves_lattice(self, basis_rows, basis_inverse) -> bool:
        """Each generator must map every basis row to a lattice point."""
        for g in self.generators:
            for row in basis_rows:
                image = g.apply(row)
                coeffs = mat_mul_vec(list(zip(*basis_inverse)), image)
                if any(c.denominator != 1 for c in coeffs):
                    return False
        return True


def ae9_group() -> GroupSpec:
    """Symmetry group of the 9-D laminated family at generic parameter: order 10 321 920.

    Generators: reflection of coordinate 9, adjacent transpositions of
    coordinates 1-8, and a paired sign flip of coordinates 1 and 2 (conjugation
    by the transpositions reaches every even sign pattern).
    """
    gens = [Isometry.from_sperm((1, 2, 3, 4, 5, 6, 7, 8, -9))]
    for i in range(7):
        sperm = list(range(1, 10))
        sperm[i], sperm[i + 1] = sperm[i + 1], sperm[i]
        gens.append(Isometry.from_sperm(sperm))
    gens.append(Isometry.from_sperm((-1, -2, 3, 4, 5, 6, 7, 8, 9)))
    return GroupSpec(gens, claimed_order=2 * math.factorial(8) * 128)


def sign_flip_group(dim: int) -> GroupSpec:
    """All single-coordinate sign flips: the symmetry every test family here has."""
    gens = []
    for i in range(dim):
        sperm = list(range(1, dim + 1))
        sperm[i] = -sperm[i]
        gens.append(Isometry.from_sperm(sperm))
    return GroupSpec(gens, claimed_order=2**dim)


def orbit_vectors(seed, group: GroupSpec, cap: int = DEFAULT_ORBIT_CAP) -> list[tuple]:
    """Breadth-first orbit of an exact coordinate vector; deterministic order."""
    seed = qvec(seed)
    seen = {seed}
    frontier = [seed]
    while frontier:
        nxt = []
        for v in frontier:
            for g in group.generators:
                w = g.apply(v)
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
                    if len(seen) > cap:
                        raise ResourceError(f"orbit exceeded cap {cap}")
        frontier = nxt
    return sorted(seen)


def orbit_index_sets(seed, vertex_perms: list, cap: int = DEFAULT_ORBIT_CAP) -> list[tuple]:
    """Orbit of a sorted vertex-index tuple under index permutations."""
    seed = tuple(sorted(seed))
    seen = {seed}
    frontier = [seed]
    while frontier:
        nxt = []
        for f in frontier:
            for perm in vertex_perms:
                g = tuple(sorted(perm[i] for i in f))
                if g not in seen:
                    seen.add(g)
                    nxt.append(g)
                    if len(seen) > cap:
                        raise ResourceError(f"orbit exceeded cap {cap}")
        frontier = nxt
    return sorted(seen)


def canonical_form(seed, group_or_perms, cap: int = DEFAULT_ORBIT_CAP):
    """Deterministic orbit invariant: the lexicographically minimal orbit element."""
    if isinstance(group_or_perms, GroupSpec):
        return orbit_vectors(seed, group_or_perms, cap)[0]
    return orbit_index_sets(seed, group_or_perms, cap)[0]


def orbit_size_formula(v) -> int:
    """Closed-form orbit size under the 9-D family group for a 9-vector.

    Group the first eight coordinates by absolute value with multiplicities
    m_1..m_p; the count is 2^(m+z) * 8!/(m_1!...m_p!) with m = min(7, #nonzero
    among the first eight) and z = 1 iff the ninth coordinate is nonzero.
    """
    if len(v) != 9:
        raise InputError("orbit_size_formula expects a 9-vector")
    v = qvec(v)
    groups: dict = {}
    for x in v[:8]:
        key = abs(x)
        groups[key] = groups.get(key, 0) + 1
    nonzero = sum(1 for x in v[:8] if x != 0)
    m = min(7, nonzero)
    z = 0 if v[8] == 0 else 1
    denom = 1
    for mult in groups.values():
        denom *= math.factorial(mult)
    return 2 ** (m + z) * math.factorial(8) // denom


class VertexAction:
    """Index permutations over a fixed vertex list induced by the group generators."""

    def __init__(self, group: GroupSpec, vertices: list[tuple]):
        self.group = group
        index_of = {v: i for i, v in enumerate(vertices)}
        self.perms: list[np.ndarray] = []
        for g in group.generators:
            perm = np.empty(len(vertices), dtype=np.int64)
            for i, v in enumerate(vertices):
                w = g.apply(v)
                j = index_of.get(w)
                if j is None:
                    raise InternalConsistencyError(
                        "group generator does not permute the vertex set"
                    )
                perm[i] = j
            self.perms.append(perm)
        # signed-permutation encodings when every generator has one
        if group.all_signed_perms():
            self.coord_sperms = [np.array(g.sperm, dtype=np.int8) for g in group.generators]
        else:
            self.coord_sperms = None

    def verify(self, vertices: list[tuple], sample: int = 50) -> bool:
        step = max(1, len(vertices) // sample)
        for g, perm in zip(self.group.generators, self.perms):
            for i in range(0, len(vertices), step):
                if g.apply(vertices[i]) != vertices[perm[i]]:
                    return False
        return True


class FaceOrbit:
    """One face orbit: size, lexicographically minimal representative, and the
    coordinate transforms carrying the representative onto requested members."""

    __slots__ = ("size", "rep", "rep_transform", "member_transforms")

    def __init__(self, size, rep, rep_transform, member_transforms):
        self.size = size
        self.rep = rep
        self.rep_transform = rep_transform
        self.member_transforms = member_transforms


def face_orbit_bfs(
    seed: np.ndarray,
    action: VertexAction,
    queries: set[bytes] | None = None,
    cap: int = DEFAULT_ORBIT_CAP,
) -> FaceOrbit:
    """Vectorized orbit closure of one face (sorted uint32 vertex-index array).

    Tracks, per visited face, the signed-permutation coordinate transform from
    the seed; returns transforms for the faces named in ``queries`` (bytes of
    the sorted big-endian uint32 array) rebased onto the representative.
    Requires a signed-permutation group (the only kind the heavy path uses).
    """
    if action.coord_sperms is None:
        raise InputError("vectorized face orbits need signed-permutation generators")
    dim = len(action.coord_sperms[0])
    k = len(seed)
    gen_abs = [np.abs(s).astype(np.int64) - 1 for s in action.coord_sperms]
    gen_sgn = [np.sign(s).astype(np.int8) for s in action.coord_sperms]

    capacity = 1024
    faces = np.empty((capacity, k), dtype=np.uint32)
    transforms = np.empty((capacity, dim), dtype=np.int8)
    faces[0] = np.sort(np.asarray(seed, dtype=np.uint32))
    transforms[0] = np.arange(1, dim + 1, dtype=np.int8)
    count = 1

    first_key = faces[0].astype(">u4").tobytes()
    visited: dict[bytes, int] = {first_key: 0}
    best_key, best_idx = first_key, 0
    layer_start, layer_end = 0, 1

    while layer_start < layer_end:
        for perm, s_abs, s_sgn in zip(action.perms, gen_abs, gen_sgn):
            rows = faces[layer_start:layer_end]
            mapped = np.sort(perm[rows], axis=1).astype(np.uint32)
            keys = mapped.astype(">u4")
            newtr = s_sgn[None, :] * transforms[layer_start:layer_end][:, s_abs]
            for i in range(mapped.shape[0]):
                key = keys[i].tobytes()
                if key in visited:
                    continue
                if count == capacity:
                    capacity *= 2
                    grown = np.empty((capacity, k), dtype=np.uint32)
                    grown[:count] = faces[:count]
                    faces = grown
                    grown_t = np.empty((capacity, dim), dtype=np.int8)
                    grown_t[:count] = transforms[:count]
                    transforms = grown_t
                visited[key] = count
                faces[count] = mapped[i]
                transforms[count] = newtr[i]
                if key < best_key:
                    best_key, best_idx = key, count
                count += 1
                if count > cap:
                    raise ResourceError(f"face orbit exceeded cap {cap}")
        layer_start, layer_end = layer_end, count

    rep = faces[best_idx].copy()
    rep_tr = tuple(int(x) for x in transforms[best_idx])
    inv_rep = invert_sperm(rep_tr)
    member = {}
    if queries:
        for key in queries:
            idx = visited.get(key)
            if idx is not None:
                t = tuple(int(x) for x in transforms[idx])
                member[key] = compose_sperm(t, inv_rep)
    return FaceOrbit(count, rep, rep_tr, member)
