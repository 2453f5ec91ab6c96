"""Exact Voronoi cell combinatorics: vertex enumeration, the face lattice with
orbit reduction, and congruence-class identification.

The construction never materializes all faces of a dimension at once: for each
orbit representative the candidate children are its intersections with facet
vertex sets, kept when maximal by inclusion (for a graded face lattice those
are exactly the rank d-1 intersections; rank is still verified, once per
orbit, as a tripwire).  Orbits of discovered faces are closed by vectorized
BFS which also records, per needed child instance, the group transform from
the orbit representative -- the moment recursion uses those transforms to
transport exact per-orbit geometry onto actual children.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field

import numpy as np
from gmpy2 import gcd, mpz

from .errors import InputError, InternalConsistencyError, ResourceError
from .lattice import (
    GeneratorMatrix,
    RelevantVectorSet,
    relevant_from_patterns,
    relevant_vectors,
)
from .linalg import RowBasis, solve_linear, vec_dot, vec_sub
from .rational import QQ, ZERO
from .simplexlp import maximize
from .symmetry import GroupSpec, VertexAction, face_orbit_bfs, orbit_vectors

log = logging.getLogger(__name__)

DEFAULT_SATURATION = 200
DEFAULT_DRAW_BUDGET = 200_000
_OBJECTIVE_SPAN = 10**6


@dataclass(frozen=True)
class FacetSpec:
    """Half-space x . normal <= rhs carried by a relevant vector (rhs = |m|^2 / 2)."""

    normal: tuple
    rhs: QQ
    coefficients: tuple  # integer coordinates of the relevant vector in the basis


def facet_specs(rset: RelevantVectorSet) -> list[FacetSpec]:
    return [
        FacetSpec(v, n / 2, z)
        for v, n, z in zip(rset.vectors, rset.norms2, rset.coefficients)
    ]


def solve_vertex(facets: list[FacetSpec], active: list[int], all_facets=None):
    """Exact intersection point of the active facet planes, or a report.

    Returns (point, None) on success; (None, reason) when the planes are
    rank-deficient or the point violates some other facet.
    """
    rows = [facets[i].normal for i in active]
    rhs = [facets[i].rhs for i in active]
    rep = solve_linear(rows, rhs)
    if not rep.unique:
        reason = "underdetermined" if rep.consistent else "inconsistent"
        return None, reason
    x = rep.solution
    for f in all_facets if all_facets is not None else facets:
        if vec_dot(f.normal, x) > f.rhs:
            return None, "not-a-vertex"
    return x, None


class ScaledPoints:
    """Exact rational points mirrored as one common-denominator integer matrix."""

    def __init__(self, points: list[tuple]):
        den = mpz(1)
        for p in points:
            for c in p:
                den = den * c.denominator // gcd(den, c.denominator)
        self.denominator = den
        n = len(points[0]) if points else 0
        arr = np.empty((len(points), n), dtype=object)
        for i, p in enumerate(points):
            for j, c in enumerate(p):
                arr[i, j] = int(c.numerator * (den // c.denominator))
        self.int_rows = arr
        maxabs = max((abs(v) for row in arr for v in row), default=0)
        self.fits64 = maxabs < (1 << 62)
        self.array = arr.astype(np.int64) if self.fits64 else None

    def safe_matmul_bound(self, other: "ScaledPoints") -> bool:
        if not (self.fits64 and other.fits64):
            return False
        a = int(np.abs(self.array).max(initial=0))
        b = int(np.abs(other.array).max(initial=0))
        return a * b * self.array.shape[1] < (1 << 62)


@dataclass
class VertexOrbitRecord:
    indices: list[int]  # into the sorted vertex list
    rep_index: int  # lexicographically minimal member
    size: int


class VertexSet:
    """All cell vertices in canonical (lexicographic) order, with exact
    coordinates, facet-tightness table, and the induced group action."""

    def __init__(self, coords: list[tuple], facets: list[FacetSpec], group: GroupSpec):
        self.coords = coords
        self.facets = facets
        self.group = group
        self.scaled = ScaledPoints(coords)
        self.active_bool = self._tightness_table()
        self.packed_masks = np.packbits(self.active_bool, axis=1)
        self.facet_sets = [
            np.flatnonzero(self.active_bool[:, j]).astype(np.uint32)
            for j in range(len(facets))
        ]
        self.action = self._build_action()

    def clone_with_coords(self, coords: list[tuple], facets: list[FacetSpec]) -> "VertexSet":
        """Same combinatorics, new exact geometry (another parameter value in
        the same phase).  The tightness pattern must match exactly; a mismatch
        means the parameter fell outside the phase."""
        other = VertexSet.__new__(VertexSet)
        other.coords = coords
        other.facets = facets
        other.group = self.group
        other.scaled = ScaledPoints(coords)
        other.active_bool = other._tightness_table()
        if other.active_bool.shape != self.active_bool.shape or (
            other.active_bool != self.active_bool
        ).any():
            raise InputError(
                "facet tightness pattern changed: parameter crossed a phase boundary"
            )
        other.packed_masks = self.packed_masks
        other.facet_sets = self.facet_sets
        other.action = self.action
        return other

    def _tightness_table(self) -> np.ndarray:
        normals = ScaledPoints([f.normal for f in self.facets])
        dv, dn = self.scaled.denominator, normals.denominator
        rhs_scaled = []
        for f in self.facets:
            r = f.rhs * dv * dn
            if r.denominator != 1:
                raise InternalConsistencyError("facet rhs does not scale to an integer")
            rhs_scaled.append(int(r.numerator))
        if self.scaled.safe_matmul_bound(normals):
            dots = self.scaled.array @ normals.array.T
            table = dots == np.array(rhs_scaled, dtype=np.int64)[None, :]
            # exact feasibility check rides along
            if (dots > np.array(rhs_scaled, dtype=np.int64)[None, :]).any():
                raise InternalConsistencyError("vertex violates a facet inequality")
            return table
        log.info("tightness table: falling back to exact object arithmetic")
        dots = self.scaled.int_rows @ normals.int_rows.T
        rhs_arr = np.array(rhs_scaled, dtype=object)
        if (dots > rhs_arr[None, :]).any():
            raise InternalConsistencyError("vertex violates a facet inequality")
        return (dots == rhs_arr[None, :]).astype(bool)

    def _build_action(self) -> VertexAction:
        action = VertexAction.__new__(VertexAction)
        action.group = self.group
        keys = {self._key(v): i for i, v in enumerate(self.coords)}
        perms = []
        for g in self.group.generators:
            perm = np.empty(len(self.coords), dtype=np.int64)
            for i, v in enumerate(self.coords):
                w = g.apply(v)
                j = keys.get(self._key(w))
                if j is None:
                    raise InternalConsistencyError(
                        "group generator does not permute the vertex set"
                    )
                perm[i] = j
            perms.append(perm)
        action.perms = perms
        if self.group.all_signed_perms():
            action.coord_sperms = [
                np.array(g.sperm, dtype=np.int8) for g in self.group.generators
            ]
        else:
            action.coord_sperms = None
        return action

    def _key(self, v) -> tuple:
        return tuple(v)

    def __len__(self):
        return len(self.coords)


def enumerate_vertices(
    facets: list[FacetSpec],
    group: GroupSpec,
    seed: int = 0,
    saturation: int = DEFAULT_SATURATION,
    draw_budget: int = DEFAULT_DRAW_BUDGET,
) -> tuple[list[tuple], list[list[tuple]]]:
    """All cell vertices grouped into symmetry orbits.

    Repeatedly maximizes a seeded pseudo-random integer objective over the
    facet description; each optimum is a vertex whose whole orbit is added.
    After ``saturation`` consecutive draws add nothing new, the set is closed
    deterministically by walking the polytope edge graph (vertex-cone extreme
    rays, exact ray shooting); the graph is connected, so the closure finds
    every vertex.  The volume identity downstream re-certifies completeness.
    """
    n = len(facets[0].normal)
    rows = [f.normal for f in facets]
    rhs = [f.rhs for f in facets]
    rng = random.Random(seed)
    seen: set[tuple] = set()
    orbits: list[list[tuple]] = []
    misses = 0
    draws = 0
    while misses < saturation:
        draws += 1
        if draws > draw_budget:
            raise ResourceError(f"vertex saturation not reached in {draw_budget} draws")
        c = tuple(rng.randint(-_OBJECTIVE_SPAN, _OBJECTIVE_SPAN) for _ in range(n))
        if all(v == 0 for v in c):
            continue
        res = maximize(rows, rhs, c)
        if res.x in seen:
            misses += 1
            continue
        orb = orbit_vectors(res.x, group)
        if any(v in seen for v in orb):
            raise InternalConsistencyError("orbit closure disagrees with vertex dedup")
        seen.update(orb)
        orbits.append(orb)
        misses = 0
        log.info("vertex orbit %d: size %d (total %d)", len(orbits), len(orb), len(seen))

    queue = [orb[0] for orb in orbits]
    while queue:
        v = queue.pop()
        for w in _edge_neighbors(v, rows, rhs):
            if w in seen:
                continue
            orb = orbit_vectors(w, group)
            seen.update(orb)
            orbits.append(orb)
            queue.append(orb[0])
            log.info(
                "edge-walk orbit %d: size %d (total %d)", len(orbits), len(orb), len(seen)
            )
    return sorted(seen), orbits


def _edge_neighbors(v: tuple, rows: list[tuple], rhs: list) -> list[tuple]:
    """Adjacent vertices along the cell edges leaving v (exact)."""
    active = [i for i in range(len(rows)) if vec_dot(rows[i], v) == rhs[i]]
    neighbors = []
    for ray in _cone_extreme_rays([rows[i] for i in active]):
        tmin = None
        for a, b in zip(rows, rhs):
            ad = vec_dot(a, ray)
            if ad > 0:
                t = (b - vec_dot(a, v)) / ad
                if tmin is None or t < tmin:
                    tmin = t
        if tmin is None or tmin <= 0:
            raise InternalConsistencyError("edge ray does not hit another facet")
        neighbors.append(tuple(vi + tmin * ri for vi, ri in zip(v, ray)))
    return neighbors


def _cone_extreme_rays(normals: list[tuple]) -> list[tuple]:
    """Extreme rays of the pointed cone {d : a . d <= 0 for all a}, by exact
    incremental double description from a simplicial subcone."""
    n = len(normals[0])
    rb = RowBasis(n)
    base_idx = []
    for i, a in enumerate(normals):
        if rb.add(a):
            base_idx.append(i)
            if rb.rank == n:
                break
    if rb.rank < n:
        raise InternalConsistencyError("vertex cone is not pointed (rank-deficient active set)")
    from .linalg import mat_inverse

    ainv = mat_inverse([normals[i] for i in base_idx])
    cols = list(zip(*ainv))
    # a_i . ray_j = -delta_ij on the chosen subset: a simplicial pointed cone
    rays = [_primitive_direction(tuple(-c for c in cols[j])) for j in range(n)]
    inserted = list(base_idx)

    def tight_mask(ray) -> int:
        mask = 0
        for idx in inserted:
            if vec_dot(normals[idx], ray) == 0:
                mask |= 1 << idx
        return mask

    for i in range(len(normals)):
        if i in base_idx:
            continue
        a = normals[i]
        vals = [vec_dot(a, r) for r in rays]
        inserted.append(i)
        if all(v <= 0 for v in vals):
            continue
        masks = [tight_mask(r) for r in rays]
        keep = [rays[k] for k, v in enumerate(vals) if v <= 0]
        new = []
        neg = [k for k, v in enumerate(vals) if v < 0]
        pos = [k for k, v in enumerate(vals) if v > 0]
        for kn in neg:
            for kp in pos:
                common = masks[kn] & masks[kp]
                adjacent = True
                for ko in range(len(rays)):
                    if ko not in (kn, kp) and (common & masks[ko]) == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                # positive combination zeroing a: vals[kp] * r_neg - vals[kn] * r_pos
                combo = tuple(
                    vals[kp] * rnj - vals[kn] * rpj
                    for rnj, rpj in zip(rays[kn], rays[kp])
                )
                new.append(_primitive_direction(combo))
        rays = keep + new
    return sorted(set(rays))


def _primitive_direction(ray: tuple) -> tuple:
    """Scale an exact rational direction to coprime integers (sign preserved)."""
    den = mpz(1)
    for c in ray:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [c.numerator * (den // c.denominator) for c in ray]
    g = mpz(0)
    for v in ints:
        g = gcd(g, v)
    return tuple(QQ(v, g) for v in ints)


@dataclass
class ChildLink:
    orbit_id: int
    transform: tuple  # signed permutation carrying the child-orbit rep onto this child
    face: np.ndarray  # actual sorted vertex indices of the child instance


@dataclass
class FaceOrbitRecord:
    dim: int
    orbit_id: int
    rep: np.ndarray
    size: int
    children: list[ChildLink] = field(default_factory=list)
    class_id: int | None = None

    @property
    def vertex_count(self) -> int:
        return len(self.rep)


@dataclass
class FaceClass:
    dim: int
    class_id: int
    orbit_ids: list[int]
    total: int
    vertex_count: int
    child_class_multiset: tuple
    label: str = ""


class FaceLattice:
    """Orbit-reduced incidence structure of one Voronoi cell."""

    def __init__(self, vset: VertexSet):
        self.vset = vset
        self.records: dict[int, list[FaceOrbitRecord]] = {}
        self.by_id: dict[int, FaceOrbitRecord] = {}
        self.facet_instances: list[tuple[int, tuple]] = []  # (orbit_id, transform)
        self.classes: dict[int, list[FaceClass]] = {}
        self.dim = len(vset.coords[0])

    def totals(self) -> dict[int, int]:
        return {
            d: sum(r.size for r in recs) for d, recs in sorted(self.records.items())
        }

    def euler_alternating_sum(self) -> int:
        return sum(
            (-1) ** d * t for d, t in self.totals().items() if d < self.dim
        )


def _face_active_mask(packed: np.ndarray, face: np.ndarray) -> np.ndarray:
    return np.bitwise_and.reduce(packed[face], axis=0)


def _children_of(face: np.ndarray, vset: VertexSet) -> list[np.ndarray]:
    """Maximal proper subfaces: intersections with non-containing facets,
    deduplicated, then filtered to inclusion-maximal candidates."""
    mask = _face_active_mask(vset.packed_masks, face)
    mask_bits = np.unpackbits(mask)[: len(vset.facets)].astype(bool)
    cands: dict[bytes, np.ndarray] = {}
    act = vset.active_bool
    for j in np.flatnonzero(~mask_bits):
        sub = face[act[face, j]]
        if sub.size == 0 or sub.size == face.size:
            continue
        cands.setdefault(sub.astype(">u4").tobytes(), sub)
    if not cands:
        return []
    keys = sorted(cands)
    masks = np.stack([_face_active_mask(vset.packed_masks, cands[k]) for k in keys])
    # candidate i lies inside candidate j  <=>  mask_j is a (bitwise) subset of mask_i
    inside = ~(masks[None, :, :] & ~masks[:, None, :]).any(axis=2)
    np.fill_diagonal(inside, False)
    dominated = inside.any(axis=1)
    return [cands[k] for k, dom in zip(keys, dominated) if not dom]


class _IntAffineRank:
    """Exact affine rank over scaled integer coordinates (fraction-free rows)."""

    def __init__(self, int_rows: np.ndarray, face: np.ndarray):
        self.rows = [[mpz(v) for v in int_rows[i]] for i in face]

    def rank(self) -> int:
        base = self.rows[0]
        width = len(base)
        basis: list[list] = []
        pivots: list[int] = []
        for row in self.rows[1:]:
            r = [a - b for a, b in zip(row, base)]
            for brow, pc in zip(basis, pivots):
                f = r[pc]
                if f:
                    lead = brow[pc]
                    r = [a * lead - f * b for a, b in zip(r, brow)]
            pc = next((k for k, v in enumerate(r) if v), None)
            if pc is not None:
                g = mpz(0)
                for v in r:
                    g = gcd(g, v)
                r = [v // g for v in r]
                basis.append(r)
                pivots.append(pc)
                if len(basis) == width:
                    break
        return len(basis)


def build_face_lattice(
    vset: VertexSet,
    orbit_cap: int = 10**7,
) -> FaceLattice:
    """Top-down orbit-reduced face lattice with exact rank verification."""
    lattice = FaceLattice(vset)
    n = lattice.dim
    next_id = 0

    # dimension n-1: the facets themselves
    pool: dict[bytes, np.ndarray] = {}
    for fs in vset.facet_sets:
        pool.setdefault(fs.astype(">u4").tobytes(), fs)
    facet_key_to_assignment: dict[bytes, tuple[int, tuple]] = {}
    records: list[FaceOrbitRecord] = []
    for key in sorted(pool):
        if key in facet_key_to_assignment:
            continue
        orbit = face_orbit_bfs(pool[key], vset.action, queries=set(pool), cap=orbit_cap)
        rec = FaceOrbitRecord(n - 1, next_id, orbit.rep, orbit.size)
        records.append(rec)
        for k, tr in orbit.member_transforms.items():
            facet_key_to_assignment[k] = (next_id, tr)
        next_id += 1
    lattice.records[n - 1] = records
    for rec in records:
        lattice.by_id[rec.orbit_id] = rec
    for fs in vset.facet_sets:
        key = fs.astype(">u4").tobytes()
        lattice.facet_instances.append(facet_key_to_assignment[key])
    _verify_rank(lattice, records, n - 1)
    log.info("dim %d: %d orbits, %d faces", n - 1, len(records), sum(r.size for r in records))

    for d in range(n - 1, 0, -1):
        parent_records = lattice.records[d]
        pool = {}
        per_parent: list[list[np.ndarray]] = []
        for rec in parent_records:
            kids = _children_of(rec.rep, vset)
            per_parent.append(kids)
            for kid in kids:
                pool.setdefault(kid.astype(">u4").tobytes(), kid)
        assignment: dict[bytes, tuple[int, tuple]] = {}
        child_records: list[FaceOrbitRecord] = []
        for key in sorted(pool):
            if key in assignment:
                continue
            orbit = face_orbit_bfs(pool[key], vset.action, queries=set(pool), cap=orbit_cap)
            rec = FaceOrbitRecord(d - 1, next_id, orbit.rep, orbit.size)
            child_records.append(rec)
            for k, tr in orbit.member_transforms.items():
                assignment[k] = (next_id, tr)
            next_id += 1
        for rec, kids in zip(parent_records, per_parent):
            for kid in kids:
                oid, tr = assignment[kid.astype(">u4").tobytes()]
                rec.children.append(ChildLink(oid, tr, kid))
            rec.children.sort(key=lambda cl: (cl.orbit_id, cl.face.astype(">u4").tobytes()))
        lattice.records[d - 1] = child_records
        for rec in child_records:
            lattice.by_id[rec.orbit_id] = rec
        _verify_rank(lattice, child_records, d - 1)
        log.info(
            "dim %d: %d orbits, %d faces",
            d - 1,
            len(child_records),
            sum(r.size for r in child_records),
        )

    _verify_parent_cover(lattice)
    return lattice


def _verify_rank(lattice: FaceLattice, records: list[FaceOrbitRecord], dim: int) -> None:
    for rec in records:
        r = _IntAffineRank(lattice.vset.scaled.int_rows, rec.rep).rank()
        if r != dim:
            raise InternalConsistencyError(
                f"face orbit {rec.orbit_id}: affine rank {r} != dimension {dim}"
            )


def _verify_parent_cover(lattice: FaceLattice) -> None:
    """Every face's vertex set must be the union of its children's vertex sets."""
    for d, recs in lattice.records.items():
        if d < 1:
            continue
        for rec in recs:
            if not rec.children:
                raise InternalConsistencyError(f"face orbit {rec.orbit_id} has no children")
            union = np.unique(np.concatenate([cl.face for cl in rec.children]))
            if union.size != rec.rep.size or (union != np.sort(rec.rep)).any():
                raise InternalConsistencyError(
                    f"children of orbit {rec.orbit_id} do not cover the face"
                )


def classify_faces(lattice: FaceLattice, volumes2: dict[int, QQ]) -> None:
    """Group orbits into congruence classes by the recursive structural key
    (dim, vertex count, child-class multiset, exact squared volume)."""
    next_class = 0
    for d in sorted(lattice.records):
        buckets: dict[tuple, list[FaceOrbitRecord]] = {}
        for rec in lattice.records[d]:
            child_multiset = tuple(
                sorted(lattice.by_id[cl.orbit_id].class_id for cl in rec.children)
            )
            v2 = volumes2[rec.orbit_id]
            key = (d, rec.vertex_count, child_multiset, (v2.numerator, v2.denominator))
            buckets.setdefault(key, []).append(rec)
        classes = []
        for key in sorted(buckets):
            recs = buckets[key]
            cid = next_class
            next_class += 1
            for rec in recs:
                rec.class_id = cid
            classes.append(
                FaceClass(
                    dim=d,
                    class_id=cid,
                    orbit_ids=[r.orbit_id for r in recs],
                    total=sum(r.size for r in recs),
                    vertex_count=key[1],
                    child_class_multiset=key[2],
                )
            )
        # labels follow descending face counts within the dimension
        classes.sort(key=lambda c: (-c.total, c.class_id))
        for t, c in enumerate(classes, start=1):
            c.label = f"F_{d}^{t}"
        lattice.classes[d] = classes


def facet_vertex_set(lattice_or_vset, facet_index: int) -> np.ndarray:
    vset = lattice_or_vset.vset if isinstance(lattice_or_vset, FaceLattice) else lattice_or_vset
    return vset.facet_sets[facet_index]


class CellComplex:
    """Everything combinatorial about one cell at one rational parameter."""

    def __init__(
        self,
        basis: GeneratorMatrix,
        group: GroupSpec,
        seed: int = 0,
        saturation: int = DEFAULT_SATURATION,
        orbit_cap: int = 10**7,
    ):
        if not group.verify_preserves_lattice(basis.rows, basis.inverse):
            raise InputError("supplied group does not preserve the lattice")
        self.basis = basis
        self.group = group
        self.rset = relevant_vectors(basis, group)
        self.facets = facet_specs(self.rset)
        coords, orbit_lists = enumerate_vertices(
            self.facets, group, seed=seed, saturation=saturation
        )
        self.vset = VertexSet(coords, self.facets, group)
        index_of = {tuple(v): i for i, v in enumerate(coords)}
        self.vertex_orbits = []
        for orb in sorted(orbit_lists, key=lambda o: o[0]):
            idx = sorted(index_of[tuple(v)] for v in orb)
            self.vertex_orbits.append(
                VertexOrbitRecord(indices=idx, rep_index=idx[0], size=len(idx))
            )
        self._check_every_facet_touched()
        self.lattice = build_face_lattice(self.vset, orbit_cap=orbit_cap)

    @classmethod
    def at_new_parameter(
        cls, reference: "CellComplex", basis: GeneratorMatrix, coords: list[tuple]
    ) -> "CellComplex":
        """Reuse the reference combinatorics with geometry at another parameter."""
        facets = facet_specs(relevant_from_patterns(reference.rset, basis))
        other = cls.__new__(cls)
        other.basis = basis
        other.group = reference.group
        other.rset = reference.rset
        other.facets = facets
        other.vset = reference.vset.clone_with_coords(coords, facets)
        other.vertex_orbits = reference.vertex_orbits
        other.lattice = FaceLattice(other.vset)
        other.lattice.records = reference.lattice.records
        other.lattice.by_id = reference.lattice.by_id
        other.lattice.facet_instances = reference.lattice.facet_instances
        other.lattice.classes = reference.lattice.classes
        return other

    def _check_every_facet_touched(self):
        counts = self.vset.active_bool.sum(axis=0)
        if (counts == 0).any():
            raise InternalConsistencyError("a facet inequality is tight on no vertex")

    def vertex_incidence_triples(self) -> list[tuple]:
        """Per vertex orbit: count of tight facets per facet orbit, at the rep vertex."""
        facet_orbit_of = {}
        for j, (oid, _) in enumerate(self.lattice.facet_instances):
            facet_orbit_of[j] = oid
        orbit_ids = sorted({oid for oid, _ in self.lattice.facet_instances})
        triples = []
        for vo in self.vertex_orbits:
            row = self.vset.active_bool[vo.rep_index]
            counts = {oid: 0 for oid in orbit_ids}
            for j in np.flatnonzero(row):
                counts[facet_orbit_of[j]] += 1
            triples.append(tuple(counts[oid] for oid in orbit_ids))
        return triples
