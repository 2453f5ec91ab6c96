"""Exact volumes, barycenters, and second-moment tensors by pyramid recursion.

Everything is computed once per face orbit on its representative and
transported onto actual child instances by the recorded group transforms.
Volumes and tensors are single-radical numbers whose radicand is a property of
the face; a radicand mismatch inside any sum means the incidence or rank data
is wrong and is raised as a geometry inconsistency, never papered over.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

from gmpy2 import iroot, mpz

import numpy as np

from .approx import ApproxReal
from .errors import GeometryInconsistencyError, IncompatibleRadicandError, InputError
from .lattice import GeneratorMatrix, closest_points
from .linalg import (
    det,
    gram_matrix,
    independent_point_subset,
    vec_dot,
    vec_norm2,
    vec_scale,
    vec_sub,
)
from .radical import RadQ, radq_sqrt
from .rational import QQ, ZERO
from .voronoi import CellComplex, FaceLattice, _children_of

log = logging.getLogger(__name__)


@dataclass
class MomentRecord:
    """Exact geometry of one face orbit, in the representative's frame."""

    orbit_id: int
    dim: int
    volume: RadQ
    centroid: tuple
    offset: tuple  # barycenter - centroid; exactly rational
    tensor: list  # rational coefficient matrix: U = tensor * sqrt(radicand)
    radicand: int
    spanning: list  # affine spanning vectors of the representative
    span_gram: list  # cached Gram matrix of the spanning vectors
    span_gram_det: QQ = None

    @property
    def barycenter(self) -> tuple:
        return tuple(c + o for c, o in zip(self.centroid, self.offset))

    def tensor_radq(self, i: int, j: int) -> RadQ:
        return RadQ(self.tensor[i][j], self.radicand)

    def tensor_trace(self) -> RadQ:
        tr = sum((self.tensor[i][i] for i in range(len(self.tensor))), ZERO)
        return RadQ(tr, self.radicand)


def _apply_sperm_vec(sperm: tuple, v: tuple) -> tuple:
    out = []
    for s in sperm:
        x = v[abs(s) - 1]
        out.append(x if s > 0 else -x)
    return tuple(out)


def _apply_sperm_tensor(sperm: tuple, m: list) -> list:
    n = len(sperm)
    idx = [abs(s) - 1 for s in sperm]
    sgn = [1 if s > 0 else -1 for s in sperm]
    return [
        [m[idx[i]][idx[j]] if sgn[i] * sgn[j] > 0 else -m[idx[i]][idx[j]] for j in range(n)]
        for i in range(n)
    ]


def _height_squared(child: MomentRecord, transform: tuple, apex: tuple, child_centroid_inst: tuple) -> QQ:
    """Squared distance from apex to the child's affine span, by bordered Gram
    determinants.  The child's spanning-vector Gram matrix is isometry-
    invariant, so only the border (dots against apex - centroid) is instance work.
    """
    v = vec_sub(apex, child_centroid_inst)
    if child.dim == 0:
        h2 = vec_norm2(v)
    else:
        span_inst = [_apply_sperm_vec(transform, s) for s in child.spanning]
        border = [vec_dot(s, v) for s in span_inst]
        g = [list(row) + [b] for row, b in zip(child.span_gram, border)]
        g.append(border + [vec_norm2(v)])
        gnum = det(g)
        gden = child.span_gram_det
        if gden == 0:
            raise GeometryInconsistencyError("degenerate child span (zero Gram determinant)")
        h2 = gnum / gden
    if h2 <= 0:
        raise GeometryInconsistencyError("apex lies on the child plane")
    return h2


def _centroid(coords: list[tuple], face) -> tuple:
    total = None
    for i in face:
        p = coords[i]
        total = p if total is None else tuple(a + b for a, b in zip(total, p))
    inv = QQ(1, len(face))
    return tuple(a * inv for a in total)


def compute_face_moments(cell: CellComplex) -> dict[int, MomentRecord]:
    """Bottom-up exact moment recursion over orbit representatives."""
    coords = cell.vset.coords
    n = cell.lattice.dim
    records: dict[int, MomentRecord] = {}
    for d in sorted(cell.lattice.records):
        for rec in cell.lattice.records[d]:
            records[rec.orbit_id] = _face_moment(cell, rec, records, coords, d)
        log.info("moments: dimension %d done (%d orbits)", d, len(cell.lattice.records[d]))
    return records


def _face_moment(cell, rec, records, coords, d) -> MomentRecord:
    zero = tuple([ZERO] * cell.lattice.dim)
    if d == 0:
        v = coords[int(rec.rep[0])]
        dimn = cell.lattice.dim
        return MomentRecord(
            rec.orbit_id,
            0,
            RadQ.from_rational(1),
            v,
            zero,
            [[ZERO] * dimn for _ in range(dimn)],
            1,
            [],
            [],
            QQ(1),
        )
    face_points = [coords[int(i)] for i in rec.rep]
    centroid = _centroid(coords, rec.rep)
    try:
        contributions = _pyramid_sums(cell, rec.children, records, coords, centroid, d)
    except IncompatibleRadicandError as exc:
        raise GeometryInconsistencyError(
            f"radicand mismatch inside face orbit {rec.orbit_id}: {exc}"
        ) from exc
    volume, offset, tensor, radicand = contributions
    if volume.sign() <= 0:
        raise GeometryInconsistencyError(f"nonpositive volume for orbit {rec.orbit_id}")
    spanning_idx = independent_point_subset(face_points, d)
    spanning = [vec_sub(face_points[i], face_points[0]) for i in spanning_idx]
    span_gram = gram_matrix(spanning)
    return MomentRecord(
        rec.orbit_id,
        d,
        volume,
        centroid,
        offset,
        tensor,
        radicand,
        spanning,
        span_gram,
        det(span_gram),
    )


def _pyramid_sums(cell, children, records, coords, centroid, d):
    """One recursion step: volume, barycenter offset, and tensor about the barycenter.

    Only the first pyramid term ever factors an integer (to discover the face
    radicand); every later square root is validated against that radicand with
    a single exact perfect-square test, which both avoids factoring large
    barycenter denominators and acts as the radicand-coherence tripwire.
    """
    dimn = cell.lattice.dim
    # volume: V_d = (1/d) sum h_i V_{d-1}^i, heights from the centroid
    vol_sum = None
    radicand = None
    per_child = []
    for cl in children:
        child = records[cl.orbit_id]
        c_inst = _apply_sperm_vec(cl.transform, child.centroid)
        h2 = _height_squared(child, cl.transform, centroid, c_inst)
        if radicand is None:
            # only the centroid height is ever factored; its reduced form is tame
            hv = radq_sqrt(h2) * child.volume
            radicand = int(hv.radicand)
        else:
            hv = RadQ.sqrt_with_radicand(h2 * child.volume.squared(), radicand)
        vol_sum = hv if vol_sum is None else vol_sum + hv
        per_child.append((cl, child, c_inst, hv))
    if vol_sum is None:
        raise GeometryInconsistencyError("face with no children in the recursion")
    volume = vol_sum * QQ(1, d)

    # barycenter offset: rational because hv / V_d is rational
    offset = [ZERO] * dimn
    for cl, child, c_inst, hv in per_child:
        lam = (hv / volume).as_rational()
        o_inst = _apply_sperm_vec(cl.transform, child.offset)
        for k in range(dimn):
            offset[k] += lam * (o_inst[k] + c_inst[k] - centroid[k])
    inv = QQ(1, d + 1)
    offset = tuple(o * inv for o in offset)
    barycenter = tuple(c + o for c, o in zip(centroid, offset))

    # second moment about the barycenter, heights now from the barycenter
    tensor = [[ZERO] * dimn for _ in range(dimn)]
    for cl, child, c_inst, hv in per_child:
        h2b = _height_squared(child, cl.transform, barycenter, c_inst)
        # h_b * sqrt(child radicand) must carry the face radicand; cheap check
        hb_schild = RadQ.sqrt_with_radicand(h2b * child.radicand, radicand)
        cu = hb_schild.coeff
        # h_b * V_child = (h_b sqrt(s_child)) * (V coeff): same radicand
        cv = cu * child.volume.coeff
        child_tensor_nonzero = any(any(v != 0 for v in row) for row in child.tensor)
        u_inst = _apply_sperm_tensor(cl.transform, child.tensor) if child_tensor_nonzero else None
        b_inst = tuple(
            ci + oi for ci, oi in zip(c_inst, _apply_sperm_vec(cl.transform, child.offset))
        )
        diff = vec_sub(barycenter, b_inst)
        for i in range(dimn):
            di = diff[i]
            rowt = tensor[i]
            if u_inst is not None:
                rowu = u_inst[i]
                for j in range(dimn):
                    rowt[j] += cu * rowu[j] + cv * di * diff[j]
            elif di != 0:
                for j in range(dimn):
                    rowt[j] += cv * di * diff[j]
    inv2 = QQ(1, d + 2)
    tensor = [[v * inv2 for v in row] for row in tensor]
    return volume, offset, tensor, radicand


@dataclass
class CellSummary:
    """Cell-level results: exact volume, scalar and tensor second moment, and
    the dimensionless quantizer figure of merit."""

    dimension: int
    volume: QQ
    second_moment: QQ
    tensor: list
    g_value: ApproxReal
    g_exact: QQ | None = None
    alpha: QQ | None = None
    beta: QQ | None = None


def cell_summary(cell: CellComplex, records: dict[int, MomentRecord], split_last_axis: bool = False) -> CellSummary:
    """One more recursion step over all facet instances, apex at the origin.

    The recursion volume must equal |det B| exactly; that identity certifies
    that the vertex set was complete, so a mismatch is raised, not patched.
    """
    from .voronoi import ChildLink

    n = cell.lattice.dim
    links = [
        ChildLink(oid, tr, cell.vset.facet_sets[j])
        for j, (oid, tr) in enumerate(cell.lattice.facet_instances)
    ]
    zero = tuple([ZERO] * n)
    try:
        volume, offset, tensor, radicand = _pyramid_sums(
            cell, links, records, cell.vset.coords, zero, n
        )
    except IncompatibleRadicandError as exc:
        raise GeometryInconsistencyError(f"radicand mismatch at the cell level: {exc}") from exc
    if radicand != 1 or not volume.is_rational():
        raise GeometryInconsistencyError("cell volume or tensor came out irrational")
    vol = volume.as_rational()
    expected = abs(cell.basis.determinant)
    if vol != expected:
        raise GeometryInconsistencyError(
            f"volume recursion gave {vol}, generator determinant gives {expected}: "
            "vertex enumeration is incomplete or facets are wrong"
        )
    if any(o != 0 for o in offset):
        raise GeometryInconsistencyError("cell barycenter is not at the origin")
    trace = sum((tensor[i][i] for i in range(n)), ZERO)

    alpha = beta = None
    if split_last_axis:
        for i in range(n):
            for j in range(n):
                if i != j and tensor[i][j] != 0:
                    raise GeometryInconsistencyError(
                        f"tensor off-diagonal ({i},{j}) is {tensor[i][j]}, expected 0"
                    )
        first = tensor[0][0]
        for i in range(1, n - 1):
            if tensor[i][i] != first:
                raise GeometryInconsistencyError(
                    "tensor diagonal is not constant on the stacked-base axes"
                )
        alpha = first
        beta = tensor[n - 1][n - 1] - first

    g_exact = None
    num, den = (vol ** (n + 2)).numerator, (vol ** (n + 2)).denominator
    rn, en = iroot(mpz(num), n)
    rd, ed = iroot(mpz(den), n)
    if en and ed:
        g_exact = trace / (n * QQ(rn, rd))
        g_value = ApproxReal.exactly(g_exact)
    else:
        g_value = ApproxReal.exactly(trace) / (ApproxReal.rational_power(vol, n + 2, n) * n)
    return CellSummary(
        dimension=n,
        volume=vol,
        second_moment=trace,
        tensor=tensor,
        g_value=g_value,
        g_exact=g_exact,
        alpha=alpha,
        beta=beta,
    )


def simplex_moment_oracle(cell: CellComplex) -> tuple[QQ, list]:
    """Independent check path: triangulate the cell into origin-rooted
    simplices by recursive centroid insertion; sum determinant volumes and the
    normalized simplex tensors.  Exact and fully rational; dimensions <= 5 only
    (the simplex count explodes combinatorially above that)."""
    n = cell.lattice.dim
    if n > 5:
        raise InputError("triangulation oracle is limited to dimension <= 5")
    coords = cell.vset.coords
    vset = cell.vset
    memo: dict[bytes, list] = {}

    def simplices(face: np.ndarray, d: int) -> list[tuple]:
        key = face.astype(">u4").tobytes()
        got = memo.get(key)
        if got is not None:
            return got
        if d == 1:
            pts = [coords[int(i)] for i in face]
            if len(pts) != 2:
                raise GeometryInconsistencyError("edge without exactly two vertices")
            out = [tuple(pts)]
        else:
            cent = _centroid(coords, face)
            out = []
            for child in _children_of(face, vset):
                for s in simplices(child, d - 1):
                    out.append(s + (cent,))
        memo[key] = out
        return out

    volume = ZERO
    tensor = [[ZERO] * n for _ in range(n)]
    fac = 1
    for k in range(2, n + 1):
        fac *= k
    denom_i = QQ(1, (n + 1) * (n + 2))
    for fs in vset.facet_sets:
        for s in simplices(fs, n - 1):
            mat = [list(p) for p in s]
            v = det(mat)
            if v < 0:
                v = -v
            v = v / fac
            if v == 0:
                continue
            volume += v
            total = [ZERO] * n
            for p in s:
                for i in range(n):
                    total[i] += p[i]
            for i in range(n):
                ti = total[i]
                row = tensor[i]
                for j in range(n):
                    acc = ti * total[j]
                    for p in s:
                        acc += p[i] * p[j]
                    row[j] += v * acc * denom_i
    return volume, tensor


class LayeredDecoder:
    """Exact closest-point search for laminated bases: enumerate candidate top
    layers, then delegate to branch-and-bound in the base lattice.  Used by the
    Monte Carlo driver; property-tested equal to the direct search."""

    def __init__(self, base: GeneratorMatrix, offset, a):
        self.base = base
        self.offset = tuple(QQ(v) for v in offset)
        self.a = QQ(a)

    def closest(self, x) -> tuple:
        xb, xn = x[:-1], x[-1]
        from .rational import rational_round

        k0 = rational_round(xn / self.a)
        best = None
        winners: list[tuple] = []
        for start, step in ((k0, 1), (k0 - 1, -1)):
            k = start
            while True:
                dz = xn - k * self.a
                layer = dz * dz
                if best is not None and layer > best:
                    break
                shift = vec_scale(self.offset, k)
                target = vec_sub(xb, shift)
                for p in closest_points(self.base, target):
                    full = tuple(pi + si for pi, si in zip(p, shift)) + (k * self.a,)
                    d2 = layer + vec_norm2(vec_sub(target, p))
                    if best is None or d2 < best:
                        best = d2
                        winners = [full]
                    elif d2 == best:
                        winners.append(full)
                k += step
        return min(winners)


_MC_CONTEXT = None


def _mc_squared_error(index: int) -> float:
    basis, decoder, seed, bits = _MC_CONTEXT
    n = basis.n
    # per-index stream: sharding across workers cannot reorder the draws
    rng = random.Random((seed << 40) ^ index)
    scale = mpz(1) << bits
    u = [QQ(rng.getrandbits(bits), scale) for _ in range(n)]
    x = [ZERO] * n
    for ui, row in zip(u, basis.rows):
        for i in range(n):
            x[i] += ui * row[i]
    x = tuple(x)
    if decoder is not None:
        q = decoder.closest(x)
    else:
        q = closest_points(basis, x)[0]
    return float(vec_norm2(vec_sub(x, q)))


def monte_carlo_g(
    basis: GeneratorMatrix,
    samples: int,
    seed: int,
    decoder=None,
    bits: int = 30,
    workers: int = 1,
) -> tuple[float, float]:
    """Seeded Monte Carlo estimate of the dimensionless second moment.

    Draws exact dyadic points uniformly in the fundamental parallelepiped,
    quantizes exactly (ties go to the lexicographically first point), and
    averages the squared error.  Each sample's randomness is keyed by (seed,
    index), so sharding across workers cannot change the estimate.  Returns
    (estimate, standard error); this is a diagnostic, never an acceptance
    authority.
    """
    if samples < 1:
        raise InputError("need at least one sample")
    global _MC_CONTEXT
    _MC_CONTEXT = (basis, decoder, seed, bits)
    try:
        if workers > 1:
            import multiprocessing

            with multiprocessing.get_context("fork").Pool(workers) as pool:
                errors = pool.map(_mc_squared_error, range(samples), chunksize=512)
        else:
            errors = [_mc_squared_error(i) for i in range(samples)]
    finally:
        _MC_CONTEXT = None
    n = basis.n
    vol = abs(basis.determinant)
    norm = n * float(vol) ** (2.0 / n)
    mean = sum(errors) / samples
    var = max(sum(e * e for e in errors) / samples - mean * mean, 0.0)
    stderr = (var / samples) ** 0.5
    return mean / norm, stderr / norm


def catalog_entries(cell: CellComplex, records: dict[int, MomentRecord]) -> list[dict]:
    """Face + moment catalog rows, one per congruence class, with per-child
    height data recomputed from the representative."""
    from .io import format_vector
    from .rational import format_rational

    entries = []
    for d in sorted(cell.lattice.classes):
        for cls in cell.lattice.classes[d]:
            rep_rec = cell.lattice.by_id[cls.orbit_ids[0]]
            mom = records[rep_rec.orbit_id]
            heights = []
            for clink in rep_rec.children:
                child = records[clink.orbit_id]
                c_inst = _apply_sperm_vec(clink.transform, child.centroid)
                h2 = _height_squared(child, clink.transform, mom.centroid, c_inst)
                heights.append(
                    {
                        "child_class": cell.lattice.by_id[clink.orbit_id].class_id,
                        "height_squared": format_rational(h2),
                    }
                )
            entries.append(
                {
                    "label": cls.label,
                    "dimension": d,
                    "count": cls.total,
                    "orbit_count": len(cls.orbit_ids),
                    "vertex_count": cls.vertex_count,
                    "child_class_multiset": list(cls.child_class_multiset),
                    "representative_vertices": [int(i) for i in rep_rec.rep],
                    "volume": mom.volume.to_json(),
                    "volume_decimal": f"{mom.volume.to_float():.12e}",
                    "centroid": format_vector(mom.centroid),
                    "barycenter_offset": format_vector(mom.offset),
                    "tensor_trace": mom.tensor_trace().to_json(),
                    "child_heights": heights,
                }
            )
    return entries
