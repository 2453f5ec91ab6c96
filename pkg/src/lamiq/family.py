"""Parameter sweeps over a laminated family: phase signatures and boundaries,
exact polynomial reconstruction of the moment functions, extremum polynomials,
root isolation, and the optimum report.

Inside one phase every vertex coordinate is an exact closed form in the
squared parameter: substituting y = a * x_last turns the active facet
equations into a linear system whose matrix is constant in a and whose right
side is linear in nu = a^2, so one exact solve gives the whole phase.  Each
sample is still verified from scratch (facet tightness pattern, vertex
distinctness, the volume-determinant identity), so the forms never smuggle in
an assumption about where the phase ends.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .approx import ApproxReal
from .errors import InputError, InternalConsistencyError, ResourceError
from .lattice import GeneratorMatrix, LaminatedFamily, relevant_vectors
from .linalg import solve_linear
from .moments import CellSummary, MomentRecord, cell_summary, compute_face_moments
from .polynomial import Poly, isolate_real_roots, refine_root
from .rational import QQ, ZERO, format_rational
from .symmetry import face_orbit_bfs
from .voronoi import CellComplex, classify_faces, enumerate_vertices, facet_specs

log = logging.getLogger(__name__)

DEFAULT_ROOT_WIDTH = QQ(1, 10**30)


@dataclass(frozen=True)
class PhaseSignature:
    """Combinatorial fingerprint of the cell; constant on a phase interior."""

    relevant_count: int
    vertex_count: int
    vertex_class_count: int
    face_totals: tuple
    face_class_counts: tuple


def phase_signature(basis: GeneratorMatrix, group, seed: int = 0, saturation: int = 200) -> PhaseSignature:
    cell = CellComplex(basis, group, seed=seed, saturation=saturation)
    records = compute_face_moments(cell)
    classify_faces(cell.lattice, {oid: r.volume.squared() for oid, r in records.items()})
    totals = cell.lattice.totals()
    return PhaseSignature(
        relevant_count=len(cell.facets),
        vertex_count=len(cell.vset),
        vertex_class_count=len(cell.vertex_orbits),
        face_totals=tuple(totals[d] for d in sorted(totals)),
        face_class_counts=tuple(len(cell.lattice.classes[d]) for d in sorted(cell.lattice.classes)),
    )


def cheap_signature(basis: GeneratorMatrix, group, seed: int = 0, with_vertices: bool = True) -> tuple:
    """Boundary-detection probe, cheapest first: the set of relevant-vector
    integer patterns (a discrete invariant that flips even when counts do
    not), then the vertex count."""
    rset = relevant_vectors(basis, group if with_vertices else None)
    patterns = frozenset(rset.coefficients)
    if not with_vertices:
        return (len(rset), patterns)
    coords, orbits = enumerate_vertices(facet_specs(rset), group, seed=seed, saturation=40)
    return (len(rset), patterns, len(coords), len(orbits))


@dataclass
class PhaseBracket:
    nu_lo: QQ
    nu_hi: QQ
    complete: bool = True

    def contains(self, nu) -> bool:
        return self.nu_lo < nu < self.nu_hi


def detect_phase_boundaries(
    family: LaminatedFamily,
    nu_interval: tuple,
    tolerance=QQ(1, 64),
    max_probes: int = 200,
    seed: int = 0,
    with_vertices: bool = True,
) -> list[PhaseBracket]:
    """Rational brackets around every signature change in the interval.

    Bisects on the parameter a (rational probes only); returns brackets in
    nu = a^2.  Never asserts exact boundary values.
    """
    nu_lo, nu_hi = QQ(nu_interval[0]), QQ(nu_interval[1])
    if not (0 < nu_lo < nu_hi):
        raise InputError("need 0 < nu_lo < nu_hi")
    probes_left = [max_probes]

    def sig_at(a) -> tuple:
        if probes_left[0] <= 0:
            raise ResourceError("probe budget exhausted")
        probes_left[0] -= 1
        return cheap_signature(family.instantiate(a), family.group, seed=seed, with_vertices=with_vertices)

    def rational_sqrt_below(nu) -> QQ:
        # dyadic a with a^2 slightly inside [nu, ...)
        from gmpy2 import isqrt, mpz

        scale = mpz(1) << 20
        num = (nu.numerator * scale * scale) // nu.denominator
        return QQ(isqrt(num), scale)

    a_lo = rational_sqrt_below(nu_lo)
    if a_lo * a_lo < nu_lo:
        a_lo += QQ(1, 1 << 20)
    a_hi = rational_sqrt_below(nu_hi)
    brackets: list[PhaseBracket] = []
    budget_ok = True

    def bisect(alo, ahi, slo, shi):
        nonlocal budget_ok
        if slo == shi:
            return
        if ahi * ahi - alo * alo <= tolerance:
            brackets.append(PhaseBracket(alo * alo, ahi * ahi))
            return
        mid = (alo + ahi) / 2
        try:
            smid = sig_at(mid)
        except ResourceError:
            budget_ok = False
            brackets.append(PhaseBracket(alo * alo, ahi * ahi, complete=False))
            return
        bisect(alo, mid, slo, smid)
        bisect(mid, ahi, smid, shi)

    bisect(a_lo, a_hi, sig_at(a_lo), sig_at(a_hi))
    brackets.sort(key=lambda b: b.nu_lo)
    if not budget_ok:
        log.warning("phase boundary detection stopped early: probe budget exhausted")
    return brackets


class VertexForms:
    """Exact per-vertex coordinate forms over one phase.

    Coordinates 1..n-1 are u + w * nu; the last is (u + w * nu) / a.  Built by
    solving each orbit representative's active facet system once (in the
    substituted variables) and transporting along the group.
    """

    def __init__(self, cell: CellComplex, family_dim: int):
        group = cell.group
        n = family_dim
        for g in group.generators:
            if g.sperm is None or abs(g.sperm[n - 1]) != n:
                raise InputError(
                    "coordinate forms need signed-permutation symmetries fixing the stacking axis"
                )
        self.n = n
        nv = len(cell.vset)
        self.u = np.empty((nv, n), dtype=object)
        self.w = np.empty((nv, n), dtype=object)
        a_ref = cell.basis.rows[n - 1][n - 1]
        nu_ref = a_ref * a_ref

        transforms = self._orbit_transforms(cell)
        for orbit in cell.vertex_orbits:
            rep = orbit.rep_index
            u_rep, w_rep = self._solve_forms(cell, rep, a_ref, nu_ref)
            for idx in orbit.indices:
                sperm = transforms[idx]
                for i, s in enumerate(sperm):
                    j = abs(s) - 1
                    if s > 0:
                        self.u[idx, i] = u_rep[j]
                        self.w[idx, i] = w_rep[j]
                    else:
                        self.u[idx, i] = -u_rep[j]
                        self.w[idx, i] = -w_rep[j]
        self._validate(cell, a_ref, nu_ref)

    def _orbit_transforms(self, cell: CellComplex) -> dict[int, tuple]:
        out: dict[int, tuple] = {}
        queries = {
            np.array([i], dtype=">u4").tobytes() for i in range(len(cell.vset))
        }
        for orbit in cell.vertex_orbits:
            rep_arr = np.array([orbit.rep_index], dtype=np.uint32)
            res = face_orbit_bfs(rep_arr, cell.vset.action, queries=queries)
            if res.size != orbit.size:
                raise InternalConsistencyError("vertex orbit closure mismatch")
            for key, sperm in res.member_transforms.items():
                idx = int(np.frombuffer(key, dtype=">u4")[0])
                out[idx] = sperm
        return out

    def _solve_forms(self, cell: CellComplex, idx: int, a_ref, nu_ref):
        n = self.n
        active = np.flatnonzero(cell.vset.active_bool[idx])
        rows = []
        r0 = []
        r1 = []
        chosen = []
        from .linalg import RowBasis

        rb = RowBasis(n)
        for j in active:
            f = cell.facets[j]
            zn = f.coefficients[n - 1]
            row = tuple(f.normal[: n - 1]) + (QQ(zn),)
            if rb.add(row):
                rows.append(row)
                chosen.append(j)
                # rhs = |m|^2/2 splits into a constant and a nu coefficient
                const = ZERO
                for k in range(n - 1):
                    const += f.normal[k] * f.normal[k]
                r0.append(const / 2)
                r1.append(QQ(zn * zn, 2))
                if rb.rank == n:
                    break
        if rb.rank < n:
            raise InternalConsistencyError("active facets do not determine the vertex")
        rep0 = solve_linear(rows, r0)
        rep1 = solve_linear(rows, r1)
        if not (rep0.unique and rep1.unique):
            raise InternalConsistencyError("vertex form solve failed")
        u, w = list(rep0.solution), list(rep1.solution)
        # consistency at the reference parameter
        coords = cell.vset.coords[idx]
        for k in range(n - 1):
            if u[k] + w[k] * nu_ref != coords[k]:
                raise InternalConsistencyError("vertex form mismatch at reference")
        if (u[n - 1] + w[n - 1] * nu_ref) / a_ref != coords[n - 1]:
            raise InternalConsistencyError("vertex form mismatch at reference")
        return u, w

    def _validate(self, cell: CellComplex, a_ref, nu_ref):
        coords = self.evaluate(a_ref)
        for have, want in zip(coords, cell.vset.coords):
            if have != want:
                raise InternalConsistencyError("transported vertex forms disagree at reference")

    def evaluate(self, a) -> list[tuple]:
        a = QQ(a)
        nu = a * a
        n = self.n
        out = []
        for i in range(self.u.shape[0]):
            row_u = self.u[i]
            row_w = self.w[i]
            coords = [row_u[k] + row_w[k] * nu for k in range(n - 1)]
            coords.append((row_u[n - 1] + row_w[n - 1] * nu) / a)
            out.append(tuple(coords))
        return out


@dataclass
class PhaseModel:
    """Reference combinatorics for one phase plus closed-form geometry."""

    family: LaminatedFamily
    bracket: PhaseBracket
    reference_a: QQ
    cell: CellComplex
    records: dict[int, MomentRecord]
    forms: VertexForms

    @classmethod
    def build(cls, family: LaminatedFamily, bracket: PhaseBracket, reference_a, seed: int = 0, saturation: int = 200) -> "PhaseModel":
        reference_a = QQ(reference_a)
        if not bracket.contains(reference_a * reference_a):
            raise InputError("reference parameter must lie inside the phase bracket")
        cell = CellComplex(family.instantiate(reference_a), family.group, seed=seed, saturation=saturation)
        records = compute_face_moments(cell)
        classify_faces(cell.lattice, {oid: r.volume.squared() for oid, r in records.items()})
        forms = VertexForms(cell, family.dim)
        return cls(family, bracket, reference_a, cell, records, forms)

    def instance_at(self, a) -> tuple[CellComplex, dict[int, MomentRecord]]:
        """Cell and per-orbit moments at a sample parameter (exact re-instantiation)."""
        a = QQ(a)
        if not self.bracket.contains(a * a):
            raise InputError(f"parameter {a} outside the phase bracket")
        if a == self.reference_a:
            return self.cell, self.records
        coords = self.forms.evaluate(a)
        if len({tuple(c) for c in coords}) != len(coords):
            raise InputError(f"vertices collide at {a}: phase boundary reached")
        basis = self.family.instantiate(a)
        sample_cell = CellComplex.at_new_parameter(self.cell, basis, coords)
        return sample_cell, compute_face_moments(sample_cell)

    def summary_at(self, a, split_last_axis: bool = True) -> CellSummary:
        cell, records = self.instance_at(a)
        return cell_summary(cell, records, split_last_axis=split_last_axis)


@dataclass
class PhaseFit:
    """Exact polynomials (in nu) of a^3 * U, a^3 * alpha, a^3 * beta, plus V/a."""

    bracket: PhaseBracket
    poly_u: Poly
    poly_alpha: Poly
    poly_beta: Poly
    volume_slope: QQ
    sample_values: list[QQ] = field(default_factory=list)
    holdout_values: list[QQ] = field(default_factory=list)


def sample_parameters(bracket: PhaseBracket, count: int, denominator_bits: int = 6) -> list[QQ]:
    """Distinct dyadic parameter values spread across the middle 80% of the
    phase bracket (in nu), never landing on the bracket edges."""
    width = bracket.nu_hi - bracket.nu_lo
    lo = bracket.nu_lo + width / 10
    hi = bracket.nu_hi - width / 10
    for bits in range(denominator_bits, denominator_bits + 14):
        den = 1 << bits
        ks = []
        k = 1
        while QQ(k * k, den * den) <= hi:
            if QQ(k * k, den * den) >= lo:
                ks.append(k)
            k += 1
        if len(ks) >= count:
            step = (len(ks) - 1) / (count - 1) if count > 1 else 0
            picked = sorted({ks[min(len(ks) - 1, round(i * step))] for i in range(count)})
            if len(picked) >= count:
                return [QQ(k, den) for k in picked[:count]]
    raise InputError("phase bracket too narrow to place the requested samples")


_ACTIVE_MODEL: "PhaseModel | None" = None


def _sample_task(a) -> CellSummary:
    return _ACTIVE_MODEL.summary_at(a)


def reconstruct_polynomials(
    model: PhaseModel,
    extra_checks: int = 2,
    workers: int = 1,
) -> PhaseFit:
    """Exact Vandermonde fit of the moment polynomials over one phase.

    Uses dim+4 samples to determine the dim+3 degree polynomial in nu, then
    requires exact equality on held-out samples; any residual means a sample
    crossed a phase boundary and is an error, not a warning.  Samples are
    independent; with workers > 1 they run in forked processes and are
    collected in task order, so results do not depend on the pool size.
    """
    n = model.family.dim
    need = n + 4 + extra_checks
    params = sample_parameters(model.bracket, need)
    if workers > 1:
        import multiprocessing

        global _ACTIVE_MODEL
        _ACTIVE_MODEL = model
        try:
            with multiprocessing.get_context("fork").Pool(workers) as pool:
                results = pool.map(_sample_task, params)
        finally:
            _ACTIVE_MODEL = None
        summaries = list(zip(params, results))
    else:
        summaries = []
        for a in params:
            summaries.append((a, model.summary_at(a)))
            log.info("phase sample a=%s done", format_rational(a))
    slope = None
    for a, s in summaries:
        this = s.volume / a
        if slope is None:
            slope = this
        elif slope != this:
            raise InternalConsistencyError("cell volume is not proportional to the parameter")
    fit_pts, holdout = summaries[: n + 4], summaries[n + 4 :]

    def fit(component) -> Poly:
        rows = []
        rhs = []
        for a, s in fit_pts:
            nu = a * a
            rows.append(tuple(nu**k for k in range(n + 4)))
            rhs.append(component(s) * a**3)
        rep = solve_linear(rows, rhs)
        if not rep.unique:
            raise InternalConsistencyError("moment fit system is singular")
        poly = Poly(rep.solution)
        for a, s in holdout:
            if poly(a * a) != component(s) * a**3:
                raise InputError(
                    "held-out sample disagrees with the fitted polynomial: "
                    "a sample crossed a phase boundary"
                )
        return poly

    fit_u = fit(lambda s: s.second_moment)
    fit_alpha = fit(lambda s: s.alpha)
    fit_beta = fit(lambda s: s.beta)
    return PhaseFit(
        bracket=model.bracket,
        poly_u=fit_u,
        poly_alpha=fit_alpha,
        poly_beta=fit_beta,
        volume_slope=slope,
        sample_values=[a for a, _ in fit_pts],
        holdout_values=[a for a, _ in holdout],
    )


def extremum_polynomial(poly_u: Poly, dim: int) -> Poly:
    """Stationarity condition of the figure of merit as a primitive integer
    polynomial in nu: dim * nu * P'(nu) - (2*dim+1) * P(nu), content and pure
    nu-power factors removed, leading coefficient positive."""
    if poly_u.is_zero():
        raise InputError("zero moment polynomial")
    enu = Poly([0, 1]) * poly_u.derivative() * dim - poly_u * (2 * dim + 1)
    if enu.is_zero():
        raise InputError("extremum condition degenerates to zero")
    enu, _ = enu.shift_down()
    return enu.primitive()


@dataclass
class RootCandidate:
    interval: tuple
    nu: ApproxReal
    a_value: ApproxReal
    g_value: ApproxReal
    phase_index: int


@dataclass
class OptimumReport:
    fits: list[PhaseFit]
    extremum_polys: list[Poly]
    candidates: list[RootCandidate]
    best: RootCandidate | None
    isotropy_exact: bool


def evaluate_g_interval(poly_u: Poly, volume_slope: QQ, dim: int, nu: ApproxReal) -> ApproxReal:
    """Enclosure of the figure of merit at nu.

    U = P_U(nu) / a^3 and V = slope * a, so
    G = U / (dim * V^(1+2/dim)) = P_U(nu) / (dim * slope^((n+2)/n) * nu^((4n+2)/(2n))).
    """
    p_val = _poly_interval(poly_u, nu)
    nu_pow = nu.power(4 * dim + 2, 2 * dim)
    slope_pow = ApproxReal.rational_power(volume_slope, dim + 2, dim)
    return p_val / (slope_pow * nu_pow * dim)


def _poly_interval(p: Poly, x: ApproxReal) -> ApproxReal:
    acc = ApproxReal.exactly(0)
    for c in reversed(p.coeffs):
        acc = acc * x + ApproxReal.exactly(c)
    return acc


def isolate_extremum_roots(epoly: Poly, bracket: PhaseBracket, width=DEFAULT_ROOT_WIDTH) -> list[tuple]:
    roots = isolate_real_roots(epoly, lo=bracket.nu_lo, hi=bracket.nu_hi)
    out = []
    for iv in roots:
        a, b = refine_root(epoly, iv, width)
        if b <= bracket.nu_lo or a >= bracket.nu_hi:
            continue
        out.append((a, b))
    return out


def isotropy_identity_holds(fit: PhaseFit, epoly: Poly) -> bool:
    """The anisotropy component, cleared of denominators and pure nu-power
    factors, must be the extremum polynomial up to sign and content; then it
    vanishes exactly at every extremum root."""
    if fit.poly_beta.is_zero():
        return False
    shifted, _ = fit.poly_beta.shift_down()
    # primitive() fixes the leading sign, so this is equality up to sign and content
    return shifted.primitive() == epoly


def optimum_report(
    fits: list[PhaseFit], dim: int, root_width=DEFAULT_ROOT_WIDTH
) -> OptimumReport:
    candidates: list[RootCandidate] = []
    epolys: list[Poly] = []
    iso_all = True
    for pi, fit in enumerate(fits):
        epoly = extremum_polynomial(fit.poly_u, dim)
        epolys.append(epoly)
        if not isotropy_identity_holds(fit, epoly):
            iso_all = False
        for a, b in isolate_extremum_roots(epoly, fit.bracket, root_width):
            nu = ApproxReal(a, b)
            cand = RootCandidate(
                interval=(a, b),
                nu=nu,
                a_value=nu.root(2),
                g_value=evaluate_g_interval(fit.poly_u, fit.volume_slope, dim, nu),
                phase_index=pi,
            )
            candidates.append(cand)
    best = None
    for cand in candidates:
        if best is None:
            best = cand
            continue
        if cand.g_value.separated_below(best.g_value):
            best = cand
        elif not best.g_value.separated_below(cand.g_value):
            raise InternalConsistencyError(
                "two extremum candidates have overlapping figure-of-merit intervals; "
                "raise the root refinement precision"
            )
    return OptimumReport(
        fits=fits,
        extremum_polys=epolys,
        candidates=candidates,
        best=best,
        isotropy_exact=iso_all,
    )


def phase_difference(fit_hi: PhaseFit, fit_lo: PhaseFit) -> Poly:
    """Exact difference of the fitted a^3*U polynomials across a boundary."""
    return fit_hi.poly_u - fit_lo.poly_u


def beta_difference(fit_hi: PhaseFit, fit_lo: PhaseFit) -> Poly:
    return fit_hi.poly_beta - fit_lo.poly_beta


def vanishing_order(diff: Poly, nu0) -> int:
    """Multiplicity of the boundary root of a difference polynomial."""
    return diff.root_multiplicity(nu0)
