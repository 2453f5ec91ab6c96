"""Command-line entry point.

Subcommands reproduce the library's main results as deterministic documents:
identical configuration (including seed) gives byte-identical output whatever
the worker count.  Exit codes: 0 success, 2 usage, 3 invalid input, 4 resource
budget, 5 internal consistency tripwire.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .approx import ApproxReal, set_precision_bits
from .errors import InputError, LamiqError
from .family import (
    PhaseBracket,
    PhaseModel,
    beta_difference,
    detect_phase_boundaries,
    optimum_report,
    phase_difference,
    phase_signature,
    reconstruct_polynomials,
)
from .io import (
    RunConfig,
    approx_json,
    csv_lines,
    dumps_doc,
    format_vector,
    radq_json,
    resolve_family,
)
from .lattice import relevant_vectors
from .moments import (
    LayeredDecoder,
    cell_summary,
    compute_face_moments,
    monte_carlo_g,
)
from .rational import QQ, format_rational, parse_rational
from .voronoi import CellComplex, classify_faces

log = logging.getLogger(__name__)

# Default phase windows for the builtin 9-D family: sampling windows only,
# every sample inside them is re-verified exactly (tightness pattern, vertex
# distinctness, volume-determinant identity) and fits validate on held-out
# samples, so a wrong window fails loudly rather than silently.
AE9_PHASES = [
    (PhaseBracket(QQ(0), QQ(1, 2)), QQ(4, 7)),
    (PhaseBracket(QQ(1, 2), QQ(1)), QQ(4, 5)),
    (PhaseBracket(QQ(1), QQ(2)), QQ(5, 4)),
    (PhaseBracket(QQ(2), QQ(3)), QQ(3, 2)),
]


def _env_default(name: str, fallback, cast):
    raw = os.environ.get(f"LAMIQ_{name}")
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError as exc:
        raise InputError(f"bad environment override LAMIQ_{name}={raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lamiq",
        description="Exact Voronoi cells, moments, and optimal quantizer parameters "
        "for one-parameter laminated lattice families",
    )
    p.add_argument("--version", action="version", version=f"lamiq {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_a=False, need_interval=False):
        sp.add_argument("--group", help="builtin family name (ae9)")
        sp.add_argument("--spec", help="lattice family spec file (JSON)")
        if need_a:
            sp.add_argument(
                "--a", help='parameter value "p/q" (default: the spec file\'s parameter field)'
            )
        if need_interval:
            sp.add_argument("--interval", required=True, help='nu interval "p/q:r/s"')
        sp.add_argument("--seed", type=int, default=_env_default("SEED", 0, int))
        sp.add_argument("--workers", type=int, default=_env_default("WORKERS", 1, int))
        sp.add_argument(
            "--precision", type=int, default=_env_default("PRECISION", 128, int)
        )
        sp.add_argument(
            "--saturation", type=int, default=_env_default("SATURATION", 200, int)
        )
        sp.add_argument(
            "--orbit-cap", type=int, default=_env_default("ORBIT_CAP", 10**7, int)
        )
        sp.add_argument("--out", default=_env_default("OUT", None, str))
        sp.add_argument(
            "--format",
            choices=("csv", "doc"),
            default=_env_default("FORMAT", "doc", str),
        )
        sp.add_argument("--verbose", action="store_true")

    common(sub.add_parser("relevant-vectors", help="facet-defining vectors with orbits"), need_a=True)
    common(sub.add_parser("vertices", help="vertex orbits with incidence data"), need_a=True)
    common(sub.add_parser("faces", help="face class counts per dimension"), need_a=True)
    common(sub.add_parser("catalog", help="full face and moment catalog"), need_a=True)
    common(sub.add_parser("g", help="cell volume, second moment, figure of merit"), need_a=True)
    common(sub.add_parser("phases", help="cell structure over a parameter interval"), need_interval=True)
    fit = sub.add_parser("fit", help="per-phase exact moment polynomials")
    common(fit)
    fit.add_argument("--bracket", help='nu bracket "p/q:r/s" (default: builtin phases)')
    fit.add_argument("--ref", help="reference parameter inside the bracket")
    opt = sub.add_parser("optimize", help="extremum polynomials, roots, optimum")
    common(opt)
    mc = sub.add_parser("mc-check", help="Monte Carlo estimate vs exact value")
    common(mc, need_a=True)
    mc.add_argument("--samples", type=int, default=_env_default("SAMPLES", 20000, int))
    return p


def _config_from(args, command: str) -> RunConfig:
    return RunConfig(
        command=command,
        lattice=args.group or args.spec,
        parameter=getattr(args, "a", None),
        interval=getattr(args, "interval", None),
        seed=args.seed,
        workers=args.workers,
        precision_bits=args.precision,
        saturation=args.saturation,
        orbit_cap=args.orbit_cap,
        samples=getattr(args, "samples", None) or 20000,
        out_dir=args.out,
        output_format=args.format,
        artifact_version=f"lamiq {__version__}",
    )


def _emit(config: RunConfig, name: str, text: str) -> None:
    if config.out_dir:
        path = Path(config.out_dir)
        path.mkdir(parents=True, exist_ok=True)
        target = path / name
        target.write_text(text, encoding="utf-8")
        print(f"wrote {target}")
    else:
        sys.stdout.write(text)


def _parameter(args, family) -> QQ:
    raw = getattr(args, "a", None) or family.default_parameter
    if raw is None:
        raise InputError("no parameter value: pass --a or set it in the spec file")
    return parse_rational(raw)


def _build_cell(family, a, args) -> CellComplex:
    basis = family.instantiate(a)
    group = family.group
    if group is None:
        raise InputError("family has no symmetry group; supply one in the spec file")
    return CellComplex(
        basis, group, seed=args.seed, saturation=args.saturation, orbit_cap=args.orbit_cap
    )


def cmd_relevant_vectors(args) -> int:
    config = _config_from(args, "relevant-vectors")
    family = resolve_family(args.group, args.spec)
    a = _parameter(args, family)
    rset = relevant_vectors(family.instantiate(a), family.group)
    orbits = [
        {
            "size": len(orb),
            "representative": format_vector(rset.vectors[orb[0]]),
            "norm2": format_rational(rset.norms2[orb[0]]),
        }
        for orb in rset.orbits
    ]
    payload = {
        "count": len(rset),
        "orbits": orbits,
        "vectors": [format_vector(v) for v in rset.vectors],
    }
    _emit(config, "relevant_vectors.json", dumps_doc(payload, config))
    return 0


def cmd_vertices(args) -> int:
    config = _config_from(args, "vertices")
    family = resolve_family(args.group, args.spec)
    a = _parameter(args, family)
    cell = _build_cell(family, a, args)
    triples = cell.vertex_incidence_triples()
    rows = []
    for orbit, triple in zip(cell.vertex_orbits, triples):
        rep = cell.vset.coords[orbit.rep_index]
        from .linalg import vec_norm2

        rows.append(
            {
                "representative": format_vector(rep),
                "size": orbit.size,
                "norm2": format_rational(vec_norm2(rep)),
                "facet_incidence": list(triple),
            }
        )
    rows.sort(key=lambda r: (r["norm2"], r["representative"]))
    if config.output_format == "csv":
        text = csv_lines(
            ["size", "norm2", "facet_incidence", "representative"],
            [
                [r["size"], r["norm2"], " ".join(map(str, r["facet_incidence"])), " ".join(r["representative"])]
                for r in rows
            ],
        )
        _emit(config, "vertices.csv", text)
    else:
        payload = {"vertex_count": len(cell.vset), "orbit_count": len(cell.vertex_orbits), "orbits": rows}
        _emit(config, "vertices.json", dumps_doc(payload, config))
    return 0


def _classified_cell(family, a, args):
    cell = _build_cell(family, a, args)
    records = compute_face_moments(cell)
    classify_faces(cell.lattice, {oid: r.volume.squared() for oid, r in records.items()})
    return cell, records


def cmd_faces(args) -> int:
    config = _config_from(args, "faces")
    family = resolve_family(args.group, args.spec)
    a = _parameter(args, family)
    cell, _records = _classified_cell(family, a, args)
    per_dim = []
    for d in sorted(cell.lattice.classes):
        classes = cell.lattice.classes[d]
        per_dim.append(
            {
                "dimension": d,
                "types": len(classes),
                "counts": [c.total for c in classes],
                "total": sum(c.total for c in classes),
            }
        )
    # the cell itself is the single top-dimensional face
    per_dim.append({"dimension": cell.lattice.dim, "types": 1, "counts": [1], "total": 1})
    if config.output_format == "csv":
        rows = [[e["dimension"], e["types"], e["total"], " ".join(map(str, e["counts"]))] for e in per_dim]
        _emit(config, "faces.csv", csv_lines(["dimension", "types", "total", "counts"], rows))
    else:
        payload = {
            "per_dimension": per_dim,
            "totals": [e["total"] for e in per_dim],
            "euler_alternating_sum": cell.lattice.euler_alternating_sum(),
        }
        _emit(config, "faces.json", dumps_doc(payload, config))
    return 0


def cmd_catalog(args) -> int:
    config = _config_from(args, "catalog")
    family = resolve_family(args.group, args.spec)
    a = _parameter(args, family)
    cell, records = _classified_cell(family, a, args)
    from .moments import catalog_entries

    payload = {"classes": catalog_entries(cell, records)}
    _emit(config, "catalog.json", dumps_doc(payload, config))
    return 0


def cmd_g(args) -> int:
    config = _config_from(args, "g")
    set_precision_bits(args.precision)
    family = resolve_family(args.group, args.spec)
    a = _parameter(args, family)
    cell = _build_cell(family, a, args)
    records = compute_face_moments(cell)
    split = family.name == "ae9"
    summ = cell_summary(cell, records, split_last_axis=split)
    payload = {
        "dimension": summ.dimension,
        "volume": format_rational(summ.volume),
        "second_moment": format_rational(summ.second_moment),
        "tensor": [[format_rational(v) for v in row] for row in summ.tensor],
        "g": approx_json(summ.g_value),
    }
    if summ.g_exact is not None:
        payload["g_exact"] = format_rational(summ.g_exact)
    if summ.alpha is not None:
        payload["alpha"] = format_rational(summ.alpha)
        payload["beta"] = format_rational(summ.beta)
    _emit(config, "g.json", dumps_doc(payload, config))
    return 0


def cmd_phases(args) -> int:
    config = _config_from(args, "phases")
    family = resolve_family(args.group, args.spec)
    lo, hi = (parse_rational(s) for s in args.interval.split(":"))
    brackets = detect_phase_boundaries(
        family, (lo, hi), seed=args.seed, with_vertices=True
    )
    edges = [lo] + [b.nu_lo for b in brackets] + [hi]
    probe_points = []
    for i in range(len(brackets) + 1):
        left = lo if i == 0 else brackets[i - 1].nu_hi
        right = hi if i == len(brackets) else brackets[i].nu_lo
        probe_points.append((left + right) / 2)
    del edges
    phases = []
    for nu in probe_points:
        from gmpy2 import isqrt, mpz

        scale = mpz(1) << 16
        a = QQ(isqrt((nu.numerator * scale * scale) // nu.denominator), scale)
        sig = phase_signature(family.instantiate(a), family.group, seed=args.seed, saturation=args.saturation)
        phases.append(
            {
                "probe_a": format_rational(a),
                "probe_nu": format_rational(a * a),
                "relevant_vectors": sig.relevant_count,
                "vertices": sig.vertex_count,
                "vertex_orbits": sig.vertex_class_count,
                "face_totals": list(sig.face_totals),
                "face_class_counts": list(sig.face_class_counts),
            }
        )
    payload = {
        "boundary_brackets": [
            {"nu_lo": format_rational(b.nu_lo), "nu_hi": format_rational(b.nu_hi), "complete": b.complete}
            for b in brackets
        ],
        "phases": phases,
    }
    if config.output_format == "csv":
        rows = [
            [p["probe_nu"], p["relevant_vectors"], p["vertices"], p["vertex_orbits"]]
            for p in phases
        ]
        _emit(config, "phases.csv", csv_lines(["probe_nu", "relevant", "vertices", "vertex_orbits"], rows))
    else:
        _emit(config, "phases.json", dumps_doc(payload, config))
    return 0


def _phase_models(family, args):
    if getattr(args, "bracket", None):
        lo, hi = (parse_rational(s) for s in args.bracket.split(":"))
        ref = parse_rational(args.ref) if args.ref else None
        if ref is None:
            raise InputError("--bracket requires --ref")
        pairs = [(PhaseBracket(lo, hi), ref)]
    elif family.name == "ae9":
        pairs = AE9_PHASES
    else:
        raise InputError("supply --bracket/--ref for non-builtin families")
    for bracket, ref in pairs:
        yield PhaseModel.build(
            family, bracket, ref, seed=args.seed, saturation=args.saturation
        )


def _fit_payload(fit) -> dict:
    return {
        "bracket": [format_rational(fit.bracket.nu_lo), format_rational(fit.bracket.nu_hi)],
        "poly_a3_u": fit.poly_u.format_coeffs(),
        "poly_a3_alpha": fit.poly_alpha.format_coeffs(),
        "poly_a3_beta": fit.poly_beta.format_coeffs(),
        "volume_slope": format_rational(fit.volume_slope),
        "samples": [format_rational(v) for v in fit.sample_values],
        "holdout": [format_rational(v) for v in fit.holdout_values],
    }


def cmd_fit(args) -> int:
    config = _config_from(args, "fit")
    family = resolve_family(args.group, args.spec)
    fits = [
        reconstruct_polynomials(model, workers=args.workers)
        for model in _phase_models(family, args)
    ]
    payload = {"phases": [_fit_payload(f) for f in fits]}
    _emit(config, "fit.json", dumps_doc(payload, config))
    return 0


def cmd_optimize(args) -> int:
    config = _config_from(args, "optimize")
    set_precision_bits(args.precision)
    family = resolve_family(args.group, args.spec)
    fits = [
        reconstruct_polynomials(model, workers=args.workers)
        for model in _phase_models(family, args)
    ]
    report = optimum_report(fits, family.dim)
    diffs = []
    for lofit, hifit in zip(report.fits, report.fits[1:]):
        du = phase_difference(hifit, lofit)
        db = beta_difference(hifit, lofit)
        diffs.append(
            {
                "boundary_nu": format_rational(lofit.bracket.nu_hi),
                "u_difference": du.format_coeffs(),
                "beta_difference": db.format_coeffs(),
            }
        )
    payload = {
        "phases": [_fit_payload(f) for f in report.fits],
        "extremum_polynomials": [e.format_coeffs() for e in report.extremum_polys],
        "candidates": [
            {
                "phase": c.phase_index,
                "nu_interval": [format_rational(c.interval[0]), format_rational(c.interval[1])],
                "a": approx_json(c.a_value),
                "g": approx_json(c.g_value),
            }
            for c in report.candidates
        ],
        "optimum": None
        if report.best is None
        else {
            "phase": report.best.phase_index,
            "a": approx_json(report.best.a_value),
            "g": approx_json(report.best.g_value),
            "isotropy_identity_exact": report.isotropy_exact,
        },
        "phase_differences": diffs,
    }
    _emit(config, "optimize.json", dumps_doc(payload, config))
    return 0


def cmd_mc_check(args) -> int:
    config = _config_from(args, "mc-check")
    set_precision_bits(args.precision)
    family = resolve_family(args.group, args.spec)
    a = _parameter(args, family)
    basis = family.instantiate(a)
    decoder = LayeredDecoder(family.base, family.offset, a)
    est, se = monte_carlo_g(
        basis, args.samples, seed=args.seed, decoder=decoder, workers=args.workers
    )
    cell = _build_cell(family, a, args)
    records = compute_face_moments(cell)
    summ = cell_summary(cell, records)
    exact = float(summ.g_value)
    payload = {
        "estimate": f"{est:.10f}",
        "standard_error": f"{se:.3e}",
        "exact": approx_json(summ.g_value),
        "deviation_sigmas": f"{abs(est - exact) / se:.2f}",
        "samples": args.samples,
    }
    _emit(config, "mc_check.json", dumps_doc(payload, config))
    return 0


COMMANDS = {
    "relevant-vectors": cmd_relevant_vectors,
    "vertices": cmd_vertices,
    "faces": cmd_faces,
    "catalog": cmd_catalog,
    "g": cmd_g,
    "phases": cmd_phases,
    "fit": cmd_fit,
    "optimize": cmd_optimize,
    "mc-check": cmd_mc_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except LamiqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
