"""Serialization: exact text formats, lattice spec files, catalogs, reports.

Every document embeds the run configuration that produced it; nothing here
emits timestamps or machine-specific data, so identical configurations yield
byte-identical files.  Rationals travel as exact "p/q" strings, radicals as
{"coeff": "p/q", "radicand": "s"}; decimals are always accompanied by an error
bound and never feed back into any computation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .approx import ApproxReal
from .errors import InputError
from .lattice import GeneratorMatrix, LaminatedFamily, ae9_family
from .radical import RadQ
from .rational import QQ, format_rational, parse_rational
from .symmetry import GroupSpec, Isometry


@dataclass
class RunConfig:
    """Everything needed to reproduce a run byte-for-byte."""

    command: str
    lattice: str  # builtin name or spec path
    parameter: str | None = None
    interval: str | None = None
    seed: int = 0
    workers: int = 1
    precision_bits: int = 128
    saturation: int = 200
    orbit_cap: int = 10**7
    samples: int = 20000
    out_dir: str | None = None
    output_format: str = "doc"
    artifact_version: str = "lamiq 0.1.0"

    def provenance(self) -> dict:
        """Result-determining configuration only: the worker count and output
        destination cannot influence any computed value, and leaving them out
        keeps documents byte-identical across pool sizes."""
        data = asdict(self)
        data.pop("workers")
        data.pop("out_dir")
        return {k: v for k, v in sorted(data.items()) if v is not None}


def dumps_doc(payload: dict, config: RunConfig | None = None) -> str:
    doc = {"provenance": config.provenance()} if config else {}
    doc.update(payload)
    return json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=True) + "\n"


def format_vector(v) -> list[str]:
    return [format_rational(c) for c in v]


def parse_vector(items) -> tuple:
    return tuple(parse_rational(str(x)) for x in items)


def radq_json(x: RadQ) -> dict:
    return x.to_json()


def approx_json(x: ApproxReal, places: int = 20) -> dict:
    return x.to_json(places)


def load_family_spec(path: str) -> LaminatedFamily:
    """Lattice spec file: dimension, base_rows, offset, optional group words."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read lattice spec {path}: {exc}") from exc
    try:
        dim = int(data["dimension"])
        base_rows = [parse_vector(row) for row in data["base_rows"]]
        offset = parse_vector(data["offset"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"lattice spec {path} is missing required fields: {exc}") from exc
    if len(base_rows) != dim - 1 or any(len(r) != dim - 1 for r in base_rows):
        raise InputError("base_rows must form a square matrix of size dimension-1")
    if len(offset) != dim - 1:
        raise InputError("offset length must be dimension-1")
    base = GeneratorMatrix(base_rows)
    group = None
    if "group" in data:
        if data["group"] == "ae9":
            from .symmetry import ae9_group

            group = ae9_group()
        else:
            gens = [Isometry.from_sperm([int(s) for s in word]) for word in data["group"]]
            group = GroupSpec(gens)
    name = str(data.get("name", "family"))
    default_parameter = data.get("parameter")
    if default_parameter is not None:
        default_parameter = str(default_parameter)
        parse_rational(default_parameter)  # fail early on malformed values
    return LaminatedFamily(
        base, offset, name=name, group=group, default_parameter=default_parameter
    )


def builtin_family(name: str) -> LaminatedFamily:
    if name == "ae9":
        return ae9_family()
    raise InputError(f"unknown builtin lattice family {name!r}")


def resolve_family(group_flag: str | None, spec_path: str | None) -> LaminatedFamily:
    if (group_flag is None) == (spec_path is None):
        raise InputError("exactly one of --group or --spec is required")
    if group_flag is not None:
        return builtin_family(group_flag)
    return load_family_spec(spec_path)


def csv_lines(header: list[str], rows: list[list]) -> str:
    def cell(x) -> str:
        s = str(x)
        if "," in s or '"' in s:
            s = '"' + s.replace('"', '""') + '"'
        return s

    lines = [",".join(map(cell, header))]
    for row in rows:
        lines.append(",".join(map(cell, row)))
    return "\n".join(lines) + "\n"
