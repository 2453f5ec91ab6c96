import json
import subprocess
import sys
from pathlib import Path

import pytest

from lamiq.cli import main
from lamiq.io import load_family_spec
from lamiq.rational import QQ

STACKED_SPEC = {
    "name": "stacked-z",
    "dimension": 2,
    "base_rows": [["1"]],
    "offset": ["1/2"],
    "group": [[-1, 2], [1, -2]],
}


@pytest.fixture()
def spec_file(tmp_path):
    path = tmp_path / "stacked.json"
    path.write_text(json.dumps(STACKED_SPEC), encoding="utf-8")
    return str(path)


def run_cli(argv):
    return main(argv)


def test_usage_error_exit_code():
    proc = subprocess.run(
        [sys.executable, "-m", "lamiq.cli", "nonsense"], capture_output=True
    )
    assert proc.returncode == 2


def test_input_error_exit_code(capsys):
    assert run_cli(["g", "--group", "nope", "--a", "1/2"]) == 3
    assert run_cli(["g", "--group", "ae9", "--spec", "x", "--a", "1/2"]) == 3
    assert run_cli(["g", "--group", "ae9", "--a=-1/2"]) == 3
    capsys.readouterr()


def test_spec_file_loading(spec_file):
    fam = load_family_spec(spec_file)
    assert fam.dim == 2
    assert fam.group is not None
    assert fam.instantiate(QQ(3, 4)).determinant == QQ(3, 4)


def test_g_command_on_spec_family(spec_file, tmp_path, capsys):
    out = tmp_path / "out"
    rc = run_cli(["g", "--spec", spec_file, "--a", "3/4", "--out", str(out)])
    capsys.readouterr()
    assert rc == 0
    doc = json.loads((out / "g.json").read_text())
    assert doc["volume"] == "3/4"
    assert doc["provenance"]["command"] == "g"
    assert doc["g_exact"] == "209/2592"


def test_relevant_vectors_doc(spec_file, capsys):
    rc = run_cli(["relevant-vectors", "--spec", spec_file, "--a", "3/4"])
    outtext = capsys.readouterr().out
    assert rc == 0
    doc = json.loads(outtext)
    assert doc["count"] == 6


def test_vertices_csv_format(spec_file, tmp_path, capsys):
    out = tmp_path / "out"
    rc = run_cli(
        ["vertices", "--spec", spec_file, "--a", "3/4", "--format", "csv", "--out", str(out)]
    )
    capsys.readouterr()
    assert rc == 0
    text = (out / "vertices.csv").read_text()
    assert text.splitlines()[0] == "size,norm2,facet_incidence,representative"


def test_byte_identical_across_reruns_and_workers(spec_file, tmp_path, capsys):
    blobs = []
    for workers, tag in ((1, "w1"), (4, "w4"), (8, "w8"), (1, "again")):
        out = tmp_path / tag
        rc = run_cli(
            [
                "fit",
                "--spec",
                spec_file,
                "--bracket",
                "26/100:3",
                "--ref",
                "3/4",
                "--seed",
                "5",
                "--workers",
                str(workers),
                "--out",
                str(out),
            ]
        )
        capsys.readouterr()
        assert rc == 0
        blobs.append((out / "fit.json").read_bytes())
    # byte-identical regardless of pool size, and across reruns
    assert blobs[0] == blobs[1] == blobs[2] == blobs[3]


def test_env_override(spec_file, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("LAMIQ_FORMAT", "csv")
    out = tmp_path / "env"
    rc = run_cli(["vertices", "--spec", spec_file, "--a", "3/4", "--out", str(out)])
    capsys.readouterr()
    assert rc == 0
    assert (out / "vertices.csv").exists()


def test_mc_check_runs(spec_file, capsys):
    rc = run_cli(
        ["mc-check", "--spec", spec_file, "--a", "3/4", "--samples", "400", "--seed", "9"]
    )
    outtext = capsys.readouterr().out
    assert rc == 0
    doc = json.loads(outtext)
    assert float(doc["deviation_sigmas"]) < 5.0


def test_catalog_command(spec_file, tmp_path, capsys):
    out = tmp_path / "cat"
    rc = run_cli(["catalog", "--spec", spec_file, "--a", "3/4", "--out", str(out)])
    capsys.readouterr()
    assert rc == 0
    doc = json.loads((out / "catalog.json").read_text())
    labels = {e["label"] for e in doc["classes"]}
    assert "F_1^1" in labels
    for entry in doc["classes"]:
        assert "volume" in entry and "child_heights" in entry


def test_phases_command_2d(spec_file, tmp_path, capsys):
    out = tmp_path / "ph"
    rc = run_cli(
        ["phases", "--spec", spec_file, "--interval", "1/10:3", "--out", str(out)]
    )
    capsys.readouterr()
    assert rc == 0
    doc = json.loads((out / "phases.json").read_text())
    assert len(doc["boundary_brackets"]) == 1
    assert len(doc["phases"]) == 2
    assert {p["vertices"] for p in doc["phases"]} == {6}


def test_spec_default_parameter(tmp_path, capsys):
    spec = dict(STACKED_SPEC)
    spec["parameter"] = "3/4"
    path = tmp_path / "withparam.json"
    path.write_text(json.dumps(spec), encoding="utf-8")
    rc = run_cli(["relevant-vectors", "--spec", str(path)])
    outtext = capsys.readouterr().out
    assert rc == 0
    assert json.loads(outtext)["count"] == 6
    # no parameter anywhere is an input error
    path2 = tmp_path / "noparam.json"
    path2.write_text(json.dumps(STACKED_SPEC), encoding="utf-8")
    assert run_cli(["relevant-vectors", "--spec", str(path2)]) == 3
    capsys.readouterr()
