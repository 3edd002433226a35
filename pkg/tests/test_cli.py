import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from avwc import builtins, files
from avwc.channels import AVC, AVWC
from avwc.cli import run
from avwc.errors import MissingEveLink, ParseError, RowSumViolation


def call(argv):
    buf = io.StringIO()
    code = run([str(a) for a in argv], stdout=buf)
    return code, buf.getvalue()


@pytest.fixture
def exdir(tmp_path):
    for name in builtins.NAMES:
        assert call(["example", name, "--dir", tmp_path])[0] == 0
    return tmp_path


def test_example_files_written(exdir):
    names = {p.name for p in exdir.iterdir()}
    assert {"example1.json", "example1_precoded.json", "family_eps0.25.json", "super_a.json",
            "super_b.json", "trash.json"} <= names


def test_parse_example1(exdir):
    obj = files.parse_channel_file(exdir / "example1.json")
    assert isinstance(obj, AVWC)
    assert (len(obj.input), len(obj.legal.output), len(obj.states)) == (2, 3, 2)


def test_family_matrices_exact(tmp_path):
    call(["example", "symmetrizable-family", "--eps", "0.25", "--dir", tmp_path])
    doc = json.loads((tmp_path / "family_eps0.25.json").read_text())
    assert doc["W"] == [[[0.0, 0.25, 0.75], [0.75, 0.0, 0.25]],
                        [[0.75, 0.25, 0.0], [0.0, 0.75, 0.25]]]


def test_super_activation_files(exdir):
    a = files.parse_channel_file(exdir / "super_a.json")
    b = files.parse_channel_file(exdir / "super_b.json")
    assert np.allclose(a.eve.kernels, 0.5)
    assert np.allclose(b.legal.kernels[0], [[0.9, 0.1], [0.1, 0.9]])
    assert np.allclose(b.eve.kernels[0], [[0.95, 0.05], [0.05, 0.95]])


def test_trash_outputs(tmp_path):
    call(["example", "trash", "--outputs", "3", "--dir", tmp_path])
    obj = files.parse_channel_file(tmp_path / "trash.json")
    assert np.all(obj.legal.kernels == 1 / 3) and np.all(obj.eve.kernels == 1 / 3)


def test_round_trip_byte_identical(exdir):
    for path in exdir.glob("*.json"):
        obj, name = files.load_named(path)
        assert files.dumps(files.to_document(obj, name)) == path.read_text()


def test_fraction_strings_and_tolerance(tmp_path):
    doc = files.to_document(builtins.example1_avc(), "w")
    doc["W"][0][1] = ["3/5", "0.2", "0.199999999"]
    path = tmp_path / "w.json"
    path.write_text(json.dumps(doc))
    obj = files.parse_channel_file(path)
    assert isinstance(obj, AVC)
    assert obj.kernels[0, 1, 0] == 0.6


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"W": [1, 2,}')
    with pytest.raises(ParseError, match="line 1"):
        files.parse_channel_file(bad)
    doc = files.to_document(builtins.example1_avc(), "w")
    doc["W"][0][0] = [0.5, 0.6, 0.0]
    bad.write_text(json.dumps(doc))
    with pytest.raises(RowSumViolation):
        files.parse_channel_file(bad)
    with pytest.raises(MissingEveLink):
        files.require_avwc(builtins.example1_avc())


def test_sym_example1(exdir):
    code, out = call(["sym", exdir / "example1.json"])
    doc = json.loads(out)
    assert code == 0 and doc["command"] == "sym"
    assert doc["report"]["symmetrizable"] is False
    assert doc["report"]["infeasibility_margin"] > 0
    assert set(doc) == {"command", "inputs_digest", "report", "seed", "version"}


def test_example_prints_certificate(tmp_path):
    code, out = call(["example", "precoding-bsc", "--p", "0.4", "--dir", tmp_path])
    rep = json.loads(out)["report"]["precoded"]
    assert rep["symmetrizable"]
    assert {rep["u_s1_given_x1"], rep["u_s1_given_x2"]} == {f"{75 / 148:.12f}", f"{31 / 37:.12f}"}
    assert rep["reference_residual"] <= 1e-12


def test_curve_csv(exdir):
    code, out = call(["curve", exdir / "example1.json", "--g-max", 1, "--steps", 11])
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "G,c_key_bits" and len(lines) == 12
    g, v = lines[-1].split(",")
    assert float(g) == 1.0 and len(v.replace("0.", "")) <= 12


def test_curve_out_file(exdir, tmp_path):
    out_csv = tmp_path / "c.csv"
    code, out = call(["curve", exdir / "trash.json", "--g-max", 1, "--steps", 3, "--out", out_csv])
    assert code == 0 and json.loads(out)["report"]["rows"] == 3
    assert out_csv.read_text().startswith("G,c_key_bits\n")


def test_simulate_with_events_and_csv(exdir, tmp_path):
    csv_path = tmp_path / "errors.csv"
    code, out = call(["simulate", exdir / "trash.json", "--n", 4, "--k", 2, "--l", 2,
                      "--tau", 0.5, "--events", "--csv", csv_path])
    rep = json.loads(out)["report"]
    assert code == 0 and rep["leakage"] == 0.0 and rep["decoding_sets_disjoint"]
    assert set(rep["events"]["flags"]) == {"E1", "E2", "E3", "E4", "E5"}
    assert len(csv_path.read_text().splitlines()) == 1 + 2 ** 4


@pytest.mark.parametrize("argv", [
    ["validate", "{dir}/example1.json"],
    ["f-value", "{dir}/example1.json"],
    ["capacity", "{dir}/trash.json", "--grid", 11],
    ["ckey", "{dir}/trash.json", "--g", 0.5, "--grid", 11],
    ["probe", "{dir}/family_eps0.25.json", "--eps", 0.01, "--samples", 5, "--seed", 3],
    ["simulate", "{dir}/trash.json", "--n", 4, "--k", 2, "--l", 1, "--tau", 0.5, "--seed", 4],
])
def test_determinism(exdir, argv):
    argv = [str(a).format(dir=exdir) for a in argv]
    first, second = call(argv), call(argv)
    assert first[0] == 0
    assert first[1] == second[1]


def test_seed_changes_digest(exdir):
    base = ["simulate", exdir / "trash.json", "--n", 4, "--k", 2, "--l", 1, "--tau", 0.5]
    a = json.loads(call(base + ["--seed", 1])[1])
    b = json.loads(call(base + ["--seed", 2])[1])
    assert a["inputs_digest"] != b["inputs_digest"] and a["seed"] == 1


def test_exit_codes(exdir, tmp_path, monkeypatch):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert call(["validate", bad])[0] == 2
    assert call(["validate", tmp_path / "missing.json"])[0] == 2
    avc_only = tmp_path / "avc.json"
    avc_only.write_text(files.dumps(files.to_document(builtins.example1_avc(), "w")))
    assert call(["ckey", avc_only, "--g", 1])[0] == 2
    assert call(["ckey", exdir / "trash.json", "--g", 0])[0] == 2
    assert call(["capacity", exdir / "trash.json", "--r", 3])[0] == 2
    assert call(["example", "symmetrizable-family", "--eps", 0.7, "--dir", tmp_path])[0] == 2
    monkeypatch.setenv("AVWC_MAX_ENUM", "10")
    assert call(["simulate", exdir / "trash.json", "--n", 6, "--k", 2, "--l", 1, "--tau", 0.5])[0] == 3
    with pytest.raises(SystemExit) as e:
        call(["no-such-command"])
    assert e.value.code == 2


def test_module_entry_point(exdir):
    res = subprocess.run([sys.executable, "-m", "avwc", "validate", str(exdir / "example1.json")],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["report"]["kind"] == "avwc"
