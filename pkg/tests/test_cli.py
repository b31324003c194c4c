import json

import pytest

from chainport.cli import main


def run(tmp_path, *args, name="out.json"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None), out


def test_run_two_way_all_corrected(tmp_path):
    code, rep, _ = run(tmp_path, "run", "--family", "two-way-vaa", "--n", "2", "--seed", "7", "--trials", "100")
    assert code == 0
    assert len(rep["trials"]) == 100
    assert all(t["fidelity_after"] >= 1 - 1e-9 for t in rep["trials"])
    assert rep["header"]["fingerprint"] == {"n": 2, "family": "two-way-vaa", "end_link": "y"}
    assert rep["header"]["version"]


def test_run_is_byte_identical(tmp_path):
    c1, _, a = run(tmp_path, "run", "--n", "3", "--family", "chain", "--trials", "1", "--seed", "1", name="a.json")
    c2, _, b = run(tmp_path, "run", "--n", "3", "--family", "chain", "--trials", "1", "--seed", "1", name="b.json")
    assert c1 == c2
    assert a.read_bytes() == b.read_bytes()


def test_run_chain3_reports_missing_correction(tmp_path):
    code, rep, _ = run(tmp_path, "run", "--n", "3", "--trials", "2", "--seed", "1")
    assert code == 4
    assert rep["corrections"]["status"] == "no-pauli-correction"
    assert rep["summary"]["min_fidelity_after"] is None


def test_run_missing_input_file(tmp_path, capsys):
    code = main(["run", "--inputs", "file", "--input-path", str(tmp_path / "missing.json")])
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_run_file_inputs(tmp_path, caplog):
    path = tmp_path / "in.json"
    path.write_text(json.dumps([[[1, 0], [0, 0]], [[2, 0], [0, 0]]]))
    code, rep, _ = run(tmp_path, "run", "--inputs", "file", "--input-path", str(path), "--trials", "3")
    assert code == 0
    assert "renormalising" in caplog.text


def test_run_entangled_inputs(tmp_path):
    code, rep, _ = run(tmp_path, "run", "--inputs", "random-entangled", "--trials", "5", "--seed", "3")
    assert code == 0 and rep["summary"]["all_corrected"]


def test_run_with_table_file(tmp_path):
    table = tmp_path / "t.json"
    assert main(["derive-corrections", "--family", "two-way-vaa", "--out", str(table)]) == 0
    code, rep, _ = run(tmp_path, "run", "--family", "two-way-vaa", "--table", str(table), "--trials", "10")
    assert code == 0 and rep["corrections"]["source"] == "file"
    # a table for another protocol is refused
    assert main(["run", "--family", "chain", "--table", str(table)]) == 2


def test_unknown_flag_is_an_error():
    with pytest.raises(SystemExit) as info:
        main(["run", "--bogus"])
    assert info.value.code == 2


@pytest.mark.parametrize("n", ["2", "3"])
def test_verify_default_specs_pass(tmp_path, n):
    code, rep, _ = run(tmp_path, "verify", "--n", n)
    assert code == 0 and rep["pass"]
    assert set(rep["checks"]) == {"enumeration", "outcome_support", "no_signaling", "mode_cross_check"}


def test_verify_size_limits(tmp_path):
    assert main(["verify", "--n", "5"]) == 3
    code, rep, _ = run(tmp_path, "verify", "--n", "5", "--mode", "compact")
    assert code == 0 and rep["pass"]


def test_derive_corrections(tmp_path):
    out = tmp_path / "t.json"
    assert main(["derive-corrections", "--family", "two-way-vaa", "--n", "2", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert len(data["entries"]) == 4
    assert data["entries"][0] == {"d": [0, 0], "labels": ["I", "I"]}
    first = out.read_bytes()
    assert main(["derive-corrections", "--family", "two-way-vaa", "--n", "2", "--out", str(out)]) == 0
    assert out.read_bytes() == first


def test_derive_corrections_chain3_fails(tmp_path, capsys):
    assert main(["derive-corrections", "--n", "3", "--out", str(tmp_path / "t.json")]) == 4
    assert "no per-site Pauli correction" in capsys.readouterr().err
    assert not (tmp_path / "t.json").exists()


def test_stats(tmp_path):
    code, rep, out = run(tmp_path, "stats", "--n", "2", "--trials", "10000", "--seed", "5")
    assert code == 0
    assert len(rep["histogram"]) == 4
    assert sum(r["count"] for r in rep["histogram"]) == 10000
    tsv = out.with_suffix(".tsv").read_text().splitlines()
    assert tsv[0] == "d\tcount\tfrequency\texpected" and len(tsv) == 5


def test_stats_zero_trials():
    assert main(["stats", "--trials", "0"]) == 2
