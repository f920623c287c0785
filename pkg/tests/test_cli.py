import json

import pytest

from tautres.cli import EXIT_CONSISTENCY, EXIT_OK, EXIT_SPEC, main

P2_K2 = {"n": 2, "k": 2, "V": {"rank": 1}, "phi": "c1^4",
         "table": {"type": "projective", "line_degrees": [2]}}
RESIDUE = {"numerator": "z1-z2", "factors": [{"form": "z1"}, {"form": "z2"}, {"form": "2*z1-z2"}],
           "z_order": ["z1", "z2"]}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_integrate(capsys):
    code, out, _ = run(capsys, "integrate", json.dumps(P2_K2), "--closed-form")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    assert doc["result"]["total"] == "21"
    assert doc["result"]["ordered_total"] == "42"
    assert doc["closed_form_agrees"] is True


def test_output_is_byte_stable(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(P2_K2))
    _, first, _ = run(capsys, "integrate", str(spec))
    _, second, _ = run(capsys, "integrate", str(spec), "--threads", "3", "--prune")
    assert first == second
    target = tmp_path / "out.json"
    assert run(capsys, "integrate", str(spec), "--out", str(target))[1] == ""
    assert target.read_text() == first


def test_decimal(capsys):
    spec = dict(P2_K2, table={"type": "projective", "line_degrees": [3]})
    code, out, _ = run(capsys, "integrate", json.dumps(spec), "--decimal")
    assert code == EXIT_OK
    assert "decimal" in out


@pytest.mark.parametrize("argv", [
    ["integrate", json.dumps(dict(P2_K2, phi="c1^3"))],
    ["integrate", json.dumps(dict(P2_K2, phi="c1^^4"))],
    ["integrate", json.dumps({"k": 2})],
    ["integrate", json.dumps(dict(P2_K2, schema_version=7))],
    ["integrate", "/nonexistent/spec.json"],
    ["integrate", json.dumps(dict(P2_K2, k=7, phi="c1^14", table=None))],
    ["oracle", "--surface", "p2", "--k", "2", "--phi", "c1^3"],
    ["residue", json.dumps({"numerator": "z2", "factors": [{"form": "z1"}], "z_order": ["z1"]})],
    ["nosuchcommand"],
])
def test_invalid_input_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_SPEC
    assert out == ""
    assert err


def test_missing_q_hint(capsys):
    code, _, err = run(capsys, "integrate", json.dumps(dict(P2_K2, k=7, phi="c1^14", table=None)))
    assert code == EXIT_SPEC and "--q-poly" in err


def test_consistency_exit_3(capsys):
    spec = {"n": 2, "k": 3, "V": {"rank": 1}, "phi": "c1^6"}
    code, out, err = run(capsys, "integrate", json.dumps(spec), "--q-poly", "2=z1")
    assert code == EXIT_CONSISTENCY
    assert "consistency failure" in err


def test_residue_command(capsys):
    code, out, _ = run(capsys, "residue", json.dumps(RESIDUE), "--reference", "6")
    doc = json.loads(out)["result"]
    assert code == EXIT_OK
    assert doc["text"] == "1" and doc["reference_agrees"] is True
    assert doc["provably_zero"] is False
    assert set(doc["truncation"]) == {"z[0,1]", "z[0,2]"}


def test_oracle_command(capsys):
    code, out, _ = run(capsys, "oracle", "--surface", "p2", "--k", "2", "--bundle", "2",
                       "--phi", "c1^4")
    doc = json.loads(out)["result"]
    assert code == EXIT_OK and doc["value"] == "21" and doc["fixed_point_count"] == 9
    code, out, _ = run(capsys, "oracle", "--surface", "affine", "--k", "2", "--phi", "c1",
                       "--contributions")
    assert code == EXIT_OK
    assert len(json.loads(out)["result"]["per_point_contributions"]) == 2


def test_series_command(capsys):
    spec = {"n": 2, "V": {"rank": 1}, "table": {"type": "projective", "line_degrees": [1]}}
    code, out, _ = run(capsys, "series", json.dumps(spec), "--kmax", "2")
    doc = json.loads(out)["result"]
    assert code == EXIT_OK and doc["agreement"] is True
    custom = json.dumps({"name": "custom", "coefficients": [1, 2, "1/2"]})
    code, out, _ = run(capsys, "series", json.dumps(spec), "--class", "custom-json",
                       "--class-json", custom, "--kmax", "2")
    assert code == EXIT_OK and json.loads(out)["result"]["class"] == "custom"


def test_positivity_command(capsys):
    code, out, _ = run(capsys, "positivity", "--n", "2", "--k", "2", "--r", "1", "--phi", "c1^4")
    doc = json.loads(out)["result"]
    assert code == EXIT_OK
    assert any(r["monomial"] == "[cV1^2][cV1^2]" for r in doc["rows"])
    assert all(r["sign"] < 0 for r in doc["negative"])


def test_selftest_subset(capsys):
    code, out, err = run(capsys, "selftest", "--only", "9,10")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["all_passed"] is True
    assert err.count("[PASS]") == 2


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("TAUTRES_THREADS", "many")
    code, _, err = run(capsys, "integrate", json.dumps(P2_K2))
    assert code == EXIT_SPEC and "TAUTRES_THREADS" in err
