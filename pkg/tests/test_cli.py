import json
import subprocess
import sys

import pytest

from gnabai.cli import main


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_weights(capsys):
    code, out, _ = _run(["weights", "--sigmas", "2,1,1", "--best", "1"], capsys)
    assert code == 0 and out == "0.585786 0.207107 0.207107\n"


def test_weights_best_out_of_range(capsys):
    code, _, err = _run(["weights", "--sigmas", "2,1,1", "--best", "4"], capsys)
    assert code != 0 and err.startswith("error:") and err.count("\n") == 1


def test_bounds_bernoulli(capsys):
    code, out, _ = _run(["bounds", "--family", "bernoulli", "--k", "3"], capsys)
    assert code == 0
    assert "w_best=0.414214" in out and "V*_printed=0.222222" in out and "V*_derived=0.343146" in out


def test_bounds_gaussian(capsys):
    code, out, _ = _run(["bounds", "--family", "gaussian", "--sigmas", "2,1,1"], capsys)
    assert code == 0 and "V(1) = 0.042893" in out and "V* = 0.042893 (arm 1)" in out


def test_bounds_missing_argument(capsys):
    code, _, err = _run(["bounds", "--family", "bernoulli"], capsys)
    assert code != 0 and "--k" in err


def test_run_missing_config(capsys):
    code, _, err = _run(["run", "missing.json"], capsys)
    assert code != 0 and "config not found" in err


def test_run_invalid_config(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"master_seed": 1}))
    code, _, err = _run(["run", str(path)], capsys)
    assert code != 0 and "trials: missing" in err


def test_run_and_decay(tmp_path, capsys):
    cfg = {"master_seed": 4, "trials": 100, "algorithms": [{"kind": "GNA"}, {"kind": "Uniform"}],
           "instance": {"type": "gaussian", "means": [1.0, 0.6], "sds": [1.0, 1.0]}, "budgets": [10, 20, 40, 60]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    out_csv, out_json = tmp_path / "r.csv", tmp_path / "r.json"
    code, out, _ = _run(["run", str(path), "--workers", "1", "--output", str(out_csv), "--json", str(out_json)], capsys)
    assert code == 0 and out_csv.exists() and out_json.exists()
    first = out_csv.read_bytes()
    assert _run(["run", str(path), "--workers", "2", "--output", str(out_csv)], capsys)[0] == 0
    assert out_csv.read_bytes() == first
    code, out, _ = _run(["decay", str(out_csv)], capsys)
    assert code == 0 and out.startswith("GNA:") and "Uniform:" in out


def test_seed_override_changes_results(tmp_path, capsys):
    cfg = {"master_seed": 4, "trials": 200, "algorithms": [{"kind": "Uniform"}],
           "instance": {"type": "gaussian", "means": [1.0, 0.9], "sds": [1.0, 1.0]}, "budgets": [10]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    _run(["run", str(path), "--workers", "1", "--output", str(a)], capsys)
    _run(["run", str(path), "--workers", "1", "--output", str(b), "--seed", "5"], capsys)
    assert a.read_text() != b.read_text()


def test_decay_missing_file(capsys):
    code, _, err = _run(["decay", "nope.csv"], capsys)
    assert code != 0 and "results not found" in err


def test_selftest(capsys):
    code, out, _ = _run(["selftest"], capsys)
    assert code == 0 and "FAIL" not in out and out.count("PASS") >= 5


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gnabai", "weights", "--sigmas", "1,1", "--best", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "0.500000 0.500000"


def test_bad_number_list_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["weights", "--sigmas", "a,b", "--best", "1"])
    assert exc.value.code != 0
