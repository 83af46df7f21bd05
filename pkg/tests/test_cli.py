import json
import math
import subprocess
import sys

import pytest

from zamolodchikov.cli import run

RIGHT = [str(math.pi / 2)] * 3


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def strip_timing(bundle):
    for r in bundle.get("runs", []):
        r.pop("elapsed_ms", None)
    return bundle


def test_verify_te_sweep(capsys):
    code, out, _ = call(capsys, "verify-te", "--count", "50", "--seed", "7", "--tol", "1e-10")
    bundle = json.loads(out)
    assert code == 0
    assert bundle["summary"]["count"] == 50 and bundle["summary"]["passed"] == 50
    assert [r["config"]["seed"] for r in bundle["runs"]] == list(range(7, 57))


def test_unattainable_tolerance_exit_code(capsys):
    code, out, _ = call(capsys, "verify-te", "--count", "1", "--seed", "7", "--tol", "1e-30")
    bundle = json.loads(out)
    assert code == 1
    assert bundle["runs"][0]["pass"] is False and bundle["runs"][0]["residual_max"] > 0


def test_sweep_is_deterministic(capsys):
    _, a, _ = call(capsys, "verify-te", "--count", "3", "--seed", "1")
    _, b, _ = call(capsys, "verify-te", "--count", "3", "--seed", "1", "--jobs", "3")
    assert strip_timing(json.loads(a)) == strip_timing(json.loads(b))


def test_dump_weights(capsys):
    code, out, _ = call(capsys, "dump-weights", "--theta", "1.5707963", "1.5707963", "1.5707963")
    bundle = json.loads(out)
    assert code == 0 and bundle["operator"] == "R"
    assert bundle["matrix"][0][0] == [1.0, 0.0]
    assert len(bundle["matrix"]) == 8


def test_dump_static_weights(capsys):
    third = str(math.pi / 3)
    code, out, _ = call(capsys, "dump-weights", "--theta", third, third, third)
    assert code == 0 and json.loads(out)["operator"] == "S"


def test_invert_right_angle(capsys):
    code, out, _ = call(capsys, "invert", "--theta", *RIGHT)
    bundle = json.loads(out)
    assert code == 0 and bundle["k"] == 0.0 and "note" in bundle


def test_invert_equiangular(capsys):
    t = str(2 * math.pi / 3)
    code, out, _ = call(capsys, "invert", "--theta", t, t, t)
    bundle = json.loads(out)
    assert code == 0
    assert bundle["k"] == pytest.approx(0.101021, abs=1e-6)
    assert max(bundle["round_trip"]) < 1e-10


def test_invert_generic_candidates(capsys):
    code, out, _ = call(capsys, "invert", "--theta", "1.2", "1.9", "1.4")
    bundle = json.loads(out)
    assert code == 0
    cands = sorted(round(abs(c[0]), 8) for c in bundle["theta1_candidates"])
    assert cands.count(1.2) == 2
    assert cands[0] == cands[1] or cands[2] == cands[3]


def test_prism_sweep(capsys):
    code, out, _ = call(capsys, "verify-prism", "--count", "2", "--seed", "3")
    assert code == 0 and json.loads(out)["summary"]["passed"] == 2


def test_prism_explicit_parameters(capsys):
    code, out, _ = call(capsys, "verify-prism", "--k", "0.5", "--u1", "1.6,0.3", "--u2", "0.9,0.2",
                        "--u3", "0.4,0.1")
    assert code == 0 and json.loads(out)["summary"]["count"] == 1


def test_static_elliptic_sweep(capsys):
    code, out, _ = call(capsys, "verify-static-elliptic", "--count", "4", "--format", "text")
    assert code == 0
    assert out.count("PASS") == 4


def test_tza_explicit(capsys):
    code, out, _ = call(capsys, "verify-tza", "--k", "0.6", "--u1", "0.9,0.1", "--u2", "0.5,0.2",
                        "--u3", "0.1,0.05")
    assert code == 0


def test_selftest(capsys):
    code, out, _ = call(capsys, "selftest-elliptic")
    bundle = json.loads(out)
    assert code == 0 and bundle["summary"]["passed"] == bundle["summary"]["count"]


def test_partial_parameters_is_usage_error(capsys):
    code, _, err = call(capsys, "verify-tza", "--k", "0.6", "--u1", "0.9,0.1")
    assert code == 2 and "--u1" in err


def test_pole_gives_replay_record(capsys):
    code, _, err = call(capsys, "verify-tza", "--k", "0.6", "--u1", "0.5,0", "--u2", "0.5,0",
                        "--u3", "0.5,0")
    record = json.loads(err)
    assert code == 3
    assert record["replay"]["command"] == "verify-tza" and record["replay"]["k"] == 0.6


def test_bad_complex_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["verify-tza", "--u1", "a,b"])
    assert exc.value.code == 2


def test_missing_theta(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["invert"])
    assert exc.value.code == 2


def test_out_file(tmp_path, capsys):
    target = tmp_path / "bundle.json"
    code, out, _ = call(capsys, "verify-te", "--count", "1", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["summary"]["passed"] == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "zamolodchikov", "verify-te", "--count", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["summary"]["passed"] == 1
