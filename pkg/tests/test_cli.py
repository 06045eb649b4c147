import csv
import io
import json
import os
import subprocess
import sys

import pytest

from fracspde.cli import run


def call(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_kernel_example():
    code, out, _ = call(["kernel", "--which", "z", "--alpha", "2", "--beta", "1", "--d", "1",
                         "--nu", "1", "--t", "1", "--r", "1"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["which", "t", "r", "value"]
    assert rows[1][3] == "0.241970724519"  # 12 significant digits
    assert float(rows[1][3]) == pytest.approx(0.2419707245, abs=1e-10)


def test_check_example():
    code, out, _ = call(["check", "--noise", "white", "--alpha", "2", "--beta", "1", "--d", "1"])
    assert code == 0
    assert out.splitlines()[1].startswith("holds,")


def test_check_exact_boundary():
    _, out, _ = call(["check", "--noise", "white", "--alpha", "2", "--beta", "2/3", "--d", "1"])
    assert out.splitlines()[1].startswith("fails,")


def test_verify_masses_exit_zero():
    code, out, _ = call(["verify", "--suite", "masses", "--quiet"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and all(r["passed"] == "True" for r in rows)


def test_json_echoes_config_and_hash():
    code, out, _ = call(["--output", "json", "ml", "--rho", "0.5", "--z=-1,-2"])
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["rho"] == 0.5 and doc["config"]["command"] == "ml"
    assert len(doc["config_hash"]) == 64
    assert doc["rows"][0][1] == pytest.approx(0.4275835762, abs=1e-10)


def test_deterministic_output():
    argv = ["--output", "json", "--seed", "3", "certify", "--alpha", "2", "--beta", "0.8",
            "--d", "1"]
    assert call(argv)[1] == call(argv)[1]


def test_precondition_exit_code_and_error_record():
    code, out, err = call(["--output", "json", "kernel", "--which", "zstar", "--alpha", "2",
                           "--beta", "0.8", "--d", "1", "--t", "1", "--r", "1"])
    assert code == 2 and out == ""
    rec = json.loads(err)
    assert rec["exit_code"] == 2 and rec["error"] == "PreconditionError"


def test_missing_flag_is_validation_error(capsys):
    code, _, _ = call(["kernel", "--which", "z", "--alpha", "2", "--beta", "1", "--d", "1",
                       "--t", "1"])
    assert code == 2


def test_certificate_precondition_failed_exit_code():
    code, out, _ = call(["certify", "--alpha", "2", "--beta", "0.5", "--d", "1"])
    assert code == 2
    assert "precondition_failed" in out


def test_convergence_exit_code():
    code, _, err = call(["ml", "--rho", "2.5", "--z=-50"])
    assert code == 3
    assert "error" in err


def test_foxh_eval_and_chaos_csv():
    code, out, _ = call(["foxh-eval", "--m", "1", "--n", "0", "--p", "0", "--q", "1",
                         "--lower", "0,1", "--z", "1"])
    assert code == 0 and out.splitlines()[1].startswith("1,0.367879441171,")
    code, out, _ = call(["chaos", "--alpha", "2", "--beta", "0.8", "--d", "1", "--kappa", "0.5",
                         "--u0", "1.3", "--n-max", "3"])
    assert code == 0 and out.splitlines()[0] == "n,upper_partial_sum,lower_partial_sum"


def test_module_entry_point_and_thread_variable():
    env = dict(os.environ, FRACSPDE_THREADS="1")
    res = subprocess.run([sys.executable, "-m", "fracspde", "stable", "--alpha", "2", "--d", "1",
                          "--r", "0"], capture_output=True, text=True, env=env, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines() == ["r,density", "0,0.282094791774"]
    assert res.stderr == ""


def test_seed_reaches_randomised_suite():
    a = call(["--seed", "5", "verify", "--suite", "simplex", "--quiet"])
    b = call(["--seed", "6", "verify", "--suite", "simplex", "--quiet"])
    assert a[0] == b[0] == 0
    assert a[1] != b[1]
    assert a[1] == call(["--seed", "5", "verify", "--suite", "simplex", "--quiet"])[1]
