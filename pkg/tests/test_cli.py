import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from paintbox_markov.cli import dispatch


def run(capsys, *argv):
    code = dispatch(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_kernel_build(capsys):
    code, out, _ = run(capsys, "kernel", "build", "-n", "2", "-k", "2", "--alpha", "1")
    assert code == 0
    obj = json.loads(out)
    np.testing.assert_allclose(obj["probs"], [[0.75, 0.25], [0.5, 0.5]], atol=1e-12)


def test_missing_argument_is_usage_error(capsys):
    code, _, err = run(capsys, "kernel", "build", "-k", "2", "--alpha", "1")
    assert code == 2
    assert "-n" in err


def test_alpha_and_nu_are_exclusive(capsys):
    code, _, _ = run(capsys, "kernel", "build", "-n", "2", "-k", "2", "--alpha", "1", "--nu", "{}")
    assert code == 2


def test_bad_measure_config(capsys):
    code, _, err = run(capsys, "kernel", "build", "-n", "2", "-k", "2", "--nu", '{"type": "nope"}')
    assert code == 2
    assert "error" in err


def test_stationary_round_trip(tmp_path, capsys):
    kpath = tmp_path / "kernel.json"
    assert dispatch(["kernel", "build", "-n", "2", "-k", "2", "--alpha", "1", "-o", str(kpath)]) == 0
    code, out, _ = run(capsys, "stationary", "solve", "--kernel", str(kpath))
    assert code == 0
    assert json.loads(out)["weights"] == pytest.approx([2 / 3, 1 / 3], abs=1e-12)


def test_stationary_degenerate(tmp_path, capsys):
    kpath = tmp_path / "kernel.json"
    nu = '{"type": "discrete", "atoms": [[1, [1, 0]]]}'
    assert dispatch(["kernel", "build", "-n", "3", "-k", "2", "--nu", nu, "-o", str(kpath)]) == 0
    code, _, err = run(capsys, "stationary", "solve", "--kernel", str(kpath))
    assert code == 1 and "degenerate" in err
    code, _, _ = run(capsys, "stationary", "solve", "--kernel", str(kpath), "--force")
    assert code == 0


def test_verify_all_and_tolerance_override(capsys):
    code, out, _ = run(capsys, "verify", "--all", "-n", "3", "-k", "2", "--alpha", "1", "--replicates", "2000")
    assert code == 0
    assert out.count("PASS") >= 10
    code, out, _ = run(capsys, "verify", "--all", "-n", "3", "-k", "2", "--alpha", "1", "--replicates", "2000", "--tol", "1e-30")
    assert code == 1
    assert "FAIL" in out


def test_verify_degenerate_reports_skip(capsys):
    nu = '{"type": "discrete", "atoms": [[1, [1, 0]]]}'
    code, out, _ = run(capsys, "verify", "--all", "-n", "3", "-k", "2", "--nu", nu, "--replicates", "500")
    assert code == 0
    assert "skipped: hypothesis unmet" in out


def test_kernel_and_stationary_verify(capsys):
    assert run(capsys, "kernel", "verify", "-n", "3", "-k", "3", "--alpha", "0.5")[0] == 0
    assert run(capsys, "stationary", "verify", "-n", "3", "-k", "2", "--alpha", "2")[0] == 0


def test_seeded_outputs_reproducible(capsys):
    args = ["ctmc", "simulate", "-n", "3", "-k", "2", "--alpha", "1", "--horizon", "5", "--driver", "poisson", "--seed", "4"]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b
    traj = json.loads(a)
    assert traj["initial"] == {"n": 3, "blocks": [[1, 2, 3]]}


def test_paintbox_commands(capsys):
    code, out, _ = run(capsys, "paintbox", "eval", "--alpha", "1", "-k", "2", "--partition", '{"n": 2, "blocks": [[1, 2]]}')
    assert code == 0 and float(out) == pytest.approx(0.75)
    code, out, _ = run(capsys, "paintbox", "sample", "--alpha", "1", "-k", "2", "-n", "5", "--count", "4")
    assert code == 0 and len(out.splitlines()) == 4


def test_massproc_csv(tmp_path, capsys):
    path = tmp_path / "mass.csv"
    assert dispatch(["massproc", "simulate", "--alpha", "1", "-k", "3", "--horizon", "4", "-o", str(path)]) == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["time", "s_1", "s_2", "s_3"]
    assert [float(v) for v in rows[1]] == [0.0, 1.0, 0.0, 0.0]
    code, out, _ = run(capsys, "massproc", "couple", "-n", "500", "-k", "2", "--alpha", "1", "--horizon", "3")
    assert code == 0
    header = out.splitlines()[0].split(",")
    assert header[-1] == "sup_error"
    for line in out.splitlines()[1:]:
        float(line.split(",")[1])


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "paintbox_markov", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "kernel" in res.stdout
