import json
import math
import subprocess
import sys

import pytest

from poisson_flats.cli import main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analytic(capsys):
    code, out, _ = run(["analytic", "ball_volume", "--kappa", "-1", "--d", "2", "--r", "2"], capsys)
    assert code == 0 and float(out) == pytest.approx(2 * math.pi * (math.cosh(2) - 1))
    code, out, _ = run(["analytic", "cumulant_Z", "--d", "4", "--k", "3", "--l", "2"], capsys)
    assert float(out) == pytest.approx(math.pi)
    code, out, _ = run(["analytic", "mean_F", "--kappa", "0", "--d", "2", "--k", "1", "--m", "2", "--r", "1"], capsys)
    assert float(out) == pytest.approx(1.0)


def test_analytic_missing_argument(capsys):
    code, _, err = run(["analytic", "slice_volume", "--kappa", "0", "--d", "2"], capsys)
    assert code == 1 and "--j" in err


def test_domain_error_is_exit_1(capsys):
    code, _, err = run(["analytic", "ball_volume", "--kappa", "1", "--d", "2", "--r", "3"], capsys)
    assert code == 1 and "pi/2" in err


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["study", "moments", "--replicates", "many"])
    assert e.value.code == 1


def test_simulate(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(["simulate", "--kappa", "-1", "--d", "3", "--k", "1", "--r", "1.5", "--seed", "4",
                      "--out", str(out)], capsys)
    lines = out.read_text().splitlines()
    assert code == 0 and lines[0] == "distance,u1,u2,u3"
    for line in lines[1:]:
        s, *u = map(float, line.split(","))
        assert 0 <= s <= 1.5 and math.isclose(sum(x * x for x in u), 1.0, rel_tol=1e-12)
    run(["simulate", "--kappa", "-1", "--d", "3", "--k", "1", "--r", "1.5", "--seed", "4",
         "--out", str(tmp_path / "t.csv")], capsys)
    assert (tmp_path / "t.csv").read_text() == out.read_text()


def _config(tmp_path, **kw):
    data = {"study": "moments", "proc": {"kappa": 0, "d": 2, "k": 1}, "radii": [1.0], "replicates": 200,
            "seed": 1, **kw}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(data))
    return str(p)


def test_study_config_and_determinism(tmp_path, capsys):
    cfg = _config(tmp_path)
    code, _, err = run(["study", "moments", "--config", cfg, "--out", str(tmp_path / "a.csv")], capsys)
    assert code == 0 and "wall_time" in err and "PASS" in err
    run(["study", "moments", "--config", cfg, "--out", str(tmp_path / "b.csv"), "--quiet"], capsys)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    code, out, err = run(["study", "moments", "--config", cfg, "--quiet", "--seed", "2"], capsys)
    assert err == "" and out.startswith("# study,moments\n# seed,2\n")


def test_study_failure_exit_2(tmp_path, capsys):
    cfg = _config(tmp_path, tolerances={"mean": {"mode": "abs", "value": 0.0}})
    code, _, _ = run(["study", "moments", "--config", cfg, "--quiet"], capsys)
    assert code == 2


def test_study_config_errors(tmp_path, capsys):
    cfg = _config(tmp_path, colour="blue")
    assert run(["study", "moments", "--config", cfg], capsys)[0] == 1
    cfg = _config(tmp_path)
    assert run(["study", "crofton", "--config", cfg], capsys)[0] == 1
    assert run(["study", "moments", "--config", cfg, "--replicates", "10"], capsys)[0] == 1
    cfg = _config(tmp_path, study="clt_radius", proc={"kappa": -1, "d": 4, "k": 3}, radii=[1.0, 2.0])
    code, _, err = run(["study", "clt_radius", "--config", cfg], capsys)
    assert code == 1 and "2k <= d+1" in err


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "poisson_flats.cli", "analytic", "c_dk", "--d", "3", "--k", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and float(res.stdout) == pytest.approx(math.pi / 4)
