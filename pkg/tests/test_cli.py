import csv
import io
import json
import subprocess
import sys

import pytest

from implicit_kit.cli import EXIT_HYPOTHESIS, EXIT_OK, EXIT_SOLVE, EXIT_USAGE, ProblemFile, main
from implicit_kit.fixtures import PROBLEM_FILES

from reference_values import POLAR_ANGLE


@pytest.fixture
def problem(tmp_path):
    def write(name, **changes):
        d = dict(PROBLEM_FILES[name], **changes)
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(d))
        return str(path)
    return write


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_check_circle(problem):
    code, text = run("check", problem("circle"))
    assert code == EXIT_OK
    report = json.loads(text)
    assert report["base_det"] == 2.0
    assert all(report["verdicts"].values())
    assert report["seed"] == 7


def test_check_singular(problem):
    code, text = run("check", problem("singular"))
    assert code == EXIT_HYPOTHESIS
    assert json.loads(text)["base_det"] == 0.0


def test_check_weak_flags_discontinuity_but_passes(problem):
    code, text = run("check", problem("weak"))
    report = json.loads(text)
    assert code == EXIT_OK
    assert report["verdicts"]["continuity"] is False
    assert report["verdicts"]["differentiability"] is True


def test_check_inverse(problem):
    code, text = run("check", problem("polar"))
    assert code == EXIT_OK
    assert json.loads(text)["base_det"] == 1.0


def test_check_is_byte_identical(problem):
    path = problem("coupled")
    assert run("check", path)[1] == run("check", path)[1]


def test_seed_override(problem, monkeypatch):
    path = problem("coupled")
    monkeypatch.setenv("IMPLICIT_KIT_SEED", "123")
    assert json.loads(run("check", path)[1])["seed"] == 123


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _ = run("check", str(path))
    assert code == EXIT_USAGE
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("changes", [
    {"kind": "explicit"},
    {"base_y": [0.0, 1.0]},
    {"F": ["x1^2 + y2^2 - 1"]},
    {"box": {"x": [0.9]}},
])
def test_invalid_problem_files(problem, changes):
    assert run("check", problem("circle", **changes))[0] == EXIT_USAGE


def test_inverse_must_omit_base_y(problem):
    assert run("check", problem("polar", base_y=[1.0, 0.0]))[0] == EXIT_USAGE


def test_missing_file():
    assert run("check", "/nonexistent/problem.json")[0] == EXIT_USAGE


def test_usage_errors(problem):
    assert run()[0] == EXIT_USAGE
    assert run("solve", problem("circle"))[0] == EXIT_USAGE
    assert run("solve", problem("circle"), "--at", "0.1,0.2")[0] == EXIT_USAGE
    assert run("invert", problem("circle"), "--at", "0.1")[0] == EXIT_USAGE


def test_solve_circle(problem):
    code, text = run("solve", problem("circle"), "--at", "0.6", "--at", "0", "--at", "0.99")
    assert code == EXIT_OK
    assert text.splitlines()[0] == "x1,g1,residual_max,fiber_det,status"
    r = rows(text)
    assert float(r[0]["g1"]) == pytest.approx(0.8, abs=1e-10)
    assert float(r[0]["residual_max"]) <= 1e-10
    assert float(r[0]["fiber_det"]) == pytest.approx(1.6, abs=1e-10)
    assert float(r[1]["g1"]) == pytest.approx(1.0, abs=1e-14)
    assert float(r[1]["fiber_det"]) == pytest.approx(2.0, abs=1e-13)
    assert r[2]["status"] == "OUTSIDE" and r[2]["g1"] == ""


def test_solve_grid(problem):
    code, text = run("solve", problem("linear"), "--grid=-0.5:0.5:5")
    assert code == EXIT_OK
    r = rows(text)
    assert [float(row["x1"]) for row in r] == [-0.5, -0.25, 0.0, 0.25, 0.5]
    for row in r:
        x = float(row["x1"])
        assert float(row["g1"]) == pytest.approx((x + x ** 3) / 2, abs=1e-10)
        assert float(row["g2"]) == pytest.approx((x - x ** 3) / 2, abs=1e-10)


def test_numbers_roundtrip_at_17_digits(problem):
    _, text = run("solve", problem("coupled"), "--at", "2.05")
    for cell in text.splitlines()[1].split(",")[:-1]:
        v = float(cell)
        assert float("%.17g" % v) == v
        assert "%.17g" % v == cell


def test_jacobian_coupled(problem):
    code, text = run("jacobian", problem("coupled"), "--at", "2", "--fd-check")
    assert code == EXIT_OK
    d = json.loads(text)
    assert d["Jg"][0][0] == pytest.approx(1 / 3, abs=1e-12)
    assert d["Jg"][1][0] == pytest.approx(1 / 3, abs=1e-12)
    assert d["max_rel_err"] <= 1e-5


def test_jacobian_circle_and_linear(problem):
    d = json.loads(run("jacobian", problem("circle"), "--at", "0")[1])
    assert abs(d["Jg"][0][0]) <= 1e-14
    d = json.loads(run("jacobian", problem("linear"), "--at", "1")[1])
    assert d["Jg"][0][0] == pytest.approx(2.0, abs=1e-12)
    assert d["Jg"][1][0] == pytest.approx(-1.0, abs=1e-12)
    assert "fd_Jg" not in d


def test_jacobian_outside(problem):
    code, text = run("jacobian", problem("circle"), "--at", "0.99")
    assert code == EXIT_OK and json.loads(text)["status"] == "OUTSIDE"


def test_invert_polar(problem):
    code, text = run("invert", problem("polar"), "--at", "1,0", "--at", "0.8,0.6", "--at", "0,0", "--roundtrip")
    assert code == EXIT_OK
    assert text.splitlines()[0] == "y1,y2,G1,G2,forward_residual,roundtrip_err,status"
    r = rows(text)
    assert float(r[0]["G1"]) == pytest.approx(1.0, abs=1e-14) and abs(float(r[0]["G2"])) <= 1e-14
    assert float(r[1]["G1"]) == pytest.approx(1.0, abs=1e-9)
    assert float(r[1]["G2"]) == pytest.approx(POLAR_ANGLE, abs=1e-9)
    assert float(r[1]["roundtrip_err"]) <= 1e-12
    assert r[2]["status"] == "OUTSIDE"


def test_wrong_kind_for_command(problem):
    assert run("invert", problem("circle"), "--at", "0.5")[0] == EXIT_USAGE
    assert run("solve", problem("polar"), "--at", "1,0")[0] == EXIT_USAGE


def test_build_failure_is_solve_failure(problem):
    # base point does not solve the equation
    code, _ = run("solve", problem("circle", base_y=[0.5]), "--at", "0")
    assert code == EXIT_SOLVE


def test_problem_file_loader(problem):
    pf = ProblemFile.load(problem("polar"))
    assert pf.kind == "inverse" and pf.base_y is None and pf.n == pf.m == 2


def test_console_entry_point(problem):
    out = subprocess.run([sys.executable, "-m", "implicit_kit", "solve", problem("circle"), "--at", "0.6"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.splitlines()[1].startswith("0.59999999999999998,0.7999999999999")
