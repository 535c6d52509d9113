import csv
import os
import subprocess
import sys

import pytest
import yaml

from dunklmax.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from dunklmax.suites import SUITES

QUICK = ["--suite", "product-formula", "--dim", "1", "--kappa", "0.5"]


def test_describe_lists_all_suites(capsys):
    assert main(["describe"]) == EXIT_OK
    out = capsys.readouterr().out
    assert f"suites ({len(SUITES)}):" in out
    for s in SUITES:
        assert f"  {s}:" in out


def test_describe_single_suite(capsys):
    assert main(["describe", "--suite", "covering", "--kappa", "0.5", "2", "--dim", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "suites (1):" in out
    resolved = yaml.safe_load(out.split("suites (")[0].replace("resolved configuration:", ""))
    assert resolved["kappa"] == [0.5, 2.0] and resolved["dim"] == 2


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["describe", "--suite", "nope"], "nope"),
        (["describe", "--kappa", "-1"], "multiplicities"),
        (["describe", "--grid-size", "ten"], "grid-size"),
        ([], "subcommand"),
        (["report", "/nonexistent/dir"], "checks.csv"),
    ],
)
def test_usage_errors(capsys, argv, needle):
    assert main(argv) == EXIT_USAGE
    assert needle in capsys.readouterr().err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(yaml.safe_dump({"dim": 1, "kappa": [1.5], "suites": ["kernel"], "seed": 7}))
    assert main(["describe", "--config", str(cfg), "--seed", "9"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "seed: 9" in out and "- 1.5" in out and "suites (1)" in out
    bad = tmp_path / "bad.yaml"
    bad.write_text("- 1\n- 2\n")
    assert main(["describe", "--config", str(bad)]) == EXIT_USAGE


def test_run_writes_reports_and_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", *QUICK, "--output-dir", str(a)]) == EXIT_OK
    assert main(["run", *QUICK, "--output-dir", str(b)]) == EXIT_OK
    assert "overall: PASS" in capsys.readouterr().out
    for name in ("checks.csv", "constants.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ca, cb = (yaml.safe_load((d / "config.yaml").read_text()) for d in (a, b))
    assert ca.pop("output_dir") == str(a) and cb.pop("output_dir") == str(b) and ca == cb
    with open(a / "checks.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and all(r["suite"] == "product-formula" and r["pass"] == "pass" for r in rows)
    assert ca["suites"] == ["product-formula"]

    assert main(["report", str(a)]) == EXIT_OK
    report = capsys.readouterr().out
    assert report.endswith("overall: PASS\n")
    assert report in (a / "summary.txt").read_text()


def test_numerical_failure_exit_code(tmp_path, capsys):
    out = tmp_path / "low"
    assert main(["run", *QUICK, "--quad-order", "8", "--output-dir", str(out)]) == EXIT_FAIL
    assert "failed: product-formula/residual" in capsys.readouterr().err
    assert main(["report", str(out)]) == EXIT_FAIL


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dunklmax.cli", "describe", "--suite", "kernel"], capture_output=True, text=True)
    assert proc.returncode == 0 and "suites (1):" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "dunklmax.cli", "describe", "--suite", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 1 and "bogus" in proc.stderr
