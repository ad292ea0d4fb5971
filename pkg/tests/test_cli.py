import json
import subprocess
import sys

import pytest

from sejbasket.cli import main
from sejbasket.fileio import DATA_DIR


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_basket_table(capsys):
    code, out, _ = run(capsys, "basket", "brexit_deal", "--samples", "20000")
    assert code == 0
    assert "cpi % change" in out and "Median" in out and "seed 20180704" in out


def test_basket_csv_and_out(tmp_path, capsys):
    dest = tmp_path / "r.csv"
    code, out, _ = run(capsys, "basket", str(DATA_DIR / "brexit_nodeal.scenario"), "--samples", "5000",
                       "--seed", "3", "--format", "csv", "--out", str(dest))
    assert code == 0 and out == ""
    lines = dest.read_text().splitlines()
    assert lines[0] == "scenario,node,statistic,value"
    assert len(lines) == 1 + 6 * 5


def test_seed_and_workers_reproducibility(capsys):
    args = ("basket", "brexit_deal", "--samples", "70000", "--format", "json")
    _, a, _ = run(capsys, *args, "--seed", "5")
    _, b, _ = run(capsys, *args, "--seed", "5", "--workers", "3")
    _, c, _ = run(capsys, *args, "--seed", "6")
    assert a == b and a != c
    assert json.loads(a)["reports"][0]["seed"] == 5


def test_condition_command(capsys):
    code, out, _ = run(capsys, "condition", "brexit_deal", "--node", "Meat", "--percentile", "5", "--samples", "20000")
    assert code == 0
    assert "Meat -10.0%" in out and "(unconditioned values in brackets)" in out
    code2, out2, _ = run(capsys, "condition", "brexit_deal", "--node", "Meat", "--percentile", "0.05", "--samples", "20000")
    assert out2 == out


def test_overshoot_flag_changes_results(capsys):
    _, a, _ = run(capsys, "basket", "brexit_deal", "--samples", "5000", "--format", "csv")
    _, b, _ = run(capsys, "basket", "brexit_deal", "--samples", "5000", "--format", "csv", "--overshoot", "0.5")
    assert a != b


def test_score_and_dm(capsys):
    code, out, _ = run(capsys, "score", "example")
    assert code == 0 and "weight" in out
    code, out, _ = run(capsys, "dm", "example", "--optimize", "--format", "json")
    assert code == 0 and json.loads(out)["alpha"] > 0
    code, out, _ = run(capsys, "dm", "example", "--alpha", "0.01", "--format", "csv")
    assert code == 0 and out.startswith("question,")


def test_input_errors_exit_2(tmp_path, capsys):
    code, _, err = run(capsys, "basket", str(tmp_path / "missing.scenario"))
    assert code == 2 and err.startswith("error:")
    empty = tmp_path / "e.scenario"
    empty.write_text("")
    code, _, err = run(capsys, "basket", str(empty))
    assert code == 2 and ":1:" in err
    code, _, err = run(capsys, "condition", "brexit_deal", "--node", "Tofu", "--percentile", "5")
    assert code == 2 and "Tofu" in err
    code, _, err = run(capsys, "dm", "example", "--alpha", "0.99")
    assert code == 2


def test_argument_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["condition", "brexit_deal", "--node", "Meat", "--percentile", "150"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["basket", "brexit_deal", "--format", "xml"])
    assert e.value.code == 2


def test_numerical_failure_exit_3(tmp_path, capsys):
    text = (
        "[scenario]\nformat_version = 1\n"
        "[quantiles]\nA = 0, 1, 2\nB = 0, 1, 2\nC = 0, 1, 2\n"
        "[correlations]\nA ~ B = 0.9\nA ~ C = 0.9\nB ~ C = -0.9\n"
        "[basket:abc]\ntotal = 3\nA = 1\nB = 1\nC = 1\n"
    )
    p = tmp_path / "bad.scenario"
    p.write_text(text)
    code, _, err = run(capsys, "basket", str(p), "--samples", "100")
    assert code == 3 and "repair" in err


def test_selftest_passes(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0
    assert out.count("PASS") == 7 and "FAIL" not in out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "sejbasket", "score", "example", "--format", "csv"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("expert,calibration")
