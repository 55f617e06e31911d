import csv
import io
import json
import math

import pytest

from ecgf import cli

ROUND_TRIP = [
    ["count", "--p", "7", "--A", "-1", "--B", "0", "--n", "3"],
    ["census", "--p", "7", "--A", "-1", "--B", "0", "--a", "1", "--x", "20"],
    ["ratio-census", "--p", "7", "--A", "-1", "--B", "0", "--x", "30"],
    ["bounds", "--p", "7", "--A", "1", "--B", "3", "--n", "4", "--eps", "0.1"],
    ["tauberian", "--p", "5", "--A", "1", "--B", "1"],
    ["genfun-coeff", "--p", "5", "--A", "1", "--B", "1", "--n", "6"],
    ["genfun-feq", "--p", "5", "--A", "1", "--B", "1", "--s", "0.3+2j", "-1-4i"],
    ["local-zeros", "--p", "11", "--A", "0", "--B", "1"],
    ["global-eval", "--s", "2.5", "3+1j", "--M", "5000"],
    ["global-eval", "--s", "2.5+1j", "--path", "euler", "--M", "5000"],
    ["bn", "--M", "30"],
    ["residue", "--M", "20000"],
    ["deuring", "--x", "2000"],
    ["b-zero-scan", "--sigma", "2.5", "--tmax", "3", "--step", "0.5", "--M", "2000"],
    ["hf-eval", "--z", "0", "0.5+1j", "--M", "2000"],
    ["hf-eval", "--z", "1.2", "--method", "gamma", "--M", "2000"],
    ["hf-moments", "--n-max", "3", "--M", "2000"],
    ["hf-lambda", "--lam", "0.2", "--z", "0.3", "--M", "2000"],
    ["approx-feq", "--s", "3", "--x", "50", "--M", "2000"],
    ["falsified-zeros", "--format", "json", "--ymax", "10", "--grid", "100"],
]


def _same(a, b):
    if isinstance(a, float) and math.isnan(a):
        return b is None
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(_same(a[k], b[k]) for k in a)
    if isinstance(a, list):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    return a == b


@pytest.mark.parametrize("argv", ROUND_TRIP, ids=lambda a: " ".join(a[:2]))
def test_json_round_trip(argv, capsys):
    assert cli.main(argv) == 0
    out = capsys.readouterr().out
    args = cli.parse_args(argv)
    args.format, args.jobs = "json", 1
    expected = cli._plain(args.func(args))
    assert _same(expected, json.loads(out))


def test_count_example(capsys):
    assert cli.main(["count", "--p", "7", "--A", "-1", "--B", "0", "--n", "3", "--method", "both"]) == 0
    assert json.loads(capsys.readouterr().out) == {"weil": 344, "oracle": 344}


def test_census_example(capsys):
    cli.main(["census", "--p", "7", "--A", "-1", "--B", "0", "--a", "1", "--x", "20"])
    hits = json.loads(capsys.readouterr().out)["hits"]
    assert hits and all(n % 2 for n in hits)


def test_floats_printed_with_17_digits():
    assert cli.dumps({"x": 0.1}) == '{"x": 0.10000000000000001}'
    assert cli.dumps([1 + 2j, float("inf")]) == '[{"re": 1, "im": 2}, null]'


def test_falsified_zeros_csv(capsys):
    assert cli.main(["falsified-zeros", "--ymax", "40"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["y", "re", "im", "abs_error"]
    assert all(float(r[1]) == 0 for r in rows[1:])


def test_csv_for_grids(capsys):
    assert cli.main(["--format", "csv", "global-eval", "--s", "2.5", "3", "--M", "2000"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["s_re", "s_im", "value_re", "value_im", "abs_error"]
    assert len(rows) == 3


def test_exit_codes(capsys):
    assert cli.main(["global-eval", "--s", "0.7"]) == 2
    assert cli.main(["global-feq", "--s", "-0.25"]) == 2
    assert cli.main(["count", "--p", "9", "--A", "1", "--B", "1", "--n", "1"]) == 2
    assert cli.main(["count", "--p", "5", "--A", "1", "--B", "1", "--n", "12", "--method", "oracle"]) == 3
    assert cli.main(["no-such-command"]) == 1
    assert cli.main(["count", "--p", "7"]) == 1
    assert cli.main(["--jobs", "0", "bn"]) == 1
    err = capsys.readouterr().err
    assert "domain error" in err and "resource error" in err and "usage" in err


def test_catalog_from_environment(tmp_path, monkeypatch, capsys):
    path = tmp_path / "cat.txt"
    path.write_text("0 0 1 -1 0  # mine\n")
    monkeypatch.setenv(cli.CATALOG_ENV, str(path))
    assert cli.main(["bn", "--curve", "mine", "--M", "5"]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 5
    assert cli.main(["bn", "--curve", "11a1", "--M", "5"]) == 2


def test_coefficient_file(tmp_path, capsys):
    from ecgf.modform import eta11_coeffs
    table = eta11_coeffs(2000)
    path = tmp_path / "an.txt"
    path.write_text("".join(f"{n} {table[n]}\n" for n in range(1, 2001)))
    assert cli.main(["hf-eval", "--z", "0", "--coeff-file", str(path), "--level", "11"]) == 0
    rec = json.loads(capsys.readouterr().out)[0]
    assert rec["value_re"] == pytest.approx(0.13399226147009388, rel=1e-10)
    assert cli.main(["hf-eval", "--z", "0", "--coeff-file", str(path)]) == 2


def test_selftest_exit_status_reflects_checks(capsys):
    status = cli.main(["selftest"])
    report = json.loads(capsys.readouterr().out)
    assert [c["name"] for c in report["checks"]] == [f"AC{i}" for i in range(1, 12)]
    assert status == (0 if report["passed"] else 1)
