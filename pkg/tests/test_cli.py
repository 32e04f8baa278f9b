"""Command-line interface: reports, exit codes, files, reproducibility."""

import contextlib
import io
import json
import subprocess
import sys

import pytest

from qfmarket.cli import EXIT_DISAGREE, EXIT_INPUT, EXIT_OK, main


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def test_solve_report_exact(fixture_dir):
    code, out, err = run_cli("solve", str(fixture_dir / "example2.json"), "--no-timestamp")
    assert code == EXIT_OK and err == ""
    report = json.loads(out)
    assert report["command"] == "solve"
    assert report["mode"] == "exact"
    assert report["p_star"] == ["3/5", "3/5"]
    assert report["revenue"] == 3
    assert report["welfare"] == 15
    assert report["aggregate"] == [3, 2]
    assert report["goods"] == ["A", "B"]
    assert report["certificates"]["clearing"]["clearing"] is True
    assert report["certificates"]["efficiency"]["verdict"] == "certified-CE-hence-efficient"
    assert len(report["input"]["sha256"]) == 64
    assert "generated_at" not in report


def test_solve_reports_are_reproducible(fixture_dir):
    first = run_cli("solve", str(fixture_dir / "example2.json"), "--no-timestamp")
    second = run_cli("solve", str(fixture_dir / "example2.json"), "--no-timestamp")
    assert first == second


def test_solve_float_mode(fixture_dir):
    code, out, _ = run_cli(
        "solve", str(fixture_dir / "example2.json"), "--mode", "float", "--no-timestamp"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["mode"] == "float"
    assert report["p_star"] == [0.6, 0.6]


def test_solve_arctic_reports_owner_bundles(fixture_dir):
    code, out, _ = run_cli(
        "solve", str(fixture_dir / "example2_arctic_split.json"), "--no-timestamp"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    owners = {row["owner"]: row for row in report["owners"]}
    assert set(owners) == {"owner1", "owner2", "owner3"}
    assert all(row["spend"] == 1 for row in owners.values())


def test_solve_out_file_writes_json_and_prints_summary(fixture_dir, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run_cli(
        "solve", str(fixture_dir / "example2.json"), "--no-timestamp", "--out", str(target)
    )
    assert code == EXIT_OK
    assert "p* = (3/5, 3/5)" in out
    assert json.loads(target.read_text())["revenue"] == 3


def test_check_price_clearing_verdict(fixture_dir):
    code, out, _ = run_cli(
        "check-price", str(fixture_dir / "example2.json"), "--price", "3/5,3/5", "--no-timestamp"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["feasible"] is True and report["clearing"] is True
    assert report["max_extension_revenue"] == 3


def test_check_price_witness(fixture_dir):
    code, out, _ = run_cli(
        "check-price", str(fixture_dir / "example2.json"), "--price", "1/2,1/2", "--no-timestamp"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["feasible"] is False and report["clearing"] is False
    assert report["witness"] == {
        "goods": ["A", "B"],
        "forced_budget": 3,
        "capacity": "5/2",
        "excess": "1/2",
    }


def test_check_price_arity_error(fixture_dir):
    code, _, err = run_cli(
        "check-price", str(fixture_dir / "example2.json"), "--price", "1"
    )
    assert code == EXIT_INPUT
    assert "expected 2 comma-separated prices" in err


def test_region_writes_grid_and_boundary(fixture_dir, tmp_path):
    grid_path = tmp_path / "grid.csv"
    code, out, _ = run_cli(
        "region",
        str(fixture_dir / "example2.json"),
        "--bounds",
        "0.35:3",
        "--resolution",
        "41",
        "--out",
        str(grid_path),
        "--no-timestamp",
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["mode"] == "float"  # exact inputs scan in float by default
    assert report["points"] == 41 * 41
    assert 0 < report["feasible_points"] < report["points"]
    assert max(abs(v - 0.6) for v in report["min_feasible_price"]) < 0.07
    assert abs(report["max_revenue"]["revenue"] - 3.0) < 1e-6
    assert grid_path.exists()
    boundary = tmp_path / "grid.boundary.csv"
    assert report["boundary_csv"] == str(boundary) and boundary.exists()
    header = grid_path.read_text().splitlines()[0]
    assert header == "price_1,price_2,feasible,max_revenue"


def test_region_lattice_cap(fixture_dir, tmp_path):
    code, _, err = run_cli(
        "region",
        str(fixture_dir / "example2.json"),
        "--resolution",
        "4000",
        "--out",
        str(tmp_path / "grid.csv"),
    )
    assert code == EXIT_INPUT
    assert "exceeds the 10^7 cap" in err


def test_region_boundary_needs_two_goods(fixture_dir, tmp_path):
    code, _, err = run_cli(
        "region",
        str(fixture_dir / "example1.json"),
        "--resolution",
        "10",
        "--boundary",
        str(tmp_path / "b.csv"),
        "--out",
        str(tmp_path / "grid.csv"),
    )
    assert code == EXIT_INPUT
    assert "exactly 2 goods" in err


def test_region_requires_out(fixture_dir):
    code, _, err = run_cli("region", str(fixture_dir / "example2.json"))
    assert code == EXIT_INPUT
    assert "--out" in err


def test_monopoly_curved_report():
    code, out, _ = run_cli(
        "monopoly", "--valuation", "example-a1", "--supply", "3", "--budget", "2", "--no-timestamp"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["clearing"] == {"price": 0.5, "revenue": 1.5}
    assert abs(report["optimal"]["price"] - 1.0) < 1e-6
    assert abs(report["optimal"]["revenue"] - 2.0) < 1e-9
    free = report["optimal_unconstrained"]
    assert abs(free["price"] - 1.4715177646857693) < 1e-4
    assert abs(free["quantity"] - 1.4426950408889634) < 1e-4
    assert abs(free["revenue"] - 2.122951381692172) < 1e-4
    assert report["divergence_witness"]["prop1"] is True
    assert abs(report["divergence_witness"]["x_tilde"] - 2.0) < 1e-6


def test_monopoly_linear_report():
    code, out, _ = run_cli(
        "monopoly", "--valuation", "linear:5", "--supply", "3", "--no-timestamp"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["input"]["budget"] == "inf"
    assert report["clearing"]["price"] == 5.0
    assert report["optimal"] == {"price": 5.0, "quantity": 3.0, "revenue": 15.0}
    assert "optimal_unconstrained" not in report
    assert report["divergence_witness"] is None


def test_monopoly_rejects_unknown_valuations():
    code, _, err = run_cli("monopoly", "--valuation", "cubic:2", "--supply", "3")
    assert code == EXIT_INPUT
    assert "unknown valuation" in err


def test_proptest_small_run():
    code, out, _ = run_cli(
        "proptest", "--seed", "0", "--markets", "2", "--pairs", "10", "--no-timestamp"
    )
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["ok"] is True
    assert [s["name"] for s in report["suites"]] == [
        "meet-closure",
        "revenue-dominance",
        "efficiency",
        "minimality",
        "upward-closure",
    ]
    assert all(s["failures"] == [] for s in report["suites"])


def test_csv_input_needs_supplies(tmp_path):
    table = tmp_path / "m.csv"
    table.write_text("name,budget,v_1,v_2\nb1,1,2,3\nb2,1,2,2\nb3,1,4,2\n")
    code, out, _ = run_cli("solve", str(table), "--supply", "3,2", "--no-timestamp")
    assert code == EXIT_OK
    assert json.loads(out)["p_star"] == ["3/5", "3/5"]
    code, _, err = run_cli("solve", str(table))
    assert code == EXIT_INPUT
    assert "--supply" in err


def test_missing_input_file_is_an_input_error():
    code, _, err = run_cli("solve", "definitely_missing.json")
    assert code == EXIT_INPUT
    assert "error:" in err


def test_module_entry_point_matches_console_script(fixture_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "qfmarket", "check-price",
         str(fixture_dir / "example2.json"), "--price", "3/5,3/5", "--no-timestamp"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == EXIT_OK
    assert json.loads(proc.stdout)["clearing"] is True


def test_exit_codes_are_distinct():
    assert (EXIT_OK, EXIT_INPUT, EXIT_DISAGREE) == (0, 1, 2)
