import csv
import json

import pytest

from fracheat.cli import main


def run(args):
    return main([str(a) for a in args])


def test_solve_writes_json_report(tmp_path):
    out = tmp_path / "report.json"
    code = run(["solve", "--problem", "heat1d", "--delta", 0.4, "--n", 31, "--m", 32,
                "--output", out])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["converged"] is True
    assert payload["iterations"] >= 1
    assert payload["max_error"] > 0.0
    assert payload["cycle"] == "v01"


def test_solve_csv_format(tmp_path):
    out = tmp_path / "report.csv"
    code = run(["solve", "--problem", "heat1d", "--delta", 0.4, "--n", 15, "--m", 16,
                "--format", "csv", "--output", out])
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1 and rows[0]["converged"] == "True"


def test_solve_deterministic_output(tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        assert run(["solve", "--problem", "heat1d", "--delta", 0.4, "--n", 15, "--m", 16,
                    "--output", out]) == 0
        payload = json.loads(out.read_text())
        del payload["wall_time_s"]  # timing is the only permitted difference
        outs.append(payload)
    assert outs[0] == outs[1]


def test_usage_errors_exit_2(tmp_path):
    assert run(["solve", "--problem", "heat1d", "--delta", 1.5, "--n", 7, "--m", 8]) == 2
    assert run(["solve", "--problem", "heat1d", "--delta", 0.4, "--m", 8]) == 2  # missing --n
    assert run(["no-such-command"]) == 2
    assert run(["solve", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_non_convergence_exits_3(tmp_path):
    out = tmp_path / "nc.json"
    code = run(["solve", "--problem", "heat1d", "--delta", 0.4, "--n", 31, "--m", 32,
                "--max-iter", 1, "--output", out])
    assert code == 3
    assert json.loads(out.read_text())["converged"] is False


def test_config_file_supplies_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    out = tmp_path / "cfgd.json"
    cfg.write_text(
        "# comment line\n"
        "problem = heat1d\n"
        "delta = 0.4\n"
        "n = 15\n"
        "m = 16\n"
        f"output = {out}\n"
    )
    assert run(["solve", "--config", cfg]) == 0
    assert json.loads(out.read_text())["N"] == 15
    # explicit flags override the file
    out2 = tmp_path / "cfgd2.json"
    assert run(["solve", "--config", cfg, "--m", 32, "--output", out2]) == 0
    assert json.loads(out2.read_text())["M"] == 32


def test_order_study_csv_and_plot(tmp_path):
    out = tmp_path / "orders.csv"
    code = run(["order-study", "--delta", 0.4, "--n", 63, "--m-min", 32, "--m-max", 64,
                "--both-meshes", "--plot", "--output", out])
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    meshes = {r["mesh"] for r in rows}
    assert meshes == {"graded", "uniform"}
    assert all(float(r["E_M"]) > 0 for r in rows)
    assert (tmp_path / "orders_errors.png").exists()


def test_hmat_check_outputs(tmp_path):
    out = tmp_path / "hm.csv"
    dump = tmp_path / "r.csv"
    code = run(["hmat-check", "--delta", 0.4, "--m", 256, "--ranks", "5,10",
                "--dump-r", dump, "--plot", "--output", out])
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    errs = [float(r["max_error"]) for r in rows]
    assert errs[1] < errs[0]  # error shrinks with rank
    assert dump.exists()
    assert (tmp_path / "hm_rank.png").exists()


def test_hmat_check_rejects_huge_m(tmp_path):
    assert run(["hmat-check", "--m", 100000, "--output", tmp_path / "x.csv"]) == 2


def test_bench_csv(tmp_path):
    out = tmp_path / "bench.csv"
    code = run(["bench", "--delta", 0.4, "--n", 15, "--m-list", "16,32", "--fixed-n",
                "--plot", "--output", out])
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert all(float(r["wall_time_s"]) > 0 for r in rows)
    assert (tmp_path / "bench_time.png").exists()


def test_help_exits_cleanly(capsys):
    assert run(["--help"]) == 0
    assert "solve" in capsys.readouterr().out
