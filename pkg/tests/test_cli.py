import csv
import json
import subprocess
import sys

import pytest

BASE_MODEL = {
    "f1": {"family": "pareto", "alpha": 1.0},
    "f2": {"family": "pareto", "alpha": 1.0},
    "g": {"family": "exponential", "rate": 1.0},
    "dependence": {"kind": "frank-tri", "gamma": 1.0},
    "r": 0.05,
    "t_max": 2.0,
    "seed": 11,
    "batch_size": 50000,
}


def run_cli(tmp_path, doc, *args):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(doc))
    return subprocess.run(
        [sys.executable, "-m", "renewalrisk.cli", "--config", str(cfg), *args],
        capture_output=True,
        text=True,
    )


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def make_doc(experiment, **extra):
    doc = {
        "model": dict(BASE_MODEL),
        "experiment": experiment,
        "grids": {"t_grid": [0.5, 1.0], "x_grid": [5.0, 10.0], "d": 5.0,
                  "s_grid": [0.0, 0.5, 1.0]},
        "n_paths": 50000,
        "renewal_step": 0.002,
        "output_path": "-",
    }
    doc.update(extra)
    return doc


def test_missing_config_flag(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "renewalrisk.cli"], capture_output=True, text=True
    )
    assert res.returncode == 2


def test_bad_json_exit_2(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    res = subprocess.run(
        [sys.executable, "-m", "renewalrisk.cli", "--config", str(cfg)],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 2
    assert res.stderr.strip()


def test_missing_required_field_exit_2(tmp_path):
    doc = make_doc("simulate")
    del doc["model"]["f1"]
    res = run_cli(tmp_path, doc)
    assert res.returncode == 2
    assert "f1" in res.stderr


def test_unknown_experiment_exit_2(tmp_path):
    res = run_cli(tmp_path, make_doc("nonsense"))
    assert res.returncode == 2
    assert "experiment" in res.stderr


def test_invalid_fgm_exit_2(tmp_path):
    doc = make_doc("copula-check")
    doc["model"]["dependence"] = {"kind": "sarmanov-fgm", "g12": 0.9, "g13": 0.9, "g23": -0.9}
    res = run_cli(tmp_path, doc)
    assert res.returncode == 2
    assert "FGM" in res.stderr or "fgm" in res.stderr


def test_simulate_csv_schema(tmp_path):
    out = tmp_path / "out.csv"
    doc = make_doc("simulate", output_path=str(out))
    res = run_cli(tmp_path, doc)
    assert res.returncode == 0, res.stderr
    rows = read_csv(out)
    assert rows[0][:6] == ["t", "x1", "x2", "d1", "d2", "r"]
    assert "empirical" in rows[0] and "empirical_se" in rows[0]
    assert len(rows) == 1 + 2 * 2  # t_grid x x_grid
    # numeric cells parse as floats
    float(rows[1][rows[0].index("empirical")])


def test_asymptotic_csv(tmp_path):
    out = tmp_path / "out.csv"
    res = run_cli(tmp_path, make_doc("asymptotic", output_path=str(out)))
    assert res.returncode == 0, res.stderr
    rows = read_csv(out)
    i = rows[0].index("asymptotic_total")
    vals = [float(r[i]) for r in rows[1:]]
    assert all(v > 0 for v in vals)


def test_compare_fills_both_sides(tmp_path):
    out = tmp_path / "out.csv"
    res = run_cli(tmp_path, make_doc("compare", output_path=str(out)))
    assert res.returncode == 0, res.stderr
    rows = read_csv(out)
    hdr = rows[0]
    for r in rows[1:]:
        assert float(r[hdr.index("asymptotic_total")]) > 0
        assert r[hdr.index("empirical")] != ""
        assert r[hdr.index("ratio")] != ""


def test_compare_thread_invariance(tmp_path):
    out1, out4 = tmp_path / "a.csv", tmp_path / "b.csv"
    doc = make_doc("compare")
    doc["output_path"] = str(out1)
    assert run_cli(tmp_path, doc).returncode == 0
    doc["output_path"] = str(out4)
    assert run_cli(tmp_path, doc, "--threads", "4").returncode == 0
    assert out1.read_bytes() == out4.read_bytes()


def test_seed_flag_overrides(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    doc = make_doc("simulate")
    doc["output_path"] = str(out1)
    assert run_cli(tmp_path, doc, "--seed", "99").returncode == 0
    doc["output_path"] = str(out2)
    assert run_cli(tmp_path, doc, "--seed", "100").returncode == 0
    assert out1.read_bytes() != out2.read_bytes()


def test_out_flag_overrides_config(tmp_path):
    target = tmp_path / "flag.csv"
    doc = make_doc("renewal", output_path=str(tmp_path / "ignored.csv"))
    res = run_cli(tmp_path, doc, "--out", str(target))
    assert res.returncode == 0, res.stderr
    assert target.exists()
    assert not (tmp_path / "ignored.csv").exists()


def test_renewal_poisson_output(tmp_path):
    out = tmp_path / "out.csv"
    res = run_cli(tmp_path, make_doc("renewal", output_path=str(out)))
    assert res.returncode == 0, res.stderr
    rows = read_csv(out)
    hdr = rows[0]
    last = rows[-1]
    t = float(last[hdr.index("t")])
    lam = float(last[hdr.index("lambda")])
    assert lam == pytest.approx(t, abs=5e-3)


def test_copula_check_runs(tmp_path):
    out = tmp_path / "out.csv"
    doc = make_doc("copula-check", output_path=str(out), n_boxes=2000)
    res = run_cli(tmp_path, doc)
    assert res.returncode == 0, res.stderr
    rows = read_csv(out)
    assert len(rows) >= 2


def test_counterexample_runs(tmp_path):
    out = tmp_path / "out.csv"
    doc = make_doc("counterexample", output_path=str(out), counterexample_n_max=6)
    res = run_cli(tmp_path, doc)
    assert res.returncode == 0, res.stderr
    rows = read_csv(out)
    assert len(rows) >= 2


def test_verify_conditions_runs(tmp_path):
    out = tmp_path / "out.csv"
    doc = make_doc("verify-conditions", output_path=str(out))
    doc["grids"]["x_grid"] = [10.0, 100.0]
    res = run_cli(tmp_path, doc)
    assert res.returncode == 0, res.stderr
    assert len(read_csv(out)) >= 2


def test_lemma33_runs(tmp_path):
    out = tmp_path / "out.csv"
    doc = make_doc("lemma33", output_path=str(out), n=1, n_paths=20000)
    doc["grids"]["x_grid"] = [2.0]
    doc["grids"]["t_grid"] = [1.0]
    res = run_cli(tmp_path, doc)
    assert res.returncode == 0, res.stderr
    rows = read_csv(out)
    hdr, row = rows[0], rows[1]
    assert float(row[hdr.index("ratio")]) == 1.0  # n=1 is an identity


def test_positional_experiment_overrides(tmp_path):
    out = tmp_path / "out.csv"
    doc = make_doc("simulate", output_path=str(out))
    res = run_cli(tmp_path, doc)  # keep config experiment
    assert res.returncode == 0
    rows = read_csv(out)
    assert rows[1][rows[0].index("asymptotic_total")] == ""  # simulate leaves it blank
