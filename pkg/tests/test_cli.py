"""Config validation, experiment runs, trace files and the command-line verbs."""
import csv
import json
import textwrap
from pathlib import Path

import numpy as np
import pytest

from piht import experiment
from piht.cli import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main
from piht.errors import ConfigError, SolverAbort
from piht.experiment import (
    TRACE_COLUMNS,
    emit_trace,
    load_config,
    load_trace,
    run_experiment,
    summarize_trace,
    validate_config,
)
from piht.problems import QuadraticObjective, generate_sparse_ls, write_matrix_file
from piht.solver import FULL_BATCH, SolverConfig, SolverResult, piht_run

DEFAULT_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "default.yaml"

BASE = """
problem:
  class: least_squares
  n: 10
  N: 60
  k_true: 2
  noise_std: 0.05
  seed: 3
solver:
  K: 2
  eta1: 1e-4
  eta2: 1e-4
  gamma: 2.0
  delta0: 1.0
  delta_max: 10.0
  max_iterations: 60
  seed: 1
experiment:
  sweep: [2, 4]
  runs_per_setting: 3
  start: origin
  output_dir: out
"""


def write_config(tmp_path, text=BASE, name="cfg.yaml", **replace):
    for old, new in replace.items():
        text = text.replace(old, new)
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


# -- validation ----------------------------------------------------------------

def test_default_config_validates_clean():
    report = validate_config(DEFAULT_CONFIG)
    assert report.violations == []
    assert any("eta2" in n for n in report.notices)


def test_yaml_exponent_strings_are_numbers(tmp_path):
    cfg = load_config(write_config(tmp_path))
    assert cfg.solver["eta1"] == 1e-4 and cfg.sweep == [2, 4]
    assert cfg.solver_config(4, 7).K == 4


@pytest.mark.parametrize("old, new, needle", [
    ("gamma: 2.0", "gamma: 0.5", "gamma must be > 1"),
    ("delta0: 1.0", "delta0: 20.0", "exceeds delta_max"),
    ("sweep: [2, 4]", "sweep: [2, 11]", "K=11 outside [1, 10]"),
    ("sweep: [2, 4]", "sweep: [2, 2]", "duplicate"),
    ("class: least_squares", "class: svm", "problem.class"),
    ("start: origin", "start: warm", "experiment.start"),
    ("runs_per_setting: 3", "runs_per_setting: 0", "runs_per_setting"),
])
def test_validation_errors(tmp_path, capsys, old, new, needle):
    path = write_config(tmp_path, **{old: new})
    report = validate_config(path)
    assert any(needle in v for v in report.violations), report.violations
    assert main(["validate", str(path)]) == EXIT_INVALID
    assert needle in capsys.readouterr().out


def test_validation_reports_missing_file(tmp_path):
    path = write_config(tmp_path, **{"  n: 10\n": "  path: nowhere.csv\n"})
    assert any("file not found" in v for v in validate_config(path).violations)


@pytest.mark.parametrize("text", [
    "problem: [unclosed",
    "problem: {class: quadratic}\n",
    "problem: {class: quadratic}\nsolver: {K: 1, bogus: 2}\n",
    "problem: {class: quadratic}\nsolver: {K: 1, eta1: abc}\n",
    "problem: {class: quadratic}\nsolver: {K: 1}\nextra: {}\n",
])
def test_parse_errors(tmp_path, capsys, text):
    path = write_config(tmp_path, text)
    with pytest.raises(ConfigError):
        validate_config(path)
    assert main(["validate", str(path)]) == EXIT_INVALID
    assert "error:" in capsys.readouterr().err


def test_run_refuses_invalid_config_before_any_cell(tmp_path):
    path = write_config(tmp_path, **{"sweep: [2, 4]": "sweep: [2, 40]"})
    assert main(["--quiet", "run", str(path)]) == EXIT_INVALID
    assert not (tmp_path / "out").exists()
    with pytest.raises(ConfigError):
        run_experiment(path)


# -- running -------------------------------------------------------------------

def test_run_writes_all_cells(tmp_path):
    path = write_config(tmp_path)
    assert main(["--quiet", "run", str(path)]) == EXIT_OK
    out = tmp_path / "out"
    traces = sorted(p.name for p in (out / "traces").iterdir())
    assert len(traces) == 6 and "trace_K4_run2.csv" in traces
    assert len(list((out / "stationarity").iterdir())) == 6
    with open(out / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [(int(r["K"]), int(r["run"])) for r in rows] == [(K, r) for K in (2, 4) for r in range(3)]
    assert [int(r["seed"]) for r in rows[:2]] == [1 * 10**6 + 2 * 10**3, 1 * 10**6 + 2 * 10**3 + 1]
    assert all(r["status"] == "ok" for r in rows)
    doc = json.loads((out / "summary.json").read_text())
    assert len(doc["rows"]) == 6
    assert "wall" not in (out / "summary.csv").read_text()
    assert (out / "timings.csv").read_text().count("\n") == 7
    rep = json.loads((out / "stationarity" / "stationarity_K2_run0.json").read_text())
    assert rep["K"] == 2 and all(i >= 1 for i in rep["active_set"] + rep["inactive_set"])


def test_summary_derived_fields_match_trace(tmp_path):
    path = write_config(tmp_path)
    rows = run_experiment(path, quiet=True)
    stats = summarize_trace(tmp_path / "out" / "traces" / "trace_K4_run1.csv")
    row = rows[4]
    assert stats["iterations"] == row["iterations"]
    assert stats["accepted_iterations"] == row["accepted_iterations"]
    assert stats["delta_square_sum"] == pytest.approx(row["delta_square_sum"], abs=1e-9)


def _snapshot(out):
    return {p.relative_to(out).as_posix(): p.read_bytes()
            for p in sorted(out.rglob("*")) if p.is_file() and p.name != "timings.csv"}


def test_rerun_and_parallel_run_are_byte_identical(tmp_path):
    path = write_config(tmp_path)
    run_experiment(path, output_dir=str(tmp_path / "a"))
    run_experiment(path, output_dir=str(tmp_path / "b"))
    run_experiment(path, output_dir=str(tmp_path / "c"), jobs=2)
    a = _snapshot(tmp_path / "a")
    assert a == _snapshot(tmp_path / "b") == _snapshot(tmp_path / "c")


def test_dropping_a_sweep_value_leaves_other_cells_unchanged(tmp_path):
    full = write_config(tmp_path)
    part = write_config(tmp_path, name="part.yaml", **{"sweep: [2, 4]": "sweep: [4]"})
    run_experiment(full, output_dir=str(tmp_path / "full"))
    run_experiment(part, output_dir=str(tmp_path / "part"))
    for r in range(3):
        for sub, stem in (("traces", "trace"), ("stationarity", "stationarity")):
            ext = "csv" if sub == "traces" else "json"
            name = f"{sub}/{stem}_K4_run{r}.{ext}"
            assert (tmp_path / "full" / name).read_bytes() == (tmp_path / "part" / name).read_bytes()


def test_aborted_cell_is_recorded_and_others_proceed(tmp_path, monkeypatch):
    real = experiment.piht_run

    def flaky(obj, x0, cfg, callback=None):
        if cfg.K == 4 and cfg.seed % 1000 == 1:
            raise SolverAbort("non-finite gradient estimate")
        return real(obj, x0, cfg, callback)

    monkeypatch.setattr(experiment, "piht_run", flaky)
    rows = run_experiment(write_config(tmp_path))
    status = [r["status"] for r in rows]
    assert status.count("ok") == 5 and status[4].startswith("aborted")
    assert not (tmp_path / "out" / "traces" / "trace_K4_run1.csv").exists()


def test_runtime_failure_exit_code(tmp_path):
    path = write_config(tmp_path)
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["--quiet", "run", str(path), "--output-dir", str(blocker)]) == EXIT_RUNTIME


def test_problem_loaded_from_file(tmp_path):
    prob, _ = generate_sparse_ls(5, 30, 2, noise_std=0.0, seed=0)
    write_matrix_file(tmp_path / "data.csv", np.column_stack([prob.A, prob.b]),
                      column_names=[f"a{i}" for i in range(5)] + ["b"])
    text = """
    problem:
      class: least_squares
      path: data.csv
    solver:
      K: 2
      mode: full-batch
      max_iterations: 500
    experiment:
      runs_per_setting: 1
    """
    path = write_config(tmp_path, text)
    assert validate_config(path).ok
    rows = run_experiment(path, output_dir=str(tmp_path / "o"))
    assert len(rows) == 1 and rows[0]["final_objective"] < 1e-10


def test_ggm_and_quadratic_configs_run(tmp_path):
    text = """
    problem:
      class: ggm
      p: 6
      N: 30
      n_edges: 5
      seed: 1
    solver:
      K: 3
      max_iterations: 30
    experiment:
      sweep: [3, 6]
      runs_per_setting: 1
      start: random
    """
    rows = run_experiment(write_config(tmp_path, text), output_dir=str(tmp_path / "g"))
    assert [r["status"] for r in rows] == ["ok", "ok"]
    quad = "problem: {class: quadratic, center: [3, 1, 1]}\nsolver: {K: 2, mode: full-batch}\n"
    rows = run_experiment(write_config(tmp_path, quad, name="q.yaml"), output_dir=str(tmp_path / "q"))
    assert rows[0]["stop_reason"] == "stationarity-reached"
    assert rows[0]["final_objective"] == pytest.approx(0.5)


# -- traces --------------------------------------------------------------------

def test_empty_trace_is_header_only(tmp_path):
    res = SolverResult(final_point=np.zeros(2), trace=[], stop_reason="max-iterations",
                       delta_square_sum=0.0, final_delta=1.0)
    emit_trace(res, tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text() == ",".join(TRACE_COLUMNS) + "\n"
    assert summarize_trace(tmp_path / "t.csv")["iterations"] == 0


def test_trace_round_trip(tmp_path):
    prob, _ = generate_sparse_ls(12, 200, 3, noise_std=0.1, seed=0)
    res = piht_run(prob, np.zeros(12), SolverConfig(K=3, max_iterations=2000, delta_stop=1e-300))
    emit_trace(res, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == len(res.trace) + 1
    back = load_trace(tmp_path / "t.csv")
    assert abs(sum(r.delta ** 2 for r in back) - res.delta_square_sum) <= 1e-9
    for a, b in zip(res.trace, back):
        assert a.delta == b.delta and a.accepted == b.accepted and np.array_equal(a.support, b.support)
    # support column is 1-based
    assert lines[1].split(",")[-1] == " ".join(str(i + 1) for i in res.trace[0].support)


def test_two_thousand_iteration_trace_has_2001_lines(tmp_path):
    # every step is rejected; a gamma close to 1 keeps delta above the floor
    cfg = SolverConfig(K=2, mode=FULL_BATCH, eta1=1e6, gamma=1.0001, max_iterations=2000,
                       delta_stop=1e-300)
    res = piht_run(QuadraticObjective([3.0, 1.0, 1.0]), np.zeros(3), cfg)
    emit_trace(res, tmp_path / "t.csv")
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 2001


def test_report_verb(tmp_path, capsys):
    run_experiment(write_config(tmp_path))
    assert main(["report", str(tmp_path / "out" / "traces" / "trace_K2_run0.csv")]) == EXIT_OK
    stats = json.loads(capsys.readouterr().out)
    assert stats["iterations"] > 0 and "delta_square_sum" in stats
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    assert main(["report", str(tmp_path / "bad.csv")]) == EXIT_INVALID
