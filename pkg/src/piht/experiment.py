"""Configuration-driven experiment runner.

A config is a YAML document with three sections::

    problem:             # what to minimize
      class: least_squares        # least_squares | logistic | ggm | quadratic
      n: 20                       # synthetic generators take dimensions + seed
      N: 100
      k_true: 3
      noise_std: 0.0
      seed: 0
      # path: data.csv            # or load a matrix file instead
    solver:              # SolverConfig fields; K is overridden by the sweep
      K: 3
      mode: full-batch
      accuracy: {eps_f: 0.1, kappa_g: 1.0}
    experiment:
      sweep: [2, 4]               # K values; defaults to [solver.K]
      runs_per_setting: 10
      start: origin               # origin | random
      output_dir: results

Each (K, run) cell gets its own seed
``solver.seed * 10**6 + K * 10**3 + run_index`` so cells never share a
random stream, and dropping a K from the sweep leaves the other cells'
outputs unchanged. Seeds are collision-free while ``K`` and
``runs_per_setting`` stay below 1000. Output files are written per cell;
the summary is assembled afterwards in cell order.
"""
import csv
import dataclasses
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import yaml

from .errors import ConfigError, InvalidInputError, PihtError
from .oracles import AccuracyParams
from .problems import (
    GgmProblem,
    LeastSquaresProblem,
    LogisticProblem,
    QuadraticObjective,
    generate_ggm,
    generate_sparse_logistic,
    generate_sparse_ls,
    load_matrix_file,
)
from .solver import IterationRecord, SolverConfig, final_diagnostics, piht_run

PROBLEM_CLASSES = ("least_squares", "logistic", "ggm", "quadratic")
START_CHOICES = ("origin", "random")

TRACE_COLUMNS = [
    "k", "delta", "accepted", "rho", "restricted_grad_norm", "f0_estimate", "fs_estimate",
    "grad_batch", "value_batch", "step_norm", "descent_gap", "support",
]
SUMMARY_COLUMNS = [
    "K", "run", "seed", "status", "stop_reason", "iterations", "accepted_iterations",
    "final_objective", "restricted_grad_norm", "minimal_stationary_L", "delta_square_sum",
]
FLOAT_FORMAT = "{:.12e}"

SOLVER_DEFAULTS = {f.name: f.default for f in dataclasses.fields(SolverConfig)
                   if f.default is not dataclasses.MISSING}


@dataclass
class ExperimentConfig:
    problem: dict
    solver: dict
    sweep: List[int]
    runs_per_setting: int = 10
    start: str = "origin"
    output_dir: str = "results"
    base_dir: str = "."

    def cell_seed(self, K, run_index):
        return int(self.solver.get("seed", 0)) * 10**6 + K * 10**3 + run_index

    def solver_config(self, K, seed):
        opts = dict(self.solver)
        acc = AccuracyParams(**opts.pop("accuracy", {}))
        opts.update(K=K, seed=seed, accuracy=acc)
        return SolverConfig(**opts)

    def resolve(self, path):
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)


@dataclass
class ValidationReport:
    violations: List[str] = field(default_factory=list)
    notices: List[str] = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


# -- parsing -----------------------------------------------------------------

def _number(value, where):
    # YAML 1.1 reads "1e-4" as a string
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{where}: expected a number, got {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return value


def _coerce_numbers(d, where, skip=("class", "path", "mode", "start", "output_dir", "center")):
    out = {}
    for key, value in d.items():
        if key in skip or isinstance(value, (list, dict)) or value is None:
            out[key] = value
        else:
            out[key] = _number(value, f"{where}.{key}")
    return out


def load_config(path):
    """Parse a YAML experiment config. Raises :class:`ConfigError` with the location of the problem."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML parse error: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    unknown = set(raw) - {"problem", "solver", "experiment"}
    if unknown:
        raise ConfigError(f"{path}: unknown section(s) {sorted(unknown)}")
    for section in ("problem", "solver"):
        if not isinstance(raw.get(section), dict):
            raise ConfigError(f"{path}: missing or malformed section '{section}'")
    exp = raw.get("experiment") or {}
    if not isinstance(exp, dict):
        raise ConfigError(f"{path}: section 'experiment' must be a mapping")

    problem = _coerce_numbers(raw["problem"], "problem")
    solver = _coerce_numbers(raw["solver"], "solver")
    unknown = set(solver) - set(SOLVER_DEFAULTS) - {"K", "accuracy"}
    if unknown:
        raise ConfigError(f"{path}: solver: unknown key(s) {sorted(unknown)}")
    if "accuracy" in solver:
        if not isinstance(solver["accuracy"], dict):
            raise ConfigError(f"{path}: solver.accuracy must be a mapping")
        acc_fields = {f.name for f in dataclasses.fields(AccuracyParams)}
        unknown = set(solver["accuracy"]) - acc_fields
        if unknown:
            raise ConfigError(f"{path}: solver.accuracy: unknown key(s) {sorted(unknown)}")
        solver["accuracy"] = _coerce_numbers(solver["accuracy"], "solver.accuracy")
    for key in ("K", "max_iterations", "seed"):
        if key in solver and float(solver[key]).is_integer():
            solver[key] = int(solver[key])
    for key in ("pilot_size", "min_batch"):
        acc = solver.get("accuracy", {})
        if key in acc and float(acc[key]).is_integer():
            acc[key] = int(acc[key])

    sweep = exp.get("sweep", [solver.get("K")])
    if not isinstance(sweep, list) or not sweep:
        raise ConfigError(f"{path}: experiment.sweep must be a non-empty list")
    try:
        sweep = [int(_number(k, "experiment.sweep")) for k in sweep]
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: experiment.sweep must list integers") from None
    runs = exp.get("runs_per_setting", 10)
    if isinstance(runs, bool) or not isinstance(runs, int):
        raise ConfigError(f"{path}: experiment.runs_per_setting must be an integer")
    return ExperimentConfig(
        problem=problem,
        solver=solver,
        sweep=sweep,
        runs_per_setting=runs,
        start=exp.get("start", "origin"),
        output_dir=str(exp.get("output_dir", "results")),
        base_dir=os.path.dirname(os.path.abspath(path)),
    )


# -- problems ----------------------------------------------------------------

def _budget_dim(cfg):
    """Number of budgeted coordinates, computed without generating data."""
    p = cfg.problem
    cls = p.get("class")
    if "path" in p:
        values = load_matrix_file(cfg.resolve(p["path"])).values
        if cls == "ggm":
            c = values.shape[1]
            return c * (c - 1) // 2
        return values.shape[1] - 1
    if cls in ("least_squares", "logistic"):
        return int(p["n"])
    if cls == "ggm":
        return int(p["p"]) * (int(p["p"]) - 1) // 2
    if cls == "quadratic":
        return len(p["center"])
    raise ConfigError(f"unknown problem class {cls!r}")


def build_problem(cfg):
    """Instantiate the objective described by ``cfg.problem``."""
    p = cfg.problem
    cls = p.get("class")
    seed = int(p.get("seed", 0))
    if "path" in p:
        values = load_matrix_file(cfg.resolve(p["path"])).values
        if cls == "ggm":
            return GgmProblem.from_samples(values, lam2=p.get("lam2", 0.0),
                                           standardize=bool(p.get("standardize", True)))
        target = int(p.get("target_column", values.shape[1]))
        cols = [c for c in range(values.shape[1]) if c != target - 1]
        A, b = values[:, cols], values[:, target - 1]
        if cls == "least_squares":
            return LeastSquaresProblem(A, b)
        if cls == "logistic":
            return LogisticProblem(A, b)
        raise ConfigError(f"problem class {cls!r} cannot be loaded from a file")
    if cls == "least_squares":
        prob, _ = generate_sparse_ls(int(p["n"]), int(p["N"]), int(p.get("k_true", 1)),
                                     float(p.get("noise_std", 0.0)), seed)
        return prob
    if cls == "logistic":
        prob, _ = generate_sparse_logistic(int(p["n"]), int(p["N"]), int(p.get("k_true", 1)), seed)
        return prob
    if cls == "ggm":
        prob, _ = generate_ggm(int(p["p"]), int(p["N"]), int(p["n_edges"]), seed=seed,
                               margin=float(p.get("margin", 0.05)),
                               n_blocks=int(p.get("n_blocks", 1)))
        if p.get("lam2"):
            prob = GgmProblem(prob.X_tilde, lam2=float(p["lam2"]))
        return prob
    if cls == "quadratic":
        return QuadraticObjective(p["center"])
    raise ConfigError(f"unknown problem class {cls!r}")


def starting_point(obj, K, start, seed):
    """``origin`` is zero (identity diagonal for GGM); ``random`` draws a random feasible point."""
    rng = np.random.default_rng(seed)
    if isinstance(obj, GgmProblem):
        return obj.identity_params() if start == "origin" else obj.random_feasible_point(K, rng)
    x = np.zeros(obj.dim)
    if start == "random":
        pos = rng.choice(obj.dim, size=K, replace=False)
        x[pos] = rng.standard_normal(K)
    return x


# -- validation --------------------------------------------------------------

def validate_config(path):
    """Check a config without running anything.

    Returns a :class:`ValidationReport`: ``violations`` make the config
    unusable, ``notices`` flag theory couplings that the parameters do not
    satisfy. Parse errors raise :class:`ConfigError`.
    """
    cfg = load_config(path)
    report = ValidationReport()
    p = cfg.problem
    cls = p.get("class")
    if cls not in PROBLEM_CLASSES:
        report.violations.append(f"problem.class must be one of {PROBLEM_CLASSES}, got {cls!r}")
    if "path" in p and not os.path.isfile(cfg.resolve(p["path"])):
        report.violations.append(f"problem.path: file not found: {p['path']}")
    if cfg.start not in START_CHOICES:
        report.violations.append(f"experiment.start must be one of {START_CHOICES}, got {cfg.start!r}")
    if cfg.runs_per_setting < 1:
        report.violations.append("experiment.runs_per_setting must be >= 1")

    n = None
    if not report.violations:
        try:
            n = _budget_dim(cfg)
        except (KeyError, PihtError) as exc:
            report.violations.append(f"problem: {exc}")
    for K in cfg.sweep:
        if K < 1 or (n is not None and K > n):
            report.violations.append(f"sweep value K={K} outside [1, {n}]")
    if len(set(cfg.sweep)) != len(cfg.sweep):
        report.violations.append("experiment.sweep contains duplicate K values")
    if max(cfg.sweep) >= 1000 or cfg.runs_per_setting > 1000:
        report.notices.append("K >= 1000 or more than 1000 runs: per-cell seeds may collide")

    try:
        acc = AccuracyParams(**cfg.solver.get("accuracy", {}))
    except (InvalidInputError, TypeError) as exc:
        report.violations.append(f"solver.accuracy: {exc}")
        acc = AccuracyParams()
    opts = {**SOLVER_DEFAULTS, **cfg.solver, "accuracy": acc, "K": max(1, min(cfg.sweep))}
    probe = object.__new__(SolverConfig)
    for key, value in opts.items():
        object.__setattr__(probe, key, value)
    report.violations.extend(f"solver: {v}" for v in probe.violations() if not v.startswith("K "))
    if not report.violations:
        for K in sorted(set(cfg.sweep)):
            object.__setattr__(probe, "K", K)
            for notice in probe.theory_notices():
                if notice not in report.notices:
                    report.notices.append(notice)
    return report


# -- traces ------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def emit_trace(result, path):
    """Write one CSV row per iteration; support indices are 1-based and space-separated."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for r in result.trace:
            row = [_fmt(getattr(r, c)) for c in TRACE_COLUMNS[:-1]]
            row.append(" ".join(str(int(i) + 1) for i in r.support))
            writer.writerow(row)


def load_trace(path):
    """Read a trace file back into :class:`IterationRecord` objects."""
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRACE_COLUMNS:
            raise InvalidInputError(f"{path}: unexpected trace header {reader.fieldnames}")
        for row in reader:
            records.append(IterationRecord(
                k=int(row["k"]),
                delta=float(row["delta"]),
                accepted=row["accepted"] == "1",
                rho=float(row["rho"]),
                restricted_grad_norm=float(row["restricted_grad_norm"]),
                f0_estimate=float(row["f0_estimate"]),
                fs_estimate=float(row["fs_estimate"]),
                grad_batch=int(row["grad_batch"]),
                value_batch=int(row["value_batch"]),
                step_norm=float(row["step_norm"]),
                descent_gap=float(row["descent_gap"]),
                support=np.array([int(i) - 1 for i in row["support"].split()], dtype=np.intp),
            ))
    return records


def summarize_trace(path):
    """Summary statistics recomputed from a trace file alone."""
    records = load_trace(path)
    last = records[-1] if records else None
    return {
        "iterations": len(records),
        "accepted_iterations": sum(r.accepted for r in records),
        "delta_square_sum": float(sum(r.delta * r.delta for r in records)),
        "final_delta": last.delta if last else None,
        "final_restricted_grad_norm": last.restricted_grad_norm if last else None,
        "final_f0_estimate": last.f0_estimate if last else None,
        "max_descent_gap": max((r.descent_gap for r in records), default=None),
        "total_grad_samples": sum(r.grad_batch for r in records),
        "total_value_samples": sum(r.value_batch for r in records),
    }


# -- running -----------------------------------------------------------------

def _cell_name(K, run):
    return f"K{K}_run{run}"


def run_cell(cfg, sweep_index, run_index, out_dir):
    """Run one (K, run) cell, write its trace and stationarity report, return its summary row."""
    K = cfg.sweep[sweep_index]
    seed = cfg.cell_seed(K, run_index)
    name = _cell_name(K, run_index)
    row = {"K": K, "run": run_index, "seed": seed}
    t0 = time.perf_counter()
    try:
        obj = build_problem(cfg)
        scfg = cfg.solver_config(K, seed)
        x0 = starting_point(obj, K, cfg.start, seed)
        result = piht_run(obj, x0, scfg)
        diag = final_diagnostics(obj, result, scfg)
    except PihtError as exc:
        row.update(status=f"aborted: {exc}")
        return row, time.perf_counter() - t0
    emit_trace(result, os.path.join(out_dir, "traces", f"trace_{name}.csv"))
    with open(os.path.join(out_dir, "stationarity", f"stationarity_{name}.json"), "w") as fh:
        doc = diag["report"].to_dict()
        doc.update(K=K, run=run_index, restricted_grad_norm=diag["restricted_grad_norm"],
                   free_grad_norm=diag["free_grad_norm"], objective=diag["objective"])
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    row.update(
        status="ok",
        stop_reason=result.stop_reason,
        iterations=len(result.trace),
        accepted_iterations=result.accepted_count,
        final_objective=diag["objective"],
        restricted_grad_norm=diag["restricted_grad_norm"],
        minimal_stationary_L=diag["minimal_L"],
        delta_square_sum=result.delta_square_sum,
    )
    return row, time.perf_counter() - t0


def _run_cell_star(args):
    return run_cell(*args)


def _format_row(row):
    out = {}
    for col in SUMMARY_COLUMNS:
        v = row.get(col, "")
        if isinstance(v, float):
            v = "inf" if math.isinf(v) else FLOAT_FORMAT.format(v)
        out[col] = v
    return out


def run_experiment(path, output_dir=None, jobs=1, quiet=True):
    """Execute every (K, run) cell of a config and write all outputs.

    Writes ``traces/``, ``stationarity/``, ``summary.csv``, ``summary.json``
    and ``timings.csv`` under the output directory. Wall times live only in
    ``timings.csv`` so the summary files are byte-identical across reruns.

    Returns
    -------
    list of dict
        Summary rows in cell order.

    Raises
    ------
    ConfigError
        If the config does not parse or validate.
    """
    report = validate_config(path)
    if not report.ok:
        raise ConfigError("; ".join(report.violations))
    cfg = load_config(path)
    out_dir = output_dir or cfg.resolve(cfg.output_dir)
    os.makedirs(os.path.join(out_dir, "traces"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "stationarity"), exist_ok=True)

    cells = [(cfg, si, r, out_dir) for si in range(len(cfg.sweep)) for r in range(cfg.runs_per_setting)]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell_star, cells))
    else:
        results = []
        for cell in cells:
            results.append(run_cell(*cell))
            if not quiet:
                row = results[-1][0]
                print(f"K={row['K']} run={row['run']}: {row['status']}", flush=True)

    rows = [r for r, _ in results]
    with open(os.path.join(out_dir, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(_format_row(row))
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump({"config": os.path.basename(path), "rows": [_format_row(r) for r in rows],
                   "notices": report.notices}, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(out_dir, "timings.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["K", "run", "wall_time_s"])
        for row, wall in results:
            writer.writerow([row["K"], row["run"], f"{wall:.6f}"])
    return rows
