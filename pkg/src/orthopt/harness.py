"""Experiment harness: config files, solver grids, tables, traces, profiles."""

import configparser
import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .manifolds import riemannian_gradient
from .penalty import PenaltyFunction, postprocess
from .problems import PROBLEM_BUILDERS
from .solvers import ALL_PHASES, SOLVERS, SolverConfig, run_solver

SOLVER_ORDER = ["cdf-gd", "cdf-cg", "cdf-lbfgs", "cdf-tr", "rgd", "rcg"]
TRACE_HEADER = ["iter", "value", "grad_norm", "feas"] + [f"t_{p}" for p in ALL_PHASES]


class ConfigError(ValueError):
    """Unusable experiment configuration."""


@dataclass
class ExperimentRecord:
    problem: str
    size: str
    solver: str
    tol: float
    fval: float
    iters: int
    grad: float
    feas: float
    cpu: float
    status: str
    seed: int
    beta: float
    pre_feas: float
    x0_seed: int = 0


@dataclass
class ExperimentConfig:
    problem: dict
    solvers: list
    tols: list
    beta: float = None
    max_iter: int = 100000
    time_limit: float = 1800.0
    eps_f: float = 1e-12
    x0_seed: int = 7
    out: str = None
    repetitions: int = 1

    def validate(self):
        if "id" not in self.problem or self.problem["id"] not in PROBLEM_BUILDERS:
            raise ConfigError(f"problem id must be one of {sorted(PROBLEM_BUILDERS)}")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ConfigError(f"unknown solver {s!r}; choose from {sorted(SOLVERS)}")
        if not self.tols:
            raise ConfigError("at least one gradient tolerance is required")
        return self


def _coerce(value):
    value = value.strip()
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def load_config(path):
    """Read a key/value block file into an ExperimentConfig."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    if "problem" not in parser:
        raise ConfigError("config needs a [problem] block")
    problem = {k: _coerce(v) for k, v in parser["problem"].items()}
    run_sec = parser["run"] if "run" in parser else {}
    kwargs = {}
    if "solvers" in run_sec:
        kwargs["solvers"] = [s.strip() for s in run_sec["solvers"].split(",") if s.strip()]
    else:
        kwargs["solvers"] = list(SOLVER_ORDER)
    if "tols" in run_sec:
        kwargs["tols"] = [float(t) for t in run_sec["tols"].split(",") if t.strip()]
    else:
        kwargs["tols"] = [1e-5, 1e-9]
    for key in ("beta", "max_iter", "time_limit", "eps_f", "x0_seed", "out", "repetitions"):
        if key in run_sec:
            kwargs[key] = _coerce(run_sec[key])
    return ExperimentConfig(problem=problem, **kwargs).validate()


def _problem_size(problem):
    meta = problem.metadata
    if problem.name == "tensor-jfd":
        return f"({meta['n']},{meta['p']},{meta['l']})"
    return f"({meta['n']},{meta['p']})"


def _run_cell(pf, x0, x0_seed, solver_id, tol, config, eps_f):
    cfg = SolverConfig(grad_tol=tol, max_iter=config.max_iter, time_limit=config.time_limit)
    report = run_solver(solver_id, pf, x0, cfg)
    kind = SOLVERS[solver_id][0]
    if kind == "cdf":
        point, _ = postprocess(pf.spec, report.X, eps_f=eps_f)
        fval = float(pf.problem.f(point.X))
        grad = float(np.linalg.norm(
            riemannian_gradient(pf.spec, point, pf.problem.grad(point.X))))
        feas = point.feas
    else:
        fval = report.fval
        grad = report.grad_norm
        feas = report.feas_norm
    rec = ExperimentRecord(
        problem=pf.problem.name, size=_problem_size(pf.problem), solver=solver_id,
        tol=tol, fval=fval, iters=report.iters, grad=grad, feas=feas,
        cpu=report.total_time, status=report.status,
        seed=int(pf.problem.metadata.get("seed", 0)), beta=pf.beta,
        pre_feas=report.feas_norm, x0_seed=x0_seed)
    return rec, report


def _write_trace(path, report):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for row in report.trace:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def run(config):
    """Execute the solver x tolerance grid of a config; returns sorted records."""
    config.validate()
    problem = PROBLEM_BUILDERS[config.problem["id"]](config.problem)
    beta = config.beta if config.beta is not None else problem.metadata.get("beta_default", 1.0)
    pf = PenaltyFunction(problem.spec, problem, beta)
    starts = {config.x0_seed + r: problem.spec.random_feasible(config.x0_seed + r)
              for r in range(max(1, config.repetitions))}
    cells = [(s, t, xs) for s in config.solvers for t in config.tols for xs in starts]
    workers = int(os.environ.get("ORTHOPT_THREADS", "1"))
    results = {}
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {cell: pool.submit(_run_cell, pf, starts[cell[2]], cell[2],
                                      cell[0], cell[1], config, config.eps_f)
                    for cell in cells}
            for cell, fut in futs.items():
                results[cell] = fut.result()
    else:
        for cell in cells:
            results[cell] = _run_cell(pf, starts[cell[2]], cell[2],
                                      cell[0], cell[1], config, config.eps_f)
    order = {s: i for i, s in enumerate(SOLVER_ORDER)}
    records = []
    for cell in sorted(results, key=lambda c: (order.get(c[0], 99), c[1], c[2])):
        rec, report = results[cell]
        records.append(rec)
        if config.out:
            os.makedirs(config.out, exist_ok=True)
            name = f"trace_{rec.problem}_{rec.solver}_{rec.tol:g}_x{rec.x0_seed}.csv"
            _write_trace(os.path.join(config.out, name), report)
    if config.out:
        emit_table(records, "csv", os.path.join(config.out, "records.csv"))
        emit_table(records, "text", os.path.join(config.out, "records.txt"))
    return records


def emit_table(records, fmt="text", path=None):
    """Render records as CSV (long form, exact floats) or an aligned table."""
    if not records:
        raise ValueError("no records to emit")
    if fmt == "csv":
        buf = io.StringIO()
        names = [f.name for f in fields(ExperimentRecord)]
        writer = csv.writer(buf)
        writer.writerow(names)
        for rec in records:
            writer.writerow([repr(getattr(rec, n)) if isinstance(getattr(rec, n), float)
                             else getattr(rec, n) for n in names])
        text = buf.getvalue()
    elif fmt == "text":
        text = _text_table(records)
    else:
        raise ValueError(f"unknown table format {fmt!r}")
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _text_table(records):
    tols = sorted({r.tol for r in records}, reverse=True)
    multi_start = len({r.x0_seed for r in records}) > 1

    def label(rec):
        return f"{rec.solver}#x{rec.x0_seed}" if multi_start else rec.solver

    keys = []
    for r in records:
        key = (r.problem, r.size, label(r), r.x0_seed)
        if key not in keys:
            keys.append(key)
    header = ["size", "solver"]
    for tol in tols:
        tag = f"tol={tol:g}"
        header += [f"Fval[{tag}]", f"Iter[{tag}]", f"Grad[{tag}]", f"Feas[{tag}]", f"CPU[{tag}]"]
    rows = [header]
    by_cell = {(r.problem, r.size, label(r), r.x0_seed, r.tol): r for r in records}
    for problem, size, solver, x0_seed in keys:
        row = [size, solver]
        for tol in tols:
            rec = by_cell.get((problem, size, solver, x0_seed, tol))
            if rec is None:
                row += ["-"] * 5
            else:
                row += [f"{rec.fval:.2e}", str(rec.iters), f"{rec.grad:.2e}",
                        f"{rec.feas:.2e}", f"{rec.cpu:.2f}"]
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in rows]
    return "\n".join(lines) + "\n"


@dataclass
class TimingBreakdown:
    solver: str
    total: float
    seconds: dict
    percent: dict

    def validate(self):
        s = sum(self.percent.values())
        if abs(s - 100.0) > 0.1:
            raise ValueError(f"percentages sum to {s:.3f}")
        return self


def timing_profile(config, iters=100):
    """Run every solver for a fixed iteration budget and split its wall time."""
    config.validate()
    problem = PROBLEM_BUILDERS[config.problem["id"]](config.problem)
    beta = config.beta if config.beta is not None else problem.metadata.get("beta_default", 1.0)
    pf = PenaltyFunction(problem.spec, problem, beta)
    x0 = problem.spec.random_feasible(config.x0_seed)
    out = {}
    for solver_id in config.solvers:
        cfg = SolverConfig(grad_tol=0.0, max_iter=iters, time_limit=config.time_limit)
        report = run_solver(solver_id, pf, x0, cfg)
        ps = report.phase_seconds
        seconds = {
            "gradient": ps["gradient"] + ps["hessvec"],
            "retraction": ps["retraction"],
            "transport": ps["transport"],
            "objective": ps["objective"],
        }
        seconds["other"] = max(report.total_time - sum(seconds.values()), 0.0)
        total = sum(seconds.values())
        percent = {k: 100.0 * v / total for k, v in seconds.items()}
        out[solver_id] = TimingBreakdown(
            solver=solver_id, total=report.total_time,
            seconds=seconds, percent=percent).validate()
    return out
