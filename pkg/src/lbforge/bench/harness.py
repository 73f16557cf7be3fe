"""Experiment harness: run LB variants over instances and seeds, aggregate, write reports."""

from __future__ import annotations

import csv
import glob
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..lb.records import LbConfig
from ..lb.variants import ALGORITHMS, REQUIRED_MODELS, make_runner
from ..milp.bnb import solve_milp
from ..milp.model import Assignment, MilpInstance, SolverLimits, SolveStatus
from ..milp.mps import read_mps
from ..nn.checkpoint import load_model
from .generators import GeneratorSpec, generate
from .metrics import MetricSeries, primal_gap, primal_integral, shifted_geometric_mean

log = logging.getLogger(__name__)

INIT_MODES = ("first", "root")
ROW_COLUMNS = ("algorithm", "instance", "seed", "pi", "final_gap_pct", "iters", "best_obj", "opt_obj", "wall_s")
MODEL_KEYS = ("sr_model", "k_model", "pi_k", "pi_t")


@dataclass
class ExperimentConfig:
    """Everything a benchmark needs.

    ``dataset`` is either ``{"family", "count", "seed_start", ...size
    overrides}`` for generated instances or ``{"mps_dir": path}``.  Model
    entries are checkpoint paths.  ``root_nodes`` is the node budget used
    for ``init_solution_mode="root"``.  With ``policy_mode="sample"`` the
    learned policies sample actions from a generator seeded by the run
    seed and instance index; ``"greedy"`` takes the most likely action.
    """

    algorithms: list
    dataset: dict
    init_solution_mode: str = "first"
    t_max: float = 60.0
    seeds: list = field(default_factory=lambda: [0])
    lb: dict = field(default_factory=dict)
    models: dict = field(default_factory=dict)
    root_nodes: int = 10
    policy_mode: str = "sample"
    curve_buckets: int = 60
    jobs: int = 1

    def __post_init__(self):
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a!r}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ValueError("duplicate algorithm")
        if self.init_solution_mode not in INIT_MODES:
            raise ValueError(f"init_solution_mode must be one of {INIT_MODES}")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.policy_mode not in ("sample", "greedy"):
            raise ValueError("policy_mode must be 'sample' or 'greedy'")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        for a in self.algorithms:
            for m in REQUIRED_MODELS[a]:
                if not self.models.get(m):
                    raise ValueError(f"{a} needs a {m} checkpoint")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {', '.join(sorted(extra))}")
        return cls(**d)

    def lb_config(self) -> LbConfig:
        return LbConfig.from_dict({**self.lb, "global_time_limit": self.t_max})


@dataclass
class RunRow:
    algorithm: str
    instance: str
    seed: int
    pi: float
    final_gap_pct: float
    iters: int
    best_obj: float
    opt_obj: float
    wall_s: float
    curve: tuple = ()  # P(t) at the bucket end points

    def csv_row(self) -> list:
        return [self.algorithm, self.instance, self.seed, repr(self.pi), repr(self.final_gap_pct), self.iters,
                repr(self.best_obj), repr(self.opt_obj), repr(self.wall_s)]


@dataclass
class Report:
    rows: list
    failures: list  # (algorithm, instance, seed, message)
    summary: list  # (algorithm, n_pairs, geo_mean_pi, geo_mean_gap)
    curves: dict  # algorithm -> [(t_bucket, geo_mean_p)]

    def geo_mean_pi(self, algorithm: str) -> float:
        for a, _, pi, _ in self.summary:
            if a == algorithm:
                return pi
        raise KeyError(algorithm)


def load_dataset_instances(dataset: dict) -> list[MilpInstance]:
    if "mps_dir" in dataset:
        paths = sorted(glob.glob(os.path.join(dataset["mps_dir"], "*.mps")))
        if not paths:
            raise ValueError(f"no .mps files in {dataset['mps_dir']}")
        return [read_mps(p) for p in paths]
    spec_args = {k: v for k, v in dataset.items() if k not in ("count", "seed_start", "scale")}
    count = int(dataset.get("count", 1))
    start = int(dataset.get("seed_start", 0))
    scale = int(dataset.get("scale", 1))
    out = []
    for i in range(count):
        spec = GeneratorSpec(**{**spec_args, "seed": start + i})
        if scale != 1:
            spec = spec.scaled(scale)
        out.append(generate(spec))
    return out


def permute_instance(inst: MilpInstance, seed: int) -> MilpInstance:
    """Seeded reordering of variables and rows (performance-variability seed)."""
    rng = np.random.default_rng([seed, 0x1B])
    return inst.permuted(rng.permutation(inst.num_vars), rng.permutation(inst.num_cons))


def initial_solution(inst: MilpInstance, mode: str, root_nodes: int = 10) -> Optional[Assignment]:
    if mode == "first":
        return solve_milp(inst, SolverLimits(solution_limit=1)).best
    res = solve_milp(inst, SolverLimits(node_limit=root_nodes))
    if res.best is None:
        res = solve_milp(inst, SolverLimits(solution_limit=1))
    return res.best


def optimum(inst: MilpInstance) -> float:
    res = solve_milp(inst)
    if res.status != SolveStatus.OPTIMAL:
        raise RuntimeError(f"{inst.name}: no proven optimum ({res.status.value})")
    return res.objective


def _bucket_times(t_max: float, n: int) -> np.ndarray:
    return np.linspace(0.0, t_max, n + 1)[1:]


def _load_models(paths: dict, algorithms) -> dict:
    needed = {m for a in algorithms for m in REQUIRED_MODELS[a]}
    return {k: load_model(paths[k]) for k in sorted(needed)}


def _run_job(job) -> tuple:
    """Worker: one (instance, seed) pair for every algorithm."""
    cfg_dict, inst, inst_idx, seed = job
    cfg = ExperimentConfig.from_dict(cfg_dict)
    lbcfg = cfg.lb_config()
    models = _load_models(cfg.models, cfg.algorithms)
    pinst = permute_instance(inst, seed)
    buckets = _bucket_times(cfg.t_max, cfg.curve_buckets)
    rows, failures = [], []
    try:
        opt_int = optimum(pinst)
        x0 = initial_solution(pinst, cfg.init_solution_mode, cfg.root_nodes)
        if x0 is None:
            raise RuntimeError("no initial solution")
    except Exception as exc:
        log.warning("%s seed %d: setup failed: %s", inst.name, seed, exc)
        return inst_idx, seed, [], [(a, inst.name, seed, str(exc)) for a in cfg.algorithms]
    opt = pinst.reported(opt_int)
    for algo in cfg.algorithms:
        try:
            sample_seed = [seed, inst_idx] if cfg.policy_mode == "sample" else None
            rec = make_runner(algo, models, sample_seed)(pinst, x0, lbcfg)
        except Exception as exc:
            log.warning("%s on %s seed %d failed: %s", algo, inst.name, seed, exc)
            failures.append((algo, inst.name, seed, str(exc)))
            continue
        events = [(t, pinst.reported(o)) for t, o in rec.incumbent_events()]
        series = MetricSeries.from_events(events, opt, cfg.t_max, minimize=not pinst.maximize)
        best = pinst.reported(rec.final_obj)
        curve = tuple(series.integral_until(float(t)) for t in buckets)
        rows.append(RunRow(algo, inst.name, seed, primal_integral(series), primal_gap(best, opt), len(rec.iterations),
                           best, opt, rec.elapsed, curve))
    return inst_idx, seed, rows, failures


def run_experiment(config, out_dir=None) -> Report:
    """Run every algorithm on every instance and seed.

    A failed run removes its (instance, seed) pair from every algorithm's
    aggregate so that geometric means compare like with like.
    """
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    instances = load_dataset_instances(cfg.dataset)
    cfg_dict = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    jobs = [(cfg_dict, inst, i, s) for i, inst in enumerate(instances) for s in cfg.seeds]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    results.sort(key=lambda r: (r[0], cfg.seeds.index(r[1])))

    order = {a: i for i, a in enumerate(cfg.algorithms)}
    rows = [row for r in results for row in sorted(r[2], key=lambda x: order[x.algorithm])]
    failures = [f for r in results for f in r[3]]
    for f in failures:
        log.warning("excluded: %s on %s seed %s (%s)", *f)
    bad = {(f[1], f[2]) for f in failures}
    summary, curves = [], {}
    buckets = _bucket_times(cfg.t_max, cfg.curve_buckets)
    for algo in cfg.algorithms:
        mine = [r for r in rows if r.algorithm == algo and (r.instance, r.seed) not in bad]
        summary.append((algo, len(mine), shifted_geometric_mean([r.pi for r in mine]),
                        shifted_geometric_mean([r.final_gap_pct for r in mine])))
        if mine:
            mat = np.array([r.curve for r in mine])
            curves[algo] = [(float(t), shifted_geometric_mean(mat[:, j])) for j, t in enumerate(buckets)]
        else:
            curves[algo] = []
    report = Report(rows, failures, summary, curves)
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def write_report(report: Report, out_dir) -> None:
    from .plotting import plot_curves

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "runs.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROW_COLUMNS)
        w.writerows(r.csv_row() for r in report.rows)
    with open(os.path.join(out_dir, "summary.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "runs", "geo_mean_pi", "geo_mean_final_gap_pct"])
        w.writerows([a, n, repr(pi), repr(g)] for a, n, pi, g in report.summary)
    for algo, curve in report.curves.items():
        with open(os.path.join(out_dir, f"curve_{algo}.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_bucket", "geo_mean_p"])
            w.writerows([repr(t), repr(p)] for t, p in curve)
    with open(os.path.join(out_dir, "failures.json"), "w") as fh:
        json.dump([list(f) for f in report.failures], fh, indent=1)
        fh.write("\n")
    plot_curves(report.curves, os.path.join(out_dir, "curves.png"))
