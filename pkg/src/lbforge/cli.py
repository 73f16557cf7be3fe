"""``lbforge`` command line: generate, label, train, run, bench, solve, inspect.

Every option can also come from a JSON ``--config`` file whose keys are
the option names (dashes or underscores).  Explicit flags win over the
file, which wins over built-in defaults.  Exit status is 0 on success, 1
on usage errors and 2 on runtime failures.  ``LBFORGE_LOG`` sets the log
level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

import numpy as np

log = logging.getLogger("lbforge")

LB_DEFAULTS = {
    "k0": 20.0,
    "node_time_limit": 10.0,
    "tmax": 60.0,
    "k_step": 0.5,
    "t_step": 2.0,
    "t_min": 1.0,
    "form": "symmetric",
    "clock": "nodes",
    "nodes_per_second": 1.0,
}

DEFAULTS = {
    "generate": {"family": "sc", "rows": 200, "cols": 100, "density": 0.05, "nodes": 60, "affinity": 4,
                 "items": 100, "bids": 50, "scale": 1, "count": 1, "seed": 0, "out": "."},
    "label": {"instances": None, "out": None, "init": "first", "resolution": 0.01, "alpha": 0.5,
              "compact": False, "seed": 0, "root_nodes": 10, **LB_DEFAULTS},
    "train-regression": {"data": None, "out": None, "epochs": 300, "lr": 1e-4, "optimizer": "adam",
                         "batch_size": 1, "seed": 0, "log": None},
    "train-rl": {"which": "k", "instances": None, "out": None, "init": "first", "epochs": 300, "lr": 1e-2,
                 "episodes_per_epoch": 1, "seed": 0, "pi_k": None, "k_model": None, "beta1": 1.0, "beta2": 1.0,
                 "penalty_sign": -1.0, "log": None, "root_nodes": 10, **LB_DEFAULTS},
    "run": {"algo": "lb-base", "instance": None, "init": "first", "k_model": None, "sr_model": None,
            "pi_k": None, "pi_t": None, "out": None, "seed": 0, "root_nodes": 10, **LB_DEFAULTS},
    "bench": {"out": None, "jobs": None, "seed": None, "seeds": None, "tmax": None, "init": None},
    "solve": {"instance": None, "node_limit": None, "time_limit": None, "heuristic": "none", "f": 100,
              "algo": "lb-base", "k_model": None, "sr_model": None, "pi_k": None, "pi_t": None, "seed": 0,
              "out": None, **LB_DEFAULTS},
    "inspect": {"file": None, "seed": 0},
}

REQUIRED = {
    "label": ("instances", "out"),
    "train-regression": ("data", "out"),
    "train-rl": ("instances", "out"),
    "run": ("instance",),
    "solve": ("instance",),
    "inspect": ("file",),
    "bench": ("out",),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _lb_flags(p):
    g = p.add_argument_group("local branching")
    g.add_argument("--k0", type=float, help="default first neighborhood size")
    g.add_argument("--node-time-limit", type=float, help="default per-iteration time limit")
    g.add_argument("--tmax", type=float, help="global time budget")
    g.add_argument("--k-step", type=float)
    g.add_argument("--t-step", type=float)
    g.add_argument("--t-min", type=float)
    g.add_argument("--form", choices=["symmetric", "asymmetric"])
    g.add_argument("--clock", choices=["nodes", "wall"])
    g.add_argument("--nodes-per-second", type=float)


def _model_flags(p):
    p.add_argument("--k-model", help="regression checkpoint trained on the mixed set")
    p.add_argument("--sr-model", help="regression checkpoint trained on one family")
    p.add_argument("--pi-k", help="k policy checkpoint")
    p.add_argument("--pi-t", help="time policy checkpoint")


def build_parser() -> argparse.ArgumentParser:
    from .lb.variants import ALGORITHMS

    parser = _Parser(prog="lbforge", description=__doc__.splitlines()[0], argument_default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON file with option values")
        p.add_argument("--seed", type=int, help="random seed")
        return p

    p = cmd("generate", "write generated instances as MPS files")
    p.add_argument("--family", choices=["sc", "mis", "ca", "gisp"])
    for name in ("rows", "cols", "nodes", "affinity", "items", "bids", "scale", "count"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--out")

    p = cmd("label", "generate regression labels for a directory of MPS files")
    p.add_argument("--instances")
    p.add_argument("--out")
    p.add_argument("--init", choices=["first", "root"])
    p.add_argument("--root-nodes", type=int)
    p.add_argument("--resolution", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--compact", action="store_true")
    _lb_flags(p)

    p = cmd("train-regression", "train the neighborhood-size regressor")
    p.add_argument("--data", nargs="+")
    p.add_argument("--out")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--optimizer", choices=["adam", "sgd"])
    p.add_argument("--batch-size", type=int)
    p.add_argument("--log")

    p = cmd("train-rl", "train the k or time policy with REINFORCE")
    p.add_argument("--which", choices=["k", "t"])
    p.add_argument("--instances")
    p.add_argument("--out")
    p.add_argument("--init", choices=["first", "root"])
    p.add_argument("--root-nodes", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--episodes-per-epoch", type=int)
    p.add_argument("--pi-k", help="frozen k policy (required for --which t)")
    p.add_argument("--k-model", help="regression checkpoint for the first k")
    p.add_argument("--beta1", type=float)
    p.add_argument("--beta2", type=float)
    p.add_argument("--penalty-sign", type=float)
    p.add_argument("--log")
    _lb_flags(p)

    p = cmd("run", "run one LB variant on one instance and write its JSON-lines record")
    p.add_argument("--algo", choices=ALGORITHMS)
    p.add_argument("--instance")
    p.add_argument("--init", choices=["first", "root"])
    p.add_argument("--root-nodes", type=int)
    p.add_argument("--out", help="output file (default stdout)")
    _model_flags(p)
    _lb_flags(p)

    p = cmd("bench", "run a benchmark described by a JSON experiment file")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--tmax", type=float)
    p.add_argument("--init", choices=["first", "root"])

    p = cmd("solve", "branch-and-bound, optionally with LB as primal heuristic")
    p.add_argument("--instance")
    p.add_argument("--node-limit", type=int)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--heuristic", choices=["none", "root_only", "every_f_nodes"])
    p.add_argument("--f", type=int)
    p.add_argument("--algo", choices=ALGORITHMS)
    p.add_argument("--out")
    _model_flags(p)
    _lb_flags(p)

    p = cmd("inspect", "describe an MPS, checkpoint, state or run-record file")
    p.add_argument("file", nargs="?")
    return parser


def _norm(key: str) -> str:
    return key.replace("-", "_")


def resolve_options(command: str, flags: dict) -> dict:
    """Merge defaults, the JSON config file and explicit flags (in rising priority)."""
    opts = {_norm(k): v for k, v in DEFAULTS[command].items()}
    cfg_path = flags.pop("config", None)
    file_opts: dict = {}
    if cfg_path is not None:
        with open(cfg_path) as fh:
            file_opts = json.load(fh)
        if not isinstance(file_opts, dict):
            raise UsageError("config file must hold a JSON object")
    if command == "bench":
        opts["experiment"] = file_opts
        if cfg_path is None:
            raise UsageError("bench needs --config")
    else:
        unknown = {_norm(k) for k in file_opts} - set(opts)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        opts.update({_norm(k): v for k, v in file_opts.items()})
    opts.update({_norm(k): v for k, v in flags.items()})
    for key in REQUIRED.get(command, ()):
        if opts.get(key) is None:
            raise UsageError(f"--{key.replace('_', '-')} is required")
    return opts


def _lb_config(o: dict):
    from .lb.records import LbConfig

    return LbConfig(
        k0_default=float(o["k0"]),
        node_time_limit_default=float(o["node_time_limit"]),
        global_time_limit=float(o["tmax"]),
        k_step=float(o["k_step"]),
        t_step=float(o["t_step"]),
        t_min=float(o["t_min"]),
        constraint_form=o["form"],
        clock=o["clock"],
        nodes_per_second=float(o["nodes_per_second"]),
    )


def _models(o: dict) -> dict:
    from .nn.checkpoint import load_model

    return {k: load_model(o[k]) for k in ("k_model", "sr_model", "pi_k", "pi_t") if o.get(k)}


def _mps_files(directory) -> list:
    files = sorted(f for f in os.listdir(directory) if f.endswith(".mps"))
    if not files:
        raise RuntimeError(f"no .mps files in {directory}")
    return [os.path.join(directory, f) for f in files]


def _write_json(obj, path) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands --------------------------------------------------------------


def cmd_generate(o: dict) -> None:
    from .bench.generators import GeneratorSpec, generate
    from .milp.mps import write_mps

    os.makedirs(o["out"], exist_ok=True)
    sizes = {k: o[k] for k in ("rows", "cols", "density", "nodes", "affinity", "items", "bids")}
    for i in range(int(o["count"])):
        spec = GeneratorSpec(o["family"], seed=int(o["seed"]) + i, **sizes)
        if int(o["scale"]) != 1:
            spec = spec.scaled(int(o["scale"]))
        inst = generate(spec)
        write_mps(inst, os.path.join(o["out"], f"{spec.label()}.mps"))
    log.info("wrote %d instances to %s", o["count"], o["out"])


def cmd_label(o: dict) -> None:
    from .bench.harness import initial_solution
    from .learning.dataset import save_sample
    from .learning.labels import CostMetricParams, generate_label
    from .milp.mps import read_mps

    cfg = _lb_config(o)
    params = CostMetricParams(alpha=float(o["alpha"]))
    kept = 0
    for path in _mps_files(o["instances"]):
        inst = read_mps(path)
        x0 = initial_solution(inst, o["init"], int(o["root_nodes"]))
        if x0 is None:
            log.warning("%s: no initial solution, skipped", path)
            continue
        sample = generate_label(inst, x0, cfg.node_time_limit_default, float(o["resolution"]), cfg, params,
                                compact=bool(o["compact"]))
        if sample is None:
            log.info("%s: skipped (no usable label)", path)
            continue
        save_sample(o["out"], os.path.splitext(os.path.basename(path))[0], sample)
        kept += 1
    log.info("labelled %d instances", kept)


def cmd_train_regression(o: dict) -> None:
    from .learning.dataset import load_dataset
    from .learning.regression import train_regression
    from .nn.checkpoint import save_model

    data = o["data"] if isinstance(o["data"], list) else [o["data"]]
    samples = load_dataset(*data)
    if len(samples) < 3:
        raise RuntimeError("need at least three labelled samples")
    model, rlog = train_regression(samples, epochs=int(o["epochs"]), lr=float(o["lr"]), seed=int(o["seed"]),
                                   optimizer=o["optimizer"], batch_size=int(o["batch_size"]), log_path=o["log"])
    save_model(model, o["out"], epoch=rlog.best_epoch, extra={"test_mse": rlog.test_mse})
    log.info("best epoch %d, test mse %.6g", rlog.best_epoch, rlog.test_mse)


def cmd_train_rl(o: dict) -> None:
    from .bench.harness import initial_solution
    from .learning.reinforce import LbEnvironment, train_policy_reinforce
    from .learning.rewards import RewardParams
    from .milp.mps import read_mps
    from .nn.checkpoint import load_model, save_model
    from .nn.policy import PolicyModel

    cfg = _lb_config(o)
    pool = []
    for path in _mps_files(o["instances"]):
        inst = read_mps(path)
        x0 = initial_solution(inst, o["init"], int(o["root_nodes"]))
        if x0 is not None:
            pool.append((inst, x0))
    frozen = load_model(o["pi_k"]) if o.get("pi_k") else None
    k0_source = load_model(o["k_model"]) if o.get("k_model") else None
    rp = RewardParams(beta1=float(o["beta1"]), beta2=float(o["beta2"]), penalty_sign=float(o["penalty_sign"]))
    env = LbEnvironment(pool, cfg, o["which"], frozen, k0_source, rp)
    policy = PolicyModel(seed=None)
    policy.seed = int(o["seed"])
    policy, plog = train_policy_reinforce(env, policy, float(o["lr"]), int(o["epochs"]), o["which"], frozen,
                                          seed=int(o["seed"]), episodes_per_epoch=int(o["episodes_per_epoch"]),
                                          log_path=o["log"])
    save_model(policy, o["out"], epoch=int(o["epochs"]), extra={"which": o["which"]})


def _load_run_instance(o: dict):
    from .bench.harness import initial_solution, permute_instance
    from .milp.mps import read_mps

    inst = permute_instance(read_mps(o["instance"]), int(o["seed"]))
    x0 = initial_solution(inst, o["init"], int(o["root_nodes"]))
    if x0 is None:
        raise RuntimeError("no initial solution found")
    return inst, x0


def cmd_run(o: dict) -> None:
    from .lb.variants import make_runner

    inst, x0 = _load_run_instance(o)
    rec = make_runner(o["algo"], _models(o))(inst, x0, _lb_config(o))
    text = rec.to_jsonl()
    if o["out"]:
        with open(o["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bench(o: dict) -> None:
    from .bench.harness import ExperimentConfig, run_experiment

    exp = dict(o["experiment"])
    if o["jobs"] is not None:
        exp["jobs"] = int(o["jobs"])
    if o["seeds"] is not None:
        exp["seeds"] = [int(s) for s in o["seeds"]]
    elif o["seed"] is not None:
        exp["seeds"] = [int(o["seed"])]
    if o["tmax"] is not None:
        exp["t_max"] = float(o["tmax"])
    if o["init"] is not None:
        exp["init_solution_mode"] = o["init"]
    try:
        cfg = ExperimentConfig.from_dict(exp)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad experiment config: {exc}") from exc
    report = run_experiment(cfg, out_dir=o["out"])
    for algo, n, pi, gap in report.summary:
        print(f"{algo}\truns={n}\tgeo_mean_pi={pi:.6g}\tgeo_mean_gap_pct={gap:.6g}")


def cmd_solve(o: dict) -> None:
    from .bench.harness import permute_instance
    from .lb.heuristic import run_as_primal_heuristic
    from .milp.bnb import solve_milp
    from .milp.model import SolverLimits
    from .milp.mps import read_mps

    inst = permute_instance(read_mps(o["instance"]), int(o["seed"])) if int(o["seed"]) else read_mps(o["instance"])
    limits = SolverLimits(
        time_limit=float(o["time_limit"]) if o["time_limit"] is not None else float("inf"),
        node_limit=int(o["node_limit"]) if o["node_limit"] is not None else None,
    )
    extra = {}
    if o["heuristic"] == "none":
        res = solve_milp(inst, limits)
    else:
        res = run_as_primal_heuristic(inst, o["heuristic"], int(o["f"]), o["algo"], _lb_config(o), limits, _models(o))
        extra = {"lb_calls": res.lb_calls, "lb_improvements": res.lb_improvements, "lb_failures": res.lb_failures}
    out = {
        "instance": inst.name,
        "status": res.status.value,
        "objective": inst.reported(res.objective) if res.best is not None else None,
        "bound": inst.reported(res.bound) if np.isfinite(res.bound) else None,
        "nodes": res.nodes,
        "solution": None if res.best is None else [float(v) for v in res.best.values],
        **extra,
    }
    _write_json(out, o["out"])


def cmd_inspect(o: dict) -> None:
    from . import tensorio
    from .features import BipartiteState
    from .lb.records import LbRunRecord
    from .milp.mps import read_mps

    path = o["file"]
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == b"LBFT":
        with open(path, "rb") as fh:
            tensors, meta = tensorio.decode(fh.read())
        info = {"kind": "tensor file", "meta": meta,
                "tensors": {k: {"dtype": str(v.dtype), "shape": list(v.shape)} for k, v in tensors.items()}}
        if "var_columns" in meta:
            with open(path, "rb") as fh:
                state, _ = BipartiteState.from_bytes(fh.read())
            info["vars"], info["cons"], info["edges"] = state.num_vars, state.num_cons, int(state.edge_index.shape[1])
    elif path.endswith(".mps"):
        inst = read_mps(path)
        info = {"kind": "mps", "name": inst.name, "vars": inst.num_vars, "cons": inst.num_cons,
                "nonzeros": int(inst.A.nnz), "binaries": int(inst.binary_idx.size), "maximize": bool(inst.maximize)}
    elif path.endswith(".jsonl"):
        with open(path) as fh:
            rec = LbRunRecord.from_jsonl(fh.read())
        info = {"kind": "run record", "algorithm": rec.algorithm, "instance": rec.instance, "k0": rec.k0,
                "iterations": len(rec.iterations), "initial_obj": rec.initial_obj, "final_obj": rec.final_obj,
                "elapsed": rec.elapsed}
    elif path.endswith(".json"):
        with open(path) as fh:
            info = {"kind": "json", "content": json.load(fh)}
    else:
        raise RuntimeError(f"cannot tell the type of {path}")
    _write_json(info, None)


COMMANDS = {
    "generate": cmd_generate,
    "label": cmd_label,
    "train-regression": cmd_train_regression,
    "train-rl": cmd_train_rl,
    "run": cmd_run,
    "bench": cmd_bench,
    "solve": cmd_solve,
    "inspect": cmd_inspect,
}


def _setup_logging() -> None:
    level = os.environ.get("LBFORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        flags = vars(ns)
        command = flags.pop("command", None)
        if command is None:
            raise UsageError("a subcommand is required")
        opts = resolve_options(command, flags)
    except UsageError as exc:
        print(f"lbforge: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"lbforge: error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        COMMANDS[command](opts)
    except UsageError as exc:
        print(f"lbforge: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        log.debug("failure", exc_info=True)
        print(f"lbforge: {command} failed: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
