"""``grload`` command line: load, train, sweep, heatmap and emit.

Every command writes its artifacts into ``--out`` (created if missing) and
prints a one-line summary.  Settings come from built-in defaults, then an
optional ``--config`` JSON file, then explicit flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .circuits import count_tqg, emit_ir, expand, parse_ir, plan_to_gates
from .errors import GrloadError
from .functions import FAMILIES, FunctionSpec, discretize, standardize
from .planner import K0_COEFFICIENT, k0_asymptotic, plan_singular, plan_theorem1
from .simulator import fidelity, run_plan
from .variational import TrainConfig, build_ansatz, init_params, instantiate, train

MAX_QUBITS = 24

DEFAULTS = {
    "function": "normal",
    "params": {},
    "n": 8,
    "epsilon": 0.05,
    "encoding": "amplitude",
    "k0": 2,
    "p_schedule": "1",
    "gamma": 1.5,
    "tolerance": 1e-9,
    "max_steps": 100_000,
    "init": "grover_rudolph",
    "seed": 0,
    "out": "grload-out",
    "k0_coefficient": K0_COEFFICIENT,
    "k_star": None,
    "eta_points": 65,
    "eps_points": 34,
    "n_values": "5,6,7,8,9,10",
    "p_values": "1,2,3,k",
    "variational": False,
    "expand": False,
}


def _parse_params(text) -> dict:
    if isinstance(text, dict):
        return text
    text = text.strip()
    if not text:
        return {}
    if text.startswith("{"):
        return json.loads(text)
    out = {}
    for item in text.split(","):
        key, _, value = item.partition("=")
        out[key.strip()] = float(value)
    return out


def load_function(config: dict) -> FunctionSpec:
    """Family name (with ``params``) or path to a JSON function description."""
    name = config["function"]
    if name in FAMILIES:
        return FunctionSpec(name, _parse_params(config["params"]))
    if not os.path.exists(name):
        raise GrloadError(f"--function must be one of {FAMILIES} or a JSON file; got {name!r}")
    with open(name) as fh:
        return FunctionSpec.from_json(fh.read())


def _write(out_dir: str, name: str, text: str) -> str:
    path = os.path.join(out_dir, name)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def _dump(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise GrloadError(f"n must lie in [1, {MAX_QUBITS}], got {n}")


def _plan_for(spec, config):
    std = standardize(spec, config["encoding"])
    if std.spec.singular_points:
        return std, plan_singular(
            std, config["n"], config["epsilon"], config["k_star"],
            coefficient=config["k0_coefficient"],
        )
    return std, plan_theorem1(std, config["n"], config["epsilon"], coefficient=config["k0_coefficient"])


def cmd_load(config: dict) -> int:
    n = config["n"]
    _check_n(n)
    spec = load_function(config)
    std, plan = _plan_for(spec, config)
    target = discretize(std, n)
    prepared = run_plan(plan)
    fid = fidelity(prepared, target)
    report = count_tqg(plan)
    share = 100.0 * report.tqg_total / (2**n - 1)
    out = config["out"]
    _write(out, "load_report.json", _dump({
        "function": spec.to_dict(),
        "encoding": std.encoding,
        "n": n,
        "epsilon": config["epsilon"],
        "eta": plan.eta,
        "k0": plan.k0,
        "fidelity": fid,
        "tqg": report.to_dict(),
        "tqg_share_percent": share,
    }))
    _write(out, "plan.json", plan.to_json() + "\n")
    _write(out, "state_target.csv", target.to_csv())
    _write(out, "state_prepared.csv", prepared.to_csv())
    print(f"{plan.eta:.2f}, {plan.k0}, {fid:.5f}, {report.tqg_total}, {share:.2f}%")
    return 0


def _train_config(config) -> TrainConfig:
    return TrainConfig(
        learning_rate=config["gamma"],
        tolerance=config["tolerance"],
        max_steps=config["max_steps"],
        init=config["init"],
        seed=config["seed"],
    )


def cmd_train(config: dict) -> int:
    n = config["n"]
    _check_n(n)
    spec = load_function(config)
    ansatz = build_ansatz(spec, n, config["k0"], config["p_schedule"], config["encoding"])
    target = discretize(ansatz.func, n)
    report = train(ansatz, target, _train_config(config))
    out = config["out"]
    doc = report.to_dict()
    doc["ansatz"] = ansatz.to_dict()
    doc["function"] = spec.to_dict()
    doc["tqg"] = count_tqg(instantiate(report.params, ansatz)).to_dict()
    _write(out, "train_report.json", _dump(doc))
    final = run_plan(instantiate(report.params, ansatz))
    _write(out, "state_final.csv", final.to_csv())
    print(
        f"params {ansatz.num_params}, steps {report.steps}, "
        f"fidelity {report.fidelities[0]:.5f} -> {report.final_fidelity:.5f}"
    )
    return 0


def _split(text) -> list[str]:
    return [t.strip() for t in str(text).split(",") if t.strip()]


def cmd_sweep(config: dict) -> int:
    """Train every (n, p schedule) pair; one CSV row each."""
    spec = load_function(config)
    cfg = _train_config(config)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "p_schedule", "num_params", "steps", "initial_fidelity", "final_fidelity"])
    for n_text in _split(config["n_values"]):
        n = int(n_text)
        _check_n(n)
        for p in _split(config["p_values"]):
            ansatz = build_ansatz(spec, n, config["k0"], p, config["encoding"])
            report = train(ansatz, discretize(ansatz.func, n), cfg)
            writer.writerow([
                n, p, ansatz.num_params, report.steps,
                repr(report.fidelities[0]), repr(report.final_fidelity),
            ])
    _write(config["out"], "sweep.csv", buf.getvalue())
    print(buf.getvalue(), end="")
    return 0


def heatmap_rows(eta_points: int, eps_points: int, coefficient: float = K0_COEFFICIENT):
    """``(eta, epsilon, k0)`` over ``eta in [0, 8 pi]``, ``epsilon in [1e-4, 1e-2]``."""
    if eta_points < 2 or eps_points < 2:
        raise GrloadError("heatmap grid needs at least 2 x 2 points")
    etas = np.linspace(0.0, 8.0 * math.pi, eta_points)
    epss = np.linspace(1e-4, 1e-2, eps_points)
    return [
        (float(eta), float(eps), k0_asymptotic(float(eta), float(eps), coefficient))
        for eta in etas
        for eps in epss
    ]


def cmd_heatmap(config: dict) -> int:
    rows = heatmap_rows(config["eta_points"], config["eps_points"], config["k0_coefficient"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["eta", "epsilon", "k0"])
    for eta, eps, k0 in rows:
        writer.writerow([repr(eta), repr(eps), k0])
    _write(config["out"], "heatmap.csv", buf.getvalue())
    print(f"{len(rows)} grid points, k0 in [{min(r[2] for r in rows)}, {max(r[2] for r in rows)}]")
    return 0


def cmd_emit(config: dict) -> int:
    n = config["n"]
    _check_n(n)
    spec = load_function(config)
    if config["variational"]:
        ansatz = build_ansatz(spec, n, config["k0"], config["p_schedule"], config["encoding"])
        params = init_params(ansatz, mode=config["init"], seed=config["seed"])
        plan = instantiate(params, ansatz)
    else:
        plan = _plan_for(spec, config)[1]
    gates = plan_to_gates(plan)
    if config["expand"]:
        gates = expand(gates)
    text = emit_ir(gates)
    parsed = parse_ir(text)
    if emit_ir(parsed) != text:
        raise GrloadError("emitted IR does not round-trip")
    _write(config["out"], "circuit.ir", text)
    print(f"{len(parsed)} gates, {gates.meta['tqg']} two-qubit gates")
    return 0


COMMANDS = {
    "load": cmd_load,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "heatmap": cmd_heatmap,
    "emit": cmd_emit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grload", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with settings; flags override it")
    common.add_argument("--function", help=f"one of {', '.join(FAMILIES)} or a JSON file")
    common.add_argument("--params", help='family parameters: \'{"sigma": 0.3}\' or sigma=0.3,mu=0.5')
    common.add_argument("--n", type=int, help="qubit count")
    common.add_argument("--epsilon", type=float, help="infidelity budget")
    common.add_argument("--encoding", choices=("amplitude", "probability"))
    common.add_argument("--k0", type=int, help="fully parameterized blocks (variational)")
    common.add_argument("--k-star", type=int, dest="k_star", help="minimum exact blocks (singular path)")
    common.add_argument("--k0-coefficient", type=float, dest="k0_coefficient")
    common.add_argument("--p-schedule", dest="p_schedule", choices=("1", "2", "3", "k"))
    common.add_argument("--gamma", type=float, help="learning rate")
    common.add_argument("--tolerance", type=float, help="stop when the loss changes less than this")
    common.add_argument("--max-steps", type=int, dest="max_steps")
    common.add_argument("--init", choices=("grover_rudolph", "random_uniform_0_pi"))
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("load", parents=[common], help="cluster, simulate and count gates")
    sub.add_parser("train", parents=[common], help="train the variational ansatz")
    sweep = sub.add_parser("sweep", parents=[common], help="train over several n and p schedules")
    sweep.add_argument("--n-values", dest="n_values")
    sweep.add_argument("--p-values", dest="p_values")
    heat = sub.add_parser("heatmap", parents=[common], help="k0 over an (eta, epsilon) grid")
    heat.add_argument("--eta-points", type=int, dest="eta_points")
    heat.add_argument("--eps-points", type=int, dest="eps_points")
    emit = sub.add_parser("emit", parents=[common], help="write the circuit IR of a plan")
    emit.add_argument("--variational", action="store_const", const=True, default=None)
    emit.add_argument("--expand", action="store_const", const=True, default=None,
                      help="decompose into one- and two-qubit gates")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    config = dict(DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            from_file = json.load(fh)
        unknown = set(from_file) - set(DEFAULTS)
        if unknown:
            raise GrloadError(f"unknown config keys: {sorted(unknown)}")
        config.update(from_file)
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            config[key] = value
    config["command"] = args.command
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        os.makedirs(config["out"], exist_ok=True)
        return COMMANDS[args.command](config)
    except (GrloadError, ValueError, OSError) as exc:
        print(f"grload {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
