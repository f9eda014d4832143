"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The lines are collected in ``conftest.ACCEPTANCE_LINES`` and echoed in the
pytest terminal summary; running this file directly prints them too.
"""

import csv
import io
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from grload.angles import gr_blocks, lemma_pair_bound
from grload.circuits import circuit_unitary, count_tqg, decompose_mcr
from grload.cli import main
from grload.functions import discretize, eta_bound, registry_spec, standardize
from grload.planner import (
    compute_k0,
    fidelity_bound,
    plan_singular,
    plan_theorem1,
    product_bound,
)
from grload.simulator import StateVector, apply_ucr, fidelity, run_plan
from grload.variational import TrainConfig, build_ansatz, gradient, loss, train
from oracles import central_differences, dense_mcr

ARTIFACTS = Path(__file__).resolve().parent.parent / "artifacts"

# smooth registry functions with eta <= 8 pi (landmark-free domains)
CLUSTERABLE_SET = [
    registry_spec("normal", sigma=1.0),
    registry_spec("normal", sigma=0.6),
    registry_spec("normal", sigma=0.4),
    registry_spec("normal", sigma=0.3),
    registry_spec("uniform"),
    registry_spec("exp_x32", domain=(0.1, 1.0)),
    registry_spec("sine", domain=(1.0, 2.2)),
    registry_spec("beta", alpha=2.0, beta=3.0, domain=(0.3, 0.75)),
    registry_spec("black_scholes", domain=(0.5, 6.0)),
]


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"CRITERION {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert ok, line


def _clustered_runs():
    """(spec, n, eps, plan, exact GR state, target) for every criterion-2 case."""
    runs = []
    for spec in CLUSTERABLE_SET:
        for n in range(4, 13):
            blocks = gr_blocks(spec, n)
            exact = StateVector.zero(n)
            for block in blocks:
                exact = apply_ucr(exact, block)
            target = discretize(spec, n)
            for eps in (0.01, 0.05):
                plan = plan_theorem1(spec, n, eps, blocks=blocks)
                runs.append((spec, n, eps, plan, exact, target))
    return runs


@pytest.fixture(scope="module")
def clustered_runs():
    start = time.perf_counter()
    runs = _clustered_runs()
    return runs, time.perf_counter() - start


def test_criterion_01_normal_clustering():
    start = time.perf_counter()
    cases = [(1.0, 2.00, 2, 0.99961), (0.6, 5.56, 3, 0.99931), (0.4, 12.50, 4, 0.99931), (0.3, 22.22, 5, 0.99961)]
    ok = True
    parts = []
    for sigma, eta_ref, k0_ref, fid_ref in cases:
        spec = registry_spec("normal", mu=0.5, sigma=sigma)
        eta = eta_bound(spec)
        plan = plan_theorem1(spec, 8, 0.05)
        tqg = count_tqg(plan).tqg_total
        fid = fidelity(run_plan(plan), discretize(spec, 8))
        ok &= abs(eta - eta_ref) <= 5e-3 * eta_ref
        ok &= plan.k0 == k0_ref and tqg == 2**k0_ref - 1
        ok &= abs(fid - fid_ref) <= 1e-3 and fid >= 0.95
        parts.append(f"s={sigma}: eta={eta:.2f} k0={plan.k0} tqg={tqg} F={fid:.5f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 5.0
    report(1, "clustered normal loaders n=8", ok, "; ".join(parts) + f" ({elapsed:.2f}s)")


def test_criterion_02_theorem1_guarantee(clustered_runs):
    runs, elapsed = clustered_runs
    worst = min((fidelity(run_plan(plan), target) - (1 - eps), spec.family, n, eps)
                for spec, n, eps, plan, _, target in runs)
    ok = worst[0] >= 0 and elapsed < 30.0
    report(2, "clustered fidelity >= 1 - eps", ok,
           f"{len(runs)} plans, smallest margin {worst[0]:.2e} ({worst[1]}, n={worst[2]}, eps={worst[3]}), {elapsed:.1f}s")


def test_criterion_03_singular_example():
    start = time.perf_counter()
    spec = registry_spec("exp_x32")
    plan = plan_singular(spec, 10, 0.01)
    fid = fidelity(run_plan(plan), discretize(spec, 10))
    first_clustered = min(b.k for b in plan.blocks if b.cluster is not None)
    elapsed = time.perf_counter() - start
    ok = (
        abs(fid - 0.99975) <= 1e-3
        and first_clustered == 3
        and abs(plan.eta - 0.75) < 1e-12
        and compute_k0(plan.eta, 0.01, 10) == 2
        and elapsed < 5.0
    )
    report(3, "singular endpoint e^(x^1.5)", ok,
           f"F={fid:.5f}, clustering from block {first_clustered}, eta={plan.eta}, k0={compute_k0(plan.eta, 0.01, 10)} ({elapsed:.2f}s)")


def test_criterion_04_angle_bounds():
    specs = [registry_spec("normal", sigma=s) for s in (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)]
    specs.append(registry_spec("exp_x32", domain=(0.1, 1.0)))
    checks = violations = 0
    for spec in specs:
        std = standardize(spec)
        eta = eta_bound(std)
        for block in gr_blocks(std, 10):
            bound = lemma_pair_bound(std, block.k)
            diffs = np.abs(np.diff(block.angles))
            violations += int(np.sum(diffs > bound + 1e-9))
            spread = np.abs(block.angles[:, None] - block.angles[None, :]).max()
            violations += int(spread > block.delta / 4 * eta + 1e-9)
            checks += diffs.size + 1
    report(4, "consecutive and any-pair angle bounds, k<=10", violations == 0,
           f"{checks} checks, {violations} violations")


def test_criterion_05_fidelity_bounds(clustered_runs):
    runs, _ = clustered_runs
    bad = []
    for spec, n, eps, plan, exact, _ in runs:
        fid = fidelity(run_plan(plan), exact)
        if fid < product_bound(plan) - 1e-12 or fid < fidelity_bound(plan.eta, plan.k0, n) - 1e-12:
            bad.append((spec.family, n, eps))
    report(5, "product and exponential fidelity bounds", not bad,
           f"{len(runs)} plans, {len(bad)} below a bound {bad[:3]}")


def test_criterion_06_decomposition():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for m in range(1, 5):
        for theta in rng.uniform(-2 * math.pi, 2 * math.pi, 50):
            worst = max(worst, np.abs(circuit_unitary(decompose_mcr(m, theta)) - dense_mcr(m, theta)).max())
    counts = {k: decompose_mcr(k - 1, 0.3).count_two_qubit() for k in (7, 8, 9)}
    ok = worst <= 1e-12 and all(c == 80 * k - 398 for k, c in counts.items())
    report(6, "multi-controlled rotation decomposition", ok,
           f"max dense error {worst:.1e} over m<=4 x 50 angles; enumerated TQG {counts}")


def test_criterion_07_black_scholes_schedules():
    start = time.perf_counter()
    spec = registry_spec("black_scholes", K=45, c=3)
    target = discretize(spec, 12)
    cfg = TrainConfig(learning_rate=1.5, tolerance=1e-9, init="grover_rudolph")
    rows = [("1", 33, 0.99303), ("2", 52, 0.99838), ("3", 70, 0.99890), ("k", None, 0.99913)]
    ok = True
    parts = []
    for p, count, fid_ref in rows:
        ansatz = build_ansatz(spec, 12, 2, p)
        result = train(ansatz, target, cfg)
        row_ok = abs(result.final_fidelity - fid_ref) <= 5e-3
        if count is not None:
            row_ok &= ansatz.num_params == count
        ok &= row_ok
        parts.append(f"p={p}: {ansatz.num_params} params F={result.final_fidelity:.5f} ({'ok' if row_ok else 'off'})")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120.0
    report(7, "Black-Scholes n=12 schedules", ok, "; ".join(parts) + f" ({elapsed:.1f}s)")


def test_criterion_08_sine():
    spec = registry_spec("sine")
    target = discretize(spec, 5)
    fids = {p: train(build_ansatz(spec, 5, 2, p), target).final_fidelity for p in ("1", "2", "3", "k")}
    ARTIFACTS.mkdir(exist_ok=True)
    code = main([
        "sweep", "--function", "sine", "--k0", "2", "--gamma", "1.5",
        "--n-values", "5,6,7,8,9,10", "--p-values", "1,2,3,k", "--out", str(ARTIFACTS),
    ])
    rows = list(csv.DictReader(io.StringIO((ARTIFACTS / "sweep.csv").read_text())))
    sweep_min = min(float(r["final_fidelity"]) for r in rows)
    ok = code == 0 and all(f > 0.97 for f in fids.values()) and len(rows) == 24 and sweep_min > 0.95
    report(8, "sine n=5 and n=5..10 sweep", ok,
           "n=5 " + ", ".join(f"p={p}: {f:.5f}" for p, f in fids.items())
           + f"; sweep {len(rows)} points, min F={sweep_min:.5f} (artifacts/sweep.csv)")


def test_criterion_09_warm_start_large_n():
    start = time.perf_counter()
    spec = registry_spec("black_scholes", K=45, c=3)
    ok = True
    parts = []
    for n, fid_ref in ((15, 0.99317), (16, 0.99316)):
        ansatz = build_ansatz(spec, n, 2, "1")
        target = discretize(spec, n)
        gr = train(ansatz, target, TrainConfig(learning_rate=1.5, tolerance=1e-9))
        randoms = [
            train(ansatz, target, TrainConfig(learning_rate=1.5, tolerance=1e-9,
                                              init="random_uniform_0_pi", seed=s)).final_fidelity
            for s in range(5)
        ]
        close = abs(gr.final_fidelity - fid_ref) <= 2e-3
        fast = gr.steps <= 20
        better = gr.final_fidelity > float(np.mean(randoms))
        ok &= close and fast and better
        parts.append(
            f"n={n}: F={gr.final_fidelity:.5f} (ref {fid_ref}, {'ok' if close else 'off'}), "
            f"{gr.steps} steps, random mean {np.mean(randoms):.5f}"
        )
    elapsed = time.perf_counter() - start
    ok &= elapsed < 600.0
    report(9, "warm start at n=15, 16", ok, "; ".join(parts) + f" ({elapsed:.1f}s)")


def test_criterion_10_gradient():
    rng = np.random.default_rng(99)
    families = [
        registry_spec("black_scholes"),
        registry_spec("sine"),
        registry_spec("exp_x32"),
        registry_spec("normal", sigma=0.5),
    ]
    draws = 0
    worst = 0.0
    params_checked = 0
    for draw in range(24):
        spec = families[draw % len(families)]
        n = 2 + draw % 7
        p = ("1", "2", "3", "k")[draw % 4]
        ansatz = build_ansatz(spec, n, min(2, n), p)
        target = discretize(spec, n)
        params = rng.uniform(-0.5, math.pi + 0.5, ansatz.num_params)
        fd = central_differences(lambda q: loss(q, target, ansatz), params)
        worst = max(worst, float(np.abs(gradient(params, target, ansatz) - fd).max()))
        draws += 1
        params_checked += ansatz.num_params
    report(10, "analytic gradient vs central differences", worst <= 1e-6 and draws >= 20,
           f"{draws} draws, n<=8, {params_checked} parameters, max abs error {worst:.1e}")


def test_criterion_11_determinism(tmp_path):
    commands = [
        ["load", "--function", "normal", "--params", "sigma=0.4"],
        ["load", "--function", "exp_x32", "--n", "10", "--epsilon", "0.01"],
        ["train", "--function", "black_scholes", "--n", "7", "--init", "random_uniform_0_pi", "--seed", "5", "--max-steps", "300"],
        ["sweep", "--function", "sine", "--n-values", "5", "--p-values", "1,k", "--max-steps", "500"],
        ["heatmap"],
        ["emit", "--function", "black_scholes", "--n", "6", "--variational"],
        ["emit", "--function", "normal", "--n", "5", "--expand"],
    ]
    mismatched = []
    files = 0
    for i, argv in enumerate(commands):
        outs = []
        for rep in ("a", "b"):
            out = tmp_path / f"{i}{rep}"
            assert main([*argv, "--out", str(out)]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        files += len(outs[0])
        if outs[0] != outs[1]:
            mismatched.append(argv[0])
    report(11, "byte-identical CLI reruns", not mismatched,
           f"{len(commands)} commands, {files} artifacts, mismatches: {mismatched or 'none'}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
