"""Acceptance criteria 1-10.  Each test records one PASS/FAIL line in the
terminal summary; tolerances are pinned at module level."""
import functools
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE, hamiltonian_for, random_hamiltonian, reduced_for
from vqf.analysis import build_manifold, decode_state, manifold_energy_stats
from vqf.cli import main
from vqf.hamiltonian import dense_table, haar_mean, haar_variance, quantize
from vqf.optimizer import multistart
from vqf.resources import estimate, odd_biprimes, true_factors
from vqf.simulator import (build_cx_ansatz, build_qaoa_ansatz, build_t_ansatz, expectation, gradient,
                           product_energy, run, run_product)

TARGETS = (25, 49, 91, 247)
EXPECTED_QUBITS = {25: 6, 49: 8, 91: 10, 247: 13}
MAX_QUBIT_DEVIATION = 1
HAAR_SAMPLES = 100_000
HAAR_SIGMAS = 4.0
GRAD_ATOL = 1e-6
PRODUCT_ATOL = 1e-10
MANIFOLD_TARGETS = (15.9, 17.8)
MANIFOLD_ATOL = 0.5
RESOURCE_RATIO = 1e2
RESTARTS = 100
SEED = 0
QAOA_DEPTHS = (1, 2, 3, 4, 5)
VQE_LAYERS = 10


def record(k, ok, detail):
    ACCEPTANCE[k] = (bool(ok), detail)
    assert ok, detail


@functools.lru_cache(maxsize=None)
def ensemble(m, kind, L):
    H = hamiltonian_for(m)
    if kind == "cx":
        circuit = build_cx_ansatz(H.n, L)
    elif kind == "t":
        circuit = build_t_ansatz(H.n, L)
    else:
        circuit = build_qaoa_ansatz(H, L)
    return multistart(circuit, H, RESTARTS, SEED)


def test_criterion_01_factoring_correctness():
    t0 = time.perf_counter()
    bad, checked = [], 0
    for m in odd_biprimes(255):
        p, q = true_factors(m)
        for prior in (None, (p.bit_length(), q.bit_length())):
            r = reduced_for(m, prior)
            checked += 1
            if r.qubit_count == 0:
                got = decode_state(r, 0)
                ok = got == (p, q)
            else:
                table = dense_table(quantize(r))
                idx = int(np.argmin(table))
                got = decode_state(r, idx)
                ok = table[idx] == 0.0 and got is not None and got[0] * got[1] == m
            if not ok:
                bad.append((m, prior, got))
    dt = time.perf_counter() - t0
    record(1, not bad and dt < 60, f"{checked} instances, {len(bad)} wrong, {dt:.1f}s")


def test_criterion_02_qubit_counts():
    got = {m: reduced_for(m).qubit_count for m in TARGETS}
    dev = {m: got[m] - EXPECTED_QUBITS[m] for m in TARGETS}
    exact = all(d == 0 for d in dev.values())
    within = all(abs(d) <= MAX_QUBIT_DEVIATION for d in dev.values())
    detail = ", ".join(f"m={m}: {got[m]} (target {EXPECTED_QUBITS[m]})" for m in TARGETS)
    detail += "; exact" if exact else ("; deviation <= 1" if within else "; deviation > 1")
    record(2, within, detail)


def test_criterion_03_haar_statistics():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for k in range(5):
        n = 2 + k  # 2..6 qubits
        H = random_hamiltonian(n, rng)
        table = dense_table(H)
        z = rng.normal(size=(HAAR_SAMPLES, 1 << n)) + 1j * rng.normal(size=(HAAR_SAMPLES, 1 << n))
        probs = np.abs(z) ** 2
        probs /= probs.sum(axis=1, keepdims=True)
        e = probs @ table
        mu, var = e.mean(), e.var(ddof=1)
        se_mu = e.std(ddof=1) / math.sqrt(HAAR_SAMPLES)
        se_var = math.sqrt(max(np.mean((e - mu) ** 4) - var**2, 0.0) / HAAR_SAMPLES)
        worst = max(worst, abs(mu - haar_mean(H)) / se_mu, abs(var - haar_variance(H)) / se_var)
    dt = time.perf_counter() - t0
    record(3, worst <= HAAR_SIGMAS and dt < 120, f"max deviation {worst:.2f} SE (limit {HAAR_SIGMAS}), {dt:.1f}s")


def test_criterion_04_gradient_correctness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    worst = 0.0
    for k in range(20):
        n = 2 + k % 7  # 2..8 qubits
        H = random_hamiltonian(n, rng)
        circuit = build_cx_ansatz(n, n) if k % 2 == 0 else build_t_ansatz(n, n)
        theta = rng.uniform(0, 2 * np.pi, circuit.param_count)
        shift = gradient(circuit, theta, H, "shift")
        fd = gradient(circuit, theta, H, "fd")
        worst = max(worst, float(np.max(np.abs(shift - fd))))
    dt = time.perf_counter() - t0
    record(4, worst <= GRAD_ATOL and dt < 120, f"max |shift - fd| = {worst:.2e} (limit {GRAD_ATOL:g}), {dt:.1f}s")


def test_criterion_05_product_fast_path():
    rng = np.random.default_rng(5)
    worst = 0.0
    for k in range(50):
        n = 1 + k % 10
        L = int(rng.integers(0, 6))
        H = random_hamiltonian(n, rng)
        circuit = build_t_ansatz(n, L)
        theta = rng.uniform(0, 2 * np.pi, circuit.param_count)
        worst = max(worst, abs(product_energy(run_product(circuit, theta), H) - expectation(run(circuit, theta), H)))
    record(5, worst <= PRODUCT_ATOL, f"max |product - statevector| = {worst:.2e} (limit {PRODUCT_ATOL:g})")


@pytest.mark.slow
def test_criterion_06_vqe_beats_qaoa():
    vqe = ensemble(91, "cx", VQE_LAYERS)
    qaoa = {p: ensemble(91, "qaoa", p) for p in QAOA_DEPTHS}
    mean_ok = all(vqe.mean < s.mean for s in qaoa.values())
    q05_ok = all(vqe.q05 < s.q05 for s in qaoa.values())
    detail = f"cx L={VQE_LAYERS}: mean {vqe.mean:.3f} q05 {vqe.q05:.3f}; " + ", ".join(
        f"qaoa p={p}: {s.mean:.3f}/{s.q05:.3f}" for p, s in qaoa.items())
    record(6, mean_ok and q05_ok, detail)


def test_criterion_07_manifold_energies():
    r = reduced_for(91)
    mean_in, mean_out = manifold_energy_stats(build_manifold(r, 91), quantize(r))
    detail = f"m=91: mean_in {mean_in:.3f} (target 15.9), mean_out {mean_out:.3f} (target 17.8)"
    if r.qubit_count != EXPECTED_QUBITS[91]:
        # contingent criterion: values are reported without a verdict
        ACCEPTANCE[7] = (True, detail + "; reported only, qubit count differs")
        return
    ok = abs(mean_in - MANIFOLD_TARGETS[0]) <= MANIFOLD_ATOL and abs(mean_out - MANIFOLD_TARGETS[1]) <= MANIFOLD_ATOL
    record(7, ok, detail)


def test_criterion_08_resource_dominance():
    parts, ok = [], True
    for m in TARGETS:
        H = hamiltonian_for(m)
        est = estimate(H, m)
        bound = math.isqrt(m) - 1
        ratio = est.shots_per_gradient / bound
        identity = math.isclose(est.shots_per_gradient, (H.n + 1) * H.n * 1e4, rel_tol=1e-12)
        ok &= ratio > RESOURCE_RATIO and identity
        parts.append(f"m={m}: {est.shots_per_gradient:.3g} shots / {bound} divisions = {ratio:.3g}")
    record(8, ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_09_convergence_trends():
    cx = {m: ensemble(m, "cx", hamiltonian_for(m).n) for m in TARGETS}
    t = {m: ensemble(m, "t", hamiltonian_for(m).n) for m in TARGETS}
    evals = [cx[m].mean_grad_evals for m in TARGETS]
    monotone = all(a <= b for a, b in zip(evals, evals[1:]))
    more = cx[247].mean_grad_evals > t[247].mean_grad_evals
    band = t[247].q05 <= cx[247].q05 and t[247].q95 <= cx[247].q95
    detail = ("cx grads " + "/".join(f"{e:.1f}" for e in evals)
              + f"; t grads at 247 {t[247].mean_grad_evals:.1f}"
              + f"; band at 247 cx [{cx[247].q05:.3f}, {cx[247].q95:.3f}] t [{t[247].q05:.3f}, {t[247].q95:.3f}]")
    record(9, monotone and more and band, detail)


def test_criterion_10_determinism(tmp_path):
    commands = [["optimize", "91", "--ansatz", "cx", "--ansatz", "t", "--ansatz", "qaoa", "--layers", "1,2",
                 "--restarts", "4", "--seed", "11"],
                ["resources", *map(str, TARGETS)],
                ["manifold", *map(str, TARGETS)]]
    files = {"optimize": ("runs.csv", "stats.csv"), "resources": ("qubits.csv", "resources.csv"),
             "manifold": ("manifold.csv",)}
    same = True
    for argv in commands:
        outs = []
        for rep in ("a", "b"):
            d = tmp_path / f"{argv[0]}_{rep}"
            assert main(argv + ["--out", str(d)]) == 0
            outs.append({f: (d / f).read_bytes() for f in files[argv[0]]})
        same &= outs[0] == outs[1]
    record(10, same, "optimize, resources and manifold reruns " + ("byte-identical" if same else "differ"))
