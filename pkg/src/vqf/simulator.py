"""Exact statevector simulation of the CX, T and QAOA ansatz families.

Conventions: Ry(t) = exp(-i t Y / 2), T = diag(1, e^{i pi/4}), bit k of a basis
index is qubit k.  Parameters of the CX/T ansatz are laid out layer-major:
slot ``l * n + q`` is the rotation on qubit q after l entangling layers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import BadShape, LengthMismatch, SizeMismatch, WrongKind
from . import _kernels
from .hamiltonian import DiagonalHamiltonian, dense_table, index_bits

CX, T, QAOA = "cx", "t", "qaoa"
KINDS = (CX, T, QAOA)
_T_PHASE = np.exp(1j * np.pi / 4)
FD_STEP = 1e-6


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple
    param_slot: int | None = None


@dataclass(frozen=True)
class AnsatzCircuit:
    n: int
    kind: str
    layers: int
    gates: tuple
    param_count: int
    hamiltonian: DiagonalHamiltonian | None = None

    def count(self, name: str) -> int:
        return sum(g.name == name for g in self.gates)

    def to_list(self) -> list:
        return [{"gate": g.name, "qubits": list(g.qubits), "param_slot": g.param_slot} for g in self.gates]

    def to_json(self, **kw) -> str:
        return json.dumps({"n": self.n, "kind": self.kind, "layers": self.layers,
                           "param_count": self.param_count, "gates": self.to_list()}, **kw)


@dataclass
class StateVector:
    n: int
    amplitudes: np.ndarray

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.probabilities()))


@dataclass
class ProductState:
    """One normalized (amp0, amp1) pair per qubit."""

    wires: np.ndarray

    @property
    def n(self) -> int:
        return self.wires.shape[0]

    def one_probabilities(self) -> np.ndarray:
        return np.abs(self.wires[:, 1]) ** 2

    def to_statevector(self) -> StateVector:
        out = np.ones(1, dtype=complex)
        for q in range(self.n):
            out = np.kron(self.wires[q], out)
        return StateVector(self.n, out)


def _check_shape(n, L, min_n):
    if int(n) != n or int(L) != L or n < min_n or L < 0:
        raise BadShape(f"invalid ansatz shape n={n}, L={L}")


def _rotation_layer(n, layer):
    return [Gate("ry", (q,), layer * n + q) for q in range(n)]


def build_cx_ansatz(n: int, L: int) -> AnsatzCircuit:
    """Ry layer, then L x {cyclic CX staircase; Ry layer}."""
    _check_shape(n, L, 2 if L >= 1 else 1)
    gates = _rotation_layer(n, 0)
    for layer in range(1, L + 1):
        gates += [Gate("cx", (q, (q + 1) % n)) for q in range(n)]
        gates += _rotation_layer(n, layer)
    return AnsatzCircuit(n, CX, L, tuple(gates), (L + 1) * n)


def build_t_ansatz(n: int, L: int) -> AnsatzCircuit:
    """Ry layer, then L x {T on every qubit; Ry layer}."""
    _check_shape(n, L, 1)
    gates = _rotation_layer(n, 0)
    for layer in range(1, L + 1):
        gates += [Gate("t", (q,)) for q in range(n)]
        gates += _rotation_layer(n, layer)
    return AnsatzCircuit(n, T, L, tuple(gates), (L + 1) * n)


def build_qaoa_ansatz(H: DiagonalHamiltonian, depth: int) -> AnsatzCircuit:
    """|+>^n, then per layer j: exp(-i gamma_j H), Rx(2 beta_j) on all qubits.

    Slots: gamma_j = 2j, beta_j = 2j + 1.
    """
    if int(depth) != depth or depth < 1:
        raise BadShape(f"QAOA depth must be >= 1, got {depth}")
    n = H.n
    gates = [Gate("h", (q,)) for q in range(n)]
    for j in range(depth):
        gates.append(Gate("phase", tuple(range(n)), 2 * j))
        gates += [Gate("rx", (q,), 2 * j + 1) for q in range(n)]
    dense_table(H)
    return AnsatzCircuit(n, QAOA, int(depth), tuple(gates), 2 * int(depth), H)


# ---------------------------------------------------------------- kernels

def apply_ry(psi: np.ndarray, q: int, theta: float) -> None:
    v = psi.reshape(-1, 2, 1 << q)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    a = v[:, 0, :].copy()
    b = v[:, 1, :]
    v[:, 0, :] = c * a - s * b
    v[:, 1, :] = s * a + c * b


def apply_rx(psi: np.ndarray, q: int, angle: float) -> None:
    v = psi.reshape(-1, 2, 1 << q)
    c, s = np.cos(angle / 2), -1j * np.sin(angle / 2)
    a = v[:, 0, :].copy()
    b = v[:, 1, :]
    v[:, 0, :] = c * a + s * b
    v[:, 1, :] = s * a + c * b


def apply_t(psi: np.ndarray, q: int, inverse: bool = False) -> None:
    v = psi.reshape(-1, 2, 1 << q)
    v[:, 1, :] *= np.conj(_T_PHASE) if inverse else _T_PHASE


def _ry_generator(psi: np.ndarray, q: int) -> np.ndarray:
    """(-i Y / 2) psi, which is d/dt Ry(t) Ry(t)^dagger applied to psi."""
    v = psi.reshape(-1, 2, 1 << q)
    out = np.empty_like(v)
    out[:, 0, :] = -0.5 * v[:, 1, :]
    out[:, 1, :] = 0.5 * v[:, 0, :]
    return out.reshape(-1)


@lru_cache(maxsize=64)
def _cx_permutation(n: int, pairs: tuple) -> tuple:
    """Gather indices for a run of CX gates and for its inverse."""
    x = np.arange(1 << n, dtype=np.int64)
    y = x.copy()
    for c, t in pairs:
        y ^= ((y >> c) & 1) << t
    # the new state is psi_new[y(x)] = psi[x]
    fwd = np.empty_like(x)
    fwd[y] = x
    inv = y
    fwd.setflags(write=False)
    inv.setflags(write=False)
    return fwd, inv


def _compile(circuit: AnsatzCircuit) -> list:
    """Group consecutive CX gates into single permutations."""
    ops: list = []
    run: list = []
    for g in circuit.gates:
        if g.name == "cx":
            run.append(g.qubits)
            continue
        if run:
            ops.append(("perm", _cx_permutation(circuit.n, tuple(run))))
            run = []
        ops.append((g.name, g.qubits, g.param_slot))
    if run:
        ops.append(("perm", _cx_permutation(circuit.n, tuple(run))))
    return ops


_PLANS: dict = {}


def _plan(circuit: AnsatzCircuit) -> list:
    key = id(circuit)
    hit = _PLANS.get(key)
    if hit is None or hit[0] is not circuit:
        hit = (circuit, _compile(circuit))
        if len(_PLANS) > 256:
            _PLANS.clear()
        _PLANS[key] = hit
    return hit[1]


def _check_params(circuit: AnsatzCircuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64).reshape(-1)
    if params.size != circuit.param_count:
        raise LengthMismatch(f"expected {circuit.param_count} parameters, got {params.size}")
    return params


def _initial(circuit: AnsatzCircuit) -> np.ndarray:
    dtype = np.float64 if circuit.kind == CX else np.complex128
    psi = np.zeros(1 << circuit.n, dtype=dtype)
    psi[0] = 1.0
    return psi


def _forward(circuit: AnsatzCircuit, params: np.ndarray) -> np.ndarray:
    psi = _initial(circuit)
    table = dense_table(circuit.hamiltonian) if circuit.kind == QAOA else None
    for op in _plan(circuit):
        name = op[0]
        if name == "ry":
            apply_ry(psi, op[1][0], params[op[2]])
        elif name == "perm":
            psi = psi[op[1][0]]
        elif name == "t":
            apply_t(psi, op[1][0])
        elif name == "h":
            # only ever applied to |0...0>, where it yields the uniform state
            continue
        elif name == "phase":
            psi *= np.exp(-1j * params[op[2]] * table)
        elif name == "rx":
            apply_rx(psi, op[1][0], 2 * params[op[2]])
    return psi


def run(circuit: AnsatzCircuit, params) -> StateVector:
    params = _check_params(circuit, params)
    if circuit.kind == QAOA:
        psi = np.full(1 << circuit.n, 2 ** (-circuit.n / 2), dtype=np.complex128)
        table = dense_table(circuit.hamiltonian)
        for j in range(circuit.layers):
            psi *= np.exp(-1j * params[2 * j] * table)
            for q in range(circuit.n):
                apply_rx(psi, q, 2 * params[2 * j + 1])
        return StateVector(circuit.n, psi)
    psi = _forward(circuit, params)
    return StateVector(circuit.n, psi.astype(np.complex128))


def _energy_table(H: DiagonalHamiltonian, n: int) -> np.ndarray:
    if H.n != n:
        raise SizeMismatch(f"Hamiltonian on {H.n} qubits, state on {n}")
    return dense_table(H)


def expectation(state: StateVector, H: DiagonalHamiltonian) -> float:
    table = _energy_table(H, state.n)
    return float(np.dot(np.abs(state.amplitudes) ** 2, table))


def energy_at(circuit: AnsatzCircuit, params, H: DiagonalHamiltonian) -> float:
    """E(theta) without materialising a StateVector copy."""
    params = _check_params(circuit, params)
    if circuit.kind == T:
        return product_energy(run_product(circuit, params), H)
    if circuit.kind == QAOA:
        return expectation(run(circuit, params), H)
    table = _energy_table(H, circuit.n)
    psi = _kernels.cx_forward(*_cx_args(circuit, params))
    return float(np.dot(psi * psi, table))


def _staircase(n: int) -> tuple:
    return _cx_permutation(n, tuple((q, (q + 1) % n) for q in range(n)))


def _cx_args(circuit: AnsatzCircuit, params: np.ndarray) -> tuple:
    fwd, _ = _staircase(circuit.n)
    return params.reshape(circuit.layers + 1, circuit.n), circuit.n, circuit.layers, fwd


def sample_indices(state: StateVector, shots: int, seed) -> np.ndarray:
    if shots < 1:
        raise ValueError("shot count must be >= 1")
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    return rng.choice(probs.size, size=int(shots), p=probs)


def sample(state: StateVector, shots: int, seed) -> list:
    """Bit strings with character k giving qubit k."""
    return [index_bits(int(i), state.n) for i in sample_indices(state, shots, seed)]


# ---------------------------------------------------------------- gradients

def _adjoint_gradient(circuit: AnsatzCircuit, params: np.ndarray, table: np.ndarray) -> tuple:
    psi = _forward(circuit, params)
    lam = table * psi
    value = float(np.real(np.vdot(psi, lam)))
    grad = np.zeros(circuit.param_count)
    for op in reversed(_plan(circuit)):
        name = op[0]
        if name == "ry":
            q, slot = op[1][0], op[2]
            grad[slot] = 2.0 * np.real(np.vdot(lam, _ry_generator(psi, q)))
            apply_ry(psi, q, -params[slot])
            apply_ry(lam, q, -params[slot])
        elif name == "perm":
            inv = op[1][1]
            psi = psi[inv]
            lam = lam[inv]
        elif name == "t":
            apply_t(psi, op[1][0], inverse=True)
            apply_t(lam, op[1][0], inverse=True)
    return value, grad


def _shift_gradient(circuit, params, H) -> np.ndarray:
    grad = np.empty(circuit.param_count)
    for k in range(circuit.param_count):
        up, down = params.copy(), params.copy()
        up[k] += np.pi / 2
        down[k] -= np.pi / 2
        grad[k] = 0.5 * (energy_at(circuit, up, H) - energy_at(circuit, down, H))
    return grad


def _fd_gradient(circuit, params, H, h=FD_STEP) -> np.ndarray:
    grad = np.empty(circuit.param_count)
    for k in range(circuit.param_count):
        up, down = params.copy(), params.copy()
        up[k] += h
        down[k] -= h
        grad[k] = (energy_at(circuit, up, H) - energy_at(circuit, down, H)) / (2 * h)
    return grad


def value_and_gradient(circuit: AnsatzCircuit, params, H: DiagonalHamiltonian,
                       method: str = "auto") -> tuple:
    """Energy and its gradient.

    ``method``: "shift" (literal parameter-shift rule), "adjoint" (reverse-mode
    sweep, identical values for Ry gates), "product" (T circuits only),
    "fd" (central differences, step 1e-6) or "auto".
    """
    params = _check_params(circuit, params)
    if method == "auto":
        method = {CX: "adjoint", T: "product", QAOA: "fd"}[circuit.kind]
    if circuit.kind == QAOA and method not in ("fd",):
        raise WrongKind("QAOA gradients use finite differences")
    if method == "adjoint":
        table = _energy_table(H, circuit.n)
        if circuit.kind == CX:
            theta, n, L, fwd = _cx_args(circuit, params)
            value, grad = _kernels.cx_value_grad(theta, n, L, table, fwd, _staircase(n)[1])
            return float(value), grad.reshape(-1)
        return _adjoint_gradient(circuit, params, table)
    if method == "product":
        return product_value_and_gradient(circuit, params, H)
    if method == "shift":
        return energy_at(circuit, params, H), _shift_gradient(circuit, params, H)
    if method == "fd":
        return energy_at(circuit, params, H), _fd_gradient(circuit, params, H)
    raise ValueError(f"unknown gradient method {method!r}")


def gradient(circuit: AnsatzCircuit, params, H: DiagonalHamiltonian, method: str = "auto") -> np.ndarray:
    return value_and_gradient(circuit, params, H, method)[1]


# ---------------------------------------------------------------- product states

def _wire_forward(circuit: AnsatzCircuit, params: np.ndarray) -> list:
    n, L = circuit.n, circuit.layers
    theta = params.reshape(L + 1, n)
    cur = np.zeros((n, 2), dtype=np.complex128)
    cur[:, 0] = 1.0
    states = []
    for layer in range(L + 1):
        if layer:
            cur[:, 1] *= _T_PHASE
        c, s = np.cos(theta[layer] / 2), np.sin(theta[layer] / 2)
        a, b = cur[:, 0].copy(), cur[:, 1].copy()
        cur[:, 0] = c * a - s * b
        cur[:, 1] = s * a + c * b
        states.append(cur.copy())
    return states


def run_product(circuit: AnsatzCircuit, params) -> ProductState:
    if circuit.kind != T:
        raise WrongKind("product-state simulation needs a T circuit")
    params = _check_params(circuit, params)
    return ProductState(_wire_forward(circuit, params)[-1])


@lru_cache(maxsize=64)
def _grouped_terms(H: DiagonalHamiltonian) -> list:
    groups: dict = {}
    for mono, c in H.poly.items():
        groups.setdefault(len(mono), []).append((sorted(mono), c))
    out = []
    for d, items in sorted(groups.items()):
        idx = np.array([m for m, _ in items], dtype=np.int64).reshape(len(items), d)
        coef = np.array([c for _, c in items])
        out.append((d, idx, coef))
    return out


def product_energy(state: ProductState, H: DiagonalHamiltonian) -> float:
    if H.n != state.n:
        raise SizeMismatch(f"Hamiltonian on {H.n} qubits, state on {state.n}")
    P = state.one_probabilities()
    total = 0.0
    for d, idx, coef in _grouped_terms(H):
        total += float(coef.sum()) if d == 0 else float(np.dot(coef, P[idx].prod(axis=1)))
    return total


def _energy_and_dP(P: np.ndarray, H: DiagonalHamiltonian) -> tuple:
    value = 0.0
    dP = np.zeros_like(P)
    for d, idx, coef in _grouped_terms(H):
        if d == 0:
            value += float(coef.sum())
            continue
        vals = P[idx]
        value += float(np.dot(coef, vals.prod(axis=1)))
        for j in range(d):
            others = np.delete(vals, j, axis=1).prod(axis=1)
            np.add.at(dP, idx[:, j], coef * others)
    return value, dP


def product_value_and_gradient(circuit: AnsatzCircuit, params, H: DiagonalHamiltonian) -> tuple:
    """Exact energy and gradient of a T circuit from its product form."""
    if circuit.kind != T:
        raise WrongKind("product-state gradient needs a T circuit")
    params = _check_params(circuit, params)
    if H.n != circuit.n:
        raise SizeMismatch(f"Hamiltonian on {H.n} qubits, circuit on {circuit.n}")
    n, L = circuit.n, circuit.layers
    theta = params.reshape(L + 1, n)
    states = _wire_forward(circuit, params)
    final = states[-1]
    value, dE_dP = _energy_and_dP(np.abs(final[:, 1]) ** 2, H)
    # reverse sweep per wire for d|amp1|^2 / d theta_l
    lam = np.zeros_like(final)
    lam[:, 1] = final[:, 1]
    psi = final.copy()
    dP = np.zeros((L + 1, n))
    for layer in range(L, -1, -1):
        dP[layer] = 2.0 * np.real(np.conj(lam[:, 1]) * 0.5 * psi[:, 0] - np.conj(lam[:, 0]) * 0.5 * psi[:, 1])
        c, s = np.cos(theta[layer] / 2), np.sin(theta[layer] / 2)
        for arr in (psi, lam):
            a, b = arr[:, 0].copy(), arr[:, 1].copy()
            arr[:, 0] = c * a + s * b
            arr[:, 1] = -s * a + c * b
        if layer:
            psi[:, 1] *= np.conj(_T_PHASE)
            lam[:, 1] *= np.conj(_T_PHASE)
    grad = dP * dE_dP[None, :]
    return value, grad.reshape(-1)


def gate_census(circuit: AnsatzCircuit) -> dict:
    return {name: circuit.count(name) for name in sorted({g.name for g in circuit.gates})}


def haar_state(n: int, rng: np.random.Generator) -> StateVector:
    """Haar-random state from a normalized complex Gaussian vector."""
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(n, v / np.linalg.norm(v))


def uniform_state(n: int) -> StateVector:
    return StateVector(n, np.full(1 << n, 2 ** (-n / 2), dtype=np.complex128))


def basis_state(n: int, index: int) -> StateVector:
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n, amps)


def expectation_batch(circuits: Sequence, params_list: Sequence, H: DiagonalHamiltonian) -> np.ndarray:
    return np.array([energy_at(c, p, H) for c, p in zip(circuits, params_list)])
