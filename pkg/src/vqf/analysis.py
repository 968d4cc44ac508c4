"""Solution manifold: basis states with a correct p factor or a correct q
factor, plus decoding of reduced assignments into factor pairs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import FactoringInstance, integers_from_bits
from .errors import NonBinarySubstitution, SizeMismatch, TooManyQubits
from .hamiltonian import MAX_DENSE_QUBITS, DiagonalHamiltonian, dense_table
from .preprocess import AssignmentLedger, ReducedSystem, apply_ledger, push_batch
from .resources import true_factors
from .simulator import StateVector


def reference_factors(m: int) -> tuple:
    return true_factors(m)


@dataclass(frozen=True)
class SolutionManifold:
    n: int
    members: np.ndarray
    reference_factors: tuple

    @property
    def member_states(self) -> frozenset:
        return frozenset(int(x) for x in np.flatnonzero(self.members))

    @property
    def fraction(self) -> float:
        return float(self.members.mean())

    def __contains__(self, index) -> bool:
        return bool(self.members[int(index)])


def decoded_integers(reduced: ReducedSystem) -> tuple:
    """(p, q, valid) arrays over all 2^n reduced basis states."""
    n = reduced.qubit_count
    if n > MAX_DENSE_QUBITS:
        raise TooManyQubits(f"{n} qubits exceeds dense cap {MAX_DENSE_QUBITS}")
    states = np.arange(1 << n, dtype=np.int64)
    vals, valid = push_batch(reduced, states)
    p, q = integers_from_bits(vals, reduced.instance)
    return np.asarray(p) * np.ones_like(states), np.asarray(q) * np.ones_like(states), valid


def build_manifold(reduced: ReducedSystem, m: int) -> SolutionManifold:
    factors = reference_factors(m)
    p, q, valid = decoded_integers(reduced)
    members = valid & (np.isin(p, factors) | np.isin(q, factors))
    members.setflags(write=False)
    return SolutionManifold(reduced.qubit_count, members, factors)


def manifold_energy_stats(manifold: SolutionManifold, H: DiagonalHamiltonian) -> tuple:
    if H.n != manifold.n:
        raise SizeMismatch(f"Hamiltonian on {H.n} qubits, manifold on {manifold.n}")
    table = dense_table(H)
    inside, outside = table[manifold.members], table[~manifold.members]
    mean_in = float(inside.mean()) if inside.size else float("nan")
    mean_out = float(outside.mean()) if outside.size else float("nan")
    return mean_in, mean_out


def overlap(state: StateVector, manifold: SolutionManifold) -> float:
    if state.n != manifold.n:
        raise SizeMismatch(f"state on {state.n} qubits, manifold on {manifold.n}")
    probs = np.abs(state.amplitudes) ** 2
    return float(min(1.0, max(0.0, probs[manifold.members].sum())))


def decode(reduced_assignment, ledger: AssignmentLedger, instance: FactoringInstance,
           variables=None):
    """Factor pair (p, q) with p >= q if the assignment factors m, else None."""
    try:
        full = apply_ledger(ledger, reduced_assignment, variables)
        p, q = integers_from_bits(full, instance)
    except (NonBinarySubstitution, KeyError):
        return None
    p, q = max(p, q), min(p, q)
    if 1 < q <= p < instance.m and p * q == instance.m:
        return int(p), int(q)
    return None


def decode_state(reduced: ReducedSystem, index: int):
    bits = [(int(index) >> k) & 1 for k in range(reduced.qubit_count)]
    return decode(bits, reduced.ledger, reduced.instance, reduced.variables)


def ground_states(H: DiagonalHamiltonian, atol: float = 0.0) -> np.ndarray:
    table = dense_table(H)
    return np.flatnonzero(table <= table.min() + atol)
