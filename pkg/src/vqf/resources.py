"""Shot and gate estimates per gradient, qubit-count regimes and the
trial-division baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .encoding import build_clauses, build_instance
from .errors import DegenerateFit, NotBiprime
from .hamiltonian import DiagonalHamiltonian, grad_variance


def shots_per_gradient(H: DiagonalHamiltonian, L: int, epsilon: float) -> float:
    """(L + 1) n Var(dE) / eps^2."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return (L + 1) * H.n * grad_variance(H) / epsilon**2


def gates_per_gradient(H: DiagonalHamiltonian, L: int, epsilon: float) -> float:
    """(L + 1)(2L + 1) n^2 Var(dE) / eps^2."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return (L + 1) * (2 * L + 1) * H.n**2 * grad_variance(H) / epsilon**2


def default_epsilon(H: DiagonalHamiltonian) -> float:
    return math.sqrt(grad_variance(H)) / 100.0


def trial_division(m: int) -> tuple:
    """Divide by 2, 3, 4, ... up to floor(sqrt(m)).

    Returns ``(factor, divisions)``; ``factor`` is None for a prime.
    """
    m = int(m)
    if m < 4:
        raise ValueError("trial division needs m >= 4")
    root = math.isqrt(m)
    used = 0
    for d in range(2, root + 1):
        used += 1
        if m % d == 0:
            return d, used
    return None, used


def trial_division_bound(m: int) -> int:
    return math.isqrt(int(m)) - 1


def is_prime(k: int) -> bool:
    return k >= 2 and (k < 4 or trial_division(k)[0] is None)


def true_factors(m: int) -> tuple:
    """(p, q) with p >= q, both prime; NotBiprime otherwise."""
    m = int(m)
    if m < 4:
        raise NotBiprime(f"{m} is not a biprime")
    f, _ = trial_division(m)
    if f is None or not is_prime(m // f):
        raise NotBiprime(f"{m} is not a product of two primes")
    return max(f, m // f), min(f, m // f)


def odd_biprimes(limit: int, start: int = 9) -> list:
    out = []
    for m in range(start | 1, limit + 1, 2):
        try:
            true_factors(m)
        except NotBiprime:
            continue
        out.append(m)
    return out


class QubitCounts(NamedTuple):
    no_pre_no_prior: int
    no_pre_prior: int
    pre_no_prior: int
    pre_prior: int


REGIMES = QubitCounts._fields


def _count(m, prior, preprocessed):
    from .preprocess import reduce

    inst = build_instance(m, prior, preprocessed)
    return reduce(build_clauses(inst)).qubit_count


def qubit_counts(m: int) -> QubitCounts:
    p, q = true_factors(m)
    prior = (p.bit_length(), q.bit_length())
    return QubitCounts(_count(m, None, False), _count(m, prior, False),
                       _count(m, None, True), _count(m, prior, True))


def extrapolate_qubits(points: Sequence, target_n_m: float) -> float:
    """Least-squares line n = a n_m + b evaluated at ``target_n_m``."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 2 or np.ptp(pts[:, 0]) == 0:
        raise DegenerateFit("need at least two distinct n_m values")
    a, b = np.polyfit(pts[:, 0], pts[:, 1], 1)
    return float(a * target_n_m + b)


@dataclass(frozen=True)
class ResourceEstimate:
    m: int
    n: int
    L: int
    epsilon: float
    shots_per_gradient: float
    gates_per_gradient: float
    trial_division_bound: int

    @property
    def sqrt_m(self) -> float:
        return math.sqrt(self.m)


def estimate(H: DiagonalHamiltonian, m: int, L: int | None = None, epsilon: float | None = None) -> ResourceEstimate:
    """Estimate for ``L`` layers (default L = n) and precision (default sqrt(Var)/100)."""
    L = H.n if L is None else int(L)
    eps = default_epsilon(H) if epsilon is None else float(epsilon)
    return ResourceEstimate(int(m), H.n, L, eps, shots_per_gradient(H, L, eps),
                            gates_per_gradient(H, L, eps), trial_division_bound(m))


__all__ = ["QubitCounts", "ResourceEstimate", "default_epsilon", "estimate",
           "extrapolate_qubits", "gates_per_gradient", "odd_biprimes", "qubit_counts",
           "shots_per_gradient", "trial_division", "trial_division_bound", "true_factors"]
