"""Diagonal Ising Hamiltonian H = sum_i C_i^2 over the surviving bits.

Qubit k carries the k-th surviving variable, and bit k of a basis index is
qubit k.  The canonical form is a multilinear polynomial in bits; the Pauli-Z
form follows from b = (1 - Z) / 2.
"""
from __future__ import annotations

import json
import struct
import threading
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from . import _poly
from .errors import AlreadySolved, LengthMismatch, TooManyQubits
from .preprocess import ReducedSystem, apply_ledger, factors_of

MAX_DENSE_QUBITS = 26
_CHUNK = 1 << 20


class DiagonalHamiltonian:
    """Bit polynomial with a lazily computed, memoized energy table."""

    def __init__(self, n: int, poly: Mapping, labels: Sequence[str] | None = None,
                 clauses: Sequence[Mapping] | None = None):
        self.n = int(n)
        self.poly = {frozenset(int(i) for i in k): float(c) for k, c in poly.items() if c}
        for k in self.poly:
            if any(not 0 <= i < self.n for i in k):
                raise ValueError(f"monomial {sorted(k)} outside {self.n} qubits")
        self.labels = tuple(labels) if labels is not None else tuple(f"x{i}" for i in range(self.n))
        # integer clause polynomials, kept for a faster dense evaluation
        self._clauses = None if clauses is None else [dict(c) for c in clauses]
        self._dense = None
        self._lock = threading.Lock()

    def __getstate__(self):
        state = dict(self.__dict__)
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    def __repr__(self):
        return f"DiagonalHamiltonian(n={self.n}, terms={len(self.poly)})"

    @property
    def degree(self) -> int:
        return max((len(k) for k in self.poly), default=0)

    @property
    def dense(self):
        return self._dense

    def is_constant(self) -> bool:
        return all(not k for k in self.poly)

    def to_pauli(self) -> dict:
        """Coefficients of Z-products, keyed by frozensets of qubit indices."""
        out: dict = {}
        for mono, c in self.poly.items():
            scale = c / 2 ** len(mono)
            for r in range(len(mono) + 1):
                for sub in combinations(sorted(mono), r):
                    _poly.add_term(out, sub, scale * (-1) ** r)
        return out

    @classmethod
    def from_pauli(cls, n: int, zpoly: Mapping) -> "DiagonalHamiltonian":
        """Build from Z-product coefficients using Z = 1 - 2b."""
        out: dict = {}
        for mono, c in zpoly.items():
            term = {frozenset(): float(c)}
            for i in mono:
                term = _poly.mul(term, {frozenset(): 1.0, frozenset([i]): -2.0})
            out = _poly.add(out, term)
        return cls(n, out)

    def to_dict(self) -> dict:
        terms = sorted(([sorted(k), c] for k, c in self.poly.items()), key=lambda t: (len(t[0]), t[0]))
        return {"n": self.n, "labels": list(self.labels), "terms": terms}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: Mapping) -> "DiagonalHamiltonian":
        return cls(d["n"], {frozenset(k): c for k, c in d["terms"]}, d.get("labels"))


def from_clauses(clauses: Sequence[Mapping], variables: Sequence) -> DiagonalHamiltonian:
    """Square and sum clause polynomials (keys are sets of variables)."""
    index = {v: k for k, v in enumerate(variables)}
    int_clauses = []
    poly: dict = {}
    for c in clauses:
        terms = c.terms if hasattr(c, "terms") else c
        ic = {frozenset(index[v] for v in k): int(coef) for k, coef in terms.items()}
        int_clauses.append(ic)
        poly = _poly.add(poly, _poly.mul(ic, ic))
    labels = [getattr(v, "name", str(v)) for v in variables]
    return DiagonalHamiltonian(len(variables), poly, labels, int_clauses)


def quantize(reduced: ReducedSystem) -> DiagonalHamiltonian:
    if reduced.qubit_count == 0:
        full = apply_ledger(reduced.ledger, {})
        raise AlreadySolved(factors_of(reduced, full))
    return from_clauses(reduced.clauses, reduced.variables)


def _eval_chunk(polys, n, start, stop, square):
    x = np.arange(start, stop, dtype=np.int64)
    bits = [((x >> k) & 1) for k in range(n)]
    total = np.zeros(stop - start, dtype=np.float64)
    for poly in polys:
        acc = np.zeros(stop - start, dtype=np.int64 if square else np.float64)
        for mono, c in poly.items():
            if not mono:
                acc += c
                continue
            it = iter(mono)
            t = bits[next(it)].copy()
            for i in it:
                t &= bits[i]
            acc += c * t
        total += acc.astype(np.float64) ** 2 if square else acc
    return total


def dense_table(H: DiagonalHamiltonian, cap: int = MAX_DENSE_QUBITS) -> np.ndarray:
    """All 2^n energies, memoized on ``H`` (compute, then publish under a lock)."""
    if H.n > cap:
        raise TooManyQubits(f"{H.n} qubits exceeds dense cap {cap}")
    table = H._dense
    if table is not None:
        return table
    size = 1 << H.n
    out = np.empty(size, dtype=np.float64)
    for start in range(0, size, _CHUNK):
        stop = min(size, start + _CHUNK)
        if H._clauses is not None:
            out[start:stop] = _eval_chunk(H._clauses, H.n, start, stop, True)
        else:
            out[start:stop] = _eval_chunk([H.poly], H.n, start, stop, False)
    out.setflags(write=False)
    with H._lock:
        if H._dense is None:
            H._dense = out
        return H._dense


def poly_energy(H: DiagonalHamiltonian, index: int) -> float:
    return float(sum(c for k, c in H.poly.items() if all((index >> i) & 1 for i in k)))


def state_index(bits, n: int) -> int:
    """Basis index of a bit string (character or element k is qubit k)."""
    if isinstance(bits, (int, np.integer)):
        idx = int(bits)
        if not 0 <= idx < (1 << n):
            raise LengthMismatch(f"index {idx} outside {n} qubits")
        return idx
    seq = [int(ch) for ch in bits] if isinstance(bits, str) else [int(b) for b in bits]
    if len(seq) != n:
        raise LengthMismatch(f"expected {n} bits, got {len(seq)}")
    if any(b not in (0, 1) for b in seq):
        raise ValueError("bits must be 0 or 1")
    return sum(b << k for k, b in enumerate(seq))


def index_bits(index: int, n: int) -> str:
    return "".join(str((index >> k) & 1) for k in range(n))


def energy(H: DiagonalHamiltonian, basis_state) -> float:
    idx = state_index(basis_state, H.n)
    if H._dense is not None:
        return float(H._dense[idx])
    return poly_energy(H, idx)


def trace(H: DiagonalHamiltonian) -> float:
    return 2.0**H.n * H.to_pauli().get(frozenset(), 0.0)


def trace_sq(H: DiagonalHamiltonian) -> float:
    return 2.0**H.n * sum(c * c for c in H.to_pauli().values())


def haar_mean(H: DiagonalHamiltonian) -> float:
    return trace(H) / 2.0**H.n


def haar_variance(H: DiagonalHamiltonian) -> float:
    d = 2.0**H.n
    t, t2 = trace(H), trace_sq(H)
    return max(0.0, (d * t2 - t * t) / (d * d * (d + 1)))


def grad_variance(H: DiagonalHamiltonian) -> float:
    """Closed-form gradient variance tr(H^2) / 2^(3n-2) for Pauli-generated gates.

    A constant H has zero true gradient, so it is rejected.
    """
    if H.is_constant():
        raise ValueError("gradient variance formula does not apply to a constant Hamiltonian")
    return trace_sq(H) / 2.0 ** (3 * H.n - 2)


def write_dense(path, table: np.ndarray) -> None:
    """Little-endian u64 count followed by float64 energies."""
    table = np.asarray(table, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", table.size))
        fh.write(table.tobytes())


def read_dense(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (count,) = struct.unpack("<Q", fh.read(8))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != count:
        raise ValueError(f"header says {count} values, file holds {data.size}")
    return data.astype(np.float64)
