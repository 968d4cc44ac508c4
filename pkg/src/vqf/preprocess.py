"""Polynomial-time simplification of a clause system.

A FIFO work-list visits clauses in column order.  Each visited clause is
checked for infeasibility and then offered to the rules below in priority
order; the first rule that applies fires, its variable eliminations are
substituted everywhere, and every clause that changed is queued again.

    R1 unit          c*x - c = 0 -> x := 1;  c*x = 0 -> x := 0
    R2 product-one   c*x*y - c = 0 -> x := y := 1
    R3 nonneg-sum    constant 0, all coefficients one sign -> every monomial 0
    R4 sum-to-one    x + y - 1 = 0 -> x := 1 - y
    R4b equality     x - y = 0 -> x := y
    R4c average      x + y - 2z = 0 -> x := z  (R4b then gives y := z)
    R5 carry kill    a carry whose term cannot fit inside the bounds -> z := 0
    R6 infeasible    bounds exclude zero -> Infeasible

In R4/R4b the earlier variable in canonical order is the one eliminated.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from . import _poly
from .encoding import (BitVar, Clause, ClauseSystem, FactoringInstance, _parse_system_dict,
                       _system_dict, integers_from_bits)
from .errors import Infeasible, LengthMismatch, NonBinarySubstitution

ONE = _poly.ONE


@dataclass(frozen=True)
class AssignmentLedger:
    """Eliminated variables and how to recover them.

    ``substitutions`` hold affine expressions (dict monomial -> int with
    monomials of size <= 1) in elimination order; resolving them in reverse
    order after applying ``fixed`` yields a full assignment.
    """

    fixed: Mapping = field(default_factory=dict)
    substitutions: tuple = ()
    product_zeros: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "fixed", MappingProxyType(dict(self.fixed)))
        subs = tuple((v, MappingProxyType(dict(e))) for v, e in self.substitutions)
        object.__setattr__(self, "substitutions", subs)
        object.__setattr__(self, "product_zeros", frozenset(frozenset(p) for p in self.product_zeros))

    @property
    def eliminated(self) -> set:
        return set(self.fixed) | {v for v, _ in self.substitutions}

    def to_dict(self) -> dict:
        def expr(e):
            return [[[v.name for v in sorted(k)], int(c)] for k, c in
                    sorted(e.items(), key=lambda kc: sorted(v.key for v in kc[0]))]
        return {
            "fixed": {v.name: int(b) for v, b in sorted(self.fixed.items())},
            "substitutions": [[v.name, expr(e)] for v, e in self.substitutions],
            "product_zeros": sorted([v.name for v in sorted(p)] for p in self.product_zeros),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AssignmentLedger":
        fixed = {BitVar.parse(n): int(b) for n, b in d.get("fixed", {}).items()}
        subs = [(BitVar.parse(n), {frozenset(BitVar.parse(x) for x in names): c for names, c in e})
                for n, e in d.get("substitutions", [])]
        pz = [frozenset(BitVar.parse(x) for x in p) for p in d.get("product_zeros", [])]
        return cls(fixed, subs, frozenset(pz))


@dataclass(frozen=True)
class ReducedSystem:
    instance: FactoringInstance
    clauses: tuple
    variables: tuple
    ledger: AssignmentLedger
    trace: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "trace", tuple(self.trace))

    @property
    def qubit_count(self) -> int:
        return len(self.variables)

    def is_satisfied(self, assignment: Mapping) -> bool:
        return all(c.evaluate(assignment) == 0 for c in self.clauses)

    def to_dict(self) -> dict:
        d = _system_dict(self.instance, self.clauses, self.variables, {})
        d.pop("fixed")
        d["ledger"] = self.ledger.to_dict()
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: Mapping) -> "ReducedSystem":
        inst, clauses, variables, _ = _parse_system_dict(d)
        return cls(inst, clauses, variables, AssignmentLedger.from_dict(d["ledger"]))

    @classmethod
    def from_json(cls, text: str) -> "ReducedSystem":
        return cls.from_dict(json.loads(text))


class _Worklist:
    """Mutable simplification state: clause slots, pending residuals, events."""

    def __init__(self, clauses):
        self.slots = [dict(c.terms) for c in clauses]
        self.columns = [c.column for c in clauses]
        self.residual: list = []
        self.pairs: list = []
        self.fixed: dict = {}
        self.subs: list = []
        self.trace: list = []

    def eliminate(self, rule: str, var: BitVar, expr: dict):
        if set(expr) <= {ONE}:
            self.fixed[var] = int(expr.get(ONE, 0))
        else:
            self.subs.append((var, expr))
        self.trace.append((rule, var, dict(expr)))
        self.slots = [_poly.substitute(c, var, expr) if any(var in k for k in c) else c
                      for c in self.slots]
        self.residual = [_poly.substitute(c, var, expr) for c in self.residual]

    def fix(self, rule: str, var: BitVar, value: int):
        self.eliminate(rule, var, {ONE: 1} if value else {})


def _single(mono):
    (v,) = mono
    return v


def _split(terms):
    const = terms.get(ONE, 0)
    rest = {k: c for k, c in terms.items() if k}
    singles = {_single(k): c for k, c in rest.items() if len(k) == 1}
    return const, rest, singles


def _r_unit(w, idx, const, rest, singles, lo, hi):
    if len(rest) != 1:
        return False
    ((mono, c),) = rest.items()
    if len(mono) == 1 and (c == -const or const == 0):
        w.fix("R1", _single(mono), 1 if const else 0)
        return True
    if len(mono) == 2 and c == -const:
        for v in sorted(mono):
            w.fix("R2", v, 1)
        return True
    return False


def _r_nonneg(w, idx, const, rest, singles, lo, hi):
    if const != 0 or not rest:
        return False
    if not (all(c > 0 for c in rest.values()) or all(c < 0 for c in rest.values())):
        return False
    if singles:
        for v in sorted(singles):
            w.fix("R3", v, 0)
    else:
        # only pair monomials left: keep them as residual x*y = 0 clauses
        for mono in sorted(rest, key=lambda k: sorted(v.key for v in k)):
            w.pairs.append(mono)
            w.residual.append({mono: 1})
        w.trace.append(("R3", None, {}))
        w.slots[idx] = {}
    return True


def _r_sum_to_one(w, idx, const, rest, singles, lo, hi):
    if len(rest) != 2 or len(singles) != 2:
        return False
    vals = set(singles.values())
    if (const == -1 and vals == {1}) or (const == 1 and vals == {-1}):
        a, b = sorted(singles)
        w.eliminate("R4", a, {ONE: 1, frozenset([b]): -1})
        return True
    return False


def _r_equal(w, idx, const, rest, singles, lo, hi):
    if len(rest) != 2 or len(singles) != 2 or const != 0:
        return False
    if sorted(singles.values()) == [-1, 1]:
        a, b = sorted(singles)
        w.eliminate("R4b", a, {frozenset([b]): 1})
        return True
    return False


def _r_average(w, idx, const, rest, singles, lo, hi):
    if len(rest) != 3 or len(singles) != 3 or const != 0:
        return False
    if sorted(singles.values()) not in ([-2, 1, 1], [-1, -1, 2]):
        return False
    x, _, z = sorted(singles, key=lambda v: (abs(singles[v]), v.key))
    w.eliminate("R4c", x, {frozenset([z]): 1})
    return True


def _r_carry(w, idx, const, rest, singles, lo, hi):
    for mono, c in rest.items():
        if len(mono) != 1:
            continue
        v = _single(mono)
        if v.family != "z":
            continue
        rest_lo, rest_hi = lo - min(0, c), hi - max(0, c)
        if not rest_lo <= -c <= rest_hi:
            w.fix("R5", v, 0)
            return True
    return False


RULES = (_r_unit, _r_nonneg, _r_sum_to_one, _r_equal, _r_average, _r_carry)


def _check_feasible(terms, column):
    lo, hi = _poly.bounds(terms)
    if lo > 0 or hi < 0:
        raise Infeasible(f"clause at column {column} has bounds ({lo}, {hi}) excluding 0")
    return lo, hi


def simplify(system: ClauseSystem) -> ReducedSystem:
    w = _Worklist(system.clauses)
    queue = deque(range(len(w.slots)))
    queued = set(queue)
    while queue:
        idx = queue.popleft()
        queued.discard(idx)
        terms = w.slots[idx]
        if not terms:
            continue
        lo, hi = _check_feasible(terms, w.columns[idx])
        const, rest, singles = _split(terms)
        before = list(w.slots)
        if not any(rule(w, idx, const, rest, singles, lo, hi) for rule in RULES):
            continue
        for j, c in enumerate(w.slots):
            if c and c is not before[j] and c != before[j] and j not in queued:
                queue.append(j)
                queued.add(j)
        if w.slots[idx] and idx not in queued:
            queue.append(idx)
            queued.add(idx)

    clauses = [Clause(c, col) for c, col in zip(w.slots, w.columns) if c]
    for r in w.residual:
        if r:
            _check_feasible(r, -1)
            clauses.append(Clause(r, -1))
    fixed = {**system.fixed, **w.fixed}
    eliminated = set(fixed) | {v for v, _ in w.subs}
    survivors = [v for v in system.variables if v not in eliminated]
    ledger = AssignmentLedger(fixed, w.subs, frozenset(w.pairs))
    return ReducedSystem(system.instance, clauses, survivors, ledger, w.trace)


def passthrough(system: ClauseSystem) -> ReducedSystem:
    """Reduced view of a system with nothing simplified beyond construction."""
    clauses = [c for c in system.clauses if not c.is_zero()]
    for c in clauses:
        _check_feasible(c.terms, c.column)
    ledger = AssignmentLedger(system.fixed)
    return ReducedSystem(system.instance, clauses, system.variables, ledger)


def reduce(system: ClauseSystem) -> ReducedSystem:
    """Simplify when the instance asks for preprocessing, else pass through."""
    return simplify(system) if system.instance.preprocessed else passthrough(system)


def _as_bits(reduced_assignment, n):
    if isinstance(reduced_assignment, str):
        bits = [int(ch) for ch in reduced_assignment]
    else:
        bits = [int(b) for b in reduced_assignment]
    if len(bits) != n:
        raise LengthMismatch(f"expected {n} bits, got {len(bits)}")
    return bits


def apply_ledger(ledger: AssignmentLedger, reduced_assignment, variables: Sequence | None = None) -> dict:
    """Resolve every eliminated variable.

    ``reduced_assignment`` is either a mapping BitVar -> bit or a bit sequence
    aligned with ``variables``.
    """
    if isinstance(reduced_assignment, Mapping):
        full = {v: int(b) for v, b in reduced_assignment.items()}
    else:
        variables = list(variables or [])
        bits = _as_bits(reduced_assignment, len(variables))
        full = dict(zip(variables, bits))
    full.update(ledger.fixed)
    for var, expr in reversed(ledger.substitutions):
        val = _poly.evaluate(expr, full)
        if val not in (0, 1):
            raise NonBinarySubstitution(f"{var} evaluates to {val}")
        full[var] = int(val)
    return full


def push_batch(reduced: ReducedSystem, states: np.ndarray) -> tuple:
    """Vectorised ledger push-through of basis-state indices.

    Returns ``(values, valid)``: a dict BitVar -> int array and a boolean mask
    marking states whose substitutions stayed binary.
    """
    states = np.asarray(states, dtype=np.int64)
    vals = {v: (states >> k) & 1 for k, v in enumerate(reduced.variables)}
    ones = np.ones_like(states)
    for v, b in reduced.ledger.fixed.items():
        vals[v] = ones * b
    valid = np.ones(states.shape, dtype=bool)
    for var, expr in reversed(reduced.ledger.substitutions):
        acc = np.zeros_like(states)
        for mono, c in expr.items():
            term = ones * c
            for u in mono:
                term = term * vals[u]
            acc = acc + term
        valid &= (acc == 0) | (acc == 1)
        vals[var] = np.clip(acc, 0, 1)
    return vals, valid


def factors_of(reduced: ReducedSystem, full: Mapping) -> tuple:
    return integers_from_bits(full, reduced.instance)
