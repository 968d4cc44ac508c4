"""Binary long-multiplication clauses for factoring an odd integer m = p * q.

Column i of the product gives the clause

    sum_j q_j p_{i-j} + sum_j z_{j,i} - m_i - sum_k 2^k z_{i,i+k} = 0

where z_{i,j} is a carry bit sent from column i to column j.  Carry widths are
the smallest that can hold the column's maximum value.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

from . import _poly
from .errors import EvenInput, InvalidPrior, TooSmall

_FAMILY_RANK = {"p": 0, "q": 1, "z": 2}


@dataclass(frozen=True)
class BitVar:
    """A binary unknown: factor bit ``p_i``/``q_i`` or carry ``z_{i,j}``."""

    family: str
    index: int | tuple

    def __post_init__(self):
        if self.family not in _FAMILY_RANK:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "z":
            i, j = self.index
            if not 0 <= i < j:
                raise ValueError(f"carry index must satisfy i < j, got {self.index}")
            object.__setattr__(self, "index", (int(i), int(j)))
        elif not (isinstance(self.index, int) and self.index >= 0):
            raise ValueError(f"bit index must be a nonnegative int, got {self.index!r}")

    @property
    def key(self):
        idx = self.index if self.family == "z" else (self.index,)
        return (_FAMILY_RANK[self.family],) + idx

    def __lt__(self, other: "BitVar"):
        return self.key < other.key

    @property
    def name(self) -> str:
        if self.family == "z":
            return f"z{self.index[0]}_{self.index[1]}"
        return f"{self.family}{self.index}"

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"BitVar({self.name})"

    @classmethod
    def parse(cls, name: str) -> "BitVar":
        fam, rest = name[0], name[1:]
        if fam == "z":
            i, j = rest.split("_")
            return cls("z", (int(i), int(j)))
        return cls(fam, int(rest))


def P(i: int) -> BitVar:
    return BitVar("p", i)


def Q(i: int) -> BitVar:
    return BitVar("q", i)


def Z(i: int, j: int) -> BitVar:
    return BitVar("z", (i, j))


@dataclass(frozen=True)
class Clause:
    """Integer multilinear polynomial in BitVars required to vanish."""

    terms: Mapping
    column: int = -1

    def __post_init__(self):
        clean = {}
        for k, c in dict(self.terms).items():
            k = frozenset(k)
            if len(k) > 2:
                raise ValueError("clause monomials have degree at most 2")
            if c:
                clean[k] = clean.get(k, 0) + int(c)
        object.__setattr__(self, "terms", MappingProxyType({k: c for k, c in clean.items() if c}))

    @property
    def constant(self) -> int:
        return self.terms.get(_poly.ONE, 0)

    @property
    def variables(self) -> set:
        return _poly.variables(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def evaluate(self, assignment: Mapping) -> int:
        return _poly.evaluate(self.terms, assignment)

    def sorted_terms(self) -> list:
        def order(item):
            k, _ = item
            return (len(k), sorted(v.key for v in k))
        return sorted(self.terms.items(), key=order)

    def __str__(self):
        parts = []
        for k, c in self.sorted_terms():
            mono = "*".join(v.name for v in sorted(k))
            parts.append(f"{c:+d}" + (f"*{mono}" if mono else ""))
        return (" ".join(parts) or "0") + " = 0"


def clause_bounds(clause: Clause | Mapping) -> tuple:
    """Termwise lower and upper bounds of a clause over 0/1 assignments."""
    terms = clause.terms if isinstance(clause, Clause) else clause
    return _poly.bounds(terms)


@dataclass(frozen=True)
class FactoringInstance:
    m: int
    n_m: int
    n_p: int
    n_q: int
    prior_knowledge: bool = False
    preprocessed: bool = True

    @property
    def bits(self) -> list:
        return [(self.m >> i) & 1 for i in range(self.n_p + self.n_q)]


def build_instance(m: int, prior: tuple | None = None, preprocessed: bool = True) -> FactoringInstance:
    """Validate ``m`` and fix factor bit-lengths.

    Without prior knowledge ``n_p = n_m - 1`` and ``n_q = ceil(n_m / 2)``.
    """
    m = int(m)
    if m % 2 == 0:
        raise EvenInput(f"m={m} is even; strip factors of 2 first")
    if m < 9:
        raise TooSmall(f"m={m} < 9")
    n_m = m.bit_length()
    if prior is None:
        n_p, n_q = n_m - 1, math.ceil(n_m / 2)
    else:
        n_p, n_q = (int(x) for x in prior)
        if not n_p >= n_q >= 2:
            raise InvalidPrior(f"need n_p >= n_q >= 2, got ({n_p}, {n_q})")
        if (2**n_p - 1) * (2**n_q - 1) < m or 2 ** (n_p + n_q - 2) > m:
            raise InvalidPrior(f"{n_p}- and {n_q}-bit factors cannot multiply to {m}")
    return FactoringInstance(m, n_m, n_p, n_q, prior is not None, bool(preprocessed))


def known_bits(instance: FactoringInstance) -> dict:
    """Bits fixed before any clause is built.

    Odd factors have p_0 = q_0 = 1; known bit-lengths fix the leading bits.
    Nothing is fixed when preprocessing is disabled.
    """
    if not instance.preprocessed:
        return {}
    fixed = {P(0): 1, Q(0): 1}
    if instance.prior_knowledge:
        fixed[P(instance.n_p - 1)] = 1
        fixed[Q(instance.n_q - 1)] = 1
    return fixed


@dataclass(frozen=True)
class ClauseSystem:
    instance: FactoringInstance
    clauses: tuple
    variables: tuple
    fixed: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "fixed", MappingProxyType(dict(self.fixed)))

    def is_satisfied(self, assignment: Mapping) -> bool:
        full = {**self.fixed, **assignment}
        return all(c.evaluate(full) == 0 for c in self.clauses)

    def to_dict(self) -> dict:
        return _system_dict(self.instance, self.clauses, self.variables, self.fixed)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: Mapping) -> "ClauseSystem":
        inst, clauses, variables, fixed = _parse_system_dict(d)
        return cls(inst, clauses, variables, fixed)

    @classmethod
    def from_json(cls, text: str) -> "ClauseSystem":
        return cls.from_dict(json.loads(text))


def _system_dict(instance, clauses, variables, fixed) -> dict:
    return {
        "m": instance.m,
        "n_p": instance.n_p,
        "n_q": instance.n_q,
        "prior_knowledge": instance.prior_knowledge,
        "preprocessed": instance.preprocessed,
        "variables": [v.name for v in variables],
        "fixed": {v.name: int(b) for v, b in sorted(fixed.items())},
        "clauses": [
            {"column": c.column,
             "terms": [[[v.name for v in sorted(k)], int(coef)] for k, coef in c.sorted_terms()]}
            for c in clauses
        ],
    }


def _parse_system_dict(d: Mapping):
    prior = (d["n_p"], d["n_q"]) if d.get("prior_knowledge") else None
    inst = build_instance(d["m"], prior, d.get("preprocessed", True))
    if (inst.n_p, inst.n_q) != (d["n_p"], d["n_q"]):
        raise ValueError("bit-lengths in document disagree with the no-prior convention")
    clauses = [
        Clause({frozenset(BitVar.parse(n) for n in names): c for names, c in cd["terms"]}, cd["column"])
        for cd in d["clauses"]
    ]
    variables = [BitVar.parse(n) for n in d["variables"]]
    fixed = {BitVar.parse(n): int(b) for n, b in d.get("fixed", {}).items()}
    return inst, clauses, variables, fixed


def build_clauses(instance: FactoringInstance) -> ClauseSystem:
    """One clause per output column ``0 .. n_p + n_q - 1``."""
    ncol = instance.n_p + instance.n_q
    bits = instance.bits
    fixed = known_bits(instance)
    incoming: dict = {i: [] for i in range(ncol)}
    clauses = []
    for i in range(ncol):
        terms: dict = {}
        for j in range(max(0, i - instance.n_p + 1), min(i, instance.n_q - 1) + 1):
            mono = {v for v in (Q(j), P(i - j)) if v not in fixed}
            _poly.add_term(terms, mono, 1)
        for z in incoming[i]:
            _poly.add_term(terms, {z}, 1)
        # capacity of the column before subtracting m_i
        _, s_max = _poly.bounds(terms)
        width = int(math.floor(math.log2(s_max))) if s_max >= 1 else 0
        _poly.add_term(terms, (), -bits[i])
        for k in range(1, width + 1):
            if i + k < ncol:
                z = Z(i, i + k)
                _poly.add_term(terms, {z}, -(2**k))
                incoming[i + k].append(z)
        clauses.append(Clause(terms, i))
    variables: set = set()
    for c in clauses:
        variables |= c.variables
    return ClauseSystem(instance, clauses, sorted(variables), fixed)


def factor_bits(instance: FactoringInstance) -> tuple:
    """All P and Q variables of the instance, in canonical order."""
    return tuple(P(i) for i in range(instance.n_p)), tuple(Q(i) for i in range(instance.n_q))


def true_assignment(instance: FactoringInstance, p: int, q: int) -> dict:
    """Full assignment (factor bits and long-multiplication carries) for p * q."""
    system = build_clauses(instance)
    assign = {P(i): (p >> i) & 1 for i in range(instance.n_p)}
    assign.update({Q(i): (q >> i) & 1 for i in range(instance.n_q)})
    # carries are determined column by column: value of column sum, shifted out
    for c in system.clauses:
        col_vars = sorted(v for v in c.variables if v.family == "z" and v.index[0] == c.column)
        partial = {k: v for k, v in c.terms.items() if not (k & set(col_vars))}
        value = _poly.evaluate(partial, assign)
        # value = sum_k 2^k z_k must hold with binary z
        for z in col_vars:
            k = z.index[1] - z.index[0]
            assign[z] = (value >> k) & 1
    return assign


def integers_from_bits(assignment: Mapping, instance: FactoringInstance) -> tuple:
    ps, qs = factor_bits(instance)
    # works elementwise when the assignment holds integer arrays
    p = sum(assignment[v] * (1 << v.index) for v in ps)
    q = sum(assignment[v] * (1 << v.index) for v in qs)
    return p, q


def iter_variables(clauses: Iterable[Clause]) -> list:
    out: set = set()
    for c in clauses:
        out |= c.variables
    return sorted(out)
