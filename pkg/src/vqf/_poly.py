"""Sparse multilinear polynomials keyed by frozensets of variables.

A polynomial is a plain ``dict`` mapping ``frozenset`` monomials to numeric
coefficients; the empty set holds the constant.  Products reduce x*x -> x, so
the algebra is exact for 0/1-valued variables.
"""
from __future__ import annotations

from typing import Hashable, Iterable, Mapping

Poly = dict
ONE = frozenset()


def add_term(poly: dict, mono: Iterable[Hashable], coeff) -> None:
    key = frozenset(mono)
    val = poly.get(key, 0) + coeff
    if val:
        poly[key] = val
    else:
        poly.pop(key, None)


def add(a: Mapping, b: Mapping, scale=1) -> dict:
    out = dict(a)
    for k, c in b.items():
        add_term(out, k, scale * c)
    return out


def mul(a: Mapping, b: Mapping) -> dict:
    out: dict = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            add_term(out, ka | kb, ca * cb)
    return out


def substitute(poly: Mapping, var, expr: Mapping) -> dict:
    """Replace ``var`` by the polynomial ``expr``."""
    out: dict = {}
    for k, c in poly.items():
        if var in k:
            rest = k - {var}
            for ke, ce in expr.items():
                add_term(out, rest | ke, c * ce)
        else:
            add_term(out, k, c)
    return out


def bounds(poly: Mapping) -> tuple:
    """Termwise (min, max) over 0/1 assignments; the constant shifts both."""
    const = poly.get(ONE, 0)
    lo = const + sum(min(0, c) for k, c in poly.items() if k)
    hi = const + sum(max(0, c) for k, c in poly.items() if k)
    return lo, hi


def variables(poly: Mapping) -> set:
    out: set = set()
    for k in poly:
        out |= k
    return out


def evaluate(poly: Mapping, assignment: Mapping):
    total = 0
    for k, c in poly.items():
        if all(assignment[v] for v in k):
            total += c
    return total
