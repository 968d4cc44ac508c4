import functools
import itertools

import numpy as np
import pytest

from vqf.encoding import build_clauses, build_instance
from vqf.hamiltonian import DiagonalHamiltonian, quantize
from vqf.preprocess import simplify

ACCEPTANCE = {}


@functools.lru_cache(maxsize=None)
def reduced_for(m, prior=None, preprocessed=True):
    return simplify(build_clauses(build_instance(m, prior, preprocessed)))


@functools.lru_cache(maxsize=None)
def hamiltonian_for(m):
    return quantize(reduced_for(m))


def all_assignments(variables):
    for bits in itertools.product((0, 1), repeat=len(variables)):
        yield dict(zip(variables, bits))


def random_hamiltonian(n, rng, terms=12, scale=3.0):
    """Random diagonal polynomial of degree <= 4."""
    poly = {frozenset(): float(rng.normal())}
    for _ in range(terms):
        k = int(rng.integers(1, min(4, n) + 1))
        mono = frozenset(int(i) for i in rng.choice(n, size=k, replace=False))
        poly[mono] = poly.get(mono, 0.0) + float(rng.normal(scale=scale))
    return DiagonalHamiltonian(n, poly)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} | {detail}")
