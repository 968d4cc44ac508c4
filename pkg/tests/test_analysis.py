import numpy as np
import pytest

from conftest import hamiltonian_for, reduced_for
from vqf.analysis import (build_manifold, decode, decode_state, manifold_energy_stats, overlap,
                          reference_factors)
from vqf.encoding import P, Q, build_instance, build_clauses
from vqf.errors import NotBiprime, SizeMismatch
from vqf.hamiltonian import DiagonalHamiltonian, dense_table, from_clauses
from vqf.preprocess import AssignmentLedger, ReducedSystem, simplify
from vqf.resources import odd_biprimes, true_factors
from vqf.simulator import StateVector, basis_state, uniform_state


def test_reference_factors():
    assert reference_factors(91) == (13, 7)
    assert reference_factors(25) == (5, 5)
    for bad in (27, 97, 105):
        with pytest.raises(NotBiprime):
            reference_factors(bad)


def test_m91_manifold_frozen():
    r = reduced_for(91)
    man = build_manifold(r, 91)
    assert man.n == 10 and man.reference_factors == (13, 7)
    assert man.fraction == 0.28125
    assert len(man.member_states) == int(round(man.fraction * 2**10))
    mean_in, mean_out = manifold_energy_stats(man, hamiltonian_for(91))
    assert mean_in == pytest.approx(146 / 9)
    assert mean_out == pytest.approx(418 / 23)


def test_manifold_fraction_decreases():
    fr = [build_manifold(reduced_for(m), m).fraction for m in (25, 49, 91, 247)]
    assert all(f > 0 for f in fr)
    assert fr[0] > fr[-1]
    assert all(a >= b for a, b in zip(fr, fr[1:]))


def test_manifold_members_have_a_correct_factor():
    r = reduced_for(247)
    man = build_manifold(r, 247)
    for x in sorted(man.member_states)[:200]:
        bits = [(x >> k) & 1 for k in range(r.qubit_count)]
        from vqf.preprocess import apply_ledger
        from vqf.encoding import integers_from_bits
        p, q = integers_from_bits(apply_ledger(r.ledger, bits, r.variables), r.instance)
        assert p in (19, 13) or q in (19, 13)


def test_zero_energy_inside_manifold():
    for m in odd_biprimes(255):
        r = reduced_for(m)
        if r.qubit_count == 0:
            continue
        man = build_manifold(r, m)
        table = dense_table(hamiltonian_for(m))
        assert man.members[table == 0].all()


def test_degenerate_zero_qubit_manifold():
    r = reduced_for(15)
    assert r.qubit_count == 0
    man = build_manifold(r, 15)
    assert man.fraction == 1.0


def test_energy_stats_constant():
    r = reduced_for(25)
    man = build_manifold(r, 25)
    H = DiagonalHamiltonian(r.qubit_count, {frozenset(): 4.0})
    assert manifold_energy_stats(man, H) == (4.0, 4.0)


def test_energy_stats_toy_members_are_ground_states():
    # q is pinned to 1, p = 5 + 2 p1: the only member is p1 = 0, the zero of the clause
    inst = build_instance(15)
    x = P(1)
    clause = {frozenset([x]): 1}
    from vqf.encoding import Clause
    red = ReducedSystem(inst, [Clause(clause, 0)], [x],
                        AssignmentLedger({P(0): 1, Q(0): 1, P(2): 1, Q(1): 0}))
    man = build_manifold(red, 15)
    H = from_clauses([clause], [x])
    mean_in, _ = manifold_energy_stats(man, H)
    assert mean_in == 0.0


def test_overlap():
    r = reduced_for(91)
    man = build_manifold(r, 91)
    member = min(man.member_states)
    outside = next(x for x in range(1024) if x not in man)
    assert overlap(basis_state(10, member), man) == 1.0
    assert overlap(basis_state(10, outside), man) == 0.0
    assert overlap(uniform_state(10), man) == pytest.approx(man.fraction)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(1024) + 1j * rng.standard_normal(1024)
    s = StateVector(10, v / np.linalg.norm(v))
    comp = np.abs(s.amplitudes[~man.members]) ** 2
    assert overlap(s, man) == pytest.approx(1 - comp.sum())
    with pytest.raises(SizeMismatch):
        overlap(basis_state(3, 0), man)


def test_decode_examples():
    r = reduced_for(91)
    table = dense_table(hamiltonian_for(91))
    assert decode_state(r, int(np.argmin(table))) == (13, 7)
    inst = build_instance(15, preprocessed=False)
    variables = [P(0), P(1), P(2), Q(0), Q(1)]
    assert decode([0] * 5, AssignmentLedger(), inst, variables) is None
    # p = 5 = 101, q = 3 = 11
    assert decode([1, 0, 1, 1, 1], AssignmentLedger(), inst, variables) == (5, 3)
    # swapped orientation: p bits hold 5, q bits hold 7
    inst35 = build_instance(35, prior=(3, 3), preprocessed=False)
    v35 = [P(0), P(1), P(2), Q(0), Q(1), Q(2)]
    assert decode([1, 0, 1, 1, 1, 1], AssignmentLedger(), inst35, v35) == (7, 5)


def test_decode_argmin_both_regimes():
    for m in odd_biprimes(255):
        p, q = true_factors(m)
        for prior in (None, (p.bit_length(), q.bit_length())):
            r = simplify(build_clauses(build_instance(m, prior)))
            if r.qubit_count == 0:
                assert decode([], r.ledger, r.instance, r.variables) == (p, q)
                continue
            from vqf.hamiltonian import quantize
            table = dense_table(quantize(r))
            assert table.min() == 0
            assert decode_state(r, int(np.argmin(table))) == (p, q)
