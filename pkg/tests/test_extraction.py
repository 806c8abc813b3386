from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_propagate, measured_syndrome
from qrlc.code import random_code
from qrlc.errors import DimensionError, ParameterError, PreconditionError
from qrlc.extraction import (
    BaseError,
    SyndromeSequence,
    build_extraction,
    enumerate_base_errors,
    pattern_letters,
    propagate,
    round_syndrome,
    sequence_bits,
    syndrome_sequence,
)
from qrlc.pauli import PauliOperator


def test_two_qubit_layout(two_qubit):
    code, circ = two_qubit
    assert circ.n_cnot == 2 and circ.n_ancilla == 1
    assert [(s.ancilla, s.data) for s in circ.cnot_sites] == [(0, 0), (0, 1)]
    assert len(enumerate_base_errors(circ, 1)) == 32
    for s in circ.cnot_sites:
        assert circ.circuit.gates[s.gate_index].targets == (code.n + s.ancilla, s.data)


def test_pattern_numbering():
    assert pattern_letters(1) == ("I", "X")
    assert pattern_letters(4) == ("X", "I")
    assert pattern_letters(15) == ("Z", "Z")
    with pytest.raises(ParameterError):
        pattern_letters(0)


@pytest.mark.parametrize("seed", range(8))
def test_cnot_count_and_base_error_count(seed):
    code = random_code(6, 2, seed)
    circ = build_extraction(code)
    assert circ.n_cnot == sum(code.stabilizer_weights)
    for q in (1, 3):
        assert len(enumerate_base_errors(circ, q)) == q * (15 * circ.n_cnot + 2 * code.m)


@pytest.mark.parametrize("seed", range(4))
def test_propagation_matches_dense_unitaries(seed):
    code = random_code(3, 1 + seed % 2, seed)
    circ = build_extraction(code)
    for b in enumerate_base_errors(circ, 1):
        data, anc = dense_propagate(circ, b)
        prop = propagate(circ, b)
        assert prop.data == data and prop.ancilla == anc
        assert prop.s_tilde == anc.x
        assert prop.s_hat == code.syndrome(data)


def test_flips_propagate_to_a_single_syndrome_bit(code4):
    code, circ = code4
    for a in range(code.m):
        for kind in ("PREP", "MEAS"):
            prop = propagate(circ, BaseError(1, kind, a))
            assert prop.data.is_identity() and prop.s_hat == 0 and prop.s_tilde == 1 << a
    with pytest.raises(PreconditionError):
        propagate(circ, BaseError(1, "CNOT", 999, 1))


@pytest.mark.parametrize("seed", range(5))
def test_circuit_syndrome_equals_algebraic_syndrome(seed):
    code = random_code(3, 1 + seed % 2, 50 + seed)
    circ = build_extraction(code)
    # generators may stabilize the code space with sign -1, so compare against the error-free outcome
    reference = measured_syndrome(circ, PauliOperator(3))
    for x in range(8):
        for z in range(8):
            e = PauliOperator(3, x, z)
            assert measured_syndrome(circ, e) ^ reference == round_syndrome(circ, e) == code.syndrome(e)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_round_syndrome_equals_algebraic_syndrome_n6(seed, bits):
    code = random_code(6, 2, seed % 97)
    circ = build_extraction(code)
    e = PauliOperator(6, bits & 63, (bits >> 6) & 63)
    assert round_syndrome(circ, e) == code.syndrome(e)
    with pytest.raises(DimensionError):
        round_syndrome(circ, PauliOperator(5))


def test_sequence_layout(code4):
    code, circ = code4
    m, q = code.m, 4
    b = BaseError(2, "CNOT", 0, 7)
    prop = propagate(circ, b)
    seq = syndrome_sequence(circ, b, q)
    assert seq.syndromes == (0, prop.s_tilde, prop.s_hat, prop.s_hat)
    assert seq.bits == sequence_bits(prop, 2, q, m)
    with pytest.raises(ParameterError):
        syndrome_sequence(circ, BaseError(5, "CNOT", 0, 7), q)


def test_sequences_compose_by_xor(code4):
    code, circ = code4
    rng = np.random.default_rng(0)
    errs = enumerate_base_errors(circ, 3)
    for _ in range(50):
        i, j = rng.choice(len(errs), 2, replace=False)
        a = syndrome_sequence(circ, errs[i], 3)
        b = syndrome_sequence(circ, errs[j], 3)
        c = a ^ b
        assert c.syndromes == tuple(u ^ v for u, v in zip(a.syndromes, b.syndromes))
    s = SyndromeSequence.from_syndromes([1, 0, 3], 2)
    assert s.bits == 1 | (3 << 4) and s.hex() == "31"
    with pytest.raises(DimensionError):
        SyndromeSequence.from_syndromes([4], 2)


def test_degeneracy_taxonomy_witnesses():
    """Faults with trivial data error, with stabilizer data error, and with identical sequences but different errors all occur."""
    code = random_code(4, 1, 11)
    circ = build_extraction(code)
    from qrlc.decoder import degenerate_key

    errs = enumerate_base_errors(circ, 2)
    trivial_data = stabilizer_data = 0
    by_seq: dict[int, set[int]] = {}
    for b in errs:
        prop = propagate(circ, b)
        if prop.data.is_identity():
            trivial_data += 1
        elif code.in_stabilizer_group(prop.data):
            stabilizer_data += 1
        by_seq.setdefault(syndrome_sequence(circ, b, 2).bits, set()).add(degenerate_key(code, prop.data))
    assert trivial_data > 0
    assert any(len(v) > 1 for v in by_seq.values())
    assert stabilizer_data > 0
