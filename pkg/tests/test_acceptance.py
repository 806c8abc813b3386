"""End-to-end acceptance checks; each prints one PASS/FAIL line in the summary."""

from __future__ import annotations

import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chisquare

from oracles import dense_propagate, exhaustive_counts, stabilizer_group
from qrlc.asymptotics import fit_asymptotic, fit_scaling
from qrlc.bernoulli import BernoulliModel, build_count_table, build_order1_table, decode_from_counts, merge_count_tables
from qrlc.clifford import C2_GENERATORS, enumerate_c2, random_c2
from qrlc.code import random_code
from qrlc.decoder import (
    bernoulli_noise,
    build_data_table,
    build_data_table_parallel,
    build_decoding_table,
    decompose,
    decompose_alt,
    degenerate_key,
    representative,
)
from qrlc.evaluation import evaluate_exact, evaluate_monte_carlo, p_infinity_bound
from qrlc.extraction import build_extraction, enumerate_base_errors, propagate, round_syndrome, syndrome_sequence
from qrlc.pauli import PauliOperator
from test_decoder import LOGICAL_BITS, WORKED_TABLE, _base_error


def _max_relative_gap(got: dict, want: dict) -> float:
    gap = 0.0
    for key in set(got) | set(want):
        ref = want.get(key, 0)
        diff = abs(got.get(key, 0) - ref)
        if diff:
            gap = max(gap, float(diff / ref) if ref else float("inf"))
    return gap


def test_c1_worked_example_golden_decode(two_qubit, acceptance_line):
    acceptance_line["name"] = "C1 worked two-qubit decode"
    start = time.perf_counter()
    code, circ = two_qubit
    for (s, (s_hat, logical)), labels in WORKED_TABLE.items():
        for label in labels:
            b = _base_error(label)
            assert syndrome_sequence(circ, b, 1).bits == s
            assert degenerate_key(code, propagate(circ, b).data) == (s_hat << 2) | LOGICAL_BITS[logical]
    p = Fraction(1, 10)
    noise = [(p / 15 if b.kind == "CNOT" else p, (b,)) for b in enumerate_base_errors(circ, 1)]
    data = build_data_table(code, circ, noise, 1)
    table = build_decoding_table(code, data)
    assert data.masses[0][0b01] == 4 * p / 15
    assert data.masses[1][0b00] == 34 * p / 15
    assert str(table.correction(code, 0)) == "X2"
    assert table.correction(code, 1).is_identity()
    elapsed = time.perf_counter() - start
    acceptance_line["detail"] = f"masses 4p/15 and 34p/15, corrections X2 and I, {elapsed:.2f}s"
    assert elapsed < 1.0


def test_c2_two_qubit_clifford_group(acceptance_line):
    acceptance_line["name"] = "C2 two-qubit Clifford group"
    start = time.perf_counter()
    group = enumerate_c2()
    keys = {g.key() for g in group}
    assert len(group) == len(keys) == 11520
    for g in group:
        for gen in C2_GENERATORS:
            assert g.then(gen).key() in keys
    rng = np.random.default_rng(20)
    index = {g.key(): i for i, g in enumerate(group)}
    counts = np.bincount([index[random_c2(rng).key()] for _ in range(20 * len(group))], minlength=len(group))
    pvalue = chisquare(counts).pvalue
    elapsed = time.perf_counter() - start
    acceptance_line["detail"] = f"{len(group)} elements, closed, chi-square p={pvalue:.3f}, {elapsed:.1f}s"
    assert pvalue > 1e-3
    assert elapsed < 30.0


def test_c3_degenerate_partition_oracles(acceptance_line):
    acceptance_line["name"] = "C3 degenerate-set oracles"
    start = time.perf_counter()
    rng = np.random.default_rng(30)
    checked = 0
    for n, k, seed in ((3, 1, 1), (4, 1, 2), (4, 2, 3), (5, 2, 4), (6, 1, 5)):
        code = random_code(n, k, seed)
        group = sorted(stabilizer_group(code))
        # brute force: every set is a representative times the whole stabilizer group
        brute: dict[tuple[int, int], int] = {}
        for c in range(1 << (n + k)):
            rep = representative(code, c)
            for x, z in group:
                brute[(rep.x ^ x, rep.z ^ z)] = c
        assert len(brute) == 4**n
        errors = []
        for i in range(500):
            if i % 2 and errors:
                x, z = group[int(rng.integers(len(group)))]
                prev = errors[-1]
                errors.append(PauliOperator(n, prev.x ^ x, prev.z ^ z))
            else:
                errors.append(PauliOperator(n, int(rng.integers(1 << n)), int(rng.integers(1 << n))))
        forward: dict[int, object] = {}
        backward: dict[object, int] = {}
        for e in errors:
            key = degenerate_key(code, e)
            alt = decompose_alt(code, e).key
            assert key == brute[(e.x, e.z)]
            assert decompose(code, e).key == divmod(key, 1 << (2 * k))
            assert forward.setdefault(key, alt) == alt
            assert backward.setdefault(alt, key) == key
            checked += 1
    elapsed = time.perf_counter() - start
    acceptance_line["detail"] = f"{checked} errors over 5 codes, {elapsed:.1f}s"
    assert elapsed < 120.0


def test_c4_propagation_oracle(acceptance_line):
    acceptance_line["name"] = "C4 propagation oracle"
    start = time.perf_counter()
    checked = 0
    for n, k, seed in ((2, 1, 40), (3, 1, 41), (3, 2, 42)):
        code = random_code(n, k, seed)
        circ = build_extraction(code)
        for b in enumerate_base_errors(circ, 1):
            data, anc = dense_propagate(circ, b)
            prop = propagate(circ, b)
            assert prop.data == data and prop.ancilla == anc and prop.s_tilde == anc.x
            assert prop.s_hat == code.syndrome(data) == round_syndrome(circ, data)
            checked += 1
    elapsed = time.perf_counter() - start
    acceptance_line["detail"] = f"{checked} base errors, {elapsed:.1f}s"
    assert elapsed < 120.0


def test_c5_count_tables_match_enumeration(two_qubit, code4, acceptance_line):
    acceptance_line["name"] = "C5 order-2 count tables"
    start = time.perf_counter()
    clone_gaps = []
    for code, circ in (two_qubit, code4):
        for q in (1, 2):
            want = dict(exhaustive_counts(code, circ, q, 2))
            d1 = build_order1_table(code, circ, q)
            d2 = merge_count_tables(d1, d1)
            assert d2.as_dict(2) == want
            for v in d2.layers:
                assert d2.layer_count(v) == d2.expected_layer_count(v)
            assert d2.layer_total(2) == d2.expected_layer_total(2)
            c1 = build_order1_table(code, circ, q, flip_model="clone")
            c2 = merge_count_tables(c1, c1)
            assert c2.layer_total(2) == c2.expected_layer_total(2)
            clone_gaps.append(_max_relative_gap(c2.as_dict(2), want))
    elapsed = time.perf_counter() - start
    acceptance_line["detail"] = (
        f"exact on every key; clone-model max relative gap {max(clone_gaps):.2f} (not used), {elapsed:.1f}s"
    )
    assert elapsed < 300.0


def test_c6_fit_recovery(acceptance_line):
    acceptance_line["name"] = "C6 asymptotic fit recovery"
    start = time.perf_counter()
    rng = np.random.default_rng(60)
    worst = 0.0
    for _ in range(50):
        pf = 10 ** rng.uniform(-6, -0.5)
        c = rng.uniform(0.5, 1.0)
        fit = fit_asymptotic([(q, 1 - c * (1 - pf) ** q) for q in range(1, 11)])
        worst = max(worst, abs(fit.p_failure / pf - 1), abs(fit.c_of_p / c - 1))
    noisy_worst, r2_min = 0.0, 1.0
    for _ in range(10):
        pts = [(q, (1 - 0.99 * 0.99**q) * (1 + 0.01 * rng.standard_normal())) for q in range(1, 11)]
        fit = fit_asymptotic(pts)
        noisy_worst = max(noisy_worst, abs(fit.p_failure / 0.01 - 1), abs(fit.c_of_p / 0.99 - 1))
        r2_min = min(r2_min, fit.r_squared)
    elapsed = time.perf_counter() - start
    acceptance_line["detail"] = (
        f"noiseless rel err {worst:.1e}, noisy rel err {noisy_worst:.3f}, min R2 {r2_min:.4f}, {elapsed:.2f}s"
    )
    assert worst < 1e-10
    assert noisy_worst < 0.05 and r2_min > 0.99
    assert elapsed < 10.0


P_GRID = [10**h for h in np.linspace(-6, -2, 9)]


@pytest.mark.slow
def test_c7_threshold_behaviour(acceptance_line):
    acceptance_line["name"] = "C7 desk-scale failure curves"
    start = time.perf_counter()
    bound = p_infinity_bound(1)
    medians = {}
    for n in (3, 4, 5, 6):
        etas = []
        for s in range(10):
            code = random_code(n, 1, 1000 * n + s)
            circ = build_extraction(code)
            per_p: dict[float, list[tuple[int, float]]] = {p: [] for p in P_GRID}
            for q in range(1, 7):
                counts = build_count_table(code, circ, q, 2)
                for p in P_GRID:
                    table = decode_from_counts(code, counts, BernoulliModel.for_circuit(circ, p, q))
                    per_p[p].append((q, evaluate_exact(code, table).p_total_corrected))
            curve = [(p, fit_asymptotic(pts, p, q_min=2).p_failure) for p, pts in per_p.items()]
            values = [v for _, v in curve]
            assert max(values) <= bound, (n, s, curve)
            assert all(b >= a for a, b in zip(values, values[1:])), (n, s, curve)
            etas.append(fit_scaling(curve, "p_failure", 1e-2).exponent)
        medians[n] = float(np.median(etas))
    elapsed = time.perf_counter() - start
    acceptance_line["detail"] = (
        "median eta " + ", ".join(f"n={n}: {m:.3f}" for n, m in medians.items()) + f"; {elapsed:.0f}s"
    )
    for m in medians.values():
        assert abs(m - round(m)) < 0.3
    assert elapsed < 1800.0


def test_c8_parallel_determinism(acceptance_line):
    acceptance_line["name"] = "C8 parallel determinism"
    start = time.perf_counter()
    code = random_code(6, 1, 80)
    circ = build_extraction(code)
    noise = bernoulli_noise(circ, 1, 0.01, 2)
    blobs = []
    for workers in (1, 2, 4, 8):
        data = build_data_table_parallel(code, circ, noise, 1, workers=workers)
        blobs.append(build_decoding_table(code, data, 2).to_json(code, 0.01).encode())
    elapsed = time.perf_counter() - start
    acceptance_line["detail"] = f"{len(noise)} configurations, {len(blobs[0])} bytes, {elapsed:.1f}s"
    assert all(b == blobs[0] for b in blobs)
    assert elapsed < 300.0


def test_c9_monotone_in_rounds_and_monte_carlo(code4, acceptance_line):
    acceptance_line["name"] = "C9 monotonicity and Monte Carlo"
    start = time.perf_counter()
    code, circ = code4
    for p in (1e-3, 3e-3, 1e-2):
        values = []
        for q in (1, 2, 3):
            model = BernoulliModel.for_circuit(circ, p, q)
            table = decode_from_counts(code, build_count_table(code, circ, q, 2), model)
            values.append(evaluate_exact(code, table).p_total)
        assert values == sorted(values), (p, values)
    p, q = 0.01, 2
    model = BernoulliModel.for_circuit(circ, p, q)
    table = decode_from_counts(code, build_count_table(code, circ, q, 2), model)
    exact = evaluate_exact(code, table).p_total
    mc = evaluate_monte_carlo(code, circ, table, model, 100_000, np.random.default_rng(90), omega_max=2)
    z = abs(mc.p_total - exact) / mc.stderr
    elapsed = time.perf_counter() - start
    acceptance_line["detail"] = (
        f"exact {exact:.5f}, MC {mc.p_total:.5f} +- {mc.stderr:.5f} ({z:.2f} sigma), {elapsed:.1f}s"
    )
    assert z <= 3.0
    assert elapsed < 600.0
