"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
from collections import Counter
from functools import reduce

import numpy as np

from qrlc.clifford import CliffordGate
from qrlc.code import StabilizerCode
from qrlc.decoder import degenerate_key
from qrlc.extraction import BaseError, ExtractionCircuit, propagate
from qrlc.pauli import PauliOperator

I2 = np.eye(2, dtype=complex)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PZ = np.array([[1, 0], [0, -1]], dtype=complex)
PY = 1j * PX @ PZ
HAD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
SQZ = np.diag([1, 1j])


def kron_all(mats):
    return reduce(np.kron, mats)


def _embed(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    # qubit 0 is the leftmost tensor factor
    mats = [I2] * n
    mats[qubit] = op
    return kron_all(mats)


def dense_pauli(p: PauliOperator) -> np.ndarray:
    mats = []
    for q in range(p.n):
        mats.append({"I": I2, "X": PX, "Y": PY, "Z": PZ}[p.letter(q)])
    return kron_all(mats)


def dense_gate(g: CliffordGate, n: int) -> np.ndarray:
    if g.kind == "H":
        return _embed(HAD, g.targets[0], n)
    if g.kind == "SQRT_Z":
        return _embed(SQZ, g.targets[0], n)
    c, t = g.targets
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    return _embed(p0, c, n) + _embed(p1, c, n) @ _embed(PX, t, n)


def dense_circuit(gates, n: int) -> np.ndarray:
    u = np.eye(2**n, dtype=complex)
    for g in gates:
        u = dense_gate(g, n) @ u
    return u


def identify_pauli(m: np.ndarray, n: int) -> tuple[PauliOperator, complex]:
    """Return the Pauli ``P`` and phase with ``m == phase * P``; raises if ``m`` is not a Pauli."""
    for x in range(1 << n):
        for z in range(1 << n):
            p = PauliOperator(n, x, z)
            d = dense_pauli(p)
            phase = np.trace(d.conj().T @ m) / 2**n
            if abs(abs(phase) - 1) < 1e-9 and np.allclose(m, phase * d):
                return p, phase
    raise AssertionError("matrix is not a Pauli operator")


def stabilizer_group(code: StabilizerCode) -> set[tuple[int, int]]:
    out = set()
    for mask in range(1 << code.m):
        x = z = 0
        for i, s in enumerate(code.stabilizers):
            if (mask >> i) & 1:
                x ^= s.x
                z ^= s.z
        out.add((x, z))
    return out


def exhaustive_counts(
    code: StabilizerCode,
    circ: ExtractionCircuit,
    q: int,
    omega: int,
    include_flips: bool = True,
    require_flip: bool = False,
) -> Counter:
    """Count every ``omega``-fault configuration per (sequence, set code).

    Flips contribute 15 identical clones. Keys are computed from the explicit
    product of the propagated faults, not from any linear shortcut. With
    ``require_flip`` only configurations containing a flip are counted.
    """
    m = code.m
    locations: list[list[BaseError]] = []
    for g in range(1, q + 1):
        for s in circ.cnot_sites:
            locations.append([BaseError(g, "CNOT", s.index, p) for p in range(1, 16)])
        if include_flips:
            for kind in ("PREP", "MEAS"):
                for a in range(circ.n_ancilla):
                    locations.append([BaseError(g, kind, a)] * 15)
    info = {}
    for loc in locations:
        for b in loc:
            if b not in info:
                prop = propagate(circ, b)
                syn = [0] * q
                syn[b.g - 1] = prop.s_tilde
                for h in range(b.g, q):
                    syn[h] = prop.s_hat
                info[b] = (tuple(syn), prop.data)
    out: Counter = Counter()
    cache: dict = {}
    for locs in itertools.combinations(range(len(locations)), omega):
        if require_flip and all(locations[i][0].kind == "CNOT" for i in locs):
            continue
        for combo in itertools.product(*(locations[i] for i in locs)):
            syn = [0] * q
            e = PauliOperator(code.n)
            for b in combo:
                s_b, d_b = info[b]
                syn = [u ^ v for u, v in zip(syn, s_b)]
                e = e * d_b
            seq = sum(s << (g * m) for g, s in enumerate(syn))
            key = cache.get((e.x, e.z))
            if key is None:
                key = cache[(e.x, e.z)] = degenerate_key(code, e)
            out[(seq, key)] += 1
    return out


def fast_identify(m: np.ndarray, n: int) -> PauliOperator:
    """Identify a phased Pauli matrix from its first column and diagonal signs."""
    dim = 1 << n
    col = int(np.argmax(np.abs(m[:, 0])))
    x = sum(((col >> (n - 1 - q)) & 1) << q for q in range(n))
    perm = np.array([b ^ col for b in range(dim)])
    diag = m[perm, np.arange(dim)]
    ref = diag[0]
    z = 0
    for q in range(n):
        b = 1 << (n - 1 - q)
        ratio = diag[b] / ref
        if np.isclose(ratio, -1):
            z |= 1 << q
        elif not np.isclose(ratio, 1):
            raise AssertionError("matrix is not a Pauli operator")
    p = PauliOperator(n, x, z)
    phase = np.trace(dense_pauli(p).conj().T @ m) / dim
    assert abs(abs(phase) - 1) < 1e-9 and np.allclose(m, phase * dense_pauli(p))
    return p


def dense_suffix(circ: ExtractionCircuit, start: int) -> np.ndarray:
    return dense_circuit(circ.circuit.gates[start:], circ.circuit.n_qubits)


def dense_propagate(circ: ExtractionCircuit, b: BaseError) -> tuple[PauliOperator, PauliOperator]:
    """Push a fault through the rest of the round with dense unitaries."""
    from qrlc.extraction import pattern_letters

    n, m = circ.n_data, circ.n_ancilla
    nq = n + m
    fault = PauliOperator(nq)
    if b.kind == "CNOT":
        site = circ.cnot_sites[b.site]
        start = site.gate_index + 1
        la, ld = pattern_letters(b.pattern)
        fault = PauliOperator.single(nq, n + site.ancilla, la) * PauliOperator.single(nq, site.data, ld)
    else:
        points = circ.prep_points if b.kind == "PREP" else circ.meas_points
        start = points[b.site]
        fault = PauliOperator.single(nq, n + b.site, "X")
    u = dense_suffix(circ, start)
    img = fast_identify(u @ dense_pauli(fault) @ u.conj().T, nq)
    mask = (1 << n) - 1
    return PauliOperator(n, img.x & mask, img.z & mask), PauliOperator(m, img.x >> n, img.z >> n)


def measured_syndrome(circ: ExtractionCircuit, e: PauliOperator) -> int:
    """Run one noiseless round on ``e`` applied to an encoded state and read the ancillas."""
    code = circ.code
    n, m = code.n, code.m
    nq = n + m
    psi = np.zeros(1 << nq, dtype=complex)
    psi[0] = 1
    enc = dense_circuit(code.encoding.gates, n)
    full_enc = np.kron(enc, np.eye(1 << m))
    err = np.kron(dense_pauli(e), np.eye(1 << m))
    state = dense_circuit(circ.circuit.gates, nq) @ err @ full_enc @ psi
    probs = np.abs(state) ** 2
    out = 0
    for a in range(m):
        bit = nq - 1 - (n + a)
        p1 = sum(probs[i] for i in range(len(probs)) if (i >> bit) & 1)
        assert np.isclose(p1, 0) or np.isclose(p1, 1), "ancilla outcome is not deterministic"
        out |= int(round(p1)) << a
    return out
