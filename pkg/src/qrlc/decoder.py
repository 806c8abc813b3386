"""Degenerate-set decomposition and maximum-likelihood lookup decoding.

Every data error factors as ``e = E_s * S * L``: a fixed coset leader for its
syndrome, a stabilizer and a logical operator read off the reduced logical
matrix. Errors sharing ``(syndrome, logical bits)`` differ by a stabilizer and
are decoded identically, so a degenerate set is keyed by the integer
``(s_hat << 2k) | logical_bits``; call this the set code. Both components are
F2-linear in ``e``.

A data table maps syndrome sequence -> set code -> accumulated probability.
Masses are kept as exact fractions so that tables built from any partition of
the noise list merge to identical results.
"""

from __future__ import annotations

import json
import logging
from itertools import combinations, product
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from qrlc.clifford import conjugate
from qrlc.code import StabilizerCode, descriptor_hash
from qrlc.errors import ConsistencyError, DataError, DimensionError, ParameterError
from qrlc.extraction import BaseError, ExtractionCircuit, propagate, sequence_bits
from qrlc.kernels import int_from_words, segment_argmax, words_from_int
from qrlc.pauli import PauliOperator, to_binary

logger = logging.getLogger(__name__)

__all__ = [
    "DataTable",
    "DecodingTable",
    "Decomposition",
    "bernoulli_noise",
    "build_data_table",
    "build_data_table_parallel",
    "build_decoding_table",
    "choose_winners",
    "coset_leader",
    "correction_success",
    "decompose",
    "decompose_alt",
    "degenerate_key",
    "degenerate_key_alt",
    "logical_part",
    "logical_operator",
    "merge_data_tables",
    "representative",
]

TABLE_FORMAT = "qrlc-decoding-table"
TABLE_VERSION = 1
Noise = Iterable[tuple[float | Fraction, Sequence[BaseError]]]


def coset_leader(code: StabilizerCode, s_hat: int) -> PauliOperator:
    """Fixed representative ``E`` with syndrome ``s_hat`` (the map ``f_e``)."""
    if s_hat < 0 or s_hat >> code.m:
        raise DimensionError(f"syndrome {s_hat:#x} wider than {code.m} bits")
    x = z = 0
    for row, basis in zip(code.a_rref.transform.rows, code.coset_basis):
        if (row & s_hat).bit_count() & 1:
            x ^= basis.x
            z ^= basis.z
    return PauliOperator(code.n, x, z)


def _peel(code: StabilizerCode, v: int) -> tuple[int, int]:
    """Strip stabilizer then logical pivots from an ``XZ`` vector with zero syndrome."""
    for row, col in zip(code.a_rref.rre.rows, code.a_rref.pivots):
        if (v >> col) & 1:
            v ^= row
    bits = 0
    for i, (row, col) in enumerate(zip(code.logical_rref.lower.rows, code.logical_rref.lower_pivots)):
        if (v >> col) & 1:
            v ^= row
            bits |= 1 << i
    return bits, v


def logical_operator(code: StabilizerCode, bits: int) -> PauliOperator:
    """Product of the ``L_rre`` rows selected by ``bits``."""
    v = 0
    for i, row in enumerate(code.logical_rref.lower.rows):
        if (bits >> i) & 1:
            v ^= row
    mask = (1 << code.n) - 1
    return PauliOperator(code.n, v & mask, v >> code.n)


def logical_part(code: StabilizerCode, e: PauliOperator) -> tuple[PauliOperator, int]:
    """The map ``f_l``: logical component of ``e`` and its bits over ``L_rre``.

    Raises:
        ConsistencyError: If a residual survives both peeling passes.
    """
    leader = coset_leader(code, code.syndrome(e))
    v = to_binary(e * leader, "XZ").bits
    bits, residual = _peel(code, v)
    if residual:
        raise ConsistencyError(f"logical decomposition of {e} left residual {residual:#x}")
    return logical_operator(code, bits), bits


def degenerate_key(code: StabilizerCode, e: PauliOperator) -> int:
    """Set code ``(s_hat << 2k) | logical_bits`` of a data error."""
    s_hat = code.syndrome(e)
    _, bits = logical_part(code, e)
    return (s_hat << (2 * code.k)) | bits


def representative(code: StabilizerCode, set_code: int) -> PauliOperator:
    """Correction ``E_s * L`` of a degenerate set."""
    k2 = 2 * code.k
    return coset_leader(code, set_code >> k2) * logical_operator(code, set_code & ((1 << k2) - 1))


@dataclass(frozen=True)
class Decomposition:
    """``e = coset * stabilizer * logical``."""

    coset: PauliOperator
    stabilizer: PauliOperator
    logical: PauliOperator
    key: tuple[int, int]


def decompose(code: StabilizerCode, e: PauliOperator) -> Decomposition:
    """Split ``e`` using the reduced stabilizer and logical matrices."""
    s_hat = code.syndrome(e)
    leader = coset_leader(code, s_hat)
    logical, bits = logical_part(code, e)
    stab = e * leader * logical
    if not code.in_stabilizer_group(stab):
        raise ConsistencyError(f"stabilizer part of {e} is not in the stabilizer group")
    return Decomposition(leader, stab, logical, (s_hat, bits))


def decompose_alt(code: StabilizerCode, e: PauliOperator) -> Decomposition:
    """Split ``e`` by undoing the encoding circuit.

    ``U^dagger e U`` factors into a part on the logical qubits, ``X`` bits on the
    ancilla qubits (syndrome) and ``Z`` bits on them (stabilizer); each factor is
    encoded again.
    """
    n, k = code.n, code.k
    eu = conjugate(code.encoding, e, "inverse")
    low = (1 << k) - 1
    lu = PauliOperator(n, eu.x & low, eu.z & low)
    cu = PauliOperator(n, eu.x & ~low, 0)
    su = PauliOperator(n, 0, eu.z & ~low)
    enc = code.encoding
    key = (eu.x >> k, lu.x | (lu.z << k))
    return Decomposition(conjugate(enc, cu), conjugate(enc, su), conjugate(enc, lu), key)


def degenerate_key_alt(code: StabilizerCode, e: PauliOperator) -> tuple[int, int]:
    return decompose_alt(code, e).key


def correction_success(code: StabilizerCode, applied: PauliOperator, actual: PauliOperator) -> bool:
    """Whether applying ``applied`` after ``actual`` leaves a stabilizer."""
    return code.in_stabilizer_group(applied * actual)


@dataclass
class DataTable:
    """Probability mass per syndrome sequence and degenerate set.

    Attributes:
        n: Physical qubits.
        k: Logical qubits.
        q: Extraction rounds.
        masses: ``sequence -> set code -> mass``.
    """

    n: int
    k: int
    q: int
    masses: dict[int, dict[int, Fraction]] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.n - self.k

    def add(self, sequence: int, set_code: int, mass: Fraction) -> None:
        row = self.masses.setdefault(sequence, {})
        row[set_code] = row.get(set_code, Fraction(0)) + mass

    def total_mass(self) -> Fraction:
        return sum((sum(r.values(), Fraction(0)) for r in self.masses.values()), Fraction(0))

    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.k, self.q)


def _accumulate(
    code: StabilizerCode, circ: ExtractionCircuit, noise: Noise, q: int, table: DataTable
) -> DataTable:
    m = code.m
    for prob, errors in noise:
        seq = 0
        x = z = 0
        for b in errors:
            if not 1 <= b.g <= q:
                raise ParameterError(f"fault {b} outside rounds 1..{q}")
            prop = propagate(circ, b)
            seq ^= sequence_bits(prop, b.g, q, m)
            x ^= prop.data.x
            z ^= prop.data.z
        mass = prob if isinstance(prob, Fraction) else Fraction(prob)
        table.add(seq, degenerate_key(code, PauliOperator(code.n, x, z)), mass)
    return table


def build_data_table(code: StabilizerCode, circ: ExtractionCircuit, noise: Noise, q: int) -> DataTable:
    """Accumulate the mass of every listed compound error into its sequence and set."""
    return _accumulate(code, circ, noise, q, DataTable(code.n, code.k, q))


def merge_data_tables(tables: Sequence[DataTable]) -> DataTable:
    """Key-wise sum of tables built from disjoint parts of a noise list."""
    if not tables:
        raise ParameterError("nothing to merge")
    shape = tables[0].shape()
    out = DataTable(*shape)
    for t in tables:
        if t.shape() != shape:
            raise DimensionError("tables were built for different codes or round counts")
        for seq, row in t.masses.items():
            for set_code, mass in row.items():
                out.add(seq, set_code, mass)
    return out


def _worker(args: tuple) -> DataTable:
    code, circ, chunk, q = args
    return build_data_table(code, circ, chunk, q)


def build_data_table_parallel(
    code: StabilizerCode,
    circ: ExtractionCircuit,
    noise: Sequence[tuple[float | Fraction, Sequence[BaseError]]],
    q: int,
    workers: int = 1,
) -> DataTable:
    """Split the noise list into ``workers`` contiguous parts and merge the partial tables."""
    if workers < 1:
        raise ParameterError("worker count must be positive")
    noise = list(noise)
    if workers == 1:
        return build_data_table(code, circ, noise, q)
    bounds = np.linspace(0, len(noise), workers + 1).astype(int)
    chunks = [noise[bounds[i]:bounds[i + 1]] for i in range(workers)]
    propagate(circ, BaseError(1, "PREP", 0))  # warm the propagation cache before pickling
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_worker, [(code, circ, c, q) for c in chunks]))
    return merge_data_tables(parts)


def bernoulli_noise(
    circ: ExtractionCircuit, q: int, p: float, omega_max: int, include_identity: bool = True
) -> list[tuple[Fraction, tuple[BaseError, ...]]]:
    """Explicit list of every fault configuration with at most ``omega_max`` faults.

    Each location fails independently with probability ``p``; a failing CNOT
    picks one of its 15 patterns uniformly, a failing preparation or
    measurement flips its ancilla.
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError("p must lie in [0, 1]")
    locations: list[list[BaseError]] = []
    for g in range(1, q + 1):
        for s in circ.cnot_sites:
            locations.append([BaseError(g, "CNOT", s.index, pat) for pat in range(1, 16)])
        locations.extend([[BaseError(g, "PREP", a)] for a in range(circ.n_ancilla)])
        locations.extend([[BaseError(g, "MEAS", a)] for a in range(circ.n_ancilla)])
    total = len(locations)
    out: list[tuple[Fraction, tuple[BaseError, ...]]] = []
    for omega in range(0 if include_identity else 1, omega_max + 1):
        base = (1.0 - p) ** (total - omega)
        for locs in combinations(range(total), omega):
            for combo in product(*(locations[i] for i in locs)):
                prob = base
                for b in combo:
                    prob *= p / 15.0 if b.kind == "CNOT" else p
                out.append((Fraction(prob), combo))
    return out


@dataclass
class DecodingTable:
    """Winning degenerate set per observed syndrome sequence.

    Attributes:
        n: Physical qubits.
        k: Logical qubits.
        q: Extraction rounds.
        seq_keys: ``(S, W)`` sequence words, sorted.
        winner: Set code of the chosen correction per sequence.
        winner_mass: Probability mass of the chosen set.
        total_mass: Mass of all enumerated errors with that sequence.
        residual_mass: Probability of errors not represented in the table,
            all of which count as failures.
        omega_max: Fault order the table was truncated at, if any.
        diagnostics: Free-form build information.
        loser_mass: Mass of the non-winning sets per sequence, summed
            directly to avoid cancellation; derived from the totals if absent.
    """

    n: int
    k: int
    q: int
    seq_keys: np.ndarray
    winner: np.ndarray
    winner_mass: np.ndarray
    total_mass: np.ndarray
    residual_mass: float
    omega_max: int | None = None
    diagnostics: dict = field(default_factory=dict)
    loser_mass: np.ndarray | None = None
    _index: dict | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.n - self.k

    def __len__(self) -> int:
        return int(self.winner.shape[0])

    def failure_masses(self) -> np.ndarray:
        if self.loser_mass is not None:
            return self.loser_mass
        return np.maximum(self.total_mass - self.winner_mass, 0.0)

    def sequences(self) -> list[int]:
        return [int_from_words(r) for r in self.seq_keys]

    def _lookup_index(self) -> dict:
        if self._index is None:
            self._index = {self.seq_keys[i].tobytes(): i for i in range(len(self))}
        return self._index

    def lookup(self, sequence: int) -> int | None:
        """Set code chosen for ``sequence``, or ``None`` if never observed."""
        words = words_from_int(sequence, self.seq_keys.shape[1])
        i = self._lookup_index().get(words.tobytes())
        return None if i is None else int(self.winner[i])

    def lookup_rows(self, rows: np.ndarray) -> np.ndarray:
        """Row index per sequence in ``rows`` (``(S, W)`` words), ``-1`` if unseen."""
        index = self._lookup_index()
        rows = np.ascontiguousarray(rows, dtype=np.uint64)
        return np.array([index.get(r.tobytes(), -1) for r in rows], dtype=np.int64)

    def correction(self, code: StabilizerCode, sequence: int) -> PauliOperator | None:
        set_code = self.lookup(sequence)
        return None if set_code is None else representative(code, set_code)

    def to_json(self, code: StabilizerCode, p: float | None = None) -> str:
        """Serialise with a header binding the table to its code."""
        return json.dumps(self.to_dict(code, p), indent=1, sort_keys=True)

    def to_dict(self, code: StabilizerCode, p: float | None = None) -> dict:
        if (code.n, code.k) != (self.n, self.k):
            raise DimensionError("code does not match the table")
        width = max(1, -(-self.q * self.m // 4))
        entries = []
        for i, seq in enumerate(self.sequences()):
            entries.append({
                "sequence": format(seq, f"0{width}x"),
                "correction": str(representative(code, int(self.winner[i]))),
                "mass": float(self.winner_mass[i]),
                "total": float(self.total_mass[i]),
            })
        doc = {
            "format": TABLE_FORMAT,
            "version": TABLE_VERSION,
            "code_hash": descriptor_hash(code),
            "n": self.n,
            "k": self.k,
            "q": self.q,
            "p": p,
            "omega_max": self.omega_max,
            "residual_mass": float(self.residual_mass),
            "diagnostics": self.diagnostics,
            "entries": entries,
        }
        return doc

    @classmethod
    def from_json(cls, text: str | dict, code: StabilizerCode) -> DecodingTable:
        """Load a table, checking that it was built for ``code``.

        Raises:
            DataError: On a format, version or code-hash mismatch.
        """
        doc = json.loads(text) if isinstance(text, str) else text
        if doc.get("format") != TABLE_FORMAT or doc.get("version") != TABLE_VERSION:
            raise DataError("not a decoding table of a supported version")
        if doc.get("code_hash") != descriptor_hash(code):
            raise DataError("decoding table was built for a different code")
        q = int(doc["q"])
        seqs, winners, wm, tm = [], [], [], []
        for e in doc["entries"]:
            seqs.append(int(e["sequence"], 16))
            winners.append(degenerate_key(code, PauliOperator.from_string(e["correction"], code.n)))
            wm.append(float(e["mass"]))
            tm.append(float(e["total"]))
        width = max(1, -(-q * code.m // 64))
        keys = np.array([words_from_int(s, width) for s in seqs], dtype=np.uint64).reshape(-1, width)
        return cls(
            code.n, code.k, q, keys, np.array(winners, dtype=np.uint64), np.array(wm), np.array(tm),
            float(doc["residual_mass"]), doc.get("omega_max"), dict(doc.get("diagnostics", {})),
        )


def _seq_width(q: int, m: int) -> int:
    return max(1, -(-q * m // 64))


def build_decoding_table(
    code: StabilizerCode, data: DataTable, omega_max: int | None = None
) -> DecodingTable:
    """Pick the heaviest degenerate set for every sequence of a data table.

    Ties go to the set whose correction has the lexicographically smallest
    ``XZ`` binary form. Mass outside the table (``1 - total``) is recorded as
    residual.
    """
    if (code.n, code.k) != (data.n, data.k):
        raise DimensionError("code does not match the data table")
    width = _seq_width(data.q, data.m)
    seqs = sorted(data.masses)
    keys = np.array([words_from_int(s, width) for s in seqs], dtype=np.uint64).reshape(-1, width)
    order = np.lexsort(keys.T) if len(seqs) else np.zeros(0, dtype=np.int64)
    seqs = [seqs[i] for i in order]
    winners, wmass, tmass, lmass = [], [], [], []
    total = Fraction(0)
    for s in seqs:
        row = data.masses[s]
        best = max(row.values())
        tied = [c for c, v in row.items() if v == best]
        if len(tied) > 1:
            tied.sort(key=lambda c: representative(code, c).lex_key())
        winners.append(tied[0])
        wmass.append(float(best))
        row_total = sum(row.values(), Fraction(0))
        tmass.append(float(row_total))
        lmass.append(float(row_total - best))
        total += row_total
    residual = max(Fraction(0), 1 - total)
    return DecodingTable(
        code.n, code.k, data.q, keys[order],
        np.array(winners, dtype=np.uint64), np.array(wmass, dtype=np.float64),
        np.array(tmass, dtype=np.float64), float(residual), omega_max,
        loser_mass=np.array(lmass, dtype=np.float64),
    )


def choose_winners(
    code: StabilizerCode, set_codes: np.ndarray, masses: np.ndarray, starts: np.ndarray
) -> np.ndarray:
    """Winner index per segment with the lexicographic tie-break applied."""
    idx, ties = segment_argmax(masses, starts)
    if ties.any():
        ends = np.append(starts[1:], masses.size)
        for s in np.flatnonzero(ties):
            lo, hi = int(starts[s]), int(ends[s])
            seg = masses[lo:hi]
            cands = lo + np.flatnonzero(seg == seg.max())
            idx[s] = min(cands, key=lambda i: representative(code, int(set_codes[i])).lex_key())
    return idx
