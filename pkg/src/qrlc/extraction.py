"""Syndrome-extraction rounds and propagation of circuit faults.

One round measures every stabilizer with its own ancilla, gadget after gadget
in generator order. Ancilla ``i`` is qubit ``n + i`` of the round circuit.
Only the ancilla-data CNOTs are noisy; each suffers one of 15 two-qubit Pauli
faults right after it acts. Ancilla preparation and measurement flips are
modelled as an ``X`` at the start or end of the gadget.

Measurements are deferred to the end of the round, so a fault is propagated
through the remaining unitary part of the round and read off as a data error
``e`` (which later rounds leave untouched) and the ``X`` bits ``s~`` of the
ancilla part, which are the flipped syndrome bits of that round.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from qrlc.clifford import CNOT, SQRT_Z, H, CliffordCircuit, CliffordGate, conjugate
from qrlc.code import StabilizerCode
from qrlc.errors import DimensionError, ParameterError, PreconditionError
from qrlc.pauli import PauliOperator

logger = logging.getLogger(__name__)

__all__ = [
    "BaseError",
    "CnotSite",
    "ExtractionCircuit",
    "PropagatedError",
    "SyndromeSequence",
    "build_extraction",
    "enumerate_base_errors",
    "pattern_letters",
    "propagate",
    "round_syndrome",
    "sequence_bits",
    "syndrome_sequence",
]

LETTERS = "IXYZ"
N_PATTERNS = 15


def pattern_letters(pattern: int) -> tuple[str, str]:
    """Return ``(ancilla letter, data letter)`` of a CNOT fault pattern.

    Patterns are numbered ``4 * a + d`` with letters ordered ``I, X, Y, Z``;
    pattern 0 (``II``) is not a fault.
    """
    if not 1 <= pattern <= N_PATTERNS:
        raise ParameterError(f"pattern must be in 1..15, got {pattern}")
    return LETTERS[pattern >> 2], LETTERS[pattern & 3]


@dataclass(frozen=True, slots=True)
class CnotSite:
    """A noisy ancilla-data CNOT of the round.

    Attributes:
        index: Position in schedule order.
        gate_index: Index of the CNOT in the round circuit.
        ancilla: Ancilla (gadget) number.
        data: Data qubit.
    """

    index: int
    gate_index: int
    ancilla: int
    data: int


@dataclass(frozen=True)
class ExtractionCircuit:
    """One syndrome-extraction round for a code.

    Attributes:
        code: The code whose generators are measured.
        circuit: Round circuit on ``n + m`` qubits.
        cnot_sites: Noisy CNOTs in schedule order.
        prep_points: Per ancilla, the insertion point of a preparation flip.
        meas_points: Per ancilla, the insertion point of a measurement flip.

    An insertion point ``t`` means the fault acts right before ``gates[t]``.
    """

    code: StabilizerCode
    circuit: CliffordCircuit
    cnot_sites: tuple[CnotSite, ...]
    prep_points: tuple[int, ...]
    meas_points: tuple[int, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_data(self) -> int:
        return self.code.n

    @property
    def n_ancilla(self) -> int:
        return self.code.m

    @property
    def n_cnot(self) -> int:
        return len(self.cnot_sites)

    @property
    def locations_per_round(self) -> int:
        """CNOT sites plus one preparation and one measurement per ancilla."""
        return self.n_cnot + 2 * self.n_ancilla

    def base_errors_per_round(self) -> int:
        return N_PATTERNS * self.n_cnot + 2 * self.n_ancilla


def build_extraction(code: StabilizerCode) -> ExtractionCircuit:
    """Lay out the gadgets of one extraction round.

    Each gadget is ``H(a)``, a controlled Pauli per support qubit in increasing
    qubit order, then ``H(a)``. Controlled ``Z`` and ``Y`` are realised as a CNOT
    between basis changes (``H`` for ``Z``; ``SQRT_Z`` cubed before and
    ``SQRT_Z`` after for ``Y``).
    """
    n, m = code.n, code.m
    gates: list[CliffordGate] = []
    sites: list[CnotSite] = []
    prep: list[int] = []
    meas: list[int] = []
    for i, s in enumerate(code.stabilizers):
        a = n + i
        prep.append(len(gates))
        gates.append(H(a))
        for j in range(n):
            letter = s.letter(j)
            if letter == "I":
                continue
            pre: list[CliffordGate]
            post: list[CliffordGate]
            if letter == "X":
                pre, post = [], []
            elif letter == "Z":
                pre, post = [H(j)], [H(j)]
            else:
                pre, post = [SQRT_Z(j)] * 3, [SQRT_Z(j)]
            gates.extend(pre)
            sites.append(CnotSite(len(sites), len(gates), i, j))
            gates.append(CNOT(a, j))
            gates.extend(post)
        gates.append(H(a))
        meas.append(len(gates))
    circ = CliffordCircuit(n + m, tuple(gates))
    return ExtractionCircuit(code, circ, tuple(sites), tuple(prep), tuple(meas))


@dataclass(frozen=True, order=True, slots=True)
class BaseError:
    """A single fault at one location of one extraction round.

    Attributes:
        g: Extraction index, 1-based.
        kind: ``"CNOT"``, ``"PREP"`` or ``"MEAS"``.
        site: CNOT site index or ancilla number.
        pattern: CNOT fault pattern in ``1..15``; 0 for flips.
    """

    g: int
    kind: str
    site: int
    pattern: int = 0

    @property
    def location(self) -> tuple[int, str, int]:
        return (self.g, self.kind, self.site)

    def __str__(self) -> str:
        if self.kind == "CNOT":
            a, d = pattern_letters(self.pattern)
            return f"g{self.g}:CNOT{self.site}:{a}{d}"
        return f"g{self.g}:{self.kind}{self.site}"


@dataclass(frozen=True, slots=True)
class PropagatedError:
    """A fault pushed to the end of its round.

    Attributes:
        data: Data-qubit error ``e``.
        ancilla: Ancilla part ``e^s``.
        s_tilde: Syndrome flips of the faulty round (ancilla ``X`` bits).
        s_hat: Syndrome of ``data`` seen by every later round.
    """

    data: PauliOperator
    ancilla: PauliOperator
    s_tilde: int
    s_hat: int


def enumerate_base_errors(circ: ExtractionCircuit, q: int) -> list[BaseError]:
    """All single faults of ``q`` rounds: CNOT faults, then preparation and measurement flips."""
    if q < 1:
        raise ParameterError("need at least one extraction round")
    out: list[BaseError] = []
    for g in range(1, q + 1):
        for site in circ.cnot_sites:
            out.extend(BaseError(g, "CNOT", site.index, p) for p in range(1, N_PATTERNS + 1))
        out.extend(BaseError(g, "PREP", a) for a in range(circ.n_ancilla))
        out.extend(BaseError(g, "MEAS", a) for a in range(circ.n_ancilla))
    return out


def _suffix_images(circuit: CliffordCircuit, points: set[int]) -> dict[int, tuple[list, list]]:
    """Images of every single-qubit ``X`` and ``Z`` under ``gates[t:]`` for each ``t`` in ``points``.

    Sweeps the circuit backwards; prepending a gate updates the image table in
    constant time.
    """
    nq = circuit.n_qubits
    img_x = [(1 << q, 0) for q in range(nq)]
    img_z = [(0, 1 << q) for q in range(nq)]
    out: dict[int, tuple[list, list]] = {}
    gates = circuit.gates
    for t in range(len(gates), -1, -1):
        if t in points:
            out[t] = (list(img_x), list(img_z))
        if t == 0:
            break
        g = gates[t - 1]
        if g.kind == "CNOT":
            c, tg = g.targets
            xc, xt = img_x[c], img_x[tg]
            img_x[c] = (xc[0] ^ xt[0], xc[1] ^ xt[1])
            zt, zc = img_z[tg], img_z[c]
            img_z[tg] = (zt[0] ^ zc[0], zt[1] ^ zc[1])
        elif g.kind == "H":
            q = g.targets[0]
            img_x[q], img_z[q] = img_z[q], img_x[q]
        else:
            q = g.targets[0]
            xq, zq = img_x[q], img_z[q]
            img_x[q] = (xq[0] ^ zq[0], xq[1] ^ zq[1])
    return out


def _split(circ: ExtractionCircuit, x: int, z: int) -> PropagatedError:
    n, m = circ.n_data, circ.n_ancilla
    mask = (1 << n) - 1
    data = PauliOperator(n, x & mask, z & mask)
    anc = PauliOperator(m, x >> n, z >> n)
    return PropagatedError(data, anc, anc.x, circ.code.syndrome(data))


def _image(tables: tuple[list, list], qubit: int, letter: str) -> tuple[int, int]:
    img_x, img_z = tables
    x = z = 0
    if letter in "XY":
        x ^= img_x[qubit][0]
        z ^= img_x[qubit][1]
    if letter in "ZY":
        x ^= img_z[qubit][0]
        z ^= img_z[qubit][1]
    return x, z


def _propagation_table(circ: ExtractionCircuit) -> dict[tuple[str, int, int], PropagatedError]:
    cached = circ._cache.get("propagation")
    if cached is not None:
        return cached
    n = circ.n_data
    points = {s.gate_index + 1 for s in circ.cnot_sites} | set(circ.prep_points) | set(circ.meas_points)
    snaps = _suffix_images(circ.circuit, points)
    table: dict[tuple[str, int, int], PropagatedError] = {}
    for s in circ.cnot_sites:
        snap = snaps[s.gate_index + 1]
        for p in range(1, N_PATTERNS + 1):
            la, ld = pattern_letters(p)
            xa, za = _image(snap, n + s.ancilla, la) if la != "I" else (0, 0)
            xd, zd = _image(snap, s.data, ld) if ld != "I" else (0, 0)
            table[("CNOT", s.index, p)] = _split(circ, xa ^ xd, za ^ zd)
    for a in range(circ.n_ancilla):
        for kind, points_ in (("PREP", circ.prep_points), ("MEAS", circ.meas_points)):
            rec = _split(circ, *_image(snaps[points_[a]], n + a, "X"))
            if not rec.data.is_identity() or rec.s_tilde != 1 << a:
                raise AssertionError(f"{kind} flip on ancilla {a} did not propagate to a lone syndrome flip")
            table[(kind, a, 0)] = rec
    circ._cache["propagation"] = table
    return table


def propagate(circ: ExtractionCircuit, error: BaseError) -> PropagatedError:
    """Propagate a base error to the end of its round."""
    try:
        return _propagation_table(circ)[(error.kind, error.site, error.pattern)]
    except KeyError:
        raise PreconditionError(f"{error} is not a fault of this circuit") from None


def round_syndrome(circ: ExtractionCircuit, e: PauliOperator) -> int:
    """Ancilla ``X`` bits after a noiseless round acting on data error ``e``."""
    if e.n != circ.n_data:
        raise DimensionError("error does not act on the data qubits")
    img = conjugate(circ.circuit, PauliOperator(circ.circuit.n_qubits, e.x, e.z))
    return img.x >> circ.n_data


@dataclass(frozen=True, slots=True)
class SyndromeSequence:
    """Measured syndromes of ``q`` rounds packed into one integer.

    Round ``g`` (1-based) occupies bits ``(g - 1) m`` to ``g m - 1``.
    """

    q: int
    m: int
    bits: int = 0

    @classmethod
    def from_syndromes(cls, syndromes: list[int], m: int) -> SyndromeSequence:
        bits = 0
        for g, s in enumerate(syndromes):
            if s >> m:
                raise DimensionError("syndrome wider than m bits")
            bits |= s << (g * m)
        return cls(len(syndromes), m, bits)

    @property
    def syndromes(self) -> tuple[int, ...]:
        mask = (1 << self.m) - 1
        return tuple((self.bits >> (g * self.m)) & mask for g in range(self.q))

    def __xor__(self, other: SyndromeSequence) -> SyndromeSequence:
        if (self.q, self.m) != (other.q, other.m):
            raise DimensionError("sequences have different shapes")
        return SyndromeSequence(self.q, self.m, self.bits ^ other.bits)

    def hex(self) -> str:
        return format(self.bits, f"0{max(1, -(-self.q * self.m // 4))}x")


def sequence_bits(prop: PropagatedError, g: int, q: int, m: int) -> int:
    """Sequence of a fault at round ``g``: zeros, then ``s~``, then ``s^`` for later rounds."""
    bits = prop.s_tilde << ((g - 1) * m)
    for h in range(g, q):
        bits |= prop.s_hat << (h * m)
    return bits


def syndrome_sequence(circ: ExtractionCircuit, error: BaseError, q: int) -> SyndromeSequence:
    if not 1 <= error.g <= q:
        raise ParameterError(f"extraction index {error.g} outside 1..{q}")
    prop = propagate(circ, error)
    return SyndromeSequence(q, circ.n_ancilla, sequence_bits(prop, error.g, q, circ.n_ancilla))

