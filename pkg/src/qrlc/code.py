"""Random stabilizer codes built from random two-qubit Clifford blocks.

An encoding unitary ``U`` on ``n`` qubits defines an ``[[n, k]]`` code with
stabilizers ``S_i = U Z_{k+i} U^dagger`` and logicals ``U X_j U^dagger`` and
``U Z_j U^dagger`` for ``j < k``. The decoder works with the reduced row
echelon forms of the stabilizer and logical matrices, which are derived here
once per code.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from qrlc.clifford import CNOT, H, CliffordCircuit, CliffordGate, conjugate, random_c2
from qrlc.errors import DataError, ParameterError, PreconditionError
from qrlc.f2 import BinaryMatrix, ConstrainedRref, RrefResult, constrained_rref, rref
from qrlc.pauli import BinaryVector, PauliOperator, from_binary, to_binary

logger = logging.getLogger(__name__)

__all__ = [
    "StabilizerCode",
    "code_from_descriptor",
    "default_gate_count",
    "derive_code",
    "descriptor_hash",
    "generate_encoding",
    "random_code",
    "reduce_stabilizer_weight",
    "two_qubit_example",
]

DESCRIPTOR_FORMAT = "qrlc-code"
DESCRIPTOR_VERSION = 1


def default_gate_count(n: int, constant: float = 1.0) -> int:
    """Number of random two-qubit blocks: ``ceil(c * n * log2(n)^2)``."""
    if n < 2:
        raise ParameterError("random encodings need at least two qubits")
    return math.ceil(constant * n * math.log2(n) ** 2)


def generate_encoding(
    n: int,
    k: int,
    rng: np.random.Generator,
    num_gates: int | None = None,
    gate_constant: float = 1.0,
) -> CliffordCircuit:
    """Compose random two-qubit Cliffords on random ordered qubit pairs.

    Args:
        n: Number of physical qubits.
        k: Number of logical qubits; only validated here.
        rng: Source of randomness.
        num_gates: Number of two-qubit blocks; defaults to
            :func:`default_gate_count`.
        gate_constant: Constant ``c`` used when ``num_gates`` is omitted.

    Raises:
        ParameterError: If ``n < 2`` or ``k`` is not in ``1..n-1``.
    """
    if n < 2:
        raise ParameterError("random encodings need at least two qubits")
    if not 1 <= k < n:
        raise ParameterError(f"need 1 <= k < n, got k={k}, n={n}")
    blocks = default_gate_count(n, gate_constant) if num_gates is None else num_gates
    if blocks < 0:
        raise ParameterError("gate count must be non-negative")
    gates: list[CliffordGate] = []
    for _ in range(blocks):
        element = random_c2(rng)
        a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
        gates.extend(g.relabel((a, b)) for g in element.gates)
    return CliffordCircuit(n, tuple(gates))


@dataclass(frozen=True)
class StabilizerCode:
    """An ``[[n, k]]`` stabilizer code together with its decoder structures.

    Attributes:
        n: Physical qubits.
        k: Logical qubits.
        encoding: Encoding circuit ``U``.
        stabilizers: Generators used for syndrome extraction.
        logical_x: ``U X_j U^dagger`` for ``j < k``.
        logical_z: ``U Z_j U^dagger`` for ``j < k``.
        a_matrix: Stabilizer generators in ``XZ`` layout, one per row.
        a_rref: Row reduction of ``a_matrix``.
        logical_rref: Logical matrix reduced against ``a_rref``.
        coset_basis: ``E_i`` with syndrome ``e_i`` with respect to ``A_rre``.
        seed: Seed the code was generated from, if any.
        reduced: Whether the stabilizers were replaced by the ``A_rre`` rows.
    """

    n: int
    k: int
    encoding: CliffordCircuit
    stabilizers: tuple[PauliOperator, ...]
    logical_x: tuple[PauliOperator, ...]
    logical_z: tuple[PauliOperator, ...]
    a_matrix: BinaryMatrix = field(repr=False)
    a_rref: RrefResult = field(repr=False)
    logical_rref: ConstrainedRref = field(repr=False)
    coset_basis: tuple[PauliOperator, ...] = field(repr=False)
    seed: int | None = None
    reduced: bool = False

    @property
    def m(self) -> int:
        """Number of stabilizer generators, ``n - k``."""
        return self.n - self.k

    @property
    def stabilizer_weights(self) -> tuple[int, ...]:
        return tuple(s.weight() for s in self.stabilizers)

    @property
    def n_cnot(self) -> int:
        """CNOT count of one extraction round: total stabilizer weight."""
        return sum(self.stabilizer_weights)

    def syndrome(self, e: PauliOperator) -> int:
        """Syndrome bits ``s_i = <e, S_i>`` packed as an ``m``-bit integer."""
        out = 0
        for i, s in enumerate(self.stabilizers):
            if ((e.x & s.z) ^ (e.z & s.x)).bit_count() & 1:
                out |= 1 << i
        return out

    def in_stabilizer_group(self, e: PauliOperator) -> bool:
        """Membership test via row reduction against ``A_rre``."""
        v = to_binary(e, "XZ").bits
        for row, col in zip(self.a_rref.rre.rows, self.a_rref.pivots):
            if (v >> col) & 1:
                v ^= row
        return v == 0

    def descriptor(self) -> dict[str, Any]:
        return {
            "format": DESCRIPTOR_FORMAT,
            "version": DESCRIPTOR_VERSION,
            "n": self.n,
            "k": self.k,
            "seed": self.seed,
            "reduced": self.reduced,
            "gates": [[g.kind, list(g.targets)] for g in self.encoding.gates],
            "stabilizers": [str(s) for s in self.stabilizers],
            "logical_x": [str(p) for p in self.logical_x],
            "logical_z": [str(p) for p in self.logical_z],
        }

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), indent=1, sort_keys=True)


def _build(
    n: int,
    k: int,
    encoding: CliffordCircuit,
    stabilizers: tuple[PauliOperator, ...],
    logical_x: tuple[PauliOperator, ...],
    logical_z: tuple[PauliOperator, ...],
    seed: int | None,
    reduced: bool,
) -> StabilizerCode:
    a_matrix = BinaryMatrix(tuple(to_binary(s, "XZ").bits for s in stabilizers), 2 * n)
    a_res = rref(a_matrix)
    if len(a_res.pivots) != n - k:
        raise PreconditionError("stabilizer generators are not independent")
    l_matrix = BinaryMatrix(tuple(to_binary(p, "XZ").bits for p in logical_x + logical_z), 2 * n)
    l_res = constrained_rref(a_res.rre, l_matrix)
    if len(l_res.lower_pivots) != 2 * k:
        raise PreconditionError("logical operators are not independent of the stabilizers")
    coset = []
    for h in a_res.pivots:
        coset.append(PauliOperator.single(n, h, "Z") if h < n else PauliOperator.single(n, h - n, "X"))
    return StabilizerCode(
        n=n,
        k=k,
        encoding=encoding,
        stabilizers=stabilizers,
        logical_x=logical_x,
        logical_z=logical_z,
        a_matrix=a_matrix,
        a_rref=a_res,
        logical_rref=l_res,
        coset_basis=tuple(coset),
        seed=seed,
        reduced=reduced,
    )


def derive_code(encoding: CliffordCircuit, k: int, seed: int | None = None) -> StabilizerCode:
    """Derive stabilizers, logicals and decoder structures from ``U``."""
    n = encoding.n_qubits
    if not 1 <= k < n:
        raise ParameterError(f"need 1 <= k < n, got k={k}, n={n}")
    stabs = tuple(conjugate(encoding, PauliOperator.single(n, k + i, "Z")) for i in range(n - k))
    lx = tuple(conjugate(encoding, PauliOperator.single(n, j, "X")) for j in range(k))
    lz = tuple(conjugate(encoding, PauliOperator.single(n, j, "Z")) for j in range(k))
    return _build(n, k, encoding, stabs, lx, lz, seed, False)


def random_code(
    n: int, k: int, seed: int, gate_constant: float = 1.0, num_gates: int | None = None
) -> StabilizerCode:
    """Generate the random code determined by ``seed``."""
    rng = np.random.default_rng(seed)
    return derive_code(generate_encoding(n, k, rng, num_gates, gate_constant), k, seed)


def reduce_stabilizer_weight(code: StabilizerCode) -> StabilizerCode:
    """Replace the generators by the rows of ``A_rre``.

    The stabilizer group is unchanged; the rows typically carry fewer non-trivial
    letters because every pivot column is cleared from all other rows.
    """
    rows = [r for r in code.a_rref.rre.rows if r]
    stabs = tuple(from_binary(BinaryVector(r, 2 * code.n, "XZ")) for r in rows)
    out = _build(code.n, code.k, code.encoding, stabs, code.logical_x, code.logical_z, code.seed, True)
    before = sum(code.stabilizer_weights) / code.m
    after = sum(out.stabilizer_weights) / out.m
    logger.info("stabilizer weight %.3f -> %.3f (pivots in Z half: %s)", before, after,
                all(h < code.n for h in code.a_rref.pivots))
    return out


def two_qubit_example() -> StabilizerCode:
    """The ``[[2, 1]]`` code with ``U = CNOT(control 1, target 0) H(1)``."""
    enc = CliffordCircuit(2, (H(1), CNOT(1, 0)))
    return derive_code(enc, 1)


def code_from_descriptor(data: dict[str, Any] | str) -> StabilizerCode:
    """Rebuild a code from its descriptor and verify the stored operators.

    Raises:
        DataError: If the descriptor is malformed or inconsistent.
    """
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("format") != DESCRIPTOR_FORMAT or data.get("version") != DESCRIPTOR_VERSION:
        raise DataError("not a code descriptor of a supported version")
    try:
        n, k = int(data["n"]), int(data["k"])
        gates = tuple(CliffordGate(kind, tuple(int(t) for t in targets)) for kind, targets in data["gates"])
        code = derive_code(CliffordCircuit(n, gates), k, data.get("seed"))
        if data.get("reduced"):
            code = reduce_stabilizer_weight(code)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed code descriptor: {exc}") from exc
    for name in ("stabilizers", "logical_x", "logical_z"):
        stored = list(data.get(name, []))
        if stored != [str(p) for p in getattr(code, name)]:
            raise DataError(f"descriptor field {name!r} does not match the encoding circuit")
    return code


def descriptor_hash(code: StabilizerCode) -> str:
    blob = json.dumps(code.descriptor(), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()
