"""Clifford gates, circuits, conjugation and the two-qubit Clifford group.

Gates act on 0-based qubit indices. Conjugation is phase-free: signs are
dropped, which makes ``SQRT_Z`` and its inverse act identically on Paulis.
:class:`CliffordTableau` keeps sign bits so that group elements can be
told apart modulo a global phase.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from qrlc.errors import DimensionError, PreconditionError
from qrlc.pauli import PauliOperator

logger = logging.getLogger(__name__)

__all__ = [
    "C2_ORDER",
    "CliffordCircuit",
    "CliffordGate",
    "CliffordTableau",
    "conjugate",
    "enumerate_c2",
    "random_c2",
]

GateKind = Literal["H", "SQRT_Z", "CNOT"]
_ARITY = {"H": 1, "SQRT_Z": 1, "CNOT": 2}
C2_ORDER = 11520


@dataclass(frozen=True, slots=True)
class CliffordGate:
    """One elementary gate; ``CNOT`` targets are ``(control, target)``."""

    kind: str
    targets: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in _ARITY:
            raise PreconditionError(f"unknown gate {self.kind!r}")
        if len(self.targets) != _ARITY[self.kind]:
            raise DimensionError(f"{self.kind} takes {_ARITY[self.kind]} qubit(s)")
        if len(set(self.targets)) != len(self.targets):
            raise PreconditionError("CNOT control and target must differ")

    def relabel(self, mapping: Sequence[int]) -> CliffordGate:
        return CliffordGate(self.kind, tuple(mapping[t] for t in self.targets))

    def __str__(self) -> str:
        return f"{self.kind}({','.join(str(t) for t in self.targets)})"


def H(q: int) -> CliffordGate:  # noqa: N802
    return CliffordGate("H", (q,))


def SQRT_Z(q: int) -> CliffordGate:  # noqa: N802
    return CliffordGate("SQRT_Z", (q,))


def CNOT(control: int, target: int) -> CliffordGate:  # noqa: N802
    return CliffordGate("CNOT", (control, target))


@dataclass(frozen=True)
class CliffordCircuit:
    """Gate list applied left to right on ``n_qubits`` qubits."""

    n_qubits: int
    gates: tuple[CliffordGate, ...] = ()

    def __post_init__(self) -> None:
        for g in self.gates:
            if max(g.targets) >= self.n_qubits or min(g.targets) < 0:
                raise DimensionError(f"gate {g} outside {self.n_qubits} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def then(self, other: CliffordCircuit | Iterable[CliffordGate]) -> CliffordCircuit:
        extra = other.gates if isinstance(other, CliffordCircuit) else tuple(other)
        return CliffordCircuit(self.n_qubits, self.gates + tuple(extra))

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)


def _apply_phase_free(x: int, z: int, gate: CliffordGate) -> tuple[int, int]:
    kind = gate.kind
    if kind == "CNOT":
        c, t = gate.targets
        if (x >> c) & 1:
            x ^= 1 << t
        if (z >> t) & 1:
            z ^= 1 << c
    elif kind == "H":
        q = gate.targets[0]
        xb = (x >> q) & 1
        zb = (z >> q) & 1
        if xb != zb:
            x ^= 1 << q
            z ^= 1 << q
    else:
        q = gate.targets[0]
        if (x >> q) & 1:
            z ^= 1 << q
    return x, z


def conjugate(
    circuit: CliffordCircuit | Sequence[CliffordGate],
    p: PauliOperator,
    direction: str = "forward",
) -> PauliOperator:
    """Conjugate a Pauli through a circuit, ignoring phases.

    Args:
        circuit: Circuit implementing ``U`` (gates applied left to right).
        p: Operator on the circuit's qubits.
        direction: ``"forward"`` returns ``U p U^dagger``; ``"inverse"``
            returns ``U^dagger p U``.
    """
    gates = circuit.gates if isinstance(circuit, CliffordCircuit) else tuple(circuit)
    if isinstance(circuit, CliffordCircuit) and circuit.n_qubits != p.n:
        raise DimensionError(f"circuit on {circuit.n_qubits} qubits, operator on {p.n}")
    if direction == "inverse":
        gates = gates[::-1]
    elif direction != "forward":
        raise PreconditionError(f"unknown direction {direction!r}")
    x, z = p.x, p.z
    for g in gates:
        x, z = _apply_phase_free(x, z, g)
    return PauliOperator(p.n, x, z)


@dataclass(frozen=True)
class CliffordTableau:
    """Signed stabilizer tableau of a Clifford unitary modulo global phase.

    Row ``j`` holds the image of ``X_j`` and row ``n + j`` the image of
    ``Z_j``, each as ``(x, z, sign)``.

    Attributes:
        n_qubits: Number of qubits.
        rows: Image rows as ``(x, z, sign)`` triples.
        gates: One gate sequence realizing the element.
    """

    n_qubits: int
    rows: tuple[tuple[int, int, int], ...]
    gates: tuple[CliffordGate, ...] = field(default=(), compare=False)

    @classmethod
    def identity(cls, n_qubits: int) -> CliffordTableau:
        xs = tuple((1 << j, 0, 0) for j in range(n_qubits))
        zs = tuple((0, 1 << j, 0) for j in range(n_qubits))
        return cls(n_qubits, xs + zs)

    @classmethod
    def from_gates(cls, n_qubits: int, gates: Iterable[CliffordGate]) -> CliffordTableau:
        t = cls.identity(n_qubits)
        for g in gates:
            t = t.then(g)
        return t

    def then(self, gate: CliffordGate) -> CliffordTableau:
        """Return the element obtained by applying ``gate`` after this one."""
        rows = tuple(_chp_update(r, gate) for r in self.rows)
        return CliffordTableau(self.n_qubits, rows, self.gates + (gate,))

    def key(self) -> tuple[tuple[int, int, int], ...]:
        """Canonical key; equal keys mean equal unitaries up to global phase."""
        return self.rows

    def phase_free_key(self) -> tuple[tuple[int, int], ...]:
        return tuple((x, z) for x, z, _ in self.rows)

    def conjugate(self, p: PauliOperator) -> PauliOperator:
        """Phase-free image ``U p U^dagger``."""
        if p.n != self.n_qubits:
            raise DimensionError("operator size does not match the tableau")
        x = z = 0
        n = self.n_qubits
        for j in range(n):
            if (p.x >> j) & 1:
                x ^= self.rows[j][0]
                z ^= self.rows[j][1]
            if (p.z >> j) & 1:
                x ^= self.rows[n + j][0]
                z ^= self.rows[n + j][1]
        return PauliOperator(n, x, z)

    def compose(self, other: CliffordTableau) -> CliffordTableau:
        """Element applying ``self`` first and then ``other``."""
        out = self
        for g in other.gates:
            out = out.then(g)
        return out

    def circuit(self) -> CliffordCircuit:
        return CliffordCircuit(self.n_qubits, self.gates)


def _chp_update(row: tuple[int, int, int], gate: CliffordGate) -> tuple[int, int, int]:
    x, z, r = row
    if gate.kind == "H":
        a = gate.targets[0]
        xa = (x >> a) & 1
        za = (z >> a) & 1
        r ^= xa & za
        if xa != za:
            x ^= 1 << a
            z ^= 1 << a
    elif gate.kind == "SQRT_Z":
        a = gate.targets[0]
        xa = (x >> a) & 1
        r ^= xa & ((z >> a) & 1)
        z ^= xa << a
    else:
        a, b = gate.targets
        xa = (x >> a) & 1
        za = (z >> a) & 1
        xb = (x >> b) & 1
        zb = (z >> b) & 1
        r ^= xa & zb & (xb ^ za ^ 1)
        x ^= xa << b
        z ^= zb << a
    return (x, z, r)


C2_GENERATORS: tuple[CliffordGate, ...] = (H(0), H(1), SQRT_Z(0), SQRT_Z(1), CNOT(0, 1), CNOT(1, 0))


@functools.lru_cache(maxsize=1)
def enumerate_c2() -> tuple[CliffordTableau, ...]:
    """All two-qubit Cliffords modulo global phase, in breadth-first order.

    Each element carries a shortest gate sequence over ``H``, ``SQRT_Z`` and
    ``CNOT``. Phase-free tableaus alone would identify elements differing by a
    Pauli factor and give only the symplectic group of order 720.
    """
    start = CliffordTableau.identity(2)
    seen = {start.key()}
    order = [start]
    frontier = [start]
    while frontier:
        nxt = []
        for t in frontier:
            for g in C2_GENERATORS:
                u = t.then(g)
                k = u.key()
                if k not in seen:
                    seen.add(k)
                    order.append(u)
                    nxt.append(u)
        frontier = nxt
    if len(order) != C2_ORDER:
        raise AssertionError(f"enumerated {len(order)} elements, expected {C2_ORDER}")
    logger.debug("enumerated %d two-qubit Cliffords", len(order))
    return tuple(order)


def random_c2(rng: np.random.Generator) -> CliffordTableau:
    """Draw a uniformly random element of the two-qubit Clifford group."""
    group = enumerate_c2()
    return group[int(rng.integers(len(group)))]
