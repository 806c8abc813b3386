"""Phase-free Pauli operators in binary symplectic form.

A Pauli string on ``n`` qubits is stored as two ``n``-bit integers ``x`` and
``z``; bit ``j`` refers to qubit ``j`` (0-based). ``Y`` sets both bits. Global
phases are dropped throughout, so ``XZ`` and ``Y`` are the same operator.

Binary vectors of length ``2n`` carry an explicit layout tag: in ``"XZ"``
layout column ``j < n`` is the X bit of qubit ``j`` and column ``n + j`` its Z
bit; ``"ZX"`` swaps the halves. Column ``c`` of a binary vector is bit ``c`` of
its integer payload.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from qrlc.errors import DimensionError, PreconditionError

__all__ = [
    "BinaryVector",
    "PauliOperator",
    "from_binary",
    "pauli_mul",
    "pauli_weight",
    "symplectic_product",
    "to_binary",
]

LAYOUTS = ("XZ", "ZX")
_SPARSE_TOKEN = re.compile(r"([IXYZ])(\d+)")


def _parity(value: int) -> int:
    return value.bit_count() & 1


@dataclass(frozen=True, slots=True)
class BinaryVector:
    """Row vector over F2 packed into a Python integer.

    Attributes:
        bits: Payload; column ``c`` is ``(bits >> c) & 1``.
        length: Number of columns.
        layout: ``"XZ"``, ``"ZX"`` or ``None`` for untagged vectors such as
            syndromes.
    """

    bits: int
    length: int
    layout: str | None = None

    def __post_init__(self) -> None:
        if self.length < 0 or self.bits < 0 or self.bits >> self.length:
            raise DimensionError(f"payload {self.bits:#x} does not fit in {self.length} columns")
        if self.layout is not None and self.layout not in LAYOUTS:
            raise PreconditionError(f"unknown layout {self.layout!r}")

    @classmethod
    def from_list(cls, values: Iterable[int], layout: str | None = None) -> BinaryVector:
        vals = list(values)
        bits = 0
        for c, v in enumerate(vals):
            if v & 1:
                bits |= 1 << c
        return cls(bits, len(vals), layout)

    def to_list(self) -> list[int]:
        return [(self.bits >> c) & 1 for c in range(self.length)]

    def __getitem__(self, column: int) -> int:
        if not 0 <= column < self.length:
            raise IndexError(column)
        return (self.bits >> column) & 1

    def __xor__(self, other: BinaryVector) -> BinaryVector:
        if self.length != other.length or self.layout != other.layout:
            raise DimensionError("vectors differ in length or layout")
        return BinaryVector(self.bits ^ other.bits, self.length, self.layout)

    def weight(self) -> int:
        return self.bits.bit_count()

    def __str__(self) -> str:
        cols = "".join(str(v) for v in self.to_list())
        if self.layout is None:
            return f"[{cols}]"
        half = self.length // 2
        return f"[{cols[:half]}|{cols[half:]}]"


@dataclass(frozen=True, slots=True)
class PauliOperator:
    """Phase-free Pauli string on ``n`` qubits.

    Attributes:
        n: Number of qubits.
        x: X-component bitmask.
        z: Z-component bitmask.
    """

    n: int
    x: int = 0
    z: int = 0

    def __post_init__(self) -> None:
        if self.n < 0 or self.x < 0 or self.z < 0 or (self.x | self.z) >> self.n:
            raise DimensionError(f"components do not fit on {self.n} qubits")

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls(n, 0, 0)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> PauliOperator:
        """Return the weight-one operator ``letter`` acting on ``qubit``."""
        if not 0 <= qubit < n:
            raise DimensionError(f"qubit {qubit} outside 0..{n - 1}")
        bit = 1 << qubit
        if letter == "I":
            return cls(n)
        if letter == "X":
            return cls(n, bit, 0)
        if letter == "Z":
            return cls(n, 0, bit)
        if letter == "Y":
            return cls(n, bit, bit)
        raise PreconditionError(f"unknown Pauli letter {letter!r}")

    @classmethod
    def from_string(cls, text: str, n: int | None = None) -> PauliOperator:
        """Parse sparse (``"X1Z3"``, 1-based) or dense (``"XIZ"``) notation."""
        text = text.strip()
        if text == "I":
            return cls(1 if n is None else n)
        if text and set(text) <= set("IXYZ"):
            if n is not None and len(text) != n:
                raise DimensionError(f"dense string {text!r} has {len(text)} letters, expected {n}")
            op = cls(len(text))
            for q, letter in enumerate(text):
                op = op * cls.single(len(text), q, letter)
            return op
        if n is None:
            raise PreconditionError("sparse notation needs an explicit qubit count")
        pos = 0
        x = z = 0
        seen = 0
        for match in _SPARSE_TOKEN.finditer(text):
            if match.start() != pos:
                raise PreconditionError(f"cannot parse Pauli string {text!r}")
            pos = match.end()
            q = int(match.group(2)) - 1
            if not 0 <= q < n:
                raise DimensionError(f"qubit index {q + 1} outside 1..{n}")
            if seen >> q & 1:
                raise PreconditionError(f"qubit {q + 1} listed twice in {text!r}")
            seen |= 1 << q
            letter = match.group(1)
            if letter in "XY":
                x |= 1 << q
            if letter in "ZY":
                z |= 1 << q
        if pos != len(text):
            raise PreconditionError(f"cannot parse Pauli string {text!r}")
        return cls(n, x, z)

    def letter(self, qubit: int) -> str:
        xb = (self.x >> qubit) & 1
        zb = (self.z >> qubit) & 1
        return "IXZY"[xb | (zb << 1)]

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return pauli_mul(self, other)

    def is_identity(self) -> bool:
        return not (self.x | self.z)

    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def commutes(self, other: PauliOperator) -> bool:
        return symplectic_product(self, other) == 0

    def restrict(self, qubits: range) -> PauliOperator:
        """Return the tensor factor on a contiguous block of qubits, relabelled from 0."""
        width = len(qubits)
        mask = (1 << width) - 1
        return PauliOperator(width, (self.x >> qubits.start) & mask, (self.z >> qubits.start) & mask)

    def dense(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    def lex_key(self) -> str:
        """Column string of the ``XZ`` binary form; orders operators lexicographically."""
        return "".join(str(b) for b in to_binary(self, "XZ").to_list())

    def __str__(self) -> str:
        parts = [f"{self.letter(q)}{q + 1}" for q in range(self.n) if self.letter(q) != "I"]
        return "".join(parts) if parts else "I"


def pauli_mul(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Product of two Paulis with the phase discarded."""
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} vs {b.n}")
    return PauliOperator(a.n, a.x ^ b.x, a.z ^ b.z)


def symplectic_product(a: PauliOperator, b: PauliOperator) -> int:
    """Return 0 if ``a`` and ``b`` commute and 1 otherwise."""
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} vs {b.n}")
    return _parity((a.x & b.z) ^ (a.z & b.x))


def pauli_weight(p: PauliOperator) -> int:
    return p.weight()


def to_binary(p: PauliOperator, layout: str = "XZ") -> BinaryVector:
    if layout == "XZ":
        return BinaryVector(p.x | (p.z << p.n), 2 * p.n, "XZ")
    if layout == "ZX":
        return BinaryVector(p.z | (p.x << p.n), 2 * p.n, "ZX")
    raise PreconditionError(f"unknown layout {layout!r}")


def from_binary(v: BinaryVector) -> PauliOperator:
    if v.layout not in LAYOUTS:
        raise PreconditionError("binary vector carries no XZ/ZX layout tag")
    if v.length % 2:
        raise DimensionError("symplectic vectors have even length")
    n = v.length // 2
    lo = v.bits & ((1 << n) - 1)
    hi = v.bits >> n
    return PauliOperator(n, lo, hi) if v.layout == "XZ" else PauliOperator(n, hi, lo)
