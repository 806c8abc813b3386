"""Dense linear algebra over F2 with rows packed into Python integers.

Column ``c`` of a row is bit ``c`` of the row integer. Row reduction uses the
leftmost-pivot, topmost-row rule and records the accumulated row transform so
callers can map results back to the original basis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from qrlc.errors import DimensionError, PreconditionError
from qrlc.pauli import BinaryVector

logger = logging.getLogger(__name__)

__all__ = [
    "BinaryMatrix",
    "ConstrainedRref",
    "RrefResult",
    "constrained_rref",
    "is_rref",
    "matvec",
    "rref",
]


@dataclass(frozen=True)
class BinaryMatrix:
    """Immutable F2 matrix.

    Attributes:
        rows: One packed integer per row.
        ncols: Number of columns.
    """

    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self) -> None:
        limit = 1 << self.ncols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise DimensionError(f"row {r:#x} does not fit in {self.ncols} columns")

    @classmethod
    def from_lists(cls, data: Sequence[Sequence[int]], ncols: int | None = None) -> BinaryMatrix:
        if ncols is None:
            if not data:
                raise DimensionError("cannot infer the width of an empty matrix")
            ncols = len(data[0])
        rows = []
        for row in data:
            if len(row) != ncols:
                raise DimensionError("ragged matrix")
            rows.append(BinaryVector.from_list(row).bits)
        return cls(tuple(rows), ncols)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> BinaryMatrix:
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise DimensionError("expected a 2-D array")
        return cls.from_lists(arr.astype(np.int64).tolist(), arr.shape[1])

    @classmethod
    def from_vectors(cls, vectors: Iterable[BinaryVector], ncols: int) -> BinaryMatrix:
        rows = []
        for v in vectors:
            if v.length != ncols:
                raise DimensionError("vector length does not match the column count")
            rows.append(v.bits)
        return cls(tuple(rows), ncols)

    @classmethod
    def identity(cls, size: int) -> BinaryMatrix:
        return cls(tuple(1 << i for i in range(size)), size)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        for i, r in enumerate(self.rows):
            for c in range(self.ncols):
                out[i, c] = (r >> c) & 1
        return out

    def to_lists(self) -> list[list[int]]:
        return self.to_array().astype(int).tolist()

    def row_vector(self, i: int, layout: str | None = None) -> BinaryVector:
        return BinaryVector(self.rows[i], self.ncols, layout)

    def rank(self) -> int:
        return len(rref(self).pivots)

    def __matmul__(self, other: BinaryMatrix) -> BinaryMatrix:
        if self.ncols != other.nrows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for r in self.rows:
            acc = 0
            i = 0
            while r:
                if r & 1:
                    acc ^= other.rows[i]
                r >>= 1
                i += 1
            out.append(acc)
        return BinaryMatrix(tuple(out), other.ncols)

    def transpose(self) -> BinaryMatrix:
        cols = []
        for c in range(self.ncols):
            acc = 0
            for i, r in enumerate(self.rows):
                if (r >> c) & 1:
                    acc |= 1 << i
            cols.append(acc)
        return BinaryMatrix(tuple(cols), self.nrows)

    def __str__(self) -> str:
        return "\n".join(" ".join(str((r >> c) & 1) for c in range(self.ncols)) for r in self.rows)


@dataclass(frozen=True)
class RrefResult:
    """Outcome of :func:`rref`.

    Attributes:
        rre: Reduced row echelon form; zero rows are kept at the bottom.
        transform: Invertible ``J`` with ``J @ M == rre``.
        pivots: Pivot column of each non-zero row of ``rre``, increasing.
    """

    rre: BinaryMatrix
    transform: BinaryMatrix
    pivots: tuple[int, ...]


def rref(m: BinaryMatrix) -> RrefResult:
    """Row reduce ``m`` and return the form, the transform and the pivots."""
    rows = list(m.rows)
    trans = [1 << i for i in range(m.nrows)]
    pivots: list[int] = []
    top = 0
    for col in range(m.ncols):
        if top == len(rows):
            break
        bit = 1 << col
        hit = next((i for i in range(top, len(rows)) if rows[i] & bit), None)
        if hit is None:
            continue
        rows[top], rows[hit] = rows[hit], rows[top]
        trans[top], trans[hit] = trans[hit], trans[top]
        for i in range(len(rows)):
            if i != top and rows[i] & bit:
                rows[i] ^= rows[top]
                trans[i] ^= trans[top]
        pivots.append(col)
        top += 1
    return RrefResult(BinaryMatrix(tuple(rows), m.ncols), BinaryMatrix(tuple(trans), m.nrows), tuple(pivots))


def is_rref(m: BinaryMatrix) -> bool:
    """Check the reduced row echelon conditions, allowing trailing zero rows."""
    last = -1
    seen_zero = False
    pivots = []
    for r in m.rows:
        if r == 0:
            seen_zero = True
            continue
        if seen_zero:
            return False
        lead = (r & -r).bit_length() - 1
        if lead <= last:
            return False
        last = lead
        pivots.append(lead)
    for p in pivots:
        if sum((r >> p) & 1 for r in m.rows) != 1:
            return False
    return True


@dataclass(frozen=True)
class ConstrainedRref:
    """Outcome of :func:`constrained_rref`.

    Attributes:
        upper: The unchanged upper block, already in RREF.
        lower: Reduced lower block; zero on every upper pivot column and in
            RREF on the remaining columns.
        upper_transform: ``J_A`` such that ``lower_in + J_A @ upper`` equals the
            lower block before its own reduction.
        lower_transform: ``J_L`` such that ``J_L @ (lower_in + J_A @ upper) == lower``.
        upper_pivots: Pivot columns of ``upper``.
        lower_pivots: Pivot columns of ``lower``.
    """

    upper: BinaryMatrix
    lower: BinaryMatrix
    upper_transform: BinaryMatrix
    lower_transform: BinaryMatrix
    upper_pivots: tuple[int, ...]
    lower_pivots: tuple[int, ...]


def constrained_rref(upper: BinaryMatrix, lower: BinaryMatrix) -> ConstrainedRref:
    """Reduce the stacked matrix ``[upper; lower]`` without touching ``upper``.

    Args:
        upper: Block already in RREF.
        lower: Block to reduce against ``upper`` and then against itself.

    Raises:
        DimensionError: If the column counts differ.
        PreconditionError: If ``upper`` is not in RREF.
    """
    if upper.ncols != lower.ncols:
        raise DimensionError("blocks must have the same number of columns")
    if not is_rref(upper):
        raise PreconditionError("upper block must already be in reduced row echelon form")
    upper_pivots = tuple((r & -r).bit_length() - 1 for r in upper.rows if r)
    reduced = []
    j_a = []
    for row in lower.rows:
        used = 0
        for u, col in enumerate(upper_pivots):
            if (row >> col) & 1:
                row ^= upper.rows[u]
                used |= 1 << u
        reduced.append(row)
        j_a.append(used)
    res = rref(BinaryMatrix(tuple(reduced), lower.ncols))
    return ConstrainedRref(
        upper=upper,
        lower=res.rre,
        upper_transform=BinaryMatrix(tuple(j_a), upper.nrows),
        lower_transform=res.transform,
        upper_pivots=upper_pivots,
        lower_pivots=res.pivots,
    )


def matvec(v: BinaryVector, m: BinaryMatrix, transposed: bool = False) -> BinaryVector:
    """Multiply a row vector by ``m`` (or by ``m`` transposed).

    ``matvec(v, m)`` computes ``v @ m`` and needs ``len(v) == m.nrows``;
    ``matvec(v, m, transposed=True)`` computes ``v @ m.T`` and needs
    ``len(v) == m.ncols``.
    """
    if transposed:
        if v.length != m.ncols:
            raise DimensionError(f"vector of length {v.length} against {m.ncols} columns")
        bits = 0
        for i, r in enumerate(m.rows):
            if (v.bits & r).bit_count() & 1:
                bits |= 1 << i
        return BinaryVector(bits, m.nrows)
    if v.length != m.nrows:
        raise DimensionError(f"vector of length {v.length} against {m.nrows} rows")
    acc = 0
    for i, r in enumerate(m.rows):
        if (v.bits >> i) & 1:
            acc ^= r
    return BinaryVector(acc, m.ncols)
