"""Hot loops with a numba implementation and a pure-numpy fallback.

The backend is chosen once at import: numba is used when it imports and the
environment variable ``QRLC_DISABLE_NUMBA`` is unset or false. Each public
kernel also accepts an explicit ``backend`` argument so both paths can be
compared in tests and benchmarks. Both paths return identical arrays.

Multi-word keys are ``(N, W)`` ``uint64`` arrays whose last column is the
most significant word; "sorted" means lexicographic from that column down.
"""

from __future__ import annotations

import logging
import os

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "BACKENDS",
    "accumulate_faults",
    "default_backend",
    "int_from_words",
    "segment_argmax",
    "sort_rows",
    "unique_rows",
    "words_from_int",
    "xor_convolve",
]

try:
    import numba
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

_DISABLED = os.environ.get("QRLC_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
BACKENDS = ("numba", "numpy") if _HAVE_NUMBA else ("numpy",)
_MASK64 = (1 << 64) - 1


def default_backend() -> str:
    return "numba" if _HAVE_NUMBA and not _DISABLED else "numpy"


def _resolve(backend: str | None) -> str:
    name = default_backend() if backend is None else backend
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; choose from {BACKENDS}")
    return name


def words_from_int(value: int, n_words: int) -> np.ndarray:
    """Split a non-negative integer into little-endian 64-bit words."""
    if value < 0 or value >> (64 * n_words):
        raise ValueError("value does not fit in the requested number of words")
    return np.array([(value >> (64 * w)) & _MASK64 for w in range(n_words)], dtype=np.uint64)


def int_from_words(words: np.ndarray) -> int:
    out = 0
    for w, v in enumerate(np.asarray(words, dtype=np.uint64).tolist()):
        out |= int(v) << (64 * w)
    return out


def sort_rows(keys: np.ndarray) -> np.ndarray:
    """Stable permutation sorting the rows of ``keys`` lexicographically."""
    if keys.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.lexsort(keys.T)


def unique_rows(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sorted unique rows and, for every input row, the index of its unique row."""
    n = keys.shape[0]
    if n == 0:
        return keys.copy(), np.zeros(0, dtype=np.int64)
    order = sort_rows(keys)
    ks = keys[order]
    new = np.empty(n, dtype=bool)
    new[0] = True
    new[1:] = np.any(ks[1:] != ks[:-1], axis=1)
    group = np.cumsum(new) - 1
    inverse = np.empty(n, dtype=np.int64)
    inverse[order] = group
    return ks[new], inverse


def _aggregate(keys: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum integer ``vals`` over equal keys; result sorted by key."""
    if keys.shape[0] == 0:
        return keys.reshape(0, keys.shape[1]), vals[:0]
    order = sort_rows(keys)
    ks = keys[order]
    vs = vals[order]
    new = np.empty(ks.shape[0], dtype=bool)
    new[0] = True
    new[1:] = np.any(ks[1:] != ks[:-1], axis=1)
    starts = np.flatnonzero(new)
    return ks[starts], np.add.reduceat(vs, starts)


def _xor_convolve_numpy(ka, va, kb, vb, chunk_pairs=1 << 21):
    ka = ka[va != 0]
    va = va[va != 0]
    kb = kb[vb != 0]
    vb = vb[vb != 0]
    w = ka.shape[1]
    if ka.shape[0] == 0 or kb.shape[0] == 0:
        return np.zeros((0, w), dtype=np.uint64), np.zeros(0, dtype=np.int64)
    step = max(1, chunk_pairs // kb.shape[0])
    part_k, part_v = [], []
    for lo in range(0, ka.shape[0], step):
        keys = (ka[lo:lo + step, None, :] ^ kb[None, :, :]).reshape(-1, w)
        vals = (va[lo:lo + step, None] * vb[None, :]).reshape(-1)
        k, v = _aggregate(keys, vals)
        part_k.append(k)
        part_v.append(v)
    return _aggregate(np.concatenate(part_k), np.concatenate(part_v))


if _HAVE_NUMBA:

    @njit(cache=True)
    def _hash_row(row):
        h = np.uint64(0x9E3779B97F4A7C15)
        for i in range(row.shape[0]):
            h ^= row[i]
            h *= np.uint64(0xBF58476D1CE4E5B9)
            h ^= h >> np.uint64(29)
        return h

    @njit(cache=True)
    def _xor_convolve_numba(ka, va, kb, vb):
        na, w = ka.shape
        nb = kb.shape[0]
        cap = 1 << 12
        slots = -np.ones(cap, dtype=np.int64)
        ucap = cap // 2
        ukeys = np.zeros((ucap, w), dtype=np.uint64)
        uvals = np.zeros(ucap, dtype=np.int64)
        count = 0
        row = np.zeros(w, dtype=np.uint64)
        for i in range(na):
            if va[i] == 0:
                continue
            for j in range(nb):
                if vb[j] == 0:
                    continue
                for t in range(w):
                    row[t] = ka[i, t] ^ kb[j, t]
                mask = np.uint64(cap - 1)
                pos = np.int64(_hash_row(row) & mask)
                while True:
                    s = slots[pos]
                    if s < 0:
                        break
                    same = True
                    for t in range(w):
                        if ukeys[s, t] != row[t]:
                            same = False
                            break
                    if same:
                        break
                    pos = (pos + 1) & (cap - 1)
                if s >= 0:
                    uvals[s] += va[i] * vb[j]
                    continue
                if count == ucap:
                    nk = np.zeros((2 * ucap, w), dtype=np.uint64)
                    nv = np.zeros(2 * ucap, dtype=np.int64)
                    nk[:ucap] = ukeys
                    nv[:ucap] = uvals
                    ukeys, uvals, ucap = nk, nv, 2 * ucap
                    cap *= 2
                    slots = -np.ones(cap, dtype=np.int64)
                    mask = np.uint64(cap - 1)
                    for u in range(count):
                        p = np.int64(_hash_row(ukeys[u]) & mask)
                        while slots[p] >= 0:
                            p = (p + 1) & (cap - 1)
                        slots[p] = u
                    pos = np.int64(_hash_row(row) & mask)
                    while slots[pos] >= 0:
                        pos = (pos + 1) & (cap - 1)
                slots[pos] = count
                ukeys[count] = row
                uvals[count] = va[i] * vb[j]
                count += 1
        return ukeys[:count].copy(), uvals[:count].copy()

    @njit(cache=True)
    def _accumulate_faults_numba(mask, patterns, records):
        s, t = mask.shape
        w = records.shape[2]
        out = np.zeros((s, w), dtype=np.uint64)
        for i in range(s):
            for j in range(t):
                if mask[i, j]:
                    p = patterns[i, j]
                    for u in range(w):
                        out[i, u] ^= records[j, p, u]
        return out

    @njit(cache=True)
    def _segment_argmax_numba(values, starts):
        g = starts.shape[0]
        n = values.shape[0]
        idx = np.empty(g, dtype=np.int64)
        ties = np.zeros(g, dtype=np.bool_)
        for s in range(g):
            lo = starts[s]
            hi = starts[s + 1] if s + 1 < g else n
            best = lo
            for i in range(lo + 1, hi):
                if values[i] > values[best]:
                    best = i
            idx[s] = best
            for i in range(lo, hi):
                if i != best and values[i] == values[best]:
                    ties[s] = True
                    break
        return idx, ties


def xor_convolve(
    keys_a: np.ndarray,
    vals_a: np.ndarray,
    keys_b: np.ndarray,
    vals_b: np.ndarray,
    backend: str | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Group convolution over XOR: ``out[ka ^ kb] += va * vb`` for every pair.

    Args:
        keys_a: ``(Na, W)`` keys.
        vals_a: ``(Na,)`` integer weights.
        keys_b: ``(Nb, W)`` keys.
        vals_b: ``(Nb,)`` integer weights.
        backend: ``"numba"``, ``"numpy"`` or ``None`` for the default.

    Returns:
        Sorted unique keys and their summed weights (``int64``). Pairs whose
        products cancel to zero are kept.

    Raises:
        OverflowError: If the products could exceed ``int64``.
    """
    ka = np.ascontiguousarray(keys_a, dtype=np.uint64)
    kb = np.ascontiguousarray(keys_b, dtype=np.uint64)
    va = np.ascontiguousarray(vals_a, dtype=np.int64)
    vb = np.ascontiguousarray(vals_b, dtype=np.int64)
    if ka.shape[1] != kb.shape[1]:
        raise ValueError("key widths differ")
    if va.size and vb.size:
        bound = int(np.abs(va).sum()) * int(np.abs(vb).max(initial=0))
        bound = max(bound, int(np.abs(vb).sum()) * int(np.abs(va).max(initial=0)))
        if bound >= 1 << 62:
            raise OverflowError("convolution weights may overflow int64")
    if _resolve(backend) == "numpy":
        return _xor_convolve_numpy(ka, va, kb, vb)
    keys, vals = _xor_convolve_numba(ka, va, kb, vb)
    order = sort_rows(keys)
    return keys[order], vals[order]


def accumulate_faults(
    mask: np.ndarray,
    patterns: np.ndarray,
    records: np.ndarray,
    backend: str | None = None,
) -> np.ndarray:
    """XOR the records of all faulty locations of every shot.

    Args:
        mask: ``(S, T)`` boolean, location ``t`` faulty in shot ``s``.
        patterns: ``(S, T)`` pattern index per location (read where ``mask``).
        records: ``(T, P, W)`` key words of pattern ``p`` at location ``t``.
        backend: Kernel backend.

    Returns:
        ``(S, W)`` accumulated key words.
    """
    mask = np.ascontiguousarray(mask, dtype=np.bool_)
    patterns = np.ascontiguousarray(patterns, dtype=np.int64)
    records = np.ascontiguousarray(records, dtype=np.uint64)
    if _resolve(backend) == "numpy":
        rows, cols = np.nonzero(mask)
        out = np.zeros((mask.shape[0], records.shape[2]), dtype=np.uint64)
        np.bitwise_xor.at(out, rows, records[cols, patterns[rows, cols]])
        return out
    return _accumulate_faults_numba(mask, patterns, records)


def segment_argmax(
    values: np.ndarray, starts: np.ndarray, backend: str | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """First index of the maximum in each segment and whether the maximum is tied.

    Segments are ``values[starts[i]:starts[i + 1]]``; all must be non-empty.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    if starts.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=bool)
    if _resolve(backend) == "numpy":
        maxes = np.maximum.reduceat(values, starts)
        lengths = np.diff(np.append(starts, values.size))
        is_max = values == np.repeat(maxes, lengths)
        hits = np.flatnonzero(is_max)
        first = hits[np.searchsorted(hits, starts)]
        ties = np.add.reduceat(is_max.astype(np.int64), starts) > 1
        return first.astype(np.int64), ties
    return _segment_argmax_numba(values, starts)
