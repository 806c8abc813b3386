from __future__ import annotations

from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrlc import kernels
from qrlc.kernels import (
    BACKENDS,
    accumulate_faults,
    int_from_words,
    segment_argmax,
    unique_rows,
    words_from_int,
    xor_convolve,
)


def reference_convolve(ka, va, kb, vb):
    out = defaultdict(int)
    for i in range(ka.shape[0]):
        for j in range(kb.shape[0]):
            out[tuple(int(w) for w in ka[i] ^ kb[j])] += int(va[i]) * int(vb[j])
    return out


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 40), st.integers(1, 40), st.integers(1, 3))
def test_xor_convolve_matches_reference_on_every_backend(seed, na, nb, width):
    rng = np.random.default_rng(seed)
    ka = rng.integers(0, 16, size=(na, width)).astype(np.uint64)
    kb = rng.integers(0, 16, size=(nb, width)).astype(np.uint64)
    ka[:, -1] |= np.uint64(1 << 63) * rng.integers(0, 2, size=na).astype(np.uint64)
    va = rng.integers(-5, 6, size=na)
    vb = rng.integers(-5, 6, size=nb)
    ref = reference_convolve(ka, va, kb, vb)
    results = []
    for backend in BACKENDS:
        keys, vals = xor_convolve(ka, va, kb, vb, backend=backend)
        got = {tuple(int(w) for w in k): int(v) for k, v in zip(keys, vals) if v}
        assert got == {k: v for k, v in ref.items() if v}
        assert np.array_equal(np.lexsort(keys.T), np.arange(keys.shape[0]))
        results.append((keys, vals))
    for keys, vals in results[1:]:
        assert np.array_equal(keys, results[0][0]) and np.array_equal(vals, results[0][1])


def test_xor_convolve_guards():
    k = np.zeros((1, 1), dtype=np.uint64)
    with pytest.raises(OverflowError):
        xor_convolve(k, np.array([2**40]), k, np.array([2**40]))
    with pytest.raises(ValueError):
        xor_convolve(k, np.array([1]), np.zeros((1, 2), dtype=np.uint64), np.array([1]))
    with pytest.raises(ValueError):
        xor_convolve(k, np.array([1]), k, np.array([1]), backend="fortran")
    empty = np.zeros((0, 1), dtype=np.uint64)
    for backend in BACKENDS:
        keys, vals = xor_convolve(empty, np.zeros(0, dtype=np.int64), k, np.array([1]), backend=backend)
        assert keys.shape == (0, 1) and vals.size == 0


@pytest.mark.parametrize("backend", BACKENDS)
def test_accumulate_faults(backend):
    rng = np.random.default_rng(0)
    s, t, w = 200, 30, 2
    records = rng.integers(0, 2**63, size=(t, 16, w), dtype=np.int64).astype(np.uint64)
    mask = rng.random((s, t)) < 0.2
    pats = rng.integers(1, 16, size=(s, t))
    got = accumulate_faults(mask, pats, records, backend=backend)
    for i in range(s):
        ref = np.zeros(w, dtype=np.uint64)
        for j in np.flatnonzero(mask[i]):
            ref ^= records[j, pats[i, j]]
        assert np.array_equal(got[i], ref)


@pytest.mark.parametrize("backend", BACKENDS)
def test_segment_argmax(backend):
    values = np.array([1.0, 3.0, 3.0, 0.5, 2.0, -1.0, 7.0])
    starts = np.array([0, 3, 5, 6])
    idx, ties = segment_argmax(values, starts, backend=backend)
    assert idx.tolist() == [1, 4, 5, 6]
    assert ties.tolist() == [True, False, False, False]
    idx, ties = segment_argmax(values, np.zeros(0, dtype=np.int64), backend=backend)
    assert idx.size == 0


def test_word_packing_and_unique_rows():
    for v in (0, 1, 2**64 - 1, 2**64, 2**100 + 5):
        assert int_from_words(words_from_int(v, 2)) == v
    with pytest.raises(ValueError):
        words_from_int(2**128, 2)
    keys = np.array([[3, 1], [1, 2], [3, 1], [0, 0]], dtype=np.uint64)
    uniq, inv = unique_rows(keys)
    assert np.array_equal(uniq[inv], keys)
    assert uniq.shape[0] == 3


def test_default_backend_follows_flag(monkeypatch):
    monkeypatch.setattr(kernels, "_DISABLED", True)
    assert kernels.default_backend() == "numpy"
    monkeypatch.setattr(kernels, "_DISABLED", False)
    assert kernels.default_backend() == BACKENDS[0]
