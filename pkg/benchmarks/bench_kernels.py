"""Time the numba and numpy kernel backends on realistic inputs.

Run with ``python benchmarks/bench_kernels.py``. Each kernel is called once
per backend before timing so numba compilation is excluded.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from qrlc.bernoulli import build_count_table, location_records
from qrlc.code import random_code
from qrlc.extraction import build_extraction
from qrlc.kernels import BACKENDS, accumulate_faults, segment_argmax, xor_convolve


def _cases(n: int, q: int, seed: int) -> dict[str, tuple]:
    rng = np.random.default_rng(seed)
    code = random_code(n, 1, seed)
    circ = build_extraction(code)
    d1 = build_count_table(code, circ, q, 1)
    d2 = build_count_table(code, circ, q, 2)
    k1, v1 = d1.keys, d1.numerators[:, d1.column((1, 0))]
    k2, v2 = d2.keys, d2.numerators[:, d2.column((2, 0))]
    records, _ = location_records(code, circ, q)
    shots = 20000
    mask = rng.random((shots, records.shape[0])) < 0.01
    patterns = rng.integers(1, 16, size=mask.shape)
    values = rng.random(200_000)
    starts = np.unique(np.concatenate([[0], rng.integers(1, values.size, 20_000)]))
    return {
        f"xor_convolve ({len(k2)} x {len(k1)} keys)": (xor_convolve, (k2, v2, k1, v1)),
        f"accumulate_faults ({shots} shots, {records.shape[0]} locations)": (
            accumulate_faults, (mask, patterns, records)
        ),
        f"segment_argmax ({values.size} values, {starts.size} segments)": (segment_argmax, (values, starts)),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=5)
    parser.add_argument("--q", type=int, default=3)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    print(f"backends: {', '.join(BACKENDS)}")
    for name, (fn, fargs) in _cases(args.n, args.q, args.seed).items():
        times = {}
        for backend in BACKENDS:
            fn(*fargs, backend=backend)
            times[backend] = min(timeit.repeat(lambda: fn(*fargs, backend=backend), number=1, repeat=args.repeat))
        line = "  ".join(f"{b} {t * 1e3:8.2f} ms" for b, t in times.items())
        if len(times) == 2:
            line += f"  speedup {times['numpy'] / times['numba']:.1f}x"
        print(f"{name:60s} {line}")


if __name__ == "__main__":
    main()
