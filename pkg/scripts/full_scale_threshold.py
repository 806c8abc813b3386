"""Long-running threshold study over several code sizes.

Sweeps many random ``k = 1`` codes per size into one resumable CSV, fits the
per-round failure of each, and prints the estimated threshold with the
reference value ``2e-5`` for comparison. Nothing is asserted. Expect hours at
the default sizes; interrupt and rerun to resume.

Example::

    python scripts/full_scale_threshold.py --sizes 5 7 9 11 --num-codes 50 --workers 8 --out runs/threshold
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from qrlc.experiment import SweepConfig, run_fit, run_sweep

REFERENCE_THRESHOLD = 2e-5


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[5, 7, 9, 11])
    parser.add_argument("--num-codes", type=int, default=50)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--p-min", type=float, default=1e-6)
    parser.add_argument("--p-max", type=float, default=1e-2)
    parser.add_argument("--p-points", type=int, default=13)
    parser.add_argument("--q-max", type=int, default=8)
    parser.add_argument("--omega-max", type=int, default=2)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="runs/threshold")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "sweep.csv"
    for n in args.sizes:
        config = SweepConfig(
            n=n, k=1, seed=args.seed, num_codes=args.num_codes, p_min=args.p_min, p_max=args.p_max,
            p_points=args.p_points, q_max=args.q_max, omega_max=args.omega_max, workers=args.workers,
        )
        run_sweep(config, csv_path)
    report = run_fit(csv_path, out / "fit.json")
    for n, s in report["summary"].items():
        print(f"n={n}: {s['codes']} codes, median eta={s['eta_median']:.3f}")
    t = report["threshold"]
    print(f"threshold median {t['median']} (range {t['low']} to {t['high']}), reference {REFERENCE_THRESHOLD:g}")


if __name__ == "__main__":
    main()
