"""Command line interface: ``qrlc {gen-code,build-table,sweep,fit,full}``.

Exit codes: 0 on success, 2 for invalid configuration, 3 for corrupt or
mismatched data files.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from qrlc.bernoulli import BernoulliModel, build_count_table, decode_from_counts
from qrlc.code import code_from_descriptor, random_code, reduce_stabilizer_weight, two_qubit_example
from qrlc.decoder import bernoulli_noise, build_data_table_parallel, build_decoding_table
from qrlc.errors import DataError, ParameterError
from qrlc.experiment import SweepConfig, run_fit, run_sweep
from qrlc.extraction import build_extraction

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
PRESETS = ("two-qubit",)


def _grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p-min", type=float, default=1e-5)
    p.add_argument("--p-max", type=float, default=1e-2)
    p.add_argument("--p-points", type=int, default=7)
    p.add_argument("--omega-max", type=int, default=2)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--bernoulli", action=argparse.BooleanOptionalAction, default=True,
                   help="use fault-order count tables (default) instead of explicit enumeration")


def _sweep_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--num-codes", type=int, default=1)
    p.add_argument("--q-max", type=int, default=6)
    p.add_argument("--mc-samples", type=int, default=0)
    p.add_argument("--reduce-stabilizers", action="store_true")
    p.add_argument("--num-gates", type=int, help="override the number of random two-qubit blocks")
    _grid_args(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrlc", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-code", help="generate a random code descriptor")
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--preset", choices=PRESETS)
    g.add_argument("--reduce-stabilizers", action="store_true")
    g.add_argument("--num-gates", type=int, help="override the number of random two-qubit blocks")
    g.add_argument("--out", required=True)

    b = sub.add_parser("build-table", help="build decoding tables for a code")
    b.add_argument("--code", required=True)
    b.add_argument("--q", type=int, default=1)
    _grid_args(b)
    b.add_argument("--out", required=True)

    s = sub.add_parser("sweep", help="evaluate random codes over a (p, q) grid")
    _sweep_args(s)
    s.add_argument("--out", required=True)

    f = sub.add_parser("fit", help="fit sweep results")
    f.add_argument("--input", required=True)
    f.add_argument("--q-min", type=int, default=2)
    f.add_argument("--window-max-p", type=float, default=1e-2)
    f.add_argument("--out", required=True)

    a = sub.add_parser("full", help="sweep followed by fit")
    _sweep_args(a)
    a.add_argument("--q-min", type=int, default=2)
    a.add_argument("--window-max-p", type=float, default=1e-2)
    a.add_argument("--out", required=True, help="output directory")
    return parser


def _config(args: argparse.Namespace) -> SweepConfig:
    cfg = SweepConfig(
        n=args.n, k=args.k, seed=args.seed, num_codes=args.num_codes, p_min=args.p_min, p_max=args.p_max,
        p_points=args.p_points, q_max=args.q_max, omega_max=args.omega_max, workers=args.workers,
        bernoulli=args.bernoulli, reduce_stabilizers=args.reduce_stabilizers, mc_samples=args.mc_samples,
        num_gates=args.num_gates,
    )
    cfg.validate()
    return cfg


def cmd_gen_code(args: argparse.Namespace) -> int:
    if args.preset == "two-qubit":
        code = two_qubit_example()
    else:
        if args.n is None:
            raise ParameterError("--n is required unless --preset is given")
        if args.num_gates is not None and args.num_gates < 0:
            raise ParameterError("--num-gates must be non-negative")
        code = random_code(args.n, args.k, args.seed, num_gates=args.num_gates)
    if args.reduce_stabilizers:
        code = reduce_stabilizer_weight(code)
    Path(args.out).write_text(code.to_json())
    w = code.stabilizer_weights
    print(f"[[{code.n},{code.k}]] code, stabilizer weights {list(w)} (mean {sum(w) / len(w):.2f}), "
          f"{code.n_cnot} CNOTs per round -> {args.out}")
    return EXIT_OK


def cmd_build_table(args: argparse.Namespace) -> int:
    try:
        code = code_from_descriptor(Path(args.code).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read code descriptor: {exc}") from exc
    grid = SweepConfig(n=code.n, k=code.k, p_min=args.p_min, p_max=args.p_max, p_points=args.p_points,
                       q_max=args.q, omega_max=args.omega_max, workers=args.workers).p_grid()
    started = time.time()
    circ = build_extraction(code)
    tables = []
    counts = build_count_table(code, circ, args.q, args.omega_max, workers=args.workers) if args.bernoulli else None
    for p in grid:
        model = BernoulliModel.for_circuit(circ, p, args.q)
        if counts is not None:
            table = decode_from_counts(code, counts, model)
        else:
            noise = bernoulli_noise(circ, args.q, p, args.omega_max)
            table = build_decoding_table(code, build_data_table_parallel(code, circ, noise, args.q, args.workers),
                                         args.omega_max)
        tables.append(table.to_dict(code, p))
    doc = {"format": "qrlc-table-bundle", "version": 1, "tables": tables}
    Path(args.out).write_text(json.dumps(doc, indent=1, sort_keys=True))
    meta = {"wall_seconds": time.time() - started, "workers": args.workers, "finished": time.time()}
    Path(args.out + ".meta.json").write_text(json.dumps(meta, indent=1))
    print(f"{len(tables)} table(s) with up to {max(len(t['entries']) for t in tables)} sequences -> {args.out}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    rows = run_sweep(_config(args), args.out)
    print(f"{len(rows)} rows in {args.out}")
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    report = run_fit(args.input, args.out, args.q_min, args.window_max_p)
    for n, s in report["summary"].items():
        print(f"n={n}: {s['codes']} codes, median eta={s['eta_median']:.3f}, median eta_C={s['eta_c_median']:.3f}")
    print(f"threshold: {report['threshold']}")
    return EXIT_OK


def cmd_full(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _config(args)
    run_sweep(cfg, out / "sweep.csv")
    report = run_fit(out / "sweep.csv", out / "fit.json", args.q_min, args.window_max_p)
    print(f"sweep and fit written to {out}; threshold {report['threshold']}")
    return EXIT_OK


COMMANDS = {
    "gen-code": cmd_gen_code,
    "build-table": cmd_build_table,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "full": cmd_full,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
