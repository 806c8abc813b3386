"""Parameter sweeps over random codes and the fitting pipeline on their results.

A sweep writes one CSV row per (code, p, q, method) and can be resumed: rows
already present are verified by checksum and skipped. Wall-clock data goes to
a metadata sidecar so the CSV itself is reproducible byte for byte. All
randomness derives from one master seed through named sub-streams.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import time
import zlib
from collections import defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from qrlc.asymptotics import estimate_threshold, fit_asymptotic, fit_scaling
from qrlc.bernoulli import BernoulliModel, build_count_table, decode_from_counts
from qrlc.code import StabilizerCode, random_code, reduce_stabilizer_weight
from qrlc.decoder import bernoulli_noise, build_data_table_parallel, build_decoding_table
from qrlc.errors import DataError, FitError, ParameterError
from qrlc.evaluation import evaluate_exact, evaluate_monte_carlo
from qrlc.extraction import build_extraction
from qrlc.kernels import default_backend

logger = logging.getLogger(__name__)

__all__ = [
    "CSV_FIELDS",
    "STREAMS",
    "SweepConfig",
    "derive_seed",
    "read_rows",
    "run_fit",
    "run_sweep",
]

CSV_FIELDS = (
    "n", "k", "seed", "p", "q", "omega_max", "p_total", "p_total_corrected", "method", "samples", "stderr",
)
STREAMS = {"codegen": 0, "monte_carlo": 1}
REPORT_FORMAT = "qrlc-fit-report"


def derive_seed(master: int, stream: str, *index: int) -> int:
    """64-bit seed of a named sub-stream of the master seed."""
    seq = np.random.SeedSequence(master, spawn_key=(STREAMS[stream], *index))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SweepConfig:
    """Settings of a sweep over random ``[[n, k]]`` codes."""

    n: int
    k: int = 1
    seed: int = 0
    num_codes: int = 1
    p_min: float = 1e-5
    p_max: float = 1e-2
    p_points: int = 7
    q_max: int = 6
    omega_max: int = 2
    workers: int = 1
    bernoulli: bool = True
    reduce_stabilizers: bool = False
    mc_samples: int = 0
    num_gates: int | None = None

    def validate(self) -> None:
        if self.p_points < 1:
            raise ParameterError("empty p grid")
        if not 0.0 < self.p_min <= self.p_max < 1.0:
            raise ParameterError("need 0 < p_min <= p_max < 1")
        if self.p_points == 1 and self.p_min != self.p_max:
            raise ParameterError("a single grid point needs p_min == p_max")
        if not 1 <= self.k < self.n:
            raise ParameterError("need 1 <= k < n")
        if self.q_max < 1 or self.omega_max < 1 or self.num_codes < 1 or self.workers < 1:
            raise ParameterError("q_max, omega_max, num_codes and workers must be positive")
        if self.mc_samples < 0:
            raise ParameterError("mc_samples must be non-negative")
        if self.num_gates is not None and self.num_gates < 0:
            raise ParameterError("num_gates must be non-negative")

    def p_grid(self) -> list[float]:
        self.validate()
        if self.p_points == 1:
            return [float(self.p_min)]
        exps = np.linspace(math.log10(self.p_min), math.log10(self.p_max), self.p_points)
        return [float(10.0**h) for h in exps]

    def code_seeds(self) -> list[int]:
        return [derive_seed(self.seed, "codegen", i) for i in range(self.num_codes)]


def make_code(config: SweepConfig, code_seed: int) -> StabilizerCode:
    code = random_code(config.n, config.k, code_seed, num_gates=config.num_gates)
    return reduce_stabilizer_weight(code) if config.reduce_stabilizers else code


def _checksum(values: list[str]) -> str:
    return format(zlib.crc32(",".join(values).encode()), "08x")


def _format_row(row: dict) -> list[str]:
    return [repr(row[f]) if isinstance(row[f], float) else str(row[f]) for f in CSV_FIELDS]


def read_rows(path: str | os.PathLike) -> list[dict]:
    """Read a sweep CSV, verifying every row checksum.

    Raises:
        DataError: On a bad header, a truncated row or a checksum mismatch.
    """
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return out
        if tuple(header) != CSV_FIELDS + ("checksum",):
            raise DataError(f"{path}: unexpected header {header}")
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(CSV_FIELDS) + 1 or _checksum(rec[:-1]) != rec[-1]:
                raise DataError(f"{path}:{lineno}: corrupt row (checksum mismatch)")
            row = dict(zip(CSV_FIELDS, rec[:-1]))
            for f in ("n", "k", "seed", "q", "omega_max", "samples"):
                row[f] = int(row[f])
            for f in ("p", "p_total", "p_total_corrected", "stderr"):
                row[f] = float(row[f])
            out.append(row)
    return out


def _row_key(row: dict) -> tuple:
    return (row["n"], row["k"], row["seed"], repr(float(row["p"])), row["q"], row["omega_max"], row["method"])


def run_sweep(config: SweepConfig, out_csv: str | os.PathLike) -> list[dict]:
    """Evaluate every code of the sweep at every ``(p, q)`` and append rows to ``out_csv``.

    Returns:
        All rows now in the file, in file order.
    """
    config.validate()
    path = Path(out_csv)
    done: set[tuple] = set()
    if path.exists() and path.stat().st_size:
        done = {_row_key(r) for r in read_rows(path)}
        logger.info("resuming: %d rows already present", len(done))
    else:
        with open(path, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(CSV_FIELDS + ("checksum",))
    started = time.time()
    grid = config.p_grid()
    methods = ["exact"] + (["monte_carlo"] if config.mc_samples else [])
    written = 0
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for ci, code_seed in enumerate(config.code_seeds()):
            code = None
            for q in range(1, config.q_max + 1):
                keys = [
                    (config.n, config.k, code_seed, repr(p), q, config.omega_max, meth)
                    for p in grid for meth in methods
                ]
                if all(k in done for k in keys):
                    continue
                if code is None:
                    code = make_code(config, code_seed)
                    circ = build_extraction(code)
                counts = (
                    build_count_table(code, circ, q, config.omega_max, workers=config.workers)
                    if config.bernoulli else None
                )
                for pi, p in enumerate(grid):
                    model = BernoulliModel.for_circuit(circ, p, q)
                    if counts is not None:
                        table = decode_from_counts(code, counts, model)
                    else:
                        noise = bernoulli_noise(circ, q, p, config.omega_max)
                        data = build_data_table_parallel(code, circ, noise, q, config.workers)
                        table = build_decoding_table(code, data, config.omega_max)
                    results = []
                    if (config.n, config.k, code_seed, repr(p), q, config.omega_max, "exact") not in done:
                        results.append(evaluate_exact(code, table))
                    if config.mc_samples and (
                        (config.n, config.k, code_seed, repr(p), q, config.omega_max, "monte_carlo") not in done
                    ):
                        rng = np.random.default_rng(derive_seed(config.seed, "monte_carlo", ci, q, pi))
                        results.append(evaluate_monte_carlo(code, circ, table, model, config.mc_samples, rng))
                    for res in results:
                        row = {
                            "n": config.n, "k": config.k, "seed": code_seed, "p": float(p), "q": q,
                            "omega_max": config.omega_max, "p_total": float(res.p_total),
                            "p_total_corrected": float(res.p_total_corrected), "method": res.method,
                            "samples": res.samples, "stderr": float(res.stderr),
                        }
                        vals = _format_row(row)
                        writer.writerow(vals + [_checksum(vals)])
                        written += 1
                fh.flush()
    meta = {
        "config": asdict(config),
        "started": started,
        "finished": time.time(),
        "wall_seconds": time.time() - started,
        "rows_written": written,
        "backend": default_backend(),
    }
    Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=1, sort_keys=True))
    return read_rows(path)


def _median(values: list[float]) -> float:
    return float(np.median(np.array(values))) if values else float("nan")


def run_fit(
    csv_path: str | os.PathLike,
    out_json: str | os.PathLike,
    q_min: int = 2,
    window_max_p: float = 1e-2,
) -> dict:
    """Fit every code's per-round failure, its scaling law and the threshold.

    Writes the JSON report and a ``*_curves.csv`` file with the median curve
    of each code size.
    """
    raw = Path(csv_path).read_bytes()
    rows = [r for r in read_rows(csv_path) if r["method"] == "exact"]
    if not rows:
        raise DataError(f"{csv_path}: no exact rows to fit")
    warnings: list[str] = []
    groups: dict[tuple, list[tuple[int, float]]] = defaultdict(list)
    for r in rows:
        groups[(r["n"], r["k"], r["seed"], r["p"])].append((r["q"], r["p_total_corrected"]))
    fits = []
    per_code: dict[tuple, list] = defaultdict(list)
    for (n, k, seed, p), pts in sorted(groups.items()):
        try:
            f = fit_asymptotic(sorted(pts), p=p, q_min=q_min)
        except FitError as exc:
            warnings.append(f"n={n} seed={seed} p={p!r}: {exc}")
            continue
        warnings.extend(f"n={n} seed={seed} p={p!r}: {w}" for w in f.warnings)
        fits.append({"n": n, "k": k, "seed": seed, "p": p, "m": f.m, "b": f.b, "p_failure": f.p_failure,
                     "c_of_p": f.c_of_p, "r_squared": f.r_squared, "valid": f.valid})
        if f.valid:
            per_code[(n, k, seed)].append((p, f.p_failure, f.b))
    scaling = []
    for (n, k, seed), vals in sorted(per_code.items()):
        entry: dict = {"n": n, "k": k, "seed": seed}
        for kind, pts in (("p_failure", [(p, pf) for p, pf, _ in vals]), ("c_of_p", [(p, b) for p, _, b in vals])):
            try:
                s = fit_scaling(pts, kind, window_max_p)
                entry[kind] = {"exponent": s.exponent, "intercept": s.intercept, "r_squared": s.r_squared,
                               "n_points": s.n_points}
            except FitError as exc:
                warnings.append(f"n={n} seed={seed} {kind}: {exc}")
        scaling.append(entry)
    summary: dict[str, dict] = {}
    curves: dict[int, list[tuple[float, float]]] = {}
    curve_rows = []
    by_np: dict[tuple[int, float], list[float]] = defaultdict(list)
    for f in fits:
        if f["valid"]:
            by_np[(f["n"], f["p"])].append(f["p_failure"])
    for n in sorted({key[0] for key in by_np}):
        pts = []
        for (nn, p), vals in sorted(by_np.items()):
            if nn != n:
                continue
            med = _median(vals)
            err = float(np.std(vals) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
            curve_rows.append((n, p, med, err, len(vals)))
            if med > 0:
                pts.append((p, med))
        curves[n] = pts
        etas = [e["p_failure"]["exponent"] for e in scaling if e["n"] == n and "p_failure" in e]
        eta_c = [e["c_of_p"]["exponent"] for e in scaling if e["n"] == n and "c_of_p" in e]
        summary[str(n)] = {"codes": len({e["seed"] for e in scaling if e["n"] == n}),
                           "eta_median": _median(etas), "eta_c_median": _median(eta_c)}
    threshold: dict = {"median": None, "low": None, "high": None, "crossings": 0}
    usable = {n: c for n, c in curves.items() if len(c) >= 2}
    if len(usable) >= 2:
        try:
            t = estimate_threshold(usable)
            threshold = {"median": t.median, "low": t.low, "high": t.high, "crossings": len(t.crossings)}
        except ParameterError as exc:
            warnings.append(f"threshold: {exc}")
    report = {
        "format": REPORT_FORMAT,
        "version": 1,
        "inputs_sha256": hashlib.sha256(raw).hexdigest(),
        "window": {"q_min": q_min, "window_max_p": window_max_p},
        "fits": fits,
        "scaling": scaling,
        "summary": summary,
        "threshold": threshold,
        "warnings": warnings,
    }
    out = Path(out_json)
    out.write_text(json.dumps(report, indent=1, sort_keys=True))
    curve_path = out.with_name(out.stem + "_curves.csv")
    with open(curve_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "p", "p_failure", "stderr", "codes"])
        for n, p, med, err, cnt in curve_rows:
            w.writerow([n, repr(p), repr(med), repr(err), cnt])
    return report
