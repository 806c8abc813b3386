"""Failure probability of a decoding table: exact summation and Monte Carlo."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from qrlc.bernoulli import BernoulliModel, location_records
from qrlc.code import StabilizerCode
from qrlc.decoder import DecodingTable
from qrlc.errors import DimensionError, ParameterError
from qrlc.extraction import ExtractionCircuit
from qrlc.kernels import accumulate_faults, unique_rows

logger = logging.getLogger(__name__)

__all__ = [
    "EvaluationResult",
    "evaluate_exact",
    "evaluate_monte_carlo",
    "p_infinity_bound",
    "tail_probability",
    "truncation_correction",
    "uncoded_baseline",
]


@dataclass(frozen=True)
class EvaluationResult:
    """Failure probability estimate.

    Attributes:
        p_total: Failure probability; configurations beyond the table's fault
            order count as failures.
        p_total_corrected: ``p_total`` minus the share of the unenumerated tail
            expected to decode correctly by chance.
        method: ``"exact"`` or ``"monte_carlo"``.
        samples: Monte Carlo shots, 0 for exact results.
        stderr: Binomial standard error of a Monte Carlo estimate.
        omega_max: Fault-order truncation, if any.
    """

    p_total: float
    p_total_corrected: float
    method: str
    samples: int = 0
    stderr: float = 0.0
    omega_max: int | None = None


def tail_probability(total_locations: int, omega_max: int, p: float) -> float:
    """Probability of more than ``omega_max`` faults among ``total_locations``."""
    return float(binom.sf(omega_max, total_locations, p))


def truncation_correction(p_total: float, tail: float, n: int, k: int) -> float:
    """Remove the fraction ``2^-(n+k)`` of the tail that lands on the right set by chance."""
    return max(0.0, p_total - tail / 2.0 ** (n + k))


def evaluate_exact(
    code: StabilizerCode, table: DecodingTable, omega_max: int | None = None
) -> EvaluationResult:
    """Sum the mass of every non-winning set plus the unenumerated tail.

    Raises:
        ParameterError: If ``omega_max`` disagrees with the table.
    """
    if (code.n, code.k) != (table.n, table.k):
        raise DimensionError("code does not match the decoding table")
    if omega_max is not None and table.omega_max is not None and omega_max != table.omega_max:
        raise ParameterError(f"table holds order {table.omega_max}, asked for {omega_max}")
    losers = math.fsum(table.failure_masses().tolist())
    tail = table.residual_mass
    p_total = min(1.0, losers + tail)
    return EvaluationResult(
        p_total, truncation_correction(p_total, tail, code.n, code.k), "exact", omega_max=table.omega_max
    )


def evaluate_monte_carlo(
    code: StabilizerCode,
    circ: ExtractionCircuit,
    table: DecodingTable,
    model: BernoulliModel,
    samples: int,
    rng: np.random.Generator,
    omega_max: int | None = None,
    chunk: int = 20000,
    backend: str | None = None,
) -> EvaluationResult:
    """Sample fault configurations and decode them with ``table``.

    Every location fails with probability ``p``; a failing CNOT draws one of its
    15 patterns uniformly. Sequences missing from the table count as failures.

    Args:
        omega_max: When set, shots with more faults also count as failures,
            matching the accounting of :func:`evaluate_exact` on a truncated
            table.
    """
    if samples < 1:
        raise ParameterError("need at least one sample")
    if table.q != model.q:
        raise DimensionError("model and table disagree on the number of rounds")
    records, _ = location_records(code, circ, model.q)
    if records.shape[0] != model.total_locations:
        raise DimensionError("model does not match the circuit")
    failures = 0
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        faulty = rng.random((size, records.shape[0])) < model.p
        patterns = rng.integers(1, 16, size=(size, records.shape[0]))
        keys = accumulate_faults(faulty, patterns, records, backend)
        seqs, inverse = unique_rows(keys[:, 1:])
        rows = table.lookup_rows(seqs)[inverse]
        ok = rows >= 0
        ok[ok] = table.winner[rows[ok]] == keys[ok, 0]
        if omega_max is not None:
            ok &= faulty.sum(axis=1) <= omega_max
        failures += int(size - ok.sum())
        done += size
    est = failures / samples
    stderr = math.sqrt(max(est * (1.0 - est), 0.0) / samples)
    logger.debug("monte carlo: %d/%d failures", failures, samples)
    return EvaluationResult(est, est, "monte_carlo", samples, stderr, omega_max)


def uncoded_baseline(p: float, n_cnot: int) -> float:
    """Failure probability of unprotected circuitry with ``n_cnot`` noisy gates."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError("p must lie in [0, 1]")
    return 1.0 - (1.0 - p) ** n_cnot


def p_infinity_bound(k: int) -> float:
    """Failure probability of a fully scrambled logical state, ``1 - 4^-k``."""
    if k < 1:
        raise ParameterError("need at least one logical qubit")
    return 1.0 - 4.0**-k
