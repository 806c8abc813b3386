"""Fault-tolerant decoding of quantum random linear codes with degenerate lookup tables."""

from __future__ import annotations

from qrlc.bernoulli import BernoulliModel, CountTable, build_count_table, decode_from_counts
from qrlc.code import StabilizerCode, derive_code, random_code, two_qubit_example
from qrlc.decoder import DecodingTable, build_data_table, build_decoding_table
from qrlc.evaluation import evaluate_exact, evaluate_monte_carlo
from qrlc.extraction import build_extraction
from qrlc.pauli import PauliOperator

__version__ = "0.1.0"

__all__ = [
    "BernoulliModel",
    "CountTable",
    "DecodingTable",
    "PauliOperator",
    "StabilizerCode",
    "build_count_table",
    "build_data_table",
    "build_decoding_table",
    "build_extraction",
    "decode_from_counts",
    "derive_code",
    "evaluate_exact",
    "evaluate_monte_carlo",
    "random_code",
    "two_qubit_example",
]
