"""Fault-order count tables for the uniform Bernoulli noise model.

Every location (noisy CNOT, ancilla preparation, ancilla measurement) fails
independently with probability ``p``. A failing CNOT applies one of ``K = 15``
two-qubit Paulis, each with probability ``p / K``; a failing preparation or
measurement flips its ancilla. A configuration's probability depends only on
how many faults it has in each location class, so a degenerate set is
summarised by its configuration count per vector of class-wise fault orders
(a layer).

Two flip models are offered. ``"split"`` keeps flips as a class of their own
with a single pattern. ``"clone"`` replaces each flip by ``K`` identical
clones of probability ``p / K`` so that one class covers every location.

Tables are keyed by words ``[set code, sequence words...]``. Because
sequences and set codes are F2-linear in the fault, combining two tables is a
convolution over XOR followed by a combinatorial correction that removes
products repeating a fault or hitting one location twice. The correction
factorises over classes and is exact when every class's patterns form a
group with the identity, as for CNOT faults and single flips. Distinct
clones multiply to the identity instead, so in the clone model merged counts
are approximate at keys touched by flips.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.stats import binom

from qrlc.code import StabilizerCode
from qrlc.decoder import DecodingTable, choose_winners, degenerate_key
from qrlc.errors import DimensionError, ParameterError
from qrlc.extraction import N_PATTERNS, BaseError, ExtractionCircuit, propagate, sequence_bits
from qrlc.kernels import unique_rows, words_from_int, xor_convolve

logger = logging.getLogger(__name__)

__all__ = [
    "BernoulliModel",
    "CountTable",
    "FLIP_MODELS",
    "LocationClass",
    "build_count_table",
    "build_order1_table",
    "correction_coefficient",
    "layer_probability",
    "decode_from_counts",
    "location_records",
    "merge_count_tables",
    "multiplicity",
    "p_of_order",
]

K_PATTERNS = N_PATTERNS


@dataclass(frozen=True)
class BernoulliModel:
    """Uniform location-wise fault model.

    Attributes:
        p: Fault probability per location.
        n_cnot: Noisy CNOTs per round.
        n_ancilla: Ancillas per round.
        q: Number of rounds.
    """

    p: float
    n_cnot: int
    n_ancilla: int
    q: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"p must lie in [0, 1], got {self.p}")
        if self.q < 1:
            raise ParameterError("need at least one round")

    @classmethod
    def for_circuit(cls, circ: ExtractionCircuit, p: float, q: int) -> BernoulliModel:
        return cls(p, circ.n_cnot, circ.n_ancilla, q)

    @property
    def effective_cnots(self) -> int:
        """Locations per round once flips are treated as CNOT-like: ``N_CNOT + 2 m``."""
        return self.n_cnot + 2 * self.n_ancilla

    @property
    def total_locations(self) -> int:
        return self.effective_cnots * self.q


def p_of_order(model: BernoulliModel, omega: int) -> float:
    """Probability of one specific configuration of ``omega`` faults."""
    t = model.total_locations
    if not 0 <= omega <= t:
        raise ParameterError(f"fault order {omega} outside 0..{t}")
    return (model.p / K_PATTERNS) ** omega * (1.0 - model.p) ** (t - omega)


def multiplicity(a: int, b: int) -> int:
    """Number of ways an order ``a + b`` configuration splits into parts of orders ``a`` and ``b``."""
    return math.comb(a + b, a)


def correction_coefficient(total: int, a: int, b: int, k: int, r: int, patterns: int = K_PATTERNS) -> int:
    """Spurious pairs per lower-order configuration in an ``a x b`` merge.

    ``k`` faults of the order-``b`` part repeat faults of the order-``a`` part
    and ``r`` others share a location with a different pattern; the product has
    order ``c = a + b - 2k - r``.
    """
    if a < b:
        a, b = b, a
    if k < 0 or r < 0 or k + r > b:
        return 0
    c = a + b - 2 * k - r
    if c < 0 or total - c < k:
        return 0
    split = math.factorial(c) // (
        math.factorial(r) * math.factorial(a - k - r) * math.factorial(b - k - r)
    )
    return patterns**k * (patterns - 1) ** r * math.comb(total - c, k) * split


@dataclass(frozen=True)
class LocationClass:
    """Fault locations sharing a pattern count.

    Attributes:
        name: Label used in diagnostics.
        count: Number of locations over all rounds.
        patterns: Non-trivial fault patterns per location.
    """

    name: str
    count: int
    patterns: int


Layer = tuple[int, ...]


def _layers(classes: tuple[LocationClass, ...], order: int) -> tuple[Layer, ...]:
    """Class-wise order vectors with total at most ``order``, by total then lexicographically."""
    out = [
        v for v in itertools.product(*(range(min(order, c.count) + 1) for c in classes)) if sum(v) <= order
    ]
    return tuple(sorted(out, key=lambda v: (sum(v), v)))


@dataclass
class CountTable:
    """Configuration counts per sequence, degenerate set and layer.

    Attributes:
        n: Physical qubits.
        k: Logical qubits.
        q: Rounds.
        classes: Location classes.
        layers: Class-wise fault orders of each count column.
        keys: ``(N, 1 + Ws)`` words; column 0 is the set code, the rest the
            sequence. Rows are sorted, so equal sequences are contiguous.
        numerators: ``(N, len(layers))`` integer count numerators.
        denominators: Common denominator of each layer.
        diagnostics: Negative-count and conservation records.
    """

    n: int
    k: int
    q: int
    classes: tuple[LocationClass, ...]
    layers: tuple[Layer, ...]
    keys: np.ndarray
    numerators: np.ndarray
    denominators: tuple[int, ...]
    diagnostics: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.n - self.k

    @property
    def order(self) -> int:
        return max(sum(v) for v in self.layers)

    @property
    def total_locations(self) -> int:
        return sum(c.count for c in self.classes)

    def __len__(self) -> int:
        return self.keys.shape[0]

    def column(self, layer: Layer) -> int:
        return self.layers.index(tuple(layer))

    def clone_weight(self, layer: Layer) -> int:
        """Configurations of ``layer`` as counted when every location had ``K`` patterns."""
        return math.prod((K_PATTERNS // c.patterns) ** o for c, o in zip(self.classes, layer))

    def counts(self, omega: int) -> list[Fraction]:
        """Clone-equivalent count of ``omega``-fault configurations per row."""
        out = [Fraction(0)] * len(self)
        for j, layer in enumerate(self.layers):
            if sum(layer) != omega:
                continue
            w = Fraction(self.clone_weight(layer), self.denominators[j])
            for i, v in enumerate(self.numerators[:, j]):
                if v:
                    out[i] += int(v) * w
        return out

    def as_dict(self, omega: int) -> dict[tuple[int, int], Fraction]:
        """``(sequence, set code) -> count`` for non-zero clone-equivalent counts of one order."""
        out = {}
        for row, v in zip(self.keys, self.counts(omega)):
            if v:
                words = [int(w) for w in row]
                seq = sum(w << (64 * i) for i, w in enumerate(words[1:]))
                out[(seq, words[0])] = v
        return out

    def layer_count(self, layer: Layer) -> Fraction:
        j = self.column(layer)
        return Fraction(int(self.numerators[:, j].sum()), self.denominators[j])

    def expected_layer_count(self, layer: Layer) -> int:
        """``prod_c K_c^o_c C(T_c, o_c)``: number of configurations in ``layer``."""
        return math.prod(c.patterns**o * math.comb(c.count, o) for c, o in zip(self.classes, layer))

    def layer_total(self, omega: int) -> Fraction:
        """Clone-equivalent number of ``omega``-fault configurations in the table."""
        return sum(
            (self.layer_count(v) * self.clone_weight(v) for v in self.layers if sum(v) == omega), Fraction(0)
        )

    def expected_layer_total(self, omega: int) -> int:
        """``K^w C(T, w)``: clone-equivalent number of ``w``-fault configurations."""
        return K_PATTERNS**omega * math.comb(self.total_locations, omega)

    def same_shape(self, other: CountTable) -> bool:
        return (self.n, self.k, self.q, self.classes) == (other.n, other.k, other.q, other.classes)


def _widths(code: StabilizerCode, q: int) -> int:
    if code.n + code.k > 64:
        raise DimensionError("set codes wider than 64 bits are not supported")
    return 1 + max(1, -(-q * code.m // 64))


def location_records(
    code: StabilizerCode, circ: ExtractionCircuit, q: int, include_flips: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Key words of every pattern at every location.

    ``include_flips=False`` drops preparation and measurement locations; it
    exists for validation.

    Returns:
        ``records`` of shape ``(T, 16, W)`` (pattern 0 is the empty fault; for
        flips every pattern holds the flip) and a boolean array marking CNOT
        locations.
    """
    width = _widths(code, q)
    m = code.m
    rows: list[np.ndarray] = []
    is_cnot: list[bool] = []

    def words(b: BaseError) -> np.ndarray:
        prop = propagate(circ, b)
        key = degenerate_key(code, prop.data) | (sequence_bits(prop, b.g, q, m) << 64)
        return words_from_int(key, width)

    for g in range(1, q + 1):
        for s in circ.cnot_sites:
            rec = np.zeros((16, width), dtype=np.uint64)
            for pat in range(1, 16):
                rec[pat] = words(BaseError(g, "CNOT", s.index, pat))
            rows.append(rec)
            is_cnot.append(True)
        for kind in ("PREP", "MEAS") if include_flips else ():
            for a in range(circ.n_ancilla):
                rec = np.zeros((16, width), dtype=np.uint64)
                rec[1:] = words(BaseError(g, kind, a))
                rows.append(rec)
                is_cnot.append(False)
    return np.stack(rows), np.array(is_cnot)


FLIP_MODELS = ("split", "clone")


def build_order1_table(
    code: StabilizerCode,
    circ: ExtractionCircuit,
    q: int,
    include_flips: bool = True,
    flip_model: str = "split",
) -> CountTable:
    """Exact counts of the empty configuration and of all single faults."""
    if flip_model not in FLIP_MODELS:
        raise ParameterError(f"unknown flip model {flip_model!r}")
    records, is_cnot = location_records(code, circ, q, include_flips)
    width = records.shape[2]
    n_cnot = int(is_cnot.sum())
    n_flip = records.shape[0] - n_cnot
    blocks = [np.zeros((1, width), dtype=np.uint64)]
    if flip_model == "clone" or n_flip == 0:
        classes = (LocationClass("all", records.shape[0], K_PATTERNS),)
        blocks.append(records[:, 1:, :].reshape(-1, width))
        tags = [(0,), (1,)]
        sizes = [1, blocks[1].shape[0]]
    else:
        classes = (LocationClass("cnot", n_cnot, K_PATTERNS), LocationClass("flip", n_flip, 1))
        blocks.append(records[is_cnot, 1:, :].reshape(-1, width))
        blocks.append(records[~is_cnot, 1, :])
        tags = [(0, 0), (1, 0), (0, 1)]
        sizes = [1, blocks[1].shape[0], blocks[2].shape[0]]
    layers = _layers(classes, 1)
    keys = np.concatenate(blocks)
    raw = np.zeros((keys.shape[0], len(layers)), dtype=np.int64)
    row = 0
    for tag, size in zip(tags, sizes):
        raw[row:row + size, layers.index(tag)] = 1
        row += size
    uniq, inv = unique_rows(keys)
    nums = np.zeros((uniq.shape[0], len(layers)), dtype=np.int64)
    np.add.at(nums, inv, raw)
    table = CountTable(code.n, code.k, q, classes, layers, uniq, nums, (1,) * len(layers))
    for v in layers:
        if table.layer_count(v) != table.expected_layer_count(v):
            raise AssertionError(f"single-fault counts of layer {v} do not add up")
    return table


def _parallel_convolve(ka, va, kb, vb, workers: int):
    if workers <= 1 or ka.shape[0] < 2 * workers:
        return xor_convolve(ka, va, kb, vb)
    bounds = np.linspace(0, ka.shape[0], workers + 1).astype(int)
    jobs = [(ka[bounds[i]:bounds[i + 1]], va[bounds[i]:bounds[i + 1]], kb, vb) for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_convolve_job, jobs))
    keys = np.concatenate([p[0] for p in parts])
    vals = np.concatenate([p[1] for p in parts])
    uniq, inv = unique_rows(keys)
    out = np.zeros(uniq.shape[0], dtype=np.int64)
    np.add.at(out, inv, vals)
    return uniq, out


def _convolve_job(args):
    return xor_convolve(*args)


def _split_layer(target: Layer, top: int) -> Layer:
    """Greedy ``A``-part of ``target`` with total ``top``, filling classes in order."""
    left = top
    out = []
    for o in target:
        take = min(o, left)
        out.append(take)
        left -= take
    return tuple(out)


def _corrections(
    classes: tuple[LocationClass, ...], la: Layer, lb: Layer
) -> list[tuple[int, Layer]]:
    """``(zeta, lower layer)`` for every way an ``la x lb`` product repeats or shares locations."""
    per_class = []
    for c, a, b in zip(classes, la, lb):
        opts = []
        for k in range(min(a, b) + 1):
            for r in range(min(a, b) - k + 1):
                z = correction_coefficient(c.count, a, b, k, r, c.patterns)
                if z:
                    opts.append((z, a + b - 2 * k - r, k + r))
        per_class.append(opts)
    out = []
    for combo in itertools.product(*per_class):
        if all(shared == 0 for _, _, shared in combo):
            continue
        out.append((math.prod(z for z, _, _ in combo), tuple(o for _, o, _ in combo)))
    return out


def merge_count_tables(a: CountTable, b: CountTable, workers: int = 1) -> CountTable:
    """Combine tables of orders ``a`` and ``b`` into one of order ``a + b``.

    Layers of total order up to ``max(a, b)`` are taken from the deeper input.
    Each higher layer ``L`` is obtained from one split ``L = LA + LB`` with
    ``LA`` of the deeper input's top order: the convolution of the two layers
    is corrected by ``n(L) = (conv - sum zeta n(lower)) / prod_c C(L_c, LA_c)``.
    Counts stay exact signed rationals; in the clone model some keys may turn
    negative, which is recorded in the diagnostics.
    """
    if not a.same_shape(b):
        raise DimensionError("count tables belong to different codes, round counts or flip models")
    if a.order < b.order:
        a, b = b, a
    top = a.order
    width = a.keys.shape[1]
    order = top + b.order
    layers = _layers(a.classes, order)
    b_layers = set(b.layers)
    plan = []
    for layer in layers:
        if sum(layer) <= top:
            continue
        la = _split_layer(layer, top)
        lb = tuple(x - y for x, y in zip(layer, la))
        if lb not in b_layers:
            raise AssertionError(f"layer {layer} has no split over the inputs")
        plan.append((layer, la, lb))
    conv_parts = [
        _parallel_convolve(a.keys, a.numerators[:, a.column(la)], b.keys, b.numerators[:, b.column(lb)], workers)
        for _, la, lb in plan
    ]
    all_keys = np.concatenate([a.keys] + [p[0] for p in conv_parts])
    uniq, inv = unique_rows(all_keys.reshape(-1, width))
    size = uniq.shape[0]
    col = {v: j for j, v in enumerate(layers)}
    nums = np.zeros((size, len(layers)), dtype=object)
    dens = [1] * len(layers)
    base_idx = inv[: a.keys.shape[0]]
    for j, v in enumerate(a.layers):
        nums[base_idx, col[v]] = a.numerators[:, j].astype(object)
        dens[col[v]] = a.denominators[j]
    offset = a.keys.shape[0]
    negatives: dict[str, int] = {}
    for (layer, la, lb), (ck, cv) in zip(plan, conv_parts):
        idx = inv[offset:offset + ck.shape[0]]
        offset += ck.shape[0]
        conv = np.zeros(size, dtype=object)
        conv[idx] = cv.astype(object)
        conv_den = a.denominators[a.column(la)] * b.denominators[b.column(lb)]
        terms = [(z, col[low]) for z, low in _corrections(a.classes, la, lb) if low in col]
        common = reduce(math.lcm, [conv_den] + [dens[c] for _, c in terms])
        value = conv * (common // conv_den)
        for zeta, c in terms:
            value = value - nums[:, c] * (zeta * (common // dens[c]))
        den = common * math.prod(math.comb(x, y) for x, y in zip(layer, la))
        negative = value < 0
        if negative.any():
            negatives[str(layer)] = int(negative.sum())
            logger.info("layer %s: %d keys have negative corrected counts", layer, int(negative.sum()))
        g = reduce(math.gcd, [int(v) for v in value if v] + [den])
        nums[:, col[layer]] = value // g
        dens[col[layer]] = den // g
    if np.abs(nums).max(initial=0) >= 1 << 62:
        raise OverflowError("count numerators exceed the int64 range")
    table = CountTable(a.n, a.k, a.q, a.classes, layers, uniq, nums.astype(np.int64), tuple(int(d) for d in dens))
    diag = dict(a.diagnostics)
    diag["negative_keys"] = {**diag.get("negative_keys", {}), **negatives}
    diag["conservation"] = {str(v): _conservation(table, v) for v in layers}
    table.diagnostics = diag
    return table


def _conservation(table: CountTable, layer: Layer) -> float:
    """Ratio of counted to expected configurations of a layer (1 when both vanish)."""
    expected = table.expected_layer_count(layer)
    got = table.layer_count(layer)
    if expected == 0:
        return 1.0 if got == 0 else math.inf
    return float(got / expected)


def build_count_table(
    code: StabilizerCode,
    circ: ExtractionCircuit,
    q: int,
    omega_max: int,
    strategy: str = "incremental",
    workers: int = 1,
    flip_model: str = "split",
) -> CountTable:
    """Count table up to ``omega_max`` faults.

    Args:
        strategy: ``"incremental"`` merges with the single-fault table each
            step; ``"doubling"`` merges a table with itself while possible.
        flip_model: ``"split"`` (exact) or ``"clone"``.
    """
    if omega_max < 1:
        raise ParameterError("omega_max must be at least 1")
    if strategy not in ("incremental", "doubling"):
        raise ParameterError(f"unknown strategy {strategy!r}")
    d1 = build_order1_table(code, circ, q, flip_model=flip_model)
    table = d1
    while table.order < omega_max:
        if strategy == "doubling" and 2 * table.order <= omega_max:
            table = merge_count_tables(table, table, workers)
        else:
            table = merge_count_tables(table, d1, workers)
    if table.order > omega_max:
        keep = [j for j, v in enumerate(table.layers) if sum(v) <= omega_max]
        table = CountTable(
            table.n, table.k, table.q, table.classes, tuple(table.layers[j] for j in keep), table.keys,
            table.numerators[:, keep].copy(), tuple(table.denominators[j] for j in keep), table.diagnostics,
        )
    return table


def layer_probability(model: BernoulliModel, classes: tuple[LocationClass, ...], layer: Layer) -> float:
    """Probability of one specific configuration with class-wise orders ``layer``."""
    faults = sum(layer)
    out = (1.0 - model.p) ** (model.total_locations - faults)
    for c, o in zip(classes, layer):
        out *= (model.p / c.patterns) ** o
    return out


def decode_from_counts(code: StabilizerCode, table: CountTable, model: BernoulliModel) -> DecodingTable:
    """Decoding table for fault probability ``model.p``.

    Configurations with more faults than the table holds are recorded as
    residual mass, evaluated with the binomial tail.
    """
    if model.total_locations != table.total_locations or model.q != table.q:
        raise DimensionError("model does not match the count table")
    weights = np.array(
        [layer_probability(model, table.classes, v) / d for v, d in zip(table.layers, table.denominators)],
        dtype=np.float64,
    )
    mass = table.numerators.astype(np.float64) @ weights
    negative = mass < 0
    clamped = max(0.0, float(-mass[negative].sum()))
    if negative.any():
        logger.warning("clamped %d negative masses (total %.3e)", int(negative.sum()), clamped)
        mass[negative] = 0.0
    seq = table.keys[:, 1:]
    n_rows = seq.shape[0]
    new = np.ones(n_rows, dtype=bool)
    if n_rows > 1:
        new[1:] = np.any(seq[1:] != seq[:-1], axis=1)
    starts = np.flatnonzero(new)
    idx = choose_winners(code, table.keys[:, 0], mass, starts)
    total = np.add.reduceat(mass, starts) if n_rows else np.zeros(0)
    others = mass.copy()
    others[idx] = 0.0
    losers = np.add.reduceat(others, starts) if n_rows else np.zeros(0)
    residual = float(binom.sf(table.order, table.total_locations, model.p))
    out = DecodingTable(
        code.n, code.k, table.q, seq[starts].copy(), table.keys[idx, 0].copy(),
        mass[idx], total, residual, table.order,
        {"count_table": table.diagnostics, "p": model.p, "clamped_keys": int(negative.sum()),
         "clamped_mass": clamped},
        losers,
    )
    return out
