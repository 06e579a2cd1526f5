"""Behavioral SAR conversion engine.

Ideal model: no comparator noise or DAC error. A conversion starts from the
ambiguity interval ``[0, 2**N)`` and each comparison against the DAC
reference for hypothesis ``y_hat`` keeps either ``[lb, y_hat)`` (input below
the reference, ``z = 1``) or ``[y_hat, ub)`` (``z = 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BitsMismatch, InvalidTree, OutOfRange
from .pmf import Pmf
from .treebuild import DecisionTree, mer_threshold


@dataclass(frozen=True)
class AdcConfig:
    bits: int
    delta: float = 1.0

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError(f"bits must be >= 1, got {self.bits}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    @property
    def n_codes(self) -> int:
        return 1 << self.bits

    @property
    def x_min(self) -> float:
        return dac_reference(0, self)

    @property
    def x_max(self) -> float:
        """Exclusive upper end of the input range."""
        return dac_reference(self.n_codes, self)


@dataclass(frozen=True)
class ConversionResult:
    code: int
    cycles: int
    trace: tuple[tuple[int, int], ...] = field(default=())


def dac_reference(y_hat, cfg: AdcConfig):
    """Analog reference level for hypothesis ``y_hat`` (lower edge of its cell)."""
    return cfg.delta * (y_hat - 0.5)


def compare(x: float, y_hat: int, cfg: AdcConfig) -> int:
    """Comparator output: 1 if ``x`` is below the reference, else 0."""
    return int(x < dac_reference(y_hat, cfg))


def _check_range(x: float, cfg: AdcConfig) -> None:
    if not cfg.x_min <= x < cfg.x_max:
        raise OutOfRange(f"input {x!r} outside [{cfg.x_min}, {cfg.x_max})")


def quantize(x: float, cfg: AdcConfig) -> int:
    """Ground-truth output code: the ``y`` whose cell contains ``x``.

    Cells are closed below and open above, and their edges are the same
    floating point values the comparator uses, so a search engine and this
    function can never disagree at a boundary.
    """
    _check_range(x, cfg)
    y = min(max(math.floor(x / cfg.delta + 0.5), 0), cfg.n_codes - 1)
    while y > 0 and x < dac_reference(y, cfg):
        y -= 1
    while y < cfg.n_codes - 1 and x >= dac_reference(y + 1, cfg):
        y += 1
    return y


def quantize_many(xs, cfg: AdcConfig) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size and (xs.min() < cfg.x_min or not xs.max() < cfg.x_max):
        bad = int(np.flatnonzero((xs < cfg.x_min) | (xs >= cfg.x_max))[0])
        raise OutOfRange(f"sample {bad}: input {xs[bad]!r} outside range")
    edges = dac_reference(np.arange(1, cfg.n_codes), cfg)
    return np.searchsorted(edges, xs, side="right").astype(np.int64)


def convert_online(x: float, pmf: Pmf, cfg: AdcConfig) -> ConversionResult:
    """Convert ``x`` choosing each threshold on the fly from ``pmf``."""
    if pmf.bits != cfg.bits:
        raise BitsMismatch(f"pmf has {pmf.bits} bits, config has {cfg.bits}")
    _check_range(x, cfg)
    lb, ub = 0, cfg.n_codes
    trace = []
    while ub - lb > 1:
        y_hat = mer_threshold(pmf.probs, lb, ub)
        z = compare(x, y_hat, cfg)
        trace.append((y_hat, z))
        if z:
            ub = y_hat
        else:
            lb = y_hat
    return ConversionResult(lb, len(trace), tuple(trace))


def _check_tree(tree: DecisionTree, cfg: AdcConfig) -> None:
    if tree.bits != cfg.bits:
        raise BitsMismatch(f"tree has {tree.bits} bits, config has {cfg.bits}")
    report = tree.report
    if not report.ok:
        raise InvalidTree(f"{report.violation}: {report.message}")


def convert_tree(x: float, tree: DecisionTree, cfg: AdcConfig) -> ConversionResult:
    """Convert ``x`` by walking the tree memory from node 0."""
    _check_tree(tree, cfg)
    _check_range(x, cfg)
    addr = tree.root_index
    trace = []
    while True:
        node = tree.nodes[addr]
        z = compare(x, node.threshold, cfg)
        trace.append((node.threshold, z))
        sub = node.branch_true if z else node.branch_false
        if sub.stop:
            return ConversionResult(sub.payload, len(trace), tuple(trace))
        addr = sub.payload


@dataclass
class BatchResult:
    codes: np.ndarray
    cycles: np.ndarray
    traces: list[tuple[tuple[int, int], ...]] | None = None

    @property
    def total_cycles(self) -> int:
        return int(self.cycles.sum())

    @property
    def average_cycles(self) -> float | None:
        """Mean cycles per sample, or None for an empty batch."""
        if self.cycles.size == 0:
            return None
        return self.total_cycles / self.cycles.size


def convert_batch(xs, tree: DecisionTree, cfg: AdcConfig, keep_traces: bool = False) -> BatchResult:
    """Convert every sample with ``tree``; all samples walk the tree in lockstep.

    Produces the same codes and cycle counts as calling :func:`convert_tree`
    on each sample. Traces are only collected when ``keep_traces`` is set.
    """
    _check_tree(tree, cfg)
    xs = np.asarray(xs, dtype=np.float64).ravel()
    bad = np.flatnonzero(~((xs >= cfg.x_min) & (xs < cfg.x_max)))
    if bad.size:
        i = int(bad[0])
        raise OutOfRange(f"sample {i}: input {xs[i]!r} outside [{cfg.x_min}, {cfg.x_max})")
    if keep_traces:
        results = [convert_tree(float(x), tree, cfg) for x in xs]
        return BatchResult(
            np.array([r.code for r in results], dtype=np.int64),
            np.array([r.cycles for r in results], dtype=np.int64),
            [r.trace for r in results],
        )

    tab = tree.tables
    n = xs.size
    codes = np.full(n, -1, dtype=np.int64)
    cycles = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    addr = np.zeros(n, dtype=np.int64)
    while active.size:
        thr = tab.threshold[addr]
        z = xs[active] < dac_reference(thr, cfg)
        cycles[active] += 1
        stop = np.where(z, tab.true_stop[addr], tab.false_stop[addr])
        payload = np.where(z, tab.true_payload[addr], tab.false_payload[addr])
        codes[active[stop]] = payload[stop]
        active = active[~stop]
        addr = payload[~stop]
    return BatchResult(codes, cycles)


def write_samples_csv(path, xs, codes, cycles) -> None:
    """Per-sample CSV with columns sample_index, x, code, cycles."""
    with open(path, "w", newline="") as fh:
        fh.write("sample_index,x,code,cycles\n")
        for i, (x, c, m) in enumerate(zip(np.asarray(xs).tolist(), np.asarray(codes).tolist(),
                                          np.asarray(cycles).tolist())):
            fh.write(f"{i},{x!r},{c},{m}\n")
