"""Probability model over ADC output codes.

A :class:`Pmf` holds one probability per output code of an N-bit
converter. Entropies are in bits (log base 2) with ``0 * log2(0) = 0``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ThresholdOutOfRange, ZeroMassInterval

log = logging.getLogger(__name__)

SUM_TOL = 1e-9
FILE_SUM_WARN = 1e-3


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability vector over the ``2**bits`` output codes."""

    probs: np.ndarray
    bits: int

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64)
        if probs.ndim != 1:
            raise ValueError("probs must be one-dimensional")
        if self.bits < 1:
            raise ValueError(f"bits must be >= 1, got {self.bits}")
        if probs.size != 1 << self.bits:
            raise ValueError(
                f"expected {1 << self.bits} probabilities for {self.bits} bits, got {probs.size}"
            )
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("probabilities must be finite and non-negative")
        total = math.fsum(probs)
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_weights(cls, weights: Iterable[float], bits: int | None = None) -> "Pmf":
        """Renormalize non-negative weights (e.g. histogram counts) into a Pmf."""
        w = np.asarray(list(weights) if not isinstance(weights, np.ndarray) else weights,
                       dtype=np.float64)
        if bits is None:
            bits = _bits_for(w.size)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        total = math.fsum(w)
        if total <= 0:
            raise ValueError("weights have zero total")
        return cls(w / total, bits)

    @classmethod
    def uniform(cls, bits: int) -> "Pmf":
        n = 1 << bits
        return cls(np.full(n, 1.0 / n), bits)

    @property
    def size(self) -> int:
        return self.probs.size

    def full(self) -> "Interval":
        return Interval(0, self.size)

    def __eq__(self, other):
        if not isinstance(other, Pmf):
            return NotImplemented
        return self.bits == other.bits and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash((self.bits, self.probs.tobytes()))

    def __repr__(self):
        return f"Pmf(bits={self.bits}, probs={np.array2string(self.probs, threshold=8)})"


@dataclass(frozen=True)
class Interval:
    """Half-open ambiguity interval ``[lb, ub)`` of output codes."""

    lb: int
    ub: int

    def __post_init__(self):
        if not (0 <= self.lb < self.ub):
            raise ValueError(f"invalid interval [{self.lb}, {self.ub})")

    @property
    def size(self) -> int:
        return self.ub - self.lb

    def __contains__(self, code: int) -> bool:
        return self.lb <= code < self.ub


def _bits_for(n: int) -> int:
    bits = n.bit_length() - 1
    if n < 2 or 1 << bits != n:
        raise ValueError(f"length {n} is not a power of two >= 2")
    return bits


def _check_interval(pmf: Pmf, iv: Interval) -> None:
    if iv.ub > pmf.size:
        raise ValueError(f"interval [{iv.lb}, {iv.ub}) exceeds {pmf.size} codes")


def _entropy_of(p: np.ndarray) -> float:
    nz = p[p > 0]
    return max(0.0, -math.fsum(nz * np.log2(nz)))


def mass(pmf: Pmf, iv: Interval) -> float:
    """Total probability of the codes in ``iv``."""
    _check_interval(pmf, iv)
    return math.fsum(pmf.probs[iv.lb:iv.ub])


def entropy(pmf: Pmf) -> float:
    """Shannon entropy of the output code, in bits."""
    return _entropy_of(pmf.probs)


def conditional_entropy(pmf: Pmf, iv: Interval) -> float:
    """Entropy of the output code given that it lies in ``iv``.

    The restriction of ``pmf`` to ``iv`` is renormalized before taking the
    entropy, so the full interval reproduces :func:`entropy`.
    """
    m = mass(pmf, iv)
    if m <= 0:
        raise ZeroMassInterval(f"no probability mass on [{iv.lb}, {iv.ub})")
    if iv.size == 1:
        return 0.0
    if iv.lb == 0 and iv.ub == pmf.size:
        return entropy(pmf)
    return _entropy_of(pmf.probs[iv.lb:iv.ub] / m)


def branch_probabilities(pmf: Pmf, iv: Interval, threshold: int) -> tuple[float, float]:
    """Comparator outcome probabilities ``(P(z=0), P(z=1))`` for a threshold.

    ``z = 1`` means the input is below the DAC reference, i.e. the code lies
    in ``[lb, threshold)``; ``z = 0`` selects ``[threshold, ub)``.
    """
    _check_interval(pmf, iv)
    if not iv.lb < threshold < iv.ub:
        raise ThresholdOutOfRange(
            f"threshold {threshold} not strictly inside [{iv.lb}, {iv.ub})"
        )
    lower = math.fsum(pmf.probs[iv.lb:threshold])
    upper = math.fsum(pmf.probs[threshold:iv.ub])
    total = lower + upper
    if total <= 0:
        raise ZeroMassInterval(f"no probability mass on [{iv.lb}, {iv.ub})")
    p1 = lower / total
    return 1.0 - p1, p1


def load_pmf_file(path: str | Path) -> Pmf:
    """Read a PMF text file: one non-negative number per line, ``2**N`` lines.

    Blank lines are ignored. The values are renormalized; a warning is
    logged if their raw sum is off by more than 1e-3.
    """
    values = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from None
    return _pmf_from_values(values, source=str(path))


def parse_pmf_inline(text: str) -> Pmf:
    """Parse a comma-separated list of probabilities."""
    values = [float(v) for v in text.split(",") if v.strip()]
    return _pmf_from_values(values, source="inline pmf")


def _pmf_from_values(values: list[float], source: str) -> Pmf:
    raw = math.fsum(values)
    if abs(raw - 1.0) > FILE_SUM_WARN:
        log.warning("%s: raw sum %.6g deviates from 1; renormalizing", source, raw)
    return Pmf.from_weights(np.asarray(values, dtype=np.float64))


def save_pmf_file(pmf: Pmf, path: str | Path) -> None:
    Path(path).write_text("".join(f"{p!r}\n" for p in pmf.probs.tolist()))
