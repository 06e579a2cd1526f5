"""Adaptive tree retraining from observed output codes.

The converter starts on the binary tree. Codes are counted in a window of
``W`` samples. At each window boundary:

* the first boundary always rebuilds the tree from the cumulative histogram;
* later boundaries rebuild only when the L1 distance between this window's
  normalized histogram and the previous window's exceeds the threshold. The
  cumulative histogram is then replaced by the latest window, so stale
  statistics from before a regime change are dropped.

Trees are built from a Laplace (add-one) smoothed estimate so every code
keeps a strictly positive probability.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CodeOutOfRange, NoSamples
from .pmf import Pmf
from .sarsim import AdcConfig, convert_batch
from .treebuild import DecisionTree, build_binary_tree, build_mer_tree, expected_length

DEFAULT_L1_THRESHOLD = 0.02


def default_window(bits: int) -> int:
    return max(4096, 16 << bits)


@dataclass
class AdaptiveState:
    cfg: AdcConfig
    window: int
    l1_threshold: float
    counts: np.ndarray  # cumulative histogram feeding estimate_pmf
    samples_seen: int
    window_counts: np.ndarray
    window_seen: int
    generation: int
    active_tree: DecisionTree
    prev_window: np.ndarray | None = None  # normalized histogram of the last closed window
    last_l1: float | None = None
    history: list = field(default_factory=list)

    def copy(self) -> "AdaptiveState":
        return copy.deepcopy(self)


@dataclass(frozen=True)
class RebuildEvent:
    sample_index: int
    generation: int
    window_l1: float | None
    expected_length: float  # under the estimated pmf the tree was built from

    def __str__(self):
        l1 = "n/a" if self.window_l1 is None else f"{self.window_l1:.6f}"
        return (f"rebuild at sample {self.sample_index}, generation {self.generation}, "
                f"window L1 {l1}, expected length {self.expected_length:.6f}")


def new_adaptive(cfg: AdcConfig, window: int | None = None,
                 l1_threshold: float = DEFAULT_L1_THRESHOLD) -> AdaptiveState:
    """Fresh state running the conventional binary tree."""
    window = default_window(cfg.bits) if window is None else window
    if window < 1:
        raise ValueError("window must be >= 1")
    n = cfg.n_codes
    return AdaptiveState(
        cfg=cfg,
        window=window,
        l1_threshold=l1_threshold,
        counts=np.zeros(n, dtype=np.int64),
        samples_seen=0,
        window_counts=np.zeros(n, dtype=np.int64),
        window_seen=0,
        generation=0,
        active_tree=build_binary_tree(cfg.bits),
    )


def observe(state: AdaptiveState, code: int) -> AdaptiveState:
    """Count one output code. Mutates and returns ``state``."""
    if not 0 <= code < state.cfg.n_codes:
        raise CodeOutOfRange(f"code {code} outside [0, {state.cfg.n_codes})")
    state.counts[code] += 1
    state.window_counts[code] += 1
    state.samples_seen += 1
    state.window_seen += 1
    return state


def observe_many(state: AdaptiveState, codes) -> AdaptiveState:
    """Count a batch of codes; same result as calling :func:`observe` on each."""
    codes = np.asarray(codes, dtype=np.int64)
    if codes.size and (codes.min() < 0 or codes.max() >= state.cfg.n_codes):
        raise CodeOutOfRange("code outside range in batch")
    hist = np.bincount(codes, minlength=state.cfg.n_codes)
    state.counts += hist
    state.window_counts += hist
    state.samples_seen += int(codes.size)
    state.window_seen += int(codes.size)
    return state


def estimate_pmf(state: AdaptiveState) -> Pmf:
    """Laplace-smoothed estimate ``(count + 1) / (total + 2**N)``."""
    if state.samples_seen < 1:
        raise NoSamples("no samples observed")
    return Pmf((state.counts + 1) / (state.samples_seen + state.cfg.n_codes), state.cfg.bits)


def maybe_rebuild(state: AdaptiveState, sample_index: int | None = None) -> tuple[AdaptiveState, bool]:
    """Apply the window-boundary rule. Returns ``(state, rebuilt)``.

    Before the window fills nothing changes. At a boundary the window
    histogram rolls over whether or not a rebuild happens.
    """
    if state.window_seen < state.window:
        return state, False

    hist = state.window_counts / state.window_seen
    l1 = None if state.prev_window is None else float(np.abs(hist - state.prev_window).sum())
    rebuild = state.generation == 0 or (l1 is not None and l1 > state.l1_threshold)
    if rebuild and state.generation > 0:
        state.counts = state.window_counts.copy()
        state.samples_seen = state.window_seen
    if rebuild:
        est = estimate_pmf(state)
        state.active_tree = build_mer_tree(est)
        state.generation += 1
        state.history.append(RebuildEvent(
            sample_index=state.samples_seen if sample_index is None else sample_index,
            generation=state.generation,
            window_l1=l1,
            expected_length=expected_length(state.active_tree, est),
        ))
    state.prev_window = hist
    state.last_l1 = l1
    state.window_counts = np.zeros_like(state.window_counts)
    state.window_seen = 0
    return state, rebuild


@dataclass
class AdaptiveRun:
    codes: np.ndarray
    cycles: np.ndarray
    generations: np.ndarray  # tree generation used for each sample
    log: list[RebuildEvent]
    window: int

    def window_averages(self) -> np.ndarray:
        """Mean cycles over consecutive blocks of ``window`` samples (last may be partial)."""
        n = self.cycles.size
        starts = np.arange(0, n, self.window)
        return np.array([self.cycles[s:s + self.window].mean() for s in starts])

    @property
    def settle_index(self) -> int | None:
        """First sample converted with an adapted tree, or None if never rebuilt."""
        return self.log[0].sample_index if self.log else None

    def post_settle_average(self, stop: int | None = None) -> float | None:
        s = self.settle_index
        stop = self.cycles.size if stop is None else stop
        if s is None or s >= stop:
            return None
        return float(self.cycles[s:stop].mean())

    @property
    def average(self) -> float | None:
        return float(self.cycles.mean()) if self.cycles.size else None


def run_adaptive(xs, cfg: AdcConfig, window: int | None = None,
                 l1_threshold: float = DEFAULT_L1_THRESHOLD,
                 state: AdaptiveState | None = None) -> AdaptiveRun:
    """Convert a stream, adapting the tree between conversions.

    Each sample is converted with the active tree, its code is observed, and
    the rebuild rule is applied. Rebuilds can only happen at window
    boundaries, so samples between boundaries are converted as one batch.
    """
    xs = np.asarray(xs, dtype=np.float64).ravel()
    if state is None:
        state = new_adaptive(cfg, window, l1_threshold)
    n = xs.size
    codes = np.empty(n, dtype=np.int64)
    cycles = np.empty(n, dtype=np.int64)
    gens = np.empty(n, dtype=np.int64)
    start = len(state.history)
    i = 0
    while i < n:
        stop = min(n, i + state.window - state.window_seen)
        res = convert_batch(xs[i:stop], state.active_tree, cfg)
        codes[i:stop] = res.codes
        cycles[i:stop] = res.cycles
        gens[i:stop] = state.generation
        observe_many(state, res.codes)
        maybe_rebuild(state, sample_index=stop)
        i = stop
    return AdaptiveRun(codes, cycles, gens, state.history[start:], state.window)


def mean_and_stderr(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return float(v.mean()), math.inf
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))
