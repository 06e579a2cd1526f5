"""Comparison decision trees over the output code range.

A tree is stored the way the converter's control logic would hold it in
memory: a flat array of ``2**N - 1`` nodes, each with a threshold and two
sub-node slots. Slot ``branch_true`` is followed when the comparator says
the input is below the DAC reference for the threshold (code in
``[lb, threshold)``), ``branch_false`` otherwise (code in ``[threshold, ub)``).

Nodes are allocated in preorder, true branch first, with the root at 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Callable

import numba
import numpy as np

from .errors import BitsMismatch, TooManyBits
from .pmf import Pmf

MAX_ORACLE_BITS = 12
# Objective values this close (relative to the interval mass) count as ties.
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class SubNode:
    stop: bool
    payload: int  # output code if stop, else node address

    def __str__(self):
        return f"{'stop' if self.stop else 'node'}:{self.payload}"


@dataclass(frozen=True)
class TreeNode:
    threshold: int
    branch_true: SubNode
    branch_false: SubNode


@dataclass(frozen=True)
class DecisionTree:
    bits: int
    nodes: tuple[TreeNode, ...]
    builder: str = "custom"
    root_index: int = 0

    @property
    def n_codes(self) -> int:
        return 1 << self.bits

    @cached_property
    def report(self) -> "ValidationReport":
        return validate_tree(self)

    @cached_property
    def tables(self) -> "TreeTables":
        return TreeTables.from_tree(self)

    def __eq__(self, other):
        # builder name is a label, not structure
        if not isinstance(other, DecisionTree):
            return NotImplemented
        return self.bits == other.bits and self.nodes == other.nodes

    def __hash__(self):
        return hash((self.bits, self.nodes))


@dataclass(frozen=True)
class TreeTables:
    """Column arrays of a tree, for vectorized walks."""

    threshold: np.ndarray
    true_stop: np.ndarray
    true_payload: np.ndarray
    false_stop: np.ndarray
    false_payload: np.ndarray

    @classmethod
    def from_tree(cls, tree: DecisionTree) -> "TreeTables":
        nodes = tree.nodes
        return cls(
            threshold=np.array([n.threshold for n in nodes], dtype=np.int64),
            true_stop=np.array([n.branch_true.stop for n in nodes], dtype=bool),
            true_payload=np.array([n.branch_true.payload for n in nodes], dtype=np.int64),
            false_stop=np.array([n.branch_false.stop for n in nodes], dtype=bool),
            false_payload=np.array([n.branch_false.payload for n in nodes], dtype=np.int64),
        )


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violation: str | None = None
    message: str = ""

    def __bool__(self):
        return self.ok


# -- threshold selection ----------------------------------------------------

def mer_threshold(probs: np.ndarray, lb: int, ub: int) -> int:
    """Threshold in ``(lb, ub)`` that best balances the mass on either side.

    Minimizes ``|sum(probs[lb:t]) - sum(probs[t:ub])|``. Values within a
    relative 1e-12 of the minimum are ties; among ties the threshold nearest
    the interval midpoint wins, and the smaller one if two are equidistant.
    """
    if ub - lb < 2:
        raise ValueError(f"interval [{lb}, {ub}) cannot be split")
    seg = probs[lb:ub]
    below = np.cumsum(seg[:-1])
    above = np.cumsum(seg[:0:-1])[::-1]
    objective = np.abs(below - above)
    best = objective.min()
    total = below[-1] + seg[-1]
    candidates = np.flatnonzero(objective <= best + TIE_RTOL * total) + lb + 1
    dist = np.abs(2 * candidates - (lb + ub))
    return int(candidates[np.argmin(dist)])


def midpoint_threshold(lb: int, ub: int) -> int:
    return (lb + ub) // 2


def _build(bits: int, choose: Callable[[int, int], int], builder: str) -> DecisionTree:
    """Allocate a full alphabetic tree, asking ``choose`` for each split."""
    n = 1 << bits
    nodes: list[list] = []
    # (lb, ub, parent address, slot index); slot 1 = true, 2 = false
    stack = [(0, n, -1, 0)]
    while stack:
        lb, ub, parent, slot = stack.pop()
        addr = len(nodes)
        t = choose(lb, ub)
        if not lb < t < ub:
            raise ValueError(f"split {t} not inside [{lb}, {ub})")
        rec = [t, None, None]
        nodes.append(rec)
        if parent >= 0:
            nodes[parent][slot] = SubNode(False, addr)
        if ub - t == 1:
            rec[2] = SubNode(True, t)
        else:
            stack.append((t, ub, addr, 2))
        if t - lb == 1:
            rec[1] = SubNode(True, lb)
        else:
            stack.append((lb, t, addr, 1))
    return DecisionTree(bits, tuple(TreeNode(*r) for r in nodes), builder=builder)


def build_binary_tree(bits: int) -> DecisionTree:
    """Conventional SAR search: every node splits its interval in half."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    return _build(bits, midpoint_threshold, "binary")


def build_mer_tree(pmf: Pmf) -> DecisionTree:
    """Greedy maximal-entropy-reduction tree for ``pmf``."""
    probs = pmf.probs
    return _build(pmf.bits, lambda lb, ub: mer_threshold(probs, lb, ub), "mer")


def build_tree_from_splits(bits: int, splits: dict[tuple[int, int], int], builder: str = "custom") -> DecisionTree:
    """Build a tree from an explicit ``(lb, ub) -> threshold`` table."""
    return _build(bits, lambda lb, ub: splits[(lb, ub)], builder)


# -- exact optimum ----------------------------------------------------------

@numba.njit(cache=True)
def _optimal_split_table(prefix):
    n = prefix.size - 1
    cost = np.zeros((n + 1, n + 1))
    root = np.zeros((n + 1, n + 1), dtype=np.int64)
    for i in range(n - 1):
        root[i, i + 2] = i + 1
        cost[i, i + 2] = prefix[i + 2] - prefix[i]
    for length in range(3, n + 1):
        for i in range(n - length + 1):
            j = i + length
            lo = root[i, j - 1]
            hi = root[i + 1, j]
            best = np.inf
            arg = lo
            for k in range(lo, hi + 1):
                c = cost[i, k] + cost[k, j]
                if c < best:
                    best = c
                    arg = k
            root[i, j] = arg
            cost[i, j] = best + (prefix[j] - prefix[i])
    return cost, root


def optimal_split_table(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Interval DP for the minimum expected depth alphabetic tree.

    ``cost[i, j]`` is the minimum of ``sum(p[n] * depth(n))`` over trees on
    codes ``[i, j)`` and ``root[i, j]`` the lowest optimal split found
    within Knuth's monotone window ``root[i, j-1] <= k <= root[i+1, j]``.
    """
    prefix = np.concatenate(([0.0], np.cumsum(np.asarray(probs, dtype=np.float64))))
    return _optimal_split_table(prefix)


def build_optimal_tree(pmf: Pmf) -> DecisionTree:
    """Alphabetic tree with minimum expected comparison count (exact DP)."""
    if pmf.bits > MAX_ORACLE_BITS:
        raise TooManyBits(f"optimal tree limited to {MAX_ORACLE_BITS} bits, got {pmf.bits}")
    _, root = optimal_split_table(pmf.probs)
    return _build(pmf.bits, lambda lb, ub: int(root[lb, ub]), "optimal")


# -- measurements -----------------------------------------------------------

def tree_depths(tree: DecisionTree) -> np.ndarray:
    """Number of comparisons needed to reach each output code."""
    depths = np.zeros(tree.n_codes, dtype=np.int64)
    stack = [(tree.root_index, 1)]
    while stack:
        addr, d = stack.pop()
        node = tree.nodes[addr]
        for sub in (node.branch_true, node.branch_false):
            if sub.stop:
                depths[sub.payload] = d
            else:
                stack.append((sub.payload, d + 1))
    return depths


def kraft_sum_is_one(depths: np.ndarray) -> bool:
    """Exact integer check of ``sum(2**-d) == 1``."""
    depths = [int(d) for d in depths]
    top = max(depths)
    return sum(1 << (top - d) for d in depths) == 1 << top


def expected_length(tree: DecisionTree, pmf: Pmf) -> float:
    """Average number of comparison cycles when codes follow ``pmf``.

    Evaluated exactly as ``sum(p * depth) / sum(p)`` over the stored floats
    and rounded once, so a fixed-depth tree gives exactly its depth even when
    the stored probabilities sum to 1 only up to rounding.
    """
    if tree.bits != pmf.bits:
        raise BitsMismatch(f"tree has {tree.bits} bits, pmf has {pmf.bits}")
    return exact_weighted_mean(pmf.probs, tree_depths(tree))


def exact_weighted_mean(weights: np.ndarray, values: np.ndarray) -> float:
    mant, expo = np.frexp(np.asarray(weights, dtype=np.float64))
    ints = np.ldexp(mant, 53).astype(np.int64).tolist()
    shifts = (expo - 53).tolist()
    base = min(shifts)
    scaled = [m << (s - base) for m, s in zip(ints, shifts)]
    den = sum(scaled)
    if den == 0:
        raise ValueError("weights sum to zero")
    num = sum(w * int(v) for w, v in zip(scaled, np.asarray(values).tolist()))
    return float(Fraction(num, den))


def validate_tree(tree: DecisionTree) -> ValidationReport:
    """Check every structural invariant of a decision tree memory.

    Reports the first violation found. Violation kinds: ``node-count``,
    ``bad-address``, ``cycle``, ``multi-parent``, ``unreachable``,
    ``threshold``, ``leaf-range``, ``leaf-mismatch``, ``duplicate-leaf``,
    ``missing-leaf``.
    """
    n = tree.n_codes
    nodes = tree.nodes
    if tree.bits < 1 or len(nodes) != n - 1:
        return ValidationReport(False, "node-count", f"{len(nodes)} nodes for {tree.bits} bits")
    if tree.root_index != 0:
        return ValidationReport(False, "bad-address", "root must be node 0")

    seen_leaf = [False] * n
    parent_of = [-1] * len(nodes)
    visited = [False] * len(nodes)
    # walk with the interval each node governs
    stack = [(0, 0, n)]
    visited[0] = True
    while stack:
        addr, lb, ub = stack.pop()
        node = nodes[addr]
        t = node.threshold
        if not lb < t < ub:
            return ValidationReport(
                False, "threshold", f"node {addr}: threshold {t} outside ({lb}, {ub})"
            )
        for sub, slb, sub_ub in ((node.branch_true, lb, t), (node.branch_false, t, ub)):
            if sub.stop:
                code = sub.payload
                if not 0 <= code < n:
                    return ValidationReport(False, "leaf-range", f"node {addr}: code {code}")
                if seen_leaf[code]:
                    return ValidationReport(False, "duplicate-leaf", f"code {code} appears twice")
                if sub_ub - slb != 1 or code != slb:
                    return ValidationReport(
                        False, "leaf-mismatch",
                        f"node {addr}: stop at code {code} but interval is [{slb}, {sub_ub})",
                    )
                seen_leaf[code] = True
            else:
                child = sub.payload
                if not 0 <= child < len(nodes):
                    return ValidationReport(False, "bad-address", f"node {addr}: address {child}")
                if child == 0 or visited[child]:
                    kind = "cycle" if _reaches(nodes, child, addr) else "multi-parent"
                    return ValidationReport(False, kind, f"node {addr} -> node {child}")
                visited[child] = True
                parent_of[child] = addr
                stack.append((child, slb, sub_ub))
    if not all(visited):
        return ValidationReport(False, "unreachable", f"node {visited.index(False)} unreachable")
    if not all(seen_leaf):
        return ValidationReport(False, "missing-leaf", f"code {seen_leaf.index(False)} has no leaf")
    return ValidationReport(True)


def _reaches(nodes, start: int, target: int) -> bool:
    """Whether ``target`` is reachable from ``start`` following node links."""
    seen = set()
    stack = [start]
    while stack:
        a = stack.pop()
        if a == target:
            return True
        if a in seen or not 0 <= a < len(nodes):
            continue
        seen.add(a)
        for sub in (nodes[a].branch_true, nodes[a].branch_false):
            if not sub.stop:
                stack.append(sub.payload)
    return False


# -- dump format ------------------------------------------------------------

def format_tree(tree: DecisionTree) -> str:
    """Text dump: header line, then ``address threshold true false`` per node."""
    lines = [f"# tree bits={tree.bits} builder={tree.builder} nodes={len(tree.nodes)}"]
    lines += [
        f"{addr} {node.threshold} {node.branch_true} {node.branch_false}"
        for addr, node in enumerate(tree.nodes)
    ]
    return "\n".join(lines) + "\n"


def parse_tree(text: str) -> DecisionTree:
    """Inverse of :func:`format_tree`. Does not validate."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# tree"):
        raise ValueError("missing tree header")
    header = dict(f.split("=", 1) for f in lines[0].split()[2:])
    nodes = []
    for expect, line in enumerate(lines[1:]):
        addr, thr, t, f = line.split()
        if int(addr) != expect:
            raise ValueError(f"node records out of order at {line!r}")
        nodes.append(TreeNode(int(thr), _parse_sub(t), _parse_sub(f)))
    return DecisionTree(int(header["bits"]), tuple(nodes), builder=header.get("builder", "custom"))


def _parse_sub(text: str) -> SubNode:
    kind, _, value = text.partition(":")
    if kind not in ("stop", "node"):
        raise ValueError(f"bad sub-node {text!r}")
    return SubNode(kind == "stop", int(value))


def write_tree(tree: DecisionTree, path: str | Path) -> None:
    Path(path).write_text(format_tree(tree))
