"""Exit criteria for the package. Run with ``pytest tests/test_acceptance.py``;
a PASS/FAIL line per criterion is printed in the terminal summary."""

import math

import numpy as np
import pytest

from meradc.adapt import run_adaptive
from meradc.pmf import Pmf, entropy
from meradc.sarsim import AdcConfig, convert_batch, convert_online, convert_tree, dac_reference, quantize
from meradc.siggen import MIXTURE_PAR_DB, MIXTURE_WEIGHTS, SignalSpec, exact_pmf, generate
from meradc.treebuild import (
    build_binary_tree,
    build_mer_tree,
    build_optimal_tree,
    expected_length,
    kraft_sum_is_one,
    tree_depths,
)

from conftest import FIG4, random_pmf

TREND_BITS = (4, 6, 8, 10, 12)
TREND_SAMPLES = 100_000
SANDWICH_PER_BITS = 200  # x 5 resolutions = 1000 pmfs
ADAPT_BITS = 8
ADAPT_SAMPLES = 100_000
ADAPT_TOL = 0.1

DISTRIBUTIONS = {
    "gaussian-10dB": lambda seed: SignalSpec.gaussian(10, seed=seed),
    "mixture-10/30dB": lambda seed: SignalSpec.mixture(MIXTURE_PAR_DB, MIXTURE_WEIGHTS, seed=seed),
}


def grid(cfg: AdcConfig) -> np.ndarray:
    """17 inputs per code: both cell edges (the upper one as the float just
    below it), the float just above the lower edge, and 14 interior points."""
    xs = []
    for y in range(cfg.n_codes):
        lo, hi = dac_reference(y, cfg), dac_reference(y + 1, cfg)
        xs += [lo, np.nextafter(lo, np.inf), np.nextafter(hi, -np.inf)]
        xs += list(np.linspace(lo, hi, 16)[1:-1])
    xs = np.array(xs)
    return xs[xs < cfg.x_max]


def correctness_trees(bits: int):
    cfg = AdcConfig(bits)
    gauss = exact_pmf(SignalSpec.gaussian(10), cfg)
    rnd = random_pmf(np.random.default_rng(100 + bits), bits)
    return [build_binary_tree(bits), build_mer_tree(gauss), build_optimal_tree(gauss),
            build_mer_tree(rnd), build_optimal_tree(rnd)]


def equivalence_pmfs(bits: int):
    return [random_pmf(np.random.default_rng(seed), bits) for seed in range(10)]


def sandwich_pmfs():
    rng = np.random.default_rng(2024)
    return [random_pmf(rng, bits) for bits in range(2, 7) for _ in range(SANDWICH_PER_BITS)]


def trend_trees():
    for name, make in DISTRIBUTIONS.items():
        for bits in TREND_BITS:
            pmf = exact_pmf(make(0), AdcConfig(bits))
            yield name, bits, pmf, build_mer_tree(pmf)


@pytest.mark.criterion("1", "2-bit example: depths (3,3,2,1), MER = DP = entropy = 1.75")
def test_fig4_golden():
    pmf = Pmf(FIG4, 2)
    mer = build_mer_tree(pmf)
    assert tree_depths(mer).tolist() == [3, 3, 2, 1]
    assert expected_length(mer, pmf) == 1.75
    assert expected_length(build_optimal_tree(pmf), pmf) == 1.75
    assert entropy(pmf) == 1.75


@pytest.mark.criterion("2", "convert_tree == quantize on boundary grids, bits 1..8, all tree kinds")
def test_correctness_grid():
    for bits in range(1, 9):
        for delta in (1.0, 0.37):
            cfg = AdcConfig(bits, delta)
            xs = grid(cfg)
            assert xs.size >= 16 * cfg.n_codes
            truth = [quantize(float(x), cfg) for x in xs]
            for tree in correctness_trees(bits):
                got = [convert_tree(float(x), tree, cfg).code for x in xs]
                assert got == truth, f"bits={bits} delta={delta} builder={tree.builder}"
                assert convert_batch(xs, tree, cfg).codes.tolist() == truth


@pytest.mark.criterion("3", "online engine == tree engine (code, cycles, trace), bits 2..8 x 10 pmfs")
def test_engine_equivalence():
    for bits in range(2, 9):
        cfg = AdcConfig(bits)
        xs = grid(cfg)
        for pmf in equivalence_pmfs(bits):
            tree = build_mer_tree(pmf)
            for x in xs:
                assert convert_online(float(x), pmf, cfg) == convert_tree(float(x), tree, cfg)


@pytest.mark.criterion("4", "H <= optimal <= MER and binary == bits over 1000 random pmfs")
def test_sandwich():
    pmfs = sandwich_pmfs()
    assert len(pmfs) >= 1000
    for pmf in pmfs:
        h = entropy(pmf)
        opt = expected_length(build_optimal_tree(pmf), pmf)
        mer = expected_length(build_mer_tree(pmf), pmf)
        assert h <= opt + 1e-9
        assert opt <= mer
        assert expected_length(build_binary_tree(pmf.bits), pmf) == pmf.bits


@pytest.fixture(scope="module")
def trend_rows():
    rows = {}
    for name, make in DISTRIBUTIONS.items():
        for bits in TREND_BITS:
            cfg = AdcConfig(bits)
            spec = make(bits)
            pmf = exact_pmf(spec, cfg)
            tree = build_mer_tree(pmf)
            res = convert_batch(generate(spec, TREND_SAMPLES, cfg), tree, cfg)
            se = res.cycles.std(ddof=1) / math.sqrt(res.cycles.size)
            rows[name, bits] = dict(avg=res.average_cycles, se=se, expected=expected_length(tree, pmf),
                                    entropy=entropy(pmf))
    return rows


@pytest.mark.criterion("5a", "MER average cycles < bits at 4..12 bits (Gaussian, mixture)")
def test_trend_below_bits(trend_rows):
    for (name, bits), row in trend_rows.items():
        assert row["avg"] < bits, (name, bits, row)


@pytest.mark.criterion("5b-gaussian", "gap (MER expected - H) at 12 bits < gap at 4 bits, Gaussian 10 dB")
def test_trend_gap_shrinks_gaussian(trend_rows):
    _assert_gap_shrinks(trend_rows, "gaussian-10dB")


@pytest.mark.criterion("5b-mixture", "gap (MER expected - H) at 12 bits < gap at 4 bits, 10/30 dB mixture")
def test_trend_gap_shrinks_mixture(trend_rows):
    _assert_gap_shrinks(trend_rows, "mixture-10/30dB")


def _assert_gap_shrinks(rows, name):
    gaps = {bits: rows[name, bits]["expected"] - rows[name, bits]["entropy"] for bits in TREND_BITS}
    assert gaps[12] < gaps[4], f"{name}: gaps by bits {gaps}"


@pytest.mark.criterion("5c", "sampled MER average within 3 SE of expected length")
def test_trend_sampling_consistent(trend_rows):
    for (name, bits), row in trend_rows.items():
        assert abs(row["avg"] - row["expected"]) <= 3 * row["se"], (name, bits, row)


@pytest.mark.criterion("6", "adaptive: post-settle within 0.1 of MER(exact); recovers within 3 windows")
def test_adaptive_convergence():
    cfg = AdcConfig(ADAPT_BITS)
    mix = SignalSpec.mixture(MIXTURE_PAR_DB, MIXTURE_WEIGHTS, seed=61)
    gauss = SignalSpec.gaussian(10, seed=62)
    switch = ADAPT_SAMPLES // 2
    xs = np.concatenate([generate(mix, switch, cfg), generate(gauss, ADAPT_SAMPLES - switch, cfg)])
    run = run_adaptive(xs, cfg)

    def target(spec):
        pmf = exact_pmf(spec, cfg)
        return expected_length(build_mer_tree(pmf), pmf)

    before = run.post_settle_average(stop=switch)
    assert before is not None
    assert abs(before - target(mix)) <= ADAPT_TOL

    w = run.window
    first_full = -(-switch // w) * w  # first window starting after the switch
    averages = [run.cycles[s:s + w].mean() for s in range(first_full, ADAPT_SAMPLES - w + 1, w)]
    assert len(averages) >= 3
    # the third full window after the switch and every later one are settled
    assert all(abs(a - target(gauss)) <= ADAPT_TOL for a in averages[2:]), averages
    assert run.codes.tolist() == [quantize(float(x), cfg) for x in xs]


@pytest.mark.criterion("7", "Kraft equality (exact integers) for every tree of criteria 1-5")
def test_kraft_all_trees():
    trees = [build_mer_tree(Pmf(FIG4, 2)), build_optimal_tree(Pmf(FIG4, 2))]
    for bits in range(1, 9):
        trees += correctness_trees(bits)
        trees += [build_mer_tree(p) for p in equivalence_pmfs(bits)] if bits >= 2 else []
    for pmf in sandwich_pmfs():
        trees += [build_optimal_tree(pmf), build_mer_tree(pmf), build_binary_tree(pmf.bits)]
    trees += [tree for *_, tree in trend_trees()]
    for tree in trees:
        assert kraft_sum_is_one(tree_depths(tree))
