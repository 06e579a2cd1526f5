"""Regime-switch run: mixture input, then an abrupt switch to a 10 dB Gaussian.

Prints the per-window average cycle count next to the MER-tree target for
the distribution active in that window.
"""

import argparse

import numpy as np

from meradc.adapt import DEFAULT_L1_THRESHOLD, run_adaptive
from meradc.sarsim import AdcConfig
from meradc.siggen import MIXTURE_PAR_DB, MIXTURE_WEIGHTS, SignalSpec, exact_pmf, generate
from meradc.treebuild import build_mer_tree, expected_length


def target(spec, cfg):
    pmf = exact_pmf(spec, cfg)
    return expected_length(build_mer_tree(pmf), pmf)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--bits", type=int, default=8)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=61)
    ap.add_argument("--window", type=int)
    ap.add_argument("--l1-threshold", type=float, default=DEFAULT_L1_THRESHOLD)
    opts = ap.parse_args()

    cfg = AdcConfig(opts.bits)
    first = SignalSpec.mixture(MIXTURE_PAR_DB, MIXTURE_WEIGHTS, seed=opts.seed)
    second = SignalSpec.gaussian(10, seed=opts.seed + 1)
    switch = opts.samples // 2
    xs = np.concatenate([generate(first, switch, cfg), generate(second, opts.samples - switch, cfg)])
    run = run_adaptive(xs, cfg, window=opts.window, l1_threshold=opts.l1_threshold)

    targets = target(first, cfg), target(second, cfg)
    print(f"window {run.window}, switch at sample {switch}, {len(run.log)} rebuilds")
    for k, avg in enumerate(run.window_averages()):
        start = k * run.window
        t = targets[start >= switch]
        print(f"{start:7d}  gen {run.generations[start]:3d}  avg {avg:7.4f}  target {t:7.4f}  "
              f"diff {avg - t:+.4f}")


if __name__ == "__main__":
    main()
