"""Average comparison cycles vs. resolution for the Gaussian and mixture inputs.

Writes one report CSV per distribution (columns as in ``python -m meradc``)
and prints the MER-minus-entropy gap per row.

    python scripts/fig8_sweep.py --out results/ --bits 4..12 --samples 100000
"""

import argparse
from pathlib import Path

from meradc.cli import build_parser, run_experiment

DISTS = {
    "gaussian_10db": ["--dist", "gaussian", "--par-db", "10"],
    "mixture_10_30db": ["--dist", "mixture", "--par-db", "10,30", "--weights", "0.1,0.9"],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--bits", default="4..12")
    ap.add_argument("--samples", default="100000")
    ap.add_argument("--seed", default="7")
    opts = ap.parse_args()
    opts.out.mkdir(parents=True, exist_ok=True)

    for name, flags in DISTS.items():
        argv = flags + ["--bits", opts.bits, "--samples", opts.samples, "--seed", opts.seed,
                        "--report-out", str(opts.out / f"{name}.csv")]
        report = run_experiment(build_parser().parse_args(argv))
        print(f"{name}:")
        print(f"  {'bits':>4} {'H':>9} {'MER avg':>9} {'adaptive':>9} {'gap':>7}")
        for r in report.rows:
            adaptive = "" if r.avg_cycles_adaptive is None else f"{r.avg_cycles_adaptive:9.4f}"
            print(f"  {r.bits:4d} {r.entropy_bits:9.4f} {r.avg_cycles_mer:9.4f} {adaptive:>9} "
                  f"{r.expected_len_mer - r.entropy_bits:7.4f}")


if __name__ == "__main__":
    main()
