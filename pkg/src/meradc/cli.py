"""Experiment runner: cycles-vs-entropy sweeps and the 2-bit walkthrough.

Example::

    python -m meradc --bits 4..12 --dist gaussian --par-db 10 --samples 100000 --seed 7
    python -m meradc --bits 2 --pmf-inline 0.125,0.125,0.25,0.5 --mode mer --dump-tree
    python -m meradc --demo-fig4
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import adapt
from .errors import MerAdcError
from .pmf import Pmf, entropy, load_pmf_file, parse_pmf_inline
from .sarsim import AdcConfig, convert_batch, write_samples_csv
from .siggen import MIXTURE_PAR_DB, MIXTURE_WEIGHTS, SignalSpec, exact_pmf, generate
from .treebuild import (
    MAX_ORACLE_BITS,
    build_binary_tree,
    build_mer_tree,
    build_optimal_tree,
    expected_length,
    format_tree,
    tree_depths,
    validate_tree,
)

log = logging.getLogger("meradc")

REPORT_COLUMNS = (
    "bits", "entropy_bits", "avg_cycles_binary", "avg_cycles_mer", "avg_cycles_adaptive",
    "expected_len_mer", "expected_len_optimal", "samples", "seed",
)
MODES = ("binary", "mer", "adaptive", "all")
FIG4_PMF = (0.125, 0.125, 0.25, 0.5)


@dataclass
class ReportRow:
    bits: int
    entropy_bits: float
    avg_cycles_binary: float | None
    avg_cycles_mer: float | None
    avg_cycles_adaptive: float | None  # post-settle windowed average
    expected_len_mer: float
    expected_len_optimal: float | None
    samples: int
    seed: int
    avg_cycles_adaptive_whole_run: float | None = None
    stderr_mer: float | None = None

    def csv_fields(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in REPORT_COLUMNS]


@dataclass
class ExperimentReport:
    rows: list[ReportRow] = field(default_factory=list)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(REPORT_COLUMNS) + "\n")
        for row in self.rows:
            out.write(",".join(row.csv_fields()) + "\n")
        return out.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.9f}"
    return str(v)


def parse_bits(text: str) -> list[int]:
    """``"8"`` -> [8]; ``"4..12"`` -> [4, 5, ..., 12] (inclusive)."""
    try:
        if ".." in text:
            a, b = (int(s) for s in text.split("..", 1))
            bits = list(range(a, b + 1))
        else:
            bits = [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad bits value {text!r}") from None
    if not bits or min(bits) < 1:
        raise argparse.ArgumentTypeError(f"bad bits range {text!r}")
    return bits


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="meradc", description=__doc__.split("\n")[0])
    p.add_argument("--bits", type=parse_bits, help="resolution N, or inclusive range a..b")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--dist", choices=("uniform", "gaussian", "mixture"))
    src.add_argument("--pmf-file", type=Path, help="text file, one probability per line")
    src.add_argument("--pmf-inline", help="comma-separated probabilities")
    p.add_argument("--par-db", type=_floats, help="peak-to-RMS ratio(s) in dB")
    p.add_argument("--weights", type=_floats, help="mixture weights")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default="all")
    p.add_argument("--oracle", action="store_true", help="require the exact optimal-tree column")
    p.add_argument("--csv-out", type=Path, help="per-sample CSV (sample_index,x,code,cycles)")
    p.add_argument("--report-out", type=Path, help="report CSV path (default: stdout)")
    p.add_argument("--tree-out", type=Path, help="write tree dumps here")
    p.add_argument("--log-out", type=Path, help="adaptive rebuild log")
    p.add_argument("--dump-tree", action="store_true", help="print tree dumps to stdout")
    p.add_argument("--window", type=int, help="adaptive window size (default max(4096, 16*2^N))")
    p.add_argument("--l1-threshold", type=float, default=adapt.DEFAULT_L1_THRESHOLD)
    p.add_argument("--demo-fig4", action="store_true", help="print the 2-bit walkthrough and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _signal_for(args, bits: int, fixed_pmf: Pmf | None) -> tuple[SignalSpec, Pmf, AdcConfig]:
    cfg = AdcConfig(bits, args.delta)
    if fixed_pmf is not None:
        spec = SignalSpec("from_pmf_file", seed=args.seed, pmf=fixed_pmf)
        return spec, fixed_pmf, cfg
    dist = args.dist or "gaussian"
    if dist == "uniform":
        spec = SignalSpec("uniform", seed=args.seed)
    elif dist == "gaussian":
        par = args.par_db or (10.0,)
        spec = SignalSpec("gaussian", par[:1], seed=args.seed)
    else:
        spec = SignalSpec.mixture(args.par_db or MIXTURE_PAR_DB, args.weights or MIXTURE_WEIGHTS,
                                  seed=args.seed)
    return spec, exact_pmf(spec, cfg), cfg


def _suffixed(path: Path, bits: int, multi: bool) -> Path:
    return path.with_name(f"{path.stem}_{bits}bit{path.suffix}") if multi else path


def run_experiment(args: argparse.Namespace, stdout=None) -> ExperimentReport:
    """Run the sweep described by parsed flags; writes any requested files."""
    stdout = sys.stdout if stdout is None else stdout
    fixed_pmf = None
    if args.pmf_file is not None:
        fixed_pmf = load_pmf_file(args.pmf_file)
    elif args.pmf_inline is not None:
        fixed_pmf = parse_pmf_inline(args.pmf_inline)
    bits_list = args.bits
    if fixed_pmf is not None:
        if bits_list is None:
            bits_list = [fixed_pmf.bits]
        elif bits_list != [fixed_pmf.bits]:
            raise MerAdcError(f"pmf has {fixed_pmf.size} entries, which needs --bits {fixed_pmf.bits}")
    if bits_list is None:
        raise MerAdcError("--bits is required unless a pmf is given")
    if args.oracle and max(bits_list) > MAX_ORACLE_BITS:
        raise MerAdcError(f"--oracle supports at most {MAX_ORACLE_BITS} bits")
    if args.samples < 0:
        raise MerAdcError("--samples must be >= 0")
    modes = {"binary", "mer", "adaptive"} if args.mode == "all" else {args.mode}
    multi = len(bits_list) > 1

    report = ExperimentReport()
    tree_dumps, log_lines = [], []
    for bits in bits_list:
        spec, pmf, cfg = _signal_for(args, bits, fixed_pmf)
        xs = generate(spec, args.samples, cfg)
        mer_tree = build_mer_tree(pmf)
        opt_len = None
        if bits <= MAX_ORACLE_BITS:
            opt_len = expected_length(build_optimal_tree(pmf), pmf)
        else:
            log.warning("skipping optimal-tree column at %d bits (limit %d)", bits, MAX_ORACLE_BITS)

        row = ReportRow(bits, entropy(pmf), None, None, None,
                        expected_length(mer_tree, pmf), opt_len, args.samples, args.seed)
        codes_by_mode, cycles_by_mode = {}, {}
        if "binary" in modes:
            res = convert_batch(xs, build_binary_tree(bits), cfg)
            row.avg_cycles_binary = res.average_cycles
            codes_by_mode["binary"], cycles_by_mode["binary"] = res.codes, res.cycles
        if "mer" in modes:
            res = convert_batch(xs, mer_tree, cfg)
            row.avg_cycles_mer = res.average_cycles
            if res.cycles.size > 1:
                row.stderr_mer = adapt.mean_and_stderr(res.cycles)[1]
            codes_by_mode["mer"], cycles_by_mode["mer"] = res.codes, res.cycles
        if "adaptive" in modes:
            run = adapt.run_adaptive(xs, cfg, window=args.window, l1_threshold=args.l1_threshold)
            row.avg_cycles_adaptive = run.post_settle_average()
            row.avg_cycles_adaptive_whole_run = run.average
            codes_by_mode["adaptive"], cycles_by_mode["adaptive"] = run.codes, run.cycles
            if multi:
                log_lines.append(f"# bits={bits}")
            log_lines += [str(e) for e in run.log]
        _check_modes_agree(codes_by_mode)
        report.rows.append(row)

        dump_tree = build_binary_tree(bits) if modes == {"binary"} else mer_tree
        tree_dumps.append(format_tree(dump_tree))
        if args.csv_out is not None and codes_by_mode:
            mode = next(m for m in ("mer", "adaptive", "binary") if m in codes_by_mode)
            write_samples_csv(_suffixed(args.csv_out, bits, multi), xs,
                              codes_by_mode[mode], cycles_by_mode[mode])

    if args.dump_tree:
        stdout.write("".join(tree_dumps))
    if args.tree_out is not None:
        args.tree_out.write_text("".join(tree_dumps))
    if args.log_out is not None:
        args.log_out.write_text("".join(line + "\n" for line in log_lines))
    if args.report_out is not None:
        args.report_out.write_text(report.to_csv())
    else:
        stdout.write(report.to_csv())
    for row in report.rows:
        if row.avg_cycles_adaptive_whole_run is not None:
            log.info("bits=%d adaptive whole-run average %.6f (post-settle %s)", row.bits,
                     row.avg_cycles_adaptive_whole_run, _fmt(row.avg_cycles_adaptive))
    return report


def _check_modes_agree(codes_by_mode: dict[str, np.ndarray]) -> None:
    arrays = list(codes_by_mode.items())
    for name, codes in arrays[1:]:
        if not np.array_equal(codes, arrays[0][1]):
            raise RuntimeError(f"modes {arrays[0][0]} and {name} produced different codes")


def run_fig4_demo(out=None) -> str:
    """Print the 2-bit example: pmf, MER tree, per-code depths and averages."""
    pmf = Pmf(FIG4_PMF, 2)
    tree = build_mer_tree(pmf)
    depths = tree_depths(tree)
    lines = [
        "2-bit example, output pmf p = (" + ", ".join(f"{p:g}" for p in pmf.probs) + ")",
        f"entropy H(y) = {entropy(pmf):g} bits",
        "",
        format_tree(tree).rstrip(),
        "",
        "depths per code: (" + ", ".join(str(int(d)) for d in depths) + ")",
        "average cycles: " + " + ".join(
            f"{int(d)}*{p:g}" for d, p in zip(depths[::-1], pmf.probs[::-1])
        ) + f" = {expected_length(tree, pmf):g}",
        f"binary search: {expected_length(build_binary_tree(2), pmf):g} cycles for every sample",
        f"tree valid: {validate_tree(tree).ok}",
    ]
    text = "\n".join(lines) + "\n"
    (sys.stdout if out is None else out).write(text)
    return text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.demo_fig4:
        run_fig4_demo()
        return 0
    try:
        run_experiment(args)
    except (MerAdcError, ValueError, OSError) as exc:
        print(f"meradc: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
