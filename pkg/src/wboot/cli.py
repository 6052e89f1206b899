"""Command-line entry point: ``wboot run`` and ``wboot bench``.

Exit codes: 0 success, 2 malformed flags, 3 unreadable or invalid data,
4 no finite replicate to summarise.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence, Union

from .baseline import bootstrap_resample_loop
from .bench import (
    BASELINE,
    DEFAULT_BS,
    DEFAULT_NS,
    SIMULATION_STREAM,
    VECTORIZED,
    SweepSpec,
    ratio_table,
    run_sweep,
    simulate_pairs,
)
from .core import PairedSample, Sample, UndefinedStatisticError, get_statistic
from .engine import (
    DEFAULT_CHUNK,
    BootstrapConfig,
    EmptyDistributionError,
    bootstrap_correlation_vectorized,
    bootstrap_summary,
    bootstrap_vectorized,
)
from .sampling import RngSpec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_EMPTY = 4

log = logging.getLogger("wboot")


class DatasetError(ValueError):
    pass


def _parse_row(cells: list[str]) -> Optional[list[float]]:
    try:
        return [float(c) for c in cells]
    except ValueError:
        return None


def parse_dataset(path: Union[str, Path]) -> Union[Sample, PairedSample]:
    """Read a one- or two-column comma separated file.

    The first line is treated as a header iff one of its cells is not a
    number. Blank lines are ignored.
    """
    try:
        with open(path, newline="") as fh:
            lines = [
                (i, [c.strip() for c in row])
                for i, row in enumerate(csv.reader(fh), start=1)
                if row and any(c.strip() for c in row)
            ]
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetError(f"{path}: cannot read ({exc})") from exc
    except csv.Error as exc:
        raise DatasetError(f"{path}: malformed CSV ({exc})") from exc
    if not lines:
        raise DatasetError(f"{path}: file is empty")

    ncols = len(lines[0][1])
    if ncols not in (1, 2):
        raise DatasetError(f"{path}, line {lines[0][0]}: expected 1 or 2 columns, found {ncols}")
    if _parse_row(lines[0][1]) is None:
        lines = lines[1:]

    rows = []
    for lineno, cells in lines:
        if len(cells) != ncols:
            raise DatasetError(
                f"{path}, line {lineno}: expected {ncols} columns, found {len(cells)}"
            )
        vals = _parse_row(cells)
        if vals is None:
            raise DatasetError(f"{path}, line {lineno}: non-numeric cell in {cells}")
        if not all(math.isfinite(v) for v in vals):
            raise DatasetError(f"{path}, line {lineno}: non-finite value")
        rows.append(vals)

    if ncols == 1:
        if not rows:
            raise DatasetError(f"{path}: no data rows")
        return Sample([r[0] for r in rows])
    if len(rows) < 2:
        raise DatasetError(f"{path}: a paired dataset needs at least 2 rows")
    return PairedSample([r[0] for r in rows], [r[1] for r in rows])


def format_real(x: float) -> str:
    """Shortest repr that round-trips; ``NA`` for missing values."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "NA"
    return repr(float(x))


def write_replicates(path: Union[str, Path], values) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("replicate_index,value\n")
        for i, v in enumerate(values):
            fh.write(f"{i},{format_real(v)}\n")


def read_replicates(path: Union[str, Path]) -> list[float]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [float("nan") if v == "NA" else float(v) for _, v in reader]


def _default_chunk() -> int:
    raw = os.environ.get("WBOOT_CHUNK")
    if raw is None:
        return DEFAULT_CHUNK
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        raise SystemExit(f"WBOOT_CHUNK must be a positive integer, got {raw!r}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _int_list(text: str) -> list[int]:
    try:
        values = [_positive_int(t.strip()) for t in text.split(",") if t.strip()]
    except argparse.ArgumentTypeError as exc:
        raise argparse.ArgumentTypeError(f"bad list {text!r}: {exc}") from None
    if not values:
        raise argparse.ArgumentTypeError(f"empty list: {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wboot", description="Vectorised moment bootstrap.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="generate bootstrap replicates")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", type=Path, help="1- or 2-column CSV file")
    src.add_argument("--simulate", type=_positive_int, metavar="N",
                     help="simulate N correlated normal pairs")
    run.add_argument("--stat", choices=("mean", "correlation"), default="mean")
    run.add_argument("--method", choices=("multinomial", "dirichlet", "baseline"),
                     default="multinomial")
    run.add_argument("--B", type=_positive_int, default=1000)
    run.add_argument("--seed", type=_seed, default=0)
    run.add_argument("--chunk", type=_positive_int, default=None)
    run.add_argument("--nan-policy", choices=("record", "fail"), default="record")
    run.add_argument("--out", type=Path, help="replicates CSV to write")

    bench = sub.add_parser("bench", help="time vectorised vs resampling bootstrap")
    bench.add_argument("--Ns", type=_int_list, default=list(DEFAULT_NS))
    bench.add_argument("--Bs", type=_int_list, default=list(DEFAULT_BS))
    bench.add_argument("--stat", choices=("mean", "correlation"), default="correlation")
    bench.add_argument("--repeats", type=_positive_int, default=5)
    bench.add_argument("--warmups", type=int, default=1)
    bench.add_argument("--seed", type=_seed, default=0)
    bench.add_argument("--out", type=Path, default=Path("timings.csv"))
    bench.add_argument("--ratio-out", type=Path, default=None,
                       help="ratio CSV (default: <out stem>_ratios.csv)")
    return parser


def _load(args) -> Union[Sample, PairedSample]:
    if args.data is not None:
        data = parse_dataset(args.data)
    else:
        if args.simulate < 2:
            raise DatasetError("--simulate needs N >= 2")
        pair = simulate_pairs(args.simulate, RngSpec(args.seed, SIMULATION_STREAM))
        data = pair if args.stat == "correlation" else Sample(pair.z)
    if args.stat == "correlation" and not isinstance(data, PairedSample):
        raise DatasetError("correlation needs a two-column dataset")
    if args.stat == "mean" and not isinstance(data, Sample):
        raise DatasetError("mean needs a one-column dataset")
    return data


def cmd_run(args) -> int:
    try:
        data = _load(args)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA

    method = "multinomial" if args.method == "baseline" else args.method
    chunk = args.chunk if args.chunk is not None else _default_chunk()
    cfg = BootstrapConfig(args.B, method, args.seed, chunk, args.nan_policy)
    stat = get_statistic(args.stat)
    try:
        if args.method == "baseline":
            reps = bootstrap_resample_loop(stat, data, cfg)
        elif args.stat == "correlation":
            reps = bootstrap_correlation_vectorized(data, cfg)
        else:
            reps = bootstrap_vectorized(stat, data, cfg)
    except UndefinedStatisticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except MemoryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.out is not None:
        write_replicates(args.out, reps.values)
    try:
        summary = bootstrap_summary(reps)
    except EmptyDistributionError as exc:
        print(f"error: {exc} (nan_count={reps.nan_count})", file=sys.stderr)
        return EXIT_EMPTY
    print(summary.line())
    return EXIT_OK


def write_timings(path: Union[str, Path], records) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("method,N,B,repeats,seconds_median,seconds_all\n")
        for r in records:
            all_s = "NA" if r.failed else ";".join(format_real(s) for s in r.seconds_all)
            secs = "NA" if r.failed else format_real(r.seconds)
            fh.write(f"{r.method},{r.N},{r.B},{r.repeats},{secs},{all_s}\n")


def write_ratios(path: Union[str, Path], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("N,B,ratio,log_ratio\n")
        for r in rows:
            fh.write(f"{r.N},{r.B},{format_real(r.ratio)},{format_real(r.log_ratio)}\n")


def cmd_bench(args) -> int:
    spec = SweepSpec(
        Ns=args.Ns,
        Bs=args.Bs,
        statistic=args.stat,
        repeats=args.repeats,
        warmups=max(args.warmups, 0),
        master_seed=args.seed,
        methods=(VECTORIZED, BASELINE),
        chunk_columns=_default_chunk(),
    )
    records = run_sweep(spec)
    rows = ratio_table(records)
    ratio_out = args.ratio_out or args.out.with_name(args.out.stem + "_ratios.csv")
    write_timings(args.out, records)
    write_ratios(ratio_out, rows)

    for r in rows:
        ref = f"  (reference R speedup ~{r.reference:g}x)" if r.reference else ""
        if r.flagged:
            print(f"N={r.N} B={r.B} ratio=NA{ref}")
        else:
            print(f"N={r.N} B={r.B} ratio={r.ratio:.2f} log_ratio={r.log_ratio:.3f}{ref}")
    ok = any(not r.failed for r in records)
    return EXIT_OK if ok else EXIT_EMPTY


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        return cmd_run(args)
    return cmd_bench(args)


if __name__ == "__main__":
    sys.exit(main())
