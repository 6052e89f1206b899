"""Timing sweep over sample size: vectorised engine against the resampling loop.

Writes a timings CSV and a ratio CSV (same layout as ``wboot bench``) and prints
the speedup curve.  The full default grid (N = 15..915, B up to 1e6) takes a
long time because of the loop; use --Bs to trim it.

    python3 scripts/n_sweep.py --Bs 10000,100000 --out results/n_sweep.csv
"""

import argparse
import math
from pathlib import Path

from wboot.bench import DEFAULT_BS, DEFAULT_NS, SweepSpec, ratio_table, run_sweep
from wboot.cli import write_ratios, write_timings


def ints(text):
    return [int(float(t)) for t in text.split(",") if t.strip()]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--Ns", type=ints, default=list(DEFAULT_NS))
    ap.add_argument("--Bs", type=ints, default=list(DEFAULT_BS))
    ap.add_argument("--stat", choices=["mean", "correlation"], default="correlation")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/n_sweep.csv"))
    args = ap.parse_args()

    spec = SweepSpec(Ns=args.Ns, Bs=args.Bs, statistic=args.stat,
                     repeats=args.repeats, master_seed=args.seed)
    records = run_sweep(spec)
    rows = ratio_table(records)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_timings(args.out, records)
    write_ratios(args.out.with_name(args.out.stem + "_ratios.csv"), rows)

    print(f"{'N':>5} {'B':>9} {'ratio':>9} {'log':>7}")
    for r in rows:
        if r.flagged:
            print(f"{r.N:>5} {r.B:>9} {'NA':>9} {'NA':>7}")
        else:
            print(f"{r.N:>5} {r.B:>9} {r.ratio:>9.2f} {r.log_ratio:>7.3f}")
    ok = [r for r in rows if not r.flagged]
    if ok:
        gm = math.exp(sum(r.log_ratio for r in ok) / len(ok))
        print(f"geometric-mean speedup over {len(ok)} cells: {gm:.2f}x")


if __name__ == "__main__":
    main()
