"""Runtime of each method as a function of B at a fixed sample size.

Fits a straight line to median time against B and reports the slope
(seconds per replicate) and R^2 for every method.

    python3 scripts/b_sweep.py --N 82 --Bs 10000,30000,100000,300000
"""

import argparse

from wboot.bench import BASELINE, DIRICHLET, VECTORIZED, SweepSpec, linear_fit_r2, run_sweep


def ints(text):
    return [int(float(t)) for t in text.split(",") if t.strip()]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=15)
    ap.add_argument("--Bs", type=ints, default=[10_000, 30_000, 100_000, 300_000])
    ap.add_argument("--stat", choices=["mean", "correlation"], default="correlation")
    ap.add_argument("--methods", default=",".join([VECTORIZED, DIRICHLET, BASELINE]))
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    methods = tuple(m for m in args.methods.split(",") if m)
    spec = SweepSpec(Ns=[args.N], Bs=args.Bs, statistic=args.stat, repeats=args.repeats,
                     master_seed=args.seed, methods=methods)
    records = run_sweep(spec)

    for m in methods:
        recs = [r for r in records if r.method == m and not r.failed]
        for r in recs:
            print(f"{m:>14} N={r.N} B={r.B:>8} median={r.seconds:.4f}s")
        if len(recs) >= 2:
            slope, intercept, r2 = linear_fit_r2([r.B for r in recs], [r.seconds for r in recs])
            print(f"{m:>14} {slope * 1e6:.3f} us/replicate, intercept {intercept:.4f}s, R^2 {r2:.5f}")


if __name__ == "__main__":
    main()
