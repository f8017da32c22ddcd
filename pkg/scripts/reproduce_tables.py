"""Size, power, joint-vs-pairwise and F-test tables at a chosen scale.

Desk scale (the default) is S=100, B=100, N=100; ``--full-scale`` switches
to S=500, B=200, N=200.  Results are cached per replication, so an
interrupted run resumes where it stopped.

    python scripts/reproduce_tables.py --tables size,power --out results/
"""
import argparse
from pathlib import Path

from expectile_gc import TestConfig, mc_study

TABLES = {
    # name: (dgps, taus, tests)
    "size": (["S1", "S2"], [0.1, 0.5, 0.9], ("joint",)),
    "power": (["P1", "P2", "P3", "P4"], [0.1, 0.5, 0.9], ("joint",)),
    "pairwise": (["P1"], [0.1, 0.5, 0.9], ("joint", "pairwise")),
    "ftest": (["S1", "S2", "P1", "P2", "P3", "P4"], [0.5], ("ftest",)),
    "p3-pairwise": (["P3"], [0.5], ("pairwise",)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--tables", default=",".join(TABLES), help=f"subset of {','.join(TABLES)}")
    ap.add_argument("--Ts", default="100,200,500")
    ap.add_argument("--S", type=int, default=None)
    ap.add_argument("--full-scale", action="store_true")
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--threads", type=int, default=0)
    ap.add_argument("--cache-dir", default=".mc_cache")
    ap.add_argument("--full-bootstrap", action="store_true",
                    help="evaluate all B replicates instead of stopping once the decision is fixed")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    S = args.S or (500 if args.full_scale else 100)
    n = 200 if args.full_scale else 100
    config = TestConfig(n_predictions=n, n_bootstrap=n)
    Ts = [int(t) for t in args.Ts.split(",")]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.tables.split(","):
        dgps, taus, tests = TABLES[name]
        rep = mc_study(dgps, taus, Ts, S, config, tests=tests, seed=args.seed, threads=args.threads,
                       cache_dir=args.cache_dir, decision_only=not args.full_bootstrap)
        (out / f"{name}.csv").write_text(rep.to_csv())
        (out / f"{name}.txt").write_text(rep.text_table())
        print(rep.text_table())


if __name__ == "__main__":
    main()
