"""Write data/synthetic_indices.csv: three price series shaped like daily index data.

Returns follow the P4 design (GARCH(1,1) with skewed-t innovations and a
lagged interaction), scaled to percent units and compounded into prices.
"""
import argparse
import datetime as dt
from pathlib import Path

import numpy as np

from expectile_gc import DgpSpec, RandomStream, simulate_dgp


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T", type=int, default=500, help="number of returns")
    ap.add_argument("--seed", type=int, default=20)
    ap.add_argument("--output", default=str(Path(__file__).resolve().parents[1] / "data" / "synthetic_indices.csv"))
    args = ap.parse_args()
    panel = simulate_dgp(DgpSpec.named("P4"), args.T, RandomStream(args.seed).child("indices"))
    returns = 2.0 * panel.values                  # percent log-returns
    start = np.array([18000.0, 25000.0, 3200.0])
    prices = start * np.exp(np.vstack([np.zeros(3), np.cumsum(returns / 100.0, axis=0)]))
    day = dt.date(2020, 1, 1)
    lines = ["date,HSI,NK,SSE"]
    for row in prices:
        while day.weekday() >= 5:
            day += dt.timedelta(days=1)
        lines.append(f"{day.isoformat()}," + ",".join(f"{p:.2f}" for p in row))
        day += dt.timedelta(days=1)
    Path(args.output).write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
