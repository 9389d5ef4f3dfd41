"""Regenerate src/mstprune/data/synthetic_prices.csv.

Twelve indices in three blocs driven by a world factor and a bloc factor,
plus two idiosyncratic series; 250 trading rows.
"""
import datetime as dt
import sys
from pathlib import Path

import numpy as np

from mstprune.panel import PricePanel, write_prices

BLOCS = {
    "america": ["SPX", "NDX", "TSX", "MEX"],
    "europe": ["UKX", "DAX", "CAC", "IBEX"],
    "asia": ["NKY", "HSI", "KOSPI", "TWSE"],
}
LONERS = ["NAM", "PAN"]


def main(path):
    rng = np.random.Generator(np.random.PCG64(20080101))
    rows = 251
    world = rng.normal(0, 0.008, rows)
    tickers, regions, cols = [], [], []
    for bloc, names in BLOCS.items():
        factor = rng.normal(0, 0.010, rows)
        for k, name in enumerate(names):
            load = 1.0 - 0.15 * k
            cols.append(0.6 * world + load * factor + rng.normal(0, 0.006, rows))
            tickers.append(name)
            regions.append(bloc)
    for name in LONERS:
        cols.append(rng.normal(0, 0.012, rows))
        tickers.append(name)
        regions.append("other")
    returns = np.column_stack(cols)[1:]
    prices = 1000.0 * np.exp(np.vstack([np.zeros(len(tickers)), np.cumsum(returns, axis=0)]))
    start = dt.date(2008, 1, 2)
    dates, d = [], start
    while len(dates) < prices.shape[0]:
        if d.weekday() < 5:
            dates.append(d)
        d += dt.timedelta(days=1)
    with open(path, "w", newline="") as fh:
        write_prices(PricePanel(tickers, dates, prices), fh)
    meta = Path(path).with_name("synthetic_regions.csv")
    with open(meta, "w", newline="") as fh:
        fh.write("ticker,region\n")
        for t, r in zip(tickers, regions):
            fh.write(f"{t},{r}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/mstprune/data/synthetic_prices.csv")
