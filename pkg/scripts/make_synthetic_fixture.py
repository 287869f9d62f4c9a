"""Regenerate src/depthjel/data/synthetic_soil.csv.

A small gilgai-style table: electrical conductivity (mS/cm) and chloride
(ppm) at three depths, drawn from correlated log-normals so the columns are
positive, right skewed and strongly dependent.  The numbers are synthetic.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "depthjel" / "data" / "synthetic_soil.csv"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=48)
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    # latent salinity factor shared by all depths, deeper horizons saltier
    factor = rng.standard_normal(args.n)
    rows = []
    for i in range(args.n):
        row = {}
        for depth, (mu_e, mu_c) in zip(("00", "30", "80"), ((-1.2, 4.0), (-0.4, 5.2), (0.2, 6.0))):
            e = np.exp(mu_e + 0.8 * factor[i] + 0.35 * rng.standard_normal())
            c = np.exp(mu_c + 0.9 * factor[i] + 0.45 * rng.standard_normal())
            row[f"e{depth}"] = f"{e:.3f}"
            row[f"c{depth}"] = f"{c:.1f}"
        rows.append(row)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["e00", "c00", "e30", "c30", "e80", "c80"])
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
