"""Rerun the simulation designs behind the reference coverage tables.

Every (design, n) pair in the bundled reference table is simulated with
JEL and WJEL and written next to the reference values:

    python3 scripts/reproduce_tables.py --reps 200 --runs 5 --out tables.csv

Full-size runs (1000 x 10) take hours on one core; use --only to pick
designs, e.g. --only "kotz(rho=0.1)".
"""

import argparse
import csv
import sys
import time

from depthjel.simlab import ContaminatedNormal, Kotz, Pareto, SimDesign, reference_values, run_coverage_experiment

COLUMNS = ["design", "n", "target", "method", "coverage", "coverage_sd", "mean_length", "length_sd",
           "failures", "ref_coverage", "ref_length", "coverage_diff", "length_diff"]


def family_from_label(label):
    name, args = label.split("(", 1)
    args = args.rstrip(")")
    if name == "pareto":
        scale, shape = (float(a) for a in args.split(";"))
        return Pareto(scale, shape)
    fields = dict(part.split("=") for part in args.split(";"))
    if name == "kotz":
        return Kotz(float(fields["rho"]))
    return ContaminatedNormal(float(fields["rho"]), float(fields["cont"]))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", action="append", default=[], help="design label to include (repeatable)")
    ap.add_argument("--out", default="reproduced_tables.csv")
    args = ap.parse_args(argv)

    published = reference_values()
    designs = sorted({(label, n) for label, n, _, _ in published})
    if args.only:
        designs = [d for d in designs if d[0] in args.only]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# reps = {args.reps}, runs = {args.runs}, seed = {args.seed}\n")
        writer = csv.DictWriter(fh, fieldnames=COLUMNS)
        writer.writeheader()
        for k, (label, n) in enumerate(designs):
            t0 = time.perf_counter()
            design = SimDesign(family_from_label(label), n, reps=args.reps, runs=args.runs,
                               seed=args.seed + k, methods=("JEL", "WJEL"))
            report = run_coverage_experiment(design, workers=args.workers)
            for s in report.summaries:
                ref = published.get((label, n, s.target, s.method))
                if ref is None:
                    continue
                writer.writerow(dict(
                    design=label, n=n, target=s.target, method=s.method,
                    coverage="%.4f" % s.coverage, coverage_sd="%.4f" % s.coverage_sd,
                    mean_length="%.4f" % s.mean_length, length_sd="%.4f" % s.length_sd,
                    failures=s.failures, ref_coverage=ref["coverage"], ref_length=ref["length"],
                    coverage_diff="%+.4f" % (s.coverage - ref["coverage"]),
                    length_diff="%+.4f" % (s.mean_length - ref["length"])))
            fh.flush()
            print(f"{label:<28} n={n:<4} {time.perf_counter() - t0:7.1f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
