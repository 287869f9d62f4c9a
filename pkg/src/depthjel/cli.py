"""Command line front end.

    depthjel estimate      --input data.csv --columns e00,c00 --equation gini-corr-1
    depthjel ci            --input data.csv --columns e00,c00 --methods jel,wjel,vj
    depthjel experiment    --config design.cfg --out report.csv
    depthjel depth-weights --input data.csv --columns e00,c00

Exit status: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .depth import depth_weights, uniform_weights
from .errors import (ConfigError, DataError, DataFileNotFound, DepthJelError, MissingColumn,
                     NumericalError, ParseError)
from .estimating import get_equation
from .inference import Method, confidence_interval, wjel_point_estimate
from .simlab import (SimDesign, design_config_text, reference_values, read_design_config,
                     run_coverage_experiment)
from .ustat import PseudoValueFunction

log = logging.getLogger("depthjel")

WEIGHT_SCHEMES = ("uniform", "spatial-depth", "spatial-depth-raw")


@dataclass
class RunConfig:
    command: str
    input_path: Optional[str] = None
    columns: tuple = ()
    equation: str = "gini-corr-1"
    methods: tuple = ("JEL", "WJEL", "VJ")
    level: float = 0.95
    weights: str = "spatial-depth"
    output_path: Optional[str] = None
    seed: int = 0
    config_path: Optional[str] = None
    workers: int = 1
    extra: dict = field(default_factory=dict)

    def validate(self):
        if not 0.0 < self.level < 1.0:
            raise ConfigError("--level must lie in (0, 1)")
        if self.weights not in WEIGHT_SCHEMES:
            raise ConfigError(f"--weights must be one of {', '.join(WEIGHT_SCHEMES)}")
        if self.command in ("estimate", "ci", "depth-weights"):
            if not self.input_path:
                raise ConfigError("--input is required")
            if not self.columns:
                raise ConfigError("--columns is required")
        if self.command in ("estimate", "ci"):
            try:
                eq = get_equation(self.equation)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            if len(self.columns) != eq.data_dim:
                raise ConfigError(f"{self.equation} needs {eq.data_dim} column(s), got {len(self.columns)}")
        if self.command == "experiment" and not self.config_path:
            raise ConfigError("--config is required for experiment")

    def echo(self) -> list:
        items = [("command", self.command), ("input", self.input_path),
                 ("columns", ",".join(self.columns))]
        if self.command != "depth-weights":
            items.append(("equation", self.equation))
        if self.command == "ci":
            items += [("methods", ",".join(m.lower() for m in self.methods)),
                      ("level", repr(self.level))]
        items += [("weights", self.weights), ("seed", self.seed)]
        return [f"# {k} = {v}" for k, v in items if v not in (None, "")]


def _g17(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


# -- ingestion ----------------------------------------------------------------


def ingest_csv(path, columns: Sequence[str]) -> np.ndarray:
    """Selected columns of a headed CSV as an ``(n, len(columns))`` array.

    Rows with a missing or non-numeric cell in a selected column raise
    ``ParseError`` naming the file line.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise DataFileNotFound(f"no such file: {path}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise MissingColumn(f"{path}: missing column(s) {', '.join(missing)}; have {', '.join(header)}")
        idx = [header.index(c) for c in columns]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            values = []
            for col, i in zip(columns, idx):
                cell = row[i].strip() if i < len(row) else ""
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(lineno, f"column {col!r} has non-numeric value {cell!r}") from None
                if not math.isfinite(v):
                    raise ParseError(lineno, f"column {col!r} is not finite ({cell!r})")
                values.append(v)
            rows.append(values)
    if not rows:
        raise DataError(f"{path} has no data rows")
    return np.array(rows, dtype=float)


def _weights(cfg: RunConfig, data):
    if cfg.weights == "uniform":
        return uniform_weights(data.shape[0])
    return depth_weights(data, affine_invariant=cfg.weights == "spatial-depth")


# -- commands -----------------------------------------------------------------


def _write(text: str, path: Optional[str], stdout):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def cmd_estimate(cfg: RunConfig, stdout=sys.stdout) -> int:
    data = ingest_csv(cfg.input_path, cfg.columns)
    eq = get_equation(cfg.equation)
    pvf = PseudoValueFunction(eq, data)
    plug_in = pvf.root()
    w = _weights(cfg, data)
    wjel = wjel_point_estimate(eq, data, w, pvf=pvf)
    buf = io.StringIO()
    buf.write("\n".join(cfg.echo()) + "\n")
    buf.write("equation,parameter,plug_in,wjel_estimate,c_hat\n")
    for j in range(eq.param_dim):
        buf.write(f"{eq.name},{j + 1},{_g17(plug_in[j])},{_g17(wjel[j])},{_g17(w.c_hat)}\n")
    _write(buf.getvalue(), cfg.output_path, stdout)
    return 0


CI_COLUMNS = ("equation", "method", "level", "point_estimate", "lower", "upper", "length",
              "center", "lower_truncated", "upper_truncated")


def ci_records(cfg: RunConfig, data) -> list:
    eq = get_equation(cfg.equation)
    pvf = PseudoValueFunction(eq, data)
    records = []
    for method in cfg.methods:
        method = Method.parse(method)
        weights = _weights(cfg, data) if method is Method.WJEL else None
        ci = confidence_interval(eq, data, method, cfg.level, weights=weights, pvf=pvf)
        records.append(dict(equation=eq.name, method=method.value, level=cfg.level,
                            point_estimate=ci.point_estimate, lower=ci.lower, upper=ci.upper,
                            length=ci.length, center=ci.center,
                            lower_truncated=ci.lower_truncated, upper_truncated=ci.upper_truncated))
    return records


def format_ci_table(records: list) -> str:
    lines = [f"{'equation':<12} {'method':<6} {'point estimate':>15} {'confidence interval':>24} "
             f"{'length':>8} flags"]
    for r in records:
        flags = ",".join(n for n, f in (("lower-truncated", r["lower_truncated"]),
                                         ("upper-truncated", r["upper_truncated"])) if f)
        interval = f"({r['lower']:.4f}, {r['upper']:.4f})"
        lines.append(f"{r['equation']:<12} {r['method']:<6} {r['point_estimate']:>15.7g} "
                     f"{interval:>24} {r['length']:>8.4f} {flags}")
    return "\n".join(lines) + "\n"


def cmd_ci(cfg: RunConfig, stdout=sys.stdout) -> int:
    data = ingest_csv(cfg.input_path, cfg.columns)
    records = ci_records(cfg, data)
    buf = io.StringIO()
    buf.write("\n".join(cfg.echo()) + "\n")
    buf.write(",".join(CI_COLUMNS) + "\n")
    for r in records:
        buf.write(",".join(r[c] if isinstance(r[c], str) else _g17(r[c]) for c in CI_COLUMNS) + "\n")
    if cfg.output_path:
        _write(buf.getvalue(), cfg.output_path, stdout)
        stdout.write(format_ci_table(records))
    else:
        stdout.write(buf.getvalue())
    return 0


EXPERIMENT_COLUMNS = ("design", "method", "target", "n", "coverage", "coverage_sd", "mean_length",
                      "length_sd", "failures", "ref_coverage", "ref_coverage_sd",
                      "ref_length", "ref_length_sd")


def experiment_rows(design: SimDesign, workers: int = 1) -> list:
    report = run_coverage_experiment(design, workers=workers)
    published = reference_values()
    rows = []
    for s in report.summaries:
        ref = published.get((design.family.label, design.n, s.target, s.method), {})
        rows.append(dict(design=design.family.label, method=s.method, target=s.target, n=design.n,
                         coverage=s.coverage, coverage_sd=s.coverage_sd, mean_length=s.mean_length,
                         length_sd=s.length_sd, failures=s.failures,
                         ref_coverage=ref.get("coverage", math.nan),
                         ref_coverage_sd=ref.get("coverage_sd", math.nan),
                         ref_length=ref.get("length", math.nan),
                         ref_length_sd=ref.get("length_sd", math.nan)))
    return rows


def format_experiment_table(rows: list) -> str:
    lines = [f"{'design':<28} {'target':<10} {'method':<6} {'n':>4} {'coverage':>14} "
             f"{'length':>14} {'reference':>22} fail"]
    for r in rows:
        ref = ("" if math.isnan(r["ref_coverage"])
                 else f"{r['ref_coverage']:.3f} {r['ref_length']:.3f}")
        lines.append(f"{r['design']:<28} {r['target']:<10} {r['method']:<6} {r['n']:>4} "
                     f"{r['coverage']:.3f}({r['coverage_sd']:.3f}) "
                     f"{r['mean_length']:.3f}({r['length_sd']:.3f}) {ref:>22} {r['failures']}")
    return "\n".join(lines) + "\n"


def cmd_experiment(cfg: RunConfig, stdout=sys.stdout) -> int:
    design = read_design_config(cfg.config_path)
    if "seed" in cfg.extra:
        design = SimDesign(**{**design.__dict__, "seed": cfg.extra["seed"]})
    rows = experiment_rows(design, cfg.workers)
    buf = io.StringIO()
    for line in design_config_text(design).splitlines():
        buf.write(f"# {line}\n")
    buf.write(",".join(EXPERIMENT_COLUMNS) + "\n")
    for r in rows:
        buf.write(",".join(r[c] if isinstance(r[c], str) else _g17(r[c])
                           for c in EXPERIMENT_COLUMNS) + "\n")
    if cfg.output_path:
        _write(buf.getvalue(), cfg.output_path, stdout)
        stdout.write(format_experiment_table(rows))
    else:
        stdout.write(buf.getvalue())
    failed = sum(r["failures"] for r in rows)
    if failed:
        # the report is complete, but a nonzero status flags that some
        # replications were dropped from the averages
        log.warning("%d replication(s) failed and were excluded", failed)
        return NumericalError.exit_code
    return 0


def cmd_depth_weights(cfg: RunConfig, stdout=sys.stdout) -> int:
    data = ingest_csv(cfg.input_path, cfg.columns)
    w = _weights(cfg, data)
    buf = io.StringIO()
    buf.write("\n".join(cfg.echo()) + "\n")
    buf.write(f"# c_hat = {_g17(w.c_hat)}\n")
    buf.write("row,weight\n")
    for i, wi in enumerate(w.weights, start=1):
        buf.write(f"{i},{_g17(wi)}\n")
    _write(buf.getvalue(), cfg.output_path, stdout)
    return 0


COMMANDS = {"estimate": cmd_estimate, "ci": cmd_ci, "experiment": cmd_experiment,
            "depth-weights": cmd_depth_weights}


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="depthjel",
                                     description="Depth-weighted jackknife empirical likelihood")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p, equation=True):
        p.add_argument("--input", required=True, help="CSV file with a header row")
        p.add_argument("--columns", required=True, help="comma separated column names, e.g. x,y")
        if equation:
            p.add_argument("--equation", default="gini-corr-1",
                           choices=["gini-corr", "gini-corr-1", "gini-corr-2", "gini-index"])
        p.add_argument("--weights", default="spatial-depth", choices=WEIGHT_SCHEMES)
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=0)

    data_args(sub.add_parser("estimate", help="plug-in and WJEL point estimates"))
    p_ci = sub.add_parser("ci", help="confidence intervals for one dataset")
    data_args(p_ci)
    p_ci.add_argument("--methods", default="jel,wjel,vj")
    p_ci.add_argument("--level", type=float, default=0.95)
    p_exp = sub.add_parser("experiment", help="Monte Carlo coverage experiment")
    p_exp.add_argument("--config", required=True, help="key = value design file")
    p_exp.add_argument("--out", help="CSV report (default: stdout)")
    p_exp.add_argument("--seed", type=int, help="override the config seed")
    p_exp.add_argument("--workers", type=int, default=1)
    data_args(sub.add_parser("depth-weights", help="spatial-depth weights and c_hat"), equation=False)
    return parser


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command, output_path=getattr(args, "out", None))
    if args.command == "experiment":
        cfg.config_path = args.config
        cfg.workers = args.workers
        if args.seed is not None:
            cfg.extra["seed"] = args.seed
        return cfg
    cfg.input_path = args.input
    cfg.columns = tuple(c.strip() for c in args.columns.split(",") if c.strip())
    cfg.weights = args.weights
    cfg.seed = args.seed
    if hasattr(args, "equation"):
        cfg.equation = args.equation
    if hasattr(args, "methods"):
        try:
            cfg.methods = tuple(Method.parse(m).value for m in args.methods.split(",") if m.strip())
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        cfg.level = args.level
    return cfg


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=stderr)
    try:
        cfg = config_from_args(args)
        cfg.validate()
        return COMMANDS[cfg.command](cfg, stdout)
    except DepthJelError as exc:
        stderr.write(f"depthjel: error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
