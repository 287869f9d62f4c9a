"""Simulation designs and the Monte Carlo coverage engine.

Every replication draws from its own generator seeded by
``SeedSequence(seed, spawn_key=(run, rep))``, so results do not depend on
the order (or process) in which replications are executed.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence, Union

import numpy as np

from .depth import depth_weights, uniform_weights
from .errors import ConfigError, DepthJelError
from .estimating import gini_correlation_equation, gini_index_equation
from .inference import Method, invert_ci, vj_interval
from .ustat import PseudoValueFunction

log = logging.getLogger(__name__)


# -- designs ------------------------------------------------------------------


def _scatter(rho: float) -> np.ndarray:
    return np.array([[1.0, rho], [rho, 1.0]])


@dataclass(frozen=True)
class ContaminatedNormal:
    """``(1 - eps) N(0, S) + eps N(0, 4 S)`` with unit-diagonal scatter ``S``."""

    rho: float
    contamination: float = 0.0

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise ConfigError("rho must lie in (-1, 1)")
        if not 0.0 <= self.contamination < 1.0:
            raise ConfigError("contamination must lie in [0, 1)")

    @property
    def label(self) -> str:
        return f"normal(rho={self.rho:g};cont={self.contamination:g})"

    targets = ("gamma1", "gamma2")

    def true_value(self, target: str) -> float:
        return self.rho


@dataclass(frozen=True)
class Kotz:
    """Bivariate Laplace-type Kotz law, density proportional to
    ``exp(-||S^{-1/2} x||)``."""

    rho: float

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise ConfigError("rho must lie in (-1, 1)")

    @property
    def label(self) -> str:
        return f"kotz(rho={self.rho:g})"

    targets = ("gamma1", "gamma2")

    def true_value(self, target: str) -> float:
        return self.rho


@dataclass(frozen=True)
class Pareto:
    scale: float
    shape: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ConfigError("Pareto scale must be positive")
        if not self.shape > 1:
            raise ConfigError("Pareto shape must exceed 1")

    @property
    def label(self) -> str:
        return f"pareto({self.scale:g};{self.shape:g})"

    targets = ("gini-index",)

    def true_value(self, target: str = "gini-index") -> float:
        return 1.0 / (2.0 * self.shape - 1.0)


Family = Union[ContaminatedNormal, Kotz, Pareto]


@dataclass(frozen=True)
class SimDesign:
    family: Family
    n: int
    reps: int = 1000
    runs: int = 10
    level: float = 0.95
    seed: int = 0
    methods: tuple = ("JEL", "WJEL")
    targets: Optional[tuple] = None

    def __post_init__(self):
        if self.n < 4:
            raise ConfigError("n must be at least 4")
        if self.reps < 1 or self.runs < 1:
            raise ConfigError("reps and runs must be >= 1")
        if not 0.0 < self.level < 1.0:
            raise ConfigError("level must lie in (0, 1)")
        try:
            methods = tuple(Method.parse(m).value for m in self.methods)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        object.__setattr__(self, "methods", methods)
        targets = self.family.targets if self.targets is None else tuple(self.targets)
        bad = set(targets) - set(self.family.targets)
        if bad:
            raise ConfigError(f"targets {sorted(bad)} not available for {self.family.label}")
        object.__setattr__(self, "targets", targets)


# -- samplers -----------------------------------------------------------------


def sample_contaminated_normal(family: ContaminatedNormal, n: int, rng: np.random.Generator) -> np.ndarray:
    chol = np.linalg.cholesky(_scatter(family.rho))
    z = rng.standard_normal((n, 2))
    # N(0, 4S) is N(0, S) scaled by 2
    scale = np.where(rng.random(n) < family.contamination, 2.0, 1.0)
    return (z @ chol.T) * scale[:, None]


def sample_kotz(family: Kotz, n: int, rng: np.random.Generator) -> np.ndarray:
    chol = np.linalg.cholesky(_scatter(family.rho))
    radius = rng.gamma(2.0, 1.0, n)
    angle = rng.uniform(0.0, 2.0 * math.pi, n)
    u = np.column_stack([np.cos(angle), np.sin(angle)])
    return (radius[:, None] * u) @ chol.T


def sample_pareto(family: Pareto, n: int, rng: np.random.Generator) -> np.ndarray:
    # 1 - U lies in (0, 1], so the power is finite
    u = 1.0 - rng.random(n)
    return family.scale * u ** (-1.0 / family.shape)


def sample(family: Family, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(family, ContaminatedNormal):
        return sample_contaminated_normal(family, n, rng)
    if isinstance(family, Kotz):
        return sample_kotz(family, n, rng)
    if isinstance(family, Pareto):
        return sample_pareto(family, n, rng)
    raise TypeError(f"unknown family {family!r}")


def replication_rng(seed: int, run: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(run, rep))))


# -- experiment engine --------------------------------------------------------

_EQUATIONS = {
    "gamma1": lambda: gini_correlation_equation(1),
    "gamma2": lambda: gini_correlation_equation(2),
    "gini-index": gini_index_equation,
}


@dataclass
class _Accumulator:
    hits: int = 0
    ok: int = 0
    length_sum: float = 0.0
    failures: int = 0

    def add(self, hit: Optional[bool], length: float = 0.0):
        if hit is None:
            self.failures += 1
            return
        self.ok += 1
        self.hits += int(hit)
        self.length_sum += length


@dataclass(frozen=True)
class MethodSummary:
    target: str
    method: str
    true_value: float
    coverage: float
    coverage_sd: float
    mean_length: float
    length_sd: float
    failures: int
    run_coverages: tuple = field(default=(), repr=False)
    run_lengths: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class ExperimentReport:
    design: SimDesign
    summaries: tuple

    def get(self, target: str, method: str) -> MethodSummary:
        method = Method.parse(method).value
        for s in self.summaries:
            if s.target == target and s.method == method:
                return s
        raise KeyError((target, method))


def replicate(design: SimDesign, run: int, rep: int, validate: bool = True) -> list:
    """One dataset: ``[(target, method, hit_or_None, length), ...]``."""
    rng = replication_rng(design.seed, run, rep)
    data = sample(design.family, design.n, rng)
    out = []
    weights = {}
    for method in design.methods:
        if method == "WJEL":
            try:
                weights[method] = depth_weights(data)
            except DepthJelError:
                weights[method] = None
        elif method == "JEL":
            weights[method] = uniform_weights(design.n)
    for target in design.targets:
        eq = _EQUATIONS[target]()
        truth = design.family.true_value(target)
        try:
            pvf = PseudoValueFunction(eq, data)
        except DepthJelError:
            out.extend((target, m, None, math.nan) for m in design.methods)
            continue
        for method in design.methods:
            try:
                if method == "VJ":
                    ci = vj_interval(eq, data, design.level, pvf=pvf)
                else:
                    if weights[method] is None:
                        raise DepthJelError("depth weights unavailable")
                    ci = invert_ci(eq, data, weights[method], design.level, method=method,
                                   pvf=pvf, validate=validate)
            except DepthJelError as exc:
                log.debug("run %d rep %d %s/%s failed: %s", run, rep, target, method, exc)
                out.append((target, method, None, math.nan))
                continue
            out.append((target, method, ci.lower <= truth <= ci.upper, ci.length))
    return out


def _run_block(args) -> list:
    design, run, validate = args
    accs = {(t, m): _Accumulator() for t in design.targets for m in design.methods}
    for rep in range(design.reps):
        for target, method, hit, length in replicate(design, run, rep, validate):
            accs[(target, method)].add(hit, length)
    return [(key, acc) for key, acc in accs.items()]


def _sd(values: Sequence[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def run_coverage_experiment(design: SimDesign, methods: Optional[Sequence[str]] = None,
                            workers: int = 1, validate: bool = True) -> ExperimentReport:
    """Coverage and mean length per (target, method), averaged over runs.

    Each outer run draws ``design.reps`` datasets; the reported standard
    deviations are across runs.  Failed replications are excluded from the
    run averages and counted in ``failures``.
    """
    if methods is not None:
        design = SimDesign(**{**design.__dict__, "methods": tuple(methods)})
    jobs = [(design, run, validate) for run in range(design.runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_run_block, jobs))
    else:
        blocks = [_run_block(job) for job in jobs]

    summaries = []
    for target in design.targets:
        for method in design.methods:
            covs, lens, failures = [], [], 0
            for block in blocks:
                acc = dict(block)[(target, method)]
                failures += acc.failures
                if acc.ok:
                    covs.append(acc.hits / acc.ok)
                    lens.append(acc.length_sum / acc.ok)
            summaries.append(MethodSummary(
                target=target,
                method=method,
                true_value=design.family.true_value(target),
                coverage=float(np.mean(covs)) if covs else math.nan,
                coverage_sd=_sd(covs),
                mean_length=float(np.mean(lens)) if lens else math.nan,
                length_sd=_sd(lens),
                failures=failures,
                run_coverages=tuple(covs),
                run_lengths=tuple(lens),
            ))
    return ExperimentReport(design, tuple(summaries))


# -- config files -------------------------------------------------------------

_CONFIG_KEYS = {"family", "rho", "contamination", "theta_scale", "beta_shape", "n", "reps",
                "runs", "level", "seed", "methods", "targets"}


def _fraction(value: str) -> float:
    value = value.strip()
    if value.endswith("%"):
        return float(value[:-1]) / 100.0
    return float(value)


def parse_design_config(text: str) -> SimDesign:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[key] = value
    try:
        family_name = raw["family"].lower().replace("_", "-")
        if family_name in ("contaminated-normal", "normal"):
            family = ContaminatedNormal(float(raw["rho"]), _fraction(raw.get("contamination", "0")))
        elif family_name == "kotz":
            family = Kotz(float(raw["rho"]))
        elif family_name == "pareto":
            family = Pareto(float(raw["theta_scale"]), float(raw["beta_shape"]))
        else:
            raise ConfigError(f"unknown family {raw['family']!r}")
        kwargs = dict(family=family, n=int(raw["n"]))
        for key, conv in (("reps", int), ("runs", int), ("level", float), ("seed", int)):
            if key in raw:
                kwargs[key] = conv(raw[key])
        for key in ("methods", "targets"):
            if key in raw:
                kwargs[key] = tuple(s.strip() for s in raw[key].split(",") if s.strip())
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    return SimDesign(**kwargs)


def read_design_config(path) -> SimDesign:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_design_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def design_config_text(design: SimDesign) -> str:
    """Inverse of ``parse_design_config``."""
    fam = design.family
    lines = []
    if isinstance(fam, ContaminatedNormal):
        lines += ["family = contaminated-normal", f"rho = {fam.rho!r}",
                  f"contamination = {fam.contamination!r}"]
    elif isinstance(fam, Kotz):
        lines += ["family = kotz", f"rho = {fam.rho!r}"]
    else:
        lines += ["family = pareto", f"theta_scale = {fam.scale!r}", f"beta_shape = {fam.shape!r}"]
    lines += [f"n = {design.n}", f"reps = {design.reps}", f"runs = {design.runs}",
              f"level = {design.level!r}", f"seed = {design.seed}",
              f"methods = {','.join(m.lower() for m in design.methods)}",
              f"targets = {','.join(design.targets)}"]
    return "\n".join(lines) + "\n"


# -- reported values ----------------------------------------------------------


def reference_values() -> dict:
    """Published coverage/length keyed by ``(design_label, n, target, method)``."""
    text = resources.files("depthjel").joinpath("data/reference_coverage.csv").read_text(encoding="utf-8")
    rows = csv.DictReader(line for line in text.splitlines() if not line.startswith("#"))
    out = {}
    for row in rows:
        key = (row["design"], int(row["n"]), row["target"], row["method"])
        out[key] = {k: float(row[k]) for k in ("coverage", "coverage_sd", "length", "length_sd")}
    return out
