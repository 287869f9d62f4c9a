"""Point estimates, chi-square calibrated intervals and the jackknife-normal
(VJ) comparator."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special
from scipy.optimize import minimize, minimize_scalar
from scipy.stats import rankdata

from .depth import WeightVector, depth_weights, uniform_weights
from .errors import (DomainError, HullViolation, InsufficientData, NumericalError,
                     ProfileFailure, UnboundedInterval, ZeroDenominator)
from .estimating import EstimatingEquation, as_data_matrix
from .ustat import PseudoValueFunction
from .wjel import (DEFAULT_SOLVER, ProfileConfig, SolverConfig, profile_ratio,
                   self_normalized_statistic, wjel_ratio)

log = logging.getLogger(__name__)


class Method(str, enum.Enum):
    JEL = "JEL"
    WJEL = "WJEL"
    VJ = "VJ"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"unknown method {value!r}; choose from jel, wjel, vj") from None


# -- reference distributions --------------------------------------------------


def chi2_cdf(x: float, df: int) -> float:
    if x <= 0:
        return 0.0
    return float(special.gammainc(df / 2.0, x / 2.0))


def _chi2_logpdf(x: float, df: int) -> float:
    k = df / 2.0
    return (k - 1.0) * math.log(x) - x / 2.0 - k * math.log(2.0) - special.gammaln(k)


def chi2_quantile(df: int, prob: float) -> float:
    """Inverse of the chi-square CDF.

    Newton iterations on the regularised incomplete gamma function,
    safeguarded by a bracket that falls back to bisection whenever a
    Newton step leaves it.
    """
    if df < 1 or int(df) != df:
        raise DomainError(f"df must be a positive integer, got {df}")
    if not 0.0 < prob < 1.0:
        raise DomainError(f"prob must lie in (0, 1), got {prob}")
    # Wilson-Hilferty start
    z = float(special.ndtri(prob))
    c = 2.0 / (9.0 * df)
    x = max(df * (1.0 - c + z * math.sqrt(c)) ** 3, 1e-8)
    lo, hi = 0.0, max(2.0 * x, 1.0)
    while chi2_cdf(hi, df) < prob:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        f = chi2_cdf(x, df) - prob
        if f < 0:
            lo = x
        else:
            hi = x
        step = f / math.exp(_chi2_logpdf(x, df)) if x > 0 else math.inf
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-14 * max(1.0, x) or hi - lo <= 1e-15 * max(1.0, hi):
            return x_new
        x = x_new
    return x


def normal_quantile(prob: float) -> float:
    if not 0.0 < prob < 1.0:
        raise DomainError(f"prob must lie in (0, 1), got {prob}")
    return float(special.ndtri(prob))


@dataclass(frozen=True)
class ChiSquare:
    df: int

    def cdf(self, x: float) -> float:
        return chi2_cdf(x, self.df)

    def quantile(self, prob: float) -> float:
        return chi2_quantile(self.df, prob)


# -- plug-in estimators -------------------------------------------------------


def _signed_rank_sum(values: np.ndarray, order_by: np.ndarray) -> float:
    # sum_{i<j} (v_i - v_j) sign(o_i - o_j), via average ranks of o
    n = values.size
    return float(values @ (2.0 * rankdata(order_by) - n - 1.0))


def gini_index(x) -> float:
    """Ratio of the mean absolute pair difference to the mean pair sum."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise InsufficientData("Gini index needs n >= 2")
    s = np.sort(x)
    num = float(s @ (2.0 * np.arange(1, n + 1) - n - 1.0))
    den = float((n - 1) * s.sum())
    if den == 0.0:
        raise ZeroDenominator("sum of pairwise sums is zero")
    return num / den


def gini_correlations(data) -> tuple:
    """``(gamma_1, gamma_2)`` plug-in estimates for bivariate ``data``."""
    data = as_data_matrix(data, 2)
    if data.shape[0] < 2:
        raise InsufficientData("Gini correlation needs n >= 2")
    x, y = data[:, 0], data[:, 1]
    den1 = _signed_rank_sum(x, x)
    den2 = _signed_rank_sum(y, y)
    if den1 == 0.0 or den2 == 0.0:
        raise ZeroDenominator("a margin is constant")
    return _signed_rank_sum(x, y) / den1, _signed_rank_sum(y, x) / den2


def plug_in_estimates(data, equation: str = "gini-corr") -> np.ndarray:
    """Ratio-of-U-statistics estimate for a built-in equation."""
    if equation == "gini-index":
        return np.array([gini_index(data)])
    g1, g2 = gini_correlations(data)
    return {"gini-corr": np.array([g1, g2]),
            "gini-corr-1": np.array([g1]),
            "gini-corr-2": np.array([g2])}[equation]


def _plug_in(pvf: PseudoValueFunction) -> np.ndarray:
    est = pvf.root()
    if not np.all(np.isfinite(est)):
        raise ZeroDenominator(f"{pvf.eq.name}: zero slope in the plug-in ratio")
    return est


# -- WJEL estimator -----------------------------------------------------------


def wjel_point_estimate(eq: EstimatingEquation, data, w: WeightVector,
                        cfg: SolverConfig = DEFAULT_SOLVER, pvf: Optional[PseudoValueFunction] = None,
                        start=None, method: str = "auto") -> np.ndarray:
    """Minimiser of the WJEL ratio.

    ``method="auto"`` uses the closed form for affine scalar equations: the
    ratio is zero, its global minimum, exactly where the weighted mean of the
    pseudo-values vanishes.  Otherwise golden-section search (r = 1) or
    Nelder-Mead (r > 1) from ``start`` (default: the plug-in estimate).
    """
    pvf = PseudoValueFunction(eq, data) if pvf is None else pvf
    if start is None:
        start = _plug_in(pvf) if eq.is_affine else np.zeros(eq.param_dim)
    start = np.atleast_1d(np.asarray(start, dtype=float))

    def ratio(theta):
        try:
            return wjel_ratio(pvf(theta), w, cfg).ratio
        except NumericalError:
            return np.inf

    if method == "auto" and eq.is_affine and eq.param_dim == 1:
        root = pvf.root(w.weights)
        if np.all(np.isfinite(root)):
            if np.isfinite(ratio(root)):
                return root
            # the weighted mean vanishes at the root, so zero can only miss
            # the hull interior if every pseudo-value is zero there
            if np.allclose(pvf(root).values, 0.0, atol=1e-12 * (1.0 + np.abs(pvf.intercept).max())):
                raise HullViolation(f"{eq.name}: all pseudo-values vanish at {float(root[0])!r}; "
                                    "the likelihood is degenerate (e.g. exactly comonotone data)")
        method = "golden"
    if method in ("auto", "golden") and eq.param_dim == 1:
        x0 = float(start[0])
        h = 1e-2 * (1.0 + abs(x0))
        res = minimize_scalar(lambda t: ratio([t]), bracket=(x0 - h, x0 + h), method="golden",
                              options={"xtol": 1e-10})
        best = np.array([res.x])
    else:
        scale = 0.1 * (1.0 + np.abs(start))
        simplex = np.vstack([start] + [start + scale[j] * np.eye(start.size)[j]
                                       for j in range(start.size)])
        res = minimize(ratio, start, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "maxfev": 500 * start.size,
                                "xatol": 1e-10, "fatol": 1e-12})
        best = np.asarray(res.x)
    f_best, f_start = ratio(best), ratio(start)
    if not np.isfinite(f_best) and not np.isfinite(f_start):
        raise ProfileFailure("no hull-feasible parameter near the start")
    return best if f_best <= f_start else start


# -- intervals ----------------------------------------------------------------


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    method: Method
    point_estimate: float
    center: float
    lower_truncated: bool = False
    upper_truncated: bool = False
    monotone: bool = True

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class IntervalConfig:
    """Tuning for the bracket-and-bisect inversion."""

    xtol: float = 1e-6
    initial_step: Optional[float] = None
    max_doublings: int = 60
    scan_points: int = 5


def _stat_function(eq, pvf, w, cfg, opt):
    if eq.param_dim == 1:
        return lambda t: self_normalized_statistic(pvf([t]), w, cfg)
    if eq.split is None or eq.split[0] != 1:
        raise ValueError("intervals need a scalar equation or a profile split with p = 1")

    def profiled(t):
        try:
            return profile_ratio(eq, pvf.data, [t], w, cfg, opt, pvf).evaluation.self_normalized
        except NumericalError:
            return np.inf
    return profiled


def _endpoint(stat, center, direction, q, bound, icfg, step0):
    """Walk outward from ``center`` until ``stat`` crosses ``q``; bisect."""
    inner, s_inner = center, stat(center)
    h = step0
    outer = s_outer = None
    for _ in range(icfg.max_doublings):
        t = center + direction * h
        if direction * (t - bound) >= 0:
            t = bound
        s_t = stat(t)
        if s_t >= q:
            outer, s_outer = t, s_t
            break
        inner, s_inner = t, s_t
        if t == bound:
            return bound, True
        h *= 2.0
    if outer is None:
        raise UnboundedInterval(f"statistic stays below {q:.4g} after {icfg.max_doublings} doublings")
    while abs(outer - inner) > icfg.xtol:
        mid = 0.5 * (inner + outer)
        s_mid = stat(mid)
        if s_mid < q:
            inner, s_inner = mid, s_mid
        else:
            outer, s_outer = mid, s_mid
    # a jump to +inf well below q means the hull boundary cut the interval
    truncated = not np.isfinite(s_outer) and s_inner < 0.99 * q
    return 0.5 * (inner + outer), truncated


def _scan_monotone(stat, center, end, npts) -> bool:
    ts = center + (end - center) * np.linspace(0.0, 1.0, npts + 2)[1:-1]
    vals = np.array([stat(t) for t in ts])
    finite = vals[np.isfinite(vals)]
    return bool(np.all(np.diff(finite) >= -1e-9 * (1.0 + np.abs(finite[:-1]))))


def invert_ci(eq: EstimatingEquation, data, w: WeightVector, level: float = 0.95,
              cfg: SolverConfig = DEFAULT_SOLVER, method: Method = Method.WJEL,
              pvf: Optional[PseudoValueFunction] = None, profile: ProfileConfig = ProfileConfig(),
              icfg: IntervalConfig = IntervalConfig(), validate: bool = True) -> ConfidenceInterval:
    """``{theta : l(theta) / c_hat <= chi2_1 quantile}`` for a scalar parameter.

    Works on scalar equations directly and on equations with a ``(1, q)``
    split through the profile ratio.  The statistic is ``+inf`` outside the
    hull of the pseudo-values.  An endpoint that reaches the equation's
    natural bound is clamped there and flagged as truncated.
    """
    if not 0.0 < level < 1.0:
        raise DomainError("level must lie in (0, 1)")
    pvf = PseudoValueFunction(eq, data) if pvf is None else pvf
    stat = _stat_function(eq, pvf, w, cfg, profile)
    q = chi2_quantile(1, level)

    point = float(_plug_in(pvf)[0]) if eq.is_affine else math.nan
    center = float(wjel_point_estimate(eq, data, w, cfg, pvf)[0])
    lo_b, hi_b = eq.bound(0)
    center = min(max(center, lo_b), hi_b)
    if not np.isfinite(stat(center)):
        raise HullViolation(f"statistic is infinite at the estimate {center}")
    if math.isnan(point):
        point = center

    if icfg.initial_step is not None:
        step0 = icfg.initial_step
    elif np.isfinite(hi_b - lo_b):
        step0 = 0.01 * (hi_b - lo_b)
    else:
        step0 = 0.01 * (1.0 + abs(center))
    lower, lo_trunc = _endpoint(stat, center, -1.0, q, lo_b, icfg, step0)
    upper, hi_trunc = _endpoint(stat, center, 1.0, q, hi_b, icfg, step0)
    monotone = True
    if validate and icfg.scan_points > 0:
        monotone = (_scan_monotone(stat, center, lower, icfg.scan_points)
                    and _scan_monotone(stat, center, upper, icfg.scan_points))
        if not monotone:
            log.warning("%s statistic not monotone inside the bracket", eq.name)
    return ConfidenceInterval(lower, upper, level, Method.parse(method), point, center,
                              lo_trunc, hi_trunc, monotone)


def jackknife_standard_error(eq: EstimatingEquation, data,
                             pvf: Optional[PseudoValueFunction] = None) -> tuple:
    """Delete-one jackknife SE of the plug-in ratio estimator.

    Returns ``(estimate, se)`` arrays.  The leave-one-out slope and
    intercept means are recovered from their pseudo-values, so no kernel is
    re-evaluated.
    """
    pvf = PseudoValueFunction(eq, data) if pvf is None else pvf
    if not eq.is_affine:
        raise TypeError("the jackknife SE needs an equation with affine tables")
    n = pvf.n
    if n < 3:
        raise InsufficientData("VJ interval needs n >= 3")
    est = _plug_in(pvf)
    slope_loo = (n * pvf.slope_mean - pvf.slope) / (n - 1)
    intercept_loo = (n * pvf.intercept_mean - pvf.intercept) / (n - 1)
    if np.any(slope_loo == 0):
        raise ZeroDenominator("a leave-one-out slope is zero")
    loo = intercept_loo / slope_loo
    dev = loo - loo.mean(axis=0)
    se = np.sqrt((n - 1) / n * np.sum(dev * dev, axis=0))
    return est, se


def vj_interval(eq: EstimatingEquation, data, level: float = 0.95, component: int = 0,
                pvf: Optional[PseudoValueFunction] = None) -> ConfidenceInterval:
    """Normal interval ``estimate +/- z * SE_jack``."""
    if not 0.0 < level < 1.0:
        raise DomainError("level must lie in (0, 1)")
    est, se = jackknife_standard_error(eq, data, pvf)
    z = normal_quantile(0.5 * (1.0 + level))
    e, s = float(est[component]), float(se[component])
    return ConfidenceInterval(e - z * s, e + z * s, level, Method.VJ, e, e)


def method_weights(method: Method, data) -> WeightVector:
    method = Method.parse(method)
    n = as_data_matrix(data).shape[0]
    if method is Method.WJEL:
        return depth_weights(data)
    return uniform_weights(n)


def confidence_interval(eq: EstimatingEquation, data, method, level: float = 0.95,
                        weights: Optional[WeightVector] = None,
                        pvf: Optional[PseudoValueFunction] = None, **kwargs) -> ConfidenceInterval:
    """Dispatch on ``method``: JEL (uniform weights), WJEL (spatial-depth
    weights unless ``weights`` is given) or VJ."""
    method = Method.parse(method)
    if method is Method.VJ:
        return vj_interval(eq, data, level, pvf=pvf)
    w = method_weights(method, data) if weights is None else weights
    return invert_ci(eq, data, w, level, method=method, pvf=pvf, **kwargs)
