import math
from itertools import combinations

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import seeds
from depthjel.depth import depth_weights, uniform_weights
from depthjel.errors import DomainError, HullViolation, ZeroDenominator
from depthjel.estimating import gini_correlation_equation, gini_index_equation
from depthjel.inference import (ChiSquare, Method, _stat_function, chi2_cdf, chi2_quantile,
                                confidence_interval, gini_correlations, gini_index, invert_ci,
                                jackknife_standard_error, normal_quantile, plug_in_estimates,
                                vj_interval, wjel_point_estimate)
from depthjel.ustat import PseudoValueFunction
from depthjel.wjel import DEFAULT_SOLVER, ProfileConfig


def mp_chi2_quantile(df, p):
    """Bisection on the regularized incomplete gamma at 40 digits."""
    mpmath.mp.dps = 40
    cdf = lambda x: mpmath.gammainc(mpmath.mpf(df) / 2, 0, x / 2, regularized=True)
    lo, hi = mpmath.mpf(0), mpmath.mpf(df)
    while cdf(hi) < p:
        hi *= 2
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if cdf(mid) < p else (lo, mid)
    return float((lo + hi) / 2)


@pytest.mark.parametrize("df", [1, 2, 3, 5, 10])
@pytest.mark.parametrize("p", [0.01, 0.5, 0.9, 0.95, 0.99, 0.999])
def test_chi2_quantile_against_mpmath(df, p):
    assert chi2_quantile(df, p) == pytest.approx(mp_chi2_quantile(df, p), rel=1e-10)


def test_chi2_known_values():
    assert chi2_quantile(1, 0.95) == pytest.approx(3.841458820694124, rel=1e-12)
    assert chi2_quantile(2, 1 - math.exp(-1)) == pytest.approx(2.0, rel=1e-12)
    assert ChiSquare(1).cdf(ChiSquare(1).quantile(0.9)) == pytest.approx(0.9, abs=1e-13)
    assert chi2_cdf(0.0, 3) == 0.0


def test_chi2_domain():
    for p in (0.0, 1.0, -0.1, math.nan):
        with pytest.raises(DomainError):
            chi2_quantile(1, p)
    with pytest.raises(DomainError):
        chi2_quantile(0, 0.5)


def test_normal_quantile():
    assert normal_quantile(0.975) == pytest.approx(1.959963984540054, rel=1e-13)


def test_method_parse():
    assert Method.parse("wjel") is Method.WJEL
    assert Method.parse(Method.VJ) is Method.VJ
    with pytest.raises(ValueError):
        Method.parse("rjel-ish")


# -- plug-in estimators ---------------------------------------------------------


@given(seeds(), st.integers(3, 25))
def test_gini_index_matches_pairwise_ratio(seed, n):
    x = np.random.default_rng(seed).lognormal(size=n)
    pairs = list(combinations(x, 2))
    naive = sum(abs(a - b) for a, b in pairs) / sum(a + b for a, b in pairs)
    assert gini_index(x) == pytest.approx(naive, rel=1e-12)
    assert gini_index(x) == pytest.approx(PseudoValueFunction(gini_index_equation(), x).root()[0], rel=1e-12)


@given(seeds(), st.integers(3, 25))
def test_gini_correlations_match_pairwise_ratio(seed, n):
    rng = np.random.default_rng(seed)
    # rounding produces ties
    data = np.round(rng.standard_normal((n, 2)) * 2) / 2
    assume(np.ptp(data[:, 0]) > 0 and np.ptp(data[:, 1]) > 0)
    num1 = num2 = den1 = den2 = 0.0
    for (x1, y1), (x2, y2) in combinations(data, 2):
        num1 += (x1 - x2) * np.sign(y1 - y2)
        num2 += (y1 - y2) * np.sign(x1 - x2)
        den1 += abs(x1 - x2)
        den2 += abs(y1 - y2)
    g1, g2 = gini_correlations(data)
    assert g1 == pytest.approx(num1 / den1, abs=1e-12)
    assert g2 == pytest.approx(num2 / den2, abs=1e-12)
    np.testing.assert_allclose(plug_in_estimates(data), [g1, g2], atol=1e-12)


def test_plug_in_errors():
    with pytest.raises(ZeroDenominator):
        gini_correlations(np.c_[np.ones(5), np.arange(5.0)])
    with pytest.raises(ZeroDenominator):
        gini_index(np.zeros(4))


# -- point estimates -------------------------------------------------------------


@given(seeds())
def test_search_agrees_with_closed_form(seed):
    rng = np.random.default_rng(seed)
    data = rng.multivariate_normal([0, 0], [[1, 0.4], [0.4, 1]], size=int(rng.integers(10, 40)))
    eq = gini_correlation_equation(1)
    pvf = PseudoValueFunction(eq, data)
    w = depth_weights(data)
    closed = wjel_point_estimate(eq, data, w, pvf=pvf)[0]
    golden = wjel_point_estimate(eq, data, w, pvf=pvf, method="golden")[0]
    nm = wjel_point_estimate(eq, data, w, pvf=pvf, method="nelder-mead")[0]
    assert golden == pytest.approx(closed, abs=1e-5)
    assert nm == pytest.approx(closed, abs=1e-5)


def test_uniform_estimate_is_plug_in(rng):
    data = rng.standard_normal((30, 2))
    eq = gini_correlation_equation(2)
    est = wjel_point_estimate(eq, data, uniform_weights(30))[0]
    assert est == pytest.approx(gini_correlations(data)[1], abs=1e-12)


def test_comonotone_data_are_degenerate():
    x = np.arange(10.0)
    with pytest.raises(HullViolation):
        confidence_interval(gini_correlation_equation(1), np.c_[x, x ** 3], "JEL")


# -- intervals ----------------------------------------------------------------------


@given(seeds(), st.sampled_from(["JEL", "WJEL"]))
def test_intervals_nest_in_level(seed, method):
    rng = np.random.default_rng(seed)
    data = rng.multivariate_normal([0, 0], [[1, 0.5], [0.5, 1]], size=int(rng.integers(12, 40)))
    eq = gini_correlation_equation(1)
    pvf = PseudoValueFunction(eq, data)
    cis = [confidence_interval(eq, data, method, lv, pvf=pvf, validate=False) for lv in (0.8, 0.9, 0.95)]
    for small, big in zip(cis, cis[1:]):
        assert big.lower <= small.lower + 1e-6 and small.upper <= big.upper + 1e-6


def test_endpoints_hit_the_quantile(rng):
    data = rng.multivariate_normal([0, 0], [[1, 0.3], [0.3, 1]], size=40)
    eq = gini_correlation_equation(1)
    pvf = PseudoValueFunction(eq, data)
    w = depth_weights(data)
    ci = invert_ci(eq, data, w, 0.95, pvf=pvf)
    stat = _stat_function(eq, pvf, w, DEFAULT_SOLVER, ProfileConfig())
    q = chi2_quantile(1, 0.95)
    assert ci.lower < ci.center < ci.upper
    assert ci.monotone
    assert stat(ci.lower) == pytest.approx(q, abs=1e-3)
    assert stat(ci.upper) == pytest.approx(q, abs=1e-3)
    assert ci.point_estimate == pytest.approx(gini_correlations(data)[0])


@given(seeds(), st.floats(1e-3, 1e3))
def test_gini_index_curve_scale_invariant(seed, c):
    rng = np.random.default_rng(seed)
    x = rng.pareto(3.0, size=int(rng.integers(8, 40))) + 1
    eq = gini_index_equation()
    w = depth_weights(x)
    a = _stat_function(eq, PseudoValueFunction(eq, x), w, DEFAULT_SOLVER, ProfileConfig())
    b = _stat_function(eq, PseudoValueFunction(eq, c * x), depth_weights(c * x), DEFAULT_SOLVER, ProfileConfig())
    for t in np.linspace(0.02, 0.98, 9):
        sa, sb = a(t), b(t)
        assert (np.isinf(sa) and np.isinf(sb)) or sb == pytest.approx(sa, rel=1e-7, abs=1e-9)


@given(seeds(), st.floats(-100, 100), st.floats(-100, 100))
def test_gini_correlation_curve_location_invariant(seed, bx, by):
    rng = np.random.default_rng(seed)
    data = rng.multivariate_normal([0, 0], [[1, 0.5], [0.5, 1]], size=20)
    eq = gini_correlation_equation(1)
    moved = data + [bx, by]
    a = _stat_function(eq, PseudoValueFunction(eq, data), depth_weights(data), DEFAULT_SOLVER, ProfileConfig())
    b = _stat_function(eq, PseudoValueFunction(eq, moved), depth_weights(moved), DEFAULT_SOLVER, ProfileConfig())
    for t in np.linspace(-0.9, 0.9, 7):
        sa, sb = a(t), b(t)
        assert (np.isinf(sa) and np.isinf(sb)) or sb == pytest.approx(sa, rel=1e-6, abs=1e-8)


def test_gini_index_interval_is_truncated_at_zero():
    # nearly equal incomes: the lower end of the JEL curve runs into 0
    x = np.array([10.0, 10.1, 10.2, 9.9, 10.05, 50.0])
    ci = confidence_interval(gini_index_equation(), x, "JEL")
    assert 0.0 <= ci.lower < ci.upper <= 1.0


def test_vj_symmetric_and_jackknife_se(rng):
    data = rng.standard_normal((25, 2))
    eq = gini_correlation_equation()
    ci = vj_interval(eq, data, 0.9)
    est, se = jackknife_standard_error(eq, data)
    assert ci.point_estimate - ci.lower == pytest.approx(ci.upper - ci.point_estimate)
    assert ci.length == pytest.approx(2 * normal_quantile(0.95) * se[0])
    # brute-force delete-one recomputation
    loo = np.array([gini_correlations(np.delete(data, i, axis=0))[0] for i in range(25)])
    assert se[0] == pytest.approx(math.sqrt(24 / 25 * np.sum((loo - loo.mean()) ** 2)), rel=1e-10)


def test_profiled_joint_equation_interval(rng):
    data = rng.multivariate_normal([0, 0], [[1, 0.5], [0.5, 1]], size=25)
    joint = confidence_interval(gini_correlation_equation(), data, "JEL", validate=False)
    assert joint.lower < gini_correlations(data)[0] < joint.upper


def test_level_checked(rng):
    with pytest.raises(DomainError):
        confidence_interval(gini_index_equation(), rng.exponential(size=10), "WJEL", level=1.0)
