"""U-statistics, leave-one-out statistics and jackknife pseudo-values.

Degree-2 equations use an O(n^2) path: the pairwise kernel table is summed
once by rows and each leave-one-out statistic is the full pair sum minus one
row.  Equations that declare affine tables additionally have their
pseudo-values cached as ``a_i * theta - b_i`` (see ``PseudoValueFunction``),
which makes re-evaluation at a new theta O(n r).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import InsufficientData
from .estimating import EstimatingEquation, as_data_matrix


@dataclass(frozen=True)
class PseudoValueSet:
    """Jackknife pseudo-values at one theta.

    Attributes
    ----------
    values : (n, r) array
        Row ``i`` is ``n W_n - (n - 1) W_{n-1}^{(-i)}``.
    w_n : (r,) array
        Full-sample U-statistic.
    theta : (r,) array
    """

    values: np.ndarray
    w_n: np.ndarray
    theta: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def r(self) -> int:
        return self.values.shape[1]


def _theta(eq: EstimatingEquation, theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (eq.param_dim,):
        raise ValueError(f"theta must have length {eq.param_dim}, got {theta.shape}")
    return theta


def _pair_table(eq: EstimatingEquation, data: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """``(n, n, r)`` table of H over ordered pairs, zero on the diagonal."""
    n = data.shape[0]
    if eq.is_affine:
        slope, intercept = eq.affine_tables(data)
        table = slope * theta - intercept
    else:
        table = np.zeros((n, n, eq.param_dim))
        for i, j in itertools.combinations(range(n), 2):
            h = eq.eval((data[i], data[j]), theta)
            table[i, j] = h
            table[j, i] = h
    idx = np.arange(n)
    table[idx, idx] = 0.0
    return table


def _pair_pseudo_values(table: np.ndarray) -> tuple:
    """Pseudo-values and W_n from a symmetric zero-diagonal pair table."""
    n = table.shape[0]
    rows = table.sum(axis=1)
    total = rows.sum(axis=0) / 2.0
    w_n = total / comb(n, 2)
    w_loo = (total - rows) / comb(n - 1, 2)
    return n * w_n - (n - 1) * w_loo, w_n


def u_statistic(eq: EstimatingEquation, data, theta) -> np.ndarray:
    """Average of ``H`` over all increasing ``k``-tuples of the sample."""
    data = as_data_matrix(data, eq.data_dim)
    theta = _theta(eq, theta)
    n, k = data.shape[0], eq.degree
    if n < k:
        raise InsufficientData(f"need at least {k} observations, got {n}")
    if k == 2:
        table = _pair_table(eq, data, theta)
        return table.sum(axis=(0, 1)) / 2.0 / comb(n, 2)
    acc = np.zeros(eq.param_dim)
    for idx in itertools.combinations(range(n), k):
        acc += eq.eval([data[i] for i in idx], theta)
    return acc / comb(n, k)


def jackknife_pseudo_values(eq: EstimatingEquation, data, theta) -> PseudoValueSet:
    data = as_data_matrix(data, eq.data_dim)
    theta = _theta(eq, theta)
    n, k = data.shape[0], eq.degree
    if n < k + 1:
        raise InsufficientData(f"need at least {k + 1} observations for pseudo-values, got {n}")
    if k == 2:
        values, w_n = _pair_pseudo_values(_pair_table(eq, data, theta))
        return PseudoValueSet(values, w_n, theta)
    # generic degree: recompute every leave-one-out statistic from scratch
    w_n = u_statistic(eq, data, theta)
    values = np.empty((n, eq.param_dim))
    for i in range(n):
        w_loo = u_statistic(eq, np.delete(data, i, axis=0), theta)
        values[i] = n * w_n - (n - 1) * w_loo
    return PseudoValueSet(values, w_n, theta)


def jackknife_variance(pv: PseudoValueSet) -> np.ndarray:
    """Jackknife estimate of the covariance matrix of ``W_n``.

    ``sum_i (V_i - W_n)(V_i - W_n)^T / (n (n - 1))``.
    """
    n = pv.n
    if n < 2:
        raise InsufficientData("jackknife variance needs n >= 2")
    dev = pv.values - pv.w_n
    cov = dev.T @ dev / (n * (n - 1))
    return (cov + cov.T) / 2.0


class PseudoValueFunction:
    """theta -> PseudoValueSet on fixed data.

    For affine degree-2 equations the slope and intercept tables are reduced
    to per-observation coefficients once, so every later call is linear in
    n.  Other equations fall back to ``jackknife_pseudo_values``.
    """

    def __init__(self, eq: EstimatingEquation, data):
        self.eq = eq
        self.data = as_data_matrix(data, eq.data_dim)
        n = self.data.shape[0]
        if n < eq.degree + 1:
            raise InsufficientData(
                f"need at least {eq.degree + 1} observations for pseudo-values, got {n}"
            )
        self.n = n
        self.slope = self.intercept = None
        if eq.is_affine:
            slope_t, intercept_t = eq.affine_tables(self.data)
            idx = np.arange(n)
            slope_t = slope_t.copy()
            intercept_t = intercept_t.copy()
            slope_t[idx, idx] = 0.0
            intercept_t[idx, idx] = 0.0
            self.slope, self.slope_mean = _pair_pseudo_values(slope_t)
            self.intercept, self.intercept_mean = _pair_pseudo_values(intercept_t)

    def __call__(self, theta) -> PseudoValueSet:
        theta = _theta(self.eq, theta)
        if self.slope is None:
            return jackknife_pseudo_values(self.eq, self.data, theta)
        values = self.slope * theta - self.intercept
        w_n = self.slope_mean * theta - self.intercept_mean
        return PseudoValueSet(values, w_n, theta)

    def root(self, weights=None) -> np.ndarray:
        """Componentwise root of the (weighted) mean pseudo-value.

        Only for affine equations.  With ``weights=None`` this is the plug-in
        ratio estimator ``mean(intercept) / mean(slope)``.
        """
        if self.slope is None:
            raise TypeError(f"{self.eq.name} is not affine in theta")
        if weights is None:
            num, den = self.intercept_mean, self.slope_mean
        else:
            w = np.asarray(weights, dtype=float)
            num, den = w @ self.intercept, w @ self.slope
        with np.errstate(divide="ignore", invalid="ignore"):
            return num / den
