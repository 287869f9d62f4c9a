"""Weighted jackknife empirical likelihood.

For pseudo-values ``V_i`` and weights ``w_i`` the multiplier ``lam`` solves

    sum_i w_i V_i / (1 + lam' V_i) = 0,

equivalently it maximises the concave dual ``F(lam) = sum_i w_i log(1 + lam' V_i)``.
The log-likelihood ratio is ``l = 2 n F(lam)`` and the self-normalised
statistic is ``l / sum_i n w_i^2``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog, minimize

from .depth import WeightVector
from .errors import HullViolation, NoConvergence, NumericalError, ProfileFailure
from .estimating import EstimatingEquation
from .ustat import PseudoValueFunction, PseudoValueSet

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """Newton solver settings.

    ``grad_tol`` and ``barrier_eps`` default to values derived from the
    problem at hand (see ``_tolerances``) when left as ``None``.
    """

    max_iter: int = 100
    grad_tol: Optional[float] = None
    barrier_eps: Optional[float] = None
    max_halvings: int = 40

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.grad_tol is not None and not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.barrier_eps is not None and not 0 < self.barrier_eps < 1:
            raise ValueError("barrier_eps must lie in (0, 1)")


DEFAULT_SOLVER = SolverConfig()


@dataclass(frozen=True)
class WjelEvaluation:
    lam: np.ndarray
    ratio: float
    self_normalized: float
    probs: np.ndarray
    converged: bool
    iterations: int
    grad_norm: float


def _values(pv) -> np.ndarray:
    v = pv.values if isinstance(pv, PseudoValueSet) else np.asarray(pv, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    return v


def _weights(w, n: int) -> np.ndarray:
    arr = w.weights if isinstance(w, WeightVector) else np.asarray(w, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"expected {n} weights, got shape {arr.shape}")
    return arr


def _c_hat(w, weights: np.ndarray) -> float:
    if isinstance(w, WeightVector):
        return w.c_hat
    return float(weights.size * np.sum(weights * weights))


def convex_hull_check(pv, w=None) -> bool:
    """Whether zero lies strictly inside the convex hull of the pseudo-values.

    ``w`` is accepted for interface symmetry; strictly positive weights do
    not change the hull.
    """
    v = _values(pv)
    n, r = v.shape
    if not np.all(np.isfinite(v)):
        return False
    if r == 1:
        return bool(v.min() < 0.0 < v.max())
    if n < r + 1 or np.linalg.matrix_rank(v) < r:
        return False
    # max t  s.t.  V' mu = 0, sum(mu) = 1, mu_i >= t
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_eq = np.zeros((r + 1, n + 1))
    a_eq[:r, :n] = v.T
    a_eq[r, :n] = 1.0
    b_eq = np.zeros(r + 1)
    b_eq[r] = 1.0
    a_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(n), A_eq=a_eq, b_eq=b_eq,
                  bounds=[(0, None)] * n + [(None, 1.0)], method="highs")
    return bool(res.status == 0 and -res.fun > 1e-9 / n)


def _tolerances(v: np.ndarray, w: np.ndarray, cfg: SolverConfig) -> tuple:
    n = v.shape[0]
    if cfg.grad_tol is not None:
        tol = cfg.grad_tol
    else:
        # scales with the pseudo-values so results are scale equivariant
        flat = v.ravel()
        scale = math.sqrt(float(flat @ flat) / flat.size)
        tol = 1e-10 * (scale + float(np.sqrt(np.sum((w @ v) ** 2))))
    if cfg.barrier_eps is not None:
        eps = cfg.barrier_eps
    else:
        # at the solution p_i = w_i / (1 + lam' V_i) < 1, so the barrier
        # must stay below min(w) to never bind there
        eps = min(1.0 / (10 * n), 0.5 * w.min())
    return tol, eps


def _newton_scalar(v: np.ndarray, w: np.ndarray, tol: float, eps: float,
                   cfg: SolverConfig, trace=None):
    lam = 0.0
    z = np.ones_like(v)
    f = 0.0
    for it in range(cfg.max_iter + 1):
        q = w / z
        g = float(q @ v)
        if abs(g) <= tol:
            # one unguarded step in the quadratic regime takes lam to roundoff
            lam_p = lam + g / float((q / z) @ (v * v))
            z_p = 1.0 + lam_p * v
            if z_p.min() >= eps:
                lam, z = lam_p, z_p
                g = float((w / z) @ v)
            return np.array([lam]), z, it, abs(g), True
        if it == cfg.max_iter:
            break
        step = g / float((q / z) @ (v * v))
        t = 1.0
        for _ in range(cfg.max_halvings + 1):
            z_new = 1.0 + (lam + t * step) * v
            if z_new.min() >= eps:
                f_new = float(w @ np.log(z_new))
                if f_new >= f - 1e-14 * max(1.0, abs(f)):
                    break
            t *= 0.5
        else:
            break
        lam += t * step
        z, f = z_new, f_new
        if trace is not None:
            trace.append(f)
    raise NoConvergence(f"scalar Newton stalled after {it} iterations", abs(g))


def _newton(v: np.ndarray, w: np.ndarray, tol: float, eps: float,
            cfg: SolverConfig, trace=None):
    r = v.shape[1]
    lam = np.zeros(r)
    z = np.ones(v.shape[0])
    f = 0.0
    for it in range(cfg.max_iter + 1):
        q = w / z
        g = q @ v
        gn = float(np.linalg.norm(g))
        if gn <= tol:
            try:
                lam_p = lam + np.linalg.solve((v * (q / z)[:, None]).T @ v, g)
            except np.linalg.LinAlgError:
                return lam, z, it, gn, True
            z_p = 1.0 + v @ lam_p
            if z_p.min() >= eps:
                lam, z = lam_p, z_p
                gn = float(np.linalg.norm((w / z) @ v))
            return lam, z, it, gn, True
        if it == cfg.max_iter:
            break
        hess = (v * (q / z)[:, None]).T @ v
        try:
            step = np.linalg.solve(hess, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, g, rcond=None)[0]
        t = 1.0
        for _ in range(cfg.max_halvings + 1):
            lam_new = lam + t * step
            z_new = 1.0 + v @ lam_new
            if z_new.min() >= eps:
                f_new = float(w @ np.log(z_new))
                if f_new >= f - 1e-14 * max(1.0, abs(f)):
                    break
            t *= 0.5
        else:
            break
        lam, z, f = lam_new, z_new, f_new
        if trace is not None:
            trace.append(f)
    raise NoConvergence(f"Newton stalled after {it} iterations", gn)


def _solve(pv, w, cfg: SolverConfig, trace=None, check_hull: bool = True):
    v = _values(pv)
    weights = _weights(w, v.shape[0])
    if check_hull and not convex_hull_check(v):
        raise HullViolation("zero is not interior to the convex hull of the pseudo-values")
    tol, eps = _tolerances(v, weights, cfg)
    if v.shape[1] == 1:
        return _newton_scalar(v[:, 0], weights, tol, eps, cfg, trace) + (v, weights)
    return _newton(v, weights, tol, eps, cfg, trace) + (v, weights)


def solve_lambda(pv, w, cfg: SolverConfig = DEFAULT_SOLVER) -> np.ndarray:
    """Lagrange multiplier for the weighted pseudo-value constraint."""
    return _solve(pv, w, cfg)[0]


def wjel_ratio(pv, w, cfg: SolverConfig = DEFAULT_SOLVER, trace=None) -> WjelEvaluation:
    lam, z, iters, gnorm, converged, v, weights = _solve(pv, w, cfg, trace)
    n = v.shape[0]
    ratio = max(2.0 * n * float(weights @ np.log(z)), 0.0)
    return WjelEvaluation(
        lam=lam,
        ratio=ratio,
        self_normalized=ratio / _c_hat(w, weights),
        probs=weights / z,
        converged=converged,
        iterations=iters,
        grad_norm=gnorm,
    )


def self_normalized_statistic(pv, w, cfg: SolverConfig = DEFAULT_SOLVER) -> float:
    """``l / c_hat``, or ``inf`` when theta is outside the likelihood support."""
    try:
        return wjel_ratio(pv, w, cfg).self_normalized
    except HullViolation:
        return np.inf


# -- profiling ----------------------------------------------------------------


@dataclass(frozen=True)
class ProfileConfig:
    max_evals: int = 500
    simplex_scale: float = 0.1
    restarts: int = 1
    xatol: float = 1e-8
    fatol: float = 1e-10


@dataclass(frozen=True)
class ProfileResult:
    evaluation: WjelEvaluation
    beta: np.ndarray
    theta: np.ndarray


def _nelder_mead(fun, x0: np.ndarray, opt: ProfileConfig):
    scale = opt.simplex_scale * (1.0 + np.abs(x0))
    simplex = np.vstack([x0] + [x0 + scale[j] * np.eye(x0.size)[j] for j in range(x0.size)])
    return minimize(fun, x0, method="Nelder-Mead",
                    options={"initial_simplex": simplex, "maxfev": opt.max_evals,
                             "xatol": opt.xatol, "fatol": opt.fatol})


def profile_ratio(eq: EstimatingEquation, data, alpha, w, cfg: SolverConfig = DEFAULT_SOLVER,
                  opt: ProfileConfig = ProfileConfig(), pvf: Optional[PseudoValueFunction] = None,
                  beta_start=None) -> ProfileResult:
    """``min_beta l(alpha, beta)`` over the nuisance block.

    The search starts from ``beta_start`` or, for affine equations, the
    plug-in ratio estimate of the nuisance coordinates.
    """
    pvf = PseudoValueFunction(eq, data) if pvf is None else pvf
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    p, q = eq.split if eq.split is not None else (eq.param_dim, 0)
    if alpha.shape != (p,):
        raise ValueError(f"alpha must have length {p}")
    if q == 0:
        return ProfileResult(wjel_ratio(pvf(alpha), w, cfg), np.empty(0), alpha)

    if beta_start is not None:
        beta0 = np.atleast_1d(np.asarray(beta_start, dtype=float))
    elif eq.is_affine:
        beta0 = pvf.root()[p:]
    else:
        beta0 = np.zeros(q)
    if not np.all(np.isfinite(beta0)):
        beta0 = np.zeros(q)

    def objective(beta):
        try:
            return wjel_ratio(pvf(np.concatenate([alpha, beta])), w, cfg).ratio
        except NumericalError:
            return np.inf

    best = None
    start = beta0
    for attempt in range(opt.restarts + 1):
        res = _nelder_mead(objective, start, opt)
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
        if best is not None and res.success:
            break
        # perturb deterministically away from the failed start
        start = beta0 + opt.simplex_scale * (1.0 + np.abs(beta0)) * (0.5 + attempt)
        log.debug("profile restart %d from %s", attempt + 1, start)
    if best is None:
        raise ProfileFailure(f"no hull-feasible nuisance value found for alpha={alpha}")
    theta = np.concatenate([alpha, best.x])
    return ProfileResult(wjel_ratio(pvf(theta), w, cfg), np.asarray(best.x), theta)
