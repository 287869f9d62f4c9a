"""U-structure estimating equations.

An estimating equation is a symmetric kernel ``H`` of degree ``k`` mapping
``k`` observations and a parameter ``theta`` in R^r to R^r.  The parameter
estimate solves ``W_n(theta) = 0`` where ``W_n`` averages ``H`` over all
size-``k`` subsets of the sample.

Two kernels ship with the package: the pair of Gini correlations of a
bivariate sample and the Gini index of a positive univariate sample.  Both
are affine in the parameter, ``H_l = slope_l * theta_l - intercept_l``, and
declare the pairwise slope/intercept tables so the jackknife can cache them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch

Kernel = Callable[[Sequence[np.ndarray], np.ndarray], np.ndarray]
TableBuilder = Callable[[np.ndarray], "tuple[np.ndarray, np.ndarray]"]


@dataclass(frozen=True)
class EstimatingEquation:
    """Symmetric kernel of degree ``degree`` with values in R^param_dim.

    ``affine_tables``, when given, takes the ``(n, d)`` data matrix and
    returns ``(slope, intercept)`` arrays of shape ``(n, n, r)`` such that
    ``H(X_i, X_j; theta) = slope[i, j] * theta - intercept[i, j]``
    componentwise.  Only meaningful for ``degree == 2``.

    ``split`` is ``(p, q)`` when the first ``p`` coordinates of theta are of
    interest and the remaining ``q`` are nuisance.  ``bounds`` holds the
    natural range of each coordinate.
    """

    name: str
    degree: int
    param_dim: int
    data_dim: int
    kernel: Kernel
    affine_tables: Optional[TableBuilder] = None
    bounds: tuple = ()
    split: Optional[tuple] = None

    def __post_init__(self):
        if self.degree < 1 or self.param_dim < 1 or self.data_dim < 1:
            raise ValueError("degree, param_dim and data_dim must be positive")
        if self.split is not None:
            p, q = self.split
            if p < 1 or q < 0 or p + q != self.param_dim:
                raise ValueError(f"invalid split {self.split} for r={self.param_dim}")
        if self.bounds and len(self.bounds) != self.param_dim:
            raise ValueError("bounds must have one (lo, hi) pair per parameter")
        if self.affine_tables is not None and self.degree != 2:
            raise ValueError("affine tables are only supported for degree 2")

    @property
    def is_affine(self) -> bool:
        return self.affine_tables is not None

    def eval(self, points: Sequence, theta) -> np.ndarray:
        if len(points) != self.degree:
            raise DimensionMismatch(
                f"{self.name} takes {self.degree} points, got {len(points)}"
            )
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.atleast_1d(
            np.asarray(self.kernel([np.atleast_1d(p) for p in points], theta), dtype=float)
        )
        if out.shape != (self.param_dim,):
            raise DimensionMismatch(
                f"{self.name} returned shape {out.shape}, expected ({self.param_dim},)"
            )
        return out

    def bound(self, index: int = 0) -> tuple:
        if not self.bounds:
            return (-np.inf, np.inf)
        return self.bounds[index]


def as_data_matrix(data, data_dim: Optional[int] = None) -> np.ndarray:
    """Coerce a sequence of observations into an ``(n, d)`` float array."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionMismatch(f"data must be 1-D or 2-D, got shape {arr.shape}")
    if data_dim is not None and arr.shape[1] != data_dim:
        raise DimensionMismatch(f"expected {data_dim}-dimensional observations, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch("observations must be finite")
    return arr


# -- Gini correlation ---------------------------------------------------------


def _h1(x1, y1, x2, y2):
    # strict indicators: ties in y contribute nothing
    return 0.25 * ((x1 - x2) * (y1 > y2) + (x2 - x1) * (y2 > y1))


def _h2(x1, x2):
    return 0.25 * abs(x1 - x2)


def gini_corr_kernel(z1, z2, gamma) -> np.ndarray:
    """Kernel pair ``(H_1, H_2)`` for the two Gini correlations.

    ``H_1`` uses the (x, y) ordering of the points and ``H_2`` the swapped
    (y, x) ordering, so ``gamma[0]`` targets cov(X, G(Y)) / cov(X, F(X)) and
    ``gamma[1]`` the reverse.
    """
    x1, y1 = float(z1[0]), float(z1[1])
    x2, y2 = float(z2[0]), float(z2[1])
    g1, g2 = float(gamma[0]), float(gamma[1])
    return np.array([
        _h2(x1, x2) * g1 - _h1(x1, y1, x2, y2),
        _h2(y1, y2) * g2 - _h1(y1, x1, y2, x2),
    ])


def _gini_corr_tables(data: np.ndarray):
    x, y = data[:, 0], data[:, 1]
    dx = x[:, None] - x[None, :]
    dy = y[:, None] - y[None, :]
    sx = np.sign(dx)
    sy = np.sign(dy)
    slope = 0.25 * np.stack([np.abs(dx), np.abs(dy)], axis=-1)
    intercept = 0.25 * np.stack([dx * sy, dy * sx], axis=-1)
    return slope, intercept


def gini_correlation_equation(component: Optional[int] = None) -> EstimatingEquation:
    """Gini correlation equation.

    ``component=None`` gives the joint two-parameter equation with
    ``gamma_1`` of interest and ``gamma_2`` as nuisance; ``component=1`` or
    ``2`` gives the scalar equation for that correlation alone.
    """
    if component is None:
        return EstimatingEquation(
            name="gini-corr",
            degree=2,
            param_dim=2,
            data_dim=2,
            kernel=lambda pts, th: gini_corr_kernel(pts[0], pts[1], th),
            affine_tables=_gini_corr_tables,
            bounds=((-1.0, 1.0), (-1.0, 1.0)),
            split=(1, 1),
        )
    if component not in (1, 2):
        raise ValueError("component must be 1, 2 or None")
    idx = component - 1

    def kernel(pts, th):
        full = gini_corr_kernel(pts[0], pts[1], (th[0], th[0]))
        return full[idx:idx + 1]

    def tables(data):
        slope, intercept = _gini_corr_tables(data)
        return slope[..., idx:idx + 1], intercept[..., idx:idx + 1]

    return EstimatingEquation(
        name=f"gini-corr-{component}",
        degree=2,
        param_dim=1,
        data_dim=2,
        kernel=kernel,
        affine_tables=tables,
        bounds=((-1.0, 1.0),),
    )


# -- Gini index ---------------------------------------------------------------


def gini_index_kernel(x1, x2, g) -> float:
    """``(x1 + x2) * g - |x1 - x2|``."""
    return (x1 + x2) * g - abs(x1 - x2)


def _gini_index_tables(data: np.ndarray):
    x = data[:, 0]
    slope = (x[:, None] + x[None, :])[..., None]
    intercept = np.abs(x[:, None] - x[None, :])[..., None]
    return slope, intercept


def gini_index_equation() -> EstimatingEquation:
    return EstimatingEquation(
        name="gini-index",
        degree=2,
        param_dim=1,
        data_dim=1,
        kernel=lambda pts, th: np.array(
            [gini_index_kernel(float(pts[0][0]), float(pts[1][0]), float(th[0]))]
        ),
        affine_tables=_gini_index_tables,
        bounds=((0.0, 1.0),),
    )


EQUATIONS = {
    "gini-corr": lambda: gini_correlation_equation(None),
    "gini-corr-1": lambda: gini_correlation_equation(1),
    "gini-corr-2": lambda: gini_correlation_equation(2),
    "gini-index": gini_index_equation,
}


def get_equation(name: str) -> EstimatingEquation:
    try:
        return EQUATIONS[name]()
    except KeyError:
        raise ValueError(f"unknown equation {name!r}; choose from {sorted(EQUATIONS)}") from None


# -- validation ---------------------------------------------------------------


def check_symmetry(eq: EstimatingEquation, sample, theta, trials: int = 10,
                   rng=None, atol: float = 1e-12) -> bool:
    """True when ``eq`` agrees across ``trials`` random argument permutations."""
    points = [np.atleast_1d(np.asarray(p, dtype=float)) for p in sample]
    if len(points) != eq.degree:
        raise DimensionMismatch(f"sample has {len(points)} points, kernel degree is {eq.degree}")
    rng = np.random.default_rng(0) if rng is None else rng
    base = eq.eval(points, theta)
    perms = list(itertools.permutations(range(eq.degree)))
    for _ in range(trials):
        perm = perms[rng.integers(len(perms))]
        if not np.allclose(eq.eval([points[i] for i in perm], theta), base, rtol=0.0, atol=atol):
            return False
    # a random draw can miss the only offending order for small k
    if len(perms) <= 24:
        for perm in perms:
            if not np.allclose(eq.eval([points[i] for i in perm], theta), base, rtol=0.0, atol=atol):
                return False
    return True
