"""Sample spatial depth and depth-based observation weights."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDepths, InsufficientData, ZeroMeanDepth
from .estimating import as_data_matrix

# rows per block in the all-pairs depth computation; bounds memory at
# _CHUNK * n * d doubles
_CHUNK = 256


@dataclass(frozen=True)
class WeightVector:
    """Positive weights summing to one.

    ``c_hat`` is ``sum_i n w_i^2``, the self-normalising constant; it is at
    least 1 with equality only for uniform weights.
    """

    weights: np.ndarray
    c_hat: float = field(init=False)
    degenerate: bool = False

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-D array")
        if not np.all(w > 0):
            raise ValueError("weights must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "c_hat", float(w.size * np.sum(w * w)))

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))


def uniform_weights(n: int) -> WeightVector:
    if n < 1:
        raise ValueError("n must be positive")
    return WeightVector(np.full(n, 1.0 / n))


def _unit_vectors(diff: np.ndarray) -> np.ndarray:
    # divide by the largest coordinate first so tiny differences do not
    # underflow to a zero norm; exact zeros map to S(0) = 0
    big = np.max(np.abs(diff), axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        scaled = diff / big
        unit = scaled / np.sqrt(np.sum(scaled * scaled, axis=-1, keepdims=True))
    return np.where(big > 0, unit, 0.0)


def spatial_depth(x, data) -> float:
    """Spatial depth of point ``x`` with respect to the sample ``data``.

    ``1 - || mean_i S(x - X_i) ||`` where ``S`` is the unit vector in the
    direction of its argument and ``S(0) = 0``.
    """
    data = as_data_matrix(data)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (data.shape[1],):
        raise ValueError(f"point has dimension {x.shape}, data has {data.shape[1]}")
    mean_sign = _unit_vectors(x - data).sum(axis=0) / data.shape[0]
    return float(np.clip(1.0 - np.linalg.norm(mean_sign), 0.0, 1.0))


def _univariate_depths(x: np.ndarray) -> np.ndarray:
    s = np.sort(x)
    below = np.searchsorted(s, x, side="left")
    above = x.size - np.searchsorted(s, x, side="right")
    return 1.0 - np.abs(below - above) / x.size


def sample_depths(data) -> np.ndarray:
    """Spatial depth of every observation with respect to the full sample.

    The self term contributes ``S(0) = 0``.  Univariate data use the
    count-based identity ``1 - |#below - #above| / n``, which is the same
    quantity without the O(n^2) pass.
    """
    data = as_data_matrix(data)
    n, d = data.shape
    if d == 1:
        return _univariate_depths(data[:, 0])
    out = np.empty(n)
    for start in range(0, n, _CHUNK):
        block = data[start:start + _CHUNK]
        mean_sign = _unit_vectors(block[:, None, :] - data[None, :, :]).sum(axis=1) / n
        out[start:start + _CHUNK] = 1.0 - np.sqrt(np.sum(mean_sign * mean_sign, axis=1))
    return np.clip(out, 0.0, 1.0)


def standardize(data) -> np.ndarray:
    """Map the sample to ``S^{-1/2} (X - mean)`` with ``S`` the sample covariance.

    Spatial depth of the standardized sample is affine invariant.  A
    singular covariance leaves the data centred but unscaled.
    """
    data = as_data_matrix(data)
    centred = data - data.mean(axis=0)
    if data.shape[1] == 1 or data.shape[0] <= data.shape[1]:
        return centred
    try:
        chol = np.linalg.cholesky(np.cov(centred, rowvar=False))
    except np.linalg.LinAlgError:
        return centred
    return np.linalg.solve(chol, centred.T).T


def depth_weights(data, floor: float = 1e-12, affine_invariant: bool = True) -> WeightVector:
    """Weights proportional to ``max(depth, floor)``.

    With ``affine_invariant`` (the default) multivariate samples are first
    standardized by their covariance, so the weights of an elliptical sample
    depend only on the Mahalanobis-type radius; univariate samples are
    unaffected.  If every depth is at or below ``floor`` (a sample of
    identical points) uniform weights are returned with ``degenerate=True``
    and a ``DegenerateDepths`` warning.
    """
    data = as_data_matrix(data)
    n = data.shape[0]
    if n < 2:
        raise InsufficientData("depth weights need at least 2 observations")
    depths = sample_depths(standardize(data) if affine_invariant else data)
    if np.all(depths <= floor):
        warnings.warn("all sample depths are at the floor; using uniform weights",
                      DegenerateDepths, stacklevel=2)
        return WeightVector(np.full(n, 1.0 / n), degenerate=True)
    clipped = np.maximum(depths, floor)
    w = clipped / clipped.sum()
    # renormalise once more so the sum is exact to rounding
    return WeightVector(w / w.sum())


def limit_constant_oracle(depth_values) -> float:
    """Sample analogue of ``E[D^2] / (E[D])^2``."""
    d = np.asarray(depth_values, dtype=float)
    if d.size == 0:
        raise ValueError("need at least one depth value")
    if np.any((d < 0) | (d > 1)):
        raise ValueError("depth values must lie in [0, 1]")
    m = d.mean()
    if m <= 0:
        raise ZeroMeanDepth("mean depth is zero")
    return float(np.mean(d * d) / (m * m))
