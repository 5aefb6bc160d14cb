"""Univariate robust estimators and the empirical unfitness/depth functions.

The depth of a candidate coefficient vector ``beta`` is driven by projected
residuals: for a unit direction ``v``, each observation contributes
``(y_i - w_i'beta) / (w_i'v)`` (rows with near-zero denominator are skipped),
a robust univariate location estimate of that set is scaled by ``MAD({y_i})``,
and the worst direction wins.  Depth is ``1 / (1 + unfitness)``, so a perfect
fit consensus has depth 1 and hopeless candidates approach 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllDirectionsDegenerate,
    DegenerateScale,
    EmptyInput,
    NoValidResiduals,
    ZeroWeightSum,
)

__all__ = [
    "Dataset",
    "InnerEstimator",
    "DepthReport",
    "median",
    "mad",
    "pd_n",
    "pwm",
    "denominator_threshold",
    "uf_v",
    "uf",
    "prd",
]

# Default PWM tuning (weight decay and cutoff).
PWM_K = 3.0
PWM_C = 3.5


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass
class Dataset:
    """Regression sample of n rows (y_i, x_i).

    Parameters
    ----------
    y : array_like, shape (n,)
        Responses.
    x : array_like, shape (n, p-1) or (n, p)
        Predictors.  With ``with_intercept`` the design row is
        ``w_i = (1, x_i')`` of length p; otherwise ``w_i = x_i``.
    with_intercept : bool
        Whether to prepend a constant column to the design.

    Attributes
    ----------
    w : ndarray, shape (n, p)
        The design matrix actually used by every operation.
    n, p : int
        Sample size and coefficient dimension.
    """

    y: np.ndarray
    x: np.ndarray
    with_intercept: bool = True
    w: np.ndarray = field(init=False, repr=False)
    n: int = field(init=False)
    p: int = field(init=False)

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.shape[0] != y.shape[0]:
            raise ValueError(
                f"y has {y.shape[0]} rows but x has {x.shape[0]}")
        if not (np.isfinite(y).all() and np.isfinite(x).all()):
            raise ValueError("dataset values must be finite")
        if self.with_intercept:
            w = np.hstack([np.ones((x.shape[0], 1)), x])
        else:
            w = x
        if y.shape[0] < w.shape[1]:
            raise ValueError(
                f"need n >= p, got n={y.shape[0]}, p={w.shape[1]}")
        self.y = y
        self.x = x
        self.w = w
        self.n = y.shape[0]
        self.p = w.shape[1]

    def in_general_position(self, max_subsets: int = 200_000) -> bool:
        """Check that every p x p design submatrix is nonsingular.

        Combinatorial; refuses to run past ``max_subsets`` subsets.
        Advisory only -- nothing in the library enforces it.
        """
        n, p = self.n, self.p
        if math.comb(n, p) > max_subsets:
            raise ValueError(
                f"C({n},{p}) subsets exceed max_subsets={max_subsets}")
        scale = 1.0 + np.abs(self.w).max()
        for idx in itertools.combinations(range(n), p):
            sub = self.w[list(idx)]
            if abs(np.linalg.det(sub)) <= 1e-12 * scale**p:
                return False
        return True


@dataclass(frozen=True)
class InnerEstimator:
    """Univariate location estimator applied to projected residual sets.

    ``kind`` is ``"median"`` or ``"pwm"``; the latter is the depth-weighted
    mean with decay ``k`` and cutoff ``c``.
    """

    kind: str = "median"
    k: float = PWM_K
    c: float = PWM_C

    def __post_init__(self):
        if self.kind not in ("median", "pwm"):
            raise ValueError(f"unknown inner estimator kind: {self.kind!r}")
        if self.kind == "pwm" and not (self.k > 0 and self.c > 0):
            raise ValueError("pwm requires k > 0 and c > 0")

    @classmethod
    def median(cls) -> "InnerEstimator":
        return cls("median")

    @classmethod
    def pwm(cls, k: float = PWM_K, c: float = PWM_C) -> "InnerEstimator":
        return cls("pwm", k, c)


@dataclass(frozen=True)
class DepthReport:
    """Depth evaluation of one coefficient vector."""

    beta: np.ndarray
    uf: float
    prd: float
    n_directions_used: int


# ---------------------------------------------------------------------------
# Univariate estimators
# ---------------------------------------------------------------------------

def median(samples) -> float:
    """Sample median: middle order statistic, midpoint for even length."""
    a = np.asarray(samples, dtype=float).ravel()
    if a.size == 0:
        raise EmptyInput("median of an empty sample")
    return float(np.median(a))


def mad(samples) -> float:
    """Median absolute deviation from the median (raw, no 1.4826 factor)."""
    a = np.asarray(samples, dtype=float).ravel()
    if a.size == 0:
        raise EmptyInput("mad of an empty sample")
    return float(np.median(np.abs(a - np.median(a))))


def pd_n(point: float, samples) -> float:
    """Projection depth of a point in a univariate sample.

    ``1 / (1 + |point - median| / MAD)``; requires a positive MAD.
    """
    a = np.asarray(samples, dtype=float).ravel()
    if a.size == 0:
        raise EmptyInput("pd_n of an empty sample")
    m = np.median(a)
    s = np.median(np.abs(a - m))
    if s <= 0.0:
        raise DegenerateScale("pd_n needs MAD > 0")
    return float(1.0 / (1.0 + abs(point - m) / s))


def _pwm_weights(r: np.ndarray, k: float, c: float) -> np.ndarray:
    # w(r) = I(r<c)(exp(-k(1-r/c)^2)-exp(-k))/(1-exp(-k)) + I(r>=c).
    # Depth values lie in (0,1], so with c > 1 the first branch always fires;
    # the second branch is kept for smaller cutoffs.
    ek = math.exp(-k)
    inner = (np.exp(-k * (1.0 - r / c) ** 2) - ek) / (1.0 - ek)
    return np.where(r < c, inner, 1.0)


def pwm(samples, k: float = PWM_K, c: float = PWM_C) -> float:
    """Projection-depth weighted mean of a univariate sample.

    Each point is weighted by ``w(PD_n(x_i))`` and averaged.  Requires a
    positive MAD; raises :class:`ZeroWeightSum` if every weight vanishes
    (impossible for c > 1, guarded anyway).
    """
    if not (k > 0 and c > 0):
        raise ValueError("pwm requires k > 0 and c > 0")
    a = np.asarray(samples, dtype=float).ravel()
    if a.size == 0:
        raise EmptyInput("pwm of an empty sample")
    m = np.median(a)
    s = np.median(np.abs(a - m))
    if s <= 0.0:
        raise DegenerateScale("pwm needs MAD > 0")
    depth = 1.0 / (1.0 + np.abs(a - m) / s)
    w = _pwm_weights(depth, k, c)
    total = w.sum()
    if total <= 0.0:
        raise ZeroWeightSum("all pwm weights are zero")
    return float((w * a).sum() / total)


def _location(values: np.ndarray, inner: InnerEstimator) -> float:
    """Inner location of a projected-residual set.

    For the weighted mean, a zero-MAD set falls back to its median (the
    continuity limit of the weights); the public :func:`pwm` keeps its
    strict positive-scale contract.
    """
    if inner.kind == "median":
        return float(np.median(values))
    m = np.median(values)
    s = np.median(np.abs(values - m))
    if s <= 0.0:
        return float(m)
    depth = 1.0 / (1.0 + np.abs(values - m) / s)
    w = _pwm_weights(depth, inner.k, inner.c)
    total = w.sum()
    if total <= 0.0:
        return float(m)
    return float((w * values).sum() / total)


# ---------------------------------------------------------------------------
# Unfitness and depth
# ---------------------------------------------------------------------------

def denominator_threshold(w: np.ndarray) -> float:
    """Exclusion threshold for projection denominators w_i'v."""
    norms = np.linalg.norm(np.asarray(w, dtype=float), axis=-1)
    return 1e-12 * (1.0 + float(norms.max()))


def _check_unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector (within 1e-12)")
    return v


def uf_v(beta, v, data: Dataset, inner: InnerEstimator | None = None) -> float:
    """Unfitness of ``beta`` along one unit direction.

    ``|T({(y_i - w_i'beta)/(w_i'v) : |w_i'v| > tau})| / MAD({y_i})`` with T
    the inner location estimator.  Raises :class:`NoValidResiduals` when all
    denominators fall below threshold (the caller skips such directions) and
    :class:`DegenerateScale` when MAD of y is zero.
    """
    inner = inner or InnerEstimator.median()
    beta = np.asarray(beta, dtype=float).ravel()
    v = _check_unit(v)
    s_y = mad(data.y)
    if s_y <= 0.0:
        raise DegenerateScale("MAD of responses is zero")
    den = data.w @ v
    valid = np.abs(den) > denominator_threshold(data.w)
    if not valid.any():
        raise NoValidResiduals("all projection denominators below threshold")
    res = data.y - data.w @ beta
    z = res[valid] / den[valid]
    return abs(_location(z, inner)) / s_y


def uf(beta, data: Dataset, directions, inner: InnerEstimator | None = None) -> float:
    """Unfitness of ``beta``: max of :func:`uf_v` over a direction set.

    Directions with no valid residuals are skipped; if every direction is
    skipped, raises :class:`AllDirectionsDegenerate`.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if directions.shape[0] == 0:
        raise ValueError("directions must be nonempty")
    best = -np.inf
    used = 0
    for v in directions:
        try:
            val = uf_v(beta, v, data, inner)
        except NoValidResiduals:
            continue
        used += 1
        if val > best:
            best = val
    if used == 0:
        raise AllDirectionsDegenerate("no direction produced valid residuals")
    return best


def prd(beta, data: Dataset, directions, inner: InnerEstimator | None = None) -> DepthReport:
    """Projection regression depth report: ``prd = 1 / (1 + uf)``."""
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if directions.shape[0] == 0:
        raise ValueError("directions must be nonempty")
    best = -np.inf
    used = 0
    for v in directions:
        try:
            val = uf_v(beta, v, data, inner)
        except NoValidResiduals:
            continue
        used += 1
        if val > best:
            best = val
    if used == 0:
        raise AllDirectionsDegenerate("no direction produced valid residuals")
    beta = np.asarray(beta, dtype=float).ravel()
    return DepthReport(beta=beta, uf=best, prd=1.0 / (1.0 + best),
                       n_directions_used=used)
