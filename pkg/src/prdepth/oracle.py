"""Closed-form robustness quantities for parametric models.

Everything here is population-level: contaminated medians and MADs of a
point-mass mixture, worst-case bias bounds for the deepest projection fit,
its influence function under a Gaussian model, and the exact replacement
breakdown formula.  The empirical counterparts live in :mod:`prdepth.roblab`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from .errors import (
    DimensionTooLarge,
    EpsilonOutOfRange,
    RootFindFailure,
    UnsupportedDistPair,
)

__all__ = [
    "DistSpec",
    "ContaminationSpec",
    "OracleBounds",
    "IFResult",
    "normal",
    "student_t",
    "cauchy",
    "ratio_distribution",
    "q_eps",
    "contaminated_median",
    "contaminated_mad",
    "abs_deviation_quantile",
    "mb_bounds",
    "influence_function",
    "rbp_formula",
    "abp_values",
]


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistSpec:
    """Parametric distribution with total cdf/quantile/density functions.

    ``kind`` is one of ``normal``, ``student_t``, ``cauchy``.  ``df`` is
    only meaningful for Student t.
    """

    kind: str
    loc: float = 0.0
    scale: float = 1.0
    df: float | None = None

    def __post_init__(self):
        if self.kind not in ("normal", "student_t", "cauchy"):
            raise ValueError(f"unknown distribution kind: {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.kind == "student_t" and not (self.df and self.df > 0):
            raise ValueError("student_t requires df > 0")

    def _dist(self):
        if self.kind == "normal":
            return stats.norm(self.loc, self.scale)
        if self.kind == "student_t":
            return stats.t(self.df, loc=self.loc, scale=self.scale)
        return stats.cauchy(self.loc, self.scale)

    def cdf(self, x):
        return self._dist().cdf(x)

    def quantile(self, q):
        return self._dist().ppf(q)

    def pdf(self, x):
        return self._dist().pdf(x)


def normal(mu: float = 0.0, sigma: float = 1.0) -> DistSpec:
    return DistSpec("normal", mu, sigma)


def student_t(nu: float, loc: float = 0.0, scale: float = 1.0) -> DistSpec:
    return DistSpec("student_t", loc, scale, df=nu)


def cauchy(loc: float = 0.0, scale: float = 1.0) -> DistSpec:
    return DistSpec("cauchy", loc, scale)


def ratio_distribution(y_dist: DistSpec, x_dist: DistSpec) -> DistSpec:
    """Distribution of y / x for independent centered normals: a Cauchy
    with scale sigma_y / sigma_x.  Other pairs are not supported."""
    if (y_dist.kind == "normal" and x_dist.kind == "normal"
            and y_dist.loc == 0.0 and x_dist.loc == 0.0):
        return cauchy(0.0, y_dist.scale / x_dist.scale)
    raise UnsupportedDistPair(
        "ratio distribution only available for centered normal pairs")


@dataclass(frozen=True)
class ContaminationSpec:
    """An epsilon fraction of point-mass contamination.

    ``point`` is the optional (y0, x0) atom; general contaminating
    distributions are out of computational reach, and worst cases are
    attained by atoms anyway.
    """

    epsilon: float
    point: tuple[float, np.ndarray] | None = None

    def __post_init__(self):
        if not (0.0 <= self.epsilon < 0.5):
            raise EpsilonOutOfRange(
                f"epsilon must lie in [0, 1/2), got {self.epsilon}")


# ---------------------------------------------------------------------------
# Contaminated quantiles
# ---------------------------------------------------------------------------

def q_eps(epsilon: float) -> float:
    """Contamination quantile level 1 / (2 (1 - eps)), in [1/2, 1)."""
    if not (0.0 <= epsilon < 0.5):
        raise EpsilonOutOfRange(
            f"epsilon must lie in [0, 1/2), got {epsilon}")
    return 1.0 / (2.0 * (1.0 - epsilon))


def abs_deviation_quantile(dist: DistSpec, center: float, prob: float,
                           tol: float = 1e-10) -> float:
    """Quantile of |X - center| at level prob, by monotone bisection on
    t -> cdf(center + t) - cdf(center - t)."""
    if not (0.0 < prob < 1.0):
        raise ValueError("prob must lie in (0, 1)")

    def mass(t: float) -> float:
        return float(dist.cdf(center + t) - dist.cdf(center - t))

    lo, hi = 0.0, 1.0 + abs(center) + dist.scale
    expansions = 0
    while mass(hi) < prob:
        hi *= 2.0
        expansions += 1
        if expansions > 60:
            raise RootFindFailure(
                f"could not bracket |X-c| quantile at prob={prob}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mass(mid) < prob:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def contaminated_median(dist: DistSpec, epsilon: float, x: float) -> float:
    """Median of (1-eps) F + eps * atom(x): the middle of {A, B, x} with
    A, B the F-quantiles at 1-q(eps) and q(eps)."""
    q = q_eps(epsilon)
    a = float(dist.quantile(1.0 - q))
    b = float(dist.quantile(q))
    return float(np.median([a, b, x]))


def contaminated_mad(dist: DistSpec, epsilon: float, x: float,
                     tol: float = 1e-10) -> float:
    """MAD of (1-eps) F + eps * atom(x): the middle of
    {m1, |x - med|, m2} where med is the contaminated median and m1, m2 are
    the |X - med| quantiles at 1-q(eps) and q(eps)."""
    q = q_eps(epsilon)
    med_c = contaminated_median(dist, epsilon, x)
    m1 = abs_deviation_quantile(dist, med_c, 1.0 - q, tol)
    m2 = abs_deviation_quantile(dist, med_c, q, tol)
    return float(np.median([m1, abs(x - med_c), m2]))


# ---------------------------------------------------------------------------
# Maximum-bias bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleBounds:
    """Population bias/scale bounds under an eps contamination budget.

    ``b`` is the projection quantile J^{-1}(q(eps)); the worst-case bias of
    the deepest fit lies in [b, 2b].  ``m1``/``m2`` sandwich the
    contaminated MAD of y about its clean median; ``c_scale``/``d_scale``
    are the upper/lower contaminated-scale bounds; ``a1``/``b1`` the |y|
    quantiles entering them.
    """

    q_eps: float
    A: float
    B: float
    m1: float
    m2: float
    b: float
    mb_lower: float
    mb_upper: float
    c_scale: float
    d_scale: float
    a1: float
    b1: float


def mb_bounds(j_dist: DistSpec, epsilon: float,
              y_dist: DistSpec | None = None) -> OracleBounds:
    """Maximum-bias interval [b, 2b] with b = J^{-1}(q(eps)).

    ``j_dist`` is the distribution of the projection ratio y / x'v, assumed
    symmetric about 0 (for centered normal y and x'v it is standard
    Cauchy).  With a ``y_dist`` the contaminated-scale bounds are filled in
    as well; otherwise they are NaN.
    """
    if not (0.0 < epsilon < 0.5):
        raise EpsilonOutOfRange(
            f"epsilon must lie in (0, 1/2), got {epsilon}")
    med_j = float(j_dist.quantile(0.5))
    ref = abs(float(j_dist.quantile(0.75))) + 1.0
    if abs(med_j) > 1e-8 * ref:
        raise ValueError("j_dist must be symmetric about 0")
    q = q_eps(epsilon)
    a = float(j_dist.quantile(1.0 - q))
    b = float(j_dist.quantile(q))
    if y_dist is not None:
        med_y = float(y_dist.quantile(0.5))
        m1 = abs_deviation_quantile(y_dist, med_y, 1.0 - q)
        m2 = abs_deviation_quantile(y_dist, med_y, q)
        a1 = abs_deviation_quantile(y_dist, 0.0, 1.0 - q)
        b1 = abs_deviation_quantile(y_dist, 0.0, q)
        c_scale = abs_deviation_quantile(y_dist, a1, q)
        d_scale = abs_deviation_quantile(y_dist, b1, 1.0 - q)
    else:
        m1 = m2 = a1 = b1 = c_scale = d_scale = float("nan")
    return OracleBounds(q_eps=q, A=a, B=b, m1=m1, m2=m2, b=b,
                        mb_lower=b, mb_upper=2.0 * b,
                        c_scale=c_scale, d_scale=d_scale, a1=a1, b1=b1)


# ---------------------------------------------------------------------------
# Influence function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IFResult:
    """Influence of an infinitesimal atom, in canonical orientation.

    Only the first coordinate can be nonzero; ``gamma_star`` is the
    gross-error sensitivity (supremum of |first coordinate| over a ratio
    grid).
    """

    vector: np.ndarray
    gamma_star: float | None


def _if_shift(z0: float) -> float:
    # min{|z0| I(|z0| != 1/2) - 1, 1}, implemented verbatim: the indicator
    # zeroes the |z0| term exactly at |z0| = 1/2.
    indicator = 1.0 if abs(z0) != 0.5 else 0.0
    return min(abs(z0) * indicator - 1.0, 1.0)


def influence_function(z0: float, y_dist: DistSpec, x_dist: DistSpec,
                       p: int = 2,
                       gamma_grid: np.ndarray | None = None) -> IFResult:
    """Influence of an atom with response/leverage ratio z0 = y0 / x01.

    Supported model: independent centered normal y and x coordinates, so
    y / x1 is Cauchy.  The value is
    ``shift / (2 f_ratio(shift) F_y^{-1}(3/4))`` in the first coordinate and
    zero elsewhere, with shift = min{|z0| I(|z0| != 1/2) - 1, 1}.
    """
    if not (y_dist.kind == "normal" and x_dist.kind == "normal"
            and y_dist.loc == 0.0 and x_dist.loc == 0.0):
        raise UnsupportedDistPair(
            "influence function implemented for centered normal y and x")
    if p < 1:
        raise ValueError("p must be >= 1")
    ratio = ratio_distribution(y_dist, x_dist)
    y_q3 = float(y_dist.quantile(0.75))
    if not y_q3 > 0:
        raise ValueError("F_y^{-1}(3/4) must be positive")

    def first_coord(z: float) -> float:
        shift = _if_shift(z)
        dens = float(ratio.pdf(shift))
        return shift / (2.0 * dens * y_q3)

    vec = np.zeros(p)
    vec[0] = first_coord(z0)
    if gamma_grid is None:
        gamma_grid = np.concatenate([
            np.linspace(-5.0, 5.0, 2001),
            [-1e6, -1e3, -100.0, -10.0, 10.0, 100.0, 1e3, 1e6],
        ])
    gamma_star = max(abs(first_coord(float(z))) for z in gamma_grid)
    return IFResult(vector=vec, gamma_star=gamma_star)


# ---------------------------------------------------------------------------
# Breakdown values
# ---------------------------------------------------------------------------

def rbp_formula(n: int, p: int) -> Fraction:
    """Exact replacement breakdown point of the deepest projection fit:
    floor((n+1)/2)/n for p = 1, (floor(n/2) - p + 2)/n for p > 1.

    Requires 1 <= p < floor(n/2) + 2.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (1 <= p < n // 2 + 2):
        raise DimensionTooLarge(
            f"need 1 <= p < floor(n/2)+2 = {n // 2 + 2}, got p={p}")
    if p == 1:
        return Fraction((n + 1) // 2, n)
    return Fraction(n // 2 - p + 2, n)


def abp_values() -> dict[str, float]:
    """Asymptotic breakdown points: deepest projection fit 1/2, deepest
    count-depth line 1/3, least squares 0."""
    return {"prd": 0.5, "rd": 1.0 / 3.0, "ls": 0.0}
