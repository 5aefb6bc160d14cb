"""Deepest-projection fitting and the comparator estimators.

The deepest fit is located by an approximate search: exact-fit candidates
from random row subsets are scored by unfitness over a frozen direction set,
the best p+1 candidates seed a downhill-simplex refinement restricted to
their convex hull, and the whole procedure is replicated with independent
substreams, keeping the deepest result.

Also provided: ordinary least squares and, for simple regression, the
count-based regression depth of a line and the deepest-line fit over all
pairs of points.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from . import _kernels
from .depthcore import (
    Dataset,
    InnerEstimator,
    denominator_threshold,
    mad,
)
from .errors import (
    AllDirectionsDegenerate,
    DegenerateScale,
    NoNonsingularSubset,
    RankDeficient,
    UnsupportedDimension,
)

__all__ = [
    "Objective",
    "FitConfig",
    "FitResult",
    "generate_candidates",
    "generate_directions",
    "fit_prd",
    "fit_ls",
    "rdepth_simple",
    "fit_rd_simple",
    "default_fit_config",
]

STRATEGIC_PERTURBATION = 1e-10


# ---------------------------------------------------------------------------
# Configuration types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Objective:
    """Per-direction score of the projected residual set.

    kind:
      * ``abs_of_median`` -- |T(z)| with T the inner estimator (the default
        deepest fit);
      * ``median_of_abs`` -- median of |z| (variant 1);
      * ``hth_order_abs`` -- h-th smallest |z| (variants 2 and 3);
      * ``sum_smallest_abs`` -- sum of the h smallest |z|.

    ``h`` may be left None, in which case it is resolved from (n, p) via
    ``h_rule``: ``"half_plus_one"`` gives floor(n/2)+1, ``"half_plus_half_p"``
    gives floor(n/2)+floor((p+1)/2).
    """

    kind: str = "abs_of_median"
    h: int | None = None
    h_rule: str = "half_plus_one"

    _KINDS = ("abs_of_median", "median_of_abs", "hth_order_abs",
              "sum_smallest_abs")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown objective kind: {self.kind!r}")
        if self.h is not None and self.h < 1:
            raise ValueError("h must be >= 1")
        if self.h_rule not in ("half_plus_one", "half_plus_half_p"):
            raise ValueError(f"unknown h rule: {self.h_rule!r}")

    @classmethod
    def t_star(cls) -> "Objective":
        return cls("abs_of_median")

    @classmethod
    def t1(cls) -> "Objective":
        return cls("median_of_abs")

    @classmethod
    def t2(cls) -> "Objective":
        return cls("hth_order_abs", h_rule="half_plus_one")

    @classmethod
    def t3(cls) -> "Objective":
        return cls("hth_order_abs", h_rule="half_plus_half_p")

    def resolve_h(self, n: int, p: int) -> int | None:
        if self.kind in ("abs_of_median", "median_of_abs"):
            return None
        if self.h is not None:
            if self.h > n:
                raise ValueError(f"h={self.h} exceeds sample size {n}")
            return self.h
        if self.h_rule == "half_plus_one":
            return n // 2 + 1
        return n // 2 + (p + 1) // 2


@dataclass(frozen=True)
class FitConfig:
    """Tuning for the deepest-fit search."""

    n_beta: int
    n_dir: int
    replications: int = 2
    seed: int = 0
    refine_max_iter: int = 200
    refine_tol: float = 1e-8
    inner: InnerEstimator = field(default_factory=InnerEstimator.median)
    objective: Objective = field(default_factory=Objective.t_star)

    def __post_init__(self):
        if self.n_beta < 1:
            raise ValueError("n_beta must be >= 1")
        if self.n_dir < 1:
            raise ValueError("n_dir must be >= 1")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.refine_max_iter < 1:
            raise ValueError("refine_max_iter must be >= 1")
        if not self.refine_tol > 0:
            raise ValueError("refine_tol must be > 0")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class FitResult:
    """Deepest-fit output: coefficients with their depth."""

    beta: np.ndarray
    prd: float
    uf: float
    replicate_best: int
    candidates_evaluated: int


def default_fit_config(n: int, p: int, seed: int = 0,
                       inner: InnerEstimator | None = None,
                       objective: Objective | None = None,
                       replications: int = 2,
                       refine_max_iter: int = 200,
                       refine_tol: float = 1e-8) -> FitConfig:
    """Tuning defaults: n_dir = 100 + 2n; n_beta grows with n but is capped
    by the number of distinct p-subsets (n(n-1)/2 for simple regression)."""
    n_beta = min(math.comb(n, p), max(p + 1, 30 + 2 * n))
    return FitConfig(
        n_beta=n_beta,
        n_dir=100 + 2 * n,
        replications=replications,
        seed=seed,
        refine_max_iter=refine_max_iter,
        refine_tol=refine_tol,
        inner=inner or InnerEstimator.median(),
        objective=objective or Objective.t_star(),
    )


# ---------------------------------------------------------------------------
# Candidate and direction generation
# ---------------------------------------------------------------------------

def _exact_fit(data: Dataset, idx) -> np.ndarray | None:
    sub = data.w[list(idx)]
    try:
        beta = np.linalg.solve(sub, data.y[list(idx)])
    except np.linalg.LinAlgError:
        return None
    if not np.isfinite(beta).all():
        return None
    return beta


def generate_candidates(data: Dataset, n_beta: int, rng: np.random.Generator) -> np.ndarray:
    """Exact-fit coefficient candidates from random p-subsets of rows.

    When C(n, p) <= n_beta every subset is used (sampling without
    replacement is exhaustive); otherwise distinct subsets are drawn with
    rejection of duplicates and of singular systems, up to a retry cap.

    Returns an array of shape (m, p), 1 <= m <= n_beta.
    """
    if n_beta < 1:
        raise ValueError("n_beta must be >= 1")
    n, p = data.n, data.p
    cands: list[np.ndarray] = []
    if math.comb(n, p) <= n_beta:
        for idx in itertools.combinations(range(n), p):
            beta = _exact_fit(data, idx)
            if beta is not None:
                cands.append(beta)
    else:
        seen: set[tuple[int, ...]] = set()
        attempts = 0
        cap = 50 * n_beta + 100
        while len(cands) < n_beta and attempts < cap:
            attempts += 1
            idx = tuple(sorted(rng.choice(n, size=p, replace=False).tolist()))
            if idx in seen:
                continue
            seen.add(idx)
            beta = _exact_fit(data, idx)
            if beta is not None:
                cands.append(beta)
    if not cands:
        raise NoNonsingularSubset(
            "no nonsingular p-subset found; data look degenerate")
    return np.array(cands)


def generate_directions(data: Dataset, n_dir: int, rng: np.random.Generator) -> np.ndarray:
    """Unit search directions: uniform random ones plus strategic ones.

    When n_dir >= 2n the set is 2n strategic directions (for each row i a
    unit vector orthogonal to w_i, perturbed by +-1e-10 in the first
    coordinate and renormalized) plus n_dir - 2n random; otherwise all
    random.  Random vectors are normalized iid Gaussians.
    """
    if n_dir < 1:
        raise ValueError("n_dir must be >= 1")
    n, p = data.n, data.p
    strategic = n_dir >= 2 * n
    n_random = n_dir - 2 * n if strategic else n_dir
    blocks = []
    if n_random > 0:
        g = rng.standard_normal((n_random, p))
        norms = np.linalg.norm(g, axis=1)
        while (norms == 0).any():  # measure-zero safeguard
            bad = norms == 0
            g[bad] = rng.standard_normal((int(bad.sum()), p))
            norms = np.linalg.norm(g, axis=1)
        blocks.append(g / norms[:, None])
    if strategic:
        out = np.empty((2 * n, p))
        for i in range(n):
            w = data.w[i]
            if p == 2:
                base = np.array([w[1], -w[0]])
            else:
                base = rng.standard_normal(p)
                wn = np.linalg.norm(w)
                if wn > 0:
                    wh = w / wn
                    base = base - (base @ wh) * wh
                while np.linalg.norm(base) < 1e-12:
                    base = rng.standard_normal(p)
                    if wn > 0:
                        base = base - (base @ wh) * wh
            bn = np.linalg.norm(base)
            base = base / bn if bn > 0 else np.eye(p)[0]
            for j, sgn in enumerate((1.0, -1.0)):
                d = base.copy()
                d[0] += sgn * STRATEGIC_PERTURBATION
                out[2 * i + j] = d / np.linalg.norm(d)
        blocks.append(out)
    return np.vstack(blocks)


# ---------------------------------------------------------------------------
# Vectorized unfitness scoring
# ---------------------------------------------------------------------------

def _pwm_rows(z: np.ndarray, k: float, c: float) -> np.ndarray:
    """Weighted-mean location along the last axis; zero-MAD slices fall back
    to their median (continuity limit of the weights)."""
    med = np.median(z, axis=-1, keepdims=True)
    adev = np.abs(z - med)
    madz = np.median(adev, axis=-1, keepdims=True)
    safe = np.where(madz > 0, madz, 1.0)
    depth = 1.0 / (1.0 + adev / safe)
    ek = math.exp(-k)
    wts = np.where(depth < c,
                   (np.exp(-k * (1.0 - depth / c) ** 2) - ek) / (1.0 - ek),
                   1.0)
    tot = wts.sum(axis=-1)
    val = np.divide((wts * z).sum(axis=-1), tot,
                    out=np.zeros(tot.shape), where=tot > 0)
    fallback = (madz[..., 0] <= 0) | (tot <= 0)
    return np.where(fallback, med[..., 0], val)


def _direction_score(z: np.ndarray, inner: InnerEstimator,
                     objective: Objective, h: int | None) -> np.ndarray:
    """Score along the last axis of z (the valid projected residuals)."""
    kind = objective.kind
    if kind == "abs_of_median":
        if inner.kind == "median":
            return np.abs(np.median(z, axis=-1))
        return np.abs(_pwm_rows(z, inner.k, inner.c))
    az = np.abs(z)
    if kind == "median_of_abs":
        return np.median(az, axis=-1)
    h_eff = min(h, az.shape[-1])
    part = np.partition(az, h_eff - 1, axis=-1)
    if kind == "hth_order_abs":
        return part[..., h_eff - 1]
    return part[..., :h_eff].sum(axis=-1)


class _UFScorer:
    """Precomputed direction machinery for scoring many candidates.

    Denominators, validity masks, and the response MAD depend only on the
    data and the direction set, so they are computed once per replicate and
    reused by candidate scoring and simplex refinement.
    """

    def __init__(self, data: Dataset, dirs: np.ndarray,
                 inner: InnerEstimator, objective: Objective):
        self.w = data.w
        self.y = data.y
        self.inner = inner
        self.objective = objective
        self.h = objective.resolve_h(data.n, data.p)
        self.mad_y = mad(data.y)
        if self.mad_y <= 0:
            raise DegenerateScale("MAD of responses is zero")
        den = dirs @ data.w.T                       # (d, n)
        valid = np.abs(den) > denominator_threshold(data.w)
        counts = valid.sum(axis=1)
        usable = counts > 0
        full = usable & (counts == data.n)
        self.full_den = den[full]
        self.partial = [(den[i], valid[i])
                        for i in np.flatnonzero(usable & ~full)]
        self.n_used = int(usable.sum())
        if self.n_used == 0:
            raise AllDirectionsDegenerate(
                "no direction produced valid residuals")

    def score(self, betas: np.ndarray, chunk: int = 48) -> np.ndarray:
        """Unfitness of each row of betas over the frozen direction set."""
        B = np.atleast_2d(np.asarray(betas, dtype=float))
        res = np.ascontiguousarray(self.y[None, :] - B @ self.w.T)  # (m, n)
        best = np.full(B.shape[0], -np.inf)
        use_kernel = (_kernels.HAVE_NUMBA
                      and self.objective.kind == "abs_of_median"
                      and self.full_den.shape[0] > 0)
        if use_kernel:
            vals = np.empty((B.shape[0], self.full_den.shape[0]))
            if self.inner.kind == "median":
                _kernels.median_abs_scores(res, self.full_den, vals)
            else:
                _kernels.pwm_abs_scores(res, self.full_den,
                                        self.inner.k, self.inner.c, vals)
            np.maximum(best, vals.max(axis=1), out=best)
        else:
            for lo in range(0, self.full_den.shape[0], chunk):
                den = self.full_den[lo:lo + chunk]      # (c, n)
                z = res[:, None, :] / den[None, :, :]   # (m, c, n)
                val = _direction_score(z, self.inner, self.objective, self.h)
                np.maximum(best, val.max(axis=1), out=best)
        for den, mask in self.partial:
            z = res[:, mask] / den[mask]
            val = _direction_score(z, self.inner, self.objective, self.h)
            np.maximum(best, val, out=best)
        return best / self.mad_y

    def score_one(self, beta: np.ndarray) -> float:
        return float(self.score(beta[None, :])[0])


# ---------------------------------------------------------------------------
# Downhill simplex restricted to the seed hull
# ---------------------------------------------------------------------------

def _clip_to_hull(hull: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Nearest convex combination of the hull generators.

    Interior points pass through unchanged (barycentric test); exterior
    proposals are projected by nonnegative least squares on barycentric
    weights with the sum-to-one constraint enforced via an augmented row.
    """
    k = hull.shape[0]
    aug = np.vstack([hull.T, np.ones((1, k))])
    target = np.concatenate([x, [1.0]])
    lam, *_ = np.linalg.lstsq(aug, target, rcond=None)
    if (lam >= -1e-12).all() and abs(aug @ lam - target).max() <= 1e-9 * (
            1.0 + np.abs(target).max()):
        return x
    rho = 1e6 * (1.0 + max(np.abs(hull).max(), np.abs(x).max()))
    a = np.vstack([hull.T, rho * np.ones((1, k))])
    b = np.concatenate([x, [rho]])
    lam, _ = nnls(a, b)
    total = lam.sum()
    if total <= 0:
        return hull.mean(axis=0)
    return hull.T @ (lam / total)


def _nelder_mead_hull(seeds: np.ndarray, seed_vals: np.ndarray,
                      scorer: _UFScorer, max_iter: int,
                      rel_tol: float) -> tuple[np.ndarray, float]:
    """Minimize unfitness over the convex hull of the seed points.

    Standard reflect/expand/contract/shrink moves; every proposal is
    clipped to the hull of the original seeds.  Converged when the ordered
    vertex values agree to within rel_tol relative to the starting best (a
    scale-free rule, so fits commute with response rescaling), or at the
    iteration budget.
    """
    hull = seeds.copy()
    v = seeds.copy()
    f = seed_vals.astype(float).copy()
    order = np.argsort(f, kind="stable")
    v, f = v[order], f[order]
    if f[0] <= 0.0:
        return v[0], float(f[0])
    thresh = rel_tol * f[0]
    for _ in range(max_iter):
        if f[0] <= 0.0 or f[-1] - f[0] <= thresh:
            break
        centroid = v[:-1].mean(axis=0)
        xr = _clip_to_hull(hull, centroid + (centroid - v[-1]))
        fr = scorer.score_one(xr)
        if fr < f[0]:
            xe = _clip_to_hull(hull, centroid + 2.0 * (xr - centroid))
            fe = scorer.score_one(xe)
            if fe < fr:
                v[-1], f[-1] = xe, fe
            else:
                v[-1], f[-1] = xr, fr
        elif fr < f[-2]:
            v[-1], f[-1] = xr, fr
        else:
            if fr < f[-1]:
                xc = _clip_to_hull(hull, centroid + 0.5 * (xr - centroid))
                fc = scorer.score_one(xc)
                if fc <= fr:
                    v[-1], f[-1] = xc, fc
                else:
                    v[1:] = v[0] + 0.5 * (v[1:] - v[0])
                    f[1:] = scorer.score(v[1:])
            else:
                xc = _clip_to_hull(hull, centroid + 0.5 * (v[-1] - centroid))
                fc = scorer.score_one(xc)
                if fc < f[-1]:
                    v[-1], f[-1] = xc, fc
                else:
                    v[1:] = v[0] + 0.5 * (v[1:] - v[0])
                    f[1:] = scorer.score(v[1:])
        order = np.argsort(f, kind="stable")
        v, f = v[order], f[order]
    return v[0], float(f[0])


# ---------------------------------------------------------------------------
# Deepest-projection fit
# ---------------------------------------------------------------------------

def _run_replicate(data: Dataset, config: FitConfig, rep: int):
    rng = np.random.default_rng((config.seed, rep))
    cands = generate_candidates(data, config.n_beta, rng)
    dirs = generate_directions(data, config.n_dir, rng)
    scorer = _UFScorer(data, dirs, config.inner, config.objective)
    ufs = scorer.score(cands)
    order = np.argsort(ufs, kind="stable")
    k = min(data.p + 1, cands.shape[0])
    seeds = cands[order[:k]]
    seed_vals = ufs[order[:k]]
    if k >= 2:
        beta, val = _nelder_mead_hull(seeds, seed_vals, scorer,
                                      config.refine_max_iter,
                                      config.refine_tol)
    else:
        beta, val = seeds[0], float(seed_vals[0])
    return beta, val, cands.shape[0], dirs


def fit_prd(data: Dataset, config: FitConfig, threads: int = 1) -> FitResult:
    """Approximate deepest-projection fit.

    Per replicate: generate candidates and a frozen direction set, score
    every candidate, refine over the hull of the p+1 best, and keep the
    replicate of maximal depth.  Replicates whose unfitness ties the winner
    within the relative refine tolerance are averaged coordinate-wise and
    the average re-scored.

    ``threads`` only parallelizes replicates; results are identical for any
    thread count because each replicate owns a substream derived from
    (seed, replicate index).
    """
    if mad(data.y) <= 0:
        raise DegenerateScale("MAD of responses is zero")
    if config.n_beta < data.p + 1:
        raise ValueError(
            f"n_beta={config.n_beta} below p+1={data.p + 1}")
    reps = range(config.replications)
    if threads > 1 and config.replications > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda r: _run_replicate(data, config, r), reps))
    else:
        results = [_run_replicate(data, config, r) for r in reps]

    total_cands = int(sum(r[2] for r in results))
    if config.replications == 1:
        beta, val = results[0][0], results[0][1]
        return FitResult(beta=beta, prd=1.0 / (1.0 + val), uf=val,
                         replicate_best=0, candidates_evaluated=total_cands)

    # Updated depth: re-score every replicate's result on the union of all
    # replicate direction sets, so the cross-replicate comparison does not
    # reward a replicate merely for having drawn a weak direction set.
    union = np.vstack([r[3] for r in results])
    scorer = _UFScorer(data, union, config.inner, config.objective)
    betas = np.array([r[0] for r in results])
    ufs = scorer.score(betas)
    uf_min = float(ufs.min())
    tied = np.flatnonzero(ufs - uf_min <= config.refine_tol * uf_min)
    best_idx = int(tied[0])
    if tied.size == 1:
        beta, val = betas[best_idx], float(ufs[best_idx])
    else:
        beta = betas[tied].mean(axis=0)
        val = scorer.score_one(beta)
    return FitResult(beta=beta, prd=1.0 / (1.0 + val), uf=val,
                     replicate_best=best_idx,
                     candidates_evaluated=total_cands)


# ---------------------------------------------------------------------------
# Comparators: least squares and the deepest regression-depth line
# ---------------------------------------------------------------------------

def fit_ls(data: Dataset) -> np.ndarray:
    """Least-squares coefficients via orthogonal decomposition (lstsq)."""
    beta, _, rank, _ = np.linalg.lstsq(data.w, data.y, rcond=None)
    if rank < data.p:
        raise RankDeficient(f"design rank {rank} < p = {data.p}")
    return beta


def _residual_tolerance(data: Dataset) -> float:
    # Zero residuals must count on both sides of the sign sweep; exact fits
    # built in floating point land within this band.
    return 1e-9 * (1.0 + float(np.abs(data.y).max()))


def _sweep_gaps(xs: np.ndarray) -> np.ndarray:
    n = xs.shape[0]
    interior = np.flatnonzero(xs[1:] > xs[:-1]) + 1
    return np.concatenate([[0], interior, [n]])


def rdepth_simple(beta, data: Dataset) -> int:
    """Count-based regression depth of a line (simple regression only).

    Sweeps every candidate breakpoint u between distinct x values (plus the
    two outer gaps) and counts, for each of the two sign patterns, how many
    observations block it; zero residuals block both patterns.  The depth is
    the minimum count: the smallest number of removals making the line a
    nonfit.
    """
    if data.p != 2 or not data.with_intercept:
        raise UnsupportedDimension(
            "regression depth implemented for simple regression (p=2, "
            "intercept) only")
    beta = np.asarray(beta, dtype=float).ravel()
    x = data.x[:, 0]
    r = data.y - data.w @ beta
    tol = _residual_tolerance(data)
    order = np.argsort(x, kind="stable")
    xs, rs = x[order], r[order]
    a = np.concatenate([[0], np.cumsum(rs >= -tol)])
    b = np.concatenate([[0], np.cumsum(rs <= tol)])
    gaps = _sweep_gaps(xs)
    d1 = a[gaps] + (b[-1] - b[gaps])
    d2 = b[gaps] + (a[-1] - a[gaps])
    return int(np.minimum(d1, d2).min())


def fit_rd_simple(data: Dataset, chunk: int = 2048) -> np.ndarray:
    """Deepest regression-depth line for simple regression.

    Maximizes :func:`rdepth_simple` over all lines through pairs of data
    points; ties at the maximal depth are resolved by averaging the tied
    (slope, intercept) pairs.  Returns beta = (intercept, slope).
    """
    if data.p != 2 or not data.with_intercept:
        raise UnsupportedDimension(
            "deepest-depth line implemented for simple regression only")
    x = data.x[:, 0]
    y = data.y
    n = data.n
    ii, jj = np.triu_indices(n, k=1)
    dx = x[jj] - x[ii]
    ok = dx != 0
    ii, jj, dx = ii[ok], jj[ok], dx[ok]
    if ii.size == 0:
        raise RankDeficient("all x values identical; no pair lines exist")
    slopes = (y[jj] - y[ii]) / dx
    intercepts = y[ii] - slopes * x[ii]

    tol = _residual_tolerance(data)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    gaps = _sweep_gaps(xs)

    depths = np.empty(slopes.shape[0], dtype=int)
    for lo in range(0, slopes.shape[0], chunk):
        b1 = slopes[lo:lo + chunk, None]
        b0 = intercepts[lo:lo + chunk, None]
        rs = ys[None, :] - (b0 + b1 * xs[None, :])
        a = np.concatenate(
            [np.zeros((rs.shape[0], 1), dtype=int),
             np.cumsum(rs >= -tol, axis=1)], axis=1)
        b = np.concatenate(
            [np.zeros((rs.shape[0], 1), dtype=int),
             np.cumsum(rs <= tol, axis=1)], axis=1)
        d1 = a[:, gaps] + (b[:, -1:] - b[:, gaps])
        d2 = b[:, gaps] + (a[:, -1:] - a[:, gaps])
        depths[lo:lo + chunk] = np.minimum(d1, d2).min(axis=1)

    dmax = depths.max()
    best = depths == dmax
    return np.array([intercepts[best].mean(), slopes[best].mean()])
