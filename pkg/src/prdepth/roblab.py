"""Empirical robustness experiments.

These drive the deepest-projection fit through the situations the theory
talks about: adversarial replacement that tilts a hyperplane toward
vertical (breakdown), point-mass replacement over a leverage grid (maximum
bias), finite-contamination difference quotients (influence), and the two
contamination demonstrations for simple regression.
"""

from __future__ import annotations

import importlib.resources
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .dataio import load_dataset_csv
from .depthcore import Dataset
from .errors import MissingDataset
from .estimators import (
    FitConfig,
    default_fit_config,
    fit_ls,
    fit_prd,
    fit_rd_simple,
)
from .oracle import cauchy, mb_bounds, rbp_formula

__all__ = [
    "RbpResult",
    "EmpiricalMB",
    "EmpiricalIF",
    "DemoFit",
    "DemoReport",
    "rbp_experiment",
    "leverage_grid",
    "empirical_mb",
    "empirical_if",
    "demo_contamination",
    "eight_point_synthetic_path",
    "bivariate_normal_pair",
]

TILT_SCHEDULE = (1e2, 1e3, 1e4, 1e5, 1e6)
CONTAMINATION_JITTER = 1e-6

# Demonstration scenario parameters: clean cloud center/correlation, the
# contamination cloud, and how many of the 100 points get replaced.  The
# clean correlation keeps all three fitted slopes in the mildly negative
# band the scenario is meant to show.
BVN_N = 100
BVN_N_REPLACED = 34
BVN_CLEAN_MEAN = np.zeros(2)
BVN_CLEAN_COV = np.array([[1.0, -0.2], [-0.2, 1.0]])
BVN_CONTAM_MEAN = np.array([10.0, 10.0])
BVN_CONTAM_COV = 0.1 * np.eye(2)


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RbpResult:
    """Empirical replacement breakdown of the deepest fit."""

    n: int
    p: int
    m_break_empirical: int
    rbp_empirical: Fraction
    rbp_formula: Fraction
    escalation_curve: list[tuple[float, float]]
    below_break_max_norm: float
    below_break_bounded: bool
    escape_threshold: float


@dataclass(frozen=True)
class EmpiricalMB:
    """Worst observed displacement over a grid of contamination atoms."""

    epsilon: float
    grid: list[tuple[float, np.ndarray]]
    max_bias: float
    argmax_point: tuple[float, np.ndarray]
    oracle_lower: float
    oracle_upper: float
    biases: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class EmpiricalIF:
    """Finite-contamination difference quotients at one atom."""

    quotient: np.ndarray
    per_eps: list[tuple[float, np.ndarray]]
    clean_beta: np.ndarray


@dataclass(frozen=True)
class DemoFit:
    variant: str        # "clean" | "contaminated"
    estimator: str      # "ls" | "rd" | "prd"
    slope: float
    intercept: float


@dataclass(frozen=True)
class DemoReport:
    scenario: str
    fits: list[DemoFit]
    points: dict[str, np.ndarray]   # variant -> (n, 2) array of (x, y)

    def fit(self, variant: str, estimator: str) -> DemoFit:
        for f in self.fits:
            if f.variant == variant and f.estimator == estimator:
                return f
        raise KeyError((variant, estimator))


# ---------------------------------------------------------------------------
# Replacement breakdown
# ---------------------------------------------------------------------------

def _tilt_basis(data: Dataset, anchors: list[int]):
    """Particular solution and unit null direction of the anchor equations
    w_i' beta = y_i, so that beta(s) = beta0 + s * eta passes through the
    anchor points and grows without bound."""
    w_a = data.w[anchors]
    y_a = data.y[anchors]
    beta0, *_ = np.linalg.lstsq(w_a, y_a, rcond=None)
    _, _, vt = np.linalg.svd(w_a)
    eta = vt[-1]
    j = int(np.argmax(np.abs(eta)))
    if eta[j] < 0:
        eta = -eta
    return beta0, eta


def _tilted_contamination(data: Dataset, anchors: list[int], m: int,
                          tilt: float, rng: np.random.Generator) -> Dataset:
    """Replace the last m rows with points lying exactly on the tilted
    hyperplane through the anchor rows, at generic jittered x positions."""
    beta0, eta = _tilt_basis(data, anchors)
    beta_tilt = beta0 + tilt * eta
    x = data.x.copy()
    y = data.y.copy()
    lo = data.x.min(axis=0)
    hi = data.x.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    replace = range(data.n - m, data.n)
    for i in replace:
        xi = (lo + rng.random(data.x.shape[1]) * span
              + CONTAMINATION_JITTER * rng.standard_normal(data.x.shape[1]))
        wi = np.concatenate([[1.0], xi]) if data.with_intercept else xi
        x[i] = xi
        y[i] = wi @ beta_tilt
    return Dataset(y, x, with_intercept=data.with_intercept)


def rbp_experiment(data: Dataset, config: FitConfig,
                   escape_threshold: float | None = None,
                   tilt_schedule: tuple[float, ...] = TILT_SCHEDULE,
                   redraws: int = 20) -> RbpResult:
    """Find the smallest replacement count that carries the fit away.

    For m = 1, 2, ... the last m rows are replaced by points on a
    hyperplane through p-1 original rows, tilted toward vertical through
    the schedule of slope magnitudes.  Breakdown is declared at the first m
    whose fitted norm exceeds the escape threshold and grows monotonically
    with the tilt; m-1 is then re-checked for boundedness over the same
    schedule and ``redraws`` random placements.
    """
    if data.p < 2:
        raise ValueError("breakdown construction needs p >= 2")
    clean = fit_prd(data, config)
    threshold = escape_threshold if escape_threshold is not None else \
        1e3 * (1.0 + float(np.linalg.norm(clean.beta)))
    anchors = list(range(data.p - 1))
    m_max = data.n // 2 + 1

    def norms_for(m: int, redraw: int) -> list[float]:
        out = []
        for si, s in enumerate(tilt_schedule):
            rng = np.random.default_rng((config.seed, 11, m, si, redraw))
            contaminated = _tilted_contamination(data, anchors, m, s, rng)
            res = fit_prd(contaminated, config)
            out.append(float(np.linalg.norm(res.beta)))
        return out

    m_break = None
    curve: list[tuple[float, float]] = []
    for m in range(1, m_max + 1):
        norms = norms_for(m, redraw=0)
        escaped = norms[-1] > threshold and all(
            b > a for a, b in zip(norms, norms[1:]))
        if escaped:
            m_break = m
            curve = list(zip(tilt_schedule, norms))
            break
    if m_break is None:
        raise RuntimeError(
            f"no breakdown found up to m = {m_max}; threshold too high?")

    below_max = 0.0
    if m_break > 1:
        for redraw in range(redraws):
            below_max = max(below_max, max(norms_for(m_break - 1, redraw)))
    bounded = below_max < threshold

    return RbpResult(
        n=data.n, p=data.p,
        m_break_empirical=m_break,
        rbp_empirical=Fraction(m_break, data.n),
        rbp_formula=rbp_formula(data.n, data.p),
        escalation_curve=curve,
        below_break_max_norm=below_max,
        below_break_bounded=bounded,
        escape_threshold=threshold,
    )


# ---------------------------------------------------------------------------
# Empirical maximum bias
# ---------------------------------------------------------------------------

def _standard_model_sample(n: int, p: int, rng: np.random.Generator) -> Dataset:
    # y and every x coordinate standard normal, true coefficients zero,
    # no intercept column (the spherical-design model of the bounds).
    x = rng.standard_normal((n, p))
    y = rng.standard_normal(n)
    return Dataset(y, x, with_intercept=False)


def _replace_rows(data: Dataset, k: int, y0: float, x0: np.ndarray,
                  rng: np.random.Generator) -> Dataset:
    x = data.x.copy()
    y = data.y.copy()
    for i in range(k):
        x[i] = x0 + CONTAMINATION_JITTER * rng.standard_normal(x0.shape[0])
        y[i] = y0 + CONTAMINATION_JITTER * rng.standard_normal()
    return Dataset(y, x, with_intercept=data.with_intercept)


def leverage_grid(p: int = 2, max_magnitude: float = 1000.0,
                  ratios: tuple[float, ...] = (0.5, 1.0, 2.0, 5.0),
                  magnitudes: tuple[float, ...] = (3.0, 10.0, 100.0, None),
                  ) -> list[tuple[float, np.ndarray]]:
    """Contamination atoms (y0, x0) along the first design coordinate with
    response/leverage ratios around the breakdown geometry."""
    grid: list[tuple[float, np.ndarray]] = []
    for mag in magnitudes:
        m = max_magnitude if mag is None else mag
        for r in ratios:
            x0 = np.zeros(p)
            x0[0] = m
            grid.append((r * m, x0))
    return grid


def empirical_mb(n: int, epsilon: float, grid, config: FitConfig,
                 p: int = 2, threads: int = 1) -> EmpiricalMB:
    """Max displacement of the fit when floor(eps n) rows are replaced by
    (jittered) copies of each grid atom in turn."""
    k = int(np.floor(epsilon * n))
    if epsilon > 0 and k < 1:
        raise ValueError("epsilon too small: floor(eps*n) must be >= 1")
    rng = np.random.default_rng((config.seed, 21))
    data = _standard_model_sample(n, p, rng)
    clean = fit_prd(data, config, threads=threads)

    grid = list(grid)

    def bias_at(gi: int) -> float:
        y0, x0 = grid[gi]
        if k == 0:
            return 0.0
        sub = np.random.default_rng((config.seed, 22, gi))
        contaminated = _replace_rows(data, k, float(y0),
                                     np.asarray(x0, dtype=float), sub)
        res = fit_prd(contaminated, config)
        return float(np.linalg.norm(res.beta - clean.beta))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            biases = list(pool.map(bias_at, range(len(grid))))
    else:
        biases = [bias_at(gi) for gi in range(len(grid))]

    if epsilon > 0:
        bounds = mb_bounds(cauchy(), epsilon)
        lower, upper = bounds.mb_lower, bounds.mb_upper
    else:
        lower = upper = 0.0
    best = int(np.argmax(biases)) if biases else 0
    return EmpiricalMB(
        epsilon=epsilon, grid=grid,
        max_bias=max(biases) if biases else 0.0,
        argmax_point=grid[best] if grid else (0.0, np.zeros(p)),
        oracle_lower=lower, oracle_upper=upper,
        biases=biases,
    )


# ---------------------------------------------------------------------------
# Empirical influence function
# ---------------------------------------------------------------------------

def empirical_if(z: tuple[float, np.ndarray], n: int, eps_schedule,
                 config: FitConfig, p: int = 2,
                 threads: int = 1) -> EmpiricalIF:
    """Difference quotients (fit on mixture - clean fit) / eps.

    ``eps_schedule`` must be decreasing with floor(eps n) >= 1 throughout;
    the returned quotient extrapolates the two smallest eps to zero
    (first-order Richardson).
    """
    eps_schedule = [float(e) for e in eps_schedule]
    if any(b >= a for a, b in zip(eps_schedule, eps_schedule[1:])):
        raise ValueError("eps_schedule must be strictly decreasing")
    if any(int(np.floor(e * n)) < 1 for e in eps_schedule):
        raise ValueError("every eps needs floor(eps*n) >= 1")
    y0, x0 = float(z[0]), np.asarray(z[1], dtype=float)
    rng = np.random.default_rng((config.seed, 31))
    data = _standard_model_sample(n, p, rng)
    clean = fit_prd(data, config, threads=threads)

    per_eps: list[tuple[float, np.ndarray]] = []
    for ei, eps in enumerate(eps_schedule):
        k = int(np.floor(eps * n))
        sub = np.random.default_rng((config.seed, 32, ei))
        contaminated = _replace_rows(data, k, y0, x0, sub)
        res = fit_prd(contaminated, config)
        per_eps.append((eps, (res.beta - clean.beta) / eps))

    if len(per_eps) == 1:
        quotient = per_eps[0][1]
    else:
        e2, q2 = per_eps[-2]
        e1, q1 = per_eps[-1]
        quotient = q1 + (q1 - q2) * (e1 / (e2 - e1))
    return EmpiricalIF(quotient=quotient, per_eps=per_eps,
                       clean_beta=clean.beta)


# ---------------------------------------------------------------------------
# Contamination demonstrations
# ---------------------------------------------------------------------------

def eight_point_synthetic_path() -> Path:
    """Path of the packaged synthetic analog of the eight-point dataset
    (seven points near y = 0 plus the leverage point (12, 1))."""
    ref = importlib.resources.files("prdepth") / "data" / "eight_point.csv"
    return Path(str(ref))


def bivariate_normal_pair(seed: int = 0) -> tuple[Dataset, Dataset]:
    """Clean and 34%-replaced versions of the 100-point normal scenario."""
    rng = np.random.default_rng((seed, 41))
    clean_xy = rng.multivariate_normal(BVN_CLEAN_MEAN, BVN_CLEAN_COV,
                                       size=BVN_N)
    contaminated_xy = clean_xy.copy()
    replace = rng.choice(BVN_N, size=BVN_N_REPLACED, replace=False)
    contaminated_xy[replace] = rng.multivariate_normal(
        BVN_CONTAM_MEAN, BVN_CONTAM_COV, size=BVN_N_REPLACED)
    clean = Dataset(clean_xy[:, 1], clean_xy[:, :1], with_intercept=True)
    contaminated = Dataset(contaminated_xy[:, 1], contaminated_xy[:, :1],
                           with_intercept=True)
    return clean, contaminated


def _demo_fits(variant: str, data: Dataset, seed: int) -> list[DemoFit]:
    out = []
    cfg = default_fit_config(data.n, data.p, seed=seed, replications=3)
    b_ls = fit_ls(data)
    b_rd = fit_rd_simple(data)
    b_prd = fit_prd(data, cfg).beta
    for name, beta in (("ls", b_ls), ("rd", b_rd), ("prd", b_prd)):
        out.append(DemoFit(variant=variant, estimator=name,
                           slope=float(beta[1]), intercept=float(beta[0])))
    return out


def demo_contamination(scenario: str, seed: int = 0,
                       data_path=None) -> DemoReport:
    """Fit LS, the deepest count-depth line, and the deepest projection fit
    on a scenario's clean and contaminated variants.

    ``eight_point`` requires an explicit data file (a synthetic analog
    ships with the package, see :func:`eight_point_synthetic_path`); its
    contamination moves the highest-leverage point's response up to its x
    value.  ``bivariate_normal_34`` is generated from the scenario seed.
    """
    if scenario == "eight_point":
        if data_path is None:
            raise MissingDataset(
                "eight_point needs --data <csv>; a synthetic analog ships "
                f"at {eight_point_synthetic_path()}")
        clean = load_dataset_csv(data_path, with_intercept=True)
        if clean.p != 2:
            raise ValueError("eight_point scenario expects one predictor")
        y = clean.y.copy()
        i = int(np.argmax(clean.x[:, 0]))
        y[i] = clean.x[i, 0]
        contaminated = Dataset(y, clean.x.copy(), with_intercept=True)
    elif scenario == "bivariate_normal_34":
        clean, contaminated = bivariate_normal_pair(seed)
    else:
        raise ValueError(f"unknown scenario: {scenario!r}")

    fits = _demo_fits("clean", clean, seed) + \
        _demo_fits("contaminated", contaminated, seed)
    points = {
        "clean": np.column_stack([clean.x[:, 0], clean.y]),
        "contaminated": np.column_stack([contaminated.x[:, 0],
                                         contaminated.y]),
    }
    return DemoReport(scenario=scenario, fits=fits, points=points)
