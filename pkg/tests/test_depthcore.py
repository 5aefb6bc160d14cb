"""Unit tests for the univariate estimators and depth functions."""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

import prdepth as P
from prdepth.depthcore import denominator_threshold
from prdepth.errors import (
    AllDirectionsDegenerate,
    DegenerateScale,
    EmptyInput,
    NoValidResiduals,
)


# ---------------------------------------------------------------------------
# median / mad
# ---------------------------------------------------------------------------

class TestMedianMad:
    def test_median_odd(self):
        assert P.median([1, 2, 3]) == 2

    def test_median_even_midpoint(self):
        assert P.median([1, 2, 3, 4]) == 2.5

    def test_median_singleton(self):
        assert P.median([5]) == 5

    def test_median_empty(self):
        with pytest.raises(EmptyInput):
            P.median([])

    def test_mad_basic(self):
        assert P.mad([1, 2, 3]) == 1

    def test_mad_degenerate(self):
        assert P.mad([7, 7, 7]) == 0

    def test_mad_even(self):
        # med=3, |dev| sorted {1,1,2,4}, midpoint 1.5
        assert P.mad([1, 2, 4, 7]) == 1.5

    def test_mad_empty(self):
        with pytest.raises(EmptyInput):
            P.mad([])

    def test_brute_force_equivalence_small_samples(self):
        # exhaustive sort-based reference on every sample of size <= 7
        def med_ref(v):
            s = sorted(v)
            k = len(s)
            return s[k // 2] if k % 2 else 0.5 * (s[k // 2 - 1] + s[k // 2])

        rng = np.random.default_rng(42)
        for _ in range(500):
            k = int(rng.integers(1, 8))
            v = rng.standard_normal(k).tolist()
            m = med_ref(v)
            assert P.median(v) == pytest.approx(m, abs=0)
            assert P.mad(v) == pytest.approx(med_ref([abs(t - m) for t in v]),
                                             abs=0)


# ---------------------------------------------------------------------------
# pd_n / pwm
# ---------------------------------------------------------------------------

class TestPdPwm:
    def test_pd_at_median_is_one(self):
        samples = [3.0, 1.0, 4.0, 1.0, 5.0]
        assert P.pd_n(P.median(samples), samples) == 1.0

    def test_pd_values(self):
        assert P.pd_n(2, [0, 1, 2]) == pytest.approx(0.5)
        assert P.pd_n(5, [0, 1, 2]) == pytest.approx(0.2)

    def test_pd_degenerate_scale(self):
        with pytest.raises(DegenerateScale):
            P.pd_n(1.0, [2.0, 2.0, 2.0])

    def test_pwm_symmetric_sample_is_zero(self):
        for k, c in ((3.0, 3.5), (1.0, 2.0), (5.0, 1.5)):
            assert P.pwm([-1.0, 0.0, 1.0], k, c) == pytest.approx(0.0, abs=1e-15)

    def test_pwm_all_equal_degenerate(self):
        with pytest.raises(DegenerateScale):
            P.pwm([4.0, 4.0, 4.0])

    def test_pwm_frozen_value(self):
        # independent straight-line evaluation of the weight formula
        # (med=1.5, MAD=1.0) gives this value for k=3, c=3.5
        val = P.pwm([0.0, 1.0, 2.0, 10.0], 3.0, 3.5)
        assert val == pytest.approx(1.5613336752208555, abs=1e-12)
        assert P.median([0, 1, 2, 10]) < val < np.mean([0, 1, 2, 10])

    def test_pwm_bad_params(self):
        with pytest.raises(ValueError):
            P.pwm([1.0, 2.0], k=-1.0)


# ---------------------------------------------------------------------------
# uf_v / uf / prd
# ---------------------------------------------------------------------------

def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


class TestUnfitness:
    def test_three_point_hand_example(self):
        # residuals {-1,-1,1}, denominators all 1, Med=-1, MAD(y)=1 -> 1
        d = P.Dataset(np.array([0.0, 1.0, 4.0]), np.array([1.0, 2.0, 3.0]))
        val = P.uf_v(np.array([0.0, 1.0]), np.array([1.0, 0.0]), d)
        assert val == pytest.approx(1.0, abs=1e-14)

    def test_exact_fit_zero_for_every_direction(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(9)
        beta = np.array([0.7, -1.2])
        w = np.column_stack([np.ones(9), x])
        d = P.Dataset(w @ beta, x)
        for _ in range(25):
            v = _unit(rng.standard_normal(2))
            assert P.uf_v(beta, v, d) == 0.0

    def test_shift_identity_numerator(self):
        # projected-residual location identical under (beta, y) -> (beta+b, y+Xb)
        rng = np.random.default_rng(11)
        x = rng.standard_normal(8)
        y = rng.standard_normal(8)
        d = P.Dataset(y, x)
        b = np.array([0.4, -2.0])
        beta = np.array([1.0, 0.3])
        d_shift = P.Dataset(y + d.w @ b, x)
        for _ in range(10):
            v = _unit(rng.standard_normal(2))
            lhs = P.uf_v(beta, v, d) * P.mad(d.y)
            rhs = P.uf_v(beta + b, v, d_shift) * P.mad(d_shift.y)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)

    def test_shift_identity_full_for_b_zero(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal(8)
        y = rng.standard_normal(8)
        d = P.Dataset(y, x)
        beta = np.array([0.2, 0.9])
        v = _unit([0.6, 0.8])
        assert P.uf_v(beta, v, d) == P.uf_v(beta + 0.0, v, d)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(13)
        x = rng.standard_normal(10)
        y = rng.standard_normal(10)
        dirs = np.array([_unit(rng.standard_normal(2)) for _ in range(12)])
        beta = np.array([0.5, -0.7])
        for s in (2.0, -3.0, 0.25):
            d1 = P.Dataset(y, x)
            d2 = P.Dataset(s * y, x)
            assert P.uf(s * beta, d2, dirs) == pytest.approx(
                P.uf(beta, d1, dirs), rel=1e-12)

    def test_affine_direction_map_identity(self):
        # uf_u(A^-1 beta; (y, XA)) * ||A u|| == uf_{Au/||Au||}(beta; (y, X));
        # for orthogonal A the norm factor is 1 and the map is exact.
        rng = np.random.default_rng(14)
        x = rng.standard_normal((10, 2))
        y = rng.standard_normal(10)
        beta = rng.standard_normal(2)
        d = P.Dataset(y, x, with_intercept=False)
        for trial in range(20):
            a = rng.standard_normal((2, 2))
            while abs(np.linalg.det(a)) < 0.1:
                a = rng.standard_normal((2, 2))
            u = _unit(rng.standard_normal(2))
            d_t = P.Dataset(y, x @ a, with_intercept=False)
            au = a @ u
            lhs = P.uf_v(np.linalg.solve(a, beta), u, d_t) * np.linalg.norm(au)
            rhs = P.uf_v(beta, au / np.linalg.norm(au), d)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)
        # orthogonal A: verbatim identity
        theta = 0.7
        q = np.array([[np.cos(theta), -np.sin(theta)],
                      [np.sin(theta), np.cos(theta)]])
        u = _unit([0.3, -0.9])
        d_t = P.Dataset(y, x @ q, with_intercept=False)
        qu = q @ u
        assert P.uf_v(np.linalg.solve(q, beta), u, d_t) == pytest.approx(
            P.uf_v(beta, qu / np.linalg.norm(qu), d), rel=1e-10)

    def test_direction_set_monotonicity(self):
        rng = np.random.default_rng(15)
        x = rng.standard_normal(9)
        y = rng.standard_normal(9)
        d = P.Dataset(y, x)
        beta = np.array([0.1, 0.2])
        dirs = np.array([_unit(rng.standard_normal(2)) for _ in range(10)])
        u_small = P.uf(beta, d, dirs[:4])
        u_big = P.uf(beta, d, dirs)
        assert u_big >= u_small

    def test_single_direction_reduces_to_uf_v(self):
        rng = np.random.default_rng(16)
        x = rng.standard_normal(7)
        y = rng.standard_normal(7)
        d = P.Dataset(y, x)
        v = _unit([1.0, 2.0])
        beta = np.array([0.0, 1.0])
        assert P.uf(beta, d, v[None, :]) == P.uf_v(beta, v, d)

    def test_no_valid_residuals_and_degenerate_direction_set(self):
        # identical design rows: a direction exactly orthogonal to them
        # has every denominator exactly zero
        d = P.Dataset(np.array([1.0, 2.0, 3.0]), np.array([2.0, 2.0, 2.0]))
        v = _unit([2.0, -1.0])
        with pytest.raises(NoValidResiduals):
            P.uf_v(np.zeros(2), v, d)
        with pytest.raises(AllDirectionsDegenerate):
            P.uf(np.zeros(2), d, v[None, :])

    def test_mad_zero_is_degenerate(self):
        d = P.Dataset(np.array([5.0, 5.0, 5.0]), np.array([1.0, 2.0, 3.0]))
        with pytest.raises(DegenerateScale):
            P.uf_v(np.zeros(2), _unit([1.0, 0.0]), d)

    def test_nonunit_direction_rejected(self):
        d = P.Dataset(np.array([0.0, 1.0, 4.0]), np.array([1.0, 2.0, 3.0]))
        with pytest.raises(ValueError):
            P.uf_v(np.zeros(2), np.array([1.0, 1.0]), d)


class TestPrdReport:
    def test_prd_is_reciprocal_of_one_plus_uf(self):
        rng = np.random.default_rng(17)
        x = rng.standard_normal(8)
        y = rng.standard_normal(8)
        d = P.Dataset(y, x)
        dirs = np.array([_unit(rng.standard_normal(2)) for _ in range(9)])
        beta = np.array([0.3, -0.1])
        rep = P.prd(beta, d, dirs)
        assert rep.prd == 1.0 / (1.0 + rep.uf)
        assert rep.n_directions_used == 9
        assert 0.0 < rep.prd <= 1.0

    def test_exact_fit_depth_one(self):
        x = np.arange(1.0, 7.0)
        beta = np.array([2.0, 0.5])
        d = P.Dataset(beta[0] + beta[1] * x, x)
        dirs = np.array([_unit([1.0, t]) for t in (-2.0, -0.5, 0.3, 4.0)])
        rep = P.prd(beta, d, dirs)
        assert rep.uf == 0.0
        assert rep.prd == 1.0

    def test_far_beta_low_depth(self):
        x = np.arange(1.0, 9.0)
        d = P.Dataset(np.sin(x), x)
        dirs = np.array([_unit([1.0, t]) for t in np.linspace(-3, 3, 15)])
        rep = P.prd(np.array([1e6, -1e6]), d, dirs)
        assert rep.prd < 1e-3


# ---------------------------------------------------------------------------
# Dataset plumbing
# ---------------------------------------------------------------------------

class TestDataset:
    def test_design_with_intercept(self):
        d = P.Dataset(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
        assert d.p == 2
        assert_allclose(d.w, [[1.0, 3.0], [1.0, 4.0]])

    def test_design_without_intercept(self):
        d = P.Dataset(np.array([1.0, 2.0, 3.0]),
                      np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
                      with_intercept=False)
        assert d.p == 2
        assert_allclose(d.w, d.x)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            P.Dataset(np.array([1.0, np.nan]), np.array([1.0, 2.0]))

    def test_rejects_too_few_rows(self):
        with pytest.raises(ValueError):
            P.Dataset(np.array([1.0]), np.array([1.0]))

    def test_general_position_check(self):
        d = P.Dataset(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0]))
        assert d.in_general_position()
        d2 = P.Dataset(np.array([1.0, 2.0, 3.0]), np.array([1.0, 1.0, 3.0]))
        assert not d2.in_general_position()

    def test_denominator_threshold_scales_with_row_norm(self):
        w = np.array([[1.0, 1.0], [1.0, 99.0]])
        assert denominator_threshold(w) == pytest.approx(
            1e-12 * (1.0 + np.hypot(1.0, 99.0)))
