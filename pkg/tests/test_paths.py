import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from levyou import PowerLaw, Table, stable_model
from levyou.errors import ContractViolation
from levyou.fields import FieldBatch, JumpField, sample_coordinate_jumps
from levyou.measures import StableMeasure
from levyou.model import DiagonalModel
from levyou.paths import (PathSample, _batch_paths, coordinate_path, cos_transform, evaluate,
                          path_ensemble, project_path, psi, psi_partial, psi_quadrature,
                          remainder_tail_sum, split_path, truncation_deficit)
from levyou.rng import TAG_COORD, RngStream


def one_jump(t=0.5, y=2.0, s=1, horizon=1.0, coord=1):
    return JumpField(np.array([coord]), np.array([t]), np.array([y]), np.array([s], np.int8),
                     horizon, {coord: min(y, 0.1)})


def single(b=1.0, gamma=1.0, alpha=1.0, horizon=1.0):
    return DiagonalModel(Table((gamma,), gamma), Table((b,), 0.0), Table((1.0,), 0.0),
                         StableMeasure(alpha), horizon)


class TestCoordinatePath:
    def test_single_jump(self):
        v = coordinate_path(one_jump(), 1.0, 1.0, 1, [0.25, 0.5, 1.0])
        np.testing.assert_allclose(v, [0.0, 2.0, 2 * math.exp(-0.5)], rtol=1e-14)
        assert v[2] == pytest.approx(1.2131, abs=1e-4)

    def test_zero_coefficient(self):
        f = sample_coordinate_jumps(1, StableMeasure(1.0), 0.1, 1.0, RngStream(1))
        assert np.all(coordinate_path(f, 2.0, 0.0, 1, np.linspace(0, 1, 11)) == 0)

    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0.1, 10), st.sampled_from([-1, 1])),
                    min_size=1, max_size=20),
           st.floats(0.01, 20), st.floats(0.01, 5))
    @settings(max_examples=60)
    def test_sweep_matches_direct_sum_and_is_additive(self, pts, gamma, b):
        pts = sorted(pts)
        t, y, s = (np.array(c) for c in zip(*pts))
        grid = np.linspace(0, 1, 17)
        f = JumpField(np.ones(t.size, dtype=np.int64), t, y, s.astype(np.int8), 1.0, {1: 0.1})
        sweep = coordinate_path(f, gamma, b, 1, grid)
        direct = evaluate("response", t, b * s * y, np.full(t.size, gamma), grid)[0]
        np.testing.assert_allclose(sweep, direct, rtol=1e-9, atol=1e-9)
        parts = sum(coordinate_path(one_jump(ti, yi, si), gamma, b, 1, grid)
                    for ti, yi, si in pts)
        np.testing.assert_allclose(sweep, parts, rtol=1e-9, atol=1e-9)

    def test_unsorted_grid_rejected(self):
        with pytest.raises(ContractViolation):
            coordinate_path(one_jump(), 1.0, 1.0, 1, [0.5, 0.25])


class TestProjectPath:
    def test_one_coordinate_reduces_to_coordinate_path(self):
        m = stable_model(1.2, PowerLaw(0.5, 0), PowerLaw(3, 1), PowerLaw(1, -1))
        rng = RngStream(21)
        grid = np.linspace(0, 1, 33)
        p = project_path(m, 0.02, 1, grid, rng)
        b1 = float(m.b(1))
        f = sample_coordinate_jumps(1, m.measure, 0.02 / b1, 1.0, rng.child(TAG_COORD, 1))
        np.testing.assert_allclose(p.values, coordinate_path(f, 3.0, b1, 1, grid), rtol=1e-12)

    def test_zero_projection(self):
        m = DiagonalModel(PowerLaw(1, 1), PowerLaw(1, 0), PowerLaw(0, -1), StableMeasure(1.0))
        p = project_path(m, 0.1, 10, np.linspace(0, 1, 5), RngStream(2))
        assert np.all(p.values == 0)

    def test_split_identity_and_agreement(self):
        m = stable_model(1.5, PowerLaw(1, -0.5), PowerLaw(1, 1), PowerLaw(1, -1))
        grid = np.linspace(0, 1, 65)
        sp = split_path(m, 0.5, 0.01, 30, grid, RngStream(5))
        pp = project_path(m, 0.01, 30, grid, RngStream(5))
        c = sp.components
        np.testing.assert_allclose(sp.values, c["large"] + c["martingale"] - c["remainder"],
                                   atol=1e-12)
        np.testing.assert_allclose(sp.values, pp.values, atol=1e-12)
        assert "# delta" in sp.to_text()

    def test_split_single_small_jump(self):
        m = single()
        batch = FieldBatch(np.array([0]), np.array([1]), np.array([0.5]), np.array([0.5]),
                           np.array([1], np.int8), 1, 1.0, {1: 0.1})
        out = _batch_paths(m, batch, np.array([0.5, 1.0]), epsilon=1.0)
        assert out["large"][0, 1] == 0
        assert out["martingale"][0, 1] == pytest.approx(0.5)
        assert out["remainder"][0, 1] == pytest.approx(0.5 * (1 - math.exp(-0.5)), rel=1e-14)
        assert out["remainder"][0, 1] == pytest.approx(0.19673, abs=1e-5)
        assert out["values"][0, 1] == pytest.approx(0.5 * math.exp(-0.5), rel=1e-14)
        assert out["remainder"][0, 0] == 0.0

    def test_threshold_jump_is_large(self):
        m = single()
        batch = FieldBatch(np.array([0]), np.array([1]), np.array([0.2]), np.array([1.0]),
                           np.array([1], np.int8), 1, 1.0, {1: 0.1})
        out = _batch_paths(m, batch, np.array([1.0]), epsilon=1.0)
        assert out["large"][0, 0] == pytest.approx(math.exp(-0.8))
        assert out["remainder"][0, 0] == 0.0

    def test_remainder_limit(self):
        m = single(horizon=100.0)
        batch = FieldBatch(np.array([0]), np.array([1]), np.array([0.0]), np.array([0.3]),
                           np.array([1], np.int8), 1, 100.0, {1: 0.1})
        out = _batch_paths(m, batch, np.array([100.0]), epsilon=1.0)
        assert out["remainder"][0, 0] == pytest.approx(0.3, rel=1e-12)

    def test_path_sample_rejects_broken_split(self):
        z = np.zeros(2)
        with pytest.raises(ContractViolation):
            PathSample(np.array([0.0, 1.0]), np.ones(2), {"large": z, "martingale": z, "remainder": z})

    def test_ensemble_independent_of_workers(self):
        m = stable_model(1.0, PowerLaw(1, -0.75), PowerLaw(1, 2), PowerLaw(1, -1))
        grid = np.linspace(0, 1, 9)
        a = path_ensemble(m, 0.05, 20, grid, 600, RngStream(4), 1.0, workers=1)
        b = path_ensemble(m, 0.05, 20, grid, 600, RngStream(4), 1.0, workers=3)
        for k in a:
            np.testing.assert_array_equal(a[k], b[k])


class TestRemainderTailSum:
    def test_zeta_two(self):
        # b_n = n^-2
        m = DiagonalModel(PowerLaw(1, 1), PowerLaw(1, -1), PowerLaw(1, -1), StableMeasure(1.0))
        assert remainder_tail_sum(m, 1.0, 1) == pytest.approx(math.pi / 3, rel=1e-12)
        partial = remainder_tail_sum(m, 1.0, 1, 10**6)
        assert partial == pytest.approx(math.pi / 3, abs=2e-6)

    def test_term_matches_quadrature(self):
        spec = StableMeasure(1.5)
        m = single(b=0.3, alpha=1.5)
        eps = 0.7
        q, _ = integrate.quad(lambda y: y * y * spec.density(y), 0, eps / 0.3, epsrel=1e-12)
        assert remainder_tail_sum(m, eps, 1, 1) == pytest.approx(0.09 * 2 * q, rel=1e-8)
        closed = 0.3 ** 1.5 * eps ** 0.5 * 2 * spec.c_alpha / 0.5
        assert remainder_tail_sum(m, eps, 1, 1) == pytest.approx(closed, rel=1e-12)

    def test_zero(self):
        assert remainder_tail_sum(single(b=0.0), 1.0, 1) == 0.0

    def test_divergent(self):
        m = stable_model(1.0, PowerLaw(1, 0), PowerLaw(1, 1), PowerLaw(1, -0.9))
        assert remainder_tail_sum(m, 1.0, 1) == math.inf

    def test_geometric_closed_form(self):
        from levyou import Geometric
        m = DiagonalModel(PowerLaw(1, 1), Geometric(1, 0.5), Geometric(1, 0.8), StableMeasure(1.2))
        assert remainder_tail_sum(m, 1.0, 3) == pytest.approx(remainder_tail_sum(m, 1.0, 3, 400),
                                                              rel=1e-12)


class TestPsi:
    def test_single_coordinate_example(self):
        assert psi(single(), 2.0, 1.0) == pytest.approx(2 * (1 - math.exp(-1)), rel=1e-12)
        assert psi_quadrature(single(), 2.0, 1.0).value == pytest.approx(1.26424, abs=1e-5)

    def test_theta_zero(self):
        assert psi(single(), 0.0, 1.0) == 0.0

    @given(st.floats(0.1, 1.9), st.floats(0.05, 5), st.floats(0.1, 10))
    @settings(max_examples=40)
    def test_homogeneity(self, alpha, theta, c):
        m = stable_model(alpha, PowerLaw(1, -1), PowerLaw(1, 1), PowerLaw(1, -1))
        assert psi(m, c * theta, 1.0) == pytest.approx(c ** alpha * psi(m, theta, 1.0), rel=1e-10)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.2, 1.7])
    def test_cos_transform_matches_closed_form(self, alpha):
        spec = StableMeasure(alpha)
        for c in (1e-4, 0.3, 1.0, 25.0):
            assert cos_transform(spec, c) == pytest.approx(c ** alpha, rel=1e-8)

    @pytest.mark.parametrize("gamma_power", [1.0, 2.0])
    def test_closed_form_vs_quadrature_same_cutoff(self, gamma_power):
        m = stable_model(1.3, PowerLaw(1, -0.5), PowerLaw(1, gamma_power), PowerLaw(1, -1))
        for theta in (0.5, 1.0, 2.0):
            closed = psi_partial(m, theta, 1.0, 1, 40)
            quad = psi_quadrature(m, theta, 1.0, n_max=40).value
            assert quad == pytest.approx(closed, rel=1e-6)

    def test_full_series_tail(self):
        m = stable_model(1.0, PowerLaw(1, -0.75), PowerLaw(1, 2), PowerLaw(1, -1))
        full = psi(m, 1.0, 1.0)
        assert full == pytest.approx(psi_partial(m, 1.0, 1.0, 1, 10**6), rel=1e-9)

    def test_deficit_shrinks(self):
        m = stable_model(1.5, PowerLaw(1, -0.5), PowerLaw(1, 1), PowerLaw(1, -1))
        d1 = truncation_deficit(m, 0.1, 10, 1.0, 1.0)
        d2 = truncation_deficit(m, 0.01, 100, 1.0, 1.0)
        assert d2["small"] < d1["small"] and d2["coords"] < d1["coords"]
        assert d1["coords"] == pytest.approx(psi(m, 1.0, 1.0) - psi_partial(m, 1.0, 1.0, 1, 10),
                                             rel=1e-9)
