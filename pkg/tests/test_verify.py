import json
import math

import numpy as np
import pytest

from levyou import PowerLaw, Table, stable_model
from levyou.errors import ConfigurationError, ContractViolation
from levyou.measures import StableMeasure
from levyou.model import DiagonalModel
from levyou.rng import RngStream
from levyou.verify import (calibrate, frozen_constant, large_jump_count_check, load_calibration,
                           marginal_law_check, max_jump_cdf_check, ou_refinement_check,
                           refinement_bound, remainder_paths, sup_bound_check, tail_inequality)


def single(b=1.0, alpha=1.0):
    return DiagonalModel(PowerLaw(1, 0), Table((b,), 0.0), Table((1.0,), 0.0), StableMeasure(alpha))


class TestMaxJump:
    def test_reference_and_pass(self):
        rep = max_jump_cdf_check(StableMeasure(1.0), 1.0, [0.5, 1.0, 3.0], 2000, RngStream(1))
        assert rep.references["cdf_at_1"]["value"] == pytest.approx(math.exp(-2 / math.pi), rel=1e-12)
        assert rep.references["cdf_at_1"]["value"] == pytest.approx(0.52907, abs=1e-5)
        assert rep.passed
        assert all("provenance" in r for r in rep.references.values())

    def test_grid_below_delta_excluded(self):
        rep = max_jump_cdf_check(StableMeasure(1.0), 1.0, [1e-9, 1.0, 1e9], 1000, RngStream(2))
        assert rep.statistics["excluded_u"] == [1e-9]
        assert rep.plot["reference_cdf"][-1] == pytest.approx(1.0)

    def test_coarse_delta(self):
        with pytest.raises(ConfigurationError):
            max_jump_cdf_check(StableMeasure(1.0), 1.0, [1.0], 1000, RngStream(2), delta=0.5)

    def test_detects_wrong_law(self):
        # sampling Stable(1.5) but testing against Stable(1) is rejected
        rep = max_jump_cdf_check(StableMeasure(1.5), 1.0, [1.0], 4000, RngStream(3))
        assert rep.passed
        from levyou.verify import _max_jump_block
        from levyou import ensemble
        xi = ensemble.concat(ensemble.map_blocks(_max_jump_block, 4000,
                                                 (StableMeasure(1.5), 1e-3, 1.0, 1.0, RngStream(3))))
        from levyou.stats import ks_statistic
        _, p = ks_statistic(xi, lambda u: np.exp(-2 * StableMeasure(1.0).tail(np.maximum(u, 1e-3))))
        assert p < 1e-6


class TestLargeJumpCount:
    def test_small_run(self):
        m = stable_model(1.0, PowerLaw(1, 0), PowerLaw(1, 1), PowerLaw(1, -1))
        rep = large_jump_count_check(m, 1.0, [10, 100], 1000, RngStream(4))
        assert rep.passed
        assert rep.statistics["growth"] == "unbounded"
        assert rep.statistics["expected_strictly_increasing"]

    def test_zero_b(self):
        rep = large_jump_count_check(single(0.0), 1.0, [1, 2], 1000, RngStream(4))
        assert rep.passed and np.all(rep.plot["expected"] == 0)

    def test_reps_floor(self):
        with pytest.raises(ConfigurationError):
            large_jump_count_check(single(), 1.0, [1], 10, RngStream(4))


class TestSupBound:
    def test_zero_window(self):
        m = DiagonalModel(PowerLaw(1, 0), Table((1.0, 0.0, 0.0), 0.0), Table((1.0, 1.0, 1.0), 0.0),
                          StableMeasure(1.0))
        rep = sup_bound_check(m, 1.0, 2, 3, 1000, RngStream(5), c_cal=1.0)
        assert rep.statistics["ratio"] == 0.0 and rep.passed

    def test_single_coordinate_denominator(self):
        rep = sup_bound_check(single(), 1.0, 1, 1, 1000, RngStream(6))
        assert rep.references["denominator"]["value"] == pytest.approx(2 / math.pi, rel=1e-12)
        assert 0 < rep.statistics["ratio"] < math.inf
        assert rep.statistics["c_cal"] is None and rep.passed

    def test_remainder_is_continuous_and_starts_at_zero(self):
        a = remainder_paths(single(), 1.0, 1 / 32, 1, 1, 300, RngStream(7))
        assert np.all(a[:, 0] == 0)
        assert np.max(np.abs(np.diff(a, axis=1))) < 0.1

    def test_tail_inequality_at_zero_is_trivial(self):
        x = np.random.default_rng(1).standard_normal(100)
        out = tail_inequality(np.abs(x), x, x, [0.0])
        assert out["passed"] and out["rows"][0]["p_sup_abs"] == 1.0

    def test_bad_window(self):
        with pytest.raises(ContractViolation):
            sup_bound_check(single(), 1.0, 2, 1, 1000, RngStream(1))


class TestMarginal:
    def test_reps_floor(self):
        with pytest.raises(ConfigurationError):
            marginal_law_check(1.0, 1.0, None, 100, RngStream(1))

    def test_too_many_points(self):
        with pytest.raises(ConfigurationError):
            marginal_law_check(1.5, 1.0, 1e-6, 10**4, RngStream(1))

    def test_delta_too_large(self):
        with pytest.raises(ConfigurationError):
            marginal_law_check(1.0, 1.0, 0.5, 10**4, RngStream(1))

    def test_alpha_half(self):
        rep = marginal_law_check(0.5, 1.0, None, 10**4, RngStream(8))
        assert rep.passed, rep.details
        assert json.loads(rep.to_json())["references"]["oracle"]["provenance"]


class TestRefinementAndCalibration:
    def test_refinement_bound_positive(self):
        m = stable_model(1.5, PowerLaw(1, -0.5), PowerLaw(1, 1), PowerLaw(1, -1))
        assert refinement_bound(m, 1.0, 0.1, 5) > 0

    def test_ou_refinement_ratio_below_frozen(self):
        m = stable_model(1.5, PowerLaw(1, -0.5), PowerLaw(1, 1), PowerLaw(1, -1))
        rep = ou_refinement_check(m, 1.0, 0.1, 5, 500, RngStream(9), frozen_constant("ou_refinement"))
        assert rep.passed and rep.statistics["ratio"] > 0

    def test_frozen_constants(self):
        data = load_calibration()
        for kind in ("sup_bound", "ou_refinement", "integral_refinement"):
            assert data[kind]["seed"] == 20240611 and data[kind]["reps"] == 10**4
            assert frozen_constant(kind) == pytest.approx(2 * data[kind]["max_ratio"])

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            calibrate("nonsense", reps=10)
