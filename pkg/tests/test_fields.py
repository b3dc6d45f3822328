import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyou import Geometric, PowerLaw, Table, stable_model
from levyou.ensemble import blocks, concat, map_blocks
from levyou.errors import ContractViolation, DomainError
from levyou.fields import (JumpField, expected_large_jump_count, sample_batch,
                           sample_coordinate_jumps, sample_large_jump_field)
from levyou.measures import StableMeasure
from levyou.model import DiagonalModel, coefficients_from_dict
from levyou.rng import RngStream
from levyou.stats import poisson_gof

S1 = StableMeasure(1.0)


class TestRngStream:
    def test_same_stream_same_draws(self):
        a = RngStream(7, (1, 2)).generator().random(5)
        b = RngStream(7).child(1).child(2).generator().random(5)
        np.testing.assert_array_equal(a, b)

    def test_distinct_children_differ(self):
        a = RngStream(7).child(1).generator().random(5)
        b = RngStream(7).child(2).generator().random(5)
        assert not np.array_equal(a, b)

    def test_known_first_draw_is_stable(self):
        # PCG64 + SeedSequence are specified bit-for-bit by numpy
        ss = np.random.SeedSequence(7, spawn_key=(3,))
        ref = np.random.Generator(np.random.PCG64(ss)).integers(0, 2**32, 3)
        np.testing.assert_array_equal(RngStream(7, (3,)).generator().integers(0, 2**32, 3), ref)

    @given(st.integers(0, 2**64 - 1), st.lists(st.integers(0, 10**6), max_size=4))
    def test_label_round_trip(self, seed, index):
        s = RngStream(seed, tuple(index))
        assert RngStream.parse(str(s.seed), s.label) == s

    def test_invalid(self):
        with pytest.raises(DomainError):
            RngStream(-1)
        with pytest.raises(DomainError):
            RngStream(2**64)


class TestEnsemble:
    def test_blocks_cover(self):
        assert blocks(600) == [(0, 256), (1, 256), (2, 88)]
        assert sum(s for _, s in blocks(1)) == 1

    def test_worker_count_does_not_change_results(self):
        def one(workers):
            return concat(map_blocks(_block_draw, 700, (RngStream(3),), workers))
        np.testing.assert_array_equal(one(1), one(3))


def _block_draw(b, size, rng):
    return rng.child(b).generator().random(size)


class TestCoordinateJumps:
    def test_sorted_and_above_delta(self):
        f = sample_coordinate_jumps(4, StableMeasure(0.7), 0.05, 2.0, RngStream(1))
        assert len(f) > 0
        assert np.all(np.diff(f.time) >= 0)
        assert np.all((f.time >= 0) & (f.time <= 2.0))
        assert np.all(f.magnitude >= 0.05)
        assert set(np.unique(f.sign)) <= {-1, 1}
        assert np.all(f.coord == 4)

    def test_mean_count_stable_one(self):
        # Poisson mean 2 * horizon * tail(1) = 2/pi
        batch = sample_batch([1], {1: S1}, {1: 1.0}, 1.0, 10**5, RngStream(11))
        counts = batch.counts_by_coord()[1]
        se = math.sqrt(2 / math.pi / counts.size)
        assert abs(counts.mean() - 2 / math.pi) <= 3 * se

    def test_counts_are_poisson(self):
        batch = sample_batch([1], {1: StableMeasure(1.5)}, {1: 0.3}, 2.0, 20000, RngStream(5))
        lam = 2 * 2.0 * StableMeasure(1.5).tail(0.3)
        _, p, _ = poisson_gof(batch.counts_by_coord()[1], lam)
        assert p > 0.001

    def test_sign_balance(self):
        batch = sample_batch([1], {1: S1}, {1: 0.2}, 1.0, 10**5, RngStream(12))
        s = batch.sign.astype(float)
        assert abs(s.mean()) <= 3 / math.sqrt(s.size)

    def test_huge_delta_is_empty(self):
        batch = sample_batch([1], {1: S1}, {1: 1e12}, 1.0, 1000, RngStream(13))
        assert batch.time.size == 0

    def test_field_round_trip(self, tmp_path):
        f = sample_coordinate_jumps(2, S1, 0.1, 1.0, RngStream(9, (4,)))
        p = tmp_path / "field.tsv"
        f.write(p)
        g = JumpField.read(p)
        for col in ("coord", "time", "magnitude", "sign"):
            np.testing.assert_array_equal(getattr(f, col), getattr(g, col))
        assert g.stream == f.stream and g.trunc_delta == f.trunc_delta

    def test_rejects_magnitude_below_level(self):
        with pytest.raises(ContractViolation):
            JumpField(np.array([1]), np.array([0.5]), np.array([0.1]), np.array([1], np.int8),
                      1.0, {1: 0.2})

    def test_reproducible(self):
        a = sample_coordinate_jumps(1, S1, 0.01, 1.0, RngStream(77))
        b = sample_coordinate_jumps(1, S1, 0.01, 1.0, RngStream(77))
        np.testing.assert_array_equal(a.time, b.time)


def one_coordinate(b=1.0, alpha=1.0):
    return DiagonalModel(PowerLaw(1, 0), Table((b,), 0.0), Table((1.0,), 0.0), StableMeasure(alpha))


class TestLargeJumps:
    def test_single_coordinate_mean(self):
        m = one_coordinate()
        counts = [len(sample_large_jump_field(m, 1.0, 1, RngStream(3, (r,)))) for r in range(4000)]
        se = math.sqrt(2 / math.pi / len(counts))
        assert abs(np.mean(counts) - 2 / math.pi) <= 3 * se

    def test_expected_count_single(self):
        assert expected_large_jump_count(one_coordinate(), 1.0, 1) == pytest.approx(
            1 - math.exp(-2 / math.pi), rel=1e-12)

    def test_zero_b(self):
        m = one_coordinate(b=0.0)
        assert expected_large_jump_count(m, 1.0, 5) == 0.0
        with pytest.raises(ContractViolation):
            sample_large_jump_field(m, 1.0, 1, RngStream(1))

    def test_additivity(self):
        m = stable_model(1.3, PowerLaw(2, -0.5), PowerLaw(1, 1), PowerLaw(1, -1))
        two = expected_large_jump_count(m, 0.5, 2)
        first = expected_large_jump_count(m, 0.5, 1)
        b2 = m.b(2)
        second = 1 - math.exp(-2 * StableMeasure(1.3).tail(0.5 / b2))
        assert two == pytest.approx(first + second, rel=1e-12)

    @given(st.floats(0.05, 5), st.floats(0.05, 5))
    @settings(max_examples=30)
    def test_monotone_in_epsilon(self, e1, e2):
        m = stable_model(1.0, PowerLaw(1, 0), PowerLaw(1, 1), PowerLaw(1, -1))
        lo, hi = min(e1, e2), max(e1, e2)
        assert expected_large_jump_count(m, lo, 50) >= expected_large_jump_count(m, hi, 50)

    def test_no_time_ties(self):
        m = stable_model(1.0, PowerLaw(1, 0), PowerLaw(1, 1), PowerLaw(1, -1))
        f = sample_large_jump_field(m, 0.01, 20, RngStream(8))
        assert len(f) > 100
        assert np.unique(f.time).size == len(f)


class TestModel:
    def test_rejects_non_square_summable_z(self):
        with pytest.raises(DomainError):
            stable_model(1.0, PowerLaw(1, 0), PowerLaw(1, 1), PowerLaw(1, -0.5))
        with pytest.raises(DomainError):
            DiagonalModel(PowerLaw(1, 0), PowerLaw(1, 0), Geometric(1, 1.0), S1)

    def test_rejects_nonpositive_gamma(self):
        with pytest.raises(DomainError):
            DiagonalModel(Table((1.0, 0.0)), PowerLaw(1, 0), PowerLaw(1, -1), S1)

    def test_round_trip(self):
        m = stable_model(1.5, PowerLaw(2, -0.5), Geometric(1, 2.0), PowerLaw(-1, -1))
        back = DiagonalModel.from_dict(m.describe())
        assert back == m and back.digest() == m.digest()
        assert m.sign_z(3) == -1

    def test_coefficients_from_dict(self):
        c = coefficients_from_dict({"kind": "table", "values": [1, 2], "fill": 0.0})
        np.testing.assert_array_equal(c(np.array([1, 2, 3])), [1, 2, 0])
        with pytest.raises(DomainError):
            coefficients_from_dict({"kind": "spline"})
