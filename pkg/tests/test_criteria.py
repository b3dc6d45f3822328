import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levyou import Geometric, PowerLaw, Table, stable_model
from levyou.criteria import (CLASS_CYLINDRICAL, CLASS_H_CADLAG, CLASS_NOT_H_VALUED, Verdict,
                             classify, combined_form, cylindrical_exponent, cylindrical_verdict,
                             h_cadlag_verdict, h_valued_verdict, necessary_condition,
                             series_verdict, stable_dichotomy, sufficient_condition)
from levyou.measures import StableMeasure, TabulatedMeasure
from levyou.model import DiagonalModel

C, D, I = Verdict.CONVERGES, Verdict.DIVERGES, Verdict.INCONCLUSIVE


def b_power(alpha, p, gamma=PowerLaw(1, 1)):
    """Model with b_n = n^-p (sigma_n = n^(1-p), z_n = n^-1)."""
    return stable_model(alpha, PowerLaw(1, 1 - p), gamma, PowerLaw(1, -1))


class TestSeriesVerdict:
    def test_zeta_two(self):
        v = series_verdict(lambda n: n ** -2.0)
        assert v.verdict is C
        assert v.partial_sum == pytest.approx(math.pi ** 2 / 6, abs=1e-6)
        assert v.value == pytest.approx(math.pi ** 2 / 6, abs=1e-9)

    def test_harmonic_with_hint(self):
        v = series_verdict(lambda n: 1.0 / n, analytic_hint=1.0)
        assert v.verdict is D and v.value == math.inf

    def test_inside_margin(self):
        assert series_verdict(lambda n: n ** -1.02).verdict is I

    def test_numeric_divergence(self):
        assert series_verdict(lambda n: n ** -0.5).verdict is D

    def test_hint_tail(self):
        v = series_verdict(lambda n: n ** -1.5, analytic_hint=1.5, n_terms=1000)
        from scipy.special import zeta
        assert v.value == pytest.approx(zeta(1.5), rel=1e-9)

    def test_geometric(self):
        v = series_verdict(lambda n: 0.5 ** n, analytic_hint=math.inf, n_terms=200)
        assert v.verdict is C and v.value == pytest.approx(1.0)

    def test_too_few_terms(self):
        assert series_verdict(lambda n: n ** -3.0, cutoff=5).verdict is I


class TestConditions:
    def test_p_series_examples(self):
        assert necessary_condition(b_power(1.5, 0.6), 1.0).verdict is D
        assert necessary_condition(b_power(1.5, 1.0), 1.0).verdict is C
        assert sufficient_condition(b_power(1.9, 0.5), 1.0).verdict is D

    def test_sufficient_value(self):
        v = sufficient_condition(b_power(1.0, 2.0), 1.0)
        assert v.verdict is C and v.value == pytest.approx(math.pi / 3, rel=1e-9)

    def test_zero_b(self):
        m = stable_model(1.0, PowerLaw(0, 0), PowerLaw(1, 1), PowerLaw(1, -1))
        v = sufficient_condition(m, 1.0)
        assert v.verdict is C and v.value == 0.0

    @given(st.floats(0.01, 100))
    @settings(max_examples=20)
    def test_epsilon_independent(self, eps):
        for p in (0.6, 1.0):
            m = b_power(1.5, p)
            assert necessary_condition(m, eps).verdict is necessary_condition(m, 1.0).verdict

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.2, 1.5, 1.9])
    @pytest.mark.parametrize("p", [0.4, 0.8, 1.2, 2.0])
    def test_four_forms_agree(self, alpha, p):
        m = b_power(alpha, p)
        expected = C if alpha * p > 1 else D
        verdicts = [f(m).verdict for f in (necessary_condition, sufficient_condition,
                                           combined_form, stable_dichotomy)]
        assert verdicts == [expected] * 4

    def test_numeric_route_on_table_model(self):
        # non-parametric coefficients: the fitted exponent decides
        n = np.arange(1, 4001, dtype=float)
        m = DiagonalModel(PowerLaw(1, 1), Table(tuple(n ** -1.0), None), PowerLaw(1, -1),
                          StableMeasure(1.0))
        assert stable_dichotomy(m).verdict is not D


class TestRegularity:
    def test_corollary_example(self, example_model):
        assert h_valued_verdict(example_model).verdict is C
        assert h_cadlag_verdict(example_model).verdict is D
        assert cylindrical_verdict(example_model).verdict is C
        rep = classify(example_model)
        assert rep.classification == CLASS_CYLINDRICAL == "cylindrically càdlàg but not H-càdlàg"
        assert "cylindrically càdlàg but not H-càdlàg" in rep.summary()
        assert '"classification"' in rep.to_json()

    def test_geometric_sigma(self):
        m = stable_model(1.0, Geometric(1, 0.5), PowerLaw(1, 2), PowerLaw(1, -1))
        rep = classify(m)
        assert rep.classification == CLASS_H_CADLAG
        assert all(getattr(rep, k).verdict is C for k in rep.FIELDS)

    def test_cylindrical_exponent(self):
        assert cylindrical_exponent(1.5) == pytest.approx(6.0)
        assert cylindrical_exponent(1.0) == pytest.approx(2.0)
        m = stable_model(1.5, PowerLaw(1, -0.2), PowerLaw(1, 1), PowerLaw(1, -1))
        assert cylindrical_verdict(m).verdict is C

    def test_not_h_valued(self):
        m = stable_model(1.0, PowerLaw(1, 1), PowerLaw(1, 0), PowerLaw(1, -1))
        assert classify(m).classification == CLASS_NOT_H_VALUED

    def test_custom_measure_is_numeric(self):
        spec = StableMeasure(1.2)
        u = np.geomspace(1e-4, 1e6, 200)
        tab = TabulatedMeasure(u, spec.tail(u), spec.trunc_m2(u))
        m = DiagonalModel(PowerLaw(1, 1), PowerLaw(1, -1), PowerLaw(1, -1), tab)
        rep = classify(m)
        assert rep.necessary.evidence == "numeric"
        assert any("non-stable" in n for n in rep.notes)
