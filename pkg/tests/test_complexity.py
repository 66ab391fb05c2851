import math

import numpy as np
import pytest

from src.analyzers import complexity_analyzer
from src.models.errors import InsufficientData, RankDeficient, ValidationError
from src.models.estimate_models import HalsteadCounts, TrwFactors, TrwModel

KAPPAS = np.array([1.0, 2.0, 3.0, 4.0, 5.0])

FACTORS = [
    TrwFactors(10, 2, 3, 1, 4),
    TrwFactors(20, 1, 5, 2, 3),
    TrwFactors(15, 4, 1, 3, 2),
    TrwFactors(30, 3, 2, 5, 1),
    TrwFactors(25, 5, 4, 4, 5),
    TrwFactors(12, 6, 6, 1, 2),
]


def _exact_samples():
    return [(f, float((complexity_analyzer.TRW_WEIGHTS * f.as_array()) @ KAPPAS)) for f in FACTORS]


def test_halstead_report():
    report = complexity_analyzer.halstead_report(HalsteadCounts(16, 16, 50, 50))
    assert report.vocabulary == 32
    assert report.length == 100
    assert report.theoretical_length == pytest.approx(128.0)
    assert report.volume == pytest.approx(500.0)
    assert report.level == pytest.approx(0.04)
    assert report.effort == pytest.approx(12500.0)
    assert report.predicted_defects == pytest.approx(500.0 / 3000.0)


def test_halstead_custom_divisor():
    report = complexity_analyzer.halstead_report(HalsteadCounts(16, 16, 50, 50), defect_divisor=1000)
    assert report.predicted_defects == pytest.approx(0.5)


def test_halstead_counts_are_consistent():
    with pytest.raises(ValidationError):
        HalsteadCounts(16, 16, 10, 50)


def test_trw_complexity():
    assert complexity_analyzer.trw_complexity(TrwFactors(10, 10, 10, 10, 10)) == pytest.approx(16.0)


def test_trw_fit_recovers_exact_coefficients():
    model = complexity_analyzer.trw_fit(_exact_samples())
    np.testing.assert_allclose(model.kappas, KAPPAS, rtol=1e-8, atol=1e-8)
    assert model.residual_sse == pytest.approx(0.0, abs=1e-12)
    assert model.n_samples == len(FACTORS)


def test_trw_predict_uses_weights_and_kappas():
    model = complexity_analyzer.trw_fit(_exact_samples())
    factors = TrwFactors(8, 1, 1, 1, 1)
    expected = 8 * 1 + 0.1 * 2 + 0.2 * 3 + 0.4 * 4 - 0.1 * 5
    assert complexity_analyzer.trw_predict(model, factors) == pytest.approx(expected)


def test_trw_sse_zero_at_truth():
    assert complexity_analyzer.trw_sse(KAPPAS, _exact_samples()) == pytest.approx(0.0, abs=1e-12)


def test_trw_fit_needs_samples():
    with pytest.raises(InsufficientData):
        complexity_analyzer.trw_fit(_exact_samples()[:4])


def test_trw_fit_reports_collinear_factors():
    samples = [(TrwFactors(f.logical, f.interlink, 2 * f.interlink, f.io, f.readability), 10.0) for f in FACTORS]
    with pytest.raises(RankDeficient) as exc:
        complexity_analyzer.trw_fit(samples)
    assert exc.value.dependent_columns


def test_trw_factors_must_be_finite():
    with pytest.raises(ValidationError):
        TrwFactors(math.inf, 0, 0, 0, 0)


def test_halstead_single_token_program():
    report = complexity_analyzer.halstead_report(HalsteadCounts(1, 1, 1, 1))
    assert report.theoretical_length == 0.0
    assert report.volume == pytest.approx(2.0)
    assert report.predicted_defects == pytest.approx(2.0 / 3000.0)


@pytest.mark.parametrize("factors, expected", [((10, 5, 5, 5, 10), 12.5), ((0, 0, 0, 0, 0), 0.0)])
def test_trw_complexity_examples(factors, expected):
    assert complexity_analyzer.trw_complexity(TrwFactors(*factors)) == pytest.approx(expected)


def test_unit_kappas_reduce_to_complexity():
    model = TrwModel(kappas=(1, 1, 1, 1, 1), residual_sse=0.0)
    factors = TrwFactors(10, 5, 5, 5, 10)
    assert complexity_analyzer.trw_predict(model, factors) == pytest.approx(12.5)


class TestTrwFitProperties:
    def _noisy_samples(self, scale=1.0):
        rng = np.random.default_rng(4)
        exact = _exact_samples()
        noise = rng.normal(0.0, 5.0, size=len(exact))
        return [(f, scale * (y + e)) for (f, y), e in zip(exact, noise)]

    def test_scaling_errors_scales_coefficients(self):
        base = complexity_analyzer.trw_fit(self._noisy_samples())
        scaled = complexity_analyzer.trw_fit(self._noisy_samples(scale=10.0))
        np.testing.assert_allclose(scaled.kappas, 10.0 * np.array(base.kappas), rtol=1e-9, atol=1e-9)
        assert scaled.residual_sse == pytest.approx(100.0 * base.residual_sse, rel=1e-9)

    def test_fit_is_no_worse_than_unit_coefficients(self):
        samples = self._noisy_samples()
        model = complexity_analyzer.trw_fit(samples)
        assert model.residual_sse <= complexity_analyzer.trw_sse(np.ones(5), samples) + 1e-9


class TestHalsteadCounts:
    @pytest.mark.parametrize("field", ["eta1", "eta2", "n1", "n2"])
    def test_booleans_are_not_counts(self, field):
        values = {"eta1": 16, "eta2": 16, "n1": 50, "n2": 50, field: True}
        with pytest.raises(ValidationError):
            HalsteadCounts(**values)
