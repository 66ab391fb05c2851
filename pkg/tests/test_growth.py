import math

import numpy as np
import pytest
from scipy.integrate import quad

from src.analyzers import growth_analyzer, hazard_catalog
from src.models.errors import (
    DomainError,
    ExhaustedPopulation,
    InsufficientData,
    NonPositiveHazard,
    ValidationError,
)
from src.models.failure_data import FailureLog
from src.models.fit_models import GrowthFit, HazardModelId, HazardParams

JM = HazardModelId.JM
SW = HazardModelId.SW


def _growth_fit(model, params, observed):
    return GrowthFit(model=model, params=params, log_lik=0.0, converged=True, iterations=0,
                     observed=observed, n_fitted=2)


class TestHazardCatalog:
    def test_jm_hazard(self):
        assert hazard_catalog.hazard(JM, HazardParams(n0=100, phi=0.01), 1) == pytest.approx(1.0)

    def test_exhausted_population_has_zero_hazard(self):
        assert hazard_catalog.hazard(JM, HazardParams(n0=100, phi=0.01), 101) == 0.0

    def test_sw_hazard(self):
        assert hazard_catalog.hazard(SW, HazardParams(n0=100, phi=0.01), 1, t=2.0) == pytest.approx(2.0)

    def test_semi_markov_rows_need_positive_dwell_time(self):
        with pytest.raises(ValidationError):
            hazard_catalog.hazard(SW, HazardParams(n0=10, phi=0.1), 1, t=0.0)

    def test_standard_xui_row_is_negative_for_positive_k(self):
        with pytest.raises(NonPositiveHazard):
            hazard_catalog.hazard(HazardModelId.XUI, HazardParams(n0=10, phi=1.0, k=0.1), 1)

    def test_positive_xui_variant(self):
        params = HazardParams(n0=10, phi=1.0, k=0.1, variant="positive")
        assert hazard_catalog.hazard(HazardModelId.XUI, params, 1) == pytest.approx(math.expm1(1.0))

    def test_shanthikumar(self):
        params = HazardParams(n0=5, phi=0.1, k=2.0)
        assert hazard_catalog.hazard(HazardModelId.SHANTHIKUMAR, params, 1) == pytest.approx(2.5)

    def test_bucchianico(self):
        params = HazardParams(n0=3, phi=0.5)
        assert hazard_catalog.hazard(HazardModelId.BUCCHIANICO, params, 1) == pytest.approx(0.875)

    def test_bucchianico_domain(self):
        with pytest.raises(DomainError):
            hazard_catalog.hazard(HazardModelId.BUCCHIANICO, HazardParams(n0=3, phi=1.5), 1)

    def test_hyperbolic_needs_constants(self):
        with pytest.raises(ValidationError):
            hazard_catalog.hazard(HazardModelId.HYPERBOLIC, HazardParams(n0=3, phi=1.0), 1, t=1.0)

    def test_hyperbolic_profile(self):
        params = HazardParams(n0=3, phi=1.0, a=1.0, b=2.0, c=1.0)
        # 3 * (-1 + 2 + 1)
        assert hazard_catalog.hazard(HazardModelId.HYPERBOLIC, params, 1, t=1.0) == pytest.approx(6.0)

    def test_lipov_counts_by_stage(self):
        params = HazardParams(n0=10, phi=0.1, stage_counts=(3, 2))
        assert hazard_catalog.hazard(HazardModelId.LIPOV, params, 2) == pytest.approx(0.7)

    def test_modified_lipov_shape_adds_elapsed_stage_time(self):
        params = HazardParams(n0=10, phi=0.1, stage_counts=(3, 2), stage_durations=(4.0, 6.0))
        # 0.1 * 7 * (2 / 2 + 4)
        assert hazard_catalog.hazard(HazardModelId.MODIFIED_LIPOV, params, 2, t=2.0) == pytest.approx(3.5)

    def test_sukert_remaining(self):
        params = HazardParams(n0=10, phi=0.1, stage_counts=(3, 2))
        assert hazard_catalog.remaining_errors(HazardModelId.SUKERT, params, 2) == pytest.approx(13.0)

    def test_cumulative_hazard(self):
        params = HazardParams(n0=10, phi=0.1)
        assert hazard_catalog.cumulative_hazard(JM, params, 1, 3.0) == pytest.approx(3.0)
        assert hazard_catalog.cumulative_hazard(SW, params, 1, 2.0) == pytest.approx(2.0)

    def test_jm_density(self):
        assert hazard_catalog.density_jm(HazardParams(n0=100, phi=0.01), 1, 0.0) == pytest.approx(1.0)
        assert hazard_catalog.density_jm(HazardParams(n0=100, phi=0.02), 1, 1.0) == pytest.approx(2 * math.exp(-2))

    def test_sw_density(self):
        params = HazardParams(n0=1, phi=1.0)
        assert hazard_catalog.density_sw(params, 1, 1.0) == pytest.approx(math.exp(-0.5))
        assert hazard_catalog.density_sw(params, 1, 0.0) == 0.0
        assert hazard_catalog.density(SW, params, 1, 1.0) == pytest.approx(hazard_catalog.density_sw(params, 1, 1.0))

    def test_jm_log_likelihood(self):
        log = FailureLog.from_intervals([1.0, 2.0])
        params = HazardParams(n0=3, phi=0.5)
        # rates 1.5 and 1.0
        expected = math.log(1.5) - 1.5 + math.log(1.0) - 2.0
        assert hazard_catalog.log_likelihood(JM, params, log) == pytest.approx(expected)

    def test_log_likelihood_of_impossible_population(self):
        log = FailureLog.from_intervals([1.0, 1.0, 1.0])
        assert hazard_catalog.log_likelihood(JM, HazardParams(n0=2, phi=0.5), log) == -math.inf

    def test_stage_rows_need_grouped_logs(self):
        with pytest.raises(ValidationError):
            hazard_catalog.log_likelihood(HazardModelId.LIPOV, HazardParams(n0=10, phi=0.1),
                                          FailureLog.from_intervals([1.0]))


class TestGrowthFit:
    def test_closed_form_phi(self):
        log = FailureLog.from_intervals([1.0, 2.0, 3.0])
        # 3 / (3*1 + 2*2 + 1*3)
        assert growth_analyzer.closed_form_phi(JM, HazardParams(n0=3, phi=1.0), log) == pytest.approx(0.3)

    def test_jm_fit(self, jm_log):
        fit = growth_analyzer.fit(JM, jm_log, seed=7)
        assert fit.converged
        assert fit.observed == 15
        assert fit.params.n0 >= 15
        truth = hazard_catalog.log_likelihood(JM, HazardParams(n0=20, phi=0.05), jm_log)
        assert fit.log_lik >= truth - 1e-6
        assert fit.integer_n0 is not None
        assert fit.log_lik >= fit.integer_log_lik - 1e-9

    def test_fit_is_reproducible(self, jm_log):
        first = growth_analyzer.fit(JM, jm_log, seed=3)
        second = growth_analyzer.fit(JM, jm_log, seed=3)
        assert first.params == second.params
        assert first.log_lik == second.log_lik

    def test_fit_needs_three_errors(self):
        with pytest.raises(InsufficientData):
            growth_analyzer.fit(JM, FailureLog.from_intervals([1.0, 2.0]))

    def test_event_rows_reject_grouped_logs(self, go_grouped_log):
        with pytest.raises(ValidationError):
            growth_analyzer.fit(JM, go_grouped_log)

    def test_hyperbolic_needs_constants_or_fit_extras(self, jm_log):
        with pytest.raises(ValidationError):
            growth_analyzer.fit(HazardModelId.HYPERBOLIC, jm_log)

    def test_lipov_fit_on_stage_counts(self):
        log = FailureLog.from_bins([(1.0, 10), (1.0, 9), (1.0, 8), (1.0, 7), (1.0, 7), (1.0, 6)])
        fit = growth_analyzer.fit(HazardModelId.LIPOV, log, seed=1)
        assert fit.params.n0 >= log.n_events
        assert math.isfinite(fit.log_lik)
        assert fit.params.stage_counts == (10, 9, 8, 7, 7, 6)


class TestGrowthPredictions:
    def test_predict_remaining(self):
        fit = _growth_fit(JM, HazardParams(n0=40.2, phi=0.01), observed=30)
        assert growth_analyzer.predict_remaining(fit) == pytest.approx(10.2)
        assert growth_analyzer.predict_remaining(fit, observed=41) == 0.0

    def test_mean_time_to_next_markov(self):
        fit = _growth_fit(JM, HazardParams(n0=10, phi=0.25), observed=8)
        # lambda_9 = 0.25 * 2
        assert growth_analyzer.mean_time_to_next(fit) == pytest.approx(2.0)

    def test_mean_time_to_next_rayleigh(self):
        fit = _growth_fit(SW, HazardParams(n0=1, phi=1.0), observed=0)
        assert growth_analyzer.mean_time_to_next(fit) == pytest.approx(math.sqrt(math.pi / 2), abs=1e-4)

    def test_exhausted_population(self):
        fit = _growth_fit(JM, HazardParams(n0=10, phi=0.1), observed=10)
        with pytest.raises(ExhaustedPopulation):
            growth_analyzer.mean_time_to_next(fit)

    def test_hyperbolic_without_mean(self):
        fit = _growth_fit(HazardModelId.HYPERBOLIC, HazardParams(n0=5, phi=1.0, a=1.0, b=0.0, c=1.0), observed=1)
        with pytest.raises(NonPositiveHazard):
            growth_analyzer.mean_time_to_next(fit)

    def test_reliability(self):
        fit = _growth_fit(JM, HazardParams(n0=10, phi=0.1), observed=8)
        assert growth_analyzer.reliability(fit, None, 5.0) == pytest.approx(math.exp(-1.0))
        assert growth_analyzer.reliability(fit, 10, 5.0) == pytest.approx(math.exp(-0.5))

    def test_mean_time_to_complete(self):
        fit = _growth_fit(JM, HazardParams(n0=10, phi=0.1), observed=8)
        assert growth_analyzer.mean_time_to_complete(fit) == pytest.approx(1 / 0.2 + 1 / 0.1)

    def test_complete_debugging_probability(self):
        fit = _growth_fit(JM, HazardParams(n0=10, phi=0.1), observed=8)
        expected = (1 - math.exp(-1.0)) ** 2
        assert growth_analyzer.complete_debugging_probability(fit, None, 10.0) == pytest.approx(expected)

    def test_complete_debugging_is_jm_only(self):
        fit = _growth_fit(SW, HazardParams(n0=10, phi=0.1), observed=8)
        with pytest.raises(ValidationError):
            growth_analyzer.complete_debugging_probability(fit, None, 10.0)


class TestLikelihoodProperties:
    def test_sw_density_integrates_to_one(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            n0 = int(rng.integers(2, 100))
            params = HazardParams(n0=float(n0), phi=float(rng.uniform(1e-3, 0.1)))
            i = int(rng.integers(1, n0 + 1))
            total, _ = quad(lambda t: hazard_catalog.density_sw(params, i, t), 0.0, math.inf)
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_jm_likelihood_under_time_rescaling(self, jm_log):
        c = 10.0
        params = HazardParams(n0=20, phi=0.05)
        scaled_log = FailureLog.from_intervals([c * t for t in jm_log.intervals])
        scaled_params = HazardParams(n0=20, phi=0.05 / c)
        original = hazard_catalog.log_likelihood(JM, params, jm_log)
        rescaled = hazard_catalog.log_likelihood(JM, scaled_params, scaled_log)
        assert rescaled + jm_log.n_events * math.log(c) == pytest.approx(original, rel=1e-12, abs=1e-9)
