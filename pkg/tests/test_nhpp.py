import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import poisson

from src.analyzers import nhpp_analyzer, nhpp_catalog
from src.models.errors import DomainError, InsufficientData, OptInRequired, ValidationError
from src.models.failure_data import FailureLog, LogKind
from src.models.fit_models import NhppFit, NhppModelId, NhppParams, restart_warning

GO = NhppModelId.GOEL_OKUMOTO
GO_PARAMS = NhppParams({"a": 100.0, "g": 0.1})


def _go_fit(horizon=10.0):
    return NhppFit(model=GO, params=GO_PARAMS, log_lik=0.0, fitted_on=LogKind.EVENT_TIMES, converged=True,
                   iterations=0, n_fitted=2, horizon=horizon, observed=63)


class TestCatalog:
    def test_goel_okumoto_mean(self):
        assert nhpp_catalog.mean_value(GO, GO_PARAMS, 10.0) == pytest.approx(100 * (1 - math.exp(-1)))

    def test_musa_okumoto_mean(self):
        params = NhppParams({"a": 2.0, "g": 3.0})
        assert nhpp_catalog.mean_value(NhppModelId.MUSA_OKUMOTO, params, 1.0) == pytest.approx(0.5 * math.log(7))

    def test_delayed_s_intensity(self):
        value = nhpp_catalog.intensity(NhppModelId.DELAYED_S, GO_PARAMS, 10.0)
        assert value == pytest.approx(100 * 0.01 * 10 * math.exp(-1))

    def test_goel_okumoto_intensity_at_origin(self):
        assert nhpp_catalog.intensity(GO, GO_PARAMS, 0.0) == pytest.approx(10.0)

    def test_array_in_array_out(self):
        values = nhpp_catalog.mean_value(GO, GO_PARAMS, np.array([0.0, 10.0, 20.0]))
        assert isinstance(values, np.ndarray)
        assert values.shape == (3,)
        assert values[0] == 0.0

    @pytest.mark.parametrize("model", sorted(nhpp_catalog.DEFAULT_FITTABLE, key=lambda m: m.value))
    def test_intensity_is_the_derivative_of_the_mean(self, model):
        row = nhpp_catalog.get_row(model)
        params = NhppParams(row.start(20, 10.0), row.variant)
        t, h = 4.0, 1e-5
        numeric = (nhpp_catalog.mean_value(model, params, t + h) - nhpp_catalog.mean_value(model, params, t - h)) / (2 * h)
        assert nhpp_catalog.intensity(model, params, t) == pytest.approx(numeric, rel=1e-5)

    def test_zhang_reduces_to_goel_okumoto(self):
        params = NhppParams({"a": 100.0, "g": 0.1, "c": 0.1, "p": 1.0, "beta": 0.0, "alpha": 0.0})
        zhang = nhpp_catalog.intensity(NhppModelId.ZHANG, params, 5.0)
        assert zhang == pytest.approx(nhpp_catalog.intensity(GO, GO_PARAMS, 5.0), rel=1e-6)

    def test_zhang_needs_p_distinct_from_beta(self):
        params = NhppParams({"a": 1.0, "g": 0.1, "c": 0.1, "p": 0.5, "beta": 0.5, "alpha": 0.0})
        with pytest.raises(DomainError):
            nhpp_catalog.mean_value(NhppModelId.ZHANG, params, 1.0)

    def test_zhang_warns_outside_counting_region(self):
        params = NhppParams({"a": 1.0, "g": 0.1, "c": 0.1, "p": 0.1, "beta": 0.5, "alpha": 0.0})
        with pytest.warns(RuntimeWarning):
            nhpp_catalog.mean_value(NhppModelId.ZHANG, params, 1.0)

    def test_parabolic_rejects_negative_intensity(self):
        params = NhppParams({"a": 1.0, "l": 1.0, "m": -4.0, "n": 1.0})
        with pytest.raises(DomainError):
            nhpp_catalog.intensity(NhppModelId.PARABOLIC, params, 1.0)

    def test_gompertz_variants(self):
        power = NhppParams({"a": 10.0, "g": 0.5, "c": 0.5}, "power")
        linear = NhppParams({"a": 10.0, "g": 2.0, "c": 1.0}, "linear")
        assert nhpp_catalog.mean_value(NhppModelId.GOMPERTZ, power, 1.0) == pytest.approx(10 * 0.5 ** 0.5)
        assert nhpp_catalog.mean_value(NhppModelId.GOMPERTZ, linear, 1.0) == pytest.approx(20.0)
        assert nhpp_catalog.asymptote(NhppModelId.GOMPERTZ, power) == 10.0
        assert nhpp_catalog.asymptote(NhppModelId.GOMPERTZ, linear) is None

    def test_unknown_variant(self):
        with pytest.raises(ValidationError):
            nhpp_catalog.get_row(NhppModelId.GOMPERTZ, "cubic")

    def test_asymptotes(self):
        assert nhpp_catalog.asymptote(GO, GO_PARAMS) == 100.0
        assert nhpp_catalog.asymptote(NhppModelId.DUANE, NhppParams({"a": 1.0, "g": 0.5})) is None

    def test_parameter_domains(self):
        with pytest.raises(DomainError):
            nhpp_catalog.mean_value(GO, NhppParams({"a": 100.0, "g": -0.1}), 1.0)
        with pytest.raises(ValidationError):
            nhpp_catalog.mean_value(GO, NhppParams({"a": 100.0}), 1.0)

    def test_unbounded_at_zero(self):
        assert nhpp_catalog.unbounded_at_zero(NhppModelId.DUANE, NhppParams({"a": 1.0, "g": 0.5}))
        assert not nhpp_catalog.unbounded_at_zero(NhppModelId.DUANE, NhppParams({"a": 1.0, "g": 2.0}))

    def test_grouped_log_likelihood_single_bin(self):
        params = NhppParams({"a": 10.0, "g": math.log(2.0)})
        log = FailureLog.from_bins([(1.0, 5)])
        expected = 5 * math.log(5) - 5 - math.log(120)
        assert nhpp_catalog.log_likelihood(GO, params, log) == pytest.approx(expected)
        assert expected == pytest.approx(-1.7403, abs=1e-4)

    def test_empty_bin_log_likelihood(self):
        log = FailureLog.from_bins([(10.0, 0)])
        assert nhpp_catalog.log_likelihood(GO, GO_PARAMS, log) == pytest.approx(-100 * (1 - math.exp(-1)))

    def test_event_log_likelihood(self):
        log = FailureLog.from_intervals([1.0, 1.0], total_time=3.0)
        rate = lambda t: 100 * 0.1 * math.exp(-0.1 * t)
        expected = math.log(rate(1.0)) + math.log(rate(2.0)) - 100 * (1 - math.exp(-0.3))
        assert nhpp_catalog.log_likelihood(GO, GO_PARAMS, log) == pytest.approx(expected)


class TestFit:
    def test_goel_okumoto_recovers_noiseless_curve(self, go_grouped_log):
        fit = nhpp_analyzer.fit(GO, go_grouped_log, seed=5)
        assert fit.converged
        assert fit.params["a"] == pytest.approx(100.0, rel=1e-3)
        assert fit.params["g"] == pytest.approx(0.1, rel=1e-3)
        assert fit.fitted_on is LogKind.GROUPED_COUNTS
        assert fit.n_fitted == 2

    def test_opt_in_models_need_a_start(self, go_grouped_log):
        with pytest.raises(OptInRequired):
            nhpp_analyzer.fit(NhppModelId.PHAM, go_grouped_log)

    def test_start_must_name_model_parameters(self, go_grouped_log):
        with pytest.raises(ValidationError):
            nhpp_analyzer.fit(GO, go_grouped_log, start={"z": 1.0})

    def test_needs_five_events(self):
        with pytest.raises(InsufficientData):
            nhpp_analyzer.fit(GO, FailureLog.from_intervals([1.0, 1.0, 1.0, 1.0]))

    def test_needs_three_nonempty_bins(self):
        with pytest.raises(InsufficientData):
            nhpp_analyzer.fit(GO, FailureLog.from_bins([(1.0, 20), (1.0, 10), (1.0, 0)]))

    def test_fit_serialises(self, go_grouped_log):
        fit = nhpp_analyzer.fit(GO, go_grouped_log, seed=5)
        assert NhppFit.from_dict(fit.to_dict()) == fit


class TestPrediction:
    def test_expected_new_errors(self):
        prediction = nhpp_analyzer.predict(_go_fit(), 10.0)
        assert prediction.expected_new == pytest.approx(100 * (math.exp(-1) - math.exp(-2)))
        assert prediction.expected_new == pytest.approx(23.254, abs=1e-3)
        assert prediction.p_no_failure == pytest.approx(math.exp(-prediction.expected_new))
        assert prediction.remaining == pytest.approx(100 * math.exp(-1))

    def test_zero_horizon(self):
        prediction = nhpp_analyzer.predict(_go_fit(), 0.0)
        assert prediction.expected_new == 0.0
        assert prediction.p_no_failure == 1.0

    def test_origin_cannot_precede_data(self):
        with pytest.raises(ValidationError):
            nhpp_analyzer.predict(_go_fit(), 1.0, at=5.0)

    def test_infinite_failure_model_has_no_remaining_count(self):
        fit = NhppFit(model=NhppModelId.DUANE, params=NhppParams({"a": 1.0, "g": 0.5}), log_lik=0.0,
                      fitted_on=LogKind.EVENT_TIMES, converged=True, iterations=0, n_fitted=2,
                      horizon=4.0, observed=2)
        assert nhpp_analyzer.predict(fit, 5.0).remaining is None

    def test_failure_count_probability(self):
        fit = _go_fit()
        expected_new = nhpp_analyzer.predict(fit, 10.0).expected_new
        assert nhpp_analyzer.failure_count_probability(fit, 0, 10.0) == pytest.approx(math.exp(-expected_new))
        assert nhpp_analyzer.failure_count_probability(fit, 20, 10.0) == pytest.approx(poisson.pmf(20, expected_new))

    def test_time_to_next_expected(self):
        target = 100 * (1 - math.exp(-1)) + 1
        expected = -math.log(1 - target / 100) / 0.1
        assert nhpp_analyzer.time_to_next_expected(_go_fit(), 10.0) == pytest.approx(expected, rel=1e-9)

    def test_time_to_next_when_curve_is_saturated(self):
        fit = NhppFit(model=GO, params=NhppParams({"a": 1.0, "g": 0.1}), log_lik=0.0,
                      fitted_on=LogKind.EVENT_TIMES, converged=True, iterations=0, n_fitted=2,
                      horizon=10.0, observed=1)
        assert nhpp_analyzer.time_to_next_expected(fit, 10.0) is None

    def test_fitted_curve(self, tmp_path):
        log = FailureLog.from_intervals([1.0, 1.0, 2.0], total_time=10.0)
        points = nhpp_analyzer.fitted_curve(_go_fit(), log, grid=6)
        assert [p.t for p in points] == pytest.approx([0, 2, 4, 6, 8, 10])
        assert points[0].m_fitted == 0.0
        assert [p.cumulative_observed for p in points] == [0, 2, 3, 3, 3, 3]

        path = tmp_path / "curve.csv"
        nhpp_analyzer.write_curve_csv(points, path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(nhpp_analyzer.CURVE_HEADER)
        assert len(lines) == 7


def _random_values(row, rng):
    start = row.start(50, 10.0)
    values = {}
    for spec in row.params:
        if spec.domain is nhpp_catalog.Domain.REAL:
            values[spec.name] = start[spec.name] * (1.0 + 0.1 * rng.normal())
        else:
            values[spec.name] = spec.from_free(spec.to_free(start[spec.name]) + 0.3 * rng.normal())
    if row.model is NhppModelId.PHAM:
        values["d"] = 0.0
    return values


def _time_scale(values):
    return values.get("g", values.get("g2", values.get("n")))


class TestCatalogProperties:
    @pytest.mark.parametrize("row", list(nhpp_catalog.CATALOG.values()),
                             ids=lambda row: "-".join(filter(None, (row.model.value, row.variant))))
    def test_mean_value_is_nondecreasing_and_bounded(self, row):
        rng = np.random.default_rng(12)
        for _ in range(10):
            params = NhppParams(_random_values(row, rng), row.variant)
            grid = np.linspace(0.0, 10.0 / _time_scale(params.values), 100)
            m = nhpp_catalog.mean_value(row.model, params, grid)
            assert np.all(np.diff(m) >= -1e-9 * max(1.0, np.max(np.abs(m)))), params.values
            limit = nhpp_catalog.asymptote(row.model, params)
            if limit is not None:
                assert np.all(m <= limit * (1.0 + 1e-12)), params.values

    def test_grouped_and_event_likelihoods_agree_on_ranking(self):
        intervals = np.diff(np.concatenate([[0.0], -np.log(1.0 - np.arange(1, 61) / 100.0) / 0.1]))
        event_log = FailureLog.from_intervals(intervals)
        grouped_log = FailureLog.from_bins((d, 1) for d in intervals)
        horizon = event_log.total_time
        rng = np.random.default_rng(30)
        for _ in range(20):
            (a1, a2), (g1, g2) = rng.uniform(50.0, 150.0, size=2), rng.uniform(0.05, 0.2, size=2)
            first, second = NhppParams({"a": a1, "g": g1}), NhppParams({"a": a2, "g": g2})
            event_gap = (nhpp_catalog.log_likelihood(GO, first, event_log)
                         - nhpp_catalog.log_likelihood(GO, second, event_log))
            grouped_gap = (nhpp_catalog.log_likelihood(GO, first, grouped_log)
                           - nhpp_catalog.log_likelihood(GO, second, grouped_log))
            # grouping shifts the log-likelihood by between g T / 2 and g T
            if abs(event_gap) > abs(g1 - g2) * horizon:
                assert math.copysign(1.0, event_gap) == math.copysign(1.0, grouped_gap)

    def test_hyperexponential_accepts_a_single_phase(self):
        go_curve = nhpp_catalog.mean_value(GO, GO_PARAMS, np.array([1.0, 5.0, 20.0]))
        for b1, params in ((1.0, {"g1": 0.1, "g2": 3.0}), (0.0, {"g1": 3.0, "g2": 0.1})):
            hyper = NhppParams({"a": 100.0, "b1": b1, **params})
            np.testing.assert_allclose(
                nhpp_catalog.mean_value(NhppModelId.HYPEREXPONENTIAL, hyper, np.array([1.0, 5.0, 20.0])),
                go_curve, rtol=1e-12,
            )

    def test_hyperexponential_weight_outside_unit_interval(self):
        params = NhppParams({"a": 100.0, "b1": 1.2, "g1": 0.1, "g2": 0.2})
        with pytest.raises(DomainError):
            nhpp_catalog.mean_value(NhppModelId.HYPEREXPONENTIAL, params, 1.0)


class TestRestartWarning:
    def _fit(self, agreeing, run):
        return replace(_go_fit(), log_lik=-120.5, restarts_agreeing=agreeing, restarts_run=run)

    def test_disagreeing_restarts_are_reported(self):
        message = restart_warning(self._fit(5, 8))
        assert message.startswith("goel-okumoto: 3 of 8 restarts")

    @pytest.mark.parametrize("agreeing, run", [(8, 8), (0, 0)])
    def test_silent_when_all_agree(self, agreeing, run):
        assert restart_warning(self._fit(agreeing, run)) is None

    def test_restart_counts_serialise(self):
        fit = self._fit(5, 8)
        assert NhppFit.from_dict(fit.to_dict()) == fit

    def test_fit_records_restarts(self, go_grouped_log):
        fit = nhpp_analyzer.fit(GO, go_grouped_log, seed=5)
        assert fit.restarts_run >= fit.restarts_agreeing >= 2
