import math

import numpy as np
import pytest

from src.analyzers import selection_analyzer
from src.analyzers.selection_analyzer import GrowthCandidate, NhppCandidate, candidate_for
from src.models.errors import InsufficientData, RelGrowthError, ValidationError
from src.models.failure_data import FailureLog
from src.models.fit_models import HazardModelId, ModelScore, NhppModelId, NhppParams
from src.simulation import samplers
from src.utils.datasets import bin_events


def _score(model, aic, n_params=2, ic=None, sse=None):
    return ModelScore(model=model, log_lik=0.0, n_params=n_params, n_obs=10, aic=aic, bic=aic,
                      one_step_sse=sse, ic=ic)


class TestCriteria:
    def test_information_criteria(self):
        aic, bic = selection_analyzer.information_criteria(-100.0, 2, 100)
        assert aic == pytest.approx(204.0)
        assert bic == pytest.approx(2 * math.log(100) + 200)
        assert bic == pytest.approx(209.21, abs=1e-2)

    def test_parameter_free_baseline(self):
        aic, _ = selection_analyzer.information_criteria(-7.5, 0, 10)
        assert aic == pytest.approx(15.0)

    @pytest.mark.parametrize("flags, expected", [((1, 0, 1), 0.7), ((0, 0, 0), 0.0), ((1, 1, 1), 1.0)])
    def test_integrated_criterion(self, flags, expected):
        weights = (0.5, 0.3, 0.2)
        assert selection_analyzer.integrated_criterion(weights, [bool(f) for f in flags]) == pytest.approx(expected)

    def test_integrated_criterion_shapes(self):
        with pytest.raises(ValidationError):
            selection_analyzer.integrated_criterion((0.5, 0.5), (True,))


class TestRanking:
    def test_lower_aic_first(self):
        ranked = selection_analyzer.rank_models([_score("b", 209.0), _score("a", 204.0)], "aic")
        assert [s.model for s in ranked] == ["a", "b"]

    def test_ties_prefer_fewer_parameters(self):
        ranked = selection_analyzer.rank_models([_score("x", 204.0, 3), _score("y", 204.0, 2)], "aic")
        assert [s.model for s in ranked] == ["y", "x"]

    def test_single_candidate(self):
        assert [s.model for s in selection_analyzer.rank_models([_score("only", 1.0)])] == ["only"]

    def test_integrated_criterion_ranks_highest_first(self):
        ranked = selection_analyzer.rank_models([_score("low", 0.0, ic=0.2), _score("high", 0.0, ic=0.9)], "ic")
        assert ranked[0].model == "high"

    def test_missing_values_sort_last(self):
        ranked = selection_analyzer.rank_models(
            [_score("nan", 0.0, sse=math.nan), _score("ok", 0.0, sse=3.0), _score("none", 0.0)], "sse"
        )
        assert ranked[0].model == "ok"

    def test_unknown_criterion(self):
        with pytest.raises(ValidationError):
            selection_analyzer.rank_models([_score("a", 1.0)], "mdl")


class TestCandidates:
    def test_nhpp_candidate(self):
        candidate = candidate_for("goel-okumoto")
        assert isinstance(candidate, NhppCandidate)
        assert candidate.model is NhppModelId.GOEL_OKUMOTO

    def test_variant_suffix(self):
        candidate = candidate_for("gompertz:linear")
        assert candidate.variant == "linear"
        assert candidate.name == "gompertz:linear"

    def test_growth_candidate(self):
        candidate = candidate_for("jm")
        assert isinstance(candidate, GrowthCandidate)
        assert candidate.model is HazardModelId.JM

    def test_unknown_model(self):
        with pytest.raises(ValidationError):
            candidate_for("nope")


class TestPrequential:
    def test_true_model_on_its_mean_curve(self, go_grouped_log):
        result = selection_analyzer.one_step_prediction_error(
            candidate_for("goel-okumoto"), go_grouped_log, seed=4, workers=2
        )
        assert result.windows == (5, 6, 7, 8)
        assert result.skipped == ()
        assert result.sse < 1e-6

    def test_needs_six_observations(self):
        log = FailureLog.from_intervals([1.0, 2.0, 3.0, 4.0, 5.0])
        with pytest.raises(InsufficientData):
            selection_analyzer.one_step_prediction_error(candidate_for("goel-okumoto"), log)

    def test_failed_windows_are_skipped(self, go_grouped_log):
        # a grouped log cannot feed an inter-failure-time model, so every window fails
        result = selection_analyzer.one_step_prediction_error(candidate_for("jm"), go_grouped_log, seed=1)
        assert result.windows == ()
        assert result.skipped_windows == [5, 6, 7, 8]
        assert math.isnan(result.sse)


class TestCompare:
    def test_generating_model_ranks_first(self, go_grouped_log):
        report = selection_analyzer.compare_models(
            [candidate_for("delayed-s"), candidate_for("goel-okumoto")], go_grouped_log, seed=9, workers=2
        )
        assert report.best == "goel-okumoto"
        data = report.to_dict()
        assert data["criterion"] == "aic"
        assert {c["model"] for c in data["candidates"]} == {"delayed-s", "goel-okumoto"}
        assert data["ranking"][0] == "goel-okumoto"

    def test_integrated_criterion_needs_flags(self, go_grouped_log):
        with pytest.raises(ValidationError):
            selection_analyzer.compare_models([candidate_for("goel-okumoto")], go_grouped_log, criterion="ic")

    def test_integrated_criterion_ranking(self, go_grouped_log):
        report = selection_analyzer.compare_models(
            [candidate_for("goel-okumoto"), candidate_for("delayed-s")], go_grouped_log, seed=9,
            criterion="ic", ic_weights=[0.5, 0.3, 0.2],
            ic_flags={"goel-okumoto": [True, False, False], "delayed-s": [True, True, False]},
        )
        assert report.ranking == ("delayed-s", "goel-okumoto")

    def test_unknown_criterion(self, go_grouped_log):
        with pytest.raises(ValidationError):
            selection_analyzer.compare_models([candidate_for("goel-okumoto")], go_grouped_log, criterion="mdl")

    def test_needs_candidates(self, go_grouped_log):
        with pytest.raises(ValidationError):
            selection_analyzer.compare_models([], go_grouped_log)


def _scored(model, log_lik, n_params):
    aic, bic = selection_analyzer.information_criteria(log_lik, n_params, 20)
    return ModelScore(model=model, log_lik=log_lik, n_params=n_params, n_obs=20, aic=aic, bic=bic)


class TestRankingProperties:
    def _scores(self, shift=0.0):
        rng = np.random.default_rng(15)
        log_liks = np.round(rng.uniform(-80.0, -40.0, size=12) * 4.0) / 4.0
        log_liks[3] = log_liks[7]
        return [_scored(f"m{i:02d}", float(ll) + shift, int(k))
                for i, (ll, k) in enumerate(zip(log_liks, rng.integers(2, 5, size=12)))]

    @pytest.mark.parametrize("by", ["aic", "bic"])
    def test_order_ignores_input_order(self, by):
        scores = self._scores()
        expected = [s.model for s in selection_analyzer.rank_models(scores, by)]
        rng = np.random.default_rng(2)
        for _ in range(10):
            shuffled = [scores[i] for i in rng.permutation(len(scores))]
            assert [s.model for s in selection_analyzer.rank_models(shuffled, by)] == expected
        assert sorted(expected) == sorted(s.model for s in scores)

    @pytest.mark.parametrize("by", ["aic", "bic"])
    def test_order_survives_a_common_log_lik_shift(self, by):
        base = [s.model for s in selection_analyzer.rank_models(self._scores(), by)]
        shifted = [s.model for s in selection_analyzer.rank_models(self._scores(shift=123.25), by)]
        assert shifted == base

    @pytest.mark.slow
    def test_aic_usually_picks_the_generating_model(self):
        params = NhppParams({"a": 100.0, "g": 0.05})
        edges = np.linspace(0.0, 40.0, 11)
        candidates = [candidate_for(name) for name in ("goel-okumoto", "delayed-s", "logistic", "musa-okumoto")]

        def best_model(seed):
            log = bin_events(samplers.simulate_nhpp(NhppModelId.GOEL_OKUMOTO, params, 40.0, seed), edges)
            try:
                return selection_analyzer.compare_models(candidates, log, seed=seed, workers=1).best
            except RelGrowthError:
                return None

        winners = samplers.replicate(best_model, seed=44, n=50)
        assert winners.count("goel-okumoto") >= 25
