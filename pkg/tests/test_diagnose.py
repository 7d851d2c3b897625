import io
import json
import math

import numpy as np
import pytest

from votephase.analytic import Phase, limiting_delta
from votephase.diagnose import (
    NonBinaryEntry,
    PredictionMatrix,
    SingleClassData,
    diagnose,
    format_report,
    read_prediction_csv,
)
from votephase.model import (
    BadParameter,
    BadSize,
    EnsembleConfig,
    Equicorrelated,
    Geometric,
    Independent,
    Prior,
    RatePair,
)
from votephase.oracle import exact_error
from votephase.sampler import RngSeed, make_rng, sample_labeled_votes


def _synthetic(p, q, pi=0.5, n_samples=10_000, m=25, model=None, seed=1):
    cfg = EnsembleConfig(
        n=m, rates=RatePair(p=p, q=q), prior=Prior(pi=pi), model=model or Independent()
    )
    labels, votes = sample_labeled_votes(cfg, n_samples, make_rng(RngSeed(seed=seed)))
    return PredictionMatrix(labels=labels, votes=votes)


class TestPredictionMatrix:
    def test_valid(self):
        m = PredictionMatrix(labels=[0, 1, 1], votes=[[1, 0], [0, 1], [1, 1]])
        assert m.n_samples == 3 and m.n_classifiers == 2
        assert m.votes.dtype == np.uint8

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassData):
            PredictionMatrix(labels=[1, 1, 1], votes=[[1], [0], [1]])

    def test_non_binary_rejected(self):
        with pytest.raises(NonBinaryEntry):
            PredictionMatrix(labels=[0, 2], votes=[[1], [0]])
        with pytest.raises(NonBinaryEntry):
            PredictionMatrix(labels=[0, 1], votes=[[1], [5]])

    def test_too_small_rejected(self):
        with pytest.raises(BadSize):
            PredictionMatrix(labels=[1], votes=[[1]])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(BadParameter):
            PredictionMatrix(labels=[0, 1], votes=[[1], [0], [1]])

    def test_immutable(self):
        m = PredictionMatrix(labels=[0, 1], votes=[[1], [0]])
        with pytest.raises(ValueError):
            m.votes[0, 0] = 0


class TestDiagnose:
    def test_recovers_generator_rates(self):
        matrix = _synthetic(0.7, 0.3)
        report = diagnose(matrix)
        n1 = int(matrix.labels.sum())
        se_p = math.sqrt(0.7 * 0.3 / (n1 * 25))
        assert report.p_hat == pytest.approx(0.7, abs=4 * se_p)
        assert report.q_hat == pytest.approx(0.3, abs=0.01)
        assert report.verdict.phase is Phase.BENEFICIAL
        assert report.pi_source == "estimated"
        assert report.pi_used == pytest.approx(0.5, abs=0.02)

    def test_harmful_when_tpr_below_half(self):
        # p < 1/2 drives the class-1 limit to certain error, so voting
        # loses to a single classifier whenever p > q.
        report = diagnose(_synthetic(0.45, 0.3, n_samples=20_000))
        assert report.p_hat < 0.5 and report.q_hat < 0.5
        assert report.verdict.phase is Phase.HARMFUL
        assert report.verdict.delta_inf > 0

    def test_perfect_classifiers_clamped_with_warning(self):
        labels = np.array([0, 1] * 50)
        votes = np.tile(labels[:, None], (1, 5))
        report = diagnose(PredictionMatrix(labels=labels, votes=votes))
        assert report.p_hat == 1.0 and report.q_hat == 0.0
        assert any("boundary" in w for w in report.warnings)
        assert report.verdict.phase is Phase.BENEFICIAL
        assert report.err_majority == 0.0

    def test_prior_override(self):
        matrix = _synthetic(0.7, 0.3, pi=0.5)
        report = diagnose(matrix, prior_override=Prior(pi=0.2))
        assert report.pi_used == 0.2 and report.pi_source == "override"
        expected = (1 - report.p_hat) * 0.2 + report.q_hat * 0.8
        assert report.err_hat_individual == expected

    def test_err_hat_individual_identity(self):
        report = diagnose(_synthetic(0.6, 0.45, seed=9))
        pi = report.pi_used
        assert report.err_hat_individual == (1 - report.p_hat) * pi + report.q_hat * (1 - pi)

    def test_majority_error_matches_oracle_on_independent_data(self):
        p, q, m, N = 0.7, 0.3, 25, 10_000
        matrix = _synthetic(p, q, m=m, n_samples=N, seed=17)
        report = diagnose(matrix)
        cfg = EnsembleConfig(n=m, rates=RatePair(p=p, q=q), prior=Prior(pi=0.5))
        err = exact_error(cfg)
        assert report.err_majority == pytest.approx(
            err, abs=4 * math.sqrt(err * (1 - err) / N)
        )

    def test_correlation_recovery_equicorrelated(self):
        matrix = _synthetic(0.7, 0.3, model=Equicorrelated(lam=0.3), n_samples=20_000, seed=23)
        report = diagnose(matrix)
        assert report.corr_class1 == pytest.approx(0.3, abs=0.02)
        assert report.corr_class0 == pytest.approx(0.3, abs=0.02)

    def test_high_correlation_warning(self):
        matrix = _synthetic(0.7, 0.3, model=Equicorrelated(lam=0.65), n_samples=20_000, seed=29)
        report = diagnose(matrix)
        assert any("weak dependence" in w for w in report.warnings)

    def test_near_boundary_rate_warns_indeterminate(self):
        matrix = _synthetic(0.502, 0.3, n_samples=800, m=4, seed=31)
        report = diagnose(matrix)
        assert any("indeterminate" in w for w in report.warnings)

    def test_ordered_unlocks_lag_means(self):
        matrix = _synthetic(0.6, 0.4, model=Geometric(gamma=0.6), n_samples=20_000, seed=37)
        plain = diagnose(matrix)
        ordered = diagnose(matrix, assume_ordered=True)
        assert plain.lag_means_class1 is None
        assert ordered.lag_means_class1 is not None
        assert ordered.lag_means_class1[0] == pytest.approx(0.6, abs=0.03)
        assert ordered.lag_means_class1[2] == pytest.approx(0.216, abs=0.03)

    def test_constant_classifier_excluded_from_correlation(self):
        labels = np.array([0, 1, 0, 1, 0, 1, 0, 1])
        votes = np.array(
            [
                [1, 0, 1],
                [1, 1, 0],
                [1, 1, 0],
                [1, 0, 1],
                [1, 0, 0],
                [1, 1, 1],
                [1, 1, 1],
                [1, 0, 0],
            ]
        )
        report = diagnose(PredictionMatrix(labels=labels, votes=votes))
        assert any("constantly" in w for w in report.warnings)

    def test_verdict_matches_limiting_delta_at_estimates(self):
        report = diagnose(_synthetic(0.8, 0.2, seed=41))
        twin = limiting_delta(
            RatePair(p=report.p_hat, q=report.q_hat), Prior(pi=report.pi_used)
        )
        assert report.verdict == twin


class TestReportSerialization:
    def test_to_dict_is_json_ready(self):
        report = diagnose(_synthetic(0.7, 0.3, n_samples=500, m=5), assume_ordered=True)
        payload = json.loads(json.dumps(report.to_dict()))
        assert payload["n_classifiers"] == 5
        assert payload["verdict"]["phase"] == "beneficial"
        assert len(payload["p_hat_i"]) == 5
        assert "lag_means_class1" in payload

    def test_format_report_mentions_key_numbers(self):
        report = diagnose(_synthetic(0.7, 0.3, n_samples=500, m=5))
        text = format_report(report)
        assert "p_hat" in text and "verdict" in text
        assert "beneficial" in text


class TestReadPredictionCsv:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "preds.csv"
        path.write_text("y,f1,f2\n1,1,0\n0,0,1\n1,1,1\n0,0,0\n")
        matrix = read_prediction_csv(str(path))
        assert matrix.n_samples == 4 and matrix.n_classifiers == 2
        np.testing.assert_array_equal(matrix.labels, [1, 0, 1, 0])

    def test_accepts_file_objects(self):
        matrix = read_prediction_csv(io.StringIO("y,f1\n0,1\n1,0\n"))
        assert matrix.n_samples == 2

    def test_bad_header(self):
        with pytest.raises(BadParameter):
            read_prediction_csv(io.StringIO("label,f1\n0,1\n1,0\n"))
        with pytest.raises(BadParameter):
            read_prediction_csv(io.StringIO("y\n0\n1\n"))

    def test_empty_and_headerless(self):
        with pytest.raises(BadParameter):
            read_prediction_csv(io.StringIO(""))
        with pytest.raises(BadSize):
            read_prediction_csv(io.StringIO("y,f1\n"))

    def test_non_binary_entry_reports_location(self):
        with pytest.raises(NonBinaryEntry, match="line 3"):
            read_prediction_csv(io.StringIO("y,f1\n0,1\n1,7\n"))

    def test_ragged_row_rejected(self):
        with pytest.raises(BadParameter, match="line 2"):
            read_prediction_csv(io.StringIO("y,f1,f2\n0,1\n"))
