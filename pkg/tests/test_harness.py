import random
import unittest

import pytest

from syllobench.domain import NVC, ReasonerProfile, ResponseOption, TrialRecord, parse_response
from syllobench.errors import ConfigurationError, ProtocolViolation
from syllobench.harness import (
    BenchmarkResult,
    TrialOutcome,
    accuracy_summary,
    evaluate_subject,
    run_loo,
)
from syllobench.models import Model, preferred_first
from syllobench.registry import build_factories
from syllobench.synthetic import StrategyAssignment, generate_noisy_population, generate_profile


class ConstantModel(Model):
    name = "constant"

    def __init__(self, response: ResponseOption = NVC):
        super().__init__()
        self.response = response

    def rank(self, task):
        return preferred_first([self.response])


class OracleStub(Model):
    name = "oracle"

    def __init__(self, truth: ReasonerProfile):
        super().__init__()
        self.truth = truth

    def rank(self, task):
        return preferred_first([self.truth.response_for(task)])


class LastResponseEcho(Model):
    """Predicts the most recently revealed response and logs every call."""

    name = "echo"
    adaptive = True

    def __init__(self):
        super().__init__()
        self.events = []
        self.last = NVC

    def start_subject(self, rng=None):
        super().start_subject(rng)
        self.last = NVC

    def rank(self, task):
        self.events.append(("predict", task))
        return preferred_first([self.last])

    def adapt(self, task, response):
        self.events.append(("adapt", task))
        self.last = response


class StaticModel(ConstantModel):
    name = "static"

    def adapt(self, task, response):
        raise AssertionError(f"{task.code} revealed to a non-adaptive model")


class StringModel(Model):
    name = "string"

    def predict(self, task):
        return "Aac"


def _dataset(size=12, proportion=0.2, seed=3):
    return generate_noisy_population(proportion, seed)[:size]


class TestEvaluateSubject(unittest.TestCase):
    def setUp(self):
        self.profile = _dataset(1)[0]

    def test_oracle_hits_everything(self):
        outcomes = evaluate_subject(OracleStub(self.profile), self.profile)
        self.assertEqual(len(outcomes), 64)
        self.assertTrue(all(outcome.hit for outcome in outcomes))

    def test_constant_nvc_counts_nvc_truths(self):
        records = [
            TrialRecord(r.seq, r.task, NVC if i < 10 else parse_response("Aac"))
            for i, r in enumerate(self.profile.records)
        ]
        profile = ReasonerProfile("nvc10", tuple(records))
        outcomes = evaluate_subject(ConstantModel(), profile)
        self.assertAlmostEqual(BenchmarkResult(outcomes).accuracy("constant"), 10 / 64)

    def test_predict_always_precedes_adapt(self):
        echo = LastResponseEcho()
        evaluate_subject(echo, self.profile)
        expected = []
        for record in self.profile.records:
            expected += [("predict", record.task), ("adapt", record.task)]
        self.assertEqual(echo.events, expected)

    def test_echo_never_sees_current_truth(self):
        outcomes = evaluate_subject(LastResponseEcho(), self.profile)
        for previous, outcome in zip(self.profile.records, outcomes[1:]):
            self.assertEqual(outcome.prediction, previous.response)

    def test_non_adaptive_model_is_not_adapted(self):
        outcomes = evaluate_subject(StaticModel(), self.profile)
        self.assertEqual(len(outcomes), 64)

    def test_non_response_prediction_is_a_protocol_violation(self):
        with self.assertRaises(ProtocolViolation) as error:
            evaluate_subject(StringModel(), self.profile)
        self.assertEqual(error.exception.model_id, "string")
        self.assertEqual(error.exception.seq, self.profile.records[0].seq)
        self.assertIn(self.profile.subject_id, str(error.exception))


class TestRunLoo(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.dataset = _dataset()
        cls.factories = build_factories(["random", "mfa", "ubcf", "ibcf-fit"])
        cls.result = run_loo(cls.dataset, cls.factories, seed=7)

    def test_outcome_count(self):
        self.assertEqual(len(self.result), 4 * 12 * 64)
        self.assertEqual(self.result.model_ids, ["ibcf-fit", "mfa", "random", "ubcf"])

    def test_outcomes_sorted(self):
        keys = [outcome.sort_key() for outcome in self.result.outcomes]
        self.assertEqual(keys, sorted(keys))

    def test_deterministic(self):
        self.assertEqual(run_loo(self.dataset, self.factories, seed=7), self.result)

    def test_seed_changes_random_model_only(self):
        other = run_loo(self.dataset, self.factories, seed=8)

        def predictions(result, model_id):
            return [o.prediction for o in result.outcomes if o.model_id == model_id]

        self.assertNotEqual(predictions(other, "random"), predictions(self.result, "random"))
        self.assertEqual(predictions(other, "ubcf"), predictions(self.result, "ubcf"))

    def test_fold_independence_under_permutation(self):
        shuffled = list(self.dataset)
        random.Random(0).shuffle(shuffled)
        self.assertEqual(run_loo(shuffled, self.factories, seed=7), self.result)

    def test_job_count_does_not_change_result(self):
        self.assertEqual(run_loo(self.dataset, self.factories, seed=7, jobs=2), self.result)

    def test_on_fold_reports_every_subject(self):
        seen = []
        run_loo(self.dataset, build_factories(["mfa"]), seed=7, on_fold=seen.append)
        self.assertEqual(seen, [profile.subject_id for profile in self.dataset])

    def test_accuracy_is_recomputable_from_trials(self):
        for model_id in self.result.model_ids:
            outcomes = [o for o in self.result.outcomes if o.model_id == model_id]
            expected = sum(o.hit for o in outcomes) / len(outcomes)
            self.assertAlmostEqual(self.result.accuracy(model_id), expected, delta=1e-12)

    def test_summary(self):
        summaries = accuracy_summary(self.result)
        self.assertEqual([s.model_id for s in summaries], self.result.model_ids)
        for summary in summaries:
            self.assertEqual(summary.trials, 12 * 64)
            self.assertEqual(len(summary.subject_accuracies), 12)
            self.assertEqual(len(summary.task_accuracies), 64)
            mean_of_subjects = sum(summary.subject_accuracies.values()) / 12
            self.assertAlmostEqual(summary.accuracy, mean_of_subjects, delta=1e-12)

    def test_no_current_trial_leakage(self):
        # changing a subject's last answer cannot change earlier predictions for that subject
        changed = list(self.dataset)
        target = changed[0]
        last = target.records[-1]
        replacement = NVC if last.response != NVC else parse_response("Aac")
        changed[0] = ReasonerProfile(
            target.subject_id, target.records[:-1] + (TrialRecord(last.seq, last.task, replacement),)
        )
        result = run_loo(changed, self.factories, seed=7)

        def earlier(res):
            return [
                o
                for o in res.outcomes
                if o.subject_id == target.subject_id and o.seq != last.seq
            ]

        self.assertEqual(earlier(result), earlier(self.result))


def test_twins_are_recovered_by_ubcf():
    profile = generate_profile(StrategyAssignment(("fol", "matching", "conversion", "atmosphere")))
    twin = ReasonerProfile("twin", profile.records)
    result = run_loo([profile, twin], build_factories(["ubcf"]), seed=1)
    assert result.accuracy("ubcf") == 1.0


def test_run_loo_rejects_single_subject():
    with pytest.raises(ConfigurationError):
        run_loo(_dataset(1), build_factories(["mfa"]), seed=1)


def test_run_loo_rejects_duplicate_ids():
    profile = _dataset(1)[0]
    with pytest.raises(ConfigurationError):
        run_loo([profile, profile], build_factories(["mfa"]), seed=1)


def test_run_loo_rejects_empty_model_list():
    with pytest.raises(ConfigurationError):
        run_loo(_dataset(2), {}, seed=1)


def test_accuracy_summary_rejects_empty_result():
    with pytest.raises(ConfigurationError):
        accuracy_summary(BenchmarkResult([]))


def test_trial_outcome_hit():
    profile = _dataset(1)[0]
    record = profile.records[0]
    outcome = TrialOutcome("m", profile.subject_id, record.seq, record.task, record.response, record.response)
    assert outcome.hit
