import math
import unittest

import pytest

from syllobench.analysis import (
    CurvePoint,
    MAX_ENTROPY,
    entropy_accuracy_curve,
    entropy_bin,
    entropy_report,
    linear_fit,
    mean_entropy,
    noise_accuracy_curve,
    noise_equivalents,
    noise_for_accuracy,
    task_distribution,
    task_entropy,
)
from syllobench.domain import RESPONSES, ReasonerProfile, TrialRecord, parse_response, parse_task
from syllobench.errors import ConfigurationError, MissingDataError
from syllobench.harness import run_loo
from syllobench.registry import build_factories
from syllobench.synthetic import generate_noisy_population, generate_population


def _answers(code, responses):
    task = parse_task(code)
    return [
        ReasonerProfile(f"s{i}", (TrialRecord(1, task, parse_response(r)),))
        for i, r in enumerate(responses)
    ]


class TestTaskEntropy(unittest.TestCase):
    def test_point_mass(self):
        self.assertEqual(task_entropy(_answers("AA1", ["Aac"] * 5), parse_task("AA1")), 0.0)

    def test_uniform_over_nine(self):
        dataset = _answers("AA1", [r.code for r in RESPONSES])
        self.assertAlmostEqual(task_entropy(dataset, parse_task("AA1")), math.log2(9), delta=1e-9)

    def test_two_way_split(self):
        dataset = _answers("AA1", ["Aac", "NVC", "Aac", "NVC"])
        self.assertAlmostEqual(task_entropy(dataset, parse_task("AA1")), 1.0, delta=1e-9)

    def test_unanswered_task(self):
        with self.assertRaises(MissingDataError):
            task_entropy(_answers("AA1", ["Aac"]), parse_task("AA2"))
        with self.assertRaises(MissingDataError):
            task_distribution(_answers("AA1", ["Aac"]), parse_task("AA2"))

    def test_distribution_covers_all_responses(self):
        distribution = task_distribution(_answers("AA1", ["Aac", "Aac", "Eca", "NVC"]), parse_task("AA1"))
        self.assertEqual(list(distribution), list(RESPONSES))
        self.assertAlmostEqual(sum(distribution.values()), 1.0)
        self.assertEqual(distribution[parse_response("Aac")], 0.5)

    def test_report_skips_unanswered_tasks(self):
        report = entropy_report(_answers("AE3", ["Aac", "Iac"]))
        self.assertEqual([task.code for task in report.entropies], ["AE3"])
        self.assertEqual(report.counts[parse_task("AE3")], 2)


def test_zero_noise_population_has_low_entropy():
    assert mean_entropy(generate_population()) < mean_entropy(generate_noisy_population(1.0, 1))


@pytest.mark.parametrize("entropy, bins, expected", [(0.0, 8, 0), (MAX_ENTROPY, 8, 7), (MAX_ENTROPY / 2, 2, 1)])
def test_entropy_bin(entropy, bins, expected):
    assert entropy_bin(entropy, bins) == expected


class TestEntropyAccuracyCurve(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.dataset = generate_noisy_population(0.4, 2)[:20]
        cls.result = run_loo(cls.dataset, build_factories(["mfa", "ubcf"]), seed=2)

    def test_single_bin_equals_overall_accuracy(self):
        points, _ = entropy_accuracy_curve(self.result, self.dataset, bins=1)
        self.assertEqual(len(points), 2)
        for point in points:
            self.assertAlmostEqual(point.accuracy, self.result.accuracy(point.model), delta=1e-12)
            self.assertEqual(point.n, 20 * 64)

    def test_bins_are_trial_weighted_and_sparse(self):
        points, scatter = entropy_accuracy_curve(self.result, self.dataset, bins=8)
        self.assertEqual(len(scatter), 2 * 64)
        for model in ("mfa", "ubcf"):
            model_points = [p for p in points if p.model == model]
            self.assertLessEqual(len(model_points), 8)
            self.assertEqual(sum(p.n for p in model_points), 20 * 64)
            self.assertTrue(all(p.n > 0 for p in model_points))

    def test_bins_must_be_positive(self):
        with self.assertRaises(ConfigurationError):
            entropy_accuracy_curve(self.result, self.dataset, bins=0)

    def test_result_task_missing_from_dataset(self):
        with self.assertRaises(MissingDataError):
            entropy_accuracy_curve(self.result, _answers("AA1", ["Aac"]))


def _line(model, slope, intercept, xs):
    return [CurvePoint(x, model, slope * x + intercept, 10) for x in xs]


def test_linear_fit_exact_line():
    slope, intercept, r_squared = linear_fit(_line("m", -0.5, 0.9, [0, 0.25, 0.5, 1.0]), "m")
    assert slope == pytest.approx(-0.5)
    assert intercept == pytest.approx(0.9)
    assert r_squared == pytest.approx(1.0)


def test_linear_fit_needs_two_points():
    with pytest.raises(MissingDataError):
        linear_fit(_line("m", 1, 0, [0.5]), "m")
    with pytest.raises(MissingDataError):
        linear_fit(_line("m", 1, 0, [0, 1]), "other")


def test_noise_for_accuracy_interpolates():
    points = _line("m", -0.8, 0.9, [0.0, 0.5, 1.0])
    assert noise_for_accuracy(points, "m", 0.5) == pytest.approx(0.5)
    assert noise_for_accuracy(points, "m", 0.7) == pytest.approx(0.25)
    # clamps outside the curve
    assert noise_for_accuracy(points, "m", 0.95) == pytest.approx(0.0)


def test_noise_equivalents_cover_every_model():
    points = _line("steep", -0.8, 0.9, [0.0, 0.5, 1.0]) + _line("flat", -0.2, 0.6, [0.0, 0.5, 1.0])
    equivalents = noise_equivalents(points, 0.5)
    assert list(equivalents) == ["steep", "flat"]
    assert equivalents["steep"] == pytest.approx(0.5)
    assert equivalents["flat"] == pytest.approx(0.5)
    assert noise_equivalents(points, 0.1)["flat"] == pytest.approx(1.0)


class TestNoiseCurve(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.population = generate_population()[::16]
        cls.factories = build_factories(["mfa", "ubcf"])
        cls.curve = noise_accuracy_curve(cls.population, [0.0, 0.5, 1.0], cls.factories, seed=4)

    def test_one_point_per_model_and_level(self):
        self.assertEqual(len(self.curve.points), 6)
        self.assertEqual(len(self.curve.entropy_points), 6)
        self.assertEqual(sorted({p.x for p in self.curve.points}), [0.0, 0.5, 1.0])
        self.assertTrue(all(p.n == 16 * 64 for p in self.curve.points))

    def test_entropy_axis_rises_with_noise(self):
        by_noise = {p.x: q.x for p, q in zip(self.curve.points, self.curve.entropy_points)}
        self.assertLess(by_noise[0.0], by_noise[1.0])

    def test_deterministic(self):
        again = noise_accuracy_curve(self.population, [0.0, 0.5, 1.0], self.factories, seed=4)
        self.assertEqual(again.points, self.curve.points)

    def test_on_point_called_per_level(self):
        seen = []
        noise_accuracy_curve(self.population, [0.0, 1.0], build_factories(["mfa"]), seed=4, on_point=seen.append)
        self.assertEqual(seen, [0.0, 1.0])

    def test_empty_grid_rejected(self):
        with self.assertRaises(ConfigurationError):
            noise_accuracy_curve(self.population, [], self.factories, seed=4)

    def test_out_of_range_level_rejected(self):
        with self.assertRaises(ConfigurationError):
            noise_accuracy_curve(self.population, [1.5], self.factories, seed=4)
