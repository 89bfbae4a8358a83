"""
Entropy of task response distributions, and accuracy curves against task entropy and against noise.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from syllobench.domain import (
    RESPONSES,
    ReasonerProfile,
    ResponseOption,
    SyllogisticTask,
    TASKS,
    parse_task,
)
from syllobench.errors import ConfigurationError, MissingDataError
from syllobench.harness import BenchmarkResult, ModelFactory, run_loo
from syllobench.synthetic import NoiseSpec, apply_noise
from syllobench.util import calculate_entropy

MAX_ENTROPY = math.log2(len(RESPONSES))
DEFAULT_BINS = 8


@dataclass(frozen=True)
class CurvePoint:
    x: float
    model: str
    accuracy: float
    n: int


@dataclass(frozen=True)
class EntropyReport:
    distributions: Dict[SyllogisticTask, Dict[ResponseOption, float]]
    entropies: Dict[SyllogisticTask, float]
    counts: Dict[SyllogisticTask, int]


def task_responses(
    dataset: Sequence[ReasonerProfile], task: SyllogisticTask
) -> List[ResponseOption]:
    responses = []
    for profile in dataset:
        response = profile.response_for(task)
        if response is not None:
            responses.append(response)
    return responses


def task_distribution(
    dataset: Sequence[ReasonerProfile], task: SyllogisticTask
) -> Dict[ResponseOption, float]:
    """
    Relative response frequencies for a task, over all nine responses in canonical order.

    :raises MissingDataError: If nobody answered the task.
    """
    responses = task_responses(dataset, task)
    if len(responses) == 0:
        raise MissingDataError(f"No subject answered task {task.code}")
    return {
        response: responses.count(response) / len(responses) for response in RESPONSES
    }


def task_entropy(dataset: Sequence[ReasonerProfile], task: SyllogisticTask) -> float:
    """
    Shannon entropy, in bits, of the task's empirical response distribution.

    :raises MissingDataError: If nobody answered the task.
    """
    responses = task_responses(dataset, task)
    if len(responses) == 0:
        raise MissingDataError(f"No subject answered task {task.code}")
    return calculate_entropy(responses)


def entropy_report(dataset: Sequence[ReasonerProfile]) -> EntropyReport:
    """Distributions and entropies of every task answered at least once."""
    distributions, entropies, counts = {}, {}, {}
    for task in TASKS:
        responses = task_responses(dataset, task)
        if len(responses) == 0:
            continue
        distributions[task] = task_distribution(dataset, task)
        entropies[task] = calculate_entropy(responses)
        counts[task] = len(responses)
    return EntropyReport(distributions, entropies, counts)


def mean_entropy(dataset: Sequence[ReasonerProfile]) -> float:
    entropies = entropy_report(dataset).entropies
    return float(np.mean(list(entropies.values())))


@dataclass(frozen=True)
class ScatterPoint:
    task: str
    entropy: float
    model: str
    accuracy: float
    n: int


def entropy_bin(entropy: float, bins: int) -> int:
    width = MAX_ENTROPY / bins
    return min(int(entropy / width), bins - 1)


def entropy_accuracy_curve(
    result: BenchmarkResult,
    dataset: Sequence[ReasonerProfile],
    bins: int = DEFAULT_BINS,
) -> Tuple[List[CurvePoint], List[ScatterPoint]]:
    """
    Per-model accuracy against task entropy.

    Tasks are grouped into `bins` equal-width bins over [0, log2 9]; a bin's accuracy is the mean hit over all
    of its trials, and empty bins are omitted. The raw per-task scatter is returned alongside.

    :raises ConfigurationError: If `bins` is not positive.
    :raises MissingDataError: If the result covers a task that nobody in the dataset answered.
    """
    if bins < 1:
        raise ConfigurationError(f"Need at least one entropy bin, got {bins}")

    report = entropy_report(dataset)
    frame = result.to_frame()
    width = MAX_ENTROPY / bins

    points, scatter = [], []
    for model_id in result.model_ids:
        trials = frame[frame["model"] == model_id]
        per_task = trials.groupby("task", sort=True)["hit"].agg(["sum", "count"])

        hits_by_bin: Dict[int, int] = {}
        trials_by_bin: Dict[int, int] = {}
        for code, row in per_task.iterrows():
            task = parse_task(code)
            if task not in report.entropies:
                raise MissingDataError(f"Task {code} is not answered in the dataset")
            entropy = report.entropies[task]
            scatter.append(
                ScatterPoint(
                    task=code,
                    entropy=entropy,
                    model=model_id,
                    accuracy=float(row["sum"]) / int(row["count"]),
                    n=int(row["count"]),
                )
            )
            index = entropy_bin(entropy, bins)
            hits_by_bin[index] = hits_by_bin.get(index, 0) + int(row["sum"])
            trials_by_bin[index] = trials_by_bin.get(index, 0) + int(row["count"])

        for index in sorted(trials_by_bin):
            points.append(
                CurvePoint(
                    x=(index + 0.5) * width,
                    model=model_id,
                    accuracy=hits_by_bin[index] / trials_by_bin[index],
                    n=trials_by_bin[index],
                )
            )
    return points, scatter


@dataclass(frozen=True)
class NoiseCurve:
    """
    Accuracy per model against noise proportion (`points`) and against the noisy data's mean task entropy
    (`entropy_points`), one row per (grid value, model).
    """

    points: List[CurvePoint]
    entropy_points: List[CurvePoint]


def noise_accuracy_curve(
    population: Sequence[ReasonerProfile],
    grid: Sequence[float],
    factories: Mapping[str, ModelFactory],
    seed: int,
    jobs: int = 1,
    on_point: Callable[[float], None] or None = None,
) -> NoiseCurve:
    """
    For every noise proportion in `grid`: inject noise into the population, run leave-one-out, and record every
    model's accuracy.

    :raises ConfigurationError: If the grid is empty or holds a value outside [0, 1].
    """
    if len(grid) == 0:
        raise ConfigurationError("The noise grid is empty")

    points, entropy_points = [], []
    for proportion in grid:
        noisy = apply_noise(population, NoiseSpec(proportion, seed))
        result = run_loo(noisy, factories, seed, jobs)
        entropy = mean_entropy(noisy)

        for model_id in result.model_ids:
            accuracy = result.accuracy(model_id)
            n = len(result.for_model(model_id))
            points.append(CurvePoint(float(proportion), model_id, accuracy, n))
            entropy_points.append(CurvePoint(entropy, model_id, accuracy, n))

        if on_point is not None:
            on_point(proportion)
    return NoiseCurve(points, entropy_points)


def _model_series(points: Sequence[CurvePoint], model: str) -> Tuple[np.ndarray, np.ndarray]:
    series = sorted((p.x, p.accuracy) for p in points if p.model == model)
    if len(series) == 0:
        raise MissingDataError(f"No curve points for model '{model}'")
    xs, ys = zip(*series)
    return np.array(xs), np.array(ys)


def linear_fit(points: Sequence[CurvePoint], model: str) -> Tuple[float, float, float]:
    """
    Least-squares line through a model's curve.

    :return: (slope, intercept, R^2); R^2 is 1 when the accuracies are constant.
    :raises MissingDataError: If fewer than two points exist for the model.
    """
    xs, ys = _model_series(points, model)
    if len(xs) < 2:
        raise MissingDataError(f"Need at least two points to fit a line for '{model}'")

    slope, intercept = np.polyfit(xs, ys, 1)
    residual = float(np.sum((ys - (slope * xs + intercept)) ** 2))
    total = float(np.sum((ys - ys.mean()) ** 2))
    r_squared = 1.0 if total == 0.0 else 1.0 - residual / total
    return float(slope), float(intercept), r_squared


def noise_for_accuracy(points: Sequence[CurvePoint], model: str, accuracy: float) -> float:
    """
    The noise proportion at which a model's (noise, accuracy) curve reaches `accuracy`, by linear
    interpolation. Accuracies outside the curve's range clamp to its end points.
    """
    xs, ys = _model_series(points, model)
    # np.interp needs increasing sample points; accuracy falls with noise
    order = np.argsort(ys, kind="stable")
    return float(np.interp(accuracy, ys[order], xs[order]))


def noise_equivalents(points: Sequence[CurvePoint], accuracy: float) -> Dict[str, float]:
    """`noise_for_accuracy` for every model in the curve, keyed by model id in first-seen order."""
    models = dict.fromkeys(point.model for point in points)
    return {model: noise_for_accuracy(points, model, accuracy) for model in models}
