"""
Leave-one-out benchmarking: every subject is evaluated by models trained on all remaining subjects, trial by
trial, with each true response revealed only after the model's prediction for it.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Sequence

import numpy as np
import pandas as pd

from syllobench.domain import (
    ReasonerProfile,
    ResponseMatrix,
    ResponseOption,
    SyllogisticTask,
)
from syllobench.errors import ConfigurationError, ProtocolViolation
from syllobench.models import Model
from syllobench.util import derive_rng

ModelFactory = Callable[[], Model]

TRIAL_COLUMNS = ["model", "subject", "seq", "task", "prediction", "truth", "hit"]


@dataclass(frozen=True)
class TrialOutcome:
    model_id: str
    subject_id: str
    seq: int
    task: SyllogisticTask
    prediction: ResponseOption
    truth: ResponseOption

    @property
    def hit(self) -> bool:
        return self.prediction == self.truth

    def sort_key(self):
        return self.model_id, self.subject_id, self.seq


class BenchmarkResult:
    """
    All trial outcomes of a benchmark run, canonically sorted by (model, subject, seq).

    Every aggregate is recomputed from the trial list.
    """

    def __init__(self, outcomes: Sequence[TrialOutcome]):
        self.outcomes = tuple(sorted(outcomes, key=TrialOutcome.sort_key))
        self._frame = None

    def __len__(self):
        return len(self.outcomes)

    def __eq__(self, other):
        return isinstance(other, self.__class__) and self.outcomes == other.outcomes

    @property
    def model_ids(self) -> List[str]:
        return sorted({outcome.model_id for outcome in self.outcomes})

    def to_frame(self) -> pd.DataFrame:
        if self._frame is None:
            self._frame = pd.DataFrame(
                [
                    (
                        outcome.model_id,
                        outcome.subject_id,
                        outcome.seq,
                        outcome.task.code,
                        outcome.prediction.code,
                        outcome.truth.code,
                        int(outcome.hit),
                    )
                    for outcome in self.outcomes
                ],
                columns=TRIAL_COLUMNS,
            )
        return self._frame

    def for_model(self, model_id: str) -> pd.DataFrame:
        frame = self.to_frame()
        return frame[frame["model"] == model_id]

    def accuracy(self, model_id: str) -> float:
        return float(self.for_model(model_id)["hit"].mean())

    def task_accuracies(self, model_id: str) -> Dict[str, float]:
        grouped = self.for_model(model_id).groupby("task", sort=True)["hit"].mean()
        return {task: float(value) for task, value in grouped.items()}

    def subject_accuracies(self, model_id: str) -> Dict[str, float]:
        grouped = self.for_model(model_id).groupby("subject", sort=True)["hit"].mean()
        return {subject: float(value) for subject, value in grouped.items()}


def evaluate_subject(
    model: Model,
    profile: ReasonerProfile,
    rng: np.random.Generator or None = None,
    model_id: str or None = None,
) -> List[TrialOutcome]:
    """
    Run the predict-then-adapt protocol over one subject's records, in their stored order. Non-adaptive
    models are never shown the revealed responses.

    :param model: A pre-trained model.
    :param profile: The test subject.
    :param rng: The subject's random stream, handed to `model.start_subject`.
    :param model_id: Id recorded in the outcomes, defaults to `model.name`.
    :raises ProtocolViolation: If the model predicts anything but a response option.
    """
    model_id = model_id or model.name
    model.start_subject(rng)

    outcomes = []
    for record in profile.records:
        prediction = model.predict(record.task)
        if not isinstance(prediction, ResponseOption):
            raise ProtocolViolation(model_id, profile.subject_id, record.seq, prediction)

        outcomes.append(
            TrialOutcome(
                model_id=model_id,
                subject_id=profile.subject_id,
                seq=record.seq,
                task=record.task,
                prediction=prediction,
                truth=record.response,
            )
        )
        if model.adaptive:
            model.adapt(record.task, record.response)
    return outcomes


def run_fold(
    dataset: Sequence[ReasonerProfile],
    matrix: ResponseMatrix,
    index: int,
    factories: Mapping[str, ModelFactory],
    seed: int,
) -> List[TrialOutcome]:
    """Train fresh models on everyone but subject `index` and evaluate that subject."""
    profile = dataset[index]
    training = matrix.without(index)

    outcomes = []
    for model_id, factory in factories.items():
        model = factory()
        model.pre_train(training)
        rng = derive_rng(seed, model_id, profile.subject_id)
        outcomes.extend(evaluate_subject(model, profile, rng, model_id))
    return outcomes


# per-process state of pool workers
_worker_state = {}


def _init_worker(dataset, matrix, factories, seed):
    _worker_state.update(dataset=dataset, matrix=matrix, factories=factories, seed=seed)


def _run_fold_in_worker(index: int) -> List[TrialOutcome]:
    return run_fold(
        _worker_state["dataset"],
        _worker_state["matrix"],
        index,
        _worker_state["factories"],
        _worker_state["seed"],
    )


def run_loo(
    dataset: Sequence[ReasonerProfile],
    factories: Mapping[str, ModelFactory],
    seed: int,
    jobs: int = 1,
    on_fold: Callable[[str], None] or None = None,
) -> BenchmarkResult:
    """
    Leave-one-out cross-validation over all subjects.

    :param dataset: At least two subjects with unique ids.
    :param factories: Model id -> callable producing a fresh model; called once per fold. Factories must be
        picklable when `jobs` > 1.
    :param seed: Base seed of every per-(model, subject) random stream.
    :param jobs: Number of worker processes; the result does not depend on it.
    :param on_fold: Called with the subject id after each fold completes.
    :raises ConfigurationError: On fewer than two subjects, duplicate subject ids, or no models.
    """
    dataset = list(dataset)
    if len(dataset) < 2:
        raise ConfigurationError(
            f"Leave-one-out needs at least 2 subjects, got {len(dataset)}"
        )
    subject_ids = [profile.subject_id for profile in dataset]
    if len(set(subject_ids)) != len(subject_ids):
        raise ConfigurationError("Subject ids must be unique")
    if len(factories) == 0:
        raise ConfigurationError("No models to evaluate")

    matrix = ResponseMatrix.from_profiles(dataset)
    factories = dict(factories)

    outcomes = []
    if jobs is None or jobs <= 1:
        for index in range(len(dataset)):
            outcomes.extend(run_fold(dataset, matrix, index, factories, seed))
            if on_fold is not None:
                on_fold(subject_ids[index])
    else:
        with ProcessPoolExecutor(
            max_workers=jobs,
            initializer=_init_worker,
            initargs=(dataset, matrix, factories, seed),
        ) as executor:
            for index, fold in enumerate(
                executor.map(_run_fold_in_worker, range(len(dataset)))
            ):
                outcomes.extend(fold)
                if on_fold is not None:
                    on_fold(subject_ids[index])

    return BenchmarkResult(outcomes)


@dataclass(frozen=True)
class ModelSummary:
    model_id: str
    accuracy: float
    trials: int
    task_accuracies: Dict[str, float]
    subject_accuracies: Dict[str, float]


def accuracy_summary(result: BenchmarkResult) -> List[ModelSummary]:
    """
    Overall, per-task and per-subject accuracy of every model, ordered by model id.

    :raises ConfigurationError: If the result holds no trials.
    """
    if len(result) == 0:
        raise ConfigurationError("Cannot summarize an empty benchmark result")
    return [
        ModelSummary(
            model_id=model_id,
            accuracy=result.accuracy(model_id),
            trials=len(result.for_model(model_id)),
            task_accuracies=result.task_accuracies(model_id),
            subject_accuracies=result.subject_accuracies(model_id),
        )
        for model_id in result.model_ids
    ]
