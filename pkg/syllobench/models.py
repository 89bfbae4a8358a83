"""
The model zoo: a uniform predict/adapt interface, the rule-based cognitive models, table-driven models and the
Random and MFA baselines.
"""
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from syllobench.domain import (
    Mood,
    NVC,
    RESPONSES,
    ResponseMatrix,
    ResponseOption,
    SyllogisticTask,
    TASKS,
    entailed_responses,
    in_canonical_order,
    premises_of,
    valid_conclusions,
)
from syllobench.errors import ConfigurationError, TableValidationError
from syllobench.util import rank_indices

TIE_BREAK_POLICIES = ("canonical", "random")


class Model:
    """
    Base class of every model evaluated by the harness.

    Lifecycle, per leave-one-out fold:
        1. `pre_train` with the training subjects (an immutable view shared across models)
        2. for the test subject, `start_subject` once
        3. for every trial in order: `predict`, then `adapt` with the true response

    Subclasses implement `rank`; `predict` is the first-ranked response.

    Attributes:
        name (str): Default model id used in results.
        adaptive (bool): Whether `adapt` changes later predictions. The harness only calls `adapt` on adaptive models.
    """

    name = "model"
    adaptive = False

    def __init__(self, tie_break: str = "canonical"):
        if tie_break not in TIE_BREAK_POLICIES:
            raise ConfigurationError(
                f"Unknown tie-break policy '{tie_break}', expected one of {list(TIE_BREAK_POLICIES)}"
            )
        self.tie_break = tie_break
        self.rng = None

    def pre_train(self, training: ResponseMatrix):
        pass

    def start_subject(self, rng: np.random.Generator or None = None):
        """
        Reset all per-subject state.

        :param rng: The subject's random stream, used by stochastic models and random tie-breaking.
        """
        self.rng = rng

    def rank(self, task: SyllogisticTask) -> List[ResponseOption]:
        raise NotImplementedError

    def predict(self, task: SyllogisticTask) -> ResponseOption:
        return self.rank(task)[0]

    def adapt(self, task: SyllogisticTask, response: ResponseOption):
        pass

    def _rank_scores(self, scores: Sequence[float]) -> List[ResponseOption]:
        tie_rng = self.rng if self.tie_break == "random" else None
        return [RESPONSES[i] for i in rank_indices(scores, tie_rng)]


def preferred_first(preferred: Sequence[ResponseOption]) -> List[ResponseOption]:
    """All nine responses: `preferred` in the given order, then the rest in canonical order."""
    rest = [response for response in RESPONSES if response not in preferred]
    return list(preferred) + rest


##################
# Rule-based models
##################


def atmosphere_predict(task: SyllogisticTask) -> ResponseOption:
    moods = (task.mood1, task.mood2)
    negative = any(mood.negative for mood in moods)
    particular = any(mood.particular for mood in moods)

    if negative:
        mood = Mood.O if particular else Mood.E
    else:
        mood = Mood.I if particular else Mood.A
    return ResponseOption(mood, "ac")


# E is the most conservative mood, A the least; O and I share a rank
_CONSERVATIVENESS = {Mood.E: 2, Mood.O: 1, Mood.I: 1, Mood.A: 0}


def matching_predict(task: SyllogisticTask) -> ResponseOption:
    # ties go to the first premise
    if _CONSERVATIVENESS[task.mood2] > _CONSERVATIVENESS[task.mood1]:
        mood = task.mood2
    else:
        mood = task.mood1
    return ResponseOption(mood, "ac")


def converted_premises(task: SyllogisticTask):
    """The task's premises closed under (illicit) conversion of A and O statements."""
    premises = list(premises_of(task))
    for premise in premises_of(task):
        if premise.mood in (Mood.A, Mood.O):
            premises.append(premise.converse())
    return premises


def conversion_conclusions(task: SyllogisticTask) -> List[ResponseOption]:
    return in_canonical_order(entailed_responses(converted_premises(task)))


def conversion_predict(task: SyllogisticTask) -> ResponseOption:
    conclusions = conversion_conclusions(task)
    return conclusions[0] if conclusions else NVC


def fol_conclusions(task: SyllogisticTask) -> List[ResponseOption]:
    return in_canonical_order(valid_conclusions(task))


def fol_predict(task: SyllogisticTask) -> ResponseOption:
    conclusions = fol_conclusions(task)
    return conclusions[0] if conclusions else NVC


class RuleModel(Model):
    """
    A model that applies a fixed rule to the task and ignores both training data and adaptation.

    :param rule: Maps a task to its ranked responses (or a single preferred response).
    """

    def __init__(self, name: str, rule: Callable, tie_break: str = "canonical"):
        super().__init__(tie_break)
        self.name = name
        self.rule = rule

    def rank(self, task: SyllogisticTask) -> List[ResponseOption]:
        preferred = self.rule(task)
        if isinstance(preferred, ResponseOption):
            preferred = [preferred]
        if len(preferred) == 0:
            preferred = [NVC]
        return preferred_first(preferred)


def atmosphere_model(tie_break: str = "canonical") -> RuleModel:
    return RuleModel("atmosphere", atmosphere_predict, tie_break)


def matching_model(tie_break: str = "canonical") -> RuleModel:
    return RuleModel("matching", matching_predict, tie_break)


def conversion_model(tie_break: str = "canonical") -> RuleModel:
    return RuleModel("conversion", conversion_conclusions, tie_break)


def fol_model(tie_break: str = "canonical") -> RuleModel:
    return RuleModel("fol", fol_conclusions, tie_break)


RULES: Dict[str, Callable[[SyllogisticTask], ResponseOption]] = {
    "atmosphere": atmosphere_predict,
    "matching": matching_predict,
    "fol": fol_predict,
    "conversion": conversion_predict,
}


############
# Baselines
############


def random_predict(task: SyllogisticTask, rng: np.random.Generator) -> ResponseOption:
    return RESPONSES[int(rng.integers(len(RESPONSES)))]


class RandomModel(Model):
    """Uniform guessing over the nine responses, driven by the subject's seeded stream."""

    name = "random"

    def start_subject(self, rng: np.random.Generator or None = None):
        super().start_subject(rng if rng is not None else np.random.default_rng(0))

    def predict(self, task: SyllogisticTask) -> ResponseOption:
        return random_predict(task, self.rng)

    def rank(self, task: SyllogisticTask) -> List[ResponseOption]:
        first = self.predict(task)
        rest = [RESPONSES[i] for i in self.rng.permutation(len(RESPONSES))]
        return [first] + [response for response in rest if response != first]


def mfa_pretrain(training: ResponseMatrix) -> Dict[SyllogisticTask, ResponseOption]:
    """
    The most frequent response per task, ties broken by canonical response order.

    :raises ConfigurationError: If the training set is empty.
    """
    if training.n_subjects == 0:
        raise ConfigurationError("MFA needs at least one training subject")
    counts = training.task_counts()
    return {task: RESPONSES[rank_indices(counts[task.index])[0]] for task in TASKS}


class MFAModel(Model):
    name = "mfa"

    def __init__(self, tie_break: str = "canonical"):
        super().__init__(tie_break)
        self.counts = None

    def pre_train(self, training: ResponseMatrix):
        if training.n_subjects == 0:
            raise ConfigurationError("MFA needs at least one training subject")
        self.counts = training.task_counts()

    def rank(self, task: SyllogisticTask) -> List[ResponseOption]:
        return self._rank_scores(self.counts[task.index])


###############
# Table models
###############


@dataclass(frozen=True)
class PredictionTable:
    """
    Responses a model predicts for each of the 64 tasks, in preference order.

    :raises TableValidationError: If a task is missing or has no responses.
    """

    name: str
    entries: Tuple[Tuple[SyllogisticTask, Tuple[ResponseOption, ...]], ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

        tasks = {task for task, _ in self.entries}
        missing = [task.code for task in TASKS if task not in tasks]
        if missing:
            raise TableValidationError(
                f"Prediction table \"{self.name}\" is missing tasks {missing}"
            )
        empty = [task.code for task, responses in self.entries if len(responses) == 0]
        if empty:
            raise TableValidationError(
                f"Prediction table \"{self.name}\" has no responses for {empty}"
            )

    @classmethod
    def from_mapping(
        cls, name: str, mapping: Mapping[SyllogisticTask, Sequence[ResponseOption]]
    ) -> "PredictionTable":
        return cls(
            name,
            tuple(
                (task, tuple(responses))
                for task, responses in sorted(mapping.items(), key=lambda i: i[0].index)
            ),
        )

    def responses_for(self, task: SyllogisticTask) -> Tuple[ResponseOption, ...]:
        return dict(self.entries)[task]


def table_predict(table: PredictionTable, task: SyllogisticTask) -> ResponseOption:
    return table.responses_for(task)[0]


class TableModel(Model):
    def __init__(self, table: PredictionTable, tie_break: str = "canonical"):
        super().__init__(tie_break)
        self.table = table
        self.name = f"table:{table.name}"
        self._lookup = dict(table.entries)

    def rank(self, task: SyllogisticTask) -> List[ResponseOption]:
        return preferred_first(list(dict.fromkeys(self._lookup[task])))
