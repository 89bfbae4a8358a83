"""
Memory-based collaborative filtering for syllogistic responses.

UBCF weights every training subject by the number of responses it shares with the test subject's revealed
history and lets them vote. IBCF scores each (task, response) item by its co-occurrence with the revealed items,
i.e. the relevant entries of M x u. With raw match counts and a binary u the two scores coincide, so the
domain-agnostic UBCF and IBCF make the same predictions.

The "fit" variants only use evidence from tasks of the target task's figure, and weigh it multiplicatively:
UBCF-fit votes with exp(sharpness * similarity), IBCF-fit adds up tempered log conditional frequencies
estimated from M. Evidence that every training subject shares then leaves their rankings unchanged.
"""
from dataclasses import dataclass
from typing import List, Mapping, Sequence, Set

import numpy as np

from syllobench.domain import (
    Figure,
    MISSING,
    N_RESPONSES,
    N_TASKS,
    RESPONSES,
    ReasonerProfile,
    ResponseMatrix,
    ResponseOption,
    SyllogisticTask,
    TASKS,
)
from syllobench.errors import ConfigurationError
from syllobench.models import Model
from syllobench.util import rank_indices

N_ITEMS = N_TASKS * N_RESPONSES

# vote weight of a UBCF-fit neighbour grows by a factor e^0.5 per matching same-figure response
FIT_SHARPNESS = 0.5
# IBCF-fit: weight of the summed log likelihoods against the log popularity prior
FIT_TEMPERATURE = 0.15
# IBCF-fit: m-estimate strength, in pseudo-subjects, pulling conditional frequencies to the marginal
FIT_SMOOTHING = 9.0

# figure of each task column, 0-based
_TASK_FIGURES = np.array([int(task.figure) - 1 for task in TASKS])
_ITEM_TASKS = np.repeat(np.arange(N_TASKS), N_RESPONSES)


def item_index(task: SyllogisticTask, response: ResponseOption) -> int:
    """Index of the (task, response) item: task-major, responses in canonical order."""
    return task.index * N_RESPONSES + response.index


def task_items(task: SyllogisticTask) -> slice:
    return slice(task.index * N_RESPONSES, (task.index + 1) * N_RESPONSES)


def _check_positive(name: str, value: float or None):
    if value is not None and not value > 0:
        raise ConfigurationError(f"{name} must be positive, got {value}")


#######
# UBCF
#######


def ubcf_similarity(
    history: Mapping[SyllogisticTask, ResponseOption], candidate: ReasonerProfile
) -> int:
    """Number of revealed tasks the candidate answered the same way."""
    responses = candidate.responses()
    return sum(1 for task, response in history.items() if responses.get(task) == response)


class UBCF(Model):
    """
    User-based collaborative filtering.

    Similarities are kept incrementally: `adapt` adds one to every training subject whose response to the
    revealed task matches, both overall and within the revealed task's figure.

    :param figure_only: Count only matches on tasks sharing the target task's figure (the "fit" variant).
    :param sharpness: If set, a neighbour votes with weight exp(sharpness * similarity) instead of its raw
        similarity.
    :param top_k: If set, only the `top_k` most similar training subjects vote.
    """

    name = "ubcf"
    adaptive = True

    def __init__(
        self,
        figure_only: bool = False,
        sharpness: float or None = None,
        top_k: int or None = None,
        tie_break: str = "canonical",
    ):
        super().__init__(tie_break)
        if top_k is not None and top_k < 1:
            raise ConfigurationError(f"top_k must be positive, got {top_k}")
        _check_positive("sharpness", sharpness)
        self.figure_only = figure_only
        self.sharpness = sharpness
        self.top_k = top_k
        if figure_only:
            self.name = "ubcf-fit"

        self.responses = None
        self.counts = None
        self.id_order = None
        self.similarity = None
        self.figure_similarity = None

    def pre_train(self, training: ResponseMatrix):
        if training.n_subjects == 0:
            raise ConfigurationError("UBCF needs at least one training subject")
        self.responses = training.responses
        self.counts = training.task_counts()
        # rank of each training subject's id, breaks ties between equally similar neighbours
        self.id_order = np.argsort(np.argsort(np.array(training.subject_ids), kind="stable"))

    def start_subject(self, rng: np.random.Generator or None = None):
        super().start_subject(rng)
        n = self.responses.shape[0]
        self.similarity = np.zeros(n, dtype=np.int64)
        self.figure_similarity = np.zeros((len(Figure), n), dtype=np.int64)

    def adapt(self, task: SyllogisticTask, response: ResponseOption):
        matches = self.responses[:, task.index] == response.index
        self.similarity += matches
        self.figure_similarity[int(task.figure) - 1] += matches

    def similarities(self, task: SyllogisticTask) -> np.ndarray:
        """Match count of every training subject, restricted to the task's figure for the fit variant."""
        if self.figure_only:
            return self.figure_similarity[int(task.figure) - 1]
        return self.similarity

    def weights(self, task: SyllogisticTask) -> np.ndarray:
        similarities = self.similarities(task)
        if self.sharpness is None:
            weights = similarities.astype(float)
        else:
            # relative to the best match: a count added to every subject leaves the weights unchanged
            weights = np.exp(self.sharpness * (similarities - similarities.max()))

        if self.top_k is not None and self.top_k < len(weights):
            neighbours = np.lexsort((self.id_order, -weights))[: self.top_k]
            masked = np.zeros_like(weights)
            masked[neighbours] = weights[neighbours]
            weights = masked
        return weights

    def scores(self, task: SyllogisticTask) -> np.ndarray:
        column = self.responses[:, task.index]
        answered = column != MISSING
        scores = np.bincount(
            column[answered], weights=self.weights(task)[answered], minlength=N_RESPONSES
        )
        if not scores.any():
            # cold start: unweighted majority
            scores = self.counts[task.index].astype(float)
        return scores

    def rank(self, task: SyllogisticTask) -> List[ResponseOption]:
        return self._rank_scores(self.scores(task))


def _replay(model: Model, training: Sequence[ReasonerProfile], history):
    model.pre_train(ResponseMatrix.from_profiles(training))
    model.start_subject()
    for task, response in dict(history).items():
        model.adapt(task, response)
    return model


def ubcf_predict(
    task: SyllogisticTask,
    history: Mapping[SyllogisticTask, ResponseOption],
    training: Sequence[ReasonerProfile],
) -> ResponseOption:
    return _replay(UBCF(), training, history).predict(task)


def ubcf_fit_predict(
    task: SyllogisticTask,
    history: Mapping[SyllogisticTask, ResponseOption],
    training: Sequence[ReasonerProfile],
) -> ResponseOption:
    return _replay(UBCF(figure_only=True, sharpness=FIT_SHARPNESS), training, history).predict(task)


#######
# IBCF
#######


@dataclass(frozen=True, eq=False)
class ItemMatrix:
    """
    Item x item co-occurrence counts over the 576 (task, response) items: entry [i, j] is the number of training
    subjects exhibiting both items. Symmetric; the diagonal holds item popularity.
    """

    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def popularity(self) -> np.ndarray:
        return np.diagonal(self.counts)

    @property
    def log_popularity(self) -> np.ndarray:
        """log of the popularity; -inf for items nobody exhibits."""
        with np.errstate(divide="ignore"):
            return np.log(self.popularity.astype(float))

    def column(self, item: int) -> np.ndarray:
        return self.counts[:, item]

    def log_likelihoods(self, item: int, smoothing: float = FIT_SMOOTHING) -> np.ndarray:
        """
        Estimated log P(item | i) for every item i: the share of subjects exhibiting i who also exhibit `item`,
        shrunk by an m-estimate towards the share of `item` among all subjects who answered its task.

        All zeros when no training subject exhibits `item`. When every respondent of its task exhibits `item`,
        the entry is exactly zero at each item whose exhibitors all exhibit `item` too.
        """
        popularity = self.popularity
        if popularity[item] == 0:
            return np.zeros(N_ITEMS)
        respondents = popularity[_ITEM_TASKS == _ITEM_TASKS[item]].sum()
        prior = popularity[item] / respondents
        return np.log((self.column(item) + smoothing * prior) / (popularity + smoothing))


def one_hot(training: ResponseMatrix) -> np.ndarray:
    """(subjects, 576) binary matrix of the items each subject exhibits."""
    items = np.zeros((training.n_subjects, N_ITEMS))
    rows, tasks = np.nonzero(training.responses != MISSING)
    items[rows, tasks * N_RESPONSES + training.responses[rows, tasks]] = 1.0
    return items


def ibcf_build(training: ResponseMatrix or Sequence[ReasonerProfile]) -> ItemMatrix:
    if not isinstance(training, ResponseMatrix):
        training = ResponseMatrix.from_profiles(training)
    if training.n_subjects == 0:
        raise ConfigurationError("IBCF needs at least one training subject")
    items = one_hot(training)
    # float products are exact for these magnitudes
    return ItemMatrix(np.rint(items.T @ items).astype(np.int64))


class UserVector:
    """Binary vector over the 576 items marking the test subject's revealed responses."""

    def __init__(self):
        self.items: Set[int] = set()
        self._tasks: Set[SyllogisticTask] = set()

    def reveal(self, task: SyllogisticTask, response: ResponseOption):
        if task in self._tasks:
            raise ValueError(f"Task {task.code} was already revealed")
        self._tasks.add(task)
        self.items.add(item_index(task, response))

    @property
    def vector(self) -> np.ndarray:
        vector = np.zeros(N_ITEMS, dtype=np.int64)
        vector[list(self.items)] = 1
        return vector

    def restricted_to(self, figure: Figure) -> np.ndarray:
        vector = self.vector
        vector[_TASK_FIGURES[_ITEM_TASKS] != int(figure) - 1] = 0
        return vector


def ibcf_scores(
    task: SyllogisticTask,
    u: UserVector,
    matrix: ItemMatrix,
    figure_only: bool = False,
    temperature: float or None = None,
) -> np.ndarray:
    """
    Scores of the task's nine responses.

    :param figure_only: Use only revealed items of the task's figure.
    :param temperature: If set, score log popularity plus `temperature` times the summed log likelihoods of
        the revealed items, instead of M x u.
    """
    vector = u.restricted_to(task.figure) if figure_only else u.vector
    if temperature is not None:
        evidence = np.zeros(N_RESPONSES)
        for item in np.flatnonzero(vector):
            evidence += matrix.log_likelihoods(int(item))[task_items(task)]
        return matrix.log_popularity[task_items(task)] + temperature * evidence

    scores = matrix.counts[task_items(task)] @ vector
    if not scores.any():
        scores = matrix.popularity[task_items(task)]
    return scores


def ibcf_predict(task: SyllogisticTask, u: UserVector, matrix: ItemMatrix) -> ResponseOption:
    scores = ibcf_scores(task, u, matrix)
    return RESPONSES[rank_indices(scores)[0]]


def ibcf_fit_predict(task: SyllogisticTask, u: UserVector, matrix: ItemMatrix) -> ResponseOption:
    scores = ibcf_scores(task, u, matrix, figure_only=True, temperature=FIT_TEMPERATURE)
    return RESPONSES[rank_indices(scores)[0]]


class IBCF(Model):
    """
    Item-based collaborative filtering.

    Instead of recomputing the scores per trial, `adapt` adds the revealed item's evidence to a running total
    (overall and per figure): its column of M, or with a temperature its log likelihood vector.

    :param figure_only: Sum only over revealed items whose task shares the target task's figure.
    :param temperature: If set, score like `ibcf_scores` with that temperature.
    """

    name = "ibcf"
    adaptive = True

    def __init__(
        self,
        figure_only: bool = False,
        temperature: float or None = None,
        tie_break: str = "canonical",
    ):
        super().__init__(tie_break)
        _check_positive("temperature", temperature)
        self.figure_only = figure_only
        self.temperature = temperature
        if figure_only:
            self.name = "ibcf-fit"

        self.matrix = None
        self.totals = None
        self.figure_totals = None

    def pre_train(self, training: ResponseMatrix):
        self.matrix = ibcf_build(training)

    def start_subject(self, rng: np.random.Generator or None = None):
        super().start_subject(rng)
        dtype = np.int64 if self.temperature is None else float
        self.totals = np.zeros(N_ITEMS, dtype=dtype)
        self.figure_totals = np.zeros((len(Figure), N_ITEMS), dtype=dtype)

    def evidence(self, item: int) -> np.ndarray:
        if self.temperature is None:
            return self.matrix.column(item)
        return self.matrix.log_likelihoods(item)

    def adapt(self, task: SyllogisticTask, response: ResponseOption):
        evidence = self.evidence(item_index(task, response))
        self.totals += evidence
        self.figure_totals[int(task.figure) - 1] += evidence

    def scores(self, task: SyllogisticTask) -> np.ndarray:
        if self.figure_only:
            totals = self.figure_totals[int(task.figure) - 1]
        else:
            totals = self.totals

        if self.temperature is not None:
            return self.matrix.log_popularity[task_items(task)] + self.temperature * totals[task_items(task)]

        scores = totals[task_items(task)]
        if not scores.any():
            scores = self.matrix.popularity[task_items(task)]
        return scores

    def rank(self, task: SyllogisticTask) -> List[ResponseOption]:
        return self._rank_scores(self.scores(task))
