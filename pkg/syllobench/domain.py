"""
The syllogistic task space: moods, figures, the 64 tasks, the 9 response options, reasoner profiles, and a
finite-model validity oracle for classical (no existential import) quantified statements.
"""
import itertools
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

import numpy as np

from syllobench.errors import DatasetError, ParseError

UNIVERSE_SIZE = 6


class Mood(Enum):
    A = "A"
    I = "I"
    E = "E"
    O = "O"

    @property
    def negative(self) -> bool:
        return self in (Mood.E, Mood.O)

    @property
    def particular(self) -> bool:
        return self in (Mood.I, Mood.O)

    @property
    def quantifier(self) -> str:
        return {
            Mood.A: "All",
            Mood.I: "Some",
            Mood.E: "No",
            Mood.O: "Some ... not",
        }[self]

    @classmethod
    def parse(cls, letter: str) -> "Mood":
        try:
            return cls(letter)
        except ValueError:
            raise ParseError(f"Invalid mood '{letter}', expected one of A, I, E, O")


class Figure(IntEnum):
    """
    Arrangement of the end terms A, C and the middle term B across the two premises.
    """

    ONE = 1
    TWO = 2
    THREE = 3
    FOUR = 4

    @property
    def terms(self) -> Tuple[Tuple[str, str], Tuple[str, str]]:
        return {
            Figure.ONE: (("A", "B"), ("B", "C")),
            Figure.TWO: (("B", "A"), ("C", "B")),
            Figure.THREE: (("B", "A"), ("B", "C")),
            Figure.FOUR: (("A", "B"), ("C", "B")),
        }[self]


@dataclass(frozen=True)
class Premise:
    """
    A quantified statement "<mood> <subject> are <predicate>". Also used for conclusions.
    """

    mood: Mood
    subject: str
    predicate: str

    def converse(self) -> "Premise":
        return Premise(self.mood, self.predicate, self.subject)

    def __str__(self):
        if self.mood == Mood.O:
            return f"Some {self.subject} are not {self.predicate}"
        return f"{self.mood.quantifier} {self.subject} are {self.predicate}"


@dataclass(frozen=True)
class SyllogisticTask:
    mood1: Mood
    mood2: Mood
    figure: Figure

    @property
    def code(self) -> str:
        return f"{self.mood1.value}{self.mood2.value}{int(self.figure)}"

    @property
    def index(self) -> int:
        """Position of the task in `enumerate_tasks()`."""
        return _TASK_INDEX[self]

    def __str__(self):
        return self.code


@dataclass(frozen=True)
class ResponseOption:
    """
    One of the nine conclusion choices: a quantified conclusion between the end terms, or NVC (mood None).

    :param mood: Quantifier of the conclusion, None for "No Valid Conclusion".
    :param direction: "ac" (A is the subject) or "ca" (C is the subject); None for NVC.
    """

    mood: Mood or None
    direction: str or None = None

    @property
    def is_nvc(self) -> bool:
        return self.mood is None

    @property
    def code(self) -> str:
        if self.is_nvc:
            return "NVC"
        return f"{self.mood.value}{self.direction}"

    @property
    def index(self) -> int:
        """Position of the response in the canonical order."""
        return _RESPONSE_INDEX[self]

    def as_statement(self) -> Premise:
        if self.is_nvc:
            raise ValueError("NVC is not a quantified statement")
        if self.direction == "ac":
            return Premise(self.mood, "A", "C")
        return Premise(self.mood, "C", "A")

    def __str__(self):
        return self.code


TASKS: Tuple[SyllogisticTask, ...] = tuple(
    sorted(
        (
            SyllogisticTask(mood1, mood2, figure)
            for mood1, mood2, figure in itertools.product(Mood, Mood, Figure)
        ),
        key=lambda task: task.code,
    )
)
_TASK_INDEX: Dict[SyllogisticTask, int] = {task: i for i, task in enumerate(TASKS)}
_TASK_BY_CODE: Dict[str, SyllogisticTask] = {task.code: task for task in TASKS}

NVC = ResponseOption(None)
RESPONSES: Tuple[ResponseOption, ...] = tuple(
    ResponseOption(mood, direction)
    for mood in (Mood.A, Mood.I, Mood.E, Mood.O)
    for direction in ("ac", "ca")
) + (NVC,)
_RESPONSE_INDEX: Dict[ResponseOption, int] = {
    response: i for i, response in enumerate(RESPONSES)
}
_RESPONSE_BY_CODE: Dict[str, ResponseOption] = {
    response.code: response for response in RESPONSES
}

N_TASKS = len(TASKS)
N_RESPONSES = len(RESPONSES)


def parse_task(code: str) -> SyllogisticTask:
    """
    Parse a canonical task code such as "AE3".

    :raises ParseError: If the code is not two mood letters followed by a figure digit 1-4.
    """
    if not isinstance(code, str) or len(code) != 3:
        raise ParseError(f"Invalid task code {code!r}, expected 3 characters like 'AE3'")

    mood1 = Mood.parse(code[0])
    mood2 = Mood.parse(code[1])
    if code[2] not in "1234":
        raise ParseError(f"Invalid figure '{code[2]}' in task code {code!r}, expected 1-4")

    return SyllogisticTask(mood1, mood2, Figure(int(code[2])))


def parse_response(code: str) -> ResponseOption:
    """
    Parse one of the nine canonical response codes (case-sensitive).

    :raises ParseError: If the code is not a response code.
    """
    try:
        return _RESPONSE_BY_CODE[code]
    except (KeyError, TypeError):
        raise ParseError(
            f"Invalid response code {code!r}, expected one of {[r.code for r in RESPONSES]}"
        )


def enumerate_tasks() -> List[SyllogisticTask]:
    return list(TASKS)


def premises_of(task: SyllogisticTask) -> Tuple[Premise, Premise]:
    (s1, p1), (s2, p2) = task.figure.terms
    return Premise(task.mood1, s1, p1), Premise(task.mood2, s2, p2)


#####################
# Finite-model oracle
#####################

# A model over the terms A, B, C is characterized, up to the truth of quantified statements, by which of the
# eight Venn cells are occupied. Cell c contains the term with bit b iff c & b.
_TERM_BITS = {"A": 1, "B": 2, "C": 4}


@lru_cache(maxsize=None)
def occupancy_patterns(universe_size: int = UNIVERSE_SIZE) -> Tuple[FrozenSet[int], ...]:
    """
    Every set of occupied cells realizable by an assignment of three subsets over `universe_size` elements,
    i.e. every set of at most `universe_size` cells.
    """
    return tuple(
        frozenset(cells)
        for size in range(0, min(universe_size, 8) + 1)
        for cells in itertools.combinations(range(8), size)
    )


def holds(statement: Premise, occupied: Iterable[int]) -> bool:
    """
    Truth of a quantified statement in the model given by its occupied Venn cells.
    """
    subject = _TERM_BITS[statement.subject]
    predicate = _TERM_BITS[statement.predicate]

    both = any(cell & subject and cell & predicate for cell in occupied)
    subject_only = any(cell & subject and not cell & predicate for cell in occupied)

    if statement.mood == Mood.A:
        return not subject_only
    if statement.mood == Mood.I:
        return both
    if statement.mood == Mood.E:
        return not both
    return subject_only


def entails(
    premises: Sequence[Premise],
    conclusion: Premise,
    universe_size: int = UNIVERSE_SIZE,
) -> bool:
    """
    Whether the premises entail the conclusion: no model over a universe of `universe_size` elements makes
    every premise true and the conclusion false.
    """
    for occupied in occupancy_patterns(universe_size):
        if all(holds(premise, occupied) for premise in premises) and not holds(
            conclusion, occupied
        ):
            return False
    return True


def entailed_responses(
    premises: Sequence[Premise], universe_size: int = UNIVERSE_SIZE
) -> FrozenSet[ResponseOption]:
    return frozenset(
        response
        for response in RESPONSES
        if not response.is_nvc
        and entails(premises, response.as_statement(), universe_size)
    )


@lru_cache(maxsize=None)
def valid_conclusions(task: SyllogisticTask) -> FrozenSet[ResponseOption]:
    """
    The quantified conclusions entailed by the task's premises under first-order semantics without existential
    import. NVC is never a member; it is the correct answer exactly when the set is empty.
    """
    return entailed_responses(premises_of(task))


def in_canonical_order(responses: Iterable[ResponseOption]) -> List[ResponseOption]:
    return sorted(responses, key=lambda response: response.index)


##################
# Reasoner records
##################


@dataclass(frozen=True)
class TrialRecord:
    seq: int
    task: SyllogisticTask
    response: ResponseOption


@dataclass(frozen=True)
class ReasonerProfile:
    """
    One subject's ordered sequence of answered tasks.

    :raises DatasetError: If sequence indices are not strictly increasing or a task appears twice.
    """

    subject_id: str
    records: Tuple[TrialRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

        seqs = [record.seq for record in self.records]
        if any(later <= earlier for earlier, later in zip(seqs, seqs[1:])):
            raise DatasetError(
                f"Sequence indices of subject \"{self.subject_id}\" are not strictly increasing"
            )
        tasks = [record.task for record in self.records]
        if len(set(tasks)) != len(tasks):
            raise DatasetError(f"Subject \"{self.subject_id}\" answers a task twice")

    @property
    def is_complete(self) -> bool:
        return len(self.records) == N_TASKS

    @cached_property
    def _lookup(self) -> Dict[SyllogisticTask, ResponseOption]:
        return {record.task: record.response for record in self.records}

    def responses(self) -> Dict[SyllogisticTask, ResponseOption]:
        return dict(self._lookup)

    def response_for(self, task: SyllogisticTask) -> ResponseOption or None:
        return self._lookup.get(task)


MISSING = -1


@dataclass(frozen=True, eq=False)
class ResponseMatrix:
    """
    Immutable integer encoding of a dataset: one row per subject, one column per task (in `TASKS` order), each
    entry the response index or MISSING.
    """

    subject_ids: Tuple[str, ...]
    responses: np.ndarray

    def __post_init__(self):
        responses = np.array(self.responses, dtype=np.int8, copy=True).reshape(
            len(self.subject_ids), N_TASKS
        )
        responses.setflags(write=False)
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids))
        object.__setattr__(self, "responses", responses)

    @classmethod
    def from_profiles(cls, profiles: Sequence[ReasonerProfile]) -> "ResponseMatrix":
        responses = np.full((len(profiles), N_TASKS), MISSING, dtype=np.int8)
        for row, profile in enumerate(profiles):
            for record in profile.records:
                responses[row, record.task.index] = record.response.index
        return cls(tuple(profile.subject_id for profile in profiles), responses)

    @property
    def n_subjects(self) -> int:
        return len(self.subject_ids)

    def without(self, index: int) -> "ResponseMatrix":
        """The matrix with subject row `index` removed (a leave-one-out training view)."""
        keep = [i for i in range(self.n_subjects) if i != index]
        return ResponseMatrix(
            tuple(self.subject_ids[i] for i in keep), self.responses[keep]
        )

    def task_counts(self) -> np.ndarray:
        """(64, 9) array: how many subjects gave each response to each task."""
        counts = np.zeros((N_TASKS, N_RESPONSES), dtype=np.int64)
        for t in range(N_TASKS):
            column = self.responses[:, t]
            counts[t] = np.bincount(column[column != MISSING], minlength=N_RESPONSES)
        return counts
