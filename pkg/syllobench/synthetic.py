"""
Artificial reasoners: each of the four figures is answered by one of four rule-based models, giving 4^4 = 256
strategy assignments, optionally degraded by replacing responses with uniform random choices.
"""
import itertools
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from syllobench.domain import (
    Figure,
    RESPONSES,
    ReasonerProfile,
    TASKS,
    TrialRecord,
)
from syllobench.errors import ConfigurationError
from syllobench.models import RULES
from syllobench.util import derive_rng

GENERATORS: Tuple[str, ...] = ("atmosphere", "matching", "fol", "conversion")

GENERATOR_CODES: Dict[str, str] = {
    "atmosphere": "atm",
    "matching": "mat",
    "fol": "fol",
    "conversion": "con",
}


@dataclass(frozen=True)
class StrategyAssignment:
    """
    The generator model used for each figure, figure 1 first.
    """

    models: Tuple[str, str, str, str]

    def __post_init__(self):
        if len(self.models) != len(Figure):
            raise ConfigurationError("A strategy assignment names one model per figure")
        unknown = [model for model in self.models if model not in GENERATORS]
        if unknown:
            raise ConfigurationError(f"Unknown generator models {unknown}")

    @property
    def subject_id(self) -> str:
        return "-".join(GENERATOR_CODES[model] for model in self.models)

    def model_for(self, figure: Figure) -> str:
        return self.models[int(figure) - 1]


@dataclass(frozen=True)
class NoiseSpec:
    """
    :param proportion: Probability that a record is replaced by a uniform draw over the nine responses.
    :param seed: Base seed; each profile draws from a stream keyed by its subject id.
    """

    proportion: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.proportion <= 1.0:
            raise ConfigurationError(
                f"Noise proportion must lie in [0, 1], got {self.proportion}"
            )


def all_assignments() -> List[StrategyAssignment]:
    return [
        StrategyAssignment(models)
        for models in itertools.product(GENERATORS, repeat=len(Figure))
    ]


def generate_profile(assignment: StrategyAssignment) -> ReasonerProfile:
    records = [
        TrialRecord(
            seq=seq,
            task=task,
            response=RULES[assignment.model_for(task.figure)](task),
        )
        for seq, task in enumerate(TASKS, start=1)
    ]
    return ReasonerProfile(assignment.subject_id, tuple(records))


def generate_population() -> List[ReasonerProfile]:
    return [generate_profile(assignment) for assignment in all_assignments()]


def inject_noise(profile: ReasonerProfile, spec: NoiseSpec) -> ReasonerProfile:
    """
    Replace each record's response, with probability `spec.proportion`, by a uniform draw over all nine options
    (which may coincide with the original).

    The selection and replacement draws depend only on (seed, subject id), so for a fixed seed the records
    replaced at a lower proportion are also replaced at every higher one.
    """
    if spec.proportion == 0.0:
        return profile

    rng = derive_rng(spec.seed, "noise", profile.subject_id)
    selection = rng.random(len(profile.records))
    replacements = rng.integers(len(RESPONSES), size=len(profile.records))

    records = tuple(
        TrialRecord(record.seq, record.task, RESPONSES[int(replacement)])
        if draw < spec.proportion
        else record
        for record, draw, replacement in zip(profile.records, selection, replacements)
    )
    return ReasonerProfile(profile.subject_id, records)


def apply_noise(
    profiles: Sequence[ReasonerProfile], spec: NoiseSpec
) -> List[ReasonerProfile]:
    return [inject_noise(profile, spec) for profile in profiles]


def generate_noisy_population(proportion: float, seed: int) -> List[ReasonerProfile]:
    return apply_noise(generate_population(), NoiseSpec(proportion, seed))
