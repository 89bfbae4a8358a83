from typing import List, TextIO

import yaml
from schema import And, Optional, Or, Schema

from syllobench.models import TIE_BREAK_POLICIES
from syllobench.registry import is_known_model
from syllobench.util import default_noise_grid


def is_noise_proportion(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and 0 <= value <= 1


def is_positive_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value > 0


class RunConfig:
    """
    Settings of a benchmark run, usually read from a YAML file with `parse_run_config`.

    Use:
        1. use parse_run_config on a YAML stream to obtain a RunConfig
        2. use RunConfig.merged() to let command line flags override file values
        3. use RunConfig.to_dict() to echo the effective configuration into the results

    Attributes:
        run_config_schema (Schema): Schema every run config must satisfy; unknown keys are rejected.
    """

    model_entry_schema = Schema(
        Or(
            And(str, is_known_model),
            {
                "name": And(str, is_known_model),
                Optional("options"): {
                    Optional("tie_break"): Or(*TIE_BREAK_POLICIES),
                    Optional("top_k"): Or(None, is_positive_int),
                },
            },
        )
    )
    run_config_schema = Schema(
        {
            "seed": And(int, lambda seed: not isinstance(seed, bool)),
            Optional("data"): Or(And(str, len), [And(str, len)]),
            Optional("models"): And([model_entry_schema], len),
            Optional("noise_grid"): And([is_noise_proportion], len),
            Optional("out"): And(str, len),
            Optional("tie_break"): Or(*TIE_BREAK_POLICIES),
            Optional("top_k"): Or(None, is_positive_int),
            Optional("jobs"): Or(None, is_positive_int),
            Optional("bins"): is_positive_int,
        }
    )

    def __init__(
        self,
        seed: int,
        data: List[str] = None,
        models: list = None,
        noise_grid: List[float] = None,
        out: str = "./out",
        tie_break: str = "canonical",
        top_k: int or None = None,
        jobs: int or None = None,
        bins: int = 8,
    ):
        self.seed = seed
        self.data = list(data) if data is not None else []
        self.models = list(models) if models is not None else []
        self.noise_grid = (
            [float(p) for p in noise_grid] if noise_grid is not None else default_noise_grid()
        )
        self.out = out
        self.tie_break = tie_break
        self.top_k = top_k
        self.jobs = jobs
        self.bins = bins

    def __eq__(self, other):
        return isinstance(other, self.__class__) and self.__dict__ == other.__dict__

    def merged(self, **overrides) -> "RunConfig":
        """
        A copy with every override that is not None applied.
        """
        values = dict(self.__dict__)
        values.update({key: value for key, value in overrides.items() if value is not None})
        return RunConfig(**values)

    def to_dict(self) -> dict:
        # jobs is left out: results do not depend on it
        return {
            "seed": self.seed,
            "data": list(self.data),
            "models": list(self.models),
            "noise_grid": list(self.noise_grid),
            "out": self.out,
            "tie_break": self.tie_break,
            "top_k": self.top_k,
            "bins": self.bins,
        }


def parse_run_config(stream: TextIO) -> RunConfig:
    """
    Parse and validate a YAML run config.

    :param stream: The YAML document.
    :return: The parsed RunConfig.
    :raises schema.SchemaError: If the document does not satisfy `RunConfig.run_config_schema`.
    """
    loaded = yaml.safe_load(stream)
    if loaded is None:
        loaded = {}

    validated = RunConfig.run_config_schema.validate(loaded)

    data = validated.get("data")
    if isinstance(data, str):
        data = [data]

    return RunConfig(
        seed=validated["seed"],
        data=data,
        models=validated.get("models"),
        noise_grid=validated.get("noise_grid"),
        out=validated.get("out", "./out"),
        tie_break=validated.get("tie_break", "canonical"),
        top_k=validated.get("top_k"),
        jobs=validated.get("jobs"),
        bins=validated.get("bins", 8),
    )
