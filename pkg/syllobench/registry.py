from functools import partial
from pathlib import Path
from typing import Dict, List, Mapping, Sequence

from syllobench.dataio import load_prediction_table
from syllobench.errors import ConfigurationError
from syllobench.harness import ModelFactory
from syllobench.models import (
    MFAModel,
    RandomModel,
    TableModel,
    atmosphere_model,
    conversion_model,
    fol_model,
    matching_model,
)
from syllobench.recommenders import FIT_SHARPNESS, FIT_TEMPERATURE, IBCF, UBCF

TABLE_PREFIX = "table:"
BUNDLED_TABLES_DIR = Path(__file__).parent / "tables"

MODEL_NAMES = (
    "random",
    "mfa",
    "atmosphere",
    "matching",
    "conversion",
    "fol",
    "ubcf",
    "ibcf",
    "ubcf-fit",
    "ibcf-fit",
)

# options each model accepts from a run config
MODEL_OPTIONS = {name: {"tie_break"} for name in MODEL_NAMES}
MODEL_OPTIONS["ubcf"] = {"tie_break", "top_k"}
MODEL_OPTIONS["ubcf-fit"] = {"tie_break", "top_k"}


def is_known_model(name: str) -> bool:
    return name in MODEL_NAMES or name.startswith(TABLE_PREFIX)


def valid_model_names() -> List[str]:
    return (
        list(MODEL_NAMES)
        + [f"{TABLE_PREFIX}{name}" for name in bundled_tables()]
        + [f"{TABLE_PREFIX}<path>"]
    )


def bundled_tables() -> List[str]:
    return sorted(path.stem for path in BUNDLED_TABLES_DIR.glob("*.json"))


def table_path(reference: str) -> Path:
    """
    Resolve the part after "table:": an existing file, or else the name of a bundled table.
    """
    path = Path(reference)
    bundled = BUNDLED_TABLES_DIR / f"{reference}.json"
    if not path.exists() and path.suffix == "" and bundled.exists():
        return bundled
    return path


def model_factory(name: str, options: Mapping or None = None) -> ModelFactory:
    """
    A picklable callable that creates a fresh instance of the named model.

    Prediction tables named as "table:<path>" are loaded and validated here, once, not at predict time.

    :param name: A name from MODEL_NAMES or "table:<path>".
    :param options: Per-model options ("tie_break", and "top_k" for the UBCF variants).
    :raises ConfigurationError: On an unknown model name or option.
    :raises TableValidationError: If a prediction table is malformed.
    """
    options = dict(options or {})
    allowed = {"tie_break"} if name.startswith(TABLE_PREFIX) else MODEL_OPTIONS.get(name)
    if allowed is None:
        raise ConfigurationError(
            f"Unknown model '{name}', valid models are {valid_model_names()}"
        )
    unknown = set(options) - allowed
    if unknown:
        raise ConfigurationError(
            f"Model '{name}' does not accept options {sorted(unknown)}"
        )
    tie_break = options.get("tie_break", "canonical")

    if name.startswith(TABLE_PREFIX):
        table = load_prediction_table(table_path(name[len(TABLE_PREFIX):]))
        return partial(TableModel, table, tie_break=tie_break)

    factories = {
        "random": partial(RandomModel, tie_break=tie_break),
        "mfa": partial(MFAModel, tie_break=tie_break),
        "atmosphere": partial(atmosphere_model, tie_break),
        "matching": partial(matching_model, tie_break),
        "conversion": partial(conversion_model, tie_break),
        "fol": partial(fol_model, tie_break),
        "ubcf": partial(UBCF, top_k=options.get("top_k"), tie_break=tie_break),
        "ibcf": partial(IBCF, tie_break=tie_break),
        "ubcf-fit": partial(
            UBCF,
            figure_only=True,
            sharpness=FIT_SHARPNESS,
            top_k=options.get("top_k"),
            tie_break=tie_break,
        ),
        "ibcf-fit": partial(
            IBCF, figure_only=True, temperature=FIT_TEMPERATURE, tie_break=tie_break
        ),
    }
    return factories[name]


def model_id(name: str) -> str:
    if name.startswith(TABLE_PREFIX):
        return f"{TABLE_PREFIX}{Path(name[len(TABLE_PREFIX):]).stem}"
    return name


def build_factories(
    specs: Sequence[str or Mapping],
    tie_break: str = "canonical",
    top_k: int or None = None,
) -> Dict[str, ModelFactory]:
    """
    Factories for a list of model specs, keyed by model id.

    :param specs: Model names, or mappings {"name": ..., "options": {...}} as found in run configs.
    :param tie_break: Default tie-break policy, overridden by per-model options.
    :param top_k: Default UBCF neighbourhood size, overridden by per-model options.
    """
    factories = {}
    for spec in specs:
        if isinstance(spec, str):
            name, options = spec, {}
        else:
            name, options = spec["name"], dict(spec.get("options") or {})

        defaults = {"tie_break": tie_break}
        if top_k is not None and "top_k" in MODEL_OPTIONS.get(name, ()):
            defaults["top_k"] = top_k
        factory = model_factory(name, {**defaults, **options})

        key = model_id(name)
        if key in factories:
            raise ConfigurationError(f"Model '{key}' is listed twice")
        factories[key] = factory
    return factories
