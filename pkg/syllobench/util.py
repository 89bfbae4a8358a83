import hashlib
import math
from collections import Counter
from typing import Hashable, List, Sequence

import numpy as np

SEED_MODULUS = 2**64


def calculate_entropy(data: Sequence[Hashable]) -> float:
    """
    Shannon entropy, in bits, of the empirical distribution of the labels in `data`.

    Probabilities are raw relative frequencies; labels that never occur contribute nothing (0 * log 0 = 0).

    :param data: Observed labels, e.g. the responses given to one task.
    :return: The entropy in bits, 0 for empty input.
    """
    if not data:
        return 0.0
    total = len(data)
    entropy = 0.0
    for count in Counter(data).values():
        p_x = count / total
        entropy += -p_x * math.log2(p_x)
    return entropy


def stable_hash(key: str) -> int:
    """
    A process-independent 64-bit hash of a string (the builtin `hash` is salted per interpreter).
    """
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(seed: int, *keys: str) -> np.random.Generator:
    """
    Derive an independent random stream from a base seed and a sequence of string keys.

    The same (seed, keys) always yields the same stream, regardless of process, job count or the order in
    which streams are requested.

    :param seed: Base seed (any integer, reduced modulo 2**64).
    :param keys: Identifiers of the stream, e.g. a model id and a subject id.
    :return: A seeded numpy Generator.
    """
    sequence = np.random.SeedSequence(
        seed % SEED_MODULUS, spawn_key=tuple(stable_hash(key) for key in keys)
    )
    return np.random.default_rng(sequence)


def rank_indices(
    scores: Sequence[float], rng: np.random.Generator or None = None
) -> List[int]:
    """
    Order candidate indices by descending score.

    Ties keep ascending index order, unless `rng` is given, in which case tied candidates are shuffled by it.

    :param scores: One score per candidate.
    :param rng: Optional stream used to break ties at random.
    :return: Candidate indices, best first.
    """
    scores = np.asarray(scores, dtype=float)
    if rng is None:
        tie_keys = np.arange(len(scores))
    else:
        tie_keys = rng.permutation(len(scores))
    # lexsort sorts by the last key first
    return [int(i) for i in np.lexsort((tie_keys, -scores))]


def parse_float_list(text: str) -> List[float]:
    """
    Parse a comma separated list of floats, e.g. "0,0.1,0.5".

    :raises ValueError: If any element is not a float or the list is empty.
    """
    values = [item.strip() for item in text.split(",") if len(item.strip()) > 0]
    if len(values) == 0:
        raise ValueError("Expected at least one value")
    return [float(value) for value in values]


def parse_name_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if len(item.strip()) > 0]


def default_noise_grid() -> List[float]:
    return [round(0.1 * step, 1) for step in range(11)]
