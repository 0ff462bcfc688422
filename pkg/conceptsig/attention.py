"""
Cosine attention between stream items
"""
from typing import Sequence, Tuple

import numpy as np  # type: ignore

from exceptions import MalformedInput


def attention_score(a: Sequence[float], b: Sequence[float]) -> float:
    """
    <a, b> / (|a| |b|)

    :raises MalformedInput: When either vector is zero
    :return: Value in [-1, 1]
    :rtype: float
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    norms = np.linalg.norm(a) * np.linalg.norm(b)
    if norms == 0.0:
        raise MalformedInput("attention is undefined for a zero vector")
    return float(np.clip(a @ b / norms, -1.0, 1.0))


def attention_scores(query: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """Cosine of the query against every row of keys; zero rows score 0"""
    query = np.asarray(query, dtype=float)
    query_norm = np.linalg.norm(query)
    if query_norm == 0.0:
        raise MalformedInput("attention is undefined for a zero vector")
    keys = np.atleast_2d(keys)
    key_norms = np.linalg.norm(keys, axis=1)
    scores = np.zeros(keys.shape[0])
    nonzero = key_norms > 0
    scores[nonzero] = keys[nonzero] @ query / (key_norms[nonzero] * query_norm)
    return np.clip(scores, -1.0, 1.0)


def top_k(scores: np.ndarray, steps: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Positions of the k highest scores, most recent step first among ties,
    and the scores in descending order
    """
    order = np.lexsort((-np.asarray(steps), -np.asarray(scores)))[:k]
    return order, np.asarray(scores)[order]


def outer_attention_scores(query: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """
    Cosine between the point signature q q^T of the query and k k^T of every
    key. The Frobenius product of two outer products is (q.k)^2, so this is
    the squared cosine of the vectors.
    """
    return attention_scores(query, keys) ** 2
