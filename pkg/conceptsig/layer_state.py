"""
One layer of the stream: a ring buffer of recent items and the concept
dictionary of the flats this layer emits.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, List, Optional, Tuple

import numpy as np  # type: ignore

import tolerances
from attention import attention_scores, outer_attention_scores, top_k
from exceptions import ConceptSigError, DimensionMismatch, MalformedInput
from families import AttentionKind
from hierarchy import flatten
from point_cloud import PointCloud
from seeding import sub_seed
from signature import FitConfig, fit
from stream_config import HeadConfig, LayerConfig

logger = logging.getLogger(__name__)

# Bookkeeping of dictionary entries, without their vectors.
index_dt = np.dtype(
    [
        ("id", np.int64),
        ("hits", np.int64),
        ("created_step", np.int64),  # step at which the entry was admitted
    ]
)


@dataclass
class DictionaryEntry:
    id: int
    vector: np.ndarray
    hits: int = 1
    created_step: int = 0


@dataclass
class StreamReport:
    """
    What one layer did with one item.
    chosen_steps and scores come from the first head, best first.
    emitted is the concatenated flat passed to the next layer, or None
    when this layer did not group.
    """
    layer: int
    step: int
    chosen_steps: List[int] = field(default_factory=list)
    scores: List[float] = field(default_factory=list)
    match_id: Optional[int] = None
    new_id: Optional[int] = None
    best_score: Optional[float] = None
    error: str = ""
    emitted: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layer": self.layer,
            "step": self.step,
            "chosen_steps": [int(s) for s in self.chosen_steps],
            "scores": [float(s) for s in self.scores],
            "match_id": self.match_id,
            "new_id": self.new_id,
            "best_score": self.best_score,
            "emitted_dim": None if self.emitted is None else int(self.emitted.size),
            "error": self.error,
        }


class LayerState:
    """
    Buffer, dictionary and fit settings of one layer

    :param index: Layer number, starting at 1
    :type index: int
    :param config: Buffer size, heads, fit and dictionary settings
    :type config: LayerConfig
    :param seed: Seed of this layer's random projections
    :type seed: int
    """

    def __init__(self, index: int, config: LayerConfig, seed: int = 0):
        self.index = index
        self.config = config
        self.seed = seed
        self.buffer: Deque[Tuple[int, np.ndarray]] = deque(maxlen=config.buffer_size)
        self.dictionary: List[DictionaryEntry] = []
        self.item_dim: Optional[int] = None

    @property
    def index_table(self) -> np.ndarray:
        """The dictionary's id, hits and created_step as a structured array"""
        return np.array(
            [(entry.id, entry.hits, entry.created_step) for entry in self.dictionary], dtype=index_dt
        )

    @property
    def buffer_steps(self) -> np.ndarray:
        return np.array([step for step, _ in self.buffer], dtype=np.int64)

    @property
    def buffer_vectors(self) -> np.ndarray:
        return np.stack([vector for _, vector in self.buffer])

    def require_dim(self, item: np.ndarray) -> None:
        if self.item_dim is not None and item.size != self.item_dim:
            raise DimensionMismatch(f"layer {self.index} holds items of dimension {self.item_dim}, got {item.size}")

    def push(self, step: int, item: np.ndarray) -> None:
        """Store an item; the oldest one drops out once the buffer is full"""
        self.require_dim(item)
        self.item_dim = item.size
        self.buffer.append((step, item))

    def attend(self, item: np.ndarray, fan_in: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Buffer items with the highest attention to ``item``

        :return: Their steps, their vectors and their scores, best first
        :rtype: Tuple[np.ndarray, np.ndarray, np.ndarray]
        """
        vectors = self.buffer_vectors
        steps = self.buffer_steps
        if self.config.attention is AttentionKind.OUTER:
            scores = outer_attention_scores(item, vectors)
        else:
            scores = attention_scores(item, vectors)
        order, scores = top_k(scores, steps, fan_in)
        return steps[order], vectors[order], scores

    def fit_config(self, head: HeadConfig, head_index: int, item_dim: int) -> FitConfig:
        projection_dim = self.config.projection_dim
        if projection_dim is not None and projection_dim >= item_dim:
            projection_dim = None
        return FitConfig(
            degree=self.config.degree,
            epsilon=tolerances.default_epsilon if head.epsilon is None else head.epsilon,
            include_constant=self.config.include_constant,
            projection_dim=projection_dim,
            # one fixed projection per head, so flats of different steps are comparable
            seed=sub_seed(self.seed, head_index),
        )

    def group(self, item: np.ndarray, report: StreamReport) -> np.ndarray:
        """Fit every head over its top-K items plus ``item`` and concatenate the flats"""
        flats = []
        for head_index, head in enumerate(self.config.heads):
            steps, vectors, scores = self.attend(item, head.fan_in)
            if head_index == 0:
                report.chosen_steps = steps.tolist()
                report.scores = scores.tolist()
            cloud = PointCloud(np.vstack([vectors, item[None, :]]))
            sig = fit(cloud, self.fit_config(head, head_index, item.size))
            sig.source = f"layer{self.index}"
            flats.append(flatten(sig, self.config.flatten_kind, use_eps=head.epsilon is not None).vector)
        return np.concatenate(flats)

    def admit(self, vector: np.ndarray, step: int) -> int:
        entry = DictionaryEntry(len(self.dictionary), vector.copy(), 1, step)
        self.dictionary.append(entry)
        logger.info("layer %d admitted concept %d at step %d", self.index, entry.id, step)
        return entry.id

    def route(self, vector: np.ndarray, step: int, report: StreamReport) -> None:
        """Count a match, or admit the flat when nothing comes close"""
        best_id, best_score = dictionary_lookup(self, vector)
        report.best_score = best_score
        if best_id is not None:
            self.dictionary[best_id].hits += 1
            report.match_id = best_id
        elif len(self.buffer) >= self.config.admit_after and best_score < self.config.admit_threshold:
            report.new_id = self.admit(vector, step)

    def process(self, step: int, item: np.ndarray) -> StreamReport:
        """
        Attend, group, look up and store one item.
        A failed fit is logged and leaves only the buffer updated.
        """
        item = np.asarray(item, dtype=float).ravel()
        self.require_dim(item)
        report = StreamReport(self.index, step)
        if self.buffer:
            try:
                emitted = self.group(item, report)
                self.route(emitted, step, report)
                report.emitted = emitted
            except DimensionMismatch:
                raise
            except ConceptSigError as exc:
                logger.warning("layer %d step %d: %s", self.index, step, exc)
                report.error = str(exc)
        self.push(step, item)
        logger.debug(
            "layer %d step %d: chose %s, match %s, new %s",
            self.index, step, report.chosen_steps, report.match_id, report.new_id,
        )
        return report


def dictionary_lookup(state: LayerState, vector: np.ndarray) -> Tuple[Optional[int], float]:
    """
    Closest dictionary entry to a flat, by cosine

    :param state: Layer whose dictionary is searched; left unchanged
    :type state: LayerState
    :param vector: Flat emitted by the layer
    :type vector: np.ndarray
    :raises DimensionMismatch: When the flat does not have the entries' length
    :raises MalformedInput: When the flat is zero
    :return: Id of the best entry if it reaches the match threshold, else None,
        and the best score (0.0 for an empty dictionary)
    :rtype: Tuple[Optional[int], float]
    """
    vector = np.asarray(vector, dtype=float)
    if not np.any(vector):
        raise MalformedInput("can not look up a zero flat")
    if not state.dictionary:
        return None, 0.0
    keys = np.stack([entry.vector for entry in state.dictionary])
    if keys.shape[1] != vector.size:
        raise DimensionMismatch(f"dictionary holds flats of length {keys.shape[1]}, got {vector.size}")
    scores = attention_scores(vector, keys)
    best = int(np.argmax(scores))
    best_score = float(scores[best])
    if best_score >= state.config.match_threshold:
        return state.dictionary[best].id, best_score
    return None, best_score
