"""
Module for the stream engine
"""
from __future__ import annotations

import logging
import lzma
import pickle
from typing import Iterable, List

import numpy as np  # type: ignore

from layer_state import LayerState, StreamReport
from seeding import sub_seed
from stream_config import StreamConfig

logger = logging.getLogger(__name__)


class Engine:
    """Stack of layers fed one point at a time"""

    def __init__(self, config: StreamConfig):
        """
        Constructor for Engine

        :param config: Layer settings and the global seed
        :type config: StreamConfig
        """
        self.config = config
        self.layers = [
            LayerState(index + 1, layer, sub_seed(config.seed, index))
            for index, layer in enumerate(config.layers)
        ]
        self.step_count = 0

    def step(self, x: np.ndarray) -> List[StreamReport]:
        """
        Push one point through the stack. Every layer that groups passes
        its flat to the next one; the first layer that does not ends the step.

        :param x: Input point
        :type x: np.ndarray
        :return: One report per layer reached
        :rtype: List[StreamReport]
        """
        item = np.asarray(x, dtype=float).ravel()
        reports = []
        for layer in self.layers:
            report = layer.process(self.step_count, item)
            reports.append(report)
            if report.emitted is None:
                break
            item = report.emitted
        self.step_count += 1
        return reports

    def run(self, points: Iterable[np.ndarray]) -> List[StreamReport]:
        """Step through every point, returning all reports in order"""
        reports: List[StreamReport] = []
        for x in points:
            reports.extend(self.step(x))
        logger.info(
            "ran %d steps; dictionary sizes %s",
            self.step_count, [len(layer.dictionary) for layer in self.layers],
        )
        return reports

    def replay(self, points: Iterable[np.ndarray]) -> int:
        """Run the points again and return how many dictionary entries that added"""
        before = sum(len(layer.dictionary) for layer in self.layers)
        self.run(points)
        return sum(len(layer.dictionary) for layer in self.layers) - before

    def save_as(self, filename: str) -> None:
        """Save this Engine instance as a compressed file."""
        save_data = lzma.compress(pickle.dumps(self))
        with open(filename, "wb") as f:
            f.write(save_data)


def step(engine: Engine, x: np.ndarray) -> List[StreamReport]:
    return engine.step(x)
