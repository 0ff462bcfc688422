"""Handle the loading and initialization of stream engines."""
from __future__ import annotations

import lzma
import os
import pickle
from typing import Optional

from engine import Engine
from exceptions import MalformedInput
from serialization import read_dictionary
from stream_config import StreamConfig, load_config


def new_engine(config: Optional[StreamConfig] = None, dictionary_dir: Optional[str] = None) -> Engine:
    """
    Return a fresh engine, optionally seeded with persisted dictionaries.

    :param config: Layer settings, defaults to StreamConfig.default()
    :type config: Optional[StreamConfig], optional
    :param dictionary_dir: Directory written by serialization.write_dictionaries, defaults to None
    :type dictionary_dir: Optional[str], optional
    :return: The engine
    :rtype: Engine
    """
    engine = Engine(config or StreamConfig.default())
    if dictionary_dir is not None:
        for layer in engine.layers:
            layer_dir = os.path.join(dictionary_dir, f"layer_{layer.index}")
            if os.path.isdir(layer_dir):
                layer.dictionary = read_dictionary(layer_dir)
    return engine


def engine_from_file(config_path: Optional[str], dictionary_dir: Optional[str] = None, seed: int = 0) -> Engine:
    """The configured engine, or the default one seeded with ``seed`` when there is no file"""
    config = load_config(config_path) if config_path else StreamConfig.default(seed=seed)
    return new_engine(config, dictionary_dir)


def load_engine(filename: str) -> Engine:
    """Load an Engine instance from a file."""
    try:
        with open(filename, "rb") as f:
            engine = pickle.loads(lzma.decompress(f.read()))
    except (OSError, lzma.LZMAError, pickle.UnpicklingError) as exc:
        raise MalformedInput(str(exc), source=filename)
    if not isinstance(engine, Engine):
        raise MalformedInput("not a stream checkpoint", source=filename)
    return engine
