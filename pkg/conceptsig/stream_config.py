"""
Configuration of the layered stream, read from a JSON document such as

    {"seed": 3, "layers": [{"buffer_size": 64, "heads": [{"fan_in": 8}]},
                           {"projection_dim": 40}]}

Missing fields take the defaults in tolerances.py.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Mapping, Optional

import tolerances
from exceptions import MalformedInput
from families import AttentionKind, FlattenKind


@dataclass
class HeadConfig:
    """
    One attention head: how many buffer items it groups with the current one,
    and the optional epsilon whose T_eps it flattens
    """
    fan_in: int = tolerances.fan_in
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.fan_in < 1:
            raise MalformedInput(f"fan_in must be at least 1, got {self.fan_in}", source="heads.fan_in")


@dataclass
class LayerConfig:
    buffer_size: int = tolerances.buffer_size
    heads: List[HeadConfig] = field(default_factory=lambda: [HeadConfig()])
    degree: int = 1
    include_constant: bool = False
    flatten_kind: FlattenKind = FlattenKind.COMPLEMENT
    attention: AttentionKind = AttentionKind.OUTER
    projection_dim: Optional[int] = None
    match_threshold: float = tolerances.match_threshold
    admit_threshold: float = tolerances.admit_threshold
    admit_after: Optional[int] = None

    def __post_init__(self):
        self.flatten_kind = FlattenKind(self.flatten_kind)
        self.attention = AttentionKind(self.attention)
        if self.admit_after is None:
            self.admit_after = self.buffer_size
        if self.buffer_size < 1:
            raise MalformedInput(f"buffer_size must be positive, got {self.buffer_size}", source="buffer_size")
        if not self.heads:
            raise MalformedInput("a layer needs at least one head", source="heads")
        if self.admit_threshold > self.match_threshold:
            raise MalformedInput("admit_threshold can not exceed match_threshold", source="admit_threshold")


@dataclass
class StreamConfig:
    layers: List[LayerConfig]
    seed: int = 0

    @classmethod
    def default(cls, layer_count: Optional[int] = None, seed: int = 0) -> StreamConfig:
        """Raw points at layer 1, projected flats above it"""
        layer_count = tolerances.layer_count if layer_count is None else layer_count
        layers = [LayerConfig()]
        for _ in range(1, layer_count):
            layers.append(LayerConfig(projection_dim=tolerances.level2_projection_dim))
        return cls(layers, seed)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for layer in data["layers"]:
            layer["flatten_kind"] = FlattenKind(layer["flatten_kind"]).value
            layer["attention"] = AttentionKind(layer["attention"]).value
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> StreamConfig:
        try:
            layers = []
            for index, raw in enumerate(data.get("layers", [{}] * tolerances.layer_count)):
                raw = dict(raw)
                raw["heads"] = [HeadConfig(**head) for head in raw.get("heads", [{}])]
                if "projection_dim" not in raw and index > 0:
                    raw["projection_dim"] = tolerances.level2_projection_dim
                layers.append(LayerConfig(**raw))
        except TypeError as exc:
            raise MalformedInput(str(exc), source="stream config")
        except ValueError as exc:
            raise MalformedInput(str(exc), source="stream config")
        if not layers:
            raise MalformedInput("at least one layer is needed", source="layers")
        return cls(layers, int(data.get("seed", 0)))


def load_config(path: str) -> StreamConfig:
    """Parse a stream configuration file"""
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(str(exc), source=path)
    return StreamConfig.from_dict(data)
