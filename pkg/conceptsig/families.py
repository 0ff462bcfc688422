"""
Simple enums naming the transform families and the moment-map modes
"""
from enum import Enum


class TransformFamily(Enum):
    """
    Families of image transforms applied to the first two coordinates
    """
    ROTATION = "rotation"
    TRANSLATION = "translation"


class MapMode(Enum):
    """
    How a moment map is evaluated: exactly, or by the truncated expansion
    in the transform parameter
    """
    EXACT = "exact"
    TAYLOR = "taylor"
    LINEAR = "linear"


class FlattenKind(Enum):
    """Which projector a flattened signature is read from"""
    NULL = "null"
    COMPLEMENT = "complement"


class AttentionKind(Enum):
    """
    What a layer compares when it attends: the items themselves, or their
    point signatures x x^T (blind to the sign of an item)
    """
    RAW = "raw"
    OUTER = "outer"
