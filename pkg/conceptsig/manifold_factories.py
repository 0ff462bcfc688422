"""
Named generator presets.
Like prototypes, these are module-level specs; callers copy them before
changing noise or region (see :func:`copied`).
"""
import copy
from typing import Dict

from exceptions import MalformedInput
from manifolds import Circle, ManifoldSpec, Segment, Union, rectangle

unit_circle = Circle(center=(0.0, 0.0), radius=1.0)

unit_square = rectangle(center=(0.0, 0.0), width=1.0, height=1.0)

# About six strokes on the plane: a round head and five straight limbs.
stick_figure = Union(
    [
        Circle(center=(0.0, 1.6), radius=0.25),
        Segment((0.0, 1.35), (0.0, 0.6)),
        Segment((0.0, 1.2), (-0.5, 0.9)),
        Segment((0.0, 1.2), (0.5, 0.9)),
        Segment((0.0, 0.6), (-0.35, 0.0)),
        Segment((0.0, 0.6), (0.35, 0.0)),
    ],
    labels=["head", "torso", "left_arm", "right_arm", "left_leg", "right_leg"],
)

presets: Dict[str, ManifoldSpec] = {
    "unit_circle": unit_circle,
    "unit_square": unit_square,
    "stick_figure": stick_figure,
}


def copied(name: str, noise_sigma: float = 0.0) -> ManifoldSpec:
    """
    Deep copy of a preset with the given noise level

    :param name: Key of :data:`presets`
    :type name: str
    :param noise_sigma: Noise of the copy, defaults to 0
    :type noise_sigma: float, optional
    :return: Independent spec
    :rtype: ManifoldSpec
    """
    if name not in presets:
        raise MalformedInput(f"unknown preset {name!r}, choose from {sorted(presets)}")
    clone = copy.deepcopy(presets[name])
    clone.noise_sigma = float(noise_sigma)
    return clone
