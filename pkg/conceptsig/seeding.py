"""
Fixed splitting of one global seed into independent sub-seeds
"""
import numpy as np  # type: ignore


def sub_seed(seed: int, *path: int) -> int:
    """Seed of the component at ``path`` (e.g. layer index, head index)"""
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(int(p) for p in path))
    return int(sequence.generate_state(1)[0])
