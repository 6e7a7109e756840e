from __future__ import annotations

import numpy as np

from storage_shape.netmodel.network import StorageNetwork


def sample_configurations(net: StorageNetwork, seed: int, count: int, max_load: int) -> list[tuple[int, ...]]:
    """Deterministic uniform configurations with entries in 0..max_load."""
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, max_load + 1, size=(count, net.n))
    return [tuple(int(v) for v in row) for row in draws]
