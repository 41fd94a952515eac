"""Reproducible counter-based random streams.

Each realization gets its own Philox generator keyed by
(seed, realization index).  Draws are therefore independent of
execution order and of how work is split across threads: realization
17 produces the same numbers whether it runs first, last, or on a
different worker.
"""

import numpy as np

__all__ = ["stream"]

_U64 = 2 ** 64


def stream(seed, index) -> np.random.Generator:
    """Generator for one (seed, index) pair."""
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < _U64:
        raise ValueError("seed must be an integer in [0, 2^64)")
    if not isinstance(index, int) or isinstance(index, bool) or not 0 <= index < _U64:
        raise ValueError("index must be an integer in [0, 2^64)")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
