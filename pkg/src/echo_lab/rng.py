"""Counter-based random streams.

Each (seed, purpose) pair keys its own Philox stream. Draws are made up
front, in sample order, so the values never depend on how work is later
split across threads.
"""

import zlib

import numpy as np


def stream(seed, purpose):
    """Philox generator keyed by the integer seed and a named purpose."""
    tag = zlib.crc32(purpose.encode("utf-8"))
    key = (int(seed) & 0xFFFFFFFFFFFFFFFF, tag)
    return np.random.Generator(np.random.Philox(key=np.array(key, dtype=np.uint64)))
