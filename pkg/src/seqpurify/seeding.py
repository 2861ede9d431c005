"""Per-user random streams keyed by (seed, user, purpose, index).

Keying by user rather than by evaluation order keeps results independent of
worker count and scheduling.
"""

import numpy as np

COUNT = 1
ATTACK = 2
BASELINE = 3
DB_QUALITY = 4


def user_rng(seed: int, user_id: int, tag: int, t: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, user_id, tag, t])
