"""Random-deletion defenses (RD, and its ensemble RDE)."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .denoise import Edit, PurifiedProfile
from .ensemble import vote
from .recsys import Recommender


def baseline_rd(profile: Sequence[int], count: int, rng: np.random.Generator) -> PurifiedProfile:
    """Delete ``count`` uniformly chosen positions."""
    if count < 0 or count > len(profile):
        raise ValueError(f"cannot delete {count} of {len(profile)} items")
    drop = sorted(int(p) for p in rng.choice(len(profile), size=count, replace=False))
    dropped = set(drop)
    items = tuple(x for p, x in enumerate(profile) if p not in dropped)
    return PurifiedProfile(items, tuple(Edit(p, profile[p]) for p in drop))


def baseline_rde(
    recommender: Recommender,
    profile: Sequence[int],
    m: int,
    count: int,
    rng: np.random.Generator,
    k: int,
    user_id: int = 0,
    rule: str = "borda",
) -> list[int]:
    """RD repeated ``m`` times, recommendations fused by the ensemble vote."""
    lists = [
        recommender.recommend(baseline_rd(profile, count, rng).items, k, user_id=user_id)
        for _ in range(m)
    ]
    return vote(lists, k, rule)
