"""Degrade an external database before graph building (noisy or sparse variants)."""

from __future__ import annotations

import numpy as np

from .attack import AttackSpec, random_attack
from .data import InteractionDataset
from .seeding import DB_QUALITY, user_rng


def inject_noise(
    db: InteractionDataset, fraction: float, delta: int, n_items: int, seed: int
) -> InteractionDataset:
    """Random-insert ``delta`` items into a seeded ``fraction`` of the users."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    users = db.users()
    rng = np.random.default_rng([seed, DB_QUALITY])
    n_pick = int(round(fraction * len(users)))
    picked = set(int(u) for u in rng.choice(users, size=n_pick, replace=False)) if n_pick else set()
    out = {}
    for user, items in db.items():
        room = n_items - len(set(items))
        if user in picked and room > 0:
            spec = AttackSpec(delta=min(delta, room), kind="random", seed=seed)
            rng_u = user_rng(seed, user, DB_QUALITY)
            items = random_attack(items, spec, n_items, user, rng=rng_u).items
        out[user] = items
    return InteractionDataset(out, db.role)


def thin_out(db: InteractionDataset, fraction: float, seed: int) -> InteractionDataset:
    """Delete a uniform ``fraction`` of each sequence, keeping at least one item."""
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must lie in [0, 1)")
    out = {}
    for user, items in db.items():
        n_drop = min(int(round(fraction * len(items))), len(items) - 1)
        if n_drop:
            rng = user_rng(seed, user, DB_QUALITY, 1)
            drop = set(int(p) for p in rng.choice(len(items), size=n_drop, replace=False))
            items = tuple(x for p, x in enumerate(items) if p not in drop)
        out[user] = items
    return InteractionDataset(out, db.role)
