"""Evasion attacks that insert foreign items into a user's history."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .recsys import Recommender
from .seeding import ATTACK, user_rng

KINDS = ("random", "greedy")


class AttackError(ValueError):
    pass


@dataclass(frozen=True)
class AttackSpec:
    delta: int = 3
    kind: str = "random"
    candidate_budget: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.kind not in KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if self.candidate_budget < 1:
            raise ValueError("candidate_budget must be >= 1")


@dataclass(frozen=True)
class AttackedProfile:
    items: tuple[int, ...]
    inserted_positions: tuple[int, ...] = ()

    def benign(self) -> tuple[int, ...]:
        """Strip the insertions, recovering the original profile."""
        drop = set(self.inserted_positions)
        return tuple(x for p, x in enumerate(self.items) if p not in drop)


def _insert(items: list[int], positions: list[int], item: int, pos: int) -> None:
    items.insert(pos, item)
    for idx, p in enumerate(positions):
        if p >= pos:
            positions[idx] = p + 1
    positions.append(pos)


def _pool(profile: Sequence[int], n_items: int) -> np.ndarray:
    pool = np.setdiff1d(np.arange(n_items), np.asarray(profile, dtype=np.int64))
    if pool.size == 0:
        raise AttackError("no insertable items: the profile covers the whole catalog")
    return pool


def random_attack(
    profile: Sequence[int],
    spec: AttackSpec,
    n_items: int,
    user_id: int = 0,
    rng: np.random.Generator | None = None,
) -> AttackedProfile:
    """Insert ``delta`` distinct unseen items, each at a uniform position."""
    if spec.delta == 0:
        return AttackedProfile(tuple(profile))
    if rng is None:
        rng = user_rng(spec.seed, user_id, ATTACK)
    pool = _pool(profile, n_items)
    if pool.size < spec.delta:
        raise AttackError(f"only {pool.size} insertable items for delta={spec.delta}")
    chosen = rng.choice(pool, size=spec.delta, replace=False)
    items = list(profile)
    positions: list[int] = []
    for item in chosen:
        _insert(items, positions, int(item), int(rng.integers(0, len(items) + 1)))
    return AttackedProfile(tuple(items), tuple(sorted(positions)))


def target_rank(ranked: Sequence[int], target: int, k: int) -> int:
    """1-based rank of ``target`` in the top-k; ``k + 1`` when absent."""
    for r, item in enumerate(ranked[:k], start=1):
        if item == target:
            return r
    return k + 1


def greedy_attack(
    profile: Sequence[int],
    spec: AttackSpec,
    victim: Recommender,
    target: int,
    n_items: int,
    k: int = 10,
    user_id: int = 0,
) -> AttackedProfile:
    """Greedy search over (item, position) insertions.

    Each round scores ``candidate_budget`` seeded candidates by the target's
    rank in the victim's top-k and keeps the worst-ranked one (first
    evaluated wins ties).
    """
    items = list(profile)
    positions: list[int] = []
    if spec.delta == 0:
        return AttackedProfile(tuple(items))
    rng = user_rng(spec.seed, user_id, ATTACK)
    for _ in range(spec.delta):
        pool = _pool(items, n_items)
        slots = len(items) + 1
        total = pool.size * slots
        if spec.candidate_budget >= total:
            picks = np.arange(total)
        else:
            picks = rng.choice(total, size=spec.candidate_budget, replace=False)
        best = None
        best_rank = -1
        for idx in picks:
            item, pos = int(pool[idx // slots]), int(idx % slots)
            trial = items[:pos] + [item] + items[pos:]
            rank = target_rank(victim.recommend(trial, k, user_id=user_id), target, k)
            if rank > best_rank:
                best, best_rank = (item, pos), rank
        _insert(items, positions, *best)
    return AttackedProfile(tuple(items), tuple(sorted(positions)))
