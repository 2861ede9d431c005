"""Purify a profile: delete zero-evidence items, replace weak ones."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Collection, Sequence

from .graph import MultiHopGraph

FULL = "full"
DELETE_ONLY = "delete_only"


@dataclass(frozen=True)
class Edit:
    position: int
    original: int
    replacement: int | None = None

    @property
    def action(self) -> str:
        return "deleted" if self.replacement is None else "replaced"

    def __str__(self) -> str:
        if self.replacement is None:
            return f"{self.position}:-{self.original}"
        return f"{self.position}:{self.original}>{self.replacement}"


@dataclass(frozen=True)
class PurifiedProfile:
    items: tuple[int, ...]
    edits: tuple[Edit, ...] = field(default_factory=tuple)

    @property
    def deletions(self) -> int:
        return sum(1 for e in self.edits if e.replacement is None)


def select_targets(scores: Sequence[float], n: int) -> list[int]:
    """The ``n`` lowest-scoring positions, earliest first on ties, sorted."""
    if n < 0 or n > len(scores):
        raise ValueError(f"cannot select {n} targets from {len(scores)} positions")
    order = sorted(range(len(scores)), key=lambda i: (scores[i], i))
    return sorted(order[:n])


def replacement_scores(
    g: MultiHopGraph,
    profile: Sequence[int],
    scores: Sequence[float],
    i: int,
    exclude: Collection[int] = (),
    taken: Collection[int] = (),
) -> dict[int, float]:
    """Score every candidate substitute for position ``i``.

    Each retained position ``j`` (not ``i``, not in ``exclude``) spreads its
    weight ``scores[j]`` over its hop-``|j - i|`` neighbours in proportion to
    their normalized co-occurrence. Items already in the profile, or in
    ``taken``, are dropped.
    """
    present = set(profile).union(taken)
    out: dict[int, float] = defaultdict(float)
    for j, item in enumerate(profile):
        if j == i or j in exclude:
            continue
        hop = abs(j - i)
        total = g.row_sum(item, hop)
        if total == 0:
            continue
        w = scores[j] / total
        for c, cnt in g.neighbors(item, hop).items():
            if c not in present:
                out[c] += w * cnt
    return dict(out)


def choose_replacement(
    g: MultiHopGraph,
    profile: Sequence[int],
    scores: Sequence[float],
    i: int,
    exclude: Collection[int] = (),
    taken: Collection[int] = (),
) -> int | None:
    """Best substitute for position ``i``, or None when no candidate exists.

    Ties go to the smallest item id.
    """
    cand = replacement_scores(g, profile, scores, i, exclude, taken)
    if not cand:
        return None
    return min(cand, key=lambda c: (-cand[c], c))


def purify_profile(
    g: MultiHopGraph,
    profile: Sequence[int],
    scores: Sequence[float],
    n: int,
    variant: str = FULL,
) -> PurifiedProfile:
    """Act on the ``n`` lowest-scoring positions.

    Zero-score targets are deleted, the rest replaced (falling back to
    deletion when nothing can stand in). ``delete_only`` deletes every
    target. Gaps are measured on original positions throughout.
    """
    if variant not in (FULL, DELETE_ONLY):
        raise ValueError(f"unknown purification variant {variant!r}")
    targets = select_targets(scores, n)
    target_set = set(targets)
    replaced: dict[int, int] = {}
    edits = []
    for i in targets:
        new = None
        if variant == FULL and scores[i] != 0:
            new = choose_replacement(
                g, profile, scores, i, exclude=target_set, taken=replaced.values()
            )
        if new is not None:
            replaced[i] = new
        edits.append(Edit(i, profile[i], new))
    items = tuple(
        replaced.get(p, item)
        for p, item in enumerate(profile)
        if p not in target_set or p in replaced
    )
    return PurifiedProfile(items, tuple(edits))
