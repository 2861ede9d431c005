"""Leave-one-out ranking metrics, attack/defense ratios and benign-impact stats."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence


def hit_at_k(ranked: Sequence[int], target: int, k: int) -> int:
    if k < 1:
        raise ValueError("k must be >= 1")
    return int(target in ranked[:k])


def ndcg_at_k(ranked: Sequence[int], target: int, k: int) -> float:
    """NDCG with a single relevant item: ``1 / log2(rank + 1)`` inside the top-k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    for rank, item in enumerate(ranked[:k], start=1):
        if item == target:
            return 1.0 / math.log2(rank + 1)
    return 0.0


def attack_degradation(benign: float, attacked: float) -> float | None:
    """Relative drop caused by an attack; None when the benign score is 0."""
    if benign == 0:
        return None
    return 1.0 - attacked / benign


def defense_gain(undefended: float | None, defended: float | None) -> float | None:
    """Share of the attack's degradation removed by a defense.

    ``1 - defended / undefended``: +1 means fully restored, 0 means no
    effect, negative means the defense made things worse. None when either
    side is undefined or the undefended degradation is 0.
    """
    if undefended is None or defended is None or undefended == 0:
        return None
    return 1.0 - defended / undefended


def raw_defense_ratio(undefended: float | None, defended: float | None) -> float | None:
    """``defended / undefended - 1``, the opposite-sign form of the gain."""
    g = defense_gain(undefended, defended)
    return None if g is None else -g


@dataclass
class RankingScores:
    """Mean hit ratio and NDCG per cutoff over a set of users."""

    hit: dict[int, float]
    ndcg: dict[int, float]
    n_users: int

    @classmethod
    def evaluate(
        cls, lists: Sequence[Sequence[int]], targets: Sequence[int], ks: Iterable[int]
    ) -> "RankingScores":
        if len(lists) != len(targets):
            raise ValueError("lists and targets must align")
        n = len(lists)
        hit, ndcg = {}, {}
        for k in ks:
            if n == 0:
                hit[k] = ndcg[k] = 0.0
                continue
            hit[k] = sum(hit_at_k(r, t, k) for r, t in zip(lists, targets)) / n
            ndcg[k] = sum(ndcg_at_k(r, t, k) for r, t in zip(lists, targets)) / n
        return cls(hit, ndcg, n)


@dataclass(frozen=True)
class BenignImpact:
    jaccard: float
    common_ratio: float
    entropy_benign: float
    entropy_defended: float

    @property
    def entropy_pair(self) -> tuple[float, float]:
        return self.entropy_benign, self.entropy_defended


def shannon_entropy(freq: Counter) -> float:
    """Entropy in bits of a frequency table."""
    total = sum(freq.values())
    return -sum(c / total * math.log2(c / total) for c in freq.values() if c)


def benign_impact(
    benign_lists: Sequence[Sequence[int]], defended_lists: Sequence[Sequence[int]]
) -> BenignImpact:
    """Compare the item-frequency distributions of two sets of recommendations.

    ``common_ratio`` is the share of all recommendation slots (both sides
    together) filled by items that both sides recommend at least once.
    """
    if not benign_lists or not defended_lists:
        raise ValueError("benign_impact needs non-empty inputs")
    if len(benign_lists) != len(defended_lists):
        raise ValueError("both inputs must cover the same users")
    fb = Counter(i for r in benign_lists for i in r)
    fd = Counter(i for r in defended_lists for i in r)
    if not fb or not fd:
        raise ValueError("benign_impact needs at least one recommended item per side")
    common = fb.keys() & fd.keys()
    union = fb.keys() | fd.keys()
    slots = sum(fb.values()) + sum(fd.values())
    in_common = sum(fb[i] + fd[i] for i in common)
    return BenignImpact(
        jaccard=len(common) / len(union),
        common_ratio=in_common / slots,
        entropy_benign=shannon_entropy(fb),
        entropy_defended=shannon_entropy(fd),
    )
