"""Locate likely perturbations by how well each item co-occurs with the rest."""

from __future__ import annotations

from typing import Sequence

from .graph import MultiHopGraph


def pair_score(g: MultiHopGraph, profile: Sequence[int], i: int, j: int) -> float:
    """Normalized co-occurrence of position ``i`` with position ``j`` (0-based).

    The count of ``(profile[i], profile[j])`` at hop ``|i - j|`` divided by
    ``profile[i]``'s row sum at that hop; 0 when the row sum is 0. Not
    symmetric in ``i`` and ``j``.
    """
    if i == j:
        raise ValueError("pair_score needs two distinct positions")
    hop = abs(i - j)
    total = g.row_sum(profile[i], hop)
    if total == 0:
        return 0.0
    return g.co_count(profile[i], profile[j], hop) / total


def occurrence_profile(g: MultiHopGraph, profile: Sequence[int]) -> list[float]:
    """Per-position occurrence score; low values flag suspicious items."""
    n = len(profile)
    scores = [0.0] * n
    for i in range(n):
        a = profile[i]
        acc = 0.0
        for j in range(n):
            if j == i:
                continue
            hop = abs(i - j)
            total = g.row_sum(a, hop)
            if total:
                acc += g.co_count(a, profile[j], hop) / total
        scores[i] = acc
    return scores
