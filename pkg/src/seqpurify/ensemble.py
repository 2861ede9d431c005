"""Randomized purification ensembles fused by rank voting."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .denoise import DELETE_ONLY, FULL, PurifiedProfile, purify_profile
from .graph import MultiHopGraph, random_graph_like
from .positioning import occurrence_profile
from .recsys import Recommender
from .seeding import COUNT, user_rng

VARIANTS = ("return", "rop", "rr", "no_ens")


@dataclass(frozen=True)
class EnsembleConfig:
    m: int = 10
    count_mean: float = 3.5
    count_spread: float = 0.5
    k: int = 10
    variant: str = "return"
    seed: int = 0
    vote: str = "borda"
    min_count: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.count_spread < 0:
            raise ValueError("count_spread must be >= 0")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.vote not in VOTE_RULES:
            raise ValueError(f"unknown vote rule {self.vote!r}")
        if self.min_count not in (0, 1):
            raise ValueError("min_count must be 0 or 1")


@dataclass
class VoteTally:
    points: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    appearances: dict[int, int] = field(default_factory=lambda: defaultdict(int))

    def ranking(self) -> list[int]:
        return sorted(self.points, key=lambda x: (-self.points[x], -self.appearances[x], x))


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def sample_count(rng: np.random.Generator, cfg: EnsembleConfig, profile_len: int) -> int:
    """Draw how many positions to purify, clamped to ``[min_count, L]``."""
    if profile_len < 1:
        raise ValueError("profile must be non-empty")
    x = rng.normal(cfg.count_mean, cfg.count_spread)
    return min(max(round_half_up(x), cfg.min_count), profile_len)


def tally_borda(lists: Sequence[Sequence[int]], k: int) -> VoteTally:
    tally = VoteTally()
    for ranked in lists:
        for rank, item in enumerate(ranked[:k], start=1):
            tally.points[item] += k - rank + 1
            tally.appearances[item] += 1
    return tally


def tally_plurality(lists: Sequence[Sequence[int]], k: int) -> VoteTally:
    tally = VoteTally()
    for ranked in lists:
        for rank, item in enumerate(ranked[:k], start=1):
            tally.points[item] += rank == 1
            tally.appearances[item] += 1
    return tally


VOTE_RULES = {"borda": tally_borda, "plurality": tally_plurality}


def borda_vote(lists: Sequence[Sequence[int]], k: int) -> list[int]:
    """Fuse ranked lists: rank r earns ``k - r + 1`` points.

    Ties fall to more appearances, then the smaller id.
    """
    return tally_borda(lists, k).ranking()[:k]


def vote(lists: Sequence[Sequence[int]], k: int, rule: str = "borda") -> list[int]:
    return VOTE_RULES[rule](lists, k).ranking()[:k]


class EnsembleError(RuntimeError):
    def __init__(self, message: str, prompt_index: int, purified: PurifiedProfile):
        super().__init__(message)
        self.prompt_index = prompt_index
        self.purified = purified
        self.edits = purified.edits


class ReturnDefense:
    """Purify a profile ``m`` times against a graph and vote the results.

    The ``rop`` variant swaps in a random graph with the real graph's per-hop
    edge counts; ``rr`` deletes instead of replacing; ``no_ens`` purifies once
    at a fixed strength.
    """

    def __init__(self, graph: MultiHopGraph, cfg: EnsembleConfig):
        self.cfg = cfg
        self.graph = random_graph_like(graph, cfg.seed) if cfg.variant == "rop" else graph
        self.purify_variant = DELETE_ONLY if cfg.variant == "rr" else FULL

    def prompts(self, profile: Sequence[int], user_id: int = 0) -> list[PurifiedProfile]:
        cfg = self.cfg
        if not profile:
            return [PurifiedProfile(())]
        scores = occurrence_profile(self.graph, profile)
        if cfg.variant == "no_ens":
            n = min(max(round_half_up(cfg.count_mean), cfg.min_count), len(profile))
            return [purify_profile(self.graph, profile, scores, n, self.purify_variant)]
        out = []
        for t in range(cfg.m):
            n = sample_count(user_rng(cfg.seed, user_id, COUNT, t), cfg, len(profile))
            out.append(purify_profile(self.graph, profile, scores, n, self.purify_variant))
        return out

    def recommend(
        self, recommender: Recommender, profile: Sequence[int], user_id: int = 0
    ) -> list[int]:
        lists = []
        for t, p in enumerate(self.prompts(profile, user_id)):
            try:
                lists.append(recommender.recommend(p.items, self.cfg.k, user_id=user_id))
            except Exception as e:
                edits = ", ".join(map(str, p.edits)) or "none"
                raise EnsembleError(
                    f"recommender failed on purified prompt {t} (edits: {edits}): {e}", t, p
                ) from e
        return vote(lists, self.cfg.k, self.cfg.vote)


def ensemble_recommend(
    recommender: Recommender,
    graph: MultiHopGraph,
    profile: Sequence[int],
    cfg: EnsembleConfig,
    user_id: int = 0,
) -> list[int]:
    return ReturnDefense(graph, cfg).recommend(recommender, profile, user_id)
