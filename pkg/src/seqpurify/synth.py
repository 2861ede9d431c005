"""Clustered synthetic interaction logs for desk-scale experiments.

Items are split into contiguous clusters arranged as rings. Each user picks
a home cluster and walks forward around its ring in short random strides,
occasionally clicking a uniformly chosen item from another cluster.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import EXTERNAL_DATABASE, InteractionDataset

STRIDES = (1, 2, 3)
STRIDE_P = (0.6, 0.3, 0.1)


@dataclass(frozen=True)
class SynthParams:
    n_users: int = 500
    n_items: int = 200
    n_clusters: int = 4
    min_len: int = 6
    max_len: int = 15
    cross_cluster_noise: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if self.n_clusters < 1 or self.n_clusters > self.n_items:
            raise ValueError("need 1 <= n_clusters <= n_items")
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")
        if not 1 <= self.min_len <= self.max_len:
            raise ValueError("need 1 <= min_len <= max_len")
        if not 0.0 <= self.cross_cluster_noise <= 1.0:
            raise ValueError("cross_cluster_noise must lie in [0, 1]")


def cluster_bounds(n_items: int, n_clusters: int) -> list[tuple[int, int]]:
    edges = np.linspace(0, n_items, n_clusters + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def cluster_of(item: int, bounds: list[tuple[int, int]]) -> int:
    for c, (lo, hi) in enumerate(bounds):
        if lo <= item < hi:
            return c
    raise ValueError(f"item {item} outside every cluster")


def synthesize(params: SynthParams) -> InteractionDataset:
    rng = np.random.default_rng(params.seed)
    bounds = cluster_bounds(params.n_items, params.n_clusters)
    seqs = {}
    for user in range(params.n_users):
        c = int(rng.integers(params.n_clusters))
        lo, hi = bounds[c]
        size = hi - lo
        length = int(rng.integers(params.min_len, params.max_len + 1))
        pos = int(rng.integers(size))
        items = [lo + pos]
        while len(items) < length:
            if params.n_clusters > 1 and rng.random() < params.cross_cluster_noise:
                other = int(rng.integers(params.n_items - size))
                items.append(other if other < lo else other + size)
                continue
            pos = (pos + int(rng.choice(STRIDES, p=STRIDE_P))) % size
            items.append(lo + pos)
        seqs[user] = tuple(items)
    return InteractionDataset(seqs, EXTERNAL_DATABASE)
