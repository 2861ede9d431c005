"""Multi-hop item co-occurrence graphs.

One symmetric sparse count matrix per positional gap (hop). Every unordered
pair of positions ``p < q`` in a user's sequence with ``q - p = hop`` adds one
to the count of ``(items[p], items[q])`` at that hop.
"""

from __future__ import annotations

import io
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .data import InteractionDataset

MAGIC = "SEQPURIFY-GRAPH"
VERSION = "v1"


class GraphFormatError(ValueError):
    pass


class HopMatrix:
    """Symmetric sparse counts for one hop, stored as adjacency rows.

    ``rows[a][b] == rows[b][a]``; a self-pair ``(a, a)`` appears once in
    ``rows[a]``. Row sums are cached at construction.
    """

    __slots__ = ("hop", "rows", "row_sums")

    def __init__(self, hop: int, rows: dict[int, dict[int, int]] | None = None):
        self.hop = hop
        self.rows: dict[int, dict[int, int]] = rows if rows is not None else {}
        self.row_sums: dict[int, int] = {a: sum(r.values()) for a, r in self.rows.items()}

    @classmethod
    def from_pairs(cls, hop: int, pairs: dict[tuple[int, int], int]) -> "HopMatrix":
        rows: dict[int, dict[int, int]] = defaultdict(dict)
        for (i, j), c in pairs.items():
            if c <= 0:
                continue
            rows[i][j] = c
            rows[j][i] = c
        return cls(hop, dict(rows))

    def get(self, a: int, b: int) -> int:
        row = self.rows.get(a)
        return row.get(b, 0) if row else 0

    def row(self, a: int) -> dict[int, int]:
        return self.rows.get(a, {})

    def entries(self) -> Iterator[tuple[int, int, int]]:
        """Stored entries as ``(i, j, count)`` with ``i <= j``, sorted."""
        for i in sorted(self.rows):
            row = self.rows[i]
            for j in sorted(row):
                if j >= i:
                    yield i, j, row[j]

    @property
    def nnz(self) -> int:
        return sum(1 for _ in self.entries())

    def total(self) -> int:
        return sum(c for _, _, c in self.entries())

    def __eq__(self, other):
        if not isinstance(other, HopMatrix):
            return NotImplemented
        return self.hop == other.hop and self.rows == other.rows and self.row_sums == other.row_sums


_EMPTY = HopMatrix(0)


@dataclass(eq=True)
class MultiHopGraph:
    max_hop: int
    n_items: int
    hops: list[HopMatrix]

    def __post_init__(self):
        if self.max_hop < 1:
            raise ValueError("max_hop must be >= 1")
        if len(self.hops) != self.max_hop:
            raise ValueError(f"expected {self.max_hop} hop matrices, got {len(self.hops)}")

    __hash__ = object.__hash__

    def matrix(self, hop: int) -> HopMatrix:
        if 1 <= hop <= self.max_hop:
            return self.hops[hop - 1]
        return _EMPTY

    def co_count(self, a: int, b: int, hop: int) -> int:
        return self.matrix(hop).get(a, b)

    def row_sum(self, a: int, hop: int) -> int:
        return self.matrix(hop).row_sums.get(a, 0)

    def neighbors(self, a: int, hop: int) -> dict[int, int]:
        return self.matrix(hop).row(a)

    def total_count(self) -> int:
        return sum(m.total() for m in self.hops)


def default_max_hop(db: InteractionDataset) -> int:
    """Smallest cap that keeps every positional pair of ``db``."""
    return max(1, db.max_length() - 1)


def count_pairs(
    sequences: Iterable[tuple[int, ...]], max_hop: int
) -> list[dict[tuple[int, int], int]]:
    counts: list[dict[tuple[int, int], int]] = [defaultdict(int) for _ in range(max_hop)]
    for seq in sequences:
        n = len(seq)
        for p in range(n - 1):
            a = seq[p]
            for q in range(p + 1, min(n, p + max_hop + 1)):
                b = seq[q]
                key = (a, b) if a <= b else (b, a)
                counts[q - p - 1][key] += 1
    return counts


def build_graph(
    db: InteractionDataset, max_hop: int | None = None, n_items: int | None = None
) -> MultiHopGraph:
    if max_hop is None:
        max_hop = default_max_hop(db)
    if max_hop < 1:
        raise ValueError("max_hop must be >= 1")
    if len(db) == 0:
        raise ValueError("cannot build a graph from an empty dataset")
    if n_items is None:
        n_items = max(max(s) for s in db.sequences.values()) + 1
    counts = count_pairs((seq for _, seq in db.items()), max_hop)
    hops = [HopMatrix.from_pairs(h + 1, c) for h, c in enumerate(counts)]
    return MultiHopGraph(max_hop, n_items, hops)


def random_graph_like(g: MultiHopGraph, seed: int) -> MultiHopGraph:
    """Random graph with the same per-hop edge count as ``g``.

    Endpoints are uniform over the catalog; counts are drawn uniformly from
    the multiset of ``g``'s counts at that hop.
    """
    rng = np.random.default_rng([seed, 0x5EED])
    n = g.n_items
    n_pairs = n * (n + 1) // 2
    hops = []
    for m in g.hops:
        counts = [c for _, _, c in m.entries()]
        n_edges = min(len(counts), n_pairs)
        pairs: dict[tuple[int, int], int] = {}
        while len(pairs) < n_edges:
            i, j = (int(x) for x in rng.integers(0, n, size=2))
            key = (i, j) if i <= j else (j, i)
            if key not in pairs:
                pairs[key] = int(counts[rng.integers(len(counts))])
        hops.append(HopMatrix.from_pairs(m.hop, pairs))
    return MultiHopGraph(g.max_hop, n, hops)


def dumps_graph(g: MultiHopGraph) -> str:
    out = io.StringIO()
    out.write(f"{MAGIC} {VERSION} max_hop={g.max_hop} n_items={g.n_items}\n")
    for m in g.hops:
        for i, j, c in m.entries():
            out.write(f"{m.hop}\t{i}\t{j}\t{c}\n")
    return out.getvalue()


def save_graph(g: MultiHopGraph, sink) -> None:
    """Write ``g`` to a path or a text stream."""
    text = dumps_graph(g)
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _int_field(tok: str, lineno: int) -> int:
    if not tok.isascii() or not tok.isdigit():
        raise GraphFormatError(f"line {lineno}: bad integer {tok!r}")
    return int(tok)


def loads_graph(text: str) -> MultiHopGraph:
    if not text.endswith("\n"):
        raise GraphFormatError("truncated graph file (missing final newline)")
    lines = text[:-1].split("\n")
    header = lines[0].split(" ")
    if len(header) != 4 or header[0] != MAGIC:
        raise GraphFormatError("not a graph file")
    if header[1] != VERSION:
        raise GraphFormatError(f"unsupported graph version {header[1]!r}")
    try:
        key_h, val_h = header[2].split("=")
        key_n, val_n = header[3].split("=")
    except ValueError:
        raise GraphFormatError("malformed header") from None
    if key_h != "max_hop" or key_n != "n_items":
        raise GraphFormatError("malformed header")
    max_hop = _int_field(val_h, 1)
    n_items = _int_field(val_n, 1)
    if max_hop < 1:
        raise GraphFormatError("max_hop must be >= 1")

    pairs: list[dict[tuple[int, int], int]] = [{} for _ in range(max_hop)]
    prev = None
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != 4:
            raise GraphFormatError(f"line {lineno}: expected 4 fields, got {len(fields)}")
        hop, i, j, c = (_int_field(t, lineno) for t in fields)
        if not 1 <= hop <= max_hop:
            raise GraphFormatError(f"line {lineno}: hop {hop} outside 1..{max_hop}")
        if i > j:
            raise GraphFormatError(f"line {lineno}: entry not in upper triangle")
        if j >= n_items:
            raise GraphFormatError(f"line {lineno}: item {j} >= n_items={n_items}")
        if c < 1:
            raise GraphFormatError(f"line {lineno}: zero count stored")
        if prev is not None and (hop, i, j) <= prev:
            raise GraphFormatError(f"line {lineno}: records out of order or duplicated")
        prev = (hop, i, j)
        pairs[hop - 1][(i, j)] = c
    hops = [HopMatrix.from_pairs(h + 1, p) for h, p in enumerate(pairs)]
    return MultiHopGraph(max_hop, n_items, hops)


def load_graph(source) -> MultiHopGraph:
    """Read a graph from a path or a text stream. Row sums are recomputed."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return loads_graph(text)
