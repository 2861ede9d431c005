"""Victim recommenders: a query protocol plus reference and remote handles."""

from __future__ import annotations

import json
import socket
import urllib.error
import urllib.request
from collections import Counter, defaultdict
from typing import Callable, Protocol, Sequence, runtime_checkable

from .data import InteractionDataset, build_catalog
from .graph import MultiHopGraph, build_graph


@runtime_checkable
class Recommender(Protocol):
    """Anything that ranks next items for an id sequence.

    ``max_in_flight`` bounds concurrent queries (1 means serial).
    """

    max_in_flight: int

    def recommend(self, profile: Sequence[int], k: int, user_id: int = 0) -> list[int]: ...


class ReferenceRecommender:
    """Next-item scorer over positional co-occurrence.

    A candidate placed right after the profile scores the sum of its
    co-occurrence with each profile item at the matching gap. Unscored items
    follow by training popularity, then by id.
    """

    max_in_flight = 64

    def __init__(self, graph: MultiHopGraph, popularity: dict[int, int]):
        self.graph = graph
        self.popularity = popularity
        self._by_popularity = sorted(
            range(graph.n_items), key=lambda c: (-popularity.get(c, 0), c)
        )

    def scores(self, profile: Sequence[int]) -> dict[int, int]:
        out: dict[int, int] = defaultdict(int)
        n = len(profile)
        for j, item in enumerate(profile):
            for c, cnt in self.graph.neighbors(item, n - j).items():
                out[c] += cnt
        return out

    def recommend(self, profile: Sequence[int], k: int, user_id: int = 0) -> list[int]:
        if k < 1:
            raise ValueError("k must be >= 1")
        seen = set(profile)
        scored = {c: s for c, s in self.scores(profile).items() if c not in seen and s > 0}
        pop = self.popularity
        ranked = sorted(scored, key=lambda c: (-scored[c], -pop.get(c, 0), c))[:k]
        if len(ranked) < k:
            for c in self._by_popularity:
                if c not in seen and c not in scored:
                    ranked.append(c)
                    if len(ranked) == k:
                        break
        return ranked


def train_reference(
    db: InteractionDataset, max_hop: int | None = None, graph: MultiHopGraph | None = None
) -> ReferenceRecommender:
    """Fit the reference recommender on ``db``, reusing ``graph`` if given."""
    if len(db) == 0:
        raise ValueError("cannot train on an empty dataset")
    if graph is None:
        graph = build_graph(db, max_hop, n_items=len(build_catalog(db)))
    popularity = Counter(i for seq in db.sequences.values() for i in seq)
    return ReferenceRecommender(graph, dict(popularity))


class CallableRecommender:
    """Wrap a plain function ``(profile, k) -> list`` as a recommender."""

    def __init__(self, fn: Callable[[Sequence[int], int], list[int]], max_in_flight: int = 1):
        self.fn = fn
        self.max_in_flight = max_in_flight

    def recommend(self, profile: Sequence[int], k: int, user_id: int = 0) -> list[int]:
        return list(self.fn(profile, k))


class RemoteError(RuntimeError):
    pass


class TransportError(RemoteError):
    pass


class RemoteTimeout(TransportError):
    pass


class ProtocolError(RemoteError):
    pass


def validate_recommendations(
    items, k: int, profile: Sequence[int], n_items: int | None = None
) -> list[int]:
    """Check a recommender's answer; raise ProtocolError rather than repair it."""
    if not isinstance(items, list):
        raise ProtocolError("'items' must be an array")
    if any(not isinstance(i, int) or isinstance(i, bool) or i < 0 for i in items):
        raise ProtocolError("'items' must hold non-negative integers")
    if len(items) > k:
        raise ProtocolError(f"got {len(items)} items for k={k}")
    if len(set(items)) != len(items):
        raise ProtocolError("duplicate item ids in response")
    if n_items is not None and any(i >= n_items for i in items):
        raise ProtocolError(f"item id outside catalog of size {n_items}")
    if set(items) & set(profile):
        raise ProtocolError("response recommends already-consumed items")
    return items


class RemoteRecommender:
    """Client for ``POST <endpoint>/recommend`` speaking JSON."""

    def __init__(
        self,
        endpoint: str,
        n_items: int | None = None,
        timeout: float = 10.0,
        max_in_flight: int = 4,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.n_items = n_items
        self.timeout = timeout
        self.max_in_flight = max_in_flight

    def recommend(self, profile: Sequence[int], k: int, user_id: int = 0) -> list[int]:
        return remote_recommend(
            self.endpoint, profile, k, self.timeout, user_id=user_id, n_items=self.n_items
        )


def remote_recommend(
    endpoint: str,
    profile: Sequence[int],
    k: int,
    timeout: float = 10.0,
    user_id: int = 0,
    n_items: int | None = None,
) -> list[int]:
    body = json.dumps(
        {"user_id": int(user_id), "items": [int(i) for i in profile], "k": int(k)},
        separators=(",", ":"),
    ).encode("utf-8")
    req = urllib.request.Request(
        endpoint.rstrip("/") + "/recommend",
        data=body,
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            status = resp.status
            raw = resp.read()
    except urllib.error.HTTPError as e:
        raise TransportError(f"HTTP {e.code} from {endpoint}") from e
    except (socket.timeout, TimeoutError) as e:
        raise RemoteTimeout(f"timed out after {timeout}s querying {endpoint}") from e
    except urllib.error.URLError as e:
        if isinstance(e.reason, (socket.timeout, TimeoutError)):
            raise RemoteTimeout(f"timed out after {timeout}s querying {endpoint}") from e
        raise TransportError(f"cannot reach {endpoint}: {e.reason}") from e
    except OSError as e:
        raise TransportError(f"transport failure talking to {endpoint}: {e}") from e
    if status != 200:
        raise TransportError(f"HTTP {status} from {endpoint}")
    try:
        payload = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ProtocolError(f"malformed response body: {e}") from e
    if not isinstance(payload, dict) or "items" not in payload:
        raise ProtocolError("response lacks an 'items' field")
    return validate_recommendations(payload["items"], k, profile, n_items)
