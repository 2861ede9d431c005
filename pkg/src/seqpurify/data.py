"""Interaction logs: parsing, catalogs and leave-one-out splits.

The on-disk format is one user per line::

    <user_id>\\t<item_id>,<item_id>,...\\n

Lines starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

log = logging.getLogger(__name__)

EXTERNAL_DATABASE = "external_database"
EVALUATION_SET = "evaluation_set"


class DatasetError(ValueError):
    pass


class ParseError(DatasetError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class InteractionDataset:
    """Per-user chronological item sequences (earliest first)."""

    sequences: Mapping[int, tuple[int, ...]]
    role: str = EXTERNAL_DATABASE

    def __post_init__(self):
        seqs = {}
        for user, items in self.sequences.items():
            if user < 0:
                raise DatasetError(f"negative user id {user}")
            items = tuple(int(i) for i in items)
            if not items:
                raise DatasetError(f"user {user} has an empty sequence")
            if min(items) < 0:
                raise DatasetError(f"user {user} has a negative item id")
            seqs[int(user)] = items
        object.__setattr__(self, "sequences", MappingProxyType(seqs))

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self) -> Iterator[int]:
        return iter(self.sequences)

    def __getitem__(self, user: int) -> tuple[int, ...]:
        return self.sequences[user]

    def __eq__(self, other):
        if not isinstance(other, InteractionDataset):
            return NotImplemented
        return self.role == other.role and dict(self.sequences) == dict(other.sequences)

    def users(self) -> list[int]:
        return sorted(self.sequences)

    def items(self) -> Iterator[tuple[int, tuple[int, ...]]]:
        """Yield ``(user, sequence)`` pairs in ascending user order."""
        for user in self.users():
            yield user, self.sequences[user]

    def max_length(self) -> int:
        return max((len(s) for s in self.sequences.values()), default=0)

    def with_role(self, role: str) -> "InteractionDataset":
        return InteractionDataset(dict(self.sequences), role)


@dataclass(frozen=True)
class ItemCatalog:
    """Dense item id space ``[0, size)`` with optional display names."""

    size: int
    names: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.size < 1:
            raise DatasetError("catalog must contain at least one item")

    def __len__(self) -> int:
        return self.size

    def __contains__(self, item: int) -> bool:
        return 0 <= item < self.size

    def name(self, item: int) -> str:
        return self.names.get(item, str(item))


@dataclass(frozen=True)
class EvaluationPair:
    user: int
    profile: tuple[int, ...]
    target: int


@dataclass(frozen=True)
class Holdout:
    pairs: list[EvaluationPair]
    skipped: int = 0

    def __iter__(self) -> Iterator[EvaluationPair]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def profiles(self) -> InteractionDataset:
        """The held-out profiles as a dataset (targets removed)."""
        return InteractionDataset({p.user: p.profile for p in self.pairs}, EXTERNAL_DATABASE)


def _parse_ids(token: str, lineno: int, what: str) -> int:
    if not token.isdigit() or not token.isascii():
        raise ParseError(lineno, f"invalid {what} id {token!r}")
    return int(token)


def parse_interactions(
    source: bytes | str | Iterable[str], role: str = EXTERNAL_DATABASE
) -> InteractionDataset:
    """Parse an interaction log.

    ``source`` may be raw UTF-8 bytes, a decoded string, or an iterable of
    lines (e.g. an open text file).
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source, newline="")

    seqs: dict[int, tuple[int, ...]] = {}
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        user_tok, sep, items_tok = line.partition("\t")
        if not sep:
            raise ParseError(lineno, "missing tab separator")
        user = _parse_ids(user_tok, lineno, "user")
        if items_tok == "":
            raise ParseError(lineno, "empty item list")
        items = tuple(_parse_ids(t, lineno, "item") for t in items_tok.split(","))
        if user in seqs:
            raise ParseError(lineno, f"duplicate user {user}")
        seqs[user] = items
    return InteractionDataset(seqs, role)


def format_interactions(db: InteractionDataset) -> str:
    return "".join(f"{user}\t{','.join(map(str, items))}\n" for user, items in db.items())


def read_interactions(path, role: str = EXTERNAL_DATABASE) -> InteractionDataset:
    with open(path, "rb") as fh:
        return parse_interactions(fh.read(), role)


def write_interactions(db: InteractionDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_interactions(db))


def build_catalog(db: InteractionDataset) -> ItemCatalog:
    if len(db) == 0:
        raise DatasetError("cannot build a catalog from an empty dataset")
    return ItemCatalog(max(max(s) for s in db.sequences.values()) + 1)


def holdout_last(db: InteractionDataset) -> Holdout:
    """Split every sequence into (all but last, last).

    Users with a single interaction cannot be split and are skipped.
    """
    pairs = []
    skipped = 0
    for user, items in db.items():
        if len(items) < 2:
            skipped += 1
            continue
        pairs.append(EvaluationPair(user, items[:-1], items[-1]))
    if skipped:
        log.warning("holdout skipped %d single-interaction users", skipped)
    return Holdout(pairs, skipped)
