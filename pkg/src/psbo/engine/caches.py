"""Shared cache of feature-selection settings known to time out or to select
all or none of the features."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from ..hyperspace import Combination, HyperSpace, INACTIVE
from ..learnzoo import fs_space

CAUSES = ("timeout", "all-selected", "none-selected")


@dataclass(frozen=True)
class CacheEntry:
    block: Mapping
    cause: str
    round: int
    algorithm: str

    def to_dict(self) -> dict:
        return {"block": {k: (None if v is INACTIVE else v) for k, v in sorted(self.block.items())},
                "cause": self.cause, "round": self.round, "algorithm": self.algorithm}


class FsCache:
    """Feature-selection blocks with a distance-0 membership test.

    Entries are bucketed by (search method, evaluator); a lookup only scans
    the matching bucket, where the remaining parameters are compared under
    the 1% numeric rule.
    """

    def __init__(self, space: HyperSpace | None = None):
        self.space = space if space is not None else fs_space()
        self._entries: list[CacheEntry] = []
        self._buckets: dict[tuple, list[CacheEntry]] = {}

    @staticmethod
    def _bucket(block: Mapping) -> tuple:
        return (block.get("fs.search"), block.get("fs.evaluator"))

    def __len__(self):
        return len(self._entries)

    def __iter__(self) -> Iterator[CacheEntry]:
        return iter(self._entries)

    def match(self, block: Mapping | None) -> CacheEntry | None:
        """First entry at Hamming distance 0 from ``block``, if any."""
        if block is None:
            return None
        for entry in self._buckets.get(self._bucket(block), ()):
            if self.space.distance(entry.block, block) == 0:
                return entry
        return None

    def add(self, block: Mapping, cause: str, round: int, algorithm: str) -> CacheEntry | None:
        """Insert ``block`` unless an equivalent entry exists; returns the new entry."""
        if cause not in CAUSES:
            raise ValueError(f"unknown cache cause {cause!r}")
        if self.match(block) is not None:
            return None
        entry = CacheEntry(dict(block), cause, round, algorithm)
        self._entries.append(entry)
        self._buckets.setdefault(self._bucket(block), []).append(entry)
        return entry


def cache_gate(c: Combination, cache: FsCache) -> CacheEntry | None:
    """The cache entry that blocks ``c``, or None when ``c`` may proceed.

    Combinations without feature selection always proceed.
    """
    return cache.match(c.fs_block)
