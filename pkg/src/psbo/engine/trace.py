"""Append-only JSON-lines trace of a search."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

import numpy as np

from ..hyperspace import INACTIVE

RECORD_KINDS = ("round-start", "eval", "skip", "prune", "inject", "propose",
                "final-cv", "champion")
TERMINAL_STATUSES = ("complete", "partial-model", "fs-timeout", "train-timeout",
                     "degenerate-fs", "cache-skip", "rule-skip")


def _plain(v):
    if v is INACTIVE:
        return None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), default=_plain)


class Trace:
    """In-memory record list, optionally mirrored line by line to a file."""

    def __init__(self, path=None):
        self.records: list[dict] = []
        self.path = Path(path) if path is not None else None
        self._fh = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = self.path.open("w", encoding="utf-8")

    def emit(self, kind: str, **fields) -> dict:
        if kind not in RECORD_KINDS:
            raise ValueError(f"unknown trace record kind {kind!r}")
        rec = {"seq": len(self.records), "kind": kind, **fields}
        self.records.append(rec)
        if self._fh is not None:
            self._fh.write(dumps(rec) + "\n")
        return rec

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def of_kind(self, *kinds: str) -> list[dict]:
        return [r for r in self.records if r["kind"] in kinds]


def read_trace(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_trace(records: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dumps(rec) + "\n")
