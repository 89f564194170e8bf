"""Pairwise fold-win tournament for the final round."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Contender:
    """One (algorithm, combination) pair after the final cross validation.

    ``fold_errors`` and ``time`` come from the final folds; ``prev_estimate``
    is the error estimate carried over from the last progressive round.
    """
    label: object
    fold_errors: tuple[float, ...]
    prev_estimate: float
    time: float

    @property
    def mean_error(self) -> float:
        # exact summation, so permuted fold errors tie exactly
        return math.fsum(self.fold_errors) / len(self.fold_errors)


def pairwise_wins(contenders: Sequence[Contender]) -> list[int]:
    """Matches won by each contender in a round robin.

    Contender i beats j when its fold error is strictly lower on more folds
    than the other way around. Equal fold counts are a drawn match.
    """
    errs = np.array([c.fold_errors for c in contenders], dtype=float)
    n = len(contenders)
    wins = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            a = int((errs[i] < errs[j]).sum())
            b = int((errs[j] < errs[i]).sum())
            if a > b:
                wins[i] += 1
            elif b > a:
                wins[j] += 1
    return wins


def rank_contenders(contenders: Sequence[Contender]) -> list[int]:
    """Indices ordered best first.

    Most matches won; ties go to the lower mean fold error, then the lower
    previous estimate, then the shorter total time, then the earlier entry.
    """
    wins = pairwise_wins(contenders)
    return sorted(range(len(contenders)),
                  key=lambda i: (-wins[i], contenders[i].mean_error,
                                 contenders[i].prev_estimate, contenders[i].time, i))


def champion_index(contenders: Sequence[Contender]) -> int:
    if not contenders:
        raise ValueError("no contenders")
    return rank_contenders(contenders)[0]
