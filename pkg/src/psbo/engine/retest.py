"""Retest selection, error-rate ratios, rough estimates and penalties."""

from __future__ import annotations

from typing import Callable, Sequence, TypeVar

T = TypeVar("T")

RATIO_LOW, RATIO_HIGH = 0.25, 2.5


def select_for_retest(candidates: Sequence[tuple[T, float]], distance: Callable[[T, T], int],
                      n_c: int = 10, t_d: int = 2) -> list[T]:
    """Pick up to ``n_c`` combinations to retest in the next round.

    Only candidates with error below 1.0 are eligible. When more than ``n_c``
    remain, greedy passes take the lowest-error combination that is neither
    selected nor marked and mark every unselected one within distance ``t_d``
    of it. If the passes stop short of ``n_c``, the lowest-error marked
    combinations fill the gap.

    Parameters
    ----------
    candidates : sequence of (item, error)
        Earlier entries win ties on error.
    distance : callable
        Hamming distance between two items.

    Returns
    -------
    list
        Greedy picks in selection order, then the top-up picks.
    """
    eligible = [(item, err) for item, err in candidates if err < 1.0]
    ranked = [item for item, _ in sorted(eligible, key=lambda t: t[1])]  # stable
    if len(ranked) <= n_c:
        return ranked
    n = len(ranked)
    selected: list[int] = []
    marked = [False] * n
    taken = [False] * n
    for i in range(n):
        if len(selected) == n_c:
            break
        if taken[i] or marked[i]:
            continue
        taken[i] = True
        selected.append(i)
        for j in range(n):
            if not taken[j] and not marked[j] and distance(ranked[i], ranked[j]) <= t_d:
                marked[j] = True
    if len(selected) < n_c:
        fill = [j for j in range(n) if marked[j]][: n_c - len(selected)]
        selected.extend(fill)
    return [ranked[i] for i in selected]


def select_lowest(candidates: Sequence[tuple[T, float]], n_c: int = 10) -> list[T]:
    """Distance-blind selection used when technique 1 is off."""
    eligible = [(item, err) for item, err in candidates if err < 1.0]
    return [item for item, _ in sorted(eligible, key=lambda t: t[1])[:n_c]]


def compute_ratio(e1: float, e2: float, low: float = RATIO_LOW, high: float = RATIO_HIGH) -> float:
    """Clipped ratio of the current error ``e2`` to the previous error ``e1``.

    A previous error of exactly zero gives a ratio of 1.0.
    """
    if e1 == 0:
        return 1.0
    return min(high, max(low, e2 / e1))


def idw_ratio(distances: Sequence[float], ratios: Sequence[float]) -> float:
    """Inverse-distance weighted ratio; the first zero distance short-circuits."""
    if len(distances) != len(ratios) or not ratios:
        raise ValueError("need matching, non-empty distances and ratios")
    for d, r in zip(distances, ratios):
        if d == 0:
            return float(r)
    num = sum(r / d for d, r in zip(distances, ratios))
    den = sum(1.0 / d for d in distances)
    return num / den


def rough_estimate_idw(prev_error: float, distances: Sequence[float],
                       ratios: Sequence[float]) -> float:
    """Rough current-round error for a combination that was not retested.

    ``distances[i]`` is the Hamming distance to the i-th retested combination
    (in selection order) and ``ratios[i]`` its clipped error ratio. A previous
    error of 1.0 stays at 1.0; estimates above 1.0 are capped.
    """
    if prev_error >= 1.0:
        return 1.0
    return min(1.0, prev_error * idw_ratio(distances, ratios))


def rough_estimate_mean(prev_error: float, ratios: Sequence[float]) -> float:
    """Equal-weight variant used when technique 1 is off."""
    if prev_error >= 1.0:
        return 1.0
    return min(1.0, prev_error * sum(ratios) / len(ratios))


def apply_penalties(raw: float, used_fs: bool, n_b: int = 0,
                    fs_factor: float = 1.1, nb_rate: float = 0.02) -> float:
    """Surrogate-side error: raw error times the feature-selection and
    meta/ensemble penalties, compounded and capped at 1.0.

    The product is rounded to 12 decimals so that decimal inputs give decimal
    outputs (0.2 * 1.1 is 0.22, not 0.22000000000000003).
    """
    if not 0.0 <= raw <= 1.0:
        raise ValueError(f"raw error {raw} outside [0, 1]")
    factor = 1.0
    if used_fs:
        factor *= fs_factor
    if n_b > 0:
        factor *= 1.0 + nb_rate * n_b
    if factor == 1.0:
        return raw
    return min(1.0, max(raw, round(raw * factor, 12)))
