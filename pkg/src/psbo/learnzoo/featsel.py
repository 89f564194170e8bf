"""Filter feature selection: attribute evaluators, a subset evaluator (CFS
merit), and three search methods.

Every technique works on the raw feature columns of a :class:`Dataset`;
numeric columns are discretized into equal-frequency bins wherever an
information-theoretic score needs counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dataset import round_half_up
from ..hyperspace import HyperSpace, categorical, numeric, FS_SWITCH, NO_FS
from .clock import TICK_UNITS

SEARCH_METHODS = ("ranker", "greedy", "best_first")
ATTRIBUTE_EVALUATORS = ("info_gain", "chi_square", "correlation", "pca")
SUBSET_EVALUATORS = ("cfs",)
EVALUATORS = ATTRIBUTE_EVALUATORS + SUBSET_EVALUATORS
N_BINS = 10

# virtual cost constants (cost units per elementary operation)
_ATTR_COST = 8e-5
_PCA_COST = 1e-6
_CFS_COST = 3e-6
_SEARCH_COST = 2e-5


class FeatureSelectionError(RuntimeError):
    pass


def fs_space() -> HyperSpace:
    """Parameters of the feature-selection block, rooted at ``fs.search``."""
    active = SEARCH_METHODS
    return HyperSpace([
        categorical(FS_SWITCH, (NO_FS,) + SEARCH_METHODS, NO_FS),
        categorical("fs.evaluator", EVALUATORS, "info_gain", when=(FS_SWITCH, active)),
        numeric("fs.ranker.threshold", 0.0, 2.0, 0.0, when=(FS_SWITCH, "ranker")),
        numeric("fs.ranker.fraction", 0.05, 1.0, 1.0, when=(FS_SWITCH, "ranker")),
        categorical("fs.greedy.direction", ("forward", "backward"), "forward",
                    when=(FS_SWITCH, "greedy")),
        numeric("fs.best_first.lookahead", 1, 10, 5, integer=True,
                when=(FS_SWITCH, "best_first")),
    ])


@dataclass
class FsOutcome:
    status: str  # "selected" | "all" | "none" | "timeout"
    subset: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    elapsed: float = 0.0
    block: dict | None = None
    reason: str = ""

    @property
    def degenerate(self) -> bool:
        return self.status in ("all", "none")


# ----------------------------------------------------------------------
# scores
# ----------------------------------------------------------------------

def discretize(X: np.ndarray, categorical_mask: np.ndarray, bins: int = N_BINS) -> np.ndarray:
    """Integer codes per column: categorical kept, numeric equal-frequency binned."""
    out = np.empty(X.shape, dtype=int)
    for j in range(X.shape[1]):
        col = X[:, j]
        if categorical_mask[j]:
            out[:, j] = col.astype(int)
        else:
            edges = np.unique(np.quantile(col, np.linspace(0, 1, bins + 1)[1:-1]))
            out[:, j] = np.searchsorted(edges, col, side="right")
    return out


def _entropy(counts: np.ndarray) -> float:
    counts = counts[counts > 0]
    if counts.size == 0:
        return 0.0
    prob = counts / counts.sum()
    return float(-(prob * np.log2(prob)).sum())


def _joint(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(table, (ai, bi), 1)
    return table


def info_gain(codes: np.ndarray, y: np.ndarray) -> np.ndarray:
    h_y = _entropy(np.bincount(y))
    gains = np.empty(codes.shape[1])
    for j in range(codes.shape[1]):
        table = _joint(codes[:, j], y)
        h_cond = sum(row.sum() / len(y) * _entropy(row) for row in table)
        gains[j] = h_y - h_cond
    return np.maximum(gains, 0.0)


def chi_square(codes: np.ndarray, y: np.ndarray) -> np.ndarray:
    stats = np.empty(codes.shape[1])
    for j in range(codes.shape[1]):
        table = _joint(codes[:, j], y)
        expected = table.sum(1, keepdims=True) * table.sum(0, keepdims=True) / table.sum()
        with np.errstate(divide="ignore", invalid="ignore"):
            cell = np.where(expected > 0, (table - expected) ** 2 / expected, 0.0)
        stats[j] = cell.sum()
    return stats


def correlation(X: np.ndarray, codes: np.ndarray, categorical_mask: np.ndarray,
                y: np.ndarray) -> np.ndarray:
    """Class-frequency-weighted |Pearson r| against class indicators for numeric
    columns; Cramer's V for categorical ones."""
    classes, counts = np.unique(y, return_counts=True)
    freq = counts / counts.sum()
    scores = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        if categorical_mask[j]:
            table = _joint(codes[:, j], y)
            r, c = table.shape
            if min(r, c) < 2:
                continue
            expected = table.sum(1, keepdims=True) * table.sum(0, keepdims=True) / table.sum()
            chi = ((table - expected) ** 2 / expected).sum()
            scores[j] = np.sqrt(chi / (table.sum() * (min(r, c) - 1)))
        else:
            x = X[:, j]
            if x.std() == 0:
                continue
            total = 0.0
            for c, f in zip(classes, freq):
                ind = (y == c).astype(float)
                if ind.std() == 0:
                    continue
                total += f * abs(np.corrcoef(x, ind)[0, 1])
            scores[j] = total
    return scores


def pca_scores(X: np.ndarray, coverage: float = 0.95) -> np.ndarray:
    """Variance-weighted absolute loadings over the components covering 95% of
    the variance."""
    std = X.std(axis=0)
    Z = (X - X.mean(axis=0)) / np.where(std > 0, std, 1.0)
    if Z.shape[0] < 2:
        return np.zeros(X.shape[1])
    _, s, vt = np.linalg.svd(Z, full_matrices=False)
    var = s ** 2
    if var.sum() == 0:
        return np.zeros(X.shape[1])
    ratio = var / var.sum()
    keep = int(np.searchsorted(np.cumsum(ratio), coverage) + 1)
    return (ratio[:keep, None] * np.abs(vt[:keep])).sum(axis=0)


def symmetric_uncertainty(a: np.ndarray, b: np.ndarray) -> float:
    h_a = _entropy(np.unique(a, return_counts=True)[1].astype(float))
    h_b = _entropy(np.unique(b, return_counts=True)[1].astype(float))
    if h_a + h_b == 0:
        return 0.0
    h_ab = _entropy(_joint(a, b).ravel())
    return 2.0 * (h_a + h_b - h_ab) / (h_a + h_b)


def _dense(col: np.ndarray) -> tuple[np.ndarray, int]:
    levels, inv = np.unique(col, return_inverse=True)
    return inv.ravel(), levels.size


def _su_dense(a, ka, ha, b, kb, hb) -> float:
    """Symmetric uncertainty of two densely coded columns with known entropies."""
    if ha + hb == 0:
        return 0.0
    h_ab = _entropy(np.bincount(a * kb + b, minlength=ka * kb).astype(float))
    return 2.0 * (ha + hb - h_ab) / (ha + hb)


class CfsMerit:
    """Correlation-based feature subset merit with cached pairwise SU values."""

    def __init__(self, codes: np.ndarray, y: np.ndarray):
        p = codes.shape[1]
        cols = [_dense(codes[:, j]) for j in range(p)]
        h = [_entropy(np.bincount(c).astype(float)) for c, _ in cols]
        yi, ky = _dense(y)
        h_y = _entropy(np.bincount(yi).astype(float))
        self.class_su = np.array([_su_dense(cols[j][0], cols[j][1], h[j], yi, ky, h_y)
                                  for j in range(p)])
        self.pair_su = np.eye(p)
        for i in range(p):
            for j in range(i + 1, p):
                self.pair_su[i, j] = self.pair_su[j, i] = _su_dense(
                    cols[i][0], cols[i][1], h[i], cols[j][0], cols[j][1], h[j])

    def __call__(self, subset) -> float:
        subset = list(subset)
        k = len(subset)
        if k == 0:
            return 0.0
        rcf = self.class_su[subset].mean()
        if k == 1:
            return float(rcf)
        block = self.pair_su[np.ix_(subset, subset)]
        rff = (block.sum() - k) / (k * (k - 1))
        return float(k * rcf / np.sqrt(k + k * (k - 1) * rff))


# ----------------------------------------------------------------------
# search methods
# ----------------------------------------------------------------------

def rank_select(scores: np.ndarray, threshold: float, fraction: float) -> np.ndarray:
    """Features whose score exceeds ``threshold`` times the mean score, then the
    top ``fraction`` of all features among those."""
    p = scores.size
    mean = scores.mean() if p else 0.0
    rel = scores / mean if mean > 0 else np.zeros(p)
    passing = np.flatnonzero(rel > threshold)
    limit = round_half_up(fraction * p)
    order = passing[np.lexsort((passing, -rel[passing]))]
    return np.sort(order[:limit])


def greedy_search(merit: CfsMerit, p: int, direction: str) -> np.ndarray:
    if direction == "forward":
        current: list[int] = []
        best = 0.0
        while len(current) < p:
            cands = [(merit(current + [j]), -j) for j in range(p) if j not in current]
            value, neg_j = max(cands)
            if value <= best:
                break
            best = value
            current.append(-neg_j)
        return np.array(sorted(current), dtype=int)
    current = list(range(p))
    best = merit(current)
    while len(current) > 1:
        cands = [(merit([f for f in current if f != j]), -j) for j in current]
        value, neg_j = max(cands)
        if value < best:
            break
        best = value
        current.remove(-neg_j)
    return np.array(sorted(current), dtype=int)


def best_first_search(merit: CfsMerit, p: int, lookahead: int) -> np.ndarray:
    """Forward best-first search that stops after ``lookahead`` consecutive
    expansions without improvement."""
    start: frozenset = frozenset()
    open_list = [(0.0, start)]
    seen = {start}
    best_set, best_value = start, 0.0
    stale = 0
    expansions = 0
    while open_list and stale < lookahead and expansions < p * max(lookahead, 1) + p:
        open_list.sort(key=lambda t: (-t[0], sorted(t[1])))
        _, node = open_list.pop(0)
        expansions += 1
        improved = False
        for j in range(p):
            if j in node:
                continue
            child = node | {j}
            if child in seen:
                continue
            seen.add(child)
            value = merit(sorted(child))
            open_list.append((value, child))
            if value > best_value + 1e-12:
                best_value, best_set = value, child
                improved = True
        stale = 0 if improved else stale + 1
    return np.array(sorted(best_set), dtype=int)


# ----------------------------------------------------------------------
# driver
# ----------------------------------------------------------------------

def fs_cost(block: dict, n: int, p: int) -> float:
    """Cost, in clock ticks, of running a feature-selection block on an ``n x p`` sample."""
    evaluator = block["fs.evaluator"]
    search = block[FS_SWITCH]
    if evaluator == "pca":
        cost = _PCA_COST * (n * p * min(n, p) + p ** 3)
    elif evaluator == "cfs" or search != "ranker":
        cost = _CFS_COST * n * p * (p + 1) / 2
    else:
        cost = _ATTR_COST * n * p
    if search == "ranker":
        cost += _SEARCH_COST * p * np.log2(p + 1)
    elif search == "greedy":
        cost += _SEARCH_COST * p ** 3
    else:
        cost += _SEARCH_COST * p ** 3 * (1.0 + block.get("fs.best_first.lookahead", 5) / 10)
    return float(cost)


def select_features(block: dict, X: np.ndarray, y: np.ndarray,
                    categorical_mask: np.ndarray) -> np.ndarray:
    """Run the technique and return the selected column indices."""
    search = block[FS_SWITCH]
    evaluator = block["fs.evaluator"]
    p = X.shape[1]
    codes = discretize(X, categorical_mask)
    if search == "ranker":
        if evaluator == "info_gain":
            scores = info_gain(codes, y)
        elif evaluator == "chi_square":
            scores = chi_square(codes, y)
        elif evaluator == "correlation":
            scores = correlation(X, codes, categorical_mask, y)
        elif evaluator == "pca":
            scores = pca_scores(X)
        else:
            # a subset evaluator under a ranker degenerates to singleton merits
            scores = CfsMerit(codes, y).class_su
        return rank_select(scores, block["fs.ranker.threshold"], block["fs.ranker.fraction"])
    if evaluator not in SUBSET_EVALUATORS:
        raise FeatureSelectionError(f"{search} search needs a subset evaluator, got {evaluator}")
    merit = CfsMerit(codes, y)
    if search == "greedy":
        return greedy_search(merit, p, block["fs.greedy.direction"])
    return best_first_search(merit, p, int(block["fs.best_first.lookahead"]))


def run_feature_selection(block: dict, X: np.ndarray, y: np.ndarray,
                          categorical_mask: np.ndarray, budget: float,
                          clock) -> FsOutcome:
    """Time-limited feature selection; failures map to ``timeout``."""
    n, p = X.shape
    predicted = fs_cost(block, n, p) * TICK_UNITS
    timer = clock.start()
    if clock.virtual and predicted > budget:
        return FsOutcome("timeout", elapsed=float(budget), block=block,
                         reason="predicted cost exceeds budget")
    if budget <= 0:
        return FsOutcome("timeout", elapsed=0.0, block=block, reason="zero budget")
    try:
        subset = select_features(block, X, y, categorical_mask)
    except Exception as exc:  # any learner failure counts as a failed test
        return FsOutcome("timeout", elapsed=float(budget), block=block,
                         reason=f"failure: {exc}")
    elapsed = timer.elapsed(predicted)
    if not clock.virtual and elapsed > budget:
        return FsOutcome("timeout", elapsed=elapsed, block=block, reason="wall budget exceeded")
    if subset.size == 0:
        return FsOutcome("none", subset, elapsed, block)
    if subset.size == p:
        return FsOutcome("all", subset, elapsed, block)
    return FsOutcome("selected", subset, elapsed, block)
