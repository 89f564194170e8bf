"""Random-forest surrogate over combinations and the proposal cycle.

Each algorithm gets its own forest, trained on (combination, adjusted error)
points. Proposals alternate between the candidate with the best expected
improvement and a plain random draw.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.stats import norm
from sklearn.ensemble import RandomForestRegressor

from .hyperspace import DIFF_FRACTION, Combination, HyperSpace

PROVENANCES = ("tested", "rough-idw", "cache-injected", "rule-injected")

POOL_SIZE = 500
MAX_INCUMBENTS = 10
MUTATIONS_PER_INCUMBENT = 10
MAX_REDRAWS = 50


@dataclass(frozen=True)
class DataPoint:
    combination: Combination
    error: float
    provenance: str = "tested"

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if not 0.0 <= self.error <= 1.0:
            raise ValueError(f"adjusted error {self.error} outside [0, 1]")

    def to_dict(self) -> dict:
        return {"combination": self.combination.to_dict(), "error": self.error,
                "provenance": self.provenance}


class SurrogateForest:
    """Bootstrap regression forest over encoded combinations.

    Parameters
    ----------
    space : HyperSpace
        The algorithm's full search space; fixes the encoding.
    algorithm : str
        Only points for this algorithm are accepted.
    n_trees : int
        Forest size.
    min_leaf : int
        Minimum number of (bootstrap) members per leaf.
    max_features : float
        Fraction of encoded columns considered at each split.
    seed : int
        Fixes the bootstraps and split subsets.
    """

    def __init__(self, space: HyperSpace, algorithm: str, n_trees: int = 10, min_leaf: int = 2,
                 max_features: float = 5 / 6, seed: int = 0):
        if n_trees < 1:
            raise ValueError("a forest needs at least one tree")
        self.space = space
        self.algorithm = algorithm
        self.n_trees = n_trees
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.seed = seed
        self.points: tuple[DataPoint, ...] = ()
        self._model = None
        self._constant = None

    def encode(self, combos: Sequence[Combination]) -> np.ndarray:
        if not combos:
            return np.empty((0, len(self.space)))
        return np.vstack([self.space.encode(c.values) for c in combos])

    def fit(self, points: Sequence[DataPoint]) -> "SurrogateForest":
        if not points:
            raise ValueError("cannot fit a surrogate without data points")
        for pt in points:
            if pt.combination.algorithm != self.algorithm:
                raise ValueError(f"point for {pt.combination.algorithm} offered to "
                                 f"the {self.algorithm} surrogate")
        self.points = tuple(points)
        y = np.array([pt.error for pt in points])
        X = self.encode([pt.combination for pt in points])
        if X.shape[1] == 0 or np.ptp(y) == 0.0:
            # nothing to split on: every tree is a single leaf
            self._model, self._constant = None, float(y.mean())
            return self
        self._constant = None
        self._model = RandomForestRegressor(
            n_estimators=self.n_trees, min_samples_leaf=self.min_leaf,
            max_features=self.max_features, bootstrap=True, random_state=self.seed)
        self._model.fit(X, y)
        return self

    def _tree_outputs(self, X: np.ndarray) -> np.ndarray:
        if self._model is None and self._constant is None:
            raise RuntimeError("surrogate has not been fitted")
        if self._model is None:
            return np.full((self.n_trees, len(X)), self._constant)
        return np.vstack([t.predict(X) for t in self._model.estimators_])

    def predict_many(self, combos: Sequence[Combination]) -> tuple[np.ndarray, np.ndarray]:
        """Mean and sample standard deviation of the per-tree outputs."""
        out = np.clip(self._tree_outputs(self.encode(combos)), 0.0, 1.0)
        mean = out.mean(axis=0)
        spread = out.std(axis=0, ddof=1) if self.n_trees > 1 else np.zeros(len(combos))
        return mean, spread

    def predict(self, c: Combination) -> tuple[float, float]:
        mean, spread = self.predict_many([c])
        return float(mean[0]), float(spread[0])

    def dump(self) -> dict:
        return {"algorithm": self.algorithm, "seed": self.seed, "n_trees": self.n_trees,
                "points": [pt.to_dict() for pt in self.points]}


def fit(points: Sequence[DataPoint], space: HyperSpace, seed: int = 0,
        n_trees: int = 10) -> SurrogateForest:
    """Fit a fresh forest on ``points`` (all for one algorithm)."""
    if not points:
        raise ValueError("cannot fit a surrogate without data points")
    return SurrogateForest(space, points[0].combination.algorithm, n_trees=n_trees,
                           seed=seed).fit(points)


def expected_improvement(mean, spread, best):
    """Expected improvement below ``best`` for a minimization problem.

    Works elementwise on arrays. Zero spread reduces to ``max(0, best - mean)``.
    """
    mean = np.asarray(mean, dtype=float)
    spread = np.asarray(spread, dtype=float)
    gain = best - mean
    safe = np.where(spread > 0, spread, 1.0)
    with np.errstate(over="ignore"):  # a huge |z| has density 0
        z = gain / safe
        ei = gain * norm.cdf(z) + spread * norm.pdf(z)
    ei = np.where(spread > 0, ei, np.maximum(gain, 0.0))
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


class DuplicateIndex:
    """Distance-0 lookups against a growing set of combinations.

    A vectorised pass over the encodings narrows the candidates; the exact
    per-parameter rule confirms them.
    """

    def __init__(self, space: HyperSpace, combos: Sequence[Combination]):
        self.space = space
        tol = [DIFF_FRACTION if p.is_numeric else 0.5 for p in space]
        self.tol = np.array(tol) * (1 + 1e-9) + 1e-12
        self.combos = list(combos)
        self.codes = [space.encode(c.values) for c in self.combos]

    def contains(self, c: Combination, code: np.ndarray | None = None) -> bool:
        if not self.combos:
            return False
        code = self.space.encode(c.values) if code is None else code
        near = np.flatnonzero((np.abs(np.vstack(self.codes) - code) <= self.tol).all(axis=1))
        return any(self.space.distance(c.values, self.combos[i].values) == 0 for i in near)

    def add(self, c: Combination, code: np.ndarray | None = None):
        self.combos.append(c)
        self.codes.append(self.space.encode(c.values) if code is None else code)


def candidate_pool(space: HyperSpace, algorithm: str, incumbents: Sequence[Combination],
                   rng: np.random.Generator, restrict: Mapping | None = None,
                   pool_size: int = POOL_SIZE) -> list[Combination]:
    """Random combinations plus one-parameter mutations of the incumbents."""
    pool = [Combination(algorithm, space.sample(rng, restrict)) for _ in range(pool_size)]
    for inc in list(incumbents)[:MAX_INCUMBENTS]:
        for _ in range(MUTATIONS_PER_INCUMBENT):
            pool.append(Combination(algorithm, space.mutate(inc.values, rng, restrict)))
    return pool


def propose(forest: SurrogateForest, incumbents: Sequence[Combination],
            rng: np.random.Generator, count: int = 10,
            evaluated: Sequence[Combination] = (), restrict: Mapping | None = None,
            pool_size: int = POOL_SIZE, max_redraws: int = MAX_REDRAWS,
            random_source: Callable[[np.random.Generator], Combination] | None = None
            ) -> list[tuple[Combination, str]]:
    """Propose ``count`` combinations, alternating guided and random picks.

    Positions 1, 3, 5, ... take the highest-EI pool member; positions 2, 4, ...
    are uniform random draws. A pick at distance 0 from ``evaluated`` (or from
    an earlier pick of the same batch) is redrawn; after ``max_redraws`` tries
    the last duplicate is kept.

    Parameters
    ----------
    incumbents : sequence of Combination
        Best combinations first; the first ten seed the mutation pool.
    random_source : callable, optional
        Draws one random combination; defaults to sampling ``forest.space``.

    Returns
    -------
    list of (Combination, kind)
        ``kind`` is ``"guided"`` or ``"random"``.
    """
    if count % 2:
        raise ValueError("proposal count must be even")
    space, alg = forest.space, forest.algorithm
    draw = random_source or (lambda g: Combination(alg, space.sample(g, restrict)))
    seen = DuplicateIndex(space, evaluated)
    best = min(pt.error for pt in forest.points)

    pool = candidate_pool(space, alg, incumbents, rng, restrict, pool_size)
    mean, spread = forest.predict_many(pool)
    ei = expected_improvement(mean, spread, best)
    # highest EI first; stable sort keeps pool order among ties
    order = list(np.argsort(-ei, kind="stable"))

    out: list[tuple[Combination, str]] = []
    for pos in range(count):
        if pos % 2 == 0:
            pick = None
            for tries in range(max_redraws):
                if not order:
                    break
                cand = pool[order.pop(0)]
                pick = cand
                if not seen.contains(cand):
                    break
            if pick is None:
                pick = draw(rng)
            kind = "guided"
        else:
            for _ in range(max_redraws):
                pick = draw(rng)
                if not seen.contains(pick):
                    break
            kind = "random"
        seen.add(pick)
        out.append((pick, kind))
    return out
