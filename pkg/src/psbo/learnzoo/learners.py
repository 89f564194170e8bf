"""Classification learners with explicit per-unit cost models.

Each learner knows its own hyper-parameter space, how to build an estimator
for a given number of training units (trees, boosting rounds, epochs), and
what those units cost in virtual time. Anytime learners can be stopped after
any completed unit and still yield a usable model.
"""

from __future__ import annotations

import math
import warnings
from itertools import product

import numpy as np
from scipy.special import logsumexp
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.ensemble import (AdaBoostClassifier, GradientBoostingClassifier,
                              RandomForestClassifier)
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import LogisticRegression
from sklearn.neighbors import KNeighborsClassifier
from sklearn.neural_network import MLPClassifier
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler
from sklearn.svm import SVC
from sklearn.tree import DecisionTreeClassifier

from ..hyperspace import INACTIVE, HyperSpace, categorical, numeric

MAX_SEED = 2**31 - 1


def _log2(n):
    return math.log2(n + 2)


class LearnerError(RuntimeError):
    pass


# ----------------------------------------------------------------------
# custom estimators
# ----------------------------------------------------------------------

class ZeroR(ClassifierMixin, BaseEstimator):
    """Predicts the (weighted) majority class."""

    def fit(self, X, y, sample_weight=None):
        self.classes_, inv = np.unique(y, return_inverse=True)
        w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight)
        self.majority_ = self.classes_[np.bincount(inv, weights=w).argmax()]
        return self

    def predict(self, X):
        return np.full(len(X), self.majority_)


class NaiveBayes(ClassifierMixin, BaseEstimator):
    """Naive Bayes over indicator (binary) and numeric columns.

    Numeric columns use a Gaussian, a Gaussian kernel density estimate, or a
    supervised discretization into tree-chosen bins. The last two cannot be
    combined.
    """

    def __init__(self, indicator_mask=None, kernel_density=False,
                 supervised_discretization=False):
        self.indicator_mask = indicator_mask
        self.kernel_density = kernel_density
        self.supervised_discretization = supervised_discretization

    def _mask(self, d):
        if self.indicator_mask is None:
            return np.zeros(d, dtype=bool)
        return np.asarray(self.indicator_mask, dtype=bool)

    def fit(self, X, y, sample_weight=None):
        if self.kernel_density and self.supervised_discretization:
            raise LearnerError("kernel density and supervised discretization cannot be combined")
        X = np.asarray(X, dtype=float)
        w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=float)
        self.classes_, yi = np.unique(y, return_inverse=True)
        K = len(self.classes_)
        mask = self._mask(X.shape[1])
        self.ind_ = np.flatnonzero(mask)
        self.num_ = np.flatnonzero(~mask)
        wc = np.bincount(yi, weights=w, minlength=K)
        self.log_prior_ = np.log((wc + 1.0) / (wc.sum() + K))
        # indicator columns: Bernoulli with Laplace smoothing
        ones = np.array([[(w[yi == c] * X[yi == c][:, j]).sum() for j in self.ind_] for c in range(K)])
        ones = ones.reshape(K, len(self.ind_))
        p1 = (ones + 1.0) / (wc[:, None] + 2.0)
        self.log_p1_, self.log_p0_ = np.log(p1), np.log1p(-p1)
        Xn = X[:, self.num_]
        if self.supervised_discretization:
            self.edges_ = []
            tables = []
            for j in range(Xn.shape[1]):
                tree = DecisionTreeClassifier(max_leaf_nodes=8, min_samples_leaf=max(2, len(y) // 50),
                                              random_state=0)
                tree.fit(Xn[:, [j]], yi, sample_weight=w)
                thr = np.sort(tree.tree_.threshold[tree.tree_.feature >= 0])
                self.edges_.append(thr)
                codes = np.searchsorted(thr, Xn[:, j], side="right")
                counts = np.zeros((K, thr.size + 1))
                np.add.at(counts, (yi, codes), w)
                tables.append(np.log((counts + 1.0) / (counts.sum(1, keepdims=True) + thr.size + 1)))
            self.tables_ = tables
        elif self.kernel_density:
            self.data_ = [Xn[yi == c] for c in range(K)]
            self.weights_ = [w[yi == c] / max(w[yi == c].sum(), 1e-12) for c in range(K)]
            self.bw_ = []
            for c in range(K):
                sd = self.data_[c].std(axis=0) if len(self.data_[c]) > 1 else np.ones(Xn.shape[1])
                nc = max(len(self.data_[c]), 1)
                self.bw_.append(np.maximum(1.06 * sd * nc ** -0.2, 1e-3))
        else:
            means, var = [], []
            floor = 1e-9 * max(Xn.var(axis=0).max(), 1.0) if Xn.size else 1e-9
            for c in range(K):
                wcl = w[yi == c]
                xc = Xn[yi == c]
                if wcl.sum() <= 0:
                    means.append(np.zeros(Xn.shape[1]))
                    var.append(np.ones(Xn.shape[1]))
                    continue
                m = np.average(xc, axis=0, weights=wcl)
                v = np.average((xc - m) ** 2, axis=0, weights=wcl)
                means.append(m)
                var.append(v + floor + 1e-6)
            self.theta_, self.var_ = np.array(means), np.array(var)
        return self

    def _joint_log(self, X):
        X = np.asarray(X, dtype=float)
        K = len(self.classes_)
        out = np.tile(self.log_prior_, (len(X), 1))
        if self.ind_.size:
            xi = (X[:, self.ind_] > 0.5).astype(float)
            out += xi @ self.log_p1_.T + (1 - xi) @ self.log_p0_.T
        Xn = X[:, self.num_]
        if not Xn.shape[1]:
            return out
        if self.supervised_discretization:
            for j, thr in enumerate(self.edges_):
                codes = np.searchsorted(thr, Xn[:, j], side="right")
                out += self.tables_[j][:, codes].T
        elif self.kernel_density:
            for c in range(K):
                data, bw, wt = self.data_[c], self.bw_[c], self.weights_[c]
                if len(data) == 0:
                    out[:, c] += -1e3
                    continue
                z = (Xn[:, None, :] - data[None, :, :]) / bw
                logk = -0.5 * z ** 2 - np.log(bw * np.sqrt(2 * np.pi))
                out[:, c] += logsumexp(logk, axis=1, b=wt[None, :, None]).sum(axis=1)
        else:
            ll = -0.5 * (np.log(2 * np.pi * self.var_)[None] +
                         (Xn[:, None, :] - self.theta_[None]) ** 2 / self.var_[None])
            out += ll.sum(axis=2)
        return out

    def predict(self, X):
        return self.classes_[self._joint_log(X).argmax(axis=1)]


class ExhaustiveCodes(ClassifierMixin, BaseEstimator):
    """Multi-class via exhaustive error-correcting output codes: every
    non-trivial two-way split of the classes gets its own binary learner."""

    def __init__(self, estimator=None):
        self.estimator = estimator

    @staticmethod
    def code_matrix(K: int) -> np.ndarray:
        # columns: class-0 bit fixed to 1, all-ones excluded -> 2**(K-1) - 1 splits
        cols = [(1,) + b for b in product((0, 1), repeat=K - 1) if sum(b) < K - 1]
        return np.array(cols).T

    def fit(self, X, y, sample_weight=None):
        self.classes_, yi = np.unique(y, return_inverse=True)
        self.codes_ = self.code_matrix(len(self.classes_))
        self.estimators_ = []
        for col in self.codes_.T:
            target = col[yi]
            est = clone(self.estimator)
            if len(np.unique(target)) < 2:
                est = ZeroR()
            est.fit(X, target, sample_weight=sample_weight)
            self.estimators_.append(est)
        return self

    def predict(self, X):
        votes = np.column_stack([e.predict(X) for e in self.estimators_])
        dist = np.abs(votes[:, None, :] - self.codes_[None, :, :]).sum(axis=2)
        return self.classes_[dist.argmin(axis=1)]


class OneVsRest(ClassifierMixin, BaseEstimator):
    """One binary learner per class; the highest decision score wins.

    Unlike the scikit-learn wrapper this one forwards ``sample_weight``.
    """

    def __init__(self, estimator=None):
        self.estimator = estimator

    def fit(self, X, y, sample_weight=None):
        self.classes_, yi = np.unique(y, return_inverse=True)
        if len(self.classes_) == 2:
            self.estimators_ = [clone(self.estimator).fit(X, yi, sample_weight=sample_weight)]
            return self
        self.estimators_ = []
        for c in range(len(self.classes_)):
            target = (yi == c).astype(int)
            est = ZeroR() if len(np.unique(target)) < 2 else clone(self.estimator)
            self.estimators_.append(est.fit(X, target, sample_weight=sample_weight))
        return self

    def _score(self, est, X):
        if isinstance(est, ZeroR):
            return np.where(est.predict(X) == 1, np.inf, -np.inf)
        return est.decision_function(X)

    def predict(self, X):
        if len(self.estimators_) == 1:
            return self.classes_[(self._score(self.estimators_[0], X) > 0).astype(int)]
        scores = np.column_stack([self._score(e, X) for e in self.estimators_])
        return self.classes_[scores.argmax(axis=1)]


class MajorityVote(ClassifierMixin, BaseEstimator):
    """Hard majority vote; ties go to the earliest member's prediction."""

    def __init__(self, members=()):
        self.members = members

    def fit(self, X, y, sample_weight=None):
        self.classes_ = np.unique(y)
        self.fitted_ = [clone(m).fit(X, y) for m in self.members]
        return self

    def predict(self, X):
        preds = np.column_stack([m.predict(X) for m in self.fitted_])
        out = np.empty(len(X), dtype=preds.dtype)
        for i, row in enumerate(preds):
            vals, counts = np.unique(row, return_counts=True)
            top = vals[counts == counts.max()]
            out[i] = next(v for v in row if v in top)
        return out


# ----------------------------------------------------------------------
# learner descriptions
# ----------------------------------------------------------------------

class Learner:
    """Space + estimator factory + cost model for one algorithm.

    Costs are in clock ticks (see :mod:`psbo.learnzoo.clock`).
    """

    id = "learner"
    anytime = False
    scaled = False          # standardize inputs
    weightable = False      # accepts sample_weight (usable inside boosting)

    def space(self) -> HyperSpace:
        return HyperSpace()

    def n_units(self, params) -> int:
        return 1

    def unit_cost(self, params, n, d, K) -> float:
        """Cost of one unit (anytime) or the whole fit (otherwise)."""
        return 0.0

    def predict_cost(self, params, n_train, n_val, d, K) -> float:
        return 0.02 + 2e-6 * n_val * d

    def estimator(self, params, seed, mask, units=None):
        raise NotImplementedError

    def make(self, params, seed, mask, units=None):
        est = self.estimator(params, seed, mask, units)
        return make_pipeline(StandardScaler(), est) if self.scaled else est

    def total_cost(self, params, n, d, K) -> float:
        return self.unit_cost(params, n, d, K) * self.n_units(params)


def _depth(params):
    return None if params.get("depth_limit", "unlimited") == "unlimited" else int(params["max_depth"])


class ZeroRLearner(Learner):
    id = "zeror"
    weightable = True

    def predict_cost(self, params, n_train, n_val, d, K):
        return 0.0

    def estimator(self, params, seed, mask, units=None):
        return ZeroR()


class KnnLearner(Learner):
    id = "knn"
    scaled = True

    def space(self):
        return HyperSpace([
            numeric("k", 1, 64, 5, log=True, integer=True),
            categorical("weighting", ("uniform", "distance"), "uniform"),
            categorical("metric", ("euclidean", "manhattan"), "euclidean"),
        ])

    def unit_cost(self, params, n, d, K):
        return 0.05 + 1e-5 * n * d

    def predict_cost(self, params, n_train, n_val, d, K):
        return 0.05 + 2e-7 * n_train * n_val * d

    def estimator(self, params, seed, mask, units=None):
        return _FlexKnn(int(params["k"]), params["weighting"], params["metric"])


class _FlexKnn(ClassifierMixin, BaseEstimator):
    """kNN that caps k at the training-set size."""

    def __init__(self, k=5, weighting="uniform", metric="euclidean"):
        self.k, self.weighting, self.metric = k, weighting, metric

    def fit(self, X, y, sample_weight=None):
        self.model_ = KNeighborsClassifier(n_neighbors=min(self.k, len(y)), weights=self.weighting,
                                           metric=self.metric).fit(X, y)
        self.classes_ = self.model_.classes_
        return self

    def predict(self, X):
        return self.model_.predict(X)


class NaiveBayesLearner(Learner):
    id = "naive_bayes"
    weightable = True

    def space(self):
        return HyperSpace([
            categorical("kernel_density", (False, True), False),
            categorical("supervised_discretization", (False, True), False),
        ])

    def unit_cost(self, params, n, d, K):
        if params.get("supervised_discretization"):
            return 0.02 + 2e-5 * n * _log2(n) * d
        return 0.02 + 4e-6 * n * d

    def predict_cost(self, params, n_train, n_val, d, K):
        if params.get("kernel_density"):
            return 0.05 + 2e-7 * n_train * n_val * d
        return 0.05 + 1e-6 * n_val * d * K

    def estimator(self, params, seed, mask, units=None):
        return NaiveBayes(mask, bool(params["kernel_density"]), bool(params["supervised_discretization"]))


class CartLearner(Learner):
    id = "cart"
    weightable = True

    def space(self):
        return HyperSpace([
            categorical("criterion", ("gini", "entropy"), "gini"),
            numeric("min_samples_leaf", 1, 32, 1, log=True, integer=True),
            categorical("depth_limit", ("unlimited", "limited"), "unlimited"),
            numeric("max_depth", 1, 20, 5, integer=True, when=("depth_limit", "limited")),
        ])

    def unit_cost(self, params, n, d, K):
        return 0.03 + 4e-6 * n * _log2(n) * d

    def estimator(self, params, seed, mask, units=None):
        return DecisionTreeClassifier(criterion=params["criterion"],
                                      min_samples_leaf=int(params["min_samples_leaf"]),
                                      max_depth=_depth(params), random_state=seed)


class RandomForestLearner(Learner):
    id = "random_forest"
    anytime = True

    def space(self):
        return HyperSpace([
            numeric("n_trees", 2, 128, 100, log=True, integer=True),
            categorical("max_features", ("sqrt", "log2", "all"), "sqrt"),
            numeric("min_samples_leaf", 1, 32, 1, log=True, integer=True),
            categorical("depth_limit", ("unlimited", "limited"), "unlimited"),
            numeric("max_depth", 1, 20, 8, integer=True, when=("depth_limit", "limited")),
        ])

    def n_units(self, params):
        return int(params["n_trees"])

    def unit_cost(self, params, n, d, K):
        mf = {"sqrt": math.sqrt(d), "log2": max(1.0, math.log2(d + 1)), "all": d}[params["max_features"]]
        return 0.05 + 8e-6 * n * _log2(n) * mf

    def predict_cost(self, params, n_train, n_val, d, K):
        return 0.02 + (0.004 + 5e-6 * n_val) * self.n_units(params)

    def estimator(self, params, seed, mask, units=None):
        mf = None if params["max_features"] == "all" else params["max_features"]
        return RandomForestClassifier(n_estimators=units or self.n_units(params), max_features=mf,
                                      min_samples_leaf=int(params["min_samples_leaf"]),
                                      max_depth=_depth(params), random_state=seed, n_jobs=1)


class SvmLearner(Learner):
    id = "svm"
    scaled = True
    weightable = True

    def space(self):
        return HyperSpace([
            categorical("kernel", ("linear", "rbf", "poly"), "linear"),
            numeric("C", 0.01, 1000.0, 1.0, log=True),
            numeric("gamma", 1e-4, 10.0, 0.1, log=True, when=("kernel", ("rbf", "poly"))),
            numeric("degree", 2, 5, 3, integer=True, when=("kernel", "poly")),
        ])

    def unit_cost(self, params, n, d, K):
        kf = {"linear": 1.0, "rbf": 2.0}.get(params["kernel"], 1.0 + params.get("degree", 3))
        pairs = K * (K - 1) / 2
        return 0.06 + 3e-8 * n * n * d * kf * (1.0 + math.log10(max(params["C"], 1.0))) * pairs

    def predict_cost(self, params, n_train, n_val, d, K):
        return 0.05 + 5e-8 * n_train * n_val * d

    def estimator(self, params, seed, mask, units=None):
        gamma = params.get("gamma", INACTIVE)
        return SVC(kernel=params["kernel"], C=params["C"],
                   gamma="scale" if gamma is INACTIVE else gamma,
                   degree=int(params.get("degree", 3)) if params["kernel"] == "poly" else 3,
                   max_iter=20000, random_state=seed)


class LogisticLearner(Learner):
    id = "logistic"
    scaled = True
    weightable = True

    def space(self):
        return HyperSpace([
            numeric("C", 1e-3, 1e3, 1.0, log=True),
            categorical("multiclass", ("multinomial", "ovr", "exhaustive_ecoc"), "multinomial"),
        ])

    def unit_cost(self, params, n, d, K):
        base = 0.06 + 2e-5 * n * d
        mode = params["multiclass"]
        if K <= 2:
            return base
        if mode == "ovr":
            return base * K
        if mode == "exhaustive_ecoc":
            return base * (2 ** (K - 1) - 1)
        return base * (K - 1)

    def estimator(self, params, seed, mask, units=None):
        lr = LogisticRegression(C=params["C"], max_iter=300)
        mode = params["multiclass"]
        if mode == "ovr":
            return OneVsRest(lr)
        if mode == "exhaustive_ecoc":
            return ExhaustiveCodes(lr)
        return lr


class GradientBoostingLearner(Learner):
    id = "gradient_boosting"
    anytime = True

    def space(self):
        return HyperSpace([
            numeric("n_stages", 5, 300, 100, log=True, integer=True),
            numeric("learning_rate", 0.01, 1.0, 0.1, log=True),
            numeric("max_depth", 1, 8, 3, integer=True),
            numeric("subsample", 0.5, 1.0, 1.0),
        ])

    def n_units(self, params):
        return int(params["n_stages"])

    def unit_cost(self, params, n, d, K):
        trees = 1 if K <= 2 else K
        return trees * (0.03 + 4e-6 * n * _log2(n) * d * params["max_depth"] / 3.0 * params["subsample"])

    def predict_cost(self, params, n_train, n_val, d, K):
        return 0.02 + 2e-6 * n_val * self.n_units(params) * (1 if K <= 2 else K)

    def estimator(self, params, seed, mask, units=None):
        return GradientBoostingClassifier(n_estimators=units or self.n_units(params),
                                          learning_rate=params["learning_rate"],
                                          max_depth=int(params["max_depth"]),
                                          subsample=params["subsample"], random_state=seed)


class MlpLearner(Learner):
    id = "mlp"
    anytime = True
    scaled = True

    def space(self):
        return HyperSpace([
            numeric("hidden", 4, 64, 32, log=True, integer=True),
            numeric("learning_rate", 1e-4, 0.1, 1e-3, log=True),
            numeric("epochs", 10, 200, 100, log=True, integer=True),
            numeric("alpha", 1e-6, 0.1, 1e-4, log=True),
        ])

    def n_units(self, params):
        return int(params["epochs"])

    def unit_cost(self, params, n, d, K):
        h = params["hidden"]
        return 0.01 + 2.5e-7 * n * (d * h + h * K)

    def estimator(self, params, seed, mask, units=None):
        return MLPClassifier(hidden_layer_sizes=(int(params["hidden"]),),
                             learning_rate_init=params["learning_rate"], alpha=params["alpha"],
                             max_iter=units or self.n_units(params), n_iter_no_change=10**6,
                             random_state=seed)


BASE_LEARNERS: dict[str, Learner] = {lr.id: lr for lr in (
    ZeroRLearner(), KnnLearner(), NaiveBayesLearner(), CartLearner(), RandomForestLearner(),
    SvmLearner(), LogisticLearner(), GradientBoostingLearner(), MlpLearner())}


def slot_space(slot: str, choices: tuple[str, ...], default: str) -> HyperSpace:
    """A base-algorithm choice plus every candidate's parameters, each
    conditional on that candidate being chosen."""
    params = [categorical(slot, choices, default)]
    for bid in choices:
        for p in BASE_LEARNERS[bid].space():
            if p.condition is None:
                cond = (slot, (bid,))
            else:
                cond = (f"{slot}.{bid}.{p.condition[0]}", p.condition[1])
            params.append(type(p)(f"{slot}.{bid}.{p.name}", p.kind, p.low, p.high, p.scale,
                                  p.integer, p.choices, p.default, cond))
    return HyperSpace(params)


def slot_params(params, slot: str) -> tuple[str, dict]:
    bid = params[slot]
    prefix = f"{slot}.{bid}."
    inner = {k[len(prefix):]: v for k, v in params.items() if k.startswith(prefix)}
    return bid, inner


class AdaBoostLearner(Learner):
    id = "adaboost"
    anytime = True
    base_choices = ("cart", "logistic")

    def space(self):
        return HyperSpace([numeric("n_rounds", 2, 100, 10, log=True, integer=True)]) + \
            slot_space("base", self.base_choices, "cart")

    def n_units(self, params):
        return int(params["n_rounds"])

    def unit_cost(self, params, n, d, K):
        bid, inner = slot_params(params, "base")
        base = BASE_LEARNERS[bid]
        # each round refits the base and scores it on the training rows
        return base.total_cost(inner, n, d, K) + base.predict_cost(inner, n, n, d, K) + 2e-6 * n

    def predict_cost(self, params, n_train, n_val, d, K):
        bid, inner = slot_params(params, "base")
        return self.n_units(params) * BASE_LEARNERS[bid].predict_cost(inner, n_train, n_val, d, K)

    def estimator(self, params, seed, mask, units=None):
        bid, inner = slot_params(params, "base")
        base = BASE_LEARNERS[bid].make(inner, seed, mask)
        return _Boost(base, units or self.n_units(params), seed)


class _Boost(ClassifierMixin, BaseEstimator):
    """SAMME boosting around a (possibly pipelined) weightable base."""

    def __init__(self, base=None, n_rounds=10, seed=0):
        self.base, self.n_rounds, self.seed = base, n_rounds, seed

    def fit(self, X, y, sample_weight=None):
        base = self.base
        if hasattr(base, "steps"):
            # pipelines cannot route sample_weight through AdaBoost; scale once up front
            scaler = base.steps[0][1]
            self.scaler_ = clone(scaler).fit(X)
            base = clone(base.steps[-1][1])
            X = self.scaler_.transform(X)
        else:
            self.scaler_ = None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            self.model_ = AdaBoostClassifier(estimator=base, n_estimators=self.n_rounds,
                                             random_state=self.seed).fit(X, y)
        self.classes_ = self.model_.classes_
        return self

    def predict(self, X):
        if self.scaler_ is not None:
            X = self.scaler_.transform(X)
        return self.model_.predict(X)

    @property
    def units_done(self) -> int:
        return len(self.model_.estimators_)


class VotingLearner(Learner):
    id = "voting"
    n_slots = 3
    slot_choices = ("knn", "naive_bayes", "cart", "logistic")

    def space(self):
        space = HyperSpace()
        defaults = ("cart", "naive_bayes", "knn")
        for i in range(self.n_slots):
            space = space + slot_space(f"slot{i + 1}", self.slot_choices, defaults[i])
        return space

    def _members(self, params):
        return [slot_params(params, f"slot{i + 1}") for i in range(self.n_slots)]

    def unit_cost(self, params, n, d, K):
        return sum(BASE_LEARNERS[b].total_cost(inner, n, d, K) for b, inner in self._members(params))

    def predict_cost(self, params, n_train, n_val, d, K):
        return sum(BASE_LEARNERS[b].predict_cost(inner, n_train, n_val, d, K)
                   for b, inner in self._members(params))

    def estimator(self, params, seed, mask, units=None):
        members = [BASE_LEARNERS[b].make(inner, seed + i, mask)
                   for i, (b, inner) in enumerate(self._members(params))]
        return MajorityVote(members)


def units_completed(learner: Learner, est, planned: int) -> int:
    """Training units actually present in a fitted estimator."""
    final = est.steps[-1][1] if hasattr(est, "steps") else est
    if isinstance(final, MLPClassifier):
        return int(final.n_iter_)
    if isinstance(final, _Boost):
        return final.units_done
    if isinstance(final, (RandomForestClassifier, GradientBoostingClassifier)):
        return len(final.estimators_)
    return planned


def fit_quietly(est, X, y):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        warnings.simplefilter("ignore", UserWarning)
        warnings.simplefilter("ignore", RuntimeWarning)
        warnings.simplefilter("ignore", FutureWarning)
        return est.fit(X, y)
