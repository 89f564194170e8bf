"""Algorithm registry, validity rules, budgeted training and model files."""

from __future__ import annotations

import base64
import json
import math
import pickle
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.ensemble import GradientBoostingClassifier, RandomForestClassifier
from sklearn.neural_network import MLPClassifier

from ..dataset import Dataset, FeatureMeta, fill_values
from ..hyperspace import (Combination, HyperSpace, ValidityRule, INACTIVE)
from .clock import TICK_UNITS, Clock
from .featsel import fs_space, ATTRIBUTE_EVALUATORS, SUBSET_EVALUATORS
from .learners import (BASE_LEARNERS, AdaBoostLearner, Learner, VotingLearner, _Boost,
                       fit_quietly, units_completed)

MODEL_FORMAT = "psbo-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class AlgorithmEntry:
    id: str
    kind: str  # "base" | "meta" | "ensemble"
    learner: Learner = field(repr=False)
    protected: bool = False
    fs_allowed: bool = True
    family: str = ""
    slots: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("base", "meta", "ensemble"):
            raise ValueError(f"{self.id}: unknown kind {self.kind}")
        if self.kind == "meta" and len(self.slots) != 1:
            raise ValueError(f"{self.id}: meta algorithms wrap exactly one base")
        if self.kind == "ensemble" and len(self.slots) < 2:
            raise ValueError(f"{self.id}: ensembles need at least two bases")

    @property
    def n_b(self) -> int:
        return len(self.slots)

    @cached_property
    def algorithm_space(self) -> HyperSpace:
        return self.learner.space()

    @cached_property
    def space(self) -> HyperSpace:
        """Full search space: algorithm parameters plus the feature-selection block."""
        return self.algorithm_space + fs_space() if self.fs_allowed else self.algorithm_space

    def slot_choices(self, slot: str) -> tuple:
        return self.space[slot].choices

    def restrict(self, allowed_bases: Sequence[str] | None) -> dict:
        if allowed_bases is None or not self.slots:
            return {}
        return {s: tuple(c for c in self.slot_choices(s) if c in allowed_bases) for s in self.slots}

    def applicable(self, allowed_bases: Sequence[str] | None) -> bool:
        return all(r for r in self.restrict(allowed_bases).values())

    def default_combination(self, allowed_bases: Sequence[str] | None = None) -> Combination:
        values = self.space.default()
        restrict = self.restrict(allowed_bases)
        if restrict:
            rng = np.random.default_rng(0)
            for slot, allowed in restrict.items():
                if values[slot] not in allowed and allowed:
                    values[slot] = allowed[0]
            # newly chosen bases start from their own defaults
            for p in self.space:
                if self.space.is_active(p, values) and values.get(p.name) is INACTIVE:
                    values[p.name] = p.default
            values = self.space.resolve(values, rng, restrict)
        return Combination(self.id, values)

    def random_combination(self, rng: np.random.Generator,
                           allowed_bases: Sequence[str] | None = None) -> Combination:
        return Combination(self.id, self.space.sample(rng, self.restrict(allowed_bases)))

    def algorithm_params(self, c: Combination) -> dict:
        return {k: v for k, v in c.values.items()
                if k in self.algorithm_space and v is not INACTIVE}


def registry() -> list[AlgorithmEntry]:
    """The shipped learner zoo; base algorithms first."""
    L = BASE_LEARNERS
    return [
        AlgorithmEntry("zeror", "base", L["zeror"], fs_allowed=False, family="trivial"),
        AlgorithmEntry("knn", "base", L["knn"], family="instance"),
        AlgorithmEntry("naive_bayes", "base", L["naive_bayes"], family="bayes"),
        AlgorithmEntry("cart", "base", L["cart"], family="tree"),
        AlgorithmEntry("random_forest", "base", L["random_forest"], protected=True, family="tree"),
        AlgorithmEntry("svm", "base", L["svm"], protected=True, family="kernel"),
        AlgorithmEntry("logistic", "base", L["logistic"], family="linear"),
        AlgorithmEntry("gradient_boosting", "base", L["gradient_boosting"], family="tree"),
        AlgorithmEntry("mlp", "base", L["mlp"], family="neural"),
        AlgorithmEntry("adaboost", "meta", AdaBoostLearner(), family="boosting", slots=("base",)),
        AlgorithmEntry("voting", "ensemble", VotingLearner(), family="ensemble",
                       slots=tuple(f"slot{i + 1}" for i in range(VotingLearner.n_slots))),
    ]


def registry_by_id(entries: Sequence[AlgorithmEntry] | None = None) -> dict[str, AlgorithmEntry]:
    return {e.id: e for e in (entries if entries is not None else registry())}


def family_of(entry: AlgorithmEntry, c: Combination) -> str:
    """Model family of a concrete combination. Linear-kernel SVMs are linear
    models; a meta algorithm inherits its base's family."""
    if entry.id == "svm":
        return "linear" if c["kernel"] == "linear" else "kernel"
    if entry.kind == "meta":
        base = c[entry.slots[0]]
        return {"cart": "tree", "naive_bayes": "bayes", "logistic": "linear"}.get(base, entry.family)
    return entry.family


def default_rules(entries: Sequence[AlgorithmEntry] | None = None) -> list[ValidityRule]:
    """Value conflicts, feature-count and class-count infeasibility."""
    entries = registry() if entries is None else entries
    rules = [
        ValidityRule("fs-ranker-subset-evaluator", "invalid",
                     "the ranker search is not compatible with a feature subset evaluator",
                     when={"fs.search": "ranker", "fs.evaluator": SUBSET_EVALUATORS}),
        ValidityRule("fs-subset-search-attribute-evaluator", "invalid",
                     "subset search methods need a subset evaluator",
                     when={"fs.search": ("greedy", "best_first"), "fs.evaluator": ATTRIBUTE_EVALUATORS}),
        ValidityRule("fs-pca-many-features", "infeasible",
                     "principal components are too slow with more than 2000 features",
                     when={"fs.evaluator": "pca"}, meta={"p": (">", 2000)}),
    ]
    prefixes: list[tuple[str | None, str, str]] = [("naive_bayes", "", "naive_bayes"),
                                                   ("logistic", "", "logistic")]
    for e in entries:
        for slot in e.slots:
            for bid in e.slot_choices(slot):
                if bid in ("naive_bayes", "logistic"):
                    prefixes.append((e.id, f"{slot}.{bid}.", bid))
    for alg, prefix, bid in prefixes:
        tag = f"{alg}{'/' + prefix.rstrip('.') if prefix else ''}"
        if bid == "naive_bayes":
            rules.append(ValidityRule(
                f"nb-kde-discretization:{tag}", "invalid",
                "naive Bayes cannot use a kernel density estimator and supervised discretization together",
                algorithm=alg, when={f"{prefix}kernel_density": True,
                                     f"{prefix}supervised_discretization": True}))
        else:
            rules.append(ValidityRule(
                f"exhaustive-codes-many-classes:{tag}", "infeasible",
                "exhaustive error-correcting codes grow exponentially with the class count",
                algorithm=alg, when={f"{prefix}multiclass": "exhaustive_ecoc"},
                meta={"n_classes": (">", 10)}))
    return rules


# ----------------------------------------------------------------------
# encoding, training, evaluation
# ----------------------------------------------------------------------

class Encoder:
    """One-hot encodes the selected categorical columns; numeric pass through."""

    def __init__(self, features: Sequence[FeatureMeta], columns: Sequence[int]):
        self.features = list(features)
        self.columns = np.asarray(columns, dtype=int)
        mask, width = [], 0
        for j in self.columns:
            f = self.features[j]
            if f.is_categorical:
                k = max(len(f.levels), 1)
                mask.extend([True] * k)
                width += k
            else:
                mask.append(False)
                width += 1
        self.mask = np.array(mask, dtype=bool)
        self.width = width

    def transform(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros((X.shape[0], self.width))
        pos = 0
        for j in self.columns:
            f = self.features[j]
            if f.is_categorical:
                k = max(len(f.levels), 1)
                codes = X[:, j].astype(int)
                ok = (codes >= 0) & (codes < k)
                out[np.flatnonzero(ok), pos + codes[ok]] = 1.0
                pos += k
            else:
                out[:, pos] = X[:, j]
                pos += 1
        return out


@dataclass
class FittedModel:
    algorithm: str
    combination: Combination
    encoder: Encoder
    estimator: object
    classes: list[str]
    status: str = "complete"
    units: int = 1

    @property
    def columns(self) -> np.ndarray:
        return self.encoder.columns

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Class indices for raw feature rows."""
        return np.asarray(self.estimator.predict(self.encoder.transform(X))).astype(int)

    def predict_labels(self, X: np.ndarray) -> list[str]:
        return [self.classes[i] for i in self.predict(X)]


@dataclass
class TrainOutcome:
    status: str  # "complete" | "partial" | "abort"
    model: FittedModel | None
    elapsed: float
    units: int = 0
    reason: str = ""


def learner_seed(*parts) -> int:
    ss = np.random.SeedSequence([int(p) & 0xFFFFFFFF for p in parts])
    return int(ss.generate_state(1)[0] & 0x7FFFFFFF)


def train_model(entry: AlgorithmEntry, c: Combination, data: Dataset, rows: np.ndarray,
                columns: Sequence[int] | None, budget: float, clock: Clock,
                seed: int = 0) -> TrainOutcome:
    """Train under a time budget.

    Anytime learners return the partial model built so far when the budget
    runs out; other learners abort. Elapsed time never exceeds the budget by
    more than one training unit.
    """
    columns = np.arange(data.p) if columns is None else np.asarray(columns, dtype=int)
    if columns.size == 0:
        raise ValueError("at least one feature is required")
    enc = Encoder(data.features, columns)
    Z = enc.transform(data.X[rows])
    y = data.y[rows]
    learner = entry.learner
    params = entry.algorithm_params(c)
    n, d, K = len(rows), enc.width, data.n_classes
    planned = learner.n_units(params)
    uc = learner.unit_cost(params, n, d, K) * TICK_UNITS

    def wrap(est, status, units):
        return FittedModel(entry.id, c, enc, est, list(data.classes), status, units)

    try:
        if clock.virtual:
            if not learner.anytime:
                if uc > budget:
                    return TrainOutcome("abort", None, float(budget), 0, "budget exhausted")
                est = fit_quietly(learner.make(params, seed, enc.mask), Z, y)
                return TrainOutcome("complete", wrap(est, "complete", 1), uc, 1)
            if uc <= 0 or planned * uc <= budget:
                units = planned
            else:
                units = min(planned, int(math.floor(budget / uc)) + 1)
            est = fit_quietly(learner.make(params, seed, enc.mask, units), Z, y)
            done = units_completed(learner, est, units)
            status = "complete" if units == planned else "partial"
            return TrainOutcome(status, wrap(est, status, done), done * uc, done)
        return _train_wall(learner, params, seed, enc, Z, y, budget, planned, wrap)
    except Exception as exc:  # numeric failures abort the test rather than the search
        return TrainOutcome("abort", None, float(min(budget, uc * planned)) if clock.virtual else 0.0,
                            0, f"failure: {type(exc).__name__}: {exc}")


def _train_wall(learner, params, seed, enc, Z, y, budget, planned, wrap) -> TrainOutcome:
    timer = Clock("wall").start()
    if budget <= 0:
        return TrainOutcome("abort", None, 0.0, 0, "zero budget")
    if not learner.anytime:
        est = fit_quietly(learner.make(params, seed, enc.mask), Z, y)
        elapsed = timer.elapsed()
        if elapsed > budget:
            return TrainOutcome("abort", None, elapsed, 0, "budget exhausted")
        return TrainOutcome("complete", wrap(est, "complete", 1), elapsed, 1)
    est = learner.make(params, seed, enc.mask, units=planned)
    final = est.steps[-1][1] if hasattr(est, "steps") else est
    if isinstance(final, _Boost):
        fit_quietly(est, Z, y)
        elapsed = timer.elapsed()
        done = final.units_done
        if elapsed > budget and done > 1:
            keep = max(1, int(done * budget / elapsed))
            final.model_.estimators_ = final.model_.estimators_[:keep]
            final.model_.estimator_weights_ = final.model_.estimator_weights_[:keep]
            return TrainOutcome("partial", wrap(est, "partial", keep), elapsed, keep)
        return TrainOutcome("complete", wrap(est, "complete", done), elapsed, done)
    if isinstance(final, MLPClassifier):
        final.set_params(warm_start=True, max_iter=1)
    else:
        final.set_params(warm_start=True)
    k = 0
    while k < planned:
        k += 1
        if isinstance(final, (RandomForestClassifier, GradientBoostingClassifier)):
            final.set_params(n_estimators=k)
        fit_quietly(est, Z, y)
        if timer.elapsed() > budget:
            break
    status = "complete" if k == planned else "partial"
    return TrainOutcome(status, wrap(est, status, k), timer.elapsed(), k)


def evaluate_error(model: FittedModel, data: Dataset, rows: np.ndarray) -> float:
    """Misclassification rate on the given rows."""
    rows = np.asarray(rows, dtype=int)
    if rows.size == 0:
        raise ValueError("validation set is empty")
    pred = model.predict(data.X[rows])
    return float(np.mean(pred != data.y[rows]))


def predict_cost(entry: AlgorithmEntry, c: Combination, n_train: int, n_val: int, d: int, K: int) -> float:
    return entry.learner.predict_cost(entry.algorithm_params(c), n_train, n_val, d, K) * TICK_UNITS


# ----------------------------------------------------------------------
# model files
# ----------------------------------------------------------------------

def save_model(model: FittedModel, path, dataset: Dataset) -> None:
    """JSON document: readable header plus a base64 pickle of the estimator."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "algorithm": model.algorithm,
        "combination": model.combination.to_dict(),
        "status": model.status,
        "units": model.units,
        "target": dataset.target,
        "classes": model.classes,
        "features": [{"name": f.name, "kind": f.kind, "levels": list(f.levels), "fill": fill}
                     for f, fill in zip(dataset.features, fill_values(dataset))],
        "selected_features": [dataset.features[j].name for j in model.columns],
        "payload": base64.b64encode(pickle.dumps(
            {"estimator": model.estimator, "columns": model.columns.tolist()})).decode("ascii"),
    }
    Path(path).write_text(json.dumps(doc, indent=1), encoding="utf-8")


class ModelFileError(ValueError):
    pass


def load_model(path) -> tuple[FittedModel, dict]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != MODEL_FORMAT:
        raise ModelFileError("not a psbo model file")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFileError(f"unsupported model version {doc.get('version')} (expected {MODEL_VERSION})")
    payload = pickle.loads(base64.b64decode(doc["payload"]))
    features = [FeatureMeta(f["name"], f["kind"], tuple(f["levels"])) for f in doc["features"]]
    enc = Encoder(features, payload["columns"])
    model = FittedModel(doc["algorithm"], Combination.from_dict(doc["combination"]), enc,
                        payload["estimator"], doc["classes"], doc["status"], doc["units"])
    return model, doc
