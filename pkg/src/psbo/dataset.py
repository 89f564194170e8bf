"""Classification datasets, size classes, and progressive sampling plans.

A :class:`Dataset` stores every feature as a float column: numeric features
hold their values, categorical features hold the integer index of their level.
Missing values (``?`` or empty cells) are imputed at load time, so nothing
downstream ever sees a missing marker.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

MAX_WORKING_SET = 5000
LARGE_PRODUCT = 10**6
ROUND_FRACTIONS = (0.125, 0.25, 0.5, 1.0)
MISSING_TOKENS = {"?", ""}


class DatasetError(ValueError):
    """Raised for malformed or unusable input data."""


@dataclass(frozen=True)
class FeatureMeta:
    name: str
    kind: str  # "numeric" | "categorical"
    levels: tuple[str, ...] = ()

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"


@dataclass
class Dataset:
    """Labelled instances with typed features.

    ``X`` is ``(n, p)`` float; categorical columns carry level indices.
    ``y`` is ``(n,)`` int indexing into ``classes``.
    """

    X: np.ndarray
    y: np.ndarray
    features: list[FeatureMeta]
    classes: list[str]
    target: str = "class"
    name: str = "dataset"

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=int)
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise DatasetError("X must be (n, p) with one label per row")
        if self.X.shape[1] != len(self.features):
            raise DatasetError("feature metadata does not match column count")
        if self.X.shape[0] == 0:
            raise DatasetError("empty dataset")
        if np.isnan(self.X).any():
            raise DatasetError("missing values must be imputed before construction")
        if len(self.classes) < 2 or len(np.unique(self.y)) < 2:
            raise DatasetError("single-class target")
        if self.y.min() < 0 or self.y.max() >= len(self.classes):
            raise DatasetError("label outside the declared class set")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def header(self) -> list[str]:
        return [f.name for f in self.features] + [self.target]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.X[rows], self.y[rows], self.features, self.classes,
                       self.target, self.name)

    def meta(self) -> dict:
        """Metadata visible to validity rules."""
        return {"n": self.n, "p": self.p, "n_classes": self.n_classes}


@dataclass(frozen=True)
class SizeClass:
    tag: str
    product: int


def classify_size(d: Dataset | None = None, *, n: int | None = None,
                  p: int | None = None) -> SizeClass:
    """Small unless ``n * p`` is strictly larger than one million."""
    if d is not None:
        n, p = d.n, d.p
    product = int(n) * int(p)
    return SizeClass("large" if product > LARGE_PRODUCT else "small", product)


# ----------------------------------------------------------------------
# loading
# ----------------------------------------------------------------------

def _build_dataset(header: list[str], rows: list[list[str]], target: str,
                   declared: dict[str, tuple[str, tuple[str, ...]]] | None,
                   name: str, line_numbers: list[int]) -> Dataset:
    if target not in header:
        raise DatasetError(
            f"target column {target!r} not found; available columns: {', '.join(header)}")
    if not rows:
        raise DatasetError("empty dataset")
    t = header.index(target)
    feature_cols = [j for j in range(len(header)) if j != t]

    labels = [r[t].strip() for r in rows]
    for lab, ln in zip(labels, line_numbers):
        if lab in MISSING_TOKENS:
            raise DatasetError(f"line {ln}: missing target value")
    if declared and declared[target][0] == "categorical" and declared[target][1]:
        classes = list(declared[target][1])
        unknown = sorted(set(labels) - set(classes))
        if unknown:
            raise DatasetError(f"target labels {unknown} not in declared class set")
        # keep only classes that occur, preserving declaration order
        classes = [c for c in classes if c in set(labels)]
    else:
        classes = sorted(set(labels), key=_natural_key)
    if len(classes) < 2:
        raise DatasetError("single-class target")
    class_index = {c: i for i, c in enumerate(classes)}
    y = np.array([class_index[lab] for lab in labels], dtype=int)

    features: list[FeatureMeta] = []
    columns: list[np.ndarray] = []
    for j in feature_cols:
        raw = [r[j].strip() for r in rows]
        kind, levels = _infer_kind(raw, declared.get(header[j]) if declared else None)
        if kind == "numeric":
            col = np.full(len(raw), np.nan)
            for i, v in enumerate(raw):
                if v in MISSING_TOKENS:
                    continue
                try:
                    col[i] = float(v)
                except ValueError:
                    raise DatasetError(
                        f"line {line_numbers[i]}: non-numeric value {v!r} "
                        f"in numeric attribute {header[j]!r}") from None
            if np.isnan(col).all():
                col[:] = 0.0
            col[np.isnan(col)] = np.nanmedian(col)
        else:
            lv = {v: i for i, v in enumerate(levels)}
            col = np.full(len(raw), np.nan)
            for i, v in enumerate(raw):
                if v in MISSING_TOKENS:
                    continue
                if v not in lv:
                    raise DatasetError(
                        f"line {line_numbers[i]}: value {v!r} not declared "
                        f"for attribute {header[j]!r}")
                col[i] = lv[v]
            present = col[~np.isnan(col)].astype(int)
            mode = np.bincount(present, minlength=len(levels)).argmax() if present.size else 0
            col[np.isnan(col)] = mode
        features.append(FeatureMeta(header[j], kind, tuple(levels)))
        columns.append(col)
    X = np.column_stack(columns) if columns else np.zeros((len(rows), 0))
    return Dataset(X, y, features, classes, target, name)


def _natural_key(s: str):
    try:
        return (0, float(s), s)
    except ValueError:
        return (1, 0.0, s)


def _infer_kind(raw: list[str], declared):
    if declared is not None:
        kind, levels = declared
        if kind == "categorical" and not levels:
            levels = tuple(sorted({v for v in raw if v not in MISSING_TOKENS}, key=_natural_key))
        return kind, tuple(levels)
    present = [v for v in raw if v not in MISSING_TOKENS]
    try:
        for v in present:
            float(v)
        return "numeric", ()
    except ValueError:
        return "categorical", tuple(sorted(set(present), key=_natural_key))


def _parse_csv(text: str) -> tuple[list[str], list[list[str]], list[int]]:
    reader = csv.reader(io.StringIO(text))
    header = None
    rows, lines = [], []
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        if header is None:
            header = [c.strip() for c in row]
            continue
        if len(row) != len(header):
            raise DatasetError(
                f"line {reader.line_num}: expected {len(header)} fields, got {len(row)}")
        rows.append(row)
        lines.append(reader.line_num)
    if header is None:
        raise DatasetError("empty dataset")
    return header, rows, lines


def _read_csv(text: str, name: str, target: str) -> Dataset:
    header, rows, lines = _parse_csv(text)
    return _build_dataset(header, rows, target, None, name, lines)


_ATTR_RE = re.compile(r"@attribute\s+('([^']*)'|\"([^\"]*)\"|(\S+))\s+(.*)$", re.IGNORECASE)


def _parse_arff(text: str):
    header: list[str] = []
    declared: dict[str, tuple[str, tuple[str, ...]]] = {}
    rows, lines = [], []
    in_data = False
    for ln, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        low = s.lower()
        if not in_data:
            if low.startswith("@relation"):
                continue
            if low.startswith("@attribute"):
                m = _ATTR_RE.match(s)
                if not m:
                    raise DatasetError(f"line {ln}: cannot parse attribute declaration")
                attr = m.group(2) or m.group(3) or m.group(4)
                spec = m.group(5).strip()
                if spec.startswith("{"):
                    if not spec.endswith("}"):
                        raise DatasetError(f"line {ln}: unterminated nominal list")
                    levels = next(csv.reader([spec[1:-1]], skipinitialspace=True))
                    levels = tuple(v.strip().strip("'\"") for v in levels)
                    declared[attr] = ("categorical", levels)
                elif spec.lower() in ("numeric", "real", "integer"):
                    declared[attr] = ("numeric", ())
                else:
                    raise DatasetError(f"line {ln}: unsupported attribute type {spec!r}")
                header.append(attr)
                continue
            if low.startswith("@data"):
                in_data = True
                continue
            raise DatasetError(f"line {ln}: unexpected content before @data")
        row = next(csv.reader([s], skipinitialspace=True))
        row = [v.strip().strip("'\"") for v in row]
        if len(row) != len(header):
            raise DatasetError(f"line {ln}: expected {len(header)} fields, got {len(row)}")
        rows.append(row)
        lines.append(ln)
    if not header:
        raise DatasetError("no @attribute declarations found")
    return header, declared, rows, lines


def _read_arff(text: str, name: str, target: str | None) -> Dataset:
    header, declared, rows, lines = _parse_arff(text)
    if target is None:
        target = header[-1]
    return _build_dataset(header, rows, target, declared, name, lines)


def load_dataset(path, format: str | None = None, target: str | None = None) -> Dataset:
    """Read a CSV (header row, ``?`` = missing) or ARFF-subset file.

    For CSV the target defaults to the last column, as it does for ARFF.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if format is None:
        format = "arff" if path.suffix.lower() == ".arff" else "csv"
    text = path.read_text(encoding="utf-8")
    name = path.stem
    if format == "csv":
        if target is None:
            first = next(csv.reader(io.StringIO(text)), None)
            if not first:
                raise DatasetError("empty dataset")
            target = first[-1].strip()
        return _read_csv(text, name, target)
    if format in ("arff", "arff-subset"):
        return _read_arff(text, name, target)
    raise DatasetError(f"unknown format {format!r}")


def fill_values(d: Dataset) -> list[float]:
    """Per-feature replacement for missing cells at prediction time: the
    median of numeric columns and the most frequent level of categorical ones."""
    out = []
    for j, f in enumerate(d.features):
        col = d.X[:, j]
        if f.is_categorical:
            out.append(float(np.bincount(col.astype(int), minlength=len(f.levels)).argmax()))
        else:
            out.append(float(np.median(col)))
    return out


def load_feature_rows(path, features: Sequence[FeatureMeta], fills: Sequence[float] | None = None,
                      format: str | None = None) -> np.ndarray:
    """Read rows for prediction and encode them against a trained schema.

    Every feature column must be present by name; other columns (such as the
    target) are ignored. Unknown categorical levels and non-numeric values in
    numeric columns are errors. Missing cells take ``fills``.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if format is None:
        format = "arff" if path.suffix.lower() == ".arff" else "csv"
    text = path.read_text(encoding="utf-8")
    if format == "csv":
        header, rows, lines = _parse_csv(text)
    elif format in ("arff", "arff-subset"):
        header, _, rows, lines = _parse_arff(text)
    else:
        raise DatasetError(f"unknown format {format!r}")
    missing = [f.name for f in features if f.name not in header]
    if missing:
        raise DatasetError(f"input is missing feature column(s): {', '.join(missing)}; "
                           f"the model expects: {', '.join(f.name for f in features)}")
    X = np.empty((len(rows), len(features)))
    for j, f in enumerate(features):
        src = header.index(f.name)
        levels = {v: i for i, v in enumerate(f.levels)}
        for i, row in enumerate(rows):
            v = row[src].strip()
            if v in MISSING_TOKENS:
                if fills is None:
                    raise DatasetError(f"line {lines[i]}: missing value in {f.name!r}")
                X[i, j] = fills[j]
            elif f.is_categorical:
                if v not in levels:
                    raise DatasetError(f"line {lines[i]}: level {v!r} of {f.name!r} was not "
                                       f"seen in training (known: {', '.join(f.levels)})")
                X[i, j] = levels[v]
            else:
                try:
                    X[i, j] = float(v)
                except ValueError:
                    raise DatasetError(f"line {lines[i]}: non-numeric value {v!r} in numeric "
                                       f"attribute {f.name!r}") from None
    return X


def dataset_from_arrays(X, y, feature_names: Sequence[str] | None = None,
                        categorical: Sequence[int] = (), class_names=None,
                        name: str = "dataset") -> Dataset:
    """Wrap in-memory arrays; categorical columns must already be level indices."""
    X = np.asarray(X, dtype=float)
    y_raw = np.asarray(y)
    if class_names is None:
        uniq = np.unique(y_raw)
        class_names = [str(c) for c in uniq]
        y_idx = np.searchsorted(uniq, y_raw)
    else:
        y_idx = y_raw.astype(int)
    if feature_names is None:
        feature_names = [f"x{j}" for j in range(X.shape[1])]
    cat = set(categorical)
    features = []
    for j, nm in enumerate(feature_names):
        if j in cat:
            k = int(X[:, j].max()) + 1 if X.shape[0] else 1
            features.append(FeatureMeta(nm, "categorical", tuple(str(i) for i in range(k))))
        else:
            features.append(FeatureMeta(nm, "numeric"))
    return Dataset(X, y_idx, features, list(class_names), "class", name)


# ----------------------------------------------------------------------
# sampling plans
# ----------------------------------------------------------------------

def _largest_remainder(total: int, weights: np.ndarray) -> np.ndarray:
    """Integer apportionment of ``total`` proportional to ``weights``."""
    share = total * weights / weights.sum()
    base = np.floor(share).astype(int)
    rest = total - base.sum()
    if rest > 0:
        order = np.lexsort((np.arange(len(share)), -(share - base)))
        base[order[:rest]] += 1
    return base


def stratified_subsample(y: np.ndarray, pool: np.ndarray, size: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` indices from ``pool`` keeping class proportions of ``pool``."""
    pool = np.asarray(pool, dtype=int)
    if size >= pool.size:
        return np.sort(pool)
    classes, counts = np.unique(y[pool], return_counts=True)
    quotas = _largest_remainder(size, counts.astype(float))
    picked = []
    for c, q in zip(classes, quotas):
        members = pool[y[pool] == c]
        picked.append(rng.choice(members, size=q, replace=False))
    return np.sort(np.concatenate(picked))


def _deal_into_parts(y: np.ndarray, idx: np.ndarray, k: int,
                     rng: np.random.Generator) -> list[np.ndarray]:
    """Stratified split into ``k`` parts whose sizes differ by at most one.

    Classes are dealt round-robin in descending frequency, continuing the part
    pointer across classes.
    """
    classes, counts = np.unique(y[idx], return_counts=True)
    order = np.lexsort((classes, -counts))
    parts: list[list[int]] = [[] for _ in range(k)]
    pointer = 0
    for ci in order:
        members = idx[y[idx] == classes[ci]]
        members = rng.permutation(members)
        for inst in members:
            parts[pointer % k].append(int(inst))
            pointer += 1
    return [np.array(sorted(p), dtype=int) for p in parts]


def _stratified_order(y: np.ndarray, idx: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Permutation of ``idx`` whose every prefix is close to stratified.

    Each instance gets key ``(rank_in_class + u) / class_size`` with ranks taken
    after an in-class shuffle; sorting by key interleaves the classes
    proportionally.
    """
    keys = np.empty(idx.size)
    for c in np.unique(y[idx]):
        pos = np.flatnonzero(y[idx] == c)
        pos = rng.permutation(pos)
        keys[pos] = (np.arange(pos.size) + rng.uniform(0.25, 0.75, size=pos.size)) / pos.size
    return idx[np.argsort(keys, kind="stable")]


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class FoldSpec:
    validation: np.ndarray
    training: np.ndarray  # largest training set, in progressive-sampling order


@dataclass(frozen=True)
class SamplingPlan:
    m: int
    working_set: np.ndarray
    folds: tuple[FoldSpec, ...]
    k: int
    seed: int
    round_fractions: tuple[float, ...] = field(default=ROUND_FRACTIONS)

    def training_sample(self, round: int, fold: int) -> np.ndarray:
        return training_sample(self, round, fold)

    def to_dict(self) -> dict:
        return {
            "m": self.m, "k": self.k, "seed": self.seed,
            "round_fractions": list(self.round_fractions),
            "working_set": self.working_set.tolist(),
            "folds": [{"validation": f.validation.tolist(), "training": f.training.tolist()}
                      for f in self.folds],
        }


def make_sampling_plan(d: Dataset, size: SizeClass | None = None,
                       k_override: int | None = None, seed: int = 0) -> SamplingPlan:
    """Choose the working set, split it into folds, and fix the per-fold
    progressive-sampling order."""
    if size is None:
        size = classify_size(d)
    k = k_override if k_override is not None else (3 if size.tag == "small" else 1)
    if k < 1:
        raise DatasetError("k must be at least 1")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5A3]))
    m = min(MAX_WORKING_SET, d.n)
    working = stratified_subsample(d.y, np.arange(d.n), m, rng)

    n_parts = max(k, 3) if k == 1 else k
    counts = np.bincount(d.y[working], minlength=d.n_classes)
    if (counts[counts > 0] < k).any():
        raise DatasetError("class too small to stratify")
    parts = _deal_into_parts(d.y, working, n_parts, rng)

    folds = []
    if k == 1:
        validation = parts[0]
        training = np.setdiff1d(working, validation)
        folds.append(FoldSpec(validation, _stratified_order(d.y, training, rng)))
    else:
        for i in range(k):
            validation = parts[i]
            training = np.setdiff1d(working, validation)
            folds.append(FoldSpec(validation, _stratified_order(d.y, training, rng)))
    return SamplingPlan(m, working, tuple(folds), k, seed)


def training_sample(plan: SamplingPlan, round: int, fold: int) -> np.ndarray:
    """Nested training sample for ``round`` (1..4) in ``fold`` (1..k)."""
    if round not in (1, 2, 3, 4):
        raise ValueError("round must be in 1..4")
    if not 1 <= fold <= plan.k:
        raise ValueError(f"fold must be in 1..{plan.k}")
    order = plan.folds[fold - 1].training
    size = round_half_up(plan.round_fractions[round - 1] * order.size)
    size = max(1, size)
    return order[:size]


def final_cv_sample(d: Dataset, plan: SamplingPlan, seed: int) -> np.ndarray:
    """Rows for the final cross-validation: everything when n <= 5000,
    otherwise 5000 stratified rows preferring ones the working set never used."""
    if d.n <= MAX_WORKING_SET:
        return np.arange(d.n)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xCF]))
    used = np.zeros(d.n, dtype=bool)
    used[plan.working_set] = True
    counts = np.bincount(d.y, minlength=d.n_classes).astype(float)
    quotas = _largest_remainder(MAX_WORKING_SET, counts)
    picked = []
    shortfall = 0
    for c in range(d.n_classes):
        fresh = rng.permutation(np.flatnonzero((d.y == c) & ~used))
        old = rng.permutation(np.flatnonzero((d.y == c) & used))
        q = quotas[c]
        take_fresh = fresh[:q]
        take_old = old[:q - take_fresh.size]
        shortfall += q - take_fresh.size - take_old.size
        picked.append(take_fresh)
        picked.append(take_old)
    out = np.concatenate(picked)
    if shortfall:
        rest = np.setdiff1d(np.arange(d.n), out)
        unused_rest = rest[~used[rest]]
        extra = np.concatenate([rng.permutation(unused_rest),
                                rng.permutation(rest[used[rest]])])[:shortfall]
        out = np.concatenate([out, extra])
    return np.sort(out)
