"""Benchmark harness: the search against an equal-budget random search and
against single-technique ablations.

Every cell of the benchmark is one (method, dataset, seed) triple. A cell
splits the dataset into a stratified training part and a held-out test part,
runs its method on the training part under the virtual clock, and scores the
returned model on the test part. Each cell writes its trace and a small JSON
summary; :func:`load_cells` rebuilds the summaries from those files alone, so
the aggregate table never depends on in-memory state.

Methods
-------
``psbo``
    The full five-round search.
``random``
    Pure random search: uniform algorithm choice, uniform combination,
    h-fold cross validation on the whole training part with the fixed
    per-test budgets, until the ``psbo`` cell of the same dataset and seed
    has spent its cost. The best cross-validated combination is retrained on
    the whole training part.
``no-tN``
    The search with technique N switched off.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .config import TECHNIQUES, SearchConfig
from .dataset import (Dataset, FeatureMeta, _deal_into_parts, dataset_from_arrays,
                      stratified_subsample)
from .engine.search import SearchState, run_search, train_final_model
from .engine.trace import Trace, read_trace
from .hyperspace import Combination, check_validity
from .learnzoo import evaluate_error, family_of
from .learnzoo.registry import AlgorithmEntry

TEST_FRACTION = 0.3
BASELINE_ROUND = 0


# ----------------------------------------------------------------------
# benchmark datasets
# ----------------------------------------------------------------------

def _categorical_dataset(X, y, names, levels, classes, name) -> Dataset:
    feats = [FeatureMeta(nm, "categorical", tuple(lv)) for nm, lv in zip(names, levels)]
    return Dataset(np.asarray(X, dtype=float), np.asarray(y, dtype=int), feats,
                   list(classes), "class", name)


def car_like(n: int = 500, seed: int = 0) -> Dataset:
    """Six ordinal attributes rated by a two-level rule hierarchy.

    Price comes from the buying and maintenance levels, comfort from doors,
    seats and boot size; the class combines price, comfort and safety. Cars
    seating two or rated unsafe are never acceptable. The rule is noise free.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xCA7]))
    names = ["buying", "maint", "doors", "persons", "lug_boot", "safety"]
    levels = [("vhigh", "high", "med", "low"), ("vhigh", "high", "med", "low"),
              ("2", "3", "4", "5more"), ("2", "4", "more"), ("small", "med", "big"),
              ("low", "med", "high")]
    X = np.column_stack([rng.integers(len(lv), size=n) for lv in levels])
    b, m, d, p, lug, s = X.T
    price = b + m                              # 0 (expensive) .. 6 (cheap)
    comfort = (d >= 2).astype(int) + (p == 2) + lug  # 0 .. 4
    score = price + comfort + 2 * s
    y = np.select([(p == 0) | (s == 0) | (score < 7), score < 10, score < 12], [0, 1, 2], 3)
    return _categorical_dataset(X, y, names, levels, ("unacc", "acc", "good", "vgood"), "car_like")


def credit_like(n: int = 600, seed: int = 0) -> Dataset:
    """Mixed numeric and categorical applicant records with a noisy
    good/bad label driven by a handful of the attributes."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC4ED]))
    duration = rng.gamma(3.0, 7.0, n).round()
    amount = np.exp(rng.normal(7.8, 0.8, n)).round()
    age = rng.integers(19, 75, n).astype(float)
    rate = rng.integers(1, 5, n).astype(float)
    dependents = rng.integers(1, 3, n).astype(float)
    checking = rng.choice(4, n, p=[0.27, 0.27, 0.06, 0.40])
    history = rng.choice(5, n, p=[0.04, 0.05, 0.53, 0.09, 0.29])
    purpose = rng.integers(0, 6, n)
    savings = rng.choice(4, n, p=[0.6, 0.1, 0.1, 0.2])
    employment = rng.integers(0, 5, n)
    housing = rng.choice(3, n, p=[0.18, 0.71, 0.11])
    job = rng.integers(0, 4, n)
    logit = (0.9 - 0.035 * duration - 0.00008 * amount + 0.012 * (age - 35)
             + np.array([-0.9, -0.4, 0.3, 1.1])[checking]
             + np.array([-1.0, -0.8, 0.0, 0.2, 0.7])[history]
             + np.array([-0.3, 0.1, 0.4, 0.6])[savings] - 0.15 * (rate - 2.5))
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-logit))).astype(int)
    X = np.column_stack([duration, amount, age, rate, dependents, checking, history, purpose,
                         savings, employment, housing, job])
    names = ["duration", "amount", "age", "installment_rate", "dependents", "checking",
             "history", "purpose", "savings", "employment", "housing", "job"]
    return dataset_from_arrays(X, np.where(y == 1, "good", "bad"), names,
                               categorical=range(5, 12), name="credit_like")


def planted_tree(n: int = 600, seed: int = 0, noise: float = 0.05,
                 n_informative: int = 2, n_noise: int = 6) -> tuple[Dataset, float]:
    """Labels from an axis-aligned depth-2 tree, flipped with probability ``noise``.

    The tree splits on ``x0`` at 0.5 and then on ``x1`` at 0.3 (left) or 0.7
    (right), so its four leaves form a checkerboard-like pattern no linear or
    distance-based model captures exactly. The remaining features are
    uniform noise.

    Returns
    -------
    data : Dataset
    bayes_error : float
        Error of the planted tree itself, which is ``noise`` for binary labels.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x7EE]))
    X = rng.random((n, n_informative + n_noise))
    left = X[:, 0] < 0.5
    clean = np.where(left, X[:, 1] < 0.3, X[:, 1] >= 0.7).astype(int)
    flip = rng.random(n) < noise
    y = np.where(flip, 1 - clean, clean)
    names = [f"x{j}" for j in range(X.shape[1])]
    return dataset_from_arrays(X, y, names, name="planted_tree"), noise


def _sklearn_dataset(loader: Callable, name: str) -> Dataset:
    bunch = loader()
    return dataset_from_arrays(bunch.data, bunch.target, list(bunch.feature_names),
                               class_names=[str(c) for c in bunch.target_names], name=name)


def wine() -> Dataset:
    from sklearn.datasets import load_wine
    return _sklearn_dataset(load_wine, "wine")


def breast_cancer() -> Dataset:
    from sklearn.datasets import load_breast_cancer
    return _sklearn_dataset(load_breast_cancer, "breast_cancer")


BENCH_DATASETS: dict[str, Callable[[], Dataset]] = {
    "car_like": car_like,
    "credit_like": credit_like,
    "wine": wine,
    "breast_cancer": breast_cancer,
    "planted_tree": lambda: planted_tree()[0],
}

DEFAULT_DATASETS = ("car_like", "credit_like", "breast_cancer")


def get_dataset(name: str) -> Dataset:
    try:
        return BENCH_DATASETS[name]()
    except KeyError:
        raise KeyError(f"unknown benchmark dataset {name!r}; known: {sorted(BENCH_DATASETS)}") from None


def holdout_split(data: Dataset, seed: int, test_fraction: float = TEST_FRACTION
                  ) -> tuple[Dataset, Dataset]:
    """Stratified train/test split; the same seed always gives the same split."""
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x7E57]))
    test = stratified_subsample(data.y, np.arange(data.n), int(round(test_fraction * data.n)), rng)
    train = np.setdiff1d(np.arange(data.n), test)
    return data.subset(train), data.subset(test)


# ----------------------------------------------------------------------
# random-search baseline
# ----------------------------------------------------------------------

@dataclass
class BaselineReport:
    champion: dict
    model: object = field(repr=False)
    total_distinct: int = 0
    search_cost: float = 0.0
    budget: float = 0.0
    evaluations: int = 0


def random_search(cfg: SearchConfig, data: Dataset, budget: float,
                  entries: Sequence[AlgorithmEntry] | None = None,
                  trace: Trace | None = None) -> BaselineReport:
    """Equal-budget random search over the same algorithms and spaces.

    Each draw picks an algorithm uniformly, then a uniform combination of its
    full space. Rule-rejected draws are skipped without cost. Every other draw
    gets h-fold cross validation on all rows with the fixed per-test budgets,
    and degenerate feature selections fall back to all features or to ZeroR.
    The search ends at ``budget``; an evaluation that would cross it is
    interrupted and its result discarded, like a run killed by a time limit.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    # the plain evaluation path: no degenerate-selection cache, no penalties
    base = cfg.replace(technique_off=sorted(set(cfg.technique_off) | {5, 6, 7}))
    state = SearchState(base, data, entries, trace)
    rng = state.rng(0xBA5E)
    rows = np.arange(data.n)
    h = cfg.h if cfg.h is not None else (cfg.h_large if state.large else cfg.h_small)
    parts = [p for p in _deal_into_parts(data.y, rows, min(h, data.n), state.rng(0xBA5E, 1))
             if p.size]
    ids = list(state.order)
    best: tuple[float, Combination] | None = None
    skips = evaluations = 0
    seen: set = set()
    while state.cost < budget and skips < cfg.max_skips:
        entry = state.entries[ids[int(rng.integers(len(ids)))]]
        c = entry.random_combination(rng)
        pid = state.emit_proposal(entry, c, BASELINE_ROUND, "random")
        verdict = check_validity(c, state.meta, state.rules)
        if not verdict.ok:
            skips += 1
            state.trace.emit("skip", round=BASELINE_ROUND, algorithm=entry.id, proposal=pid,
                             combination=c.to_dict(), status="rule-skip", raw=1.0, adjusted=1.0,
                             provenance="rule-injected", reason=verdict.reason,
                             rule=verdict.rule_id)
            continue
        skips = 0
        errors, fs_t, tr_t, va_t, statuses = [], 0.0, 0.0, 0.0, []
        for i, val in enumerate(parts, 1):
            train = np.setdiff1d(rows, val)
            seed = state.rng(0xBA5E, 2, i, c.stable_hash()).integers(2**31)
            fo = state.test_fold(entry, c, train, val, cfg.fixed_fs_budget,
                                 cfg.fixed_train_budget, int(seed), ("baseline", i))
            errors.append(fo.error)
            statuses.append(fo.status)
            fs_t, tr_t, va_t = fs_t + fo.fs_time, tr_t + fo.train_time, va_t + fo.validate_time
        spent = fs_t + tr_t + va_t
        if state.cost + spent > budget:
            # the time limit interrupts this evaluation: its result is lost
            state.cost = budget
            state.trace.emit("eval", round=BASELINE_ROUND, algorithm=entry.id, proposal=pid,
                             source="random", combination=c.to_dict(), status="train-timeout",
                             raw=1.0, adjusted=1.0, fold_errors=[], fs_time=0.0,
                             train_time=0.0, validate_time=0.0, provenance="tested",
                             reason="search budget reached", interrupted=True, cost=state.cost)
            break
        state.charge(spent)
        state.distinct[entry.id].add(c.key)
        seen.add((entry.id, c.key))
        evaluations += 1
        raw = float(np.mean(errors))
        status = next((s for s in ("fs-timeout", "train-timeout", "partial-model")
                       if s in statuses), "complete")
        state.trace.emit("eval", round=BASELINE_ROUND, algorithm=entry.id, proposal=pid,
                         source="random", combination=c.to_dict(), status=status, raw=raw,
                         adjusted=raw, fold_errors=errors, fs_time=fs_t, train_time=tr_t,
                         validate_time=va_t, provenance="tested", reason="", cost=state.cost)
        if best is None or raw < best[0]:
            best = (raw, c)
    if best is None:
        entry = state.entries[ids[0]]
        best = (1.0, entry.default_combination())
    raw, c = best
    model = train_final_model(state, c)
    entry = state.entries[c.algorithm]
    state.trace.emit("champion", round=BASELINE_ROUND, algorithm=c.algorithm,
                     combination=c.to_dict(), raw=raw, prev_estimate=raw, truncated=False,
                     cost=state.cost)
    state.trace.close()
    champion = {"algorithm": c.algorithm, "kind": entry.kind, "family": family_of(entry, c),
                "combination": c.to_dict(), "cv_error": raw,
                "uses_feature_selection": c.uses_fs, "model_status": model.status}
    return BaselineReport(champion, model, len(seen), state.cost, budget, evaluations)


# ----------------------------------------------------------------------
# cells
# ----------------------------------------------------------------------

def parse_method(method: str) -> list[int] | None:
    """Techniques switched off by an ablation name, or None for non-ablations."""
    if method in ("psbo", "random"):
        return []
    if method.startswith("no-t"):
        try:
            t = int(method[4:])
        except ValueError:
            t = -1
        if t in TECHNIQUES:
            return [t]
    raise ValueError(f"unknown method {method!r}; use psbo, random or no-t1 .. no-t8")


@dataclass
class CellResult:
    method: str
    dataset: str
    seed: int
    test_error: float
    search_cost: float
    distinct: int
    champion: str
    family: str
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _cell_name(method: str, dataset: str, seed: int) -> str:
    return f"{method}__{dataset}__{seed}"


def summarize_trace(records: Iterable[dict]) -> dict:
    """Search cost and distinct-combination count, from trace records only."""
    cost, keys = 0.0, set()
    for r in records:
        if r["kind"] in ("eval", "final-cv") and not r.get("interrupted"):
            keys.add((r["algorithm"], json.dumps(r["combination"], sort_keys=True)))
        if r["kind"] == "champion":
            cost = r["cost"]
    return {"search_cost": cost, "distinct": len(keys)}


def run_cell(method: str, dataset: Dataset, seed: int, cfg: SearchConfig | None = None,
             budget: float | None = None, out_dir: Path | None = None) -> CellResult:
    """Run one (method, dataset, seed) cell; ``budget`` is required for ``random``."""
    cfg = (cfg or SearchConfig()).replace(seed=seed, clock="virtual")
    off = parse_method(method)
    train, test = holdout_split(dataset, seed)
    trace_path = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        trace_path = out_dir / f"{_cell_name(method, dataset.name, seed)}.trace.jsonl"
    trace = Trace(trace_path)
    t0 = time.perf_counter()
    if method == "random":
        if budget is None:
            raise ValueError("the random baseline needs the budget of a psbo cell")
        rep = random_search(cfg, train, budget, trace=trace)
        champion, model = rep.champion, rep.model
    else:
        cfg = cfg.replace(technique_off=sorted(set(cfg.technique_off) | set(off)))
        rep = run_search(cfg, train, trace=trace)
        champion, model = rep.champion, rep.model
    seconds = time.perf_counter() - t0
    err = evaluate_error(model, test, np.arange(test.n))
    summary = summarize_trace(trace.records)
    cell = CellResult(method, dataset.name, seed, float(err), float(summary["search_cost"]),
                      int(summary["distinct"]), champion["algorithm"], champion["family"],
                      round(seconds, 3))
    if out_dir is not None:
        info = {"method": method, "dataset": dataset.name, "seed": seed,
                "test_error": cell.test_error, "champion": cell.champion, "family": cell.family,
                "seconds": cell.seconds, "trace": trace_path.name}
        (out_dir / f"{_cell_name(method, dataset.name, seed)}.json").write_text(
            json.dumps(info, indent=1, sort_keys=True))
    return cell


def load_cells(out_dir) -> list[CellResult]:
    """Rebuild cell results from the per-cell JSON files and their traces."""
    cells = []
    for path in sorted(Path(out_dir).glob("*__*__*.json")):
        info = json.loads(path.read_text())
        summary = summarize_trace(read_trace(Path(out_dir) / info["trace"]))
        cells.append(CellResult(info["method"], info["dataset"], int(info["seed"]),
                                float(info["test_error"]), float(summary["search_cost"]),
                                int(summary["distinct"]), info["champion"], info["family"],
                                float(info.get("seconds", 0.0))))
    return cells


def run_bench(datasets: Sequence[Dataset], seeds: Sequence[int], methods: Sequence[str],
              cfg: SearchConfig | None = None, out_dir=None,
              progress: Callable[[CellResult], None] | None = None) -> list[CellResult]:
    """Run every cell. A ``psbo`` cell always runs before the ``random`` cell
    of the same dataset and seed, because it fixes the baseline's budget."""
    for m in methods:
        parse_method(m)
    ordered = sorted(dict.fromkeys(methods), key=lambda m: (m != "psbo", m == "random"))
    cells = []
    for data in datasets:
        for seed in seeds:
            psbo_cost = None
            for m in ordered:
                if m == "random" and psbo_cost is None:
                    ref = run_cell("psbo", data, seed, cfg, out_dir=out_dir)
                    psbo_cost = ref.search_cost
                cell = run_cell(m, data, seed, cfg, budget=psbo_cost, out_dir=out_dir)
                if m == "psbo":
                    psbo_cost = cell.search_cost
                cells.append(cell)
                if progress is not None:
                    progress(cell)
    return cells


# ----------------------------------------------------------------------
# aggregation and rendering
# ----------------------------------------------------------------------

def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0


def aggregate(cells: Sequence[CellResult]) -> list[dict]:
    """Mean and sample standard deviation over seeds, per (method, dataset).

    A group with a single run reports a standard deviation of 0 and sets
    ``single_run``.
    """
    groups: dict[tuple[str, str], list[CellResult]] = {}
    for c in cells:
        groups.setdefault((c.method, c.dataset), []).append(c)
    rows = []
    for (method, dataset), group in groups.items():
        row = {"method": method, "dataset": dataset, "runs": len(group),
               "single_run": len(group) == 1}
        for metric in ("test_error", "search_cost", "distinct"):
            mean, std = _mean_std([getattr(c, metric) for c in group])
            row[f"{metric}_mean"], row[f"{metric}_std"] = mean, std
        rows.append(row)
    return rows


SUMMARY_COLUMNS = ("method", "dataset", "runs", "single_run", "test_error_mean", "test_error_std",
                   "search_cost_mean", "search_cost_std", "distinct_mean", "distinct_std")


def to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r[k] for k in SUMMARY_COLUMNS})
    return buf.getvalue()


def render_table(rows: Sequence[dict]) -> str:
    """Plain-text table; each cell reads ``mean ± std``."""
    head = ["dataset", "method", "test error", "search cost", "distinct tested", "runs"]
    body = []
    for r in rows:
        flag = " (single run)" if r["single_run"] else ""
        body.append([r["dataset"], r["method"],
                     f"{r['test_error_mean']:.4f} ± {r['test_error_std']:.4f}",
                     f"{r['search_cost_mean']:.1f} ± {r['search_cost_std']:.1f}",
                     f"{r['distinct_mean']:.1f} ± {r['distinct_std']:.1f}",
                     f"{r['runs']}{flag}"])
    widths = [max(len(str(x)) for x in col) for col in zip(head, *body)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*row) for row in body]
    return "\n".join(lines)


def write_summary(rows: Sequence[dict], out_dir) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"json": out_dir / "summary.json", "csv": out_dir / "summary.csv",
             "table": out_dir / "summary.txt"}
    note = ("baseline: equal-virtual-budget random search over the same algorithms and "
            "spaces, cross validated on the whole training part")
    paths["json"].write_text(json.dumps({"note": note, "rows": list(rows)}, indent=1,
                                        sort_keys=True))
    paths["csv"].write_text(to_csv(rows))
    paths["table"].write_text(render_table(rows) + "\n\n" + note + "\n")
    return paths
