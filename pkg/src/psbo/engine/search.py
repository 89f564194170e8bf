"""The five-round progressive-sampling search.

Round 1 screens every applicable algorithm on the smallest training samples.
Rounds 2-4 retest a spread-out subset of the previous round's combinations on
a doubled sample, rescale the rest by inverse-distance weighting, run a few
surrogate-guided proposal cycles and prune the algorithm pool. Round 5 cross
validates the best combinations of the survivors and retrains the winner on
the whole dataset.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ..config import SearchConfig
from ..dataset import (Dataset, SamplingPlan, _deal_into_parts, classify_size,
                       final_cv_sample, make_sampling_plan, training_sample)
from ..hyperspace import Combination, check_validity
from ..learnzoo import (Clock, FittedModel, default_rules, evaluate_error, family_of,
                        registry, run_feature_selection, train_model)
from ..learnzoo.registry import AlgorithmEntry, learner_seed, predict_cost
from ..surrogate import DataPoint, DuplicateIndex, SurrogateForest, propose
from .caches import FsCache, cache_gate
from .retest import (apply_penalties, compute_ratio, rough_estimate_idw, rough_estimate_mean,
                     select_for_retest, select_lowest)
from .schedule import N_ROUNDS, RoundSchedule, build_schedule
from .tournament import Contender, rank_contenders
from .trace import Trace

INF = float("inf")


class BudgetExhausted(Exception):
    pass


@dataclass
class FoldOutcome:
    status: str
    error: float
    fs_time: float = 0.0
    train_time: float = 0.0
    validate_time: float = 0.0
    n_features: int | None = None
    reason: str = ""

    @property
    def time(self) -> float:
        return self.fs_time + self.train_time + self.validate_time


@dataclass
class EvalResult:
    """Outcome of testing one combination in one round (all folds)."""
    combination: Combination
    raw: float
    adjusted: float
    status: str
    fold_errors: tuple[float, ...]
    fs_time: float
    train_time: float
    validate_time: float
    round: int
    reason: str = ""

    @property
    def time(self) -> float:
        return self.fs_time + self.train_time + self.validate_time


@dataclass
class Estimate:
    """Latest error estimate of a combination within the current round."""
    combination: Combination
    raw: float
    adjusted: float
    provenance: str
    round: int


@dataclass
class SearchReport:
    champion: dict
    model: FittedModel | None = field(repr=False)
    survivors: dict
    distinct_tested: dict
    total_distinct: int
    search_cost: float
    truncated: bool
    final_cv: list
    cache_entries: int
    config: dict
    overrides: dict
    dataset: dict
    state: object = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"champion": self.champion, "survivors": self.survivors,
                "distinct_tested": self.distinct_tested, "total_distinct": self.total_distinct,
                "search_cost": self.search_cost, "truncated": self.truncated,
                "final_cv": self.final_cv, "cache_entries": self.cache_entries,
                "config": self.config, "overrides": self.overrides, "dataset": self.dataset}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def keep_count(keep: float, n: int) -> int:
    """Survivors allowed by a keep fraction: ceil(keep * n), guarding against
    products like 0.7 * 10 landing a hair above the integer."""
    return int(math.ceil(round(keep * n, 9)))


def prune(errors: dict[str, float], tau: float, keep: float, floor: int,
          protected: Iterable[str] = (), best: float | None = None) -> list[str]:
    """Algorithms that survive a pruning step, best first.

    Algorithms whose lowest error is at least ``best + tau`` drop out; of the
    rest only ``ceil(keep * count)`` stay. Then the best-ranked removed ones
    return until ``floor`` is met, and every protected algorithm returns.
    Ties rank by the insertion order of ``errors``.
    """
    ranked = sorted(errors, key=lambda a: errors[a])  # stable on insertion order
    if best is None:
        best = min(errors.values()) if errors else 0.0
    promising = [a for a in ranked if errors[a] < best + tau]
    kept = promising[:keep_count(keep, len(promising))]
    for a in ranked:
        if len(kept) >= floor:
            break
        if a not in kept:
            kept.append(a)
    kept += [a for a in ranked if a in set(protected) and a not in kept]
    return [a for a in ranked if a in kept]


class SearchState:
    """Everything the rounds share: data, plan, caches, estimates and trace."""

    def __init__(self, cfg: SearchConfig, data: Dataset,
                 entries: Sequence[AlgorithmEntry] | None = None, trace: Trace | None = None):
        self.cfg = cfg
        self.data = data
        all_entries = list(entries) if entries is not None else registry()
        if cfg.algorithms is not None:
            all_entries = [e for e in all_entries if e.id in cfg.algorithms]
        if not all_entries:
            raise ValueError("no algorithms to search")
        self.entries = {e.id: e for e in all_entries}
        self.order = [e.id for e in all_entries]
        self.size = classify_size(data)
        self.large = self.size.tag == "large"
        k = cfg.k if cfg.k is not None else (1 if not cfg.on(2) else None)
        self.plan: SamplingPlan = make_sampling_plan(data, self.size, k_override=k, seed=cfg.seed)
        self.schedule = build_schedule(cfg, self.large)
        self.clock = Clock(cfg.clock)
        self.rules = default_rules(all_entries) if cfg.on(8) else []
        self.all_rules = default_rules(all_entries)
        self.meta = data.meta()
        self.cache = FsCache()
        self.trace = trace if trace is not None else Trace()
        self.cost = 0.0
        self.truncated = False
        self.survivors: list[str] = list(self.order)
        self.allowed_bases: tuple[str, ...] | None = None
        self.estimates: dict[str, dict[str, Estimate]] = {a: {} for a in self.order}
        self.seen: dict[str, DuplicateIndex] = {}
        self.distinct: dict[str, set] = {a: set() for a in self.order}
        self.survivor_log: dict[str, list[str]] = {}
        self._fs_memo: dict = {}
        self._proposal_seq = 0
        self._zeror = next((e for e in registry() if e.id == "zeror"))
        self.cat_mask = np.array([f.is_categorical for f in data.features], dtype=bool)

    # --- helpers --------------------------------------------------------
    def rng(self, *parts) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.cfg.seed, *parts]))

    def alg_index(self, alg: str) -> int:
        return self.order.index(alg)

    def adjust(self, entry: AlgorithmEntry, c: Combination, raw: float) -> float:
        return apply_penalties(raw, c.uses_fs and self.cfg.on(6),
                               entry.n_b if self.cfg.on(7) else 0,
                               self.cfg.fs_penalty, self.cfg.nb_penalty)

    def charge(self, amount: float):
        self.cost += amount

    def check_budget(self):
        if self.cfg.budget is not None and self.cost >= self.cfg.budget:
            raise BudgetExhausted()

    def next_proposal_id(self) -> int:
        self._proposal_seq += 1
        return self._proposal_seq

    def record(self, alg: str, c: Combination, raw: float, adjusted: float,
               provenance: str, rnd: int):
        self.estimates[alg][c.key] = Estimate(c, raw, adjusted, provenance, rnd)

    def min_error(self, alg: str) -> float:
        table = self.estimates[alg]
        return min((e.raw for e in table.values()), default=1.0)

    # --- testing --------------------------------------------------------
    def test_fold(self, entry: AlgorithmEntry, c: Combination, train: np.ndarray,
                  val: np.ndarray, fs_budget: float, train_budget: float,
                  seed: int, memo_key) -> FoldOutcome:
        """Feature selection, training and validation on one split."""
        data, clock = self.data, self.clock
        out = FoldOutcome("complete", 1.0)
        columns = None
        block = c.fs_block
        use_zeror = False
        if block is not None:
            fkey = (json.dumps(sorted((k, str(v)) for k, v in block.items())), memo_key, fs_budget)
            fs = self._fs_memo.get(fkey) if clock.virtual else None
            if fs is None:
                fs = run_feature_selection(block, data.X[train], data.y[train], self.cat_mask,
                                           fs_budget, clock)
                if clock.virtual:
                    self._fs_memo[fkey] = fs
            out.fs_time = fs.elapsed
            if fs.status == "timeout":
                out.status, out.reason = "fs-timeout", fs.reason or "feature selection timed out"
                return out
            if fs.degenerate:
                if self.cfg.on(5):
                    out.status = "degenerate-fs"
                    out.reason = f"{fs.status} features selected"
                    return out
                if fs.status == "none":
                    use_zeror = True
                    columns = np.arange(data.p)
            else:
                columns = fs.subset
            out.n_features = int(len(columns)) if columns is not None else data.p
        model_entry, model_c = (self._zeror, Combination("zeror", {})) if use_zeror else (entry, c)
        res = train_model(model_entry, model_c, data, train, columns, train_budget, clock, seed)
        out.train_time = res.elapsed
        if res.status == "abort":
            out.status, out.reason = "train-timeout", res.reason
            return out
        timer = clock.start()
        err = evaluate_error(res.model, data, val)
        width = res.model.encoder.width
        out.validate_time = timer.elapsed(
            predict_cost(model_entry, model_c, len(train), len(val), width, data.n_classes))
        out.error = err
        out.status = "partial-model" if res.status == "partial" else "complete"
        return out

    def evaluate(self, entry: AlgorithmEntry, c: Combination, sched: RoundSchedule) -> EvalResult:
        """Test ``c`` on every fold of the round; the round error is the fold mean."""
        self.check_budget()
        errors, statuses = [], []
        fs_t = tr_t = va_t = 0.0
        reason = ""
        for f in range(1, self.plan.k + 1):
            train = training_sample(self.plan, sched.round, f)
            val = self.plan.folds[f - 1].validation
            seed = learner_seed(self.cfg.seed, sched.round, f, c.stable_hash())
            fo = self.test_fold(entry, c, train, val, sched.fs_budget, sched.train_budget,
                                seed, (sched.round, f))
            fs_t, tr_t, va_t = fs_t + fo.fs_time, tr_t + fo.train_time, va_t + fo.validate_time
            statuses.append(fo.status)
            errors.append(fo.error)
            reason = reason or fo.reason
            if fo.status in ("fs-timeout", "degenerate-fs"):
                break
        self.charge(fs_t + tr_t + va_t)
        self.distinct[entry.id].add(c.key)
        for s in ("fs-timeout", "degenerate-fs", "train-timeout", "partial-model"):
            if s in statuses:
                status = s
                break
        else:
            status = "complete"
        raw = 1.0 if status in ("fs-timeout", "degenerate-fs") else float(np.mean(errors))
        if status in ("fs-timeout", "degenerate-fs"):
            cause = "timeout" if status == "fs-timeout" else (
                "none-selected" if reason.startswith("none") else "all-selected")
            if status == "fs-timeout" or self.cfg.on(5):
                entry_added = self.cache.add(c.fs_block, cause, sched.round, entry.id)
                if entry_added is not None:
                    self.trace.emit("inject", round=sched.round, algorithm=entry.id,
                                    what="cache-entry", cache=entry_added.to_dict())
        return EvalResult(c, raw, self.adjust(entry, c, raw), status, tuple(errors),
                          fs_t, tr_t, va_t, sched.round, reason)

    def gate(self, entry: AlgorithmEntry, c: Combination, rnd: int, proposal: int) -> str | None:
        """Rule and cache checks before a test; records the skip if one applies."""
        verdict = check_validity(c, self.meta, self.rules)
        status = None
        if not verdict.ok:
            status, why, prov = "rule-skip", f"{verdict.status}: {verdict.reason}", "rule-injected"
            extra = {"rule": verdict.rule_id}
        else:
            hit = cache_gate(c, self.cache)
            if hit is not None:
                status, why, prov = "cache-skip", f"feature selection cached ({hit.cause})", "cache-injected"
                extra = {}
        if status is None:
            return None
        self.record(entry.id, c, 1.0, 1.0, prov, rnd)
        self.trace.emit("skip", round=rnd, algorithm=entry.id, proposal=proposal,
                        combination=c.to_dict(), status=status, raw=1.0, adjusted=1.0,
                        provenance=prov, reason=why, **extra)
        return status

    def emit_eval(self, entry: AlgorithmEntry, res: EvalResult, proposal: int, purpose: str):
        self.trace.emit("eval", round=res.round, algorithm=entry.id, proposal=proposal,
                        source=purpose, combination=res.combination.to_dict(),
                        status=res.status, raw=res.raw, adjusted=res.adjusted,
                        fold_errors=list(res.fold_errors), fs_time=res.fs_time,
                        train_time=res.train_time, validate_time=res.validate_time,
                        provenance="tested", reason=res.reason, cost=self.cost)

    def emit_proposal(self, entry: AlgorithmEntry, c: Combination, rnd: int, kind: str) -> int:
        pid = self.next_proposal_id()
        self.trace.emit("propose", round=rnd, algorithm=entry.id, proposal=pid,
                        source=kind, combination=c.to_dict())
        return pid

    def try_combination(self, entry: AlgorithmEntry, c: Combination, sched: RoundSchedule,
                        kind: str) -> tuple[str, EvalResult | None]:
        """Propose, gate, test and record one combination."""
        pid = self.emit_proposal(entry, c, sched.round, kind)
        self.seen[entry.id].add(c)
        skip = self.gate(entry, c, sched.round, pid)
        if skip is not None:
            return skip, None
        res = self.evaluate(entry, c, sched)
        self.record(entry.id, c, res.raw, res.adjusted, "tested", sched.round)
        self.emit_eval(entry, res, pid, kind)
        return res.status, res


def trial_loop(state: SearchState, entry: AlgorithmEntry, q: int, cap: int,
               source: Callable[[], tuple[Combination, str] | None],
               sched: RoundSchedule) -> list[EvalResult]:
    """Test proposals until ``q`` successes or ``cap`` trials.

    Degenerate feature selections are trials but not successes (with
    technique 5 on). Rule and cache skips are neither; ``max_skips``
    consecutive skips, or an exhausted proposal source, end the loop.
    """
    results: list[EvalResult] = []
    successes = trials = skips = 0
    while successes < q and trials < cap:
        nxt = source()
        if nxt is None:
            break
        c, kind = nxt
        status, res = state.try_combination(entry, c, sched, kind)
        if res is None:
            skips += 1
            if skips >= state.cfg.max_skips:
                break
            continue
        skips = 0
        trials += 1
        results.append(res)
        if not (status == "degenerate-fs" and state.cfg.on(5)):
            successes += 1
    return results


def _round_one_source(state: SearchState, entry: AlgorithmEntry, n_random: int):
    """Default combination first, then random ones, skipping repeats."""
    rng = state.rng(1, state.alg_index(entry.id), 0xA1)
    first = [True]

    def source():
        if first[0]:
            first[0] = False
            return entry.default_combination(state.allowed_bases if entry.slots else None), "default"
        for _ in range(state.cfg.max_skips):
            c = entry.random_combination(rng, state.allowed_bases if entry.slots else None)
            if not state.seen[entry.id].contains(c):
                return c, "random"
        return None  # the space is exhausted
    return source


def _screen(state: SearchState, ids: Sequence[str], sched: RoundSchedule):
    cfg = state.cfg
    q = 1 + cfg.n_random_first
    for alg in ids:
        entry = state.entries[alg]
        state.seen[alg] = DuplicateIndex(entry.space, [])
        trial_loop(state, entry, q, cfg.trial_cap_first,
                   _round_one_source(state, entry, cfg.n_random_first), sched)
        flagged = _flag_unpromising(state, alg, sched.tau)
        state.trace.emit("prune", round=1, algorithm=alg, what="combinations",
                         unpromising=flagged, min_error=state.min_error(alg))


def _flag_unpromising(state: SearchState, alg: str, tau: float) -> int:
    table = state.estimates[alg]
    best = state.min_error(alg)
    return sum(1 for e in table.values() if e.raw >= best + tau)


def round_one(state: SearchState) -> None:
    """Screen base algorithms, prune them, then screen meta/ensemble
    algorithms over the surviving bases and prune again."""
    sched = state.schedule[0]
    cfg = state.cfg
    _round_start(state, sched)
    n_a = len(state.order)
    floor_total = min(n_a, cfg.min_survivors)
    bases = [a for a in state.order if state.entries[a].kind == "base"]
    metas = [a for a in state.order if state.entries[a].kind != "base"]
    protected = [a for a in state.order if state.entries[a].protected]

    _screen(state, bases, sched)
    errors = {a: state.min_error(a) for a in bases}
    kept_bases = prune(errors, sched.tau, sched.keep, min(len(bases), cfg.min_survivors),
                       protected) if bases else []
    _emit_prune(state, 1, "base", errors, kept_bases)
    state.allowed_bases = tuple(a for a in state.order if a in kept_bases)

    applicable = [a for a in metas if state.entries[a].applicable(state.allowed_bases)]
    for a in metas:
        if a not in applicable:
            state.trace.emit("prune", round=1, algorithm=a, what="inapplicable",
                             reason="no surviving base algorithm fits its slots")
    _screen(state, applicable, sched)
    kept_meta: list[str] = []
    if applicable:
        merrors = {a: state.min_error(a) for a in applicable}
        best = min([*errors.values(), *merrors.values()])
        floor = max(0, floor_total - len(kept_bases))
        kept_meta = prune(merrors, sched.tau, sched.keep, floor, protected, best=best)
        _emit_prune(state, 1, "meta", merrors, kept_meta)
    state.survivors = [a for a in state.order if a in kept_bases or a in kept_meta]
    state.survivor_log["1"] = list(state.survivors)
    if cfg.on(5):
        inject_cache_points(state)


def inject_cache_points(state: SearchState) -> int:
    """For each cached feature-selection block and each surviving algorithm
    that allows feature selection, add one (block + random algorithm values,
    1.0) point to that algorithm's surrogate data."""
    count = 0
    for i, cached in enumerate(state.cache):
        for alg in state.survivors:
            entry = state.entries[alg]
            if not entry.fs_allowed:
                continue
            rng = state.rng(1, 0xC1, i, state.alg_index(alg))
            base = entry.random_combination(rng, state.allowed_bases if entry.slots else None)
            values = {k: v for k, v in base.values.items() if not k.startswith("fs.")}
            values.update(cached.block)
            c = Combination(alg, values)
            state.record(alg, c, 1.0, 1.0, "cache-injected", 1)
            state.trace.emit("inject", round=1, algorithm=alg, what="surrogate-point",
                             combination=c.to_dict(), raw=1.0, adjusted=1.0,
                             provenance="cache-injected", cache=cached.to_dict())
            count += 1
    return count


def _emit_prune(state: SearchState, rnd: int, group: str, errors: dict, kept: list[str]):
    state.trace.emit("prune", round=rnd, what="algorithms", group=group,
                     errors={a: errors[a] for a in errors}, kept=list(kept),
                     removed=[a for a in errors if a not in kept])


def _round_start(state: SearchState, sched: RoundSchedule):
    state.trace.emit("round-start", round=sched.round, schedule=sched.to_dict(),
                     survivors=list(state.survivors), k=state.plan.k,
                     size=state.size.tag, cost=state.cost)


def rescale_estimates(state: SearchState, entry: AlgorithmEntry, sched: RoundSchedule
                      ) -> list[Combination]:
    """Steps 1 and 2 of an intermediate round: retest a selection of the
    previous round's combinations and rescale the others by their ratios."""
    cfg = state.cfg
    alg = entry.id
    prev = dict(state.estimates[alg])
    candidates = [(e.combination, e.raw) for e in prev.values()]
    if cfg.on(1):
        selected = select_for_retest(candidates, lambda a, b: entry.space.distance(a.values, b.values),
                                     cfg.n_c, cfg.t_d)
    else:
        selected = select_lowest(candidates, cfg.n_c)
    ratios: list[tuple[Combination, float]] = []
    for c in selected:
        status, res = state.try_combination(entry, c, sched, "retest")
        e2 = res.raw if res is not None else 1.0
        ratios.append((c, compute_ratio(prev[c.key].raw, e2, cfg.ratio_low, cfg.ratio_high)))
    if not ratios:
        return selected
    chosen = {c.key for c in selected}
    for key, est in prev.items():
        if key in chosen or est.raw >= 1.0:
            continue
        if cfg.on(1):
            dists = [entry.space.distance(est.combination.values, c.values) for c, _ in ratios]
            raw = rough_estimate_idw(est.raw, dists, [r for _, r in ratios])
        else:
            raw = rough_estimate_mean(est.raw, [r for _, r in ratios])
        state.record(alg, est.combination, raw, state.adjust(entry, est.combination, raw),
                     "rough-idw", sched.round)
    return selected


def bo_cycles(state: SearchState, entry: AlgorithmEntry, sched: RoundSchedule):
    """Step 3: refit the surrogate and test proposals, ``sched.cycles`` times."""
    cfg = state.cfg
    alg = entry.id
    restrict = entry.restrict(state.allowed_bases) if entry.slots else None
    for cycle in range(sched.cycles):
        table = state.estimates[alg]
        points = [DataPoint(e.combination, e.adjusted, e.provenance) for e in table.values()]
        rng = state.rng(sched.round, state.alg_index(alg), cycle, 0xB0)
        if points:
            forest = SurrogateForest(entry.space, alg, n_trees=cfg.n_trees,
                                     seed=learner_seed(cfg.seed, sched.round, cycle,
                                                       state.alg_index(alg)))
            forest.fit(points)
            ranked = sorted((e for e in table.values() if e.raw < 1.0), key=lambda e: e.adjusted)
            incumbents = [e.combination for e in ranked]
        else:
            forest, incumbents = None, []
        queue: deque = deque()

        def source():
            if not queue:
                if forest is None:
                    queue.extend((entry.random_combination(rng, state.allowed_bases if entry.slots
                                                           else None), "random")
                                 for _ in range(cfg.proposals))
                else:
                    queue.extend(propose(forest, incumbents, rng, cfg.proposals,
                                         evaluated=state.seen[alg].combos, restrict=restrict))
            return queue.popleft()

        trial_loop(state, entry, cfg.proposals, cfg.proposals + cfg.trial_extra, source, sched)


def intermediate_round(state: SearchState, rnd: int) -> None:
    sched = state.schedule[rnd - 1]
    cfg = state.cfg
    _round_start(state, sched)
    for alg in state.survivors:
        entry = state.entries[alg]
        state.seen[alg] = DuplicateIndex(entry.space, [])
        rescale_estimates(state, entry, sched)
        bo_cycles(state, entry, sched)
    errors = {a: state.min_error(a) for a in state.survivors}
    protected = [a for a in state.survivors if state.entries[a].protected] if rnd <= 2 else []
    kept = prune(errors, sched.tau, sched.keep, min(len(state.survivors), cfg.min_survivors),
                 protected)
    _emit_prune(state, rnd, "pooled", errors, kept)
    state.survivors = [a for a in state.order if a in kept]
    state.survivor_log[str(rnd)] = list(state.survivors)


@dataclass
class FinalSelection:
    algorithm: str
    combination: Combination
    prev_estimate: float
    contenders: list = field(default_factory=list)
    cv_error: float | None = None


def _final_candidates(state: SearchState) -> list[Estimate]:
    out = []
    for alg in state.survivors:
        ranked = sorted((e for e in state.estimates[alg].values() if e.raw < 1.0),
                        key=lambda e: e.raw)
        out.extend(ranked[: state.cfg.final_top])
    if not out:  # nothing below 100%: fall back to the best-known estimates
        pool = [e for alg in state.survivors for e in state.estimates[alg].values()]
        pool.sort(key=lambda e: e.raw)
        out = pool[:1]
    if not out:
        alg = state.survivors[0] if state.survivors else state.order[0]
        entry = state.entries[alg]
        c = entry.default_combination(state.allowed_bases if entry.slots else None)
        out = [Estimate(c, 1.0, 1.0, "tested", 4)]
    return out


def final_round(state: SearchState) -> FinalSelection:
    sched = state.schedule[N_ROUNDS - 1]
    cfg = state.cfg
    _round_start(state, sched)
    cands = _final_candidates(state)
    if not cfg.on(4):
        best = min(cands, key=lambda e: e.raw)
        return FinalSelection(best.combination.algorithm, best.combination, best.raw)
    h = cfg.h if cfg.h is not None else (cfg.h_large if state.large else cfg.h_small)
    rows = final_cv_sample(state.data, state.plan, cfg.seed)
    h = min(h, len(rows))
    parts = _deal_into_parts(state.data.y, rows, h, state.rng(5, 0xF0))
    contenders = []
    for est in cands:
        c = est.combination
        entry = state.entries[c.algorithm]
        fold_errors, total = [], 0.0
        statuses = []
        for i, val in enumerate(parts, 1):
            if val.size == 0:
                continue
            train = np.setdiff1d(rows, val)
            seed = learner_seed(cfg.seed, 5, i, c.stable_hash())
            fo = state.test_fold(entry, c, train, val, sched.fs_budget, sched.train_budget,
                                 seed, (5, i))
            fold_errors.append(fo.error)
            statuses.append(fo.status)
            total += fo.time
        state.charge(total)
        state.distinct[entry.id].add(c.key)
        contenders.append(Contender((c.algorithm, c.key), tuple(fold_errors), est.raw, total))
        state.trace.emit("final-cv", round=5, algorithm=c.algorithm, combination=c.to_dict(),
                         fold_errors=fold_errors, statuses=statuses, prev_estimate=est.raw,
                         time=total, raw=contenders[-1].mean_error, provenance="tested")
    order = rank_contenders(contenders)
    win = cands[order[0]]
    return FinalSelection(win.combination.algorithm, win.combination, win.raw,
                          contenders=[contenders[i] for i in order],
                          cv_error=contenders[order[0]].mean_error)


def train_final_model(state: SearchState, c: Combination) -> FittedModel:
    """Retrain the champion on every row without a time limit."""
    data = state.data
    entry = state.entries[c.algorithm]
    rows = np.arange(data.n)
    columns = None
    if c.fs_block is not None:
        fs = run_feature_selection(c.fs_block, data.X, data.y, state.cat_mask, INF, state.clock)
        if fs.status == "selected":
            columns = fs.subset
    seed = learner_seed(state.cfg.seed, 6, 0, c.stable_hash())
    res = train_model(entry, c, data, rows, columns, INF, state.clock, seed)
    if res.model is None:
        res = train_model(state._zeror, Combination("zeror", {}), data, rows, None, INF,
                          state.clock, seed)
    return res.model


def _fallback_selection(state: SearchState) -> FinalSelection:
    pool = [e for alg in state.order for e in state.estimates[alg].values()]
    if pool:
        best = min(pool, key=lambda e: e.raw)
        return FinalSelection(best.combination.algorithm, best.combination, best.raw)
    entry = state.entries[state.order[0]]
    return FinalSelection(entry.id, entry.default_combination(), 1.0)


def run_search(cfg: SearchConfig, data: Dataset, entries: Sequence[AlgorithmEntry] | None = None,
               trace: Trace | None = None) -> SearchReport:
    """Run all five rounds and retrain the champion on the whole dataset."""
    cfg.validate()
    state = SearchState(cfg, data, entries, trace)
    try:
        round_one(state)
        for rnd in (2, 3, 4):
            intermediate_round(state, rnd)
        selection = final_round(state)
    except BudgetExhausted:
        state.truncated = True
        selection = _fallback_selection(state)
    model = train_final_model(state, selection.combination)
    entry = state.entries[selection.algorithm]
    champion = {
        "algorithm": selection.algorithm,
        "kind": entry.kind,
        "family": family_of(entry, selection.combination),
        "combination": selection.combination.to_dict(),
        "prev_estimate": selection.prev_estimate,
        "cv_error": selection.cv_error,
        "uses_feature_selection": selection.combination.uses_fs,
        "selected_features": [data.features[j].name for j in model.columns],
        "model_status": model.status,
    }
    state.trace.emit("champion", round=5, algorithm=selection.algorithm,
                     combination=selection.combination.to_dict(), raw=selection.cv_error,
                     prev_estimate=selection.prev_estimate, truncated=state.truncated,
                     cost=state.cost)
    state.trace.close()
    report = SearchReport(
        champion=champion, model=model, survivors=dict(state.survivor_log),
        distinct_tested={a: len(s) for a, s in state.distinct.items()},
        total_distinct=sum(len(s) for s in state.distinct.values()),
        search_cost=state.cost, truncated=state.truncated,
        final_cv=[{"algorithm": ct.label[0], "fold_errors": list(ct.fold_errors),
                   "mean": ct.mean_error, "prev_estimate": ct.prev_estimate, "time": ct.time}
                  for ct in selection.contenders],
        cache_entries=len(state.cache), config=cfg.to_dict(), overrides=cfg.overrides(),
        dataset={"name": data.name, "n": data.n, "p": data.p, "classes": list(data.classes),
                 "size": state.size.tag, "k": state.plan.k},
        state=state)
    return report
