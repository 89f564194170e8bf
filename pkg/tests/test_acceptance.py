"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The lines are printed as the tests run (visible with ``-s``) and collected
into the terminal summary by ``conftest.py``. Criteria 8 and 9 share their
``psbo`` runs and take most of the suite's time.
"""

import json
import time

import numpy as np
import pytest

from psbo import SearchConfig, run_search
from psbo.bench import (aggregate, breast_cancer, car_like, credit_like, holdout_split,
                        load_cells, planted_tree, run_bench, run_cell)
from psbo.dataset import ROUND_FRACTIONS, classify_size
from psbo.engine import (Contender, Trace, apply_penalties, champion_index, rough_estimate_idw,
                         select_for_retest)
from psbo.learnzoo import evaluate_error

from conftest import FAST_ALGORITHMS
from oracles import (clip_ratio, idw_oracle, random_retest_table, random_tournament,
                     retest_oracle, tournament_oracle)
from tracecheck import cache_violations, rule_violations

VERDICTS = []
SEEDS = [0, 1, 2, 3, 4]


def verdict(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS.append(line)
    print(line)
    assert ok, line


# --- 1. schedule -----------------------------------------------------------------------------

def test_c01_schedule_exactness(fast_report):
    t0 = time.perf_counter()
    starts = fast_report.state.trace.of_kind("round-start")[:4]
    sched = [s["schedule"] for s in starts]
    got = {"tau": [s["tau"] for s in sched], "budget": [s["train_budget"] for s in sched],
           "cycles": [s["cycles"] for s in sched], "fraction": [s["fraction"] for s in sched],
           "keep": [s["keep"] for s in sched]}
    want = {"tau": [0.5, 0.4, 0.32, 0.256], "budget": [10, 15, 22.5, 33.75],
            "cycles": [None, 3, 2, 1], "fraction": [0.125, 0.25, 0.5, 1.0],
            "keep": [0.4, 0.7, 0.7, 0.7]}
    assert list(ROUND_FRACTIONS) == want["fraction"]
    verdict(1, got == want and len(starts) == 4, f"recorded {got}")
    assert time.perf_counter() - t0 < 60


# --- 2-4. oracles ------------------------------------------------------------------------------

def test_c02_idw_oracle():
    rng = np.random.default_rng(20)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        k = int(rng.integers(1, 11))
        dists = [int(d) for d in rng.integers(0, 8, k)]
        ratios = [clip_ratio(float(rng.uniform(0, 1)), float(rng.uniform(0, 1)))
                  for _ in range(k)]
        prev = float(rng.choice([rng.uniform(), 1.0, 0.0, rng.uniform(0.5, 1.0)]))
        worst = max(worst, abs(rough_estimate_idw(prev, dists, ratios)
                               - idw_oracle(prev, dists, ratios)))
    elapsed = time.perf_counter() - t0
    verdict(2, worst <= 1e-12 and elapsed < 1.0,
            f"1000 instances, max |diff| {worst:.1e}, {elapsed:.2f}s")


def test_c03_retest_oracle():
    rng = np.random.default_rng(30)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(500):
        errors, vectors = random_retest_table(rng)
        got = select_for_retest(list(zip(range(len(errors)), errors)),
                                lambda i, j: sum(a != b for a, b in zip(vectors[i], vectors[j])),
                                10, 2)
        mismatches += got != retest_oracle(errors, vectors, 10, 2)
    elapsed = time.perf_counter() - t0
    verdict(3, mismatches == 0 and elapsed < 10,
            f"500 tables, {mismatches} mismatches, {elapsed:.2f}s")


def test_c04_tournament_oracle():
    rng = np.random.default_rng(40)
    t0 = time.perf_counter()
    mismatches = full_ties = 0
    for _ in range(500):
        folds, prev, times = random_tournament(rng)
        cs = [Contender(i, tuple(f), p, t) for i, (f, p, t) in enumerate(zip(folds, prev, times))]
        mismatches += champion_index(cs) != tournament_oracle(folds, prev, times)
        full_ties += len(set(prev)) == 1 and len(set(times)) == 1 and len(cs) > 1
    elapsed = time.perf_counter() - t0
    verdict(4, mismatches == 0 and full_ties > 0 and elapsed < 10,
            f"500 tables ({full_ties} full-tie chains), {mismatches} mismatches, {elapsed:.2f}s")


# --- 5. cache and rules ---------------------------------------------------------------------

def test_c05_cache_and_rule_soundness(fast_report, toy_data):
    records = fast_report.state.trace.records
    entries = fast_report.cache_entries
    bad_cache = cache_violations(records)
    bad_rules = rule_violations(records, toy_data.meta())
    rule_skips = sum(r.get("status") == "rule-skip" for r in records)
    ok = entries >= 5 and not bad_cache and not bad_rules
    verdict(5, ok, f"{entries} cache entries, {len(bad_cache)} cached re-executions, "
                   f"{len(bad_rules)} rule-rejected executions ({rule_skips} rule skips)")


# --- 6. size boundary ---------------------------------------------------------------------

def test_c06_size_boundary():
    a, b = classify_size(n=5000, p=200).tag, classify_size(n=5001, p=200).tag
    verdict(6, (a, b) == ("small", "large"), f"(5000, 200) -> {a}, (5001, 200) -> {b}")


# --- 7. planted optimum ---------------------------------------------------------------------

def test_c07_planted_tree_recovery():
    t0 = time.perf_counter()
    rows = []
    for seed in SEEDS:
        data, bayes = planted_tree(seed=seed)
        train, test = holdout_split(data, seed)
        rep = run_search(SearchConfig(seed=seed), train)
        err = float(evaluate_error(rep.model, test, np.arange(test.n)))
        rows.append((seed, rep.champion["family"], rep.champion["algorithm"], err, bayes))
    elapsed = time.perf_counter() - t0
    hits = sum(fam == "tree" for _, fam, _, _, _ in rows)
    close = all(err <= bayes + 0.05 for *_, err, bayes in rows)
    detail = "; ".join(f"s{s} {alg}/{fam} err {err:.3f}" for s, fam, alg, err, _ in rows)
    verdict(7, hits >= 4 and close and elapsed < 600,
            f"tree family in {hits}/5, {detail}, {elapsed:.0f}s")


# --- 8 and 9. benchmarks ------------------------------------------------------------------

BENCH = {"car_like": car_like, "credit_like": credit_like, "breast_cancer": breast_cancer}


@pytest.fixture(scope="module")
def bench_rows(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    t0 = time.perf_counter()
    run_bench([make() for make in BENCH.values()], SEEDS, ["psbo", "random", "no-t2"],
              out_dir=out)
    cells = load_cells(out)  # every number below is recomputed from the written traces
    return cells, aggregate(cells), time.perf_counter() - t0


def _row(rows, method, dataset):
    return next(r for r in rows if r["method"] == method and r["dataset"] == dataset)


def test_c08_beats_random_search(bench_rows):
    cells, rows, elapsed = bench_rows
    wins, more_distinct, parts = 0, 0, []
    for name in BENCH:
        p, r = _row(rows, "psbo", name), _row(rows, "random", name)
        assert p["runs"] == r["runs"] == len(SEEDS)
        wins += p["test_error_mean"] <= r["test_error_mean"]
        more_distinct += p["distinct_mean"] > r["distinct_mean"]
        parts.append(f"{name}: error {p['test_error_mean']:.4f} vs {r['test_error_mean']:.4f}, "
                     f"distinct {p['distinct_mean']:.0f} vs {r['distinct_mean']:.0f}")
    ok = wins >= 2 and more_distinct == len(BENCH) and elapsed < 3600
    verdict(8, ok, f"lower or equal error on {wins}/3, more distinct on {more_distinct}/3; "
                   + "; ".join(parts) + f"; {elapsed:.0f}s")


def test_c09_ablation_directions(bench_rows, small_data):
    cells, rows, _ = bench_rows
    parts, ok = [], True
    # technique 3: one seed per dataset. The run is capped a little above the
    # psbo cost; reaching the cap already proves the full run costs more.
    for name, make in BENCH.items():
        psbo_cost = next(c.search_cost for c in cells
                         if c.method == "psbo" and c.dataset == name and c.seed == 0)
        cap = 1.2 * psbo_cost
        cell = run_cell("no-t3", make(), 0, SearchConfig(budget=cap))
        higher = cell.search_cost > psbo_cost
        ok &= higher
        parts.append(f"no-t3 {name} cost {'>=' if cell.search_cost >= cap else '='} "
                     f"{cell.search_cost:.0f} vs {psbo_cost:.0f}")
    # technique 2: every dataset, means over the seeds
    err_on, err_off = [], []
    for name in BENCH:
        p, q = _row(rows, "psbo", name), _row(rows, "no-t2", name)
        ok &= q["search_cost_mean"] < p["search_cost_mean"]
        err_on.append(p["test_error_mean"])
        err_off.append(q["test_error_mean"])
        parts.append(f"no-t2 {name} cost {q['search_cost_mean']:.0f} vs "
                     f"{p['search_cost_mean']:.0f}, error {q['test_error_mean']:.4f} vs "
                     f"{p['test_error_mean']:.4f}")
    ok &= np.mean(err_off) >= np.mean(err_on)
    # technique 8: rules ignored, a rejected combination gets executed
    trace = Trace()
    run_search(SearchConfig(seed=3, algorithms=FAST_ALGORITHMS, technique_off=[8]), small_data,
               trace=trace)
    executed = len(rule_violations(trace.records, small_data.meta()))
    ok &= executed > 0
    parts.append(f"no-t8 executed {executed} rule-rejected combinations")
    verdict(9, bool(ok), "; ".join(parts))


# --- 10. determinism -----------------------------------------------------------------------

def test_c10_determinism(tmp_path, toy_data):
    outs = []
    for run in ("a", "b"):
        path = tmp_path / f"{run}.jsonl"
        rep = run_search(SearchConfig(seed=11, algorithms=FAST_ALGORITHMS), toy_data,
                         trace=Trace(path))
        outs.append((path.read_bytes(), rep.to_json().encode()))
    (ta, ra), (tb, rb) = outs
    same = ta == tb and ra == rb
    n = len(ta.splitlines())
    verdict(10, same and n > 0, f"{n} trace lines and reports byte-identical: {same}")
    assert json.loads(ra)["champion"]


# --- 11. penalties --------------------------------------------------------------------------

def test_c11_penalty_arithmetic():
    got = (apply_penalties(0.20, True), apply_penalties(0.20, False, 1),
           apply_penalties(0.20, True, 3))
    verdict(11, got == (0.22, 0.204, 0.2332), f"0.20 -> {got}")
