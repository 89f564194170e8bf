import json

import numpy as np
import pytest

from psbo import SearchConfig
from psbo.bench import (BENCH_DATASETS, CellResult, aggregate, car_like, credit_like, get_dataset,
                        holdout_split, load_cells, parse_method, planted_tree, random_search,
                        render_table, run_bench, summarize_trace, to_csv, write_summary)
from psbo.engine import Trace
from psbo.learnzoo import default_rules

CHEAP = SearchConfig(algorithms=["zeror", "naive_bayes", "cart"])


def test_generated_datasets():
    car = car_like()
    assert (car.n, car.p, car.n_classes) == (500, 6, 4)
    assert all(f.is_categorical for f in car.features)
    credit = credit_like()
    assert (credit.n, credit.p, credit.n_classes) == (600, 12, 2)
    assert sum(f.is_categorical for f in credit.features) == 7
    assert np.array_equal(car_like().X, car.X)


def test_planted_tree_noise_is_the_bayes_error():
    data, noise = planted_tree(n=4000, seed=1, noise=0.05)
    x0, x1 = data.X[:, 0], data.X[:, 1]
    rule = np.where(x0 < 0.5, x1 < 0.3, x1 >= 0.7).astype(int)
    flipped = np.mean(rule != data.y)
    assert noise == 0.05
    assert abs(flipped - noise) < 3 * np.sqrt(noise * (1 - noise) / 4000)


def test_get_dataset():
    assert set(BENCH_DATASETS) >= {"car_like", "credit_like", "breast_cancer", "wine"}
    with pytest.raises(KeyError, match="known"):
        get_dataset("yeast")


def test_holdout_split_is_stratified_and_seeded():
    data = credit_like()
    train, test = holdout_split(data, 3)
    assert train.n + test.n == data.n and test.n == 180
    assert abs(test.y.mean() - data.y.mean()) < 1 / test.n + 1e-9
    again = holdout_split(data, 3)[1]
    assert np.array_equal(again.X, test.X)
    assert not np.array_equal(holdout_split(data, 4)[1].X, test.X)


@pytest.mark.parametrize("name, off", [("psbo", []), ("random", []), ("no-t3", [3]), ("no-t8", [8])])
def test_parse_method(name, off):
    assert parse_method(name) == off


@pytest.mark.parametrize("name", ["no-t9", "grid", "no-tx"])
def test_parse_method_rejects(name):
    with pytest.raises(ValueError, match="unknown method"):
        parse_method(name)


def test_random_search_stops_at_the_budget(small_data):
    trace = Trace()
    rep = random_search(CHEAP, small_data, budget=200.0, trace=trace)
    assert rep.search_cost <= 200.0
    evals = trace.of_kind("eval")
    done = [r for r in evals if not r.get("interrupted")]
    assert rep.evaluations == len(done)
    assert sum(r["fs_time"] + r["train_time"] + r["validate_time"] for r in done) <= 200.0 + 1e-9
    if evals[-1].get("interrupted"):
        assert rep.search_cost == 200.0
    assert trace.records[-1]["kind"] == "champion"
    assert summarize_trace(trace.records)["distinct"] == rep.total_distinct


def test_random_search_skips_rule_rejected_draws(small_data):
    trace = Trace()
    cfg = SearchConfig(algorithms=["naive_bayes"])
    random_search(cfg, small_data, budget=150.0, trace=trace)
    from psbo.hyperspace import Combination, check_validity
    for r in trace.of_kind("eval"):
        assert check_validity(Combination.from_dict(r["combination"]), small_data.meta(),
                              default_rules()).ok
    assert all(r["status"] == "rule-skip" for r in trace.of_kind("skip"))


def test_random_search_needs_a_budget(small_data):
    with pytest.raises(ValueError):
        random_search(CHEAP, small_data, budget=0)


def _cell(method, dataset, seed, err, cost=10.0, distinct=5):
    return CellResult(method, dataset, seed, err, cost, distinct, "cart", "tree")


def test_aggregate_mean_and_sample_std():
    cells = [_cell("psbo", "d", s, e) for s, e in enumerate([0.1, 0.2, 0.3])]
    cells.append(_cell("random", "d", 0, 0.4))
    rows = {r["method"]: r for r in aggregate(cells)}
    assert rows["psbo"]["test_error_mean"] == pytest.approx(0.2)
    assert rows["psbo"]["test_error_std"] == pytest.approx(0.1)
    assert rows["psbo"]["runs"] == 3 and not rows["psbo"]["single_run"]
    assert rows["random"]["single_run"] and rows["random"]["test_error_std"] == 0.0
    text = render_table(list(rows.values()))
    assert "0.2000 ± 0.1000" in text and "(single run)" in text
    assert to_csv(list(rows.values())).splitlines()[0].startswith("method,dataset,runs")


def test_bench_cells_are_recomputed_from_files(tmp_path, small_data):
    cells = run_bench([small_data], [0, 1], ["random", "psbo"], CHEAP, out_dir=tmp_path)
    assert [c.method for c in cells] == ["psbo", "random", "psbo", "random"]
    by = {(c.method, c.seed): c for c in cells}
    for s in (0, 1):
        assert by[("random", s)].search_cost <= by[("psbo", s)].search_cost + 1e-9
    loaded = load_cells(tmp_path)
    assert sorted((c.method, c.seed, c.search_cost, c.distinct, c.test_error) for c in loaded) == \
        sorted((c.method, c.seed, c.search_cost, c.distinct, c.test_error) for c in cells)
    # the summary comes from the files alone
    rows = aggregate(loaded)
    paths = write_summary(rows, tmp_path / "summary")
    doc = json.loads(paths["json"].read_text())
    assert doc["note"].startswith("baseline") and len(doc["rows"]) == 2
    assert "±" in paths["table"].read_text()
