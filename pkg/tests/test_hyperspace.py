import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from psbo.hyperspace import (INACTIVE, Combination, HyperSpace, SpaceError, ValidityRule,
                             categorical, check_validity, fs_distance, hamming_distance,
                             load_rules, load_space, numeric)
from psbo.learnzoo import default_rules, fs_space, registry_by_id

REG = registry_by_id()

SVM_LIKE = HyperSpace([
    categorical("kernel", ("linear", "rbf", "poly"), "linear"),
    numeric("C", 0.01, 100, 1.0, log=True),
    numeric("gamma", 1e-4, 10, 0.1, log=True, when=("kernel", ("rbf", "poly"))),
    numeric("degree", 2, 5, 3, integer=True, when=("kernel", "poly")),
])


# --- declarations -------------------------------------------------------------

@pytest.mark.parametrize("make", [
    lambda: numeric("x", 5, 5, 5),
    lambda: numeric("x", 0, 10, 1, log=True),
    lambda: numeric("x", 0, 1, 2),
    lambda: categorical("c", ("a", "b"), "z"),
    lambda: categorical("c", (), None),
])
def test_bad_declarations(make):
    with pytest.raises(SpaceError):
        make()


def test_conditions_must_be_acyclic_and_known():
    with pytest.raises(SpaceError, match="cycle"):
        HyperSpace([categorical("a", (1, 2), 1, when=("b", 1)),
                    categorical("b", (1, 2), 1, when=("a", 1))])
    with pytest.raises(SpaceError, match="unknown parent"):
        HyperSpace([categorical("a", (1, 2), 1, when=("ghost", 1))])


def test_children_follow_parents_regardless_of_declaration_order():
    s = HyperSpace([numeric("g", 0, 1, 0.5, when=("k", "on")), categorical("k", ("on", "off"), "on")])
    assert s.names == ("k", "g")


# --- default and random combinations ---------------------------------------------

def test_knn_default():
    c = REG["knn"].default_combination()
    assert c.params == {"k": 5, "weighting": "uniform", "metric": "euclidean"}


def test_random_forest_default_resolves_depth_conditional():
    c = REG["random_forest"].default_combination()
    assert c["n_trees"] == 100 and c["depth_limit"] == "unlimited"
    assert c["max_depth"] is INACTIVE


def test_default_marks_inactive_child():
    d = SVM_LIKE.default()
    assert d["kernel"] == "linear" and d["gamma"] is INACTIVE and d["degree"] is INACTIVE


def test_zeror_combination_is_empty():
    rng = np.random.default_rng(0)
    assert REG["zeror"].random_combination(rng).params == {}
    assert HyperSpace().sample(rng) == {}


def test_log_scale_sampling_is_log_uniform():
    p = numeric("v", 1, 100, 10, log=True)
    rng = np.random.default_rng(2024)
    logs = np.log([p.sample(rng) for _ in range(10_000)])
    res = stats.kstest(logs, stats.uniform(loc=0.0, scale=math.log(100)).cdf)
    assert res.pvalue > 0.01
    # the same draws are far from uniform on the original scale
    assert stats.kstest(np.exp(logs), stats.uniform(loc=1, scale=99).cdf).pvalue < 1e-6


def test_linear_scale_sampling_is_uniform():
    p = numeric("v", -3, 7, 0)
    rng = np.random.default_rng(7)
    draws = [p.sample(rng) for _ in range(10_000)]
    assert stats.kstest(draws, stats.uniform(loc=-3, scale=10).cdf).pvalue > 0.01


@given(st.integers(0, 2**32 - 1), st.sampled_from(sorted(REG)))
def test_random_combinations_respect_activity_and_ranges(seed, alg):
    entry = REG[alg]
    c = entry.random_combination(np.random.default_rng(seed))
    entry.space.validate(c.values)  # raises on an active child under a non-activating parent
    for p in entry.space:
        assert (c.values[p.name] is INACTIVE) != entry.space.is_active(p, c.values)


@given(st.integers(0, 2**32 - 1), st.sampled_from(sorted(REG)))
def test_mutation_stays_valid(seed, alg):
    entry = REG[alg]
    rng = np.random.default_rng(seed)
    c = entry.random_combination(rng)
    entry.space.validate(entry.space.mutate(c.values, rng))


def test_integer_parameters_sample_integers():
    rng = np.random.default_rng(0)
    p = numeric("n", 2, 5, 3, integer=True)
    draws = {p.sample(rng) for _ in range(500)}
    assert draws == {2, 3, 4, 5}


# --- Hamming distance -------------------------------------------------------------

def test_identical_combinations_are_at_distance_zero():
    c = REG["svm"].random_combination(np.random.default_rng(1))
    assert hamming_distance(c, c, REG["svm"].space) == 0


def test_one_percent_rule_on_linear_scale():
    p = numeric("x", 0, 100, 50)
    assert not p.differs(50, 50.5)
    assert p.differs(50, 52)
    assert not p.differs(50, 51)  # exactly 1% is still the same value
    assert p.differs(50, 51.000001)


def test_one_percent_rule_uses_log_scale():
    p = numeric("x", 1, 100, 10, log=True)  # 1% of the span is 0.01 * ln(100)
    step = math.exp(0.01 * math.log(100))
    assert not p.differs(10, 10 * step * 0.999)
    assert p.differs(10, 10 * step * 1.001)


def test_activity_mismatch_counts():
    a = Combination("svm", {"kernel": "rbf", "C": 1.0, "gamma": 0.1, "degree": INACTIVE})
    b = Combination("svm", {"kernel": "linear", "C": 1.0, "gamma": INACTIVE, "degree": INACTIVE})
    assert hamming_distance(a, b, SVM_LIKE) == 2


def test_distance_across_algorithms_is_an_error():
    with pytest.raises(SpaceError, match="mismatched"):
        hamming_distance(REG["knn"].default_combination(), REG["cart"].default_combination(),
                         REG["knn"].space)


def test_fs_distance_compares_blocks():
    fs = fs_space()
    a = fs.default()
    b = dict(a)
    assert fs_distance(a, b, fs) == 0
    rng = np.random.default_rng(4)
    c = fs.sample(rng)
    assert 0 <= fs_distance(a, c, fs) <= len(fs)


def _grid_values(space, draw):
    """Values where numeric parameters sit on a grid coarser than the 1% band,
    so 'differs' reduces to inequality and the count is a true metric."""
    out = {}
    for p in space:
        if not space.is_active(p, out):
            out[p.name] = INACTIVE
        elif p.is_numeric:
            out[p.name] = p.from_unit(draw(st.integers(0, 4)) / 4)
        else:
            out[p.name] = draw(st.sampled_from(p.choices))
    return out


@given(st.data(), st.sampled_from(["svm", "cart", "adaboost", "voting", "knn"]))
def test_distance_is_a_metric(data, alg):
    space = REG[alg].space
    a, b, c = (Combination(alg, _grid_values(space, data.draw)) for _ in range(3))
    d = lambda x, y: hamming_distance(x, y, space)  # noqa: E731
    assert d(a, b) == d(b, a)
    assert (d(a, b) == 0) == (a == b)
    assert d(a, c) <= d(a, b) + d(b, c)
    assert 0 <= d(a, b) <= len(space)


@given(st.integers(0, 2**32 - 1), st.sampled_from(sorted(REG)))
def test_distance_bounded_by_parameter_count(seed, alg):
    rng = np.random.default_rng(seed)
    entry = REG[alg]
    a, b = entry.random_combination(rng), entry.random_combination(rng)
    dist = hamming_distance(a, b, entry.space)
    assert 0 <= dist <= len(entry.space)
    assert dist == hamming_distance(b, a, entry.space)


# --- combinations --------------------------------------------------------------------

def test_combination_round_trip_and_identity():
    c = REG["adaboost"].random_combination(np.random.default_rng(3))
    again = Combination.from_dict(json.loads(json.dumps(c.to_dict())))
    assert again == c and hash(again) == hash(c) and again.stable_hash() == c.stable_hash()
    with pytest.raises(Exception):
        c.algorithm = "other"


def test_feature_selection_block_is_complete_or_absent():
    rng = np.random.default_rng(0)
    for _ in range(200):
        c = REG["knn"].random_combination(rng)
        block = c.fs_block
        if block is None:
            assert not c.uses_fs
        else:
            assert block["fs.search"] != "none" and block["fs.evaluator"] is not INACTIVE


def test_space_files_round_trip(tmp_path):
    path = tmp_path / "space.json"
    path.write_text(json.dumps({"params": SVM_LIKE.to_list()}))
    again = load_space(path)
    assert again.to_list() == SVM_LIKE.to_list()


# --- validity rules --------------------------------------------------------------------

META = {"n": 500, "p": 10, "n_classes": 3}
RULES = default_rules()


def _combo(alg, **values):
    entry = REG[alg]
    base = entry.space.default()
    base.update(values)
    return Combination(alg, entry.space.resolve(base, np.random.default_rng(0)))


def test_naive_bayes_conflict_is_invalid():
    c = _combo("naive_bayes", kernel_density=True, supervised_discretization=True)
    v = check_validity(c, META, RULES)
    assert v.status == "invalid" and "naive Bayes" in v.reason
    assert check_validity(_combo("naive_bayes", kernel_density=True), META, RULES).ok


def test_ranker_with_subset_evaluator_is_invalid():
    c = _combo("knn", **{"fs.search": "ranker", "fs.evaluator": "cfs"})
    assert check_validity(c, META, RULES).status == "invalid"


def test_pca_with_many_features_is_infeasible():
    c = _combo("knn", **{"fs.search": "ranker", "fs.evaluator": "pca"})
    assert check_validity(c, dict(META, p=2500), RULES).status == "infeasible"
    assert check_validity(c, dict(META, p=2000), RULES).ok


def test_exhaustive_codes_infeasible_beyond_ten_classes():
    c = _combo("logistic", multiclass="exhaustive_ecoc")
    assert check_validity(c, dict(META, n_classes=11), RULES).status == "infeasible"
    assert check_validity(c, dict(META, n_classes=10), RULES).ok


def test_rules_reach_into_meta_and_ensemble_slots():
    c = _combo("voting", slot1="naive_bayes", **{"slot1.naive_bayes.kernel_density": True,
                                                 "slot1.naive_bayes.supervised_discretization": True})
    assert check_validity(c, META, RULES).status == "invalid"


def test_first_matching_rule_wins(tmp_path):
    c = _combo("knn", k=3)
    first = ValidityRule("a", "infeasible", "first", algorithm="knn")
    second = ValidityRule("b", "invalid", "second", algorithm="knn")
    assert check_validity(c, META, [first, second]).rule_id == "a"
    assert check_validity(c, META, [second, first]).rule_id == "b"
    path = tmp_path / "rules.json"
    path.write_text(json.dumps({"rules": [second.to_dict(), first.to_dict()]}))
    assert [r.id for r in load_rules(path)] == ["b", "a"]


def test_rule_declarations_are_checked():
    with pytest.raises(SpaceError):
        ValidityRule("x", "maybe", "bad verdict")
    with pytest.raises(SpaceError):
        ValidityRule("x", "invalid", "bad op", meta={"p": ("~", 1)})


@given(st.integers(0, 2**32 - 1), st.sampled_from(sorted(REG)))
def test_check_validity_is_deterministic(seed, alg):
    c = REG[alg].random_combination(np.random.default_rng(seed))
    assert check_validity(c, META, RULES) == check_validity(c, META, RULES)
