import numpy as np
import pytest
from hypothesis import given, strategies as st

from psbo.dataset import (DatasetError, FeatureMeta, Dataset, _deal_into_parts, classify_size,
                          dataset_from_arrays, fill_values, final_cv_sample, load_dataset,
                          load_feature_rows, make_sampling_plan, round_half_up,
                          stratified_subsample, training_sample)

from conftest import write_csv


def labelled(n, weights=(0.6, 0.4), p=2, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.choice(len(weights), size=n, p=np.asarray(weights) / np.sum(weights))
    y[: len(weights)] = np.arange(len(weights))  # every class present
    return dataset_from_arrays(rng.normal(size=(n, p)), y)


# --- loading --------------------------------------------------------------

def test_car_rows_load_as_categorical(tmp_path):
    path = write_csv(tmp_path / "car.csv",
                     ["buying", "maint", "doors", "persons", "lug_boot", "safety", "class"],
                     [["vhigh", "vhigh", "2", "2", "small", "low", "unacc"],
                      ["high", "med", "4", "4", "med", "high", "acc"],
                      ["low", "low", "5more", "more", "big", "high", "good"]])
    d = load_dataset(path, target="class")
    assert d.p == 6 and d.n == 3
    assert all(f.is_categorical for f in d.features)  # "5more" and "more" are not numbers
    assert set(d.classes) == {"unacc", "acc", "good"}
    assert d.header[-1] == "class"


def test_minimal_numeric_csv(tmp_path):
    path = write_csv(tmp_path / "m.csv", ["x", "y"], [["1", "a"], ["2", "b"], ["3", "a"], ["4", "b"]])
    d = load_dataset(path)
    assert (d.n, d.p) == (4, 1)
    assert d.features[0].kind == "numeric"


def test_single_class_target_is_rejected(tmp_path):
    path = write_csv(tmp_path / "s.csv", ["x", "y"], [["1", "a"], ["2", "a"]])
    with pytest.raises(DatasetError, match="single-class"):
        load_dataset(path)


def test_empty_file_is_rejected(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("")
    with pytest.raises(DatasetError, match="empty"):
        load_dataset(path)


def test_missing_target_lists_columns(tmp_path):
    path = write_csv(tmp_path / "t.csv", ["a", "b"], [["1", "x"], ["2", "y"]])
    with pytest.raises(DatasetError, match="available columns: a, b"):
        load_dataset(path, target="class")


def test_parse_error_names_line(tmp_path):
    path = write_csv(tmp_path / "p.csv", ["x", "y"], [["1", "a"], ["oops", "b"], ["2", "a"]])
    d = load_dataset(path)  # a non-numeric cell makes the column categorical
    assert d.features[0].is_categorical
    bad = tmp_path / "ragged.csv"
    bad.write_text("x,y\n1,a\n2\n")
    with pytest.raises(DatasetError, match="line 3"):
        load_dataset(bad)


def test_missing_values_are_imputed(tmp_path):
    path = write_csv(tmp_path / "q.csv", ["num", "cat", "y"],
                     [["1", "r", "a"], ["?", "g", "b"], ["3", "?", "a"], ["5", "g", "b"]])
    d = load_dataset(path)
    assert not np.isnan(d.X).any()
    assert d.X[1, 0] == 3.0                       # median of 1, 3, 5
    assert d.features[1].levels[int(d.X[2, 1])] == "g"  # mode


def test_arff_subset(tmp_path):
    path = tmp_path / "w.arff"
    path.write_text("% comment\n@RELATION weather\n@attribute outlook {sunny, rainy}\n"
                    "@attribute temp NUMERIC\n@attribute play {yes,no}\n@DATA\n"
                    "sunny,20,yes\nrainy,?,no\nsunny,30,no\n")
    d = load_dataset(path)
    assert d.target == "play" and d.classes == ["yes", "no"]
    assert d.features[0].levels == ("sunny", "rainy")
    assert d.X[1, 1] == 25.0


def test_arff_undeclared_level(tmp_path):
    path = tmp_path / "w.arff"
    path.write_text("@attribute a {x,y}\n@attribute c {p,q}\n@data\nz,p\nx,q\n")
    with pytest.raises(DatasetError, match="line 4"):
        load_dataset(path)


def test_feature_rows_follow_the_training_schema(tmp_path):
    feats = [FeatureMeta("a", "numeric"), FeatureMeta("b", "categorical", ("u", "v"))]
    path = write_csv(tmp_path / "in.csv", ["b", "extra", "a"], [["v", "1", "2.5"], ["?", "0", "?"]])
    X = load_feature_rows(path, feats, fills=[7.0, 0.0])
    np.testing.assert_array_equal(X, [[2.5, 1.0], [7.0, 0.0]])
    with pytest.raises(DatasetError, match="missing feature column"):
        load_feature_rows(write_csv(tmp_path / "m.csv", ["a"], [["1"]]), feats)
    with pytest.raises(DatasetError, match="not\\s+seen in training|was not seen"):
        load_feature_rows(write_csv(tmp_path / "l.csv", ["a", "b"], [["1", "w"]]), feats)


def test_fill_values_median_and_mode():
    d = Dataset(np.array([[1.0, 0], [2.0, 1], [9.0, 1]]), np.array([0, 1, 0]),
                [FeatureMeta("a", "numeric"), FeatureMeta("b", "categorical", ("u", "v"))],
                ["n", "y"])
    assert fill_values(d) == [2.0, 1.0]


# --- size classes ----------------------------------------------------------

@pytest.mark.parametrize("n, p, tag", [(5000, 200, "small"), (5001, 200, "large"),
                                       (1, 1, "small"), (12000, 784, "large")])
def test_size_boundary(n, p, tag):
    assert classify_size(n=n, p=p).tag == tag
    assert classify_size(n=n, p=p).product == n * p


# --- sampling plans ----------------------------------------------------------

def test_small_plan_has_three_equal_folds():
    d = labelled(900)
    plan = make_sampling_plan(d, seed=1)
    assert plan.m == 900 and plan.k == 3
    assert [f.validation.size for f in plan.folds] == [300, 300, 300]
    union = np.concatenate([f.validation for f in plan.folds])
    assert np.array_equal(np.sort(union), np.arange(900))


def test_large_plan_uses_one_fold():
    d = labelled(50000, p=21)
    assert classify_size(d).tag == "large"
    plan = make_sampling_plan(d, seed=2)
    assert plan.m == 5000 and plan.k == 1
    (fold,) = plan.folds
    assert abs(fold.validation.size - 5000 // 3) <= 1
    assert fold.validation.size + fold.training.size == 5000


def test_too_small_class_cannot_stratify():
    d = dataset_from_arrays(np.arange(3.0)[:, None], np.array([0, 1, 2]))
    with pytest.raises(DatasetError, match="class too small to stratify"):
        make_sampling_plan(d)


def test_round_sizes_and_nesting():
    d = labelled(1200)
    plan = make_sampling_plan(d, seed=4)
    for f in range(1, 4):
        full = plan.folds[f - 1].training
        prev = np.array([], dtype=int)
        for r, frac in zip(range(1, 5), (0.125, 0.25, 0.5, 1.0)):
            s = training_sample(plan, r, f)
            assert s.size == round_half_up(frac * full.size)
            assert set(prev) <= set(s)
            assert not set(s) & set(plan.folds[f - 1].validation)
            prev = s
        assert set(prev) == set(full)


def test_rounding_is_half_up():
    assert round_half_up(400.5) == 401
    assert round_half_up(100.0) == 100
    assert round_half_up(0.4999) == 0


def test_training_sample_argument_checks():
    plan = make_sampling_plan(labelled(60), seed=0)
    with pytest.raises(ValueError):
        training_sample(plan, 5, 1)
    with pytest.raises(ValueError):
        training_sample(plan, 1, 4)


def test_plan_is_deterministic():
    d = labelled(500)
    a = make_sampling_plan(d, seed=9).to_dict()
    b = make_sampling_plan(d, seed=9).to_dict()
    assert a == b
    assert a != make_sampling_plan(d, seed=10).to_dict()


@given(st.integers(30, 400), st.integers(2, 5), st.integers(0, 10**6))
def test_parts_are_balanced_and_stratified(n, n_classes, seed):
    rng = np.random.default_rng(seed)
    y = rng.integers(n_classes, size=n)
    idx = np.arange(n)
    parts = _deal_into_parts(y, idx, 3, rng)
    sizes = [p.size for p in parts]
    assert max(sizes) - min(sizes) <= 1
    assert np.array_equal(np.sort(np.concatenate(parts)), idx)
    for c in np.unique(y):
        share = (y == c).sum() / 3
        for p in parts:
            assert abs((y[p] == c).sum() - share) < 1


@given(st.integers(20, 300), st.integers(0, 10**6))
def test_stratified_subsample_keeps_proportions(size, seed):
    rng = np.random.default_rng(seed)
    y = rng.integers(3, size=400)
    pick = stratified_subsample(y, np.arange(400), size, rng)
    assert pick.size == size and len(set(pick)) == size
    for c in range(3):
        assert abs((y[pick] == c).sum() - size * (y == c).mean()) < 1


def test_final_cv_sample_all_rows_when_small():
    d = labelled(4000)
    plan = make_sampling_plan(d, seed=0)
    assert np.array_equal(final_cv_sample(d, plan, 0), np.arange(4000))


def test_final_cv_sample_prefers_unused_rows():
    d = labelled(12000, p=1)
    plan = make_sampling_plan(d, seed=0)
    rows = final_cv_sample(d, plan, 0)
    assert rows.size == 5000
    assert not set(rows) & set(plan.working_set)


def test_final_cv_sample_tops_up_from_working_set():
    d = labelled(6000, p=1)
    plan = make_sampling_plan(d, seed=0)
    rows = final_cv_sample(d, plan, 0)
    unused = np.setdiff1d(np.arange(6000), plan.working_set)
    assert rows.size == 5000
    assert set(unused) <= set(rows)
    assert np.isin(rows, plan.working_set).sum() == 4000
    for c in range(2):
        assert abs((d.y[rows] == c).sum() - 5000 * (d.y == c).mean()) < 1 + 1e-9
