import csv

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from psbo import SearchConfig, dataset_from_arrays, run_search

settings.register_profile("psbo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("psbo")

# cheap learners for end-to-end runs that only check bookkeeping; svm brings a
# protected algorithm along
FAST_ALGORITHMS = ["zeror", "knn", "naive_bayes", "cart", "logistic", "adaboost", "svm"]


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


@pytest.fixture(scope="session")
def toy_data():
    """Two informative numeric features, three noise features, binary target."""
    rng = np.random.default_rng(3)
    X = rng.normal(size=(240, 5))
    y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(int)
    return dataset_from_arrays(X, y, name="toy")


@pytest.fixture(scope="session")
def small_data():
    """A smaller copy of the toy problem for the technique-off runs."""
    rng = np.random.default_rng(4)
    X = rng.normal(size=(120, 4))
    y = (X[:, 0] - X[:, 2] > 0).astype(int)
    return dataset_from_arrays(X, y, name="small")


@pytest.fixture(scope="session")
def fast_report(toy_data):
    """One small end-to-end search shared by the engine invariant tests."""
    cfg = SearchConfig(seed=5, algorithms=FAST_ALGORITHMS)
    return run_search(cfg, toy_data)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdicts at the end of the run."""
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
