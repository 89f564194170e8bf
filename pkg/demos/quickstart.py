"""Quickstart: search a small dataset, inspect the result, label new rows.

Run with ``python demos/quickstart.py``. It takes well under a minute on one core.

The dataset is the built-in ``credit_like`` table: 600 applicants, a mix of
numeric and categorical columns, and a binary good/bad label. We hold out
30% of the rows, let the search pick an algorithm and its settings on the
rest, and then score the champion on the held-out rows.
"""

import numpy as np

from psbo import SearchConfig, run_search
from psbo.bench import credit_like, holdout_split
from psbo.learnzoo import evaluate_error

data = credit_like()
train, test = holdout_split(data, seed=0)
print(f"{data.name}: {data.n} rows, {data.p} features, classes {data.classes}")

# A handful of learners keeps the demo short; drop ``algorithms`` to search
# the whole registry.
cfg = SearchConfig(seed=0, algorithms=["zeror", "naive_bayes", "cart", "logistic", "knn", "svm"])
report = run_search(cfg, train)

# The survivor log shows progressive sampling at work: each round trains on
# twice as many rows and drops the algorithms that fell too far behind.
for rnd, names in report.survivors.items():
    print(f"after round {rnd}: {', '.join(names)}")

ch = report.champion
print(f"champion: {ch['algorithm']} ({ch['family']})")
print(f"  combination: {ch['combination']}")
print(f"  cross-validated error {ch['cv_error']:.4f}, "
      f"{report.total_distinct} distinct combinations tested, cost {report.search_cost:.0f}")

# The final model was retrained on every training row.
err = evaluate_error(report.model, test, np.arange(test.n))
print(f"held-out error: {err:.4f}")
print("first predictions:", list(report.model.predict_labels(test.X[:5])))
