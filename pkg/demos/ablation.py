"""Ablation: what each speed-up technique buys on one dataset.

Run with ``python demos/ablation.py``. It takes under a minute on one core.

The same search runs several times on ``car_like`` with one technique switched
off each time, and once as plain random search with the same cost budget.
Every method sees the same held-out split, so the errors are comparable.
Costs are in virtual clock units, so the numbers repeat exactly across
machines.

The demo uses six quick learners, whose per-test budgets rarely bind, so
switching off technique 3 changes little here. With the full registry
(drop ``algorithms``) forests and boosting hit the budgets, and the run
without technique 3 costs several times more.

Technique numbers: 2 uses several training folds per round, 3 grows the
per-test time budgets from round to round, 5 caches failed feature
selections, and 8 skips combinations that validity rules reject.
"""

from psbo import SearchConfig
from psbo.bench import car_like, run_cell

data = car_like()
cfg = SearchConfig(algorithms=["zeror", "naive_bayes", "cart", "logistic", "knn", "svm"])

base = run_cell("psbo", data, seed=0, cfg=cfg)
print(f"{'method':8s} {'error':>7s} {'cost':>9s} {'distinct':>9s}  champion")


def show(cell):
    print(f"{cell.method:8s} {cell.test_error:7.4f} {cell.search_cost:9.0f} "
          f"{cell.distinct:9d}  {cell.champion}")


show(base)
for method in ("no-t2", "no-t3", "no-t5", "no-t8"):
    show(run_cell(method, data, seed=0, cfg=cfg))
# random search gets exactly the cost psbo spent
show(run_cell("random", data, seed=0, cfg=cfg, budget=base.search_cost))
