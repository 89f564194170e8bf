"""Per-round parameters of the five-round search."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..config import SearchConfig
from ..dataset import ROUND_FRACTIONS

N_ROUNDS = 5


@dataclass(frozen=True)
class RoundSchedule:
    round: int
    tau: float | None
    fs_budget: float
    train_budget: float
    cycles: int | None
    fraction: float | None
    keep: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def _exact(x: float) -> float:
    # repeated multiplication drifts in the last bits; the table is decimal
    return round(x, 12)


def build_schedule(cfg: SearchConfig, large: bool) -> list[RoundSchedule]:
    """Rounds 1-5. Round 5 is the final cross-validated round.

    With technique 3 off every round uses the fixed per-test budgets instead
    of the growing ones.
    """
    start = cfg.budget_large if large else cfg.budget_small
    out = []
    for r in range(1, N_ROUNDS + 1):
        grow = cfg.budget_growth ** (r - 1)
        if cfg.on(3):
            fs_budget = train_budget = _exact(start * grow)
        else:
            fs_budget, train_budget = cfg.fixed_fs_budget, cfg.fixed_train_budget
        if r < N_ROUNDS:
            out.append(RoundSchedule(
                round=r, tau=_exact(cfg.tau0 * cfg.tau_decay ** (r - 1)),
                fs_budget=fs_budget, train_budget=train_budget,
                cycles=None if r == 1 else max(cfg.first_cycles - (r - 2), 1),
                fraction=ROUND_FRACTIONS[r - 1],
                keep=cfg.keep_first if r == 1 else cfg.keep_later))
        else:
            out.append(RoundSchedule(round=r, tau=None, fs_budget=fs_budget,
                                     train_budget=train_budget, cycles=None,
                                     fraction=None, keep=None))
    return out
