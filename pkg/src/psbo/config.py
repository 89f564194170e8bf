"""Search configuration: defaults, a key=value file format and range checks.

Config file format
------------------
One ``key = value`` pair per line. Blank lines and lines starting with ``#``
are ignored. Values are parsed as JSON when possible (numbers, booleans,
lists) and kept as plain strings otherwise::

    # psbo.cfg
    seed = 7
    clock = virtual
    technique_off = [3, 5]
    algorithms = ["knn", "cart", "random_forest"]
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

TECHNIQUES = tuple(range(1, 9))


class ConfigError(ValueError):
    """Invalid configuration value or file."""


@dataclass
class SearchConfig:
    # data and run
    data: str | None = None
    format: str | None = None
    target: str | None = None
    seed: int = 0
    clock: str = "virtual"
    budget: float | None = None
    out: str | None = None
    algorithms: list[str] | None = None
    # sampling
    k: int | None = None
    h: int | None = None
    # retest selection and rough estimates
    n_c: int = 10
    t_d: int = 2
    ratio_low: float = 0.25
    ratio_high: float = 2.5
    # surrogate and proposals
    n_trees: int = 10
    proposals: int = 10
    # round schedule
    tau0: float = 0.5
    tau_decay: float = 0.8
    keep_first: float = 0.4
    keep_later: float = 0.7
    min_survivors: int = 3
    first_cycles: int = 3
    n_random_first: int = 20
    budget_small: float = 10.0
    budget_large: float = 20.0
    budget_growth: float = 1.5
    fixed_fs_budget: float = 900.0
    fixed_train_budget: float = 9000.0
    # caches and trial caps
    trial_cap_first: int = 200
    trial_extra: int = 5
    max_skips: int = 50
    # penalties
    fs_penalty: float = 1.1
    nb_penalty: float = 0.02
    # final round
    final_top: int = 10
    h_small: int = 10
    h_large: int = 3
    # technique toggles, all on by default
    technique_off: list[int] = field(default_factory=list)

    def on(self, technique: int) -> bool:
        return technique not in self.technique_off

    def validate(self) -> "SearchConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.clock in ("virtual", "wall"), f"clock must be 'virtual' or 'wall', got {self.clock!r}")
        need(isinstance(self.seed, int) and self.seed >= 0, "seed must be a non-negative integer")
        need(self.budget is None or self.budget > 0, "budget must be positive")
        need(self.format in (None, "csv", "arff"), f"unknown format {self.format!r}")
        need(self.k is None or 1 <= self.k <= 10, "k must be in 1..10")
        need(self.h is None or 2 <= self.h <= 20, "h must be in 2..20")
        need(self.n_c >= 1, "n_c must be at least 1")
        need(self.t_d >= 0, "t_d must be non-negative")
        need(0 < self.ratio_low <= 1 <= self.ratio_high, "ratio bounds must satisfy 0 < low <= 1 <= high")
        need(self.n_trees >= 1, "n_trees must be at least 1")
        need(self.proposals >= 2 and self.proposals % 2 == 0, "proposals must be a positive even number")
        need(0 < self.tau0 <= 1, "tau0 must be in (0, 1]")
        need(0 < self.tau_decay <= 1, "tau_decay must be in (0, 1]")
        need(0 < self.keep_first <= 1 and 0 < self.keep_later <= 1, "keep fractions must be in (0, 1]")
        need(self.min_survivors >= 1, "min_survivors must be at least 1")
        need(self.first_cycles >= 1, "first_cycles must be at least 1")
        need(self.n_random_first >= 0, "n_random_first must be non-negative")
        for name in ("budget_small", "budget_large", "fixed_fs_budget", "fixed_train_budget"):
            need(getattr(self, name) > 0, f"{name} must be positive")
        need(self.budget_growth >= 1, "budget_growth must be at least 1")
        need(self.trial_cap_first >= 1 and self.trial_extra >= 0, "trial caps must be positive")
        need(self.max_skips >= 1, "max_skips must be at least 1")
        need(self.fs_penalty >= 1 and self.nb_penalty >= 0, "penalties must not reward")
        need(self.final_top >= 1, "final_top must be at least 1")
        need(2 <= self.h_small and 2 <= self.h_large, "final fold counts must be at least 2")
        bad = [t for t in self.technique_off if t not in TECHNIQUES]
        need(not bad, f"unknown technique number(s) {bad}; valid are 1..8")
        if self.algorithms is not None:
            from .learnzoo import registry_by_id
            known = registry_by_id()
            unknown = [a for a in self.algorithms if a not in known]
            need(not unknown, f"unknown algorithm(s) {unknown}; known: {sorted(known)}")
            need(len(self.algorithms) > 0, "algorithms list is empty")
        return self

    def overrides(self) -> dict:
        """Fields that differ from the defaults (the report's provenance block)."""
        base = SearchConfig()
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)
                if getattr(self, f.name) != getattr(base, f.name)}

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "SearchConfig":
        return dataclasses.replace(self, **changes)


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def read_config_file(path) -> dict:
    """Parse a key=value config file into a dict of raw values."""
    out: dict = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for i, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = _parse_value(value)
    return out


def make_config(values: Mapping[str, Any]) -> SearchConfig:
    """Build and validate a config from a mapping; unknown keys are errors."""
    names = {f.name: f for f in dataclasses.fields(SearchConfig)}
    unknown = sorted(set(values) - set(names))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    cfg = SearchConfig()
    for key, value in values.items():
        default = getattr(cfg, key)
        if isinstance(default, bool) or isinstance(value, bool):
            pass
        elif isinstance(default, float) and isinstance(value, int):
            value = float(value)
        elif isinstance(default, int) and not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        elif key == "technique_off":
            value = [value] if isinstance(value, int) else list(value)
        setattr(cfg, key, value)
    return cfg.validate()
