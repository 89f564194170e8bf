"""Hyper-parameter spaces with conditional parameters.

Parameters form a DAG through their activation conditions. A combination is a
flat ``name -> value`` map in which parameters whose condition is unmet hold
the :data:`INACTIVE` marker.
"""

from __future__ import annotations

import json
import math
import operator
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


class _Inactive:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INACTIVE"

    def __reduce__(self):
        return (_Inactive, ())


INACTIVE = _Inactive()
INACTIVE_CODE = -1.0
DIFF_FRACTION = 0.01


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class HyperParam:
    name: str
    kind: str  # "numeric" | "categorical"
    low: float | None = None
    high: float | None = None
    scale: str = "linear"
    integer: bool = False
    choices: tuple = ()
    default: Any = None
    condition: tuple[str, tuple] | None = None

    def __post_init__(self):
        if self.kind == "numeric":
            if self.low is None or self.high is None or not self.low < self.high:
                raise SpaceError(f"{self.name}: numeric range needs min < max")
            if self.scale not in ("linear", "log"):
                raise SpaceError(f"{self.name}: unknown scale {self.scale!r}")
            if self.scale == "log" and self.low <= 0:
                raise SpaceError(f"{self.name}: log scale requires min > 0")
            if not self.low <= self.default <= self.high:
                raise SpaceError(f"{self.name}: default outside range")
        elif self.kind == "categorical":
            if not self.choices:
                raise SpaceError(f"{self.name}: categorical needs choices")
            if self.default not in self.choices:
                raise SpaceError(f"{self.name}: default not among choices")
        else:
            raise SpaceError(f"{self.name}: unknown kind {self.kind!r}")

    @property
    def is_numeric(self) -> bool:
        return self.kind == "numeric"

    def _to_scale(self, v: float) -> float:
        return math.log(v) if self.scale == "log" else float(v)

    def _from_scale(self, s: float) -> float:
        return math.exp(s) if self.scale == "log" else s

    @property
    def scaled_span(self) -> float:
        return self._to_scale(self.high) - self._to_scale(self.low)

    def to_unit(self, v) -> float:
        lo = self._to_scale(self.low)
        return (self._to_scale(v) - lo) / self.scaled_span

    def from_unit(self, u: float):
        u = min(1.0, max(0.0, u))
        v = self._from_scale(self._to_scale(self.low) + u * self.scaled_span)
        if self.integer:
            v = int(round(v))
            v = min(int(self.high), max(int(math.ceil(self.low)), v))
        else:
            v = min(self.high, max(self.low, v))
        return v

    def sample(self, rng: np.random.Generator, allowed: Sequence | None = None):
        if self.is_numeric:
            return self.from_unit(rng.uniform())
        levels = self.choices if allowed is None else tuple(c for c in self.choices if c in allowed)
        if not levels:
            raise SpaceError(f"{self.name}: no allowed levels")
        return levels[int(rng.integers(len(levels)))]

    def contains(self, v) -> bool:
        if self.is_numeric:
            return isinstance(v, (int, float, np.integer, np.floating)) and \
                not isinstance(v, bool) and self.low <= v <= self.high
        return v in self.choices

    def differs(self, a, b) -> bool:
        """Per-parameter Hamming contribution.

        Numeric values differ when they are more than 1% of the range apart on
        the declared scale. Activity mismatch always differs.
        """
        a_off, b_off = a is INACTIVE, b is INACTIVE
        if a_off or b_off:
            return a_off != b_off
        if self.is_numeric:
            gap = abs(self._to_scale(a) - self._to_scale(b))
            return gap > DIFF_FRACTION * self.scaled_span
        return a != b

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "default": self.default}
        if self.is_numeric:
            d.update(min=self.low, max=self.high, scale=self.scale, integer=self.integer)
        else:
            d["choices"] = list(self.choices)
        if self.condition:
            d["condition"] = {"parent": self.condition[0], "values": list(self.condition[1])}
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "HyperParam":
        cond = d.get("condition")
        condition = (cond["parent"], tuple(cond["values"])) if cond else None
        if d["kind"] == "numeric":
            return cls(d["name"], "numeric", float(d["min"]), float(d["max"]),
                       d.get("scale", "linear"), bool(d.get("integer", False)),
                       default=d["default"], condition=condition)
        return cls(d["name"], "categorical", choices=tuple(d["choices"]),
                   default=d["default"], condition=condition)


def numeric(name, low, high, default, *, log=False, integer=False, when=None) -> HyperParam:
    return HyperParam(name, "numeric", float(low), float(high), "log" if log else "linear",
                      integer, default=default, condition=_cond(when))


def categorical(name, choices, default, *, when=None) -> HyperParam:
    return HyperParam(name, "categorical", choices=tuple(choices), default=default,
                      condition=_cond(when))


def _cond(when):
    if when is None:
        return None
    parent, values = when
    if not isinstance(values, (tuple, list)):
        values = (values,)
    return (parent, tuple(values))


class HyperSpace:
    """An immutable, topologically ordered collection of parameters."""

    def __init__(self, params: Iterable[HyperParam] = ()):
        params = list(params)
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise SpaceError("duplicate parameter names")
        by_name = {p.name: p for p in params}
        for p in params:
            if p.condition and p.condition[0] not in by_name:
                raise SpaceError(f"{p.name}: unknown parent {p.condition[0]!r}")
        # Kahn's algorithm, ties broken by declaration order
        order, placed = [], set()
        pending = list(params)
        while pending:
            progressed = False
            for p in list(pending):
                if p.condition is None or p.condition[0] in placed:
                    order.append(p)
                    placed.add(p.name)
                    pending.remove(p)
                    progressed = True
            if not progressed:
                raise SpaceError("conditions contain a cycle")
        self.params: tuple[HyperParam, ...] = tuple(order)
        self._by_name = MappingProxyType({p.name: p for p in order})

    def __len__(self):
        return len(self.params)

    def __iter__(self):
        return iter(self.params)

    def __contains__(self, name):
        return name in self._by_name

    def __getitem__(self, name) -> HyperParam:
        return self._by_name[name]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)

    def __add__(self, other: "HyperSpace") -> "HyperSpace":
        return HyperSpace(list(self.params) + list(other.params))

    def is_active(self, p: HyperParam, values: Mapping) -> bool:
        if p.condition is None:
            return True
        parent, allowed = p.condition
        v = values.get(parent, INACTIVE)
        return v is not INACTIVE and v in allowed

    def default(self) -> dict:
        out: dict = {}
        for p in self.params:
            out[p.name] = p.default if self.is_active(p, out) else INACTIVE
        return out

    def sample(self, rng: np.random.Generator, restrict: Mapping[str, Sequence] | None = None) -> dict:
        """Top-down sample: parents before children, inactive children marked."""
        restrict = restrict or {}
        out: dict = {}
        for p in self.params:
            if self.is_active(p, out):
                out[p.name] = p.sample(rng, restrict.get(p.name))
            else:
                out[p.name] = INACTIVE
        return out

    def resolve(self, values: Mapping, rng: np.random.Generator,
                restrict: Mapping[str, Sequence] | None = None) -> dict:
        """Repair activity after an edit: sample newly active, blank newly inactive."""
        restrict = restrict or {}
        out: dict = {}
        for p in self.params:
            v = values.get(p.name, INACTIVE)
            if self.is_active(p, out):
                out[p.name] = v if v is not INACTIVE else p.sample(rng, restrict.get(p.name))
            else:
                out[p.name] = INACTIVE
        return out

    def mutate(self, values: Mapping, rng: np.random.Generator,
               restrict: Mapping[str, Sequence] | None = None) -> dict:
        """Change one active parameter, then re-resolve its descendants."""
        restrict = restrict or {}
        active = [p for p in self.params if values.get(p.name, INACTIVE) is not INACTIVE]
        if not active:
            return dict(values)
        p = active[int(rng.integers(len(active)))]
        new = dict(values)
        if p.is_numeric:
            u = p.to_unit(values[p.name]) + rng.normal(0.0, 0.2)
            new[p.name] = p.from_unit(min(1.0, max(0.0, u)))
        else:
            allowed = restrict.get(p.name)
            levels = [c for c in p.choices if c != values[p.name]
                      and (allowed is None or c in allowed)]
            if levels:
                new[p.name] = levels[int(rng.integers(len(levels)))]
        return self.resolve(new, rng, restrict)

    def validate(self, values: Mapping) -> None:
        for p in self.params:
            v = values.get(p.name, INACTIVE)
            if self.is_active(p, values):
                if v is INACTIVE or not p.contains(v):
                    raise SpaceError(f"{p.name}: value {v!r} outside declared range")
            elif v is not INACTIVE:
                raise SpaceError(f"{p.name}: inactive parameter carries a value")

    def distance(self, a: Mapping, b: Mapping) -> int:
        return sum(p.differs(a.get(p.name, INACTIVE), b.get(p.name, INACTIVE))
                   for p in self.params)

    def encode(self, values: Mapping) -> np.ndarray:
        row = np.empty(len(self.params))
        for j, p in enumerate(self.params):
            v = values.get(p.name, INACTIVE)
            if v is INACTIVE:
                row[j] = INACTIVE_CODE
            elif p.is_numeric:
                row[j] = p.to_unit(v)
            else:
                row[j] = float(p.choices.index(v))
        return row

    def to_list(self) -> list[dict]:
        return [p.to_dict() for p in self.params]

    @classmethod
    def from_list(cls, items: Iterable[Mapping]) -> "HyperSpace":
        return cls(HyperParam.from_dict(d) for d in items)


# ----------------------------------------------------------------------
# combinations
# ----------------------------------------------------------------------

FS_PREFIX = "fs."
FS_SWITCH = "fs.search"
NO_FS = "none"


def _plain(v):
    if v is INACTIVE:
        return None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


class Combination:
    """One assignment of values for an algorithm (plus optional feature-selection
    block, stored under ``fs.*`` names)."""

    __slots__ = ("algorithm", "values", "_key")

    def __init__(self, algorithm: str, values: Mapping[str, Any]):
        object.__setattr__(self, "algorithm", algorithm)
        object.__setattr__(self, "values", MappingProxyType(dict(values)))
        key = json.dumps([algorithm, sorted((k, _plain(v)) for k, v in self.values.items())],
                         separators=(",", ":"), default=str)
        object.__setattr__(self, "_key", key)

    def __setattr__(self, *_):
        raise AttributeError("Combination is immutable")

    @property
    def key(self) -> str:
        return self._key

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        return isinstance(other, Combination) and self._key == other._key

    def __repr__(self):
        active = {k: v for k, v in self.values.items() if v is not INACTIVE}
        return f"Combination({self.algorithm!r}, {active})"

    def __getitem__(self, name):
        return self.values[name]

    @property
    def params(self) -> dict:
        """Active algorithm parameters, feature-selection block excluded."""
        return {k: v for k, v in self.values.items()
                if not k.startswith(FS_PREFIX) and v is not INACTIVE}

    @property
    def fs_block(self) -> dict | None:
        """Feature-selection block (all ``fs.*`` entries) or None when unused."""
        sw = self.values.get(FS_SWITCH, INACTIVE)
        if sw is INACTIVE or sw == NO_FS:
            return None
        return {k: v for k, v in self.values.items() if k.startswith(FS_PREFIX)}

    @property
    def uses_fs(self) -> bool:
        return self.fs_block is not None

    def to_dict(self) -> dict:
        """Flat serialization; INACTIVE becomes null."""
        return {"algorithm": self.algorithm,
                "values": {k: _plain(v) for k, v in sorted(self.values.items())}}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Combination":
        return cls(d["algorithm"], {k: (INACTIVE if v is None else v)
                                    for k, v in d["values"].items()})

    def stable_hash(self) -> int:
        import hashlib
        return int.from_bytes(hashlib.blake2b(self._key.encode(), digest_size=8).digest(), "little")


def hamming_distance(a: Combination, b: Combination, space: HyperSpace) -> int:
    """Number of parameters whose values differ under the 1% numeric rule."""
    if a.algorithm != b.algorithm:
        raise SpaceError(f"mismatched spaces: {a.algorithm} vs {b.algorithm}")
    return space.distance(a.values, b.values)


def fs_distance(a: Mapping, b: Mapping, fs_space: HyperSpace) -> int:
    """Hamming distance between two feature-selection blocks."""
    return fs_space.distance(a, b)


# ----------------------------------------------------------------------
# validity rules
# ----------------------------------------------------------------------

_OPS = {">": operator.gt, ">=": operator.ge, "<": operator.lt, "<=": operator.le,
        "==": operator.eq, "!=": operator.ne}


@dataclass(frozen=True)
class ValidityRule:
    """Data-driven predicate over (combination, dataset metadata).

    ``when`` maps a parameter name to the value(s) that trigger the rule;
    ``meta`` maps a metadata key (``n``, ``p``, ``n_classes``) to
    ``(op, threshold)``. All clauses must hold for the rule to match.
    """

    id: str
    verdict: str  # "invalid" | "infeasible"
    reason: str
    algorithm: str | None = None
    when: Mapping[str, tuple] = field(default_factory=dict)
    meta: Mapping[str, tuple[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in ("invalid", "infeasible"):
            raise SpaceError(f"rule {self.id}: verdict must be invalid or infeasible")
        when = {k: tuple(v) if isinstance(v, (list, tuple)) else (v,)
                for k, v in dict(self.when).items()}
        object.__setattr__(self, "when", MappingProxyType(when))
        meta = {k: (op, float(t)) for k, (op, t) in dict(self.meta).items()}
        for op, _ in meta.values():
            if op not in _OPS:
                raise SpaceError(f"rule {self.id}: unknown operator {op!r}")
        object.__setattr__(self, "meta", MappingProxyType(meta))

    def matches(self, c: Combination, meta: Mapping) -> bool:
        if self.algorithm is not None and c.algorithm != self.algorithm:
            return False
        for name, allowed in self.when.items():
            v = c.values.get(name, INACTIVE)
            if v is INACTIVE or v not in allowed:
                return False
        for key, (op, threshold) in self.meta.items():
            if key not in meta or not _OPS[op](meta[key], threshold):
                return False
        return True

    def to_dict(self) -> dict:
        return {"id": self.id, "verdict": self.verdict, "reason": self.reason,
                "algorithm": self.algorithm,
                "when": {k: list(v) for k, v in self.when.items()},
                "meta": {k: [op, t] for k, (op, t) in self.meta.items()}}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ValidityRule":
        return cls(d["id"], d["verdict"], d.get("reason", d["id"]), d.get("algorithm"),
                   d.get("when", {}), {k: tuple(v) for k, v in d.get("meta", {}).items()})


@dataclass(frozen=True)
class Verdict:
    status: str  # "ok" | "invalid" | "infeasible"
    reason: str = ""
    rule_id: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


OK = Verdict("ok")


def check_validity(c: Combination, meta: Mapping, rules: Sequence[ValidityRule]) -> Verdict:
    """First matching rule in registration order decides."""
    for rule in rules:
        if rule.matches(c, meta):
            return Verdict(rule.verdict, rule.reason, rule.id)
    return OK


def load_rules(path) -> list[ValidityRule]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return [ValidityRule.from_dict(d) for d in data.get("rules", data)]


def load_space(path) -> HyperSpace:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return HyperSpace.from_list(data.get("params", data))
