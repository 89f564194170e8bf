"""Time accounting in wall-clock seconds or deterministic virtual cost units."""

from __future__ import annotations

import time

UNIT_SECONDS = 0.005
"""Real time one virtual cost unit stands for on the calibration machine."""

TICK_SECONDS = 0.02
"""The cost formulas of the learners and feature selectors count ticks of
this length; :data:`TICK_UNITS` converts ticks into virtual units."""

TICK_UNITS = TICK_SECONDS / UNIT_SECONDS


class _Timer:
    __slots__ = ("_virtual", "_t0")

    def __init__(self, virtual: bool):
        self._virtual = virtual
        self._t0 = time.perf_counter()

    def elapsed(self, predicted: float = 0.0) -> float:
        """Predicted cost under the virtual clock, measured seconds otherwise."""
        if self._virtual:
            return float(predicted)
        return time.perf_counter() - self._t0


class Clock:
    """``Clock("virtual")`` charges model-predicted cost units, so identical
    inputs always take identical "time"; ``Clock("wall")`` measures seconds."""

    def __init__(self, mode: str = "virtual"):
        if mode not in ("virtual", "wall"):
            raise ValueError(f"unknown clock mode {mode!r}")
        self.mode = mode

    @property
    def virtual(self) -> bool:
        return self.mode == "virtual"

    def start(self) -> _Timer:
        return _Timer(self.virtual)

    def __repr__(self):
        return f"Clock({self.mode!r})"
