"""Uncertainty rankings compared in the harnesses."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .imprecise import mmi_pi_rows, mmi_tv_rows
from .transducer import set_sizes


class StrategyKind(str, enum.Enum):
    MMI_PI = "MMI_PI"
    MMI_TV = "MMI_TV"
    SET_SIZE = "SET_SIZE"
    RANDOM = "RANDOM"  # sanity floor, not one of the conformal measures


@dataclass(frozen=True)
class Strategy:
    kind: StrategyKind
    alpha: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", StrategyKind(self.kind))
        if self.kind is StrategyKind.SET_SIZE:
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise ValueError("SET_SIZE needs alpha in (0, 1)")
        elif self.alpha is not None:
            raise ValueError(f"{self.kind.value} takes no alpha")

    @property
    def name(self) -> str:
        if self.kind is StrategyKind.SET_SIZE:
            return f"size@{self.alpha:g}"
        return self.kind.value.lower()

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        """``mmi_pi``, ``mmi_tv``, ``random`` or ``size@<alpha>``."""
        t = text.strip().lower()
        if t.startswith("size@"):
            return cls(StrategyKind.SET_SIZE, float(t[5:]))
        try:
            return cls(StrategyKind(t.upper()))
        except ValueError:
            raise ValueError(f"unknown strategy {text!r}") from None

    def uncertainty(self, P_consonant: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
        """Per-row epistemic uncertainty; larger means more uncertain."""
        if self.kind is StrategyKind.MMI_PI:
            return mmi_pi_rows(P_consonant)
        if self.kind is StrategyKind.MMI_TV:
            return mmi_tv_rows(P_consonant)
        if self.kind is StrategyKind.SET_SIZE:
            return set_sizes(P_consonant, self.alpha).astype(float)
        if rng is None:
            raise ValueError("RANDOM strategy needs an rng")
        return rng.random(P_consonant.shape[0])


PAPER_STRATEGIES = ("mmi_tv", "mmi_pi", "size@0.01", "size@0.05", "size@0.1", "size@0.2", "size@0.3")


def parse_strategies(items) -> list[Strategy]:
    if isinstance(items, str):
        items = [s for s in items.split(",") if s.strip()]
    return [Strategy.parse(s) for s in items]
