"""Queue-length-responsive station pricing.

Prices are a pure function of the current queue length, recomputed on every
queue change, so they fall back toward the base price as a queue drains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class SchemeKind(str, Enum):
    NONE = "none"
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    EXPONENTIAL = "exponential"


class SchemeMode(str, Enum):
    CONTINUOUS = "continuous"
    STEP = "step"


# calibrated so a congested queue of ~7 yields +$2 / +$10 / +$15 above a $5 base
DEFAULT_ALPHA = {
    SchemeKind.NONE: 0.0,
    SchemeKind.LINEAR: 1.0,
    SchemeKind.QUADRATIC: 0.625,
    SchemeKind.EXPONENTIAL: 1.4,
}


@dataclass(frozen=True)
class PricingScheme:
    kind: SchemeKind = SchemeKind.NONE
    alpha: float | None = None
    step_m: int = 3
    mode: SchemeMode = SchemeMode.STEP

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        object.__setattr__(self, "mode", SchemeMode(self.mode))
        if self.alpha is None:
            object.__setattr__(self, "alpha", DEFAULT_ALPHA[self.kind])
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.step_m < 1:
            raise ValueError("step_m must be at least 1")


@dataclass
class PriceState:
    base: float
    current: float

    @classmethod
    def at_base(cls, base: float) -> "PriceState":
        return cls(base=base, current=base)


def price_for_queue(scheme: PricingScheme, base: float, q: int) -> float:
    """Hourly price for a station whose queue currently holds `q` vehicles."""
    if q < 0:
        raise ValueError("queue length must be nonnegative")
    kind, a = scheme.kind, scheme.alpha
    if kind is SchemeKind.NONE:
        return base
    step = scheme.mode is SchemeMode.STEP
    m = scheme.step_m
    if kind is SchemeKind.LINEAR:
        return base + a * (q // m if step else q)
    if kind is SchemeKind.QUADRATIC:
        # the squared length is stepped, not the length itself
        return base + a * ((q * q) // m if step else q * q)
    return base + math.expm1(a * (q // m if step else q))


def on_queue_change(price: PriceState, scheme: PricingScheme, queue_len: int) -> PriceState:
    price.current = price_for_queue(scheme, price.base, queue_len)
    return price
