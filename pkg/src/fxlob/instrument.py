"""Instrument parameters and integer-tick price conventions.

All prices in this package are integer tick counts. The decimal exchange
rate only appears when formatting output, so price arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Side(Enum):
    """Book side an event acts on.

    Market orders carry the side they consume: a buy aggressor consumes
    the ask side and is therefore an ASK-side market event.
    """

    BID = "bid"
    ASK = "ask"

    @property
    def opposite(self) -> "Side":
        return Side.ASK if self is Side.BID else Side.BID


class TraderClass(Enum):
    MANUAL = "manual"
    ALGO = "algo"


class EventKind(Enum):
    LIMIT = "limit"
    CANCEL = "cancel"
    MARKET = "market"  # generated aggressor order
    TRADE = "trade"    # execution recovered from the feed


@dataclass(frozen=True)
class InstrumentSpec:
    """Tick-grid parameters of a traded pair.

    ``pip_in_ticks`` is 10 for decimal pricing and 1 for pip pricing;
    ``tick_value`` is the exchange-rate size of one tick and
    ``reference_price`` a typical rate used for relative-tick comparisons.
    """

    name: str
    tick_value: float
    pip_in_ticks: int
    reference_price: float
    min_quote_life_ms: int = 0

    def __post_init__(self) -> None:
        if self.tick_value <= 0:
            raise ValueError("tick_value must be > 0")
        if self.pip_in_ticks not in (1, 10):
            raise ValueError("pip_in_ticks must be 1 or 10")
        if self.reference_price <= 0:
            raise ValueError("reference_price must be > 0")
        if self.min_quote_life_ms < 0:
            raise ValueError("min_quote_life_ms must be >= 0")

    @property
    def decimal_regime(self) -> bool:
        return self.pip_in_ticks == 10

    def relative_tick(self) -> float:
        """Tick size divided by the reference price."""
        return self.tick_value / self.reference_price

    def to_decimal(self, ticks: int) -> float:
        """Exchange-rate value of a tick price (output formatting only)."""
        return ticks * self.tick_value


def last_digit(price_ticks: int, side: Side) -> int:
    """Last digit of a price under the side convention.

    Bids use the rightmost tick digit directly. Asks use the tick distance
    to the integer (pip-grid) price above, so that a one-tick improvement
    of an integer best quote reads as digit 1 on both sides. Integer
    prices map to 0 on both sides.
    """
    if price_ticks < 1:
        raise ValueError("price must be >= 1 tick")
    d = price_ticks % 10
    if side is Side.BID:
        return d
    return (10 - d) % 10


def is_integer_price(price_ticks: int) -> bool:
    """True when the price sits on the pip grid (digit 0 on both sides)."""
    return price_ticks % 10 == 0
