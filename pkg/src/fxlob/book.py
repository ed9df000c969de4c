"""Price-time priority limit order book with integer-tick prices.

The engine is a strictly sequential state machine: one book per session,
no shared mutation. Volumes are integer millions, prices integer ticks.
Cancellations arriving before an order's minimum quote life has elapsed
are deferred until the order becomes eligible, which lets flash-trading
sequences (submit followed by an immediate cancel attempt) play out the
way the platform rules force them to.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left, insort
from collections import deque
from dataclasses import dataclass, field

from .instrument import InstrumentSpec, Side, TraderClass


class BookError(Exception):
    pass


class DuplicateOrderIdError(BookError):
    pass


class UnknownOrderError(BookError):
    pass


@dataclass(eq=False)
class Order:
    """A resting or incoming limit order. ``volume`` is mutated in place
    as the order is filled or partially cancelled; queue position is keyed
    by object identity."""

    id: int
    side: Side
    price: int
    volume: int
    submit_time: int  # ms
    trader_class: TraderClass = TraderClass.ALGO

    def __post_init__(self) -> None:
        if self.price < 1:
            raise ValueError("order price must be >= 1 tick")
        if self.volume < 1:
            raise ValueError("order volume must be >= 1 million")


@dataclass(frozen=True)
class Trade:
    """One fill. ``aggressor`` is the incoming side; the fill rests on the
    opposite (maker) book side, whose price conventions apply to it."""

    time: int  # ms
    aggressor: Side
    price: int
    volume: int

    @property
    def book_side(self) -> Side:
        return self.aggressor.opposite


@dataclass(frozen=True)
class DepthSnapshot:
    """Ten best visible levels per side at the end of a time slice.

    ``bids`` are (price, volume) pairs in descending price order, ``asks``
    ascending; volume is aggregated over resting orders at the price.
    """

    slice: int
    bids: tuple[tuple[int, int], ...]
    asks: tuple[tuple[int, int], ...]

    @property
    def best_bid(self) -> int | None:
        return self.bids[0][0] if self.bids else None

    @property
    def best_ask(self) -> int | None:
        return self.asks[0][0] if self.asks else None

    @property
    def spread(self) -> int | None:
        if self.bids and self.asks:
            return self.asks[0][0] - self.bids[0][0]
        return None


@dataclass(frozen=True)
class CancelOutcome:
    """Result of a cancel request.

    ``applied`` is False when the minimum quote life deferred the request;
    the cancellation then takes effect at ``effective_time``.
    """

    order_id: int
    applied: bool
    effective_time: int
    cancelled_volume: int = 0
    removed: bool = False


@dataclass(frozen=True)
class MaturedCancel:
    """A deferred cancel that has now been applied by ``advance``."""

    time: int
    order: Order
    cancelled_volume: int
    price: int
    removed: bool


DEPTH_LEVELS = 10


class _SideState:
    """Per-side book state: FIFO queues per price plus aggregates."""

    __slots__ = ("queues", "level_volume", "prices")

    def __init__(self) -> None:
        self.queues: dict[int, deque[Order]] = {}
        self.level_volume: dict[int, int] = {}
        self.prices: list[int] = []  # ascending

    def add(self, order: Order) -> None:
        q = self.queues.get(order.price)
        if q is None:
            self.queues[order.price] = deque((order,))
            self.level_volume[order.price] = order.volume
            insort(self.prices, order.price)
        else:
            q.append(order)
            self.level_volume[order.price] += order.volume

    def reduce(self, order: Order, volume: int) -> None:
        order.volume -= volume
        self.level_volume[order.price] -= volume
        if order.volume == 0:
            q = self.queues[order.price]
            q.remove(order)
            if not q:
                self._drop_level(order.price)

    def pop_head(self, price: int) -> None:
        q = self.queues[price]
        q.popleft()
        if not q:
            self._drop_level(price)

    def _drop_level(self, price: int) -> None:
        del self.queues[price]
        del self.level_volume[price]
        i = bisect_left(self.prices, price)
        del self.prices[i]


class _RestingIndex:
    """Uniformly sampleable pool of resting order ids per (side, class).

    Swap-remove keeps membership updates O(1) and the iteration order a
    pure function of the operation sequence, which keeps session replay
    deterministic.
    """

    __slots__ = ("ids", "pos")

    def __init__(self) -> None:
        self.ids: dict[tuple[Side, TraderClass], list[int]] = {
            (s, c): [] for s in Side for c in TraderClass
        }
        self.pos: dict[int, int] = {}

    def add(self, order: Order) -> None:
        pool = self.ids[(order.side, order.trader_class)]
        self.pos[order.id] = len(pool)
        pool.append(order.id)

    def remove(self, order: Order) -> None:
        pool = self.ids[(order.side, order.trader_class)]
        i = self.pos.pop(order.id)
        last = pool.pop()
        if last != order.id:
            pool[i] = last
            self.pos[last] = i

    def pool(self, side: Side, trader_class: TraderClass) -> list[int]:
        return self.ids[(side, trader_class)]


class Book:
    """FIFO limit order book for a single instrument.

    All mutating operations take millisecond timestamps from the caller;
    the book never reads a clock. ``advance`` must be called with a
    monotonically nondecreasing time to release deferred cancellations.
    """

    def __init__(self, instrument: InstrumentSpec) -> None:
        self.instrument = instrument
        self._sides: dict[Side, _SideState] = {Side.BID: _SideState(), Side.ASK: _SideState()}
        self._orders: dict[int, Order] = {}
        self._resting = _RestingIndex()
        self._deferred: list[tuple[int, int, int, int | None]] = []  # (eff_time, seq, id, vol)
        self._seq = 0
        self.trade_log: list[Trade] = []

    # -- views ---------------------------------------------------------

    def best_bid(self) -> int | None:
        prices = self._sides[Side.BID].prices
        return prices[-1] if prices else None

    def best_ask(self) -> int | None:
        prices = self._sides[Side.ASK].prices
        return prices[0] if prices else None

    def level_count(self, side: Side) -> int:
        return len(self._sides[side].prices)

    def has_level(self, side: Side, price: int) -> bool:
        return price in self._sides[side].queues

    def level_volume(self, side: Side, price: int) -> int:
        return self._sides[side].level_volume.get(price, 0)

    def resting_order(self, order_id: int) -> Order | None:
        return self._orders.get(order_id)

    def resting_pool(self, side: Side, trader_class: TraderClass) -> list[int]:
        """Order ids resting on ``side`` for ``trader_class`` (live view)."""
        return self._resting.pool(side, trader_class)

    def snapshot(self, slice_index: int) -> DepthSnapshot:
        """Ten best levels per side; deeper levels are invisible."""
        bid = self._sides[Side.BID]
        ask = self._sides[Side.ASK]
        bids = tuple(
            (p, bid.level_volume[p]) for p in reversed(bid.prices[-DEPTH_LEVELS:])
        )
        asks = tuple((p, ask.level_volume[p]) for p in ask.prices[:DEPTH_LEVELS])
        return DepthSnapshot(slice=slice_index, bids=bids, asks=asks)

    def total_volume(self, side: Side) -> int:
        return sum(self._sides[side].level_volume.values())

    # -- mutating operations --------------------------------------------

    def submit_limit(self, order: Order) -> tuple[list[Trade], Order | None]:
        """Match a crossing limit order, rest any remainder.

        Returns the fills (aggressor = the incoming order's side) and the
        resting remainder, or None if fully executed.
        """
        if order.id in self._orders:
            raise DuplicateOrderIdError(f"order id {order.id} already resting")
        trades = self._match(order.side, order.volume, order.submit_time, limit_price=order.price)
        filled = sum(t.volume for t in trades)
        if filled == order.volume:
            return trades, None
        order.volume -= filled
        self._sides[order.side].add(order)
        self._orders[order.id] = order
        self._resting.add(order)
        return trades, order

    def submit_market(self, aggressor: Side, volume: int, now: int) -> tuple[list[Trade], bool]:
        """Walk the opposite side best-first. The unfilled remainder is
        discarded; returns (fills, exhausted_liquidity)."""
        if volume < 1:
            raise ValueError("market volume must be >= 1")
        trades = self._match(aggressor, volume, now, limit_price=None)
        filled = sum(t.volume for t in trades)
        return trades, filled < volume

    def cancel(self, order_id: int, now: int, volume: int | None = None) -> CancelOutcome:
        """Cancel a resting order, fully or partially.

        Partial cancels keep queue position. Requests younger than the
        instrument's minimum quote life are deferred, not rejected: they
        take effect the moment the order becomes eligible.
        """
        order = self._orders.get(order_id)
        if order is None:
            raise UnknownOrderError(f"no resting order with id {order_id}")
        eligible_at = order.submit_time + self.instrument.min_quote_life_ms
        if now < eligible_at:
            self._seq += 1
            heapq.heappush(self._deferred, (eligible_at, self._seq, order_id, volume))
            return CancelOutcome(order_id=order_id, applied=False, effective_time=eligible_at)
        cancelled, removed = self._apply_cancel(order, volume)
        return CancelOutcome(
            order_id=order_id,
            applied=True,
            effective_time=now,
            cancelled_volume=cancelled,
            removed=removed,
        )

    def advance(self, now: int) -> list[MaturedCancel]:
        """Apply deferred cancels whose eligibility time has passed.

        Requests whose order was executed or otherwise removed in the
        meantime are dropped silently.
        """
        matured: list[MaturedCancel] = []
        while self._deferred and self._deferred[0][0] <= now:
            eff, _, order_id, volume = heapq.heappop(self._deferred)
            order = self._orders.get(order_id)
            if order is None:
                continue
            price = order.price
            cancelled, removed = self._apply_cancel(order, volume)
            matured.append(
                MaturedCancel(
                    time=eff, order=order, cancelled_volume=cancelled, price=price, removed=removed
                )
            )
        return matured

    def next_deferred_time(self) -> int | None:
        return self._deferred[0][0] if self._deferred else None

    # -- internals -------------------------------------------------------

    def _apply_cancel(self, order: Order, volume: int | None) -> tuple[int, bool]:
        state = self._sides[order.side]
        if volume is None or volume >= order.volume:
            cancelled = order.volume
            state.reduce(order, cancelled)
            del self._orders[order.id]
            self._resting.remove(order)
            return cancelled, True
        state.reduce(order, volume)
        return volume, False

    def _match(self, aggressor: Side, volume: int, now: int, limit_price: int | None) -> list[Trade]:
        opposite = self._sides[aggressor.opposite]
        trades: list[Trade] = []
        remaining = volume
        while remaining > 0 and opposite.prices:
            best = opposite.prices[0] if aggressor is Side.BID else opposite.prices[-1]
            if limit_price is not None:
                if aggressor is Side.BID and best > limit_price:
                    break
                if aggressor is Side.ASK and best < limit_price:
                    break
            head = opposite.queues[best][0]
            fill = min(remaining, head.volume)
            remaining -= fill
            trade = Trade(time=now, aggressor=aggressor, price=best, volume=fill)
            trades.append(trade)
            self.trade_log.append(trade)
            if fill == head.volume:
                del self._orders[head.id]
                self._resting.remove(head)
                head.volume = 0
                opposite.level_volume[best] -= fill
                opposite.pop_head(best)
            else:
                head.volume -= fill
                opposite.level_volume[best] -= fill
        return trades
