"""Synthetic two-population order flow.

Arrivals follow a six-type mutually exciting point process (limit orders,
cancellations and market orders on each book side) simulated exactly by
thinning, so event counts cluster and co-move across types instead of
being independent Poisson streams. Slow two-state preference chains tilt
the bid/ask split of each event class, giving order signs a memory far
longer than the arrival clustering itself.

Prices come from two trader populations: manual traders stick to the old
coarse price grid (full pips, with some weight on half pips) and trade in
broadly distributed sizes with round-number favourites, while algorithmic
traders work at full tick resolution in small sizes, joining the best
quote or stepping one tick ahead of it when it sits on a round price.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import zipf

from .book import Book, Order, Trade
from .errors import ConfigError
from .instrument import EventKind, InstrumentSpec, Side, TraderClass, last_digit
from .snapshots import SeriesBuilder, SnapshotSeries

EVENT_TYPES: tuple[tuple[EventKind, Side], ...] = (
    (EventKind.LIMIT, Side.ASK),
    (EventKind.CANCEL, Side.ASK),
    (EventKind.MARKET, Side.ASK),
    (EventKind.LIMIT, Side.BID),
    (EventKind.CANCEL, Side.BID),
    (EventKind.MARKET, Side.BID),
)
EVENT_TYPE_NAMES = tuple(f"{k.value}_{s.value}" for k, s in EVENT_TYPES)

# Index blocks for sign tilts: (positive-sign type, negative-sign type).
# Buy interest means bid-side limits/cancels but ask-side market orders.
_LIMIT_TILT_PAIRS = ((3, 0), (4, 1))  # limit_bid/limit_ask, cancel_bid/cancel_ask
_MARKET_TILT_PAIR = (2, 5)  # market_ask/market_bid


@dataclass(frozen=True)
class ArrivalModel:
    """Mutually exciting arrival intensities.

    ``excitation[i][j]`` is the jump of type i's intensity caused by a
    type j event; all excitations share one exponential decay rate. The
    process is stationary iff the spectral radius of excitation/decay is
    below one, which is enforced at construction.
    """

    baseline_rates: tuple[float, ...]
    excitation: tuple[tuple[float, ...], ...]
    decay_rate: float
    activity_tilt: float = 0.0  # slow common on/off modulation of all baselines
    activity_timescale_s: float = 120.0

    def __post_init__(self) -> None:
        if len(self.baseline_rates) != 6:
            raise ConfigError("arrivals.baseline_rates must have 6 entries")
        if any(r < 0 for r in self.baseline_rates):
            raise ConfigError("arrivals.baseline_rates must be nonnegative")
        if self.decay_rate <= 0:
            raise ConfigError("arrivals.decay_rate must be > 0")
        a = np.asarray(self.excitation, dtype=float)
        if a.shape != (6, 6):
            raise ConfigError("arrivals.excitation must be a 6x6 matrix")
        if np.any(a < 0):
            raise ConfigError("arrivals.excitation entries must be nonnegative")
        if not 0.0 <= self.activity_tilt < 1.0:
            raise ConfigError("arrivals.activity_tilt must be in [0, 1)")
        if self.activity_timescale_s <= 0:
            raise ConfigError("arrivals.activity_timescale_s must be > 0")
        rho = self.branching_radius
        if rho >= 1.0:
            raise ConfigError(
                f"arrivals unstable: spectral radius of excitation/decay is {rho:.3f} >= 1"
            )

    @property
    def branching_radius(self) -> float:
        a = np.asarray(self.excitation, dtype=float) / self.decay_rate
        return float(np.max(np.abs(np.linalg.eigvals(a))))

    def stationary_rates(self) -> np.ndarray:
        """Long-run event rates per type, events/second."""
        gamma = np.asarray(self.excitation, dtype=float) / self.decay_rate
        return np.linalg.solve(np.eye(6) - gamma, np.asarray(self.baseline_rates, float))


def baselines_for_rates(
    target_rates: Sequence[float],
    excitation: Sequence[Sequence[float]],
    decay_rate: float,
) -> tuple[float, ...]:
    """Baseline vector that makes the stationary rates equal the targets."""
    gamma = np.asarray(excitation, dtype=float) / decay_rate
    mu = (np.eye(6) - gamma) @ np.asarray(target_rates, dtype=float)
    if np.any(mu < 0):
        raise ConfigError(
            "arrivals.target_rates_per_s infeasible: implied baseline would be negative"
        )
    return tuple(float(x) for x in mu)


@dataclass(frozen=True)
class SignPersistence:
    """Slow preferred-side switching per event class.

    Each class (market orders; limit orders and cancellations share one
    chain) carries a two-state preference flipping at rate
    ``sign_switch_factor / timescale``, and the preferred side receives a
    ``(1 + tilt)`` baseline share against ``(1 - tilt)`` for the other.
    """

    market_timescale_s: float = 120.0
    limit_timescale_s: float = 300.0
    market_tilt: float = 0.35
    limit_tilt: float = 0.22
    market_switch_factor: float = 1.1
    limit_switch_factor: float = 1.5

    def __post_init__(self) -> None:
        if self.market_timescale_s <= 0 or self.limit_timescale_s <= 0:
            raise ConfigError("signs timescales must be > 0")
        for name in ("market_tilt", "limit_tilt"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ConfigError(f"signs.{name} must be in [0, 1)")
        if self.market_switch_factor <= 0 or self.limit_switch_factor <= 0:
            raise ConfigError("signs switch factors must be > 0")

    @property
    def market_switch_rate(self) -> float:
        return self.market_switch_factor / self.market_timescale_s

    @property
    def limit_switch_rate(self) -> float:
        return self.limit_switch_factor / self.limit_timescale_s


@dataclass(frozen=True)
class AgentMix:
    """Population split and placement behaviour.

    Step-ahead orders are baits as often as not: with probability
    ``algo_flash_prob`` the submitter schedules its own cancellation a
    moment later, which the minimum quote life then defers to the
    earliest allowed instant. That keeps one-tick improvements frequent
    in the order flow without letting them own the top of the book.
    """

    manual_fraction: float = 0.5
    manual_integer_weight: float = 0.7  # vs half-pip, within the manual grid
    manual_depth_p: float = 0.5  # geometric depth over successive grid prices
    manual_depth_max: int = 4
    manual_improve_prob: float = 0.05
    algo_step_ahead_prob: float = 0.35
    algo_join_prob: float = 0.2
    algo_join_nonround_factor: float = 0.35  # join appetite off round quotes
    algo_join_max_queue: int = 4  # skip joining once the queue is this deep
    algo_tail_p: float = 0.25  # geometric placement depth behind the best, ticks
    algo_tail_max: int = 25
    algo_flash_prob: float = 0.75
    flash_delay_ms_mean: float = 120.0

    def __post_init__(self) -> None:
        for name in (
            "manual_fraction",
            "manual_integer_weight",
            "manual_depth_p",
            "manual_improve_prob",
            "algo_step_ahead_prob",
            "algo_join_prob",
            "algo_join_nonround_factor",
            "algo_tail_p",
            "algo_flash_prob",
        ):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"agents.{name} must be in [0, 1]")
        if self.manual_depth_p == 0.0 or self.algo_tail_p == 0.0:
            raise ConfigError("agents geometric parameters must be > 0")
        if self.manual_depth_max < 0 or self.algo_tail_max < 1:
            raise ConfigError("agents depth caps out of range")
        if self.algo_join_max_queue < 1:
            raise ConfigError("agents.algo_join_max_queue must be >= 1")
        if self.flash_delay_ms_mean <= 0:
            raise ConfigError("agents.flash_delay_ms_mean must be > 0")


@dataclass(frozen=True)
class VolumeModel:
    """Order size laws, in integer millions.

    Manual sizes follow a discrete power law with extra mass on a menu of
    round sizes; algorithmic sizes are geometric with most mass at the
    minimum.
    """

    manual_alpha: float = 2.6
    round_prob: float = 0.12
    round_menu: tuple[int, ...] = (5, 10, 15, 20, 25, 50)
    round_geom_p: float = 0.45
    algo_geom_p: float = 0.8
    algo_market_geom_p: float = 0.55

    def __post_init__(self) -> None:
        if self.manual_alpha <= 1.0:
            raise ConfigError("volumes.manual_alpha must be > 1")
        if not 0.0 <= self.round_prob <= 1.0:
            raise ConfigError("volumes.round_prob must be in [0, 1]")
        for name in ("round_geom_p", "algo_geom_p", "algo_market_geom_p"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ConfigError(f"volumes.{name} must be in (0, 1]")
        if any(v < 1 for v in self.round_menu):
            raise ConfigError("volumes.round_menu must be positive")


@dataclass(frozen=True, slots=True)
class GroundTruthEvent:
    """One generated order-flow event. Market orders carry the book side
    they consume and no price (fills are in the trade log)."""

    time_ms: int
    kind: EventKind
    side: Side
    price: int | None
    volume: int
    trader_class: TraderClass

    @property
    def slice(self) -> int:
        return self.time_ms // 100


@dataclass(frozen=True)
class SessionConfig:
    instrument: InstrumentSpec
    agents: AgentMix
    arrivals: ArrivalModel
    volumes: VolumeModel
    signs: SignPersistence
    seed_mid_ticks: int
    initial_levels: int = 5
    initial_volume: int = 8
    max_events_per_slice: int | None = None
    max_book_levels: int | None = None

    def __post_init__(self) -> None:
        if self.seed_mid_ticks < 100:
            raise ConfigError("seed_mid_ticks must be a realistic positive tick price")
        if self.initial_levels < 1:
            raise ConfigError("initial_levels must be >= 1")


@dataclass
class SessionResult:
    events: list[GroundTruthEvent]
    snapshots: SnapshotSeries
    trades: list[Trade]
    duration_s: float
    seed: int
    resampled_cancels: int = 0
    skipped_events: int = 0

    def counts_by_kind(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for e in self.events:
            key = f"{e.kind.value}_{e.side.value}"
            out[key] = out.get(key, 0) + 1
        return out


class ArrivalProcess:
    """Exact thinning sampler for the tilted mutually exciting process.

    The candidate bound uses the worst-case tilted baselines, so it
    dominates the true intensity for every preference state; with zero
    excitation and zero tilt the sampler degenerates to independent
    Poisson streams with acceptance probability one.
    """

    def __init__(
        self,
        model: ArrivalModel,
        signs: SignPersistence,
        rng: np.random.Generator,
        start_time: float = 0.0,
    ) -> None:
        self._mu = np.asarray(model.baseline_rates, dtype=float)
        self._alpha = np.asarray(model.excitation, dtype=float)
        self._beta = model.decay_rate
        self._signs = signs
        self._activity_tilt = model.activity_tilt
        self._activity_rate = 1.0 / model.activity_timescale_s
        self._rng = rng
        self._t = start_time
        self._g = np.zeros(6)
        self._state = {"market": 1 if rng.random() < 0.5 else -1,
                       "limit": 1 if rng.random() < 0.5 else -1,
                       "activity": 1 if rng.random() < 0.5 else -1}
        self._state_time = start_time
        bound_scale = np.ones(6)
        for pos, neg in _LIMIT_TILT_PAIRS:
            bound_scale[pos] = bound_scale[neg] = 1.0 + signs.limit_tilt
        pos, neg = _MARKET_TILT_PAIR
        bound_scale[pos] = bound_scale[neg] = 1.0 + signs.market_tilt
        bound_scale *= 1.0 + model.activity_tilt
        self._mu_bound = float((self._mu * bound_scale).sum())

    @property
    def time(self) -> float:
        return self._t

    def preferred_sign(self, kind: EventKind) -> int:
        return self._state["market" if kind is EventKind.MARKET else "limit"]

    def _advance_states(self, t: float) -> None:
        dt = t - self._state_time
        if dt <= 0:
            return
        for key, rate in (("market", self._signs.market_switch_rate),
                          ("limit", self._signs.limit_switch_rate),
                          ("activity", self._activity_rate)):
            p_flip = 0.5 * (1.0 - math.exp(-2.0 * rate * dt))
            if self._rng.random() < p_flip:
                self._state[key] = -self._state[key]
        self._state_time = t

    def _tilted_mu(self) -> np.ndarray:
        mu = self._mu.copy()
        s_l = self._state["limit"]
        for pos, neg in _LIMIT_TILT_PAIRS:
            mu[pos] *= 1.0 + self._signs.limit_tilt * s_l
            mu[neg] *= 1.0 - self._signs.limit_tilt * s_l
        s_m = self._state["market"]
        pos, neg = _MARKET_TILT_PAIR
        mu[pos] *= 1.0 + self._signs.market_tilt * s_m
        mu[neg] *= 1.0 - self._signs.market_tilt * s_m
        if self._activity_tilt:
            mu *= 1.0 + self._activity_tilt * self._state["activity"]
        return mu

    def next_arrival(self) -> tuple[float, int]:
        """Next event time (seconds) and type index into EVENT_TYPES."""
        t = self._t
        g = self._g
        rng = self._rng
        while True:
            bound = self._mu_bound + float(g.sum())
            t = t + rng.exponential(1.0 / bound)
            g = g * math.exp(-self._beta * (t - self._t))
            self._t = t  # decayed state is valid at t whether we accept or not
            self._g = g
            self._advance_states(t)
            lam = self._tilted_mu() + g
            total = float(lam.sum())
            u = rng.random() * bound
            if u <= total:
                k = int(np.searchsorted(np.cumsum(lam), u))
                self._g = g + self._alpha[:, k]
                return t, k


class VolumeSampler:
    """Buffered draws from the two size laws (block sampling keeps the
    scipy overhead off the per-event path)."""

    _BLOCK = 8192

    def __init__(self, model: VolumeModel, rng: np.random.Generator) -> None:
        self._model = model
        self._rng = rng
        self._tail: list[int] = []

    def _refill(self) -> None:
        draws = zipf.rvs(self._model.manual_alpha, size=self._BLOCK, random_state=self._rng)
        self._tail = [int(v) for v in draws[::-1]]

    def manual(self) -> int:
        m = self._model
        if self._rng.random() < m.round_prob:
            i = min(self._rng.geometric(m.round_geom_p) - 1, len(m.round_menu) - 1)
            return m.round_menu[i]
        if not self._tail:
            self._refill()
        return self._tail.pop()

    def algo(self) -> int:
        return int(self._rng.geometric(self._model.algo_geom_p))

    def draw(self, trader_class: TraderClass, kind: EventKind = EventKind.LIMIT) -> int:
        if trader_class is TraderClass.MANUAL:
            return self.manual()
        if kind is EventKind.MARKET:
            return int(self._rng.geometric(self._model.algo_market_geom_p))
        return self.algo()


def _truncated_geometric(rng: np.random.Generator, p: float, maximum: int) -> int:
    """Geometric draw on {0, ..., maximum}, renormalised (not clipped)."""
    if maximum == 0:
        return 0
    q = 1.0 - p
    u = rng.random() * (1.0 - q ** (maximum + 1))
    return min(int(math.log1p(-u) / math.log(q)), maximum)


# -- price placement ----------------------------------------------------


def _grid_at_or_below(price: int, digit: int) -> int:
    return price - ((price - digit) % 10)


def _grid_at_or_above(price: int, digit: int) -> int:
    return price + ((digit - price) % 10)


def _manual_price(
    cfg: SessionConfig, book: Book, side: Side, rng: np.random.Generator
) -> int | None:
    """Grid-snapped manual placement near the same-side best."""
    mix = cfg.agents
    ref = _reference_price(cfg, book, side)
    if cfg.instrument.decimal_regime:
        digit = 0 if rng.random() < mix.manual_integer_weight else 5
        grid_step = 10
    else:
        digit = None
        grid_step = 1

    if side is Side.BID:
        anchor = ref if digit is None else _grid_at_or_below(ref, digit)
    else:
        anchor = ref if digit is None else _grid_at_or_above(ref, digit)

    if (digit is None or digit == 0) and rng.random() < mix.manual_improve_prob:
        cand = anchor + grid_step if side is Side.BID else anchor - grid_step
        if _improves_without_crossing(book, side, cand, ref):
            return cand

    depth = _truncated_geometric(rng, mix.manual_depth_p, mix.manual_depth_max)
    price = anchor - depth * grid_step if side is Side.BID else anchor + depth * grid_step
    return price if price >= 1 else None


def _algo_price(
    cfg: SessionConfig, book: Book, side: Side, rng: np.random.Generator
) -> tuple[int | None, bool]:
    """Tick-resolution algorithmic placement: step ahead of round best
    quotes, otherwise join the best or rest a little behind it. Returns
    (price, stepped_ahead)."""
    mix = cfg.agents
    ref = _reference_price(cfg, book, side)
    round_best = True
    integer_best = True
    if cfg.instrument.decimal_regime:
        digit = last_digit(ref, side)
        round_best = digit in (0, 5)
        integer_best = digit == 0
    if round_best and rng.random() < mix.algo_step_ahead_prob:
        cand = ref + 1 if side is Side.BID else ref - 1
        if _improves_without_crossing(book, side, cand, ref):
            return cand, True
    join_p = mix.algo_join_prob
    if not integer_best:
        # Only the deep full-pip queues are worth standing in at any
        # depth; elsewhere a queue is transient and joining it stops
        # paying once a few lots are already ahead.
        join_p *= mix.algo_join_nonround_factor
        if book.level_volume(side, ref) >= mix.algo_join_max_queue:
            join_p = 0.0
    if rng.random() < join_p:
        return ref, False
    delta = 1 + _truncated_geometric(rng, mix.algo_tail_p, mix.algo_tail_max - 1)
    price = ref - delta if side is Side.BID else ref + delta
    return (price if price >= 1 else None), False


def _reference_price(cfg: SessionConfig, book: Book, side: Side) -> int:
    best = book.best_bid() if side is Side.BID else book.best_ask()
    if best is not None:
        return best
    opp = book.best_ask() if side is Side.BID else book.best_bid()
    step = cfg.instrument.pip_in_ticks
    if opp is not None:
        return max(1, opp - step if side is Side.BID else opp + step)
    return cfg.seed_mid_ticks


def _improves_without_crossing(book: Book, side: Side, candidate: int, ref: int) -> bool:
    if candidate < 1:
        return False
    if side is Side.BID:
        if candidate <= ref:
            return False
        opp = book.best_ask()
        return opp is None or candidate < opp
    if candidate >= ref:
        return False
    opp = book.best_bid()
    return opp is None or candidate > opp


# -- session generation --------------------------------------------------


def generate_session(cfg: SessionConfig, duration_s: float, seed: int) -> SessionResult:
    """Run one seeded session and collect events, visible snapshots and
    fills. Output is a pure function of (cfg, duration_s, seed).

    Arrivals start after the first time slice so the initial book state
    is always on record as the slice-0 snapshot.
    """
    if duration_s <= 0:
        raise ConfigError("duration must be > 0")
    rng = np.random.default_rng(seed)
    book = Book(cfg.instrument)
    next_id = _seed_book(book, cfg, rng)

    total_slices = int(round(duration_s * 10))
    duration_ms = total_slices * 100
    arrivals = ArrivalProcess(cfg.arrivals, cfg.signs, rng, start_time=0.1)
    volumes = VolumeSampler(cfg.volumes, rng)
    builder = SeriesBuilder()
    builder.add(book.snapshot(0))

    events: list[GroundTruthEvent] = []
    flash_requests: list[tuple[int, int]] = []  # (due_ms, order_id) heap
    resampled = 0
    skipped = 0
    cur_slice = 0
    last_used_slice = -1

    def roll_to(target_slice: int) -> None:
        nonlocal cur_slice
        if target_slice > cur_slice:
            builder.add(book.snapshot(cur_slice))
            cur_slice = target_slice

    def apply_matured(t_def: int) -> None:
        roll_to(t_def // 100)
        for mc in book.advance(t_def):
            events.append(
                GroundTruthEvent(
                    time_ms=mc.time,
                    kind=EventKind.CANCEL,
                    side=mc.order.side,
                    price=mc.price,
                    volume=mc.cancelled_volume,
                    trader_class=mc.order.trader_class,
                )
            )

    def apply_flash(due_ms: int, order_id: int) -> None:
        order = book.resting_order(order_id)
        if order is None:
            return  # already executed or cancelled
        price = order.price
        roll_to(due_ms // 100)
        outcome = book.cancel(order_id, due_ms)
        if outcome.applied:
            events.append(
                GroundTruthEvent(
                    time_ms=due_ms,
                    kind=EventKind.CANCEL,
                    side=order.side,
                    price=price,
                    volume=outcome.cancelled_volume,
                    trader_class=order.trader_class,
                )
            )

    def flush_pending(before_ms: int) -> None:
        """Apply deferred book cancels and due flash requests, oldest
        first, up to (and including) ``before_ms``."""
        while True:
            t_def = book.next_deferred_time()
            t_fl = flash_requests[0][0] if flash_requests else None
            if t_def is not None and t_def < duration_ms and t_def <= before_ms and (
                t_fl is None or t_def <= t_fl
            ):
                apply_matured(t_def)
                continue
            if t_fl is not None and t_fl < duration_ms and t_fl <= before_ms:
                due, order_id = heapq.heappop(flash_requests)
                apply_flash(due, order_id)
                continue
            return

    while True:
        t, type_idx = arrivals.next_arrival()
        t_ms = int(round(t * 1000))
        if t_ms >= duration_ms:
            break
        flush_pending(t_ms)
        s = t_ms // 100

        if cfg.max_events_per_slice is not None and s == last_used_slice:
            skipped += 1
            continue

        kind, side = EVENT_TYPES[type_idx]
        trader_class = (
            TraderClass.MANUAL
            if rng.random() < cfg.agents.manual_fraction
            else TraderClass.ALGO
        )

        if kind is EventKind.CANCEL:
            pool = book.resting_pool(side, trader_class)
            if not pool:
                kind = EventKind.LIMIT  # nothing to cancel; treat as fresh interest
                resampled += 1
            else:
                order_id = pool[int(rng.integers(len(pool)))]
                price = book.resting_order(order_id).price
                roll_to(s)
                outcome = book.cancel(order_id, t_ms)
                if outcome.applied:
                    events.append(
                        GroundTruthEvent(
                            time_ms=t_ms,
                            kind=EventKind.CANCEL,
                            side=side,
                            price=price,
                            volume=outcome.cancelled_volume,
                            trader_class=trader_class,
                        )
                    )
                    last_used_slice = s
                continue

        if kind is EventKind.LIMIT:
            stepped_ahead = False
            if trader_class is TraderClass.MANUAL:
                price = _manual_price(cfg, book, side, rng)
            else:
                price, stepped_ahead = _algo_price(cfg, book, side, rng)
            if price is None:
                skipped += 1
                continue
            if (
                cfg.max_book_levels is not None
                and not book.has_level(side, price)
                and book.level_count(side) >= cfg.max_book_levels
            ):
                skipped += 1
                continue
            volume = volumes.draw(trader_class)
            roll_to(s)
            order = Order(
                id=next_id,
                side=side,
                price=price,
                volume=volume,
                submit_time=t_ms,
                trader_class=trader_class,
            )
            next_id += 1
            book.submit_limit(order)
            events.append(
                GroundTruthEvent(
                    time_ms=t_ms,
                    kind=EventKind.LIMIT,
                    side=side,
                    price=price,
                    volume=volume,
                    trader_class=trader_class,
                )
            )
            last_used_slice = s
            if stepped_ahead and rng.random() < cfg.agents.algo_flash_prob:
                delay = 1 + int(rng.exponential(cfg.agents.flash_delay_ms_mean))
                heapq.heappush(flash_requests, (t_ms + delay, order.id))
        else:  # MARKET consuming `side`
            volume = volumes.draw(trader_class, EventKind.MARKET)
            roll_to(s)
            fills, _ = book.submit_market(side.opposite, volume, t_ms)
            events.append(
                GroundTruthEvent(
                    time_ms=t_ms,
                    kind=EventKind.MARKET,
                    side=side,
                    price=None,
                    volume=volume,
                    trader_class=trader_class,
                )
            )
            if fills or cfg.max_events_per_slice is None:
                last_used_slice = s

    flush_pending(duration_ms)
    builder.add(book.snapshot(cur_slice))
    snapshots = builder.build(total_slices)
    return SessionResult(
        events=events,
        snapshots=snapshots,
        trades=list(book.trade_log),
        duration_s=duration_s,
        seed=seed,
        resampled_cancels=resampled,
        skipped_events=skipped,
    )


def _seed_book(book: Book, cfg: SessionConfig, rng: np.random.Generator) -> int:
    """Ladder of manual-style resting orders around the seed mid, so the
    session starts from a plausible two-sided book."""
    mid = cfg.seed_mid_ticks
    step = cfg.instrument.pip_in_ticks
    next_id = 1
    for side in (Side.BID, Side.ASK):
        sign = -1 if side is Side.BID else 1
        anchor = mid + sign * step
        for k in range(cfg.initial_levels):
            price = anchor + sign * k * step
            vol = cfg.initial_volume + int(rng.integers(0, 4))
            order = Order(
                id=next_id,
                side=side,
                price=price,
                volume=vol,
                submit_time=0,
                trader_class=TraderClass.MANUAL,
            )
            next_id += 1
            book.submit_limit(order)
            if cfg.instrument.decimal_regime and k < cfg.initial_levels - 1:
                half = price + sign * 5
                order = Order(
                    id=next_id,
                    side=side,
                    price=half,
                    volume=max(1, vol // 6),
                    submit_time=0,
                    trader_class=TraderClass.MANUAL,
                )
                next_id += 1
                book.submit_limit(order)
    return next_id


# -- event and trade files ------------------------------------------------


def write_events(events: Sequence[GroundTruthEvent], path: str | Path) -> None:
    """One event per line: time_ms,kind,side,price_ticks,volume,trader_class
    (market orders have no price, written as '-')."""
    lines = []
    for e in events:
        price = "-" if e.price is None else str(e.price)
        lines.append(
            f"{e.time_ms},{e.kind.value},{e.side.value},{price},{e.volume},{e.trader_class.value}"
        )
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="ascii")


def read_events(path: str | Path) -> list[GroundTruthEvent]:
    events = []
    for line_no, line in enumerate(Path(path).read_text(encoding="ascii").splitlines(), 1):
        parts = line.split(",")
        if len(parts) != 6:
            raise ValueError(f"events file line {line_no}: expected 6 fields")
        t, kind, side, price, volume, cls = parts
        events.append(
            GroundTruthEvent(
                time_ms=int(t),
                kind=EventKind(kind),
                side=Side(side),
                price=None if price == "-" else int(price),
                volume=int(volume),
                trader_class=TraderClass(cls),
            )
        )
    return events


def write_trades(trades: Sequence[Trade], path: str | Path) -> None:
    """One fill per line: time_ms,aggressor,price_ticks,volume."""
    lines = [f"{t.time},{t.aggressor.value},{t.price},{t.volume}" for t in trades]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="ascii")


def read_trades(path: str | Path) -> list[Trade]:
    trades = []
    for line_no, line in enumerate(Path(path).read_text(encoding="ascii").splitlines(), 1):
        parts = line.split(",")
        if len(parts) != 4:
            raise ValueError(f"trades file line {line_no}: expected 4 fields")
        t, agg, price, volume = parts
        trades.append(Trade(time=int(t), aggressor=Side(agg), price=int(price), volume=int(volume)))
    return trades
