"""Statistics over order-flow events and snapshot series.

Every operation accepts either generated ground-truth events or events
recovered from the feed: anything with ``slice``, ``kind``, ``side``,
``price`` and ``volume`` attributes works, so reconstruction fidelity can
be judged by running identical computations on both streams. Generated
market orders and recovered trades land in the same "market" bucket.

Snapshot-based statistics weight each stored state by the number of
slices it stays in force, which is the same thing as sampling every
0.1 s slice of the step function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaincc, zeta

from .book import Trade
from .instrument import EventKind, Side, last_digit
from .snapshots import SnapshotSeries

CLASS_NAMES = ("limit", "cancel", "market")
_CLASS_OF_KIND = {
    EventKind.LIMIT: 0,
    EventKind.CANCEL: 1,
    EventKind.MARKET: 2,
    EventKind.TRADE: 2,
}
# 6-type ordering shared with the generator: ask block then bid block.
TYPE_NAMES = ("limit_ask", "cancel_ask", "market_ask", "limit_bid", "cancel_bid", "market_bid")


def event_sign(kind: EventKind, side: Side) -> int:
    """+1 for buy interest, -1 for sell. Bid-side limit orders and
    cancellations are buy interest; for market orders it is the ask side
    (the side a buyer consumes)."""
    if _CLASS_OF_KIND[kind] == 2:
        return 1 if side is Side.ASK else -1
    return 1 if side is Side.BID else -1


@dataclass
class _EventTable:
    slice: np.ndarray
    cls: np.ndarray  # 0 limit, 1 cancel, 2 market/trade
    is_bid: np.ndarray
    price: np.ndarray  # -1 where absent
    volume: np.ndarray

    def __len__(self) -> int:
        return len(self.slice)


def _table(events: Iterable) -> _EventTable:
    rows = [
        (
            e.slice,
            _CLASS_OF_KIND[e.kind],
            1 if e.side is Side.BID else 0,
            -1 if e.price is None else e.price,
            e.volume,
        )
        for e in events
    ]
    arr = np.asarray(rows, dtype=np.int64).reshape(-1, 5)
    return _EventTable(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], arr[:, 4])


# -- generic histogram ----------------------------------------------------


@dataclass(frozen=True)
class Histogram:
    """Normalised histogram over integer values."""

    values: np.ndarray
    counts: np.ndarray

    def __post_init__(self) -> None:
        if len(self.values) != len(self.counts):
            raise ValueError("values and counts length mismatch")

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def freqs(self) -> np.ndarray:
        n = self.n
        return self.counts / n if n else self.counts.astype(float)

    def freq_at(self, value: int) -> float:
        i = np.searchsorted(self.values, value)
        if i < len(self.values) and self.values[i] == value:
            return float(self.freqs[i])
        return 0.0

    @property
    def mode(self) -> int:
        return int(self.values[int(np.argmax(self.counts))])

    def local_modes(self) -> list[int]:
        """Values strictly above both present-or-absent neighbours."""
        out = []
        for i, v in enumerate(self.values):
            f = self.freqs[i]
            if f > self.freq_at(int(v) - 1) and f > self.freq_at(int(v) + 1):
                out.append(int(v))
        return out

    @classmethod
    def from_values(cls, values: np.ndarray, weights: np.ndarray | None = None) -> "Histogram":
        if weights is None:
            uniq, counts = np.unique(np.asarray(values, dtype=np.int64), return_counts=True)
            return cls(uniq, counts)
        uniq, inv = np.unique(np.asarray(values, dtype=np.int64), return_inverse=True)
        counts = np.zeros(len(uniq), dtype=np.int64)
        np.add.at(counts, inv, np.asarray(weights, dtype=np.int64))
        return cls(uniq, counts)


# -- book morphology ------------------------------------------------------


def average_shape(
    snapshots: SnapshotSeries, side: Side, max_distance: int = 50
) -> np.ndarray:
    """Time-averaged visible volume by tick distance from the same-side
    best quote. Distances beyond the visible window average in as zeros,
    so deep values understate the true book by construction.
    """
    if len(snapshots) == 0:
        raise ValueError("empty snapshot series")
    w = snapshots.dwell().astype(float)
    prices = snapshots.prices(side)
    vols = snapshots.volumes(side)
    best = prices[:, 0]
    alive = best > 0
    if not alive.any():
        raise ValueError(f"no snapshots with a {side.value} side")
    dist = (prices - best[:, None]) if side is Side.ASK else (best[:, None] - prices)
    valid = (prices > 0) & alive[:, None] & (dist >= 0) & (dist <= max_distance)
    acc = np.zeros(max_distance + 1)
    np.add.at(acc, dist[valid], (vols * w[:, None])[valid])
    return acc / w[alive].sum()


def average_gap(snapshots: SnapshotSeries, side: Side) -> np.ndarray:
    """Mean tick gap between adjacent visible levels; entry k is the gap
    between levels k+1 and k+2 (zero-indexed from the best). States with
    fewer than two levels at that depth are skipped; NaN where no state
    ever had them."""
    if len(snapshots) == 0:
        raise ValueError("empty snapshot series")
    w = snapshots.dwell().astype(float)
    prices = snapshots.prices(side)
    a, b = prices[:, 1:], prices[:, :-1]
    gaps = (a - b) if side is Side.ASK else (b - a)
    valid = (a > 0) & (b > 0)
    num = (np.where(valid, gaps, 0) * w[:, None]).sum(axis=0)
    den = (valid * w[:, None]).sum(axis=0)
    with np.errstate(invalid="ignore"):
        return np.where(den > 0, num / den, np.nan)


def spread_distribution(snapshots: SnapshotSeries, sample_period_s: float = 1.0) -> Histogram:
    """Histogram of the bid-ask spread sampled at a fixed period."""
    period = max(1, int(round(sample_period_s * 10)))
    idx = snapshots.sample_indices(period)
    bb = snapshots.best_prices(Side.BID)[idx]
    ba = snapshots.best_prices(Side.ASK)[idx]
    ok = (bb > 0) & (ba > 0)
    return Histogram.from_values(ba[ok] - bb[ok])


# -- placement ------------------------------------------------------------


@dataclass(frozen=True)
class PlacementResult:
    histogram: Histogram
    skipped: int  # limit orders with no same-side best quote before them


def _placement_deltas(
    limit_slices: np.ndarray,
    limit_is_bid: np.ndarray,
    limit_prices: np.ndarray,
    snapshots: SnapshotSeries,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Delta (in ticks, improvement negative) of each limit order against
    the best quote on record before its slice, plus that best's price.
    Returns (deltas, ref_prices, valid_mask)."""
    ref_idx = np.searchsorted(snapshots.slices, limit_slices, side="left") - 1
    deltas = np.zeros(len(limit_slices), dtype=np.int64)
    refs = np.zeros(len(limit_slices), dtype=np.int64)
    valid = ref_idx >= 0
    safe_idx = np.clip(ref_idx, 0, None)
    for side, is_bid in ((Side.BID, 1), (Side.ASK, 0)):
        best = snapshots.best_prices(side)[safe_idx]
        m = limit_is_bid == is_bid
        refs[m] = best[m]
        if side is Side.BID:
            deltas[m] = best[m] - limit_prices[m]
        else:
            deltas[m] = limit_prices[m] - best[m]
    valid &= refs > 0
    return deltas, refs, valid


def placement_distribution(events: Iterable, snapshots: SnapshotSeries) -> PlacementResult:
    """Distribution of limit-order distance from the prior same-side best
    quote (all orders in a slice share the previous end-of-slice
    reference, matching what a feed observer can compute)."""
    t = _table(events)
    m = t.cls == 0
    deltas, _, valid = _placement_deltas(t.slice[m], t.is_bid[m], t.price[m], snapshots)
    return PlacementResult(
        histogram=Histogram.from_values(deltas[valid]), skipped=int((~valid).sum())
    )


def placement_conditional(
    events: Iterable, snapshots: SnapshotSeries
) -> dict[int, PlacementResult]:
    """Placement distributions conditioned on the last digit of the best
    quote used as reference."""
    t = _table(events)
    m = t.cls == 0
    is_bid = t.is_bid[m]
    deltas, refs, valid = _placement_deltas(t.slice[m], is_bid, t.price[m], snapshots)
    digits = np.where(is_bid == 1, refs % 10, (10 - refs % 10) % 10)
    out: dict[int, PlacementResult] = {}
    for d in range(10):
        sel = valid & (digits == d)
        out[d] = PlacementResult(
            histogram=Histogram.from_values(deltas[sel]), skipped=0
        )
    return out


# -- arrival structure ----------------------------------------------------


def _sample_acf(x: np.ndarray, max_lag: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = len(x)
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    acf = np.zeros(max_lag + 1)
    acf[0] = 1.0
    if denom == 0 or n < 2:
        return acf
    for lag in range(1, min(max_lag, n - 1) + 1):
        acf[lag] = float(np.dot(xc[:-lag], xc[lag:])) / denom
    return acf


def decay_horizon(acf: np.ndarray, band: float, max_lag: int | None = None) -> int | None:
    """First lag L >= 1 from which the ACF has settled inside the
    significance band through lag min(2L, max_lag); None if it never
    settles.

    "Settled" tolerates isolated exceedances: at least 90% of the lags in
    the window must sit inside the band and the window mean must too.
    With a 95% band, one lag in twenty spikes outside by construction, so
    demanding every single lag inside would make the horizon estimate
    lurch to wherever the last noise spike happened to land.
    """
    if max_lag is None:
        max_lag = len(acf) - 1
    inside = np.abs(acf[: max_lag + 1]) <= band
    for lag in range(1, max_lag + 1):
        upto = min(2 * lag, max_lag)
        if inside[lag : upto + 1].mean() >= 0.9:
            return lag
    return None


@dataclass
class CountCorrelations:
    window_s: float
    type_names: tuple[str, ...]
    counts: np.ndarray  # (windows, 6)
    correlation: np.ndarray  # (6, 6)
    acf: np.ndarray  # (max_lag+1, 6)
    cumulative_acf: np.ndarray  # running sums over lags >= 1
    band: float


def event_count_correlations(
    events: Iterable,
    total_slices: int,
    window_s: float = 10.0,
    max_lag: int = 60,
) -> CountCorrelations:
    """Windowed event counts per type: cross-correlation matrix plus
    per-type autocorrelations with a white-noise significance band."""
    t = _table(events)
    win = max(1, int(round(window_s * 10)))
    n_windows = total_slices // win
    if n_windows < 2:
        raise ValueError("session too short for the requested window")
    counts = np.zeros((n_windows, 6))
    w_idx = t.slice // win
    keep = w_idx < n_windows
    type_idx = t.cls[keep] + 3 * t.is_bid[keep]
    np.add.at(counts, (w_idx[keep], type_idx), 1.0)
    with np.errstate(invalid="ignore"):
        corr = np.corrcoef(counts.T)
    acf = np.stack([_sample_acf(counts[:, k], max_lag) for k in range(6)], axis=1)
    cum = np.cumsum(acf[1:], axis=0)
    return CountCorrelations(
        window_s=window_s,
        type_names=TYPE_NAMES,
        counts=counts,
        correlation=corr,
        acf=acf,
        cumulative_acf=cum,
        band=1.96 / math.sqrt(n_windows),
    )


@dataclass
class SignMemory:
    window_s: float
    class_names: tuple[str, ...]
    mean_signs: np.ndarray  # (windows, 3); empty windows as 0
    acf: np.ndarray  # (max_lag+1, 3)
    band: float
    horizons: dict[str, int | None]  # lags

    def horizon_seconds(self, name: str) -> float | None:
        h = self.horizons[name]
        return None if h is None else h * self.window_s


def sign_memory(
    events: Iterable,
    total_slices: int,
    window_s: float = 10.0,
    max_lag: int = 60,
) -> SignMemory:
    """Autocorrelation of the windowed mean order sign per event class,
    with the first lag at which each class's memory is statistically
    gone."""
    t = _table(events)
    win = max(1, int(round(window_s * 10)))
    n_windows = total_slices // win
    if n_windows < 2:
        raise ValueError("session too short for the requested window")
    sign = np.where(t.cls == 2, np.where(t.is_bid == 1, -1, 1), np.where(t.is_bid == 1, 1, -1))
    w_idx = t.slice // win
    keep = w_idx < n_windows
    sums = np.zeros((n_windows, 3))
    nums = np.zeros((n_windows, 3))
    np.add.at(sums, (w_idx[keep], t.cls[keep]), sign[keep].astype(float))
    np.add.at(nums, (w_idx[keep], t.cls[keep]), 1.0)
    with np.errstate(invalid="ignore"):
        means = np.where(nums > 0, sums / np.maximum(nums, 1), 0.0)
    acf = np.stack([_sample_acf(means[:, k], max_lag) for k in range(3)], axis=1)
    band = 1.96 / math.sqrt(n_windows)
    horizons = {
        name: decay_horizon(acf[:, k], band) for k, name in enumerate(CLASS_NAMES)
    }
    return SignMemory(
        window_s=window_s,
        class_names=CLASS_NAMES,
        mean_signs=means,
        acf=acf,
        band=band,
        horizons=horizons,
    )


# -- digit clustering -----------------------------------------------------


@dataclass(frozen=True)
class DigitDistribution:
    """Last-digit frequencies with 95% half-widths."""

    counts: np.ndarray  # (10,)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def p_hat(self) -> np.ndarray:
        n = self.n
        return self.counts / n if n else np.zeros(10)

    @property
    def half_widths(self) -> np.ndarray:
        n = self.n
        if n == 0:
            return np.zeros(10)
        p = self.p_hat
        return 1.96 * np.sqrt(p * (1.0 - p) / n)

    def ranking(self) -> list[int]:
        """Digits ordered most frequent first (ties by digit)."""
        return [int(d) for d in np.lexsort((np.arange(10), -self.counts))]


def digit_distribution(prices_with_sides: Iterable[tuple[int, Side]]) -> DigitDistribution:
    counts = np.zeros(10, dtype=np.int64)
    for price, side in prices_with_sides:
        counts[last_digit(price, side)] += 1
    return DigitDistribution(counts)


def digit_distribution_from_events(
    events: Iterable, kinds: tuple[EventKind, ...]
) -> DigitDistribution:
    """Digit distribution of event prices (book-side convention); events
    without a price are ignored."""
    t = _table(events)
    cls_wanted = {_CLASS_OF_KIND[k] for k in kinds}
    m = np.isin(t.cls, list(cls_wanted)) & (t.price > 0)
    d = np.where(t.is_bid[m] == 1, t.price[m] % 10, (10 - t.price[m] % 10) % 10)
    counts = np.bincount(d, minlength=10)[:10]
    return DigitDistribution(counts.astype(np.int64))


def digit_distribution_from_trades(trades: Sequence[Trade]) -> DigitDistribution:
    return digit_distribution((t.price, t.book_side) for t in trades)


@dataclass(frozen=True)
class Chi2Result:
    statistic: float
    dof: int
    p_value: float
    reject_at_1pct: bool
    low_sample: bool


def chi2_uniformity(counts: Sequence[int] | np.ndarray) -> Chi2Result:
    """Pearson chi-squared test of the counts against a uniform law.

    The p-value is the regularized upper incomplete gamma function at
    half the statistic, i.e. the chi-squared tail probability.
    """
    c = np.asarray(counts, dtype=float)
    if c.ndim != 1 or len(c) < 2:
        raise ValueError("counts must be a 1-d vector of at least 2 cells")
    n = float(c.sum())
    if n <= 0:
        raise ValueError("counts must not be all zero")
    expected = n / len(c)
    stat = float(((c - expected) ** 2 / expected).sum())
    dof = len(c) - 1
    p = float(gammaincc(dof / 2.0, stat / 2.0))
    return Chi2Result(
        statistic=stat,
        dof=dof,
        p_value=p,
        reject_at_1pct=p < 0.01,
        low_sample=n < 100,
    )


def barrier_occupancy(
    snapshots: SnapshotSeries, sample_period_s: float = 0.1
) -> dict[Side, DigitDistribution]:
    """How much time each best quote spends on each last digit."""
    period = max(1, int(round(sample_period_s * 10)))
    idx = snapshots.sample_indices(period)
    out: dict[Side, DigitDistribution] = {}
    for side in Side:
        best = snapshots.best_prices(side)[idx]
        best = best[best > 0]
        d = best % 10 if side is Side.BID else (10 - best % 10) % 10
        out[side] = DigitDistribution(np.bincount(d, minlength=10)[:10].astype(np.int64))
    return out


# -- volume laws ----------------------------------------------------------


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    xmin: int
    log_likelihood: float
    n_tail: int

    @property
    def low_sample(self) -> bool:
        return self.n_tail < 50


def fit_discrete_power_law(
    values: Sequence[int] | np.ndarray, xmin: int = 1, select_xmin: bool = False
) -> PowerLawFit:
    """Maximum-likelihood exponent of a discrete power law on v >= xmin.

    The log likelihood is -alpha * sum(log v) - n * log(zeta(alpha, xmin));
    the exponent maximises it by bounded scalar search. With
    ``select_xmin`` the cutoff is chosen by minimising the KS distance
    between the fitted and empirical tail distributions.
    """
    v = np.asarray(values, dtype=np.int64)
    if select_xmin:
        best: PowerLawFit | None = None
        best_ks = np.inf
        for cand in [int(x) for x in np.unique(v)][:20]:
            fit = fit_discrete_power_law(v, xmin=cand)
            if fit.n_tail < 10:
                continue
            ks = _tail_ks(v[v >= cand], fit)
            if ks < best_ks:
                best, best_ks = fit, ks
        if best is None:
            raise ValueError("no viable xmin candidate")
        return best

    tail = v[v >= xmin]
    n = len(tail)
    if n == 0:
        raise ValueError("no observations at or above xmin")
    slog = float(np.log(tail).sum())

    def neg_ll(alpha: float) -> float:
        return alpha * slog + n * math.log(zeta(alpha, xmin))

    res = minimize_scalar(neg_ll, bounds=(1.01, 8.0), method="bounded",
                          options={"xatol": 1e-6})
    return PowerLawFit(
        alpha=float(res.x), xmin=xmin, log_likelihood=-float(res.fun), n_tail=n
    )


def _tail_ks(tail: np.ndarray, fit: PowerLawFit) -> float:
    hi = int(tail.max())
    grid = np.arange(fit.xmin, hi + 1, dtype=float)
    pmf = grid ** (-fit.alpha) / zeta(fit.alpha, fit.xmin)
    cdf_fit = np.cumsum(pmf)
    counts = np.bincount(tail, minlength=hi + 1)[fit.xmin:]
    cdf_emp = np.cumsum(counts) / len(tail)
    return float(np.max(np.abs(cdf_fit - cdf_emp)))


def fit_geometric(values: Sequence[int] | np.ndarray) -> tuple[float, float]:
    """MLE of a geometric law on v >= 1; returns (p, exponential rate)."""
    v = np.asarray(values, dtype=np.int64)
    if len(v) == 0 or v.min() < 1:
        raise ValueError("values must be positive integers")
    p = len(v) / float(v.sum())
    rate = math.inf if p >= 1.0 else -math.log(1.0 - p)
    return p, rate


@dataclass
class VolumeSplit:
    integer_hist: Histogram
    decimal_hist: Histogram
    power_fit: PowerLawFit | None
    geometric_p: float | None
    exponential_rate: float | None
    round_excess: dict[int, float]  # frequency above neighbour interpolation


def volume_split_fit(events: Iterable, round_values: tuple[int, ...] = (5, 10, 15, 20, 25)) -> VolumeSplit:
    """Split limit-order volumes by integer vs non-integer price and fit
    a discrete power law to the first, a geometric law to the second."""
    t = _table(events)
    m = (t.cls == 0) & (t.price > 0)
    integer = t.price[m] % 10 == 0
    v_int = t.volume[m][integer]
    v_dec = t.volume[m][~integer]
    power = fit_discrete_power_law(v_int) if len(v_int) else None
    geom = fit_geometric(v_dec) if len(v_dec) else None
    hist_int = Histogram.from_values(v_int)
    excess = {
        rv: hist_int.freq_at(rv)
        - 0.5 * (hist_int.freq_at(rv - 1) + hist_int.freq_at(rv + 1))
        for rv in round_values
    }
    return VolumeSplit(
        integer_hist=hist_int,
        decimal_hist=Histogram.from_values(v_dec),
        power_fit=power,
        geometric_p=None if geom is None else geom[0],
        exponential_rate=None if geom is None else geom[1],
        round_excess=excess,
    )


# -- small-spread typology -------------------------------------------------


@dataclass(frozen=True)
class SpreadTypology:
    spread: int
    shares: dict[tuple[int, int], float]  # canonical (bid digit, ask digit) -> share
    integer_share: float  # share of samples with an integer best quote
    samples: int


def _canonical_pair(bid_digit: int, ask_digit: int) -> tuple[int, int]:
    # Mirror configurations (roles of bid and ask swapped) are counted
    # together under the lexicographically smaller representative.
    return min((bid_digit, ask_digit), (ask_digit, bid_digit))


def configurations(spread: int) -> list[tuple[int, int]]:
    """Canonical digit configurations a given spread admits."""
    pairs = set()
    for b in range(10):
        a = ((10 - spread % 10) - b) % 10
        pairs.add(_canonical_pair(b, a))
    return sorted(pairs)


def spread_typology(
    snapshots: SnapshotSeries, spreads: tuple[int, ...] = (8, 9)
) -> dict[int, SpreadTypology]:
    """Time shares of (bid digit, ask digit) configurations at small
    spreads, mirror configurations merged."""
    w = snapshots.dwell()
    bb = snapshots.best_prices(Side.BID)
    ba = snapshots.best_prices(Side.ASK)
    alive = (bb > 0) & (ba > 0)
    sp = ba - bb
    out: dict[int, SpreadTypology] = {}
    for s in spreads:
        m = alive & (sp == s)
        total = int(w[m].sum())
        shares: dict[tuple[int, int], float] = {c: 0.0 for c in configurations(s)}
        integer_w = 0
        if total > 0:
            b_dig = bb[m] % 10
            a_dig = (10 - ba[m] % 10) % 10
            wm = w[m]
            for b, a, weight in zip(b_dig, a_dig, wm):
                shares[_canonical_pair(int(b), int(a))] += int(weight)
            shares = {c: x / total for c, x in shares.items()}
            integer_w = int(w[m][(b_dig == 0) | (a_dig == 0)].sum())
        out[s] = SpreadTypology(
            spread=s,
            shares=shares,
            integer_share=integer_w / total if total else 0.0,
            samples=total,
        )
    return out
