"""Lossy time-sliced feed: conditional depth snapshots plus per-slice deals.

The wire format is line-delimited text, one record per line, prices as
integer ticks. Quote lines carry the ten best levels per side and are
emitted only for slices where the visible state changed; deal lines carry
the extreme-price fill per direction and, optionally, the slice's total
signed volume (buyer-initiated positive):

    Q,<slice>,<nb>,<bp1>,<bv1>,...,<na>,<ap1>,<av1>,...
    D,<slice>,<buy_price|->,<buy_vol|->,<sell_price|->,<sell_vol|->,<total|->

Within a slice the deal line precedes the quote line, which is the state
at the end of the slice. Everything that nets out inside one slice, and
all depth beyond the tenth level, leaves no trace by design.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .book import DEPTH_LEVELS, DepthSnapshot, Trade
from .instrument import Side
from .snapshots import SeriesBuilder, SnapshotSeries


class FeedFormatError(Exception):
    """Malformed feed line; carries the 1-based line number and field."""

    def __init__(self, line_no: int, field: str, message: str) -> None:
        super().__init__(f"line {line_no}, field {field}: {message}")
        self.line_no = line_no
        self.field = field


class FeedTruncationError(Exception):
    def __init__(self, line_no: int) -> None:
        super().__init__(f"feed truncated at line {line_no}")
        self.line_no = line_no


@dataclass(frozen=True)
class QuoteRecord:
    slice: int
    bid_levels: tuple[tuple[int, int], ...]  # descending price
    ask_levels: tuple[tuple[int, int], ...]  # ascending price


@dataclass(frozen=True)
class DealRecord:
    slice: int
    highest_buy: tuple[int, int] | None  # buyer-initiated extreme (price, volume)
    lowest_sell: tuple[int, int] | None  # seller-initiated extreme
    total_signed_volume: int | None = None


Record = QuoteRecord | DealRecord


def build_records(
    snapshots: SnapshotSeries | Iterable[DepthSnapshot],
    trades: Sequence[Trade],
    include_total_volume: bool = True,
) -> list[Record]:
    """Assemble the record stream for a session.

    Quote records are diffed against the previously emitted visible state,
    so re-encoding an already change-compressed series is a no-op twice
    over. Deal records aggregate same-direction fills at the extreme price.
    """
    if isinstance(snapshots, SnapshotSeries):
        snaps = snapshots.iter_snapshots()
    else:
        snaps = iter(snapshots)

    deals = _deal_records(trades, include_total_volume)
    records: list[Record] = []
    prev_visible: tuple | None = ((), ())
    deal_idx = 0
    for snap in snaps:
        visible = (snap.bids, snap.asks)
        while deal_idx < len(deals) and deals[deal_idx].slice <= snap.slice:
            records.append(deals[deal_idx])
            deal_idx += 1
        if visible != prev_visible:
            records.append(QuoteRecord(snap.slice, snap.bids, snap.asks))
            prev_visible = visible
    records.extend(deals[deal_idx:])
    return records


def _deal_records(trades: Sequence[Trade], include_total: bool) -> list[DealRecord]:
    by_slice: dict[int, list[Trade]] = {}
    for t in trades:
        by_slice.setdefault(t.time // 100, []).append(t)
    out = []
    for s in sorted(by_slice):
        buys = [t for t in by_slice[s] if t.aggressor is Side.BID]
        sells = [t for t in by_slice[s] if t.aggressor is Side.ASK]
        hb = None
        if buys:
            p = max(t.price for t in buys)
            hb = (p, sum(t.volume for t in buys if t.price == p))
        ls = None
        if sells:
            p = min(t.price for t in sells)
            ls = (p, sum(t.volume for t in sells if t.price == p))
        total = None
        if include_total:
            total = sum(t.volume for t in buys) - sum(t.volume for t in sells)
        out.append(DealRecord(s, hb, ls, total))
    return out


# -- serialisation ------------------------------------------------------


def _fmt_opt(pair: tuple[int, int] | None) -> list[str]:
    return [str(pair[0]), str(pair[1])] if pair else ["-", "-"]


def serialize_records(records: Iterable[Record]) -> str:
    lines = []
    for r in records:
        if isinstance(r, QuoteRecord):
            parts = ["Q", str(r.slice), str(len(r.bid_levels))]
            for p, v in r.bid_levels:
                parts += [str(p), str(v)]
            parts.append(str(len(r.ask_levels)))
            for p, v in r.ask_levels:
                parts += [str(p), str(v)]
        else:
            parts = ["D", str(r.slice)]
            parts += _fmt_opt(r.highest_buy)
            parts += _fmt_opt(r.lowest_sell)
            parts.append("-" if r.total_signed_volume is None else str(r.total_signed_volume))
        lines.append(",".join(parts))
    return "".join(line + "\n" for line in lines)


class _LineParser:
    """Field cursor over one comma-separated line, with positioned errors."""

    def __init__(self, line_no: int, fields: list[str], truncated: bool) -> None:
        self.line_no = line_no
        self.fields = fields
        self.truncated = truncated
        self.i = 0

    def take(self, name: str) -> str:
        if self.i >= len(self.fields):
            if self.truncated:
                raise FeedTruncationError(self.line_no)
            raise FeedFormatError(self.line_no, name, "missing field")
        v = self.fields[self.i]
        self.i += 1
        return v

    def take_int(self, name: str, minimum: int | None = None) -> int:
        raw = self.take(name)
        try:
            v = int(raw)
        except ValueError:
            raise FeedFormatError(self.line_no, name, f"not an integer: {raw!r}") from None
        if minimum is not None and v < minimum:
            raise FeedFormatError(self.line_no, name, f"must be >= {minimum}, got {v}")
        return v

    def take_opt_pair(self, name: str) -> tuple[int, int] | None:
        p = self.take(f"{name}_price")
        v = self.take(f"{name}_volume")
        if p == "-" and v == "-":
            return None
        if p == "-" or v == "-":
            raise FeedFormatError(self.line_no, name, "price and volume must both be set or '-'")
        try:
            pi, vi = int(p), int(v)
        except ValueError:
            raise FeedFormatError(self.line_no, name, "not an integer") from None
        if pi < 1 or vi < 1:
            raise FeedFormatError(self.line_no, name, "price and volume must be >= 1")
        return pi, vi

    def finish(self) -> None:
        if self.i < len(self.fields):
            raise FeedFormatError(self.line_no, f"field {self.i}", "unexpected trailing fields")


def _parse_levels(lp: _LineParser, name: str, descending: bool) -> tuple[tuple[int, int], ...]:
    n = lp.take_int(f"n_{name}", minimum=0)
    if n > DEPTH_LEVELS:
        raise FeedFormatError(lp.line_no, f"n_{name}", f"at most {DEPTH_LEVELS} levels, got {n}")
    levels = []
    prev = None
    for k in range(n):
        p = lp.take_int(f"{name}_price_{k + 1}", minimum=1)
        v = lp.take_int(f"{name}_volume_{k + 1}", minimum=1)
        if prev is not None and ((p >= prev) if descending else (p <= prev)):
            raise FeedFormatError(
                lp.line_no, f"{name}_price_{k + 1}", "levels out of price order"
            )
        prev = p
        levels.append((p, v))
    return tuple(levels)


def parse_feed_text(text: str) -> list[Record]:
    """Decode a feed; the inverse of ``serialize_records`` on the record
    level. Raises positioned errors on malformed input."""
    records: list[Record] = []
    last_slice = -1
    last_kind: str | None = None
    ends_with_newline = text.endswith("\n") or text == ""
    lines = text.split("\n")
    if ends_with_newline:
        lines = lines[:-1]
    for line_no, line in enumerate(lines, start=1):
        truncated = (line_no == len(lines)) and not ends_with_newline
        if line == "":
            raise FeedFormatError(line_no, "record_type", "empty line")
        lp = _LineParser(line_no, line.split(","), truncated)
        kind = lp.take("record_type")
        if kind == "Q":
            s = lp.take_int("slice", minimum=0)
            bids = _parse_levels(lp, "bid", descending=True)
            asks = _parse_levels(lp, "ask", descending=False)
            lp.finish()
            if s < last_slice or (s == last_slice and last_kind == "Q"):
                raise FeedFormatError(line_no, "slice", "slices out of order")
            records.append(QuoteRecord(s, bids, asks))
        elif kind == "D":
            s = lp.take_int("slice", minimum=0)
            hb = lp.take_opt_pair("highest_buy")
            ls = lp.take_opt_pair("lowest_sell")
            raw_total = lp.take("total_signed_volume")
            lp.finish()
            if raw_total == "-":
                total = None
            else:
                try:
                    total = int(raw_total)
                except ValueError:
                    raise FeedFormatError(
                        line_no, "total_signed_volume", f"not an integer: {raw_total!r}"
                    ) from None
            if hb is None and ls is None:
                raise FeedFormatError(line_no, "highest_buy", "deal record with no deals")
            if s <= last_slice:
                raise FeedFormatError(line_no, "slice", "slices out of order")
            records.append(DealRecord(s, hb, ls, total))
        else:
            raise FeedFormatError(line_no, "record_type", f"unknown record type {kind!r}")
        last_slice = s
        last_kind = kind
    return records


def write_feed(records: Iterable[Record], path: str | Path) -> None:
    Path(path).write_text(serialize_records(records), encoding="ascii")


def read_feed(path: str | Path) -> list[Record]:
    return parse_feed_text(Path(path).read_text(encoding="ascii"))


def quote_series(records: Iterable[Record], total_slices: int | None = None) -> SnapshotSeries:
    """Visible book states carried by a record stream, for running the
    same analytics on decoded feeds as on generated sessions."""
    builder = SeriesBuilder()
    last = -1
    for r in records:
        if isinstance(r, QuoteRecord):
            builder.add(DepthSnapshot(slice=r.slice, bids=r.bid_levels, asks=r.ask_levels))
            last = r.slice
        else:
            last = max(last, r.slice)
    if total_slices is None:
        total_slices = last + 1 if last >= 0 else 0
    return builder.build(total_slices)
