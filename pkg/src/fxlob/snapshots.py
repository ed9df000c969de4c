"""Columnar storage for per-slice depth snapshots.

A session emits a snapshot only for slices whose visible ten-level state
changed; the series is therefore a step function over slice indices. A
full trading day is a few hundred thousand states, so they are kept as
two numpy arrays rather than per-slice objects. Missing levels are stored
as zeros (0 is not a valid tick price).
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

from .book import DEPTH_LEVELS, DepthSnapshot
from .instrument import Side

_W = DEPTH_LEVELS  # columns per field block

# data row layout: [bid prices x10 | bid volumes x10 | ask prices x10 | ask volumes x10]
_BP, _BV, _AP, _AV = 0, _W, 2 * _W, 3 * _W


def _pack(snap: DepthSnapshot) -> np.ndarray:
    row = np.zeros(4 * _W, dtype=np.int32)
    for i, (p, v) in enumerate(snap.bids[:_W]):
        row[_BP + i] = p
        row[_BV + i] = v
    for i, (p, v) in enumerate(snap.asks[:_W]):
        row[_AP + i] = p
        row[_AV + i] = v
    return row


def _unpack(slice_index: int, row: np.ndarray) -> DepthSnapshot:
    bids = tuple(
        (int(row[_BP + i]), int(row[_BV + i])) for i in range(_W) if row[_BP + i] > 0
    )
    asks = tuple(
        (int(row[_AP + i]), int(row[_AV + i])) for i in range(_W) if row[_AP + i] > 0
    )
    return DepthSnapshot(slice=slice_index, bids=bids, asks=asks)


class SnapshotSeries:
    """Immutable sequence of visible book states keyed by slice index.

    ``total_slices`` bounds the session; the state stored at slice s is in
    force from s until the next stored slice (carry-forward semantics).
    """

    def __init__(self, slices: np.ndarray, data: np.ndarray, total_slices: int) -> None:
        if len(slices) != len(data):
            raise ValueError("slices and data length mismatch")
        if len(slices) and total_slices <= int(slices[-1]):
            raise ValueError("total_slices must exceed the last stored slice")
        self.slices = np.asarray(slices, dtype=np.int64)
        self.data = np.asarray(data, dtype=np.int32)
        self.total_slices = int(total_slices)

    @classmethod
    def from_snapshots(cls, snaps: Iterable[DepthSnapshot], total_slices: int) -> "SnapshotSeries":
        snaps = list(snaps)
        slices = np.array([s.slice for s in snaps], dtype=np.int64)
        if len(slices) > 1 and np.any(np.diff(slices) <= 0):
            raise ValueError("snapshot slices must be strictly increasing")
        data = (
            np.stack([_pack(s) for s in snaps])
            if snaps
            else np.empty((0, 4 * _W), dtype=np.int32)
        )
        return cls(slices, data, total_slices)

    def __len__(self) -> int:
        return len(self.slices)

    def state(self, i: int) -> DepthSnapshot:
        return _unpack(int(self.slices[i]), self.data[i])

    def iter_snapshots(self) -> Iterator[DepthSnapshot]:
        for i in range(len(self.slices)):
            yield self.state(i)

    def index_before_slice(self, slice_index: int) -> int:
        """Index of the state in force just before ``slice_index`` begins,
        i.e. the last stored slice strictly below it; -1 if none."""
        return int(np.searchsorted(self.slices, slice_index, side="left")) - 1

    def state_at(self, slice_index: int) -> DepthSnapshot | None:
        """State in force at the end of ``slice_index`` (carry-forward)."""
        i = int(np.searchsorted(self.slices, slice_index, side="right")) - 1
        if i < 0:
            return None
        return self.state(i)

    def dwell(self) -> np.ndarray:
        """Number of slices each stored state stays in force."""
        if not len(self.slices):
            return np.empty(0, dtype=np.int64)
        return np.diff(np.append(self.slices, self.total_slices))

    def sample_indices(self, period_slices: int, offset: int = 0) -> np.ndarray:
        """State indices in force at slices offset, offset+period, ...

        Sample points before the first stored state are dropped.
        """
        if period_slices < 1:
            raise ValueError("period_slices must be >= 1")
        points = np.arange(offset, self.total_slices, period_slices)
        idx = np.searchsorted(self.slices, points, side="right") - 1
        return idx[idx >= 0]

    # Column views used by the vectorised analytics.

    def prices(self, side: Side) -> np.ndarray:
        off = _BP if side is Side.BID else _AP
        return self.data[:, off : off + _W]

    def volumes(self, side: Side) -> np.ndarray:
        off = _BV if side is Side.BID else _AV
        return self.data[:, off : off + _W]

    def best_prices(self, side: Side) -> np.ndarray:
        """Best price per stored state, 0 where the side is empty."""
        return self.prices(side)[:, 0]


class SeriesBuilder:
    """Accumulates states during a session, deduplicating no-ops."""

    def __init__(self) -> None:
        self._slices: list[int] = []
        self._rows: list[np.ndarray] = []
        self._last: np.ndarray | None = None

    def add(self, snap: DepthSnapshot) -> bool:
        """Store ``snap`` unless it equals the last stored visible state.
        Returns True when stored."""
        row = _pack(snap)
        if self._last is not None and np.array_equal(row, self._last):
            return False
        if self._slices and snap.slice <= self._slices[-1]:
            raise ValueError("snapshots must be added in increasing slice order")
        self._slices.append(snap.slice)
        self._rows.append(row)
        self._last = row
        return True

    def build(self, total_slices: int) -> SnapshotSeries:
        data = (
            np.stack(self._rows) if self._rows else np.empty((0, 4 * _W), dtype=np.int32)
        )
        return SnapshotSeries(np.array(self._slices, dtype=np.int64), data, total_slices)
