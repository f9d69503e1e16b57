"""Price, return and volatility series, CSV ingestion and window slicing.

Series are small frozen dataclasses wrapping read-only numpy arrays. Node
indices of every downstream graph are row indices; date labels are carried
along as opaque strings.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, replace
from typing import BinaryIO, Literal, Optional, Sequence, Union

import numpy as np

Scale = Literal["raw", "percent"]
VolKind = Literal["historical", "conditional"]


class DataError(ValueError):
    """Invalid input data. ``row`` is the 1-based data row, when known."""

    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise DataError("series values must be one-dimensional")
    arr.setflags(write=False)
    return arr


def _check_labels(labels, n: int):
    if labels is None:
        return None
    labels = tuple(str(x) for x in labels)
    if len(labels) != n:
        raise DataError(f"{len(labels)} labels for {n} values")
    return labels


@dataclass(frozen=True, eq=False)
class _Series:
    values: np.ndarray
    labels: Optional[tuple] = None

    def __len__(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other) -> bool:
        return (
            type(self) is type(other)
            and np.array_equal(self.values, other.values)
            and self.labels == other.labels
            and self._tag() == other._tag()
        )

    def _tag(self):
        return None


@dataclass(frozen=True, eq=False)
class PriceSeries(_Series):
    """Closing prices, strictly positive, at least two of them."""

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        object.__setattr__(self, "labels", _check_labels(self.labels, len(self.values)))
        if len(self.values) < 2:
            raise DataError("a price series needs at least 2 values")
        bad = np.flatnonzero(~(self.values > 0) | ~np.isfinite(self.values))
        if bad.size:
            raise DataError("prices must be positive and finite", row=int(bad[0]) + 1)
        if self.labels is not None:
            for k in range(1, len(self.labels)):
                if not self.labels[k] > self.labels[k - 1]:
                    raise DataError("date labels must be strictly increasing", row=k + 1)


@dataclass(frozen=True, eq=False)
class ReturnSeries(_Series):
    scale: Scale = "percent"

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        object.__setattr__(self, "labels", _check_labels(self.labels, len(self.values)))
        if self.scale not in ("raw", "percent"):
            raise DataError(f"unknown return scale {self.scale!r}")

    def _tag(self):
        return self.scale


@dataclass(frozen=True, eq=False)
class VolatilitySeries(_Series):
    kind: VolKind = "conditional"

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        object.__setattr__(self, "labels", _check_labels(self.labels, len(self.values)))
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise DataError("volatility values must be finite and nonnegative")

    def _tag(self):
        return self.kind


def load_csv(
    source: Union[str, os.PathLike, bytes, BinaryIO],
    price_column: str = "close",
    date_column: Optional[str] = "date",
) -> PriceSeries:
    """Read a UTF-8 CSV with a header row into a :class:`PriceSeries`.

    ``source`` may be a path, raw bytes or a binary stream. Leading lines that
    start with ``#`` are skipped. The date column is optional: when it is
    absent from the header the series carries no labels.
    Row numbers in errors count data rows from 1, excluding the header.
    """
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    elif isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            raw = fh.read()
    else:
        raw = source.read()
    text = raw.decode("utf-8-sig")
    if not text.strip():
        raise DataError("empty CSV input")

    # leading "#" lines carry provenance written by this package
    lines = text.splitlines()
    while lines and lines[0].startswith("#"):
        lines.pop(0)
    if not lines:
        raise DataError("CSV has no header row")
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    if price_column not in header:
        raise DataError(f"missing price column {price_column!r} (header: {header})")
    p_idx = header.index(price_column)
    d_idx = header.index(date_column) if date_column and date_column in header else None

    prices, labels = [], []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            price = float(row[p_idx])
        except (IndexError, ValueError):
            raise DataError(f"cannot parse price {row[p_idx:p_idx + 1]}", row=row_no) from None
        if not (price > 0) or not np.isfinite(price):
            raise DataError(f"non-positive price {price}", row=row_no)
        prices.append(price)
        if d_idx is not None:
            labels.append(row[d_idx].strip())
    if len(prices) < 2:
        raise DataError(f"need at least 2 valid rows, found {len(prices)}")
    return PriceSeries(prices, tuple(labels) if d_idx is not None else None)


def compute_returns(prices: PriceSeries, scale: Scale = "percent") -> ReturnSeries:
    """Simple returns ``p[t+1]/p[t] - 1``, times 100 for ``scale='percent'``.

    Return ``t`` is labelled with the date of price ``t+1``, the day it is
    realised.
    """
    p = prices.values
    r = p[1:] / p[:-1] - 1.0
    if scale == "percent":
        r = r * 100.0
    labels = prices.labels[1:] if prices.labels is not None else None
    return ReturnSeries(r, labels, scale=scale)


def prices_from_returns(returns: ReturnSeries, first_price: float) -> PriceSeries:
    """Invert :func:`compute_returns` given the first price."""
    r = returns.values / 100.0 if returns.scale == "percent" else returns.values
    p = first_price * np.concatenate(([1.0], np.cumprod(1.0 + r)))
    return PriceSeries(p)


def historical_volatility(returns: Union[ReturnSeries, Sequence[float]], t: Optional[int] = None) -> float:
    """Sample standard deviation (divisor n-1) of the first ``t`` returns.

    ``t`` defaults to the full length.
    """
    r = returns.values if isinstance(returns, ReturnSeries) else np.asarray(returns, float)
    t = len(r) if t is None else t
    if t < 2 or t > len(r):
        raise ValueError(f"historical volatility needs 2 <= t <= {len(r)}, got t={t}")
    return float(np.std(r[:t], ddof=1))


def slice_series(series: _Series, start: int, length: int) -> _Series:
    """Contiguous copy of ``length`` elements starting at 1-based ``start``."""
    if start < 1 or length < 0 or start - 1 + length > len(series):
        raise IndexError(
            f"slice start={start} length={length} out of range for length {len(series)}"
        )
    lo, hi = start - 1, start - 1 + length
    labels = series.labels[lo:hi] if series.labels is not None else None
    return replace(series, values=series.values[lo:hi].copy(), labels=labels)
