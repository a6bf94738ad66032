# trawlkit/services/data_service.py
#
# CSV ingestion, splitting and persistence of observed series.
#
# Notes:
# - Files are UTF-8 with a header row; timestamps are either ISO-8601 dates
#   or plain reals. Line numbers in errors count the header as line 1.
# - Repeated timestamps are dropped (first occurrence kept) and reported;
#   decreasing timestamps are an OrderError. Gaps are reported, never filled.
# - For dated series delta is measured in days.

import logging
import math
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from trawlkit.core.errors import ConfigurationError, DomainError, OrderError, ParseError
from trawlkit.models import TimeSeriesFile

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
GAP_FACTOR = 1.5


def _read_frame(path: PathLike) -> pd.DataFrame:
    if not Path(path).is_file():
        raise ConfigurationError(f"input file '{path}' not found")
    try:
        return pd.read_csv(
            path, dtype=str, keep_default_na=False, skipinitialspace=True, encoding="utf-8"
        )
    except pd.errors.EmptyDataError:
        raise ParseError("file is empty", line=1) from None
    except pd.errors.ParserError as exc:
        raise ParseError(f"malformed CSV: {exc}") from exc


def _parse_numeric_times(raw: List[str]) -> Optional[np.ndarray]:
    try:
        return np.array([float(text) for text in raw])
    except ValueError:
        return None


def _parse_dates(raw: List[str]) -> pd.DatetimeIndex:
    stamps = []
    for row, text in enumerate(raw):
        try:
            stamps.append(pd.Timestamp(text.strip()))
        except (ValueError, TypeError):
            raise ParseError(f"cannot parse timestamp '{text}'", line=row + 2) from None
    return pd.DatetimeIndex(stamps)


def _steps(timestamps: pd.Index) -> np.ndarray:
    if isinstance(timestamps, pd.DatetimeIndex):
        return np.diff(timestamps.asi8) / 86400e9
    return np.diff(np.asarray(timestamps, dtype=float))


def infer_delta(timestamps: pd.Index) -> float:
    """Median spacing (in days for dates); 1.0 for a single observation."""
    steps = _steps(timestamps)
    if steps.size == 0:
        return 1.0
    delta = float(np.median(steps))
    if not delta > 0:
        raise DomainError("cannot infer a positive sampling step")
    return delta


def _gap_report(timestamps: pd.Index, delta: float) -> Tuple[str, ...]:
    steps = _steps(timestamps)
    gaps = []
    for k in np.flatnonzero(steps > GAP_FACTOR * delta):
        missing = int(round(steps[k] / delta)) - 1
        gaps.append(f"{timestamps[k]} .. {timestamps[k + 1]}: {missing} missing step(s)")
    return tuple(gaps)


def load_csv(
    path: PathLike,
    date_col: str = "date",
    value_col: str = "value",
    delta: Optional[float] = None,
) -> TimeSeriesFile:
    """Read and validate a two-column series."""
    frame = _read_frame(path)
    for col in (date_col, value_col):
        if col not in frame.columns:
            raise ParseError(f"missing column '{col}' (have {list(frame.columns)})", line=1)
    if frame.empty:
        raise ParseError("no data rows", line=2)

    raw_times = frame[date_col].astype(str).tolist()
    values = np.empty(len(frame))
    for row, text in enumerate(frame[value_col].astype(str)):
        try:
            value = float(text)
        except ValueError:
            raise ParseError(f"cannot parse value '{text}'", line=row + 2) from None
        if not math.isfinite(value):
            raise ParseError(f"non-finite value '{text}'", line=row + 2)
        values[row] = value

    numeric = _parse_numeric_times(raw_times)
    timestamps: pd.Index = pd.Index(numeric) if numeric is not None else _parse_dates(raw_times)

    steps = _steps(timestamps)
    backwards = np.flatnonzero(steps < 0)
    if backwards.size:
        row = int(backwards[0]) + 1
        raise OrderError(
            f"line {row + 2}: timestamp {timestamps[row]} precedes {timestamps[row - 1]}"
        )
    repeated = np.flatnonzero(steps == 0) + 1
    duplicates = tuple(str(timestamps[k]) for k in repeated)
    if repeated.size:
        logger.warning("%s: dropping %d repeated timestamp(s)", path, repeated.size)
        keep = np.ones(len(timestamps), dtype=bool)
        keep[repeated] = False
        timestamps = timestamps[keep]
        values = values[keep]

    if delta is None:
        delta = infer_delta(timestamps)
    elif not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    gaps = _gap_report(timestamps, delta)
    if gaps:
        logger.warning("%s: %d gap(s) in the series", path, len(gaps))
    logger.info("loaded %d observations from %s (delta=%g)", values.size, path, delta)
    return TimeSeriesFile(
        timestamps=timestamps,
        values=values,
        delta=delta,
        source=str(path),
        duplicates=duplicates,
        gaps=gaps,
    )


def save_csv(
    ts: TimeSeriesFile, path: PathLike, date_col: str = "date", value_col: str = "value"
) -> Path:
    """Write with shortest round-trip float formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if ts.is_dated:
        index = pd.DatetimeIndex(ts.timestamps)
        daily = bool(np.all(index.normalize() == index))
        times = index.strftime("%Y-%m-%d" if daily else "%Y-%m-%dT%H:%M:%S")
    else:
        times = [repr(float(t)) for t in ts.timestamps]
    frame = pd.DataFrame({date_col: times, value_col: [repr(float(v)) for v in ts.values]})
    frame.to_csv(path, index=False)
    return path


def _subset(ts: TimeSeriesFile, mask: np.ndarray) -> TimeSeriesFile:
    timestamps = ts.timestamps[mask]
    return TimeSeriesFile(
        timestamps=timestamps,
        values=ts.values[mask],
        delta=ts.delta,
        source=ts.source,
        gaps=_gap_report(timestamps, ts.delta),
    )


def split_series(
    ts: TimeSeriesFile, boundary: Union[str, float, pd.Timestamp]
) -> Tuple[TimeSeriesFile, TimeSeriesFile]:
    """Left part holds timestamps <= boundary, right part the rest."""
    if ts.is_dated:
        key = pd.Timestamp(boundary)
        first, last = ts.timestamps[0], ts.timestamps[-1]
        left_mask = np.asarray(ts.timestamps <= key)
    else:
        key = float(boundary)
        first, last = float(ts.timestamps[0]), float(ts.timestamps[-1])
        left_mask = np.asarray(ts.timestamps, dtype=float) <= key
    if key < first or key >= last:
        raise DomainError(f"boundary {boundary} outside [{first}, {last})")
    left, right = _subset(ts, left_mask), _subset(ts, ~left_mask)
    logger.info("split at %s: %d + %d observations", boundary, len(left), len(right))
    return left, right


def split_series_at(
    ts: TimeSeriesFile, start: Union[str, float, pd.Timestamp]
) -> Tuple[TimeSeriesFile, TimeSeriesFile]:
    """Split so that the right part begins at the first timestamp >= ``start``."""
    key = pd.Timestamp(start) if ts.is_dated else float(start)
    earlier = np.flatnonzero(np.asarray(ts.timestamps < key))
    if earlier.size == 0:
        raise DomainError(f"split point {start} is at or before the first observation")
    return split_series(ts, ts.timestamps[int(earlier[-1])])


def load_smard_export(path: PathLike, column: Optional[str] = None) -> TimeSeriesFile:
    """Read a raw SMARD day-ahead price export (';'-separated, decimal comma).

    ``column`` defaults to the first column mentioning Deutschland/Luxemburg.
    Rows marked '-' (no price published) are dropped; the step is one day.
    """
    if not Path(path).is_file():
        raise ConfigurationError(f"export file '{path}' not found")
    frame = pd.read_csv(path, sep=";", dtype=str, keep_default_na=False, encoding="utf-8-sig")
    date_col = next((c for c in frame.columns if c.strip().lower().startswith("datum")), None)
    if date_col is None:
        raise ParseError("no 'Datum' column in the export", line=1)
    if column is None:
        column = next((c for c in frame.columns if "Deutschland/Luxemburg" in c), None)
    if column is None or column not in frame.columns:
        raise ParseError(f"price column not found (have {list(frame.columns)})", line=1)

    published = frame[frame[column].str.strip() != "-"]
    text = published[column].str.replace(".", "", regex=False).str.replace(",", ".", regex=False)
    try:
        values = text.astype(float).to_numpy()
        timestamps = pd.DatetimeIndex(pd.to_datetime(published[date_col], format="%d.%m.%Y"))
    except ValueError as exc:
        raise ParseError(f"cannot parse export rows: {exc}") from exc
    logger.info("read %d SMARD prices from %s (%s)", values.size, path, column)
    return TimeSeriesFile(
        timestamps=timestamps,
        values=values,
        delta=1.0,
        source=str(path),
        gaps=_gap_report(timestamps, 1.0),
    )
