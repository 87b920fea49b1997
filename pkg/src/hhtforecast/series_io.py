"""Loading, validation, normalization and splitting of uniformly sampled series.

CSV layout: header row required, first column is the timestamp (ISO-8601 or
a plain integer/float index), remaining columns are named value columns.
Timestamps must be strictly increasing and uniform.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .errors import DataError

# Relative tolerance on per-row step deviation before sampling counts as
# non-uniform.
STEP_RTOL = 1e-6

# Longest run of consecutive missing samples the interpolate policy repairs.
MAX_GAP = 3


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled scalar series; t_i = start_time + i * step."""

    values: np.ndarray
    start_time: float
    step: float
    name: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size == 0:
            raise DataError(f"series {self.name!r}: values must be a non-empty 1-D array")
        if not np.all(np.isfinite(vals)):
            raise DataError(f"series {self.name!r}: non-finite values present")
        if not self.step > 0:
            raise DataError(f"series {self.name!r}: step must be > 0, got {self.step}")

    def __len__(self) -> int:
        return self.values.size

    def time_at(self, index: int) -> float:
        return self.start_time + index * self.step


@dataclass(frozen=True)
class NormParams:
    """Affine normalization: normalized = (x - offset) / scale."""

    kind: str  # "minmax" | "zscore"
    offset: float
    scale: float

    def __post_init__(self):
        if self.kind not in ("minmax", "zscore"):
            raise DataError(f"unknown normalization kind {self.kind!r}")
        if not self.scale > 0:
            raise DataError(f"normalization scale must be > 0, got {self.scale}")


def _parse_timestamp(text: str, lineno: int) -> float:
    """ISO-8601 datetime -> epoch seconds; otherwise a plain numeric index."""
    try:
        return float(text)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise DataError(f"row {lineno}: cannot parse timestamp {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def _fill_gaps(values: np.ndarray, policy: str, column: str) -> np.ndarray:
    """Resolve NaNs per gap policy; linear interpolation for short interior runs."""
    missing = ~np.isfinite(values)
    if not missing.any():
        return values
    if policy == "fail":
        idx = int(np.flatnonzero(missing)[0])
        raise DataError(f"column {column!r}: non-finite value at row {idx} under policy 'fail'")
    if policy != "interpolate_max3":
        raise DataError(f"unknown gap policy {policy!r}")

    if missing[0] or missing[-1]:
        raise DataError(f"column {column!r}: gap touches series boundary, cannot interpolate")
    # Locate runs of consecutive missing samples.
    padded = np.concatenate(([False], missing, [False]))
    starts = np.flatnonzero(padded[1:] & ~padded[:-1])
    ends = np.flatnonzero(~padded[1:] & padded[:-1])  # exclusive
    out = values.copy()
    for s, e in zip(starts, ends):
        if e - s > MAX_GAP:
            raise DataError(
                f"column {column!r}: gap of {e - s} samples at row {s} exceeds "
                f"the {MAX_GAP}-sample interpolation limit"
            )
        lo, hi = out[s - 1], out[e]
        out[s:e] = lo + (hi - lo) * (np.arange(1, e - s + 1) / (e - s + 1))
    return out


def load_csv(path, column: str, gap_policy: str = "interpolate_max3") -> TimeSeries:
    """Load one named column from a CSV file as a TimeSeries.

    Parameters
    ----------
    path : str or Path
        CSV file with a header row; first column holds timestamps.
    column : str
        Name of the value column to extract.
    gap_policy : {"interpolate_max3", "fail"}
        How to treat missing/non-finite values: linear interpolation for
        interior gaps of at most 3 samples, or a hard error.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file (header row required)") from None
        if column not in header[1:]:
            raise DataError(f"{path}: column {column!r} not found (have {header[1:]})")
        col_idx = header.index(column)

        times: list[float] = []
        raw: list[float] = []
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            times.append(_parse_timestamp(row[0].strip(), lineno))
            cell = row[col_idx].strip() if col_idx < len(row) else ""
            if cell == "" or cell.lower() in ("nan", "na", "null"):
                raw.append(math.nan)
            else:
                try:
                    raw.append(float(cell))
                except ValueError:
                    raise DataError(f"row {lineno}: cannot parse value {cell!r}") from None

    if len(raw) == 0:
        raise DataError(f"{path}: no data rows")
    values = np.asarray(raw, dtype=np.float64)
    ts = np.asarray(times, dtype=np.float64)

    if len(raw) > 1:
        diffs = np.diff(ts)
        if np.any(diffs <= 0):
            raise DataError(f"{path}: timestamps not strictly increasing")
        step = float(diffs[0])
        if np.any(np.abs(diffs - step) > STEP_RTOL * abs(step)):
            worst = int(np.argmax(np.abs(diffs - step)))
            raise DataError(
                f"{path}: non-uniform sampling (step {diffs[worst]} at row "
                f"{worst + 1}, expected {step})"
            )
    else:
        step = 1.0

    values = _fill_gaps(values, gap_policy, column)
    return TimeSeries(values=values, start_time=float(ts[0]), step=step, name=column)


def normalize(series: TimeSeries, kind: str = "minmax") -> tuple[TimeSeries, NormParams]:
    """Normalize a series to [0, 1] (minmax) or zero mean / unit sd (zscore)."""
    x = series.values
    if kind == "minmax":
        lo, hi = float(x.min()), float(x.max())
        if hi <= lo:
            raise DataError(f"series {series.name!r}: constant series, degenerate minmax scale")
        params = NormParams(kind="minmax", offset=lo, scale=hi - lo)
    elif kind == "zscore":
        mu, sd = float(x.mean()), float(x.std())
        if sd <= 0:
            raise DataError(f"series {series.name!r}: constant series, degenerate zscore scale")
        params = NormParams(kind="zscore", offset=mu, scale=sd)
    else:
        raise DataError(f"unknown normalization kind {kind!r}")
    out = TimeSeries(
        values=apply_norm(x, params),
        start_time=series.start_time,
        step=series.step,
        name=series.name,
    )
    return out, params


def apply_norm(values: np.ndarray, params: NormParams) -> np.ndarray:
    return (np.asarray(values, dtype=np.float64) - params.offset) / params.scale


def denormalize(values: np.ndarray, params: NormParams) -> np.ndarray:
    return np.asarray(values, dtype=np.float64) * params.scale + params.offset


def split_holdout(series: TimeSeries, holdout: int) -> tuple[TimeSeries, TimeSeries]:
    """Split off the final `holdout` samples; concatenation reproduces the input."""
    n = len(series)
    if not 0 < holdout < n:
        raise DataError(f"holdout must be in (0, {n}), got {holdout}")
    cut = n - holdout
    train = TimeSeries(series.values[:cut].copy(), series.start_time, series.step, series.name)
    test = TimeSeries(
        series.values[cut:].copy(),
        series.start_time + cut * series.step,
        series.step,
        series.name,
    )
    return train, test
