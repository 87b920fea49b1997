"""Supervised design-matrix assembly from decomposition components.

Each feature column is one component (IMF, instantaneous amplitude or
frequency, or the raw series) at one lag; each target vector is the raw
target series shifted by one forecast horizon. Row r of a column with lag L
holds the component value at time row_time_index[r] - L, so nothing later
than the forecast origin ever enters a row.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .emd import EmdResult
from .errors import DataError
from .spectral import InstAttributes


@dataclass(frozen=True)
class FeatureColumn:
    """One design-matrix column with its provenance."""

    source_series: str
    component: str  # "IMF<k>" | "A<k>" | "F<k>" | "RAW" | "TOD_SIN" | "TOD_COS"
    lag: int
    values: np.ndarray

    def __post_init__(self):
        if self.lag < 0:
            raise DataError(f"column lag must be >= 0, got {self.lag}")

    @property
    def label(self) -> str:
        return f"{self.source_series}/{self.component}/{self.lag}"


@dataclass(frozen=True)
class FeatureMatrix:
    """Aligned feature columns plus per-horizon target vectors."""

    columns: list[FeatureColumn]
    targets: dict[int, np.ndarray]
    row_time_index: np.ndarray

    def __post_init__(self):
        n = self.row_time_index.size
        for col in self.columns:
            if col.values.size != n:
                raise DataError(f"column {col.label} has {col.values.size} rows, expected {n}")
        for h, tgt in self.targets.items():
            if tgt.size != n:
                raise DataError(f"target for horizon {h} has {tgt.size} rows, expected {n}")

    @property
    def n_rows(self) -> int:
        return self.row_time_index.size

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.columns]

    def to_array(self) -> np.ndarray:
        if not self.columns:
            return np.empty((self.n_rows, 0))
        return np.stack([c.values for c in self.columns], axis=1)

    def select(self, keep: np.ndarray) -> "FeatureMatrix":
        cols = [c for c, k in zip(self.columns, keep) if k]
        return FeatureMatrix(columns=cols, targets=self.targets, row_time_index=self.row_time_index)

    def to_csv(self, path) -> None:
        """Write the matrix with `series/component/lag` provenance headers."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            header = ["t"] + self.labels + [f"target_h{h}" for h in sorted(self.targets)]
            writer.writerow(header)
            arr = self.to_array()
            tgts = [self.targets[h] for h in sorted(self.targets)]
            for r in range(self.n_rows):
                row = [repr(int(self.row_time_index[r]))]
                row += [repr(float(v)) for v in arr[r]]
                row += [repr(float(t[r])) for t in tgts]
                writer.writerow(row)


@dataclass(frozen=True)
class SeriesComponents:
    """Decomposition products of one series, as named component arrays."""

    name: str
    emd: EmdResult
    attributes: list[InstAttributes] = field(default_factory=list)

    def component_arrays(self) -> list[tuple[str, np.ndarray]]:
        out = [(f"IMF{k + 1}", imf) for k, imf in enumerate(self.emd.imfs)]
        out += [(f"A{k + 1}", at.amplitude) for k, at in enumerate(self.attributes)]
        out += [(f"F{k + 1}", at.frequency) for k, at in enumerate(self.attributes)]
        return out


def build_matrix(
    components: list[SeriesComponents],
    raw: list[tuple[str, np.ndarray]],
    target: np.ndarray,
    lags: list[int],
    horizons: list[int],
    time_of_day: np.ndarray | None = None,
    valid_bounds: tuple[int, int] | None = None,
) -> FeatureMatrix:
    """Assemble the lagged design matrix and per-horizon targets.

    Rows cover forecast origins t = max(lags) .. n - max(horizons) - 1.
    `time_of_day`, when given, is the hour-of-day per sample and adds a
    sin/cos encoded pair of lag-0 columns. `valid_bounds` restricts rows so
    every referenced component sample falls inside [lo, hi).
    """
    if not lags:
        raise DataError("lags must be non-empty")
    if not horizons:
        raise DataError("horizons must be non-empty")
    if any(l < 0 for l in lags):
        raise DataError(f"lags must be >= 0, got {lags}")
    if any(h < 1 for h in horizons):
        raise DataError(f"horizons must be >= 1, got {horizons}")

    n = target.size
    sources: list[tuple[str, str, np.ndarray]] = []
    for sc in components:
        for comp_name, arr in sc.component_arrays():
            sources.append((sc.name, comp_name, arr))
    for name, arr in raw:
        sources.append((name, "RAW", np.asarray(arr, dtype=np.float64)))
    for _, _, arr in sources:
        if arr.size != n:
            raise DataError(f"all series must have length {n}, got {arr.size}")

    max_lag, max_h = max(lags), max(horizons)
    if max_lag + max_h >= n:
        raise DataError(f"max lag {max_lag} + max horizon {max_h} must be < length {n}")
    t_lo, t_hi = max_lag, n - max_h  # origins [t_lo, t_hi)
    if valid_bounds is not None:
        lo, hi = valid_bounds
        t_lo = max(t_lo, lo + max_lag)
        t_hi = min(t_hi, hi)
        if t_lo >= t_hi:
            raise DataError("valid_bounds leave no usable rows")
    rows = np.arange(t_lo, t_hi)

    columns = [
        FeatureColumn(series, comp, lag, arr[rows - lag])
        for series, comp, arr in sources
        for lag in lags
    ]
    if time_of_day is not None:
        hours = np.asarray(time_of_day, dtype=np.float64)
        if hours.size != n:
            raise DataError("time_of_day must have one entry per sample")
        angle = 2.0 * np.pi * hours[rows] / 24.0
        columns.append(FeatureColumn("time", "TOD_SIN", 0, np.sin(angle)))
        columns.append(FeatureColumn("time", "TOD_COS", 0, np.cos(angle)))

    targets = {int(h): target[rows + h] for h in horizons}
    return FeatureMatrix(columns=columns, targets=targets, row_time_index=rows)


def prune_by_importance(
    matrix: FeatureMatrix, importances: np.ndarray, threshold: float = 0.3
) -> FeatureMatrix:
    """Drop columns whose normalized importance falls below the threshold.

    Importances must be normalized so the maximum is 1. If every column
    falls below the threshold, the single best column is kept and a warning
    is emitted.
    """
    imp = np.asarray(importances, dtype=np.float64)
    if imp.size != matrix.n_cols:
        raise DataError(f"got {imp.size} importances for {matrix.n_cols} columns")
    keep = imp >= threshold
    if not keep.any():
        keep[int(np.argmax(imp))] = True
        warnings.warn(
            "all feature importances fall below the pruning threshold; "
            "keeping only the best column",
            stacklevel=2,
        )
    return matrix.select(keep)
