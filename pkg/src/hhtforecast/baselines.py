"""Naive forecasting baselines and forecast error metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

MAPE_FLOOR = 1e-6


@dataclass(frozen=True)
class SubIntervalMetrics:
    label: str
    mae: float
    rmse: float
    mape: float | None
    n_skipped_mape: int


@dataclass(frozen=True)
class MetricsReport:
    """MAE/RMSE in signal units, MAPE in percent over non-negligible actuals."""

    mae: float
    rmse: float
    mape: float | None
    n_skipped_mape: int
    sub_intervals: list[SubIntervalMetrics] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mae": self.mae,
            "rmse": self.rmse,
            "mape": self.mape,
            "n_skipped_mape": self.n_skipped_mape,
            "sub_intervals": [
                {
                    "label": s.label,
                    "mae": s.mae,
                    "rmse": s.rmse,
                    "mape": s.mape,
                    "n_skipped_mape": s.n_skipped_mape,
                }
                for s in self.sub_intervals
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def persistence(values: np.ndarray, horizon: int) -> np.ndarray:
    """Forecast for t+h equals the value at t; aligned with values[h:]."""
    x = np.asarray(values, dtype=np.float64)
    if horizon < 1:
        raise DataError(f"horizon must be >= 1, got {horizon}")
    if x.size <= horizon:
        raise DataError(f"series of length {x.size} too short for horizon {horizon}")
    return x[:-horizon].copy()


def smoothing_levels(values: np.ndarray, alpha: float) -> np.ndarray:
    """Exponential smoothing levels l_t = alpha*x_t + (1-alpha)*l_{t-1}, l_0 = x_0."""
    x = np.asarray(values, dtype=np.float64)
    if not 0 < alpha <= 1:
        raise DataError(f"alpha must be in (0, 1], got {alpha}")
    levels = np.empty_like(x)
    level = x[0]
    for i, v in enumerate(x):
        level = alpha * v + (1.0 - alpha) * level
        levels[i] = level
    return levels


def exp_smoothing(values: np.ndarray, alpha: float, horizon: int) -> np.ndarray:
    """Flat-horizon forecast from the smoothing level at each origin."""
    x = np.asarray(values, dtype=np.float64)
    if horizon < 1:
        raise DataError(f"horizon must be >= 1, got {horizon}")
    if x.size <= horizon:
        raise DataError(f"series of length {x.size} too short for horizon {horizon}")
    return smoothing_levels(x, alpha)[:-horizon]


def metrics(
    actual: np.ndarray,
    predicted: np.ndarray,
    mape_floor: float = MAPE_FLOOR,
    sub_intervals: list[tuple[str, int, int]] | None = None,
) -> MetricsReport:
    """MAE, RMSE and MAPE, overall and on half-open index sub-intervals.

    MAPE skips actuals with |a| <= mape_floor and records how many were
    skipped; it is None when every actual falls below the floor.
    """
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != p.shape or a.ndim != 1 or a.size == 0:
        raise DataError(f"actual/predicted must be equal-length 1-D arrays, got {a.shape} vs {p.shape}")

    def block(av, pv, label):
        err = av - pv
        mae = float(np.mean(np.abs(err)))
        rmse = float(np.sqrt(np.mean(err**2)))
        usable = np.abs(av) > mape_floor
        skipped = int(av.size - usable.sum())
        mape = (
            float(100.0 * np.mean(np.abs(err[usable]) / np.abs(av[usable])))
            if usable.any()
            else None
        )
        return label, mae, rmse, mape, skipped

    _, mae, rmse, mape, skipped = block(a, p, "")
    subs = []
    for label, lo, hi in sub_intervals or []:
        if not 0 <= lo < hi <= a.size:
            raise DataError(f"sub-interval {label!r} [{lo}, {hi}) outside data of length {a.size}")
        lbl, m1, m2, m3, sk = block(a[lo:hi], p[lo:hi], label)
        subs.append(SubIntervalMetrics(lbl, m1, m2, m3, sk))
    return MetricsReport(mae=mae, rmse=rmse, mape=mape, n_skipped_mape=skipped, sub_intervals=subs)
