"""Empirical mode decomposition by envelope sifting.

Extracts intrinsic mode functions (IMFs) fast-to-slow by repeatedly
subtracting the mean of the upper/lower cubic-spline envelopes until the
Cauchy-type SD criterion is met, then removes the mode and repeats on the
remainder until the residue has fewer than 3 extrema.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DataError
from .series_io import TimeSeries

MIN_DECOMPOSE_LEN = 8


@dataclass(frozen=True)
class EmdConfig:
    """Sifting parameters.

    sd_threshold : Cauchy stopping threshold on the normalized squared
        change between consecutive sift iterates, in (0, 1).
    max_sift_iters : cap on inner sift iterations per IMF.
    max_imfs : cap on extracted modes.
    boundary_pad_extrema : number of extrema mirror-reflected beyond each
        end before spline fitting.
    """

    sd_threshold: float = 0.2
    max_sift_iters: int = 100
    max_imfs: int = 12
    boundary_pad_extrema: int = 2

    def __post_init__(self):
        if not 0 < self.sd_threshold < 1:
            raise DataError(f"sd_threshold must be in (0, 1), got {self.sd_threshold}")
        if self.max_sift_iters < 1:
            raise DataError("max_sift_iters must be >= 1")
        if self.max_imfs < 1:
            raise DataError("max_imfs must be >= 1")
        if self.boundary_pad_extrema < 0:
            raise DataError("boundary_pad_extrema must be >= 0")


@dataclass(frozen=True)
class EmdResult:
    """Ordered IMFs (fast to slow) plus the low-extrema residue."""

    imfs: list[np.ndarray] = field(default_factory=list)
    residue: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def n_imfs(self) -> int:
        return len(self.imfs)

    def reconstruct(self) -> np.ndarray:
        out = self.residue.copy()
        for imf in self.imfs:
            out += imf
        return out


def find_extrema(signal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices of strict local maxima and minima.

    A plateau of equal values counts once, at its center sample
    (left-center for even plateau lengths). Signal endpoints are never
    extrema. Monotone input yields two empty arrays.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size < 3:
        raise DataError(f"find_extrema needs a 1-D signal of length >= 3, got shape {x.shape}")

    # Collapse runs of equal values, then compare each interior run with its
    # neighbouring runs.
    change = np.flatnonzero(x[1:] != x[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [x.size]))  # exclusive
    vals = x[starts]
    if vals.size < 3:
        empty = np.empty(0, dtype=np.intp)
        return empty, empty

    left, mid, right = vals[:-2], vals[1:-1], vals[2:]
    centers = (starts[1:-1] + ends[1:-1] - 1) // 2
    maxima = centers[(mid > left) & (mid > right)]
    minima = centers[(mid < left) & (mid < right)]
    return maxima.astype(np.intp), minima.astype(np.intp)


def envelope(signal: np.ndarray, extrema: np.ndarray, pad: int = 2) -> np.ndarray:
    """Natural cubic spline through (index, value) knots, evaluated everywhere.

    Before fitting, up to `pad` extrema are mirror-reflected across each end
    of the signal (t -> -t on the left, t -> 2(n-1)-t on the right) so the
    spline covers [0, n-1] without extrapolating.
    """
    x = np.asarray(signal, dtype=np.float64)
    idx = np.asarray(extrema, dtype=np.intp)
    if idx.size < 2:
        raise DataError(f"envelope needs at least 2 extrema, got {idx.size}")
    n = x.size

    knots_t = [idx]
    knots_v = [x[idx]]
    if pad > 0:
        k = min(pad, idx.size)
        lt = -idx[:k][::-1]
        lv = x[idx[:k]][::-1]
        keep = lt < idx[0]  # drop reflections that collide with real knots
        knots_t.insert(0, lt[keep])
        knots_v.insert(0, lv[keep])
        rt = 2 * (n - 1) - idx[-k:][::-1]
        rv = x[idx[-k:]][::-1]
        keep = rt > idx[-1]
        knots_t.append(rt[keep])
        knots_v.append(rv[keep])
    t = np.concatenate(knots_t)
    v = np.concatenate(knots_v)

    if t.size == 2:
        # Spline needs >= 3 knots; two knots define a line.
        slope = (v[1] - v[0]) / (t[1] - t[0])
        return v[0] + slope * (np.arange(n) - t[0])
    spline = CubicSpline(t, v, bc_type="natural")
    return spline(np.arange(n))


def sift_once(h: np.ndarray, pad: int = 2) -> np.ndarray:
    """One sifting step: subtract the mean of the upper and lower envelopes."""
    maxima, minima = find_extrema(h)
    upper = envelope(h, maxima, pad)
    lower = envelope(h, minima, pad)
    return h - 0.5 * (upper + lower)


def _has_enough_extrema(x: np.ndarray) -> bool:
    maxima, minima = find_extrema(x)
    return maxima.size >= 2 and minima.size >= 2


def is_imf_count_valid(x: np.ndarray) -> bool:
    """Zero-crossing/extrema counts differ by at most 1 (2% of extrema for n > 512)."""
    zc = zero_crossings(x)
    ext = imf_extrema_count(x)
    limit = 1 if x.size <= 512 else max(1, int(np.ceil(0.02 * ext)))
    return abs(zc - ext) <= limit


def decompose(series: TimeSeries, cfg: EmdConfig | None = None) -> EmdResult:
    """Decompose a series into IMFs plus residue.

    The inner sift stops once SD = sum((h_prev - h)^2) / sum(h_prev^2)
    drops below cfg.sd_threshold and the candidate passes the
    zero-crossing/extrema count rule, or when max_sift_iters is reached.
    The outer loop stops when the running residue has fewer than 2 maxima
    or 2 minima, or max_imfs have been extracted. The returned components
    sum to the input exactly up to float rounding.
    """
    cfg = cfg or EmdConfig()
    x = np.asarray(series.values, dtype=np.float64)
    if x.size < MIN_DECOMPOSE_LEN:
        raise DataError(f"decompose needs at least {MIN_DECOMPOSE_LEN} samples, got {x.size}")

    pad = cfg.boundary_pad_extrema
    imfs: list[np.ndarray] = []
    residue = x.copy()

    while len(imfs) < cfg.max_imfs:
        maxima, minima = find_extrema(residue)
        if maxima.size < 2 or minima.size < 2:
            break
        h = residue
        for _ in range(cfg.max_sift_iters):
            if not _has_enough_extrema(h):
                break
            h_next = sift_once(h, pad)
            denom = float(np.sum(h * h))
            if denom == 0.0:
                h = h_next
                break
            sd = float(np.sum((h - h_next) ** 2)) / denom
            h = h_next
            if sd < cfg.sd_threshold and is_imf_count_valid(h):
                break
        imfs.append(h)
        residue = residue - h

    return EmdResult(imfs=imfs, residue=residue)


def zero_crossings(x: np.ndarray) -> int:
    """Count sign changes, ignoring exact zeros between opposite signs."""
    s = np.sign(x)
    s = s[s != 0]
    if s.size < 2:
        return 0
    return int(np.sum(s[1:] != s[:-1]))


def imf_extrema_count(x: np.ndarray) -> int:
    maxima, minima = find_extrema(x)
    return int(maxima.size + minima.size)
