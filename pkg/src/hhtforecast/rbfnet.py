"""Radial-basis-function network regression, trained in two phases:
k-means places the Gaussian centers and sets widths from nearest-center
distances, then a ridge-regularized linear solve fits the output weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .series_io import NormParams, denormalize

MODEL_FORMAT_VERSION = 1


@dataclass
class RbfNetwork:
    centers: np.ndarray  # (k, p)
    widths: np.ndarray  # (k,), all > 0
    weights: np.ndarray  # (k + 1,), last entry is the bias
    norm: NormParams | None = None

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "model": "rbf",
            "centers": self.centers.tolist(),
            "widths": self.widths.tolist(),
            "weights": self.weights.tolist(),
            "norm": None
            if self.norm is None
            else {"kind": self.norm.kind, "offset": self.norm.offset, "scale": self.norm.scale},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RbfNetwork":
        if doc.get("format_version") != MODEL_FORMAT_VERSION:
            raise DataError(f"unsupported rbf model version {doc.get('format_version')!r}")
        norm = doc.get("norm")
        return cls(
            centers=np.asarray(doc["centers"], dtype=np.float64),
            widths=np.asarray(doc["widths"], dtype=np.float64),
            weights=np.asarray(doc["weights"], dtype=np.float64),
            norm=None if norm is None else NormParams(**norm),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path) -> "RbfNetwork":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _sq_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    sq = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.maximum(sq, 0.0)


def kmeans(X: np.ndarray, k: int, seed=0, max_iters: int = 300) -> np.ndarray:
    """Lloyd's iteration from distance-weighted seeding.

    Seeding picks the first center uniformly and subsequent centers with
    probability proportional to squared distance from the chosen set; empty
    clusters are re-seeded to the point farthest from its assigned center.
    Stops at an assignment fixpoint or after max_iters sweeps.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError(f"kmeans needs a non-empty 2-D array, got shape {X.shape}")
    n_distinct = np.unique(X, axis=0).shape[0]
    if not 1 <= k <= n_distinct:
        raise DataError(f"k must be in [1, {n_distinct}] (distinct rows), got {k}")
    rng = np.random.default_rng(seed)
    n = X.shape[0]

    chosen = [int(rng.integers(n))]
    d2 = _sq_distances(X, X[chosen])[:, 0]
    while len(chosen) < k:
        probs = d2 / d2.sum()
        nxt = int(rng.choice(n, p=probs))
        chosen.append(nxt)
        d2 = np.minimum(d2, _sq_distances(X, X[nxt : nxt + 1])[:, 0])
    centers = X[chosen].copy()

    assign = np.full(n, -1)
    for _ in range(max_iters):
        dists = _sq_distances(X, centers)
        new_assign = np.argmin(dists, axis=1)
        for c in range(k):
            members = new_assign == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
            else:
                farthest = int(np.argmax(dists[np.arange(n), new_assign]))
                centers[c] = X[farthest]
                new_assign[farthest] = c
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
    return centers


def _widths_from_centers(centers: np.ndarray, X: np.ndarray) -> np.ndarray:
    k = centers.shape[0]
    if k == 1:
        d = np.sqrt(_sq_distances(X, X))
        mean_pair = d[np.triu_indices(X.shape[0], k=1)].mean() if X.shape[0] > 1 else 1.0
        return np.array([mean_pair if mean_pair > 0 else 1.0])
    d = np.sqrt(_sq_distances(centers, centers))
    np.fill_diagonal(d, np.inf)
    widths = d.min(axis=1)
    # kmeans can converge with coincident centers on degenerate data.
    fallback = widths[widths > 0].mean() if (widths > 0).any() else 1.0
    return np.where(widths > 0, widths, fallback)


def _activations(X: np.ndarray, centers: np.ndarray, widths: np.ndarray) -> np.ndarray:
    sq = _sq_distances(X, centers)
    return np.exp(-sq / (2.0 * widths**2)[None, :])


def fit_rbf(
    X: np.ndarray,
    y: np.ndarray,
    k: int,
    width_rule: str = "nearest_center_mean",
    ridge: float = 1e-8,
    seed=0,
    norm: NormParams | None = None,
    width_scale: float = 1.0,
) -> RbfNetwork:
    """Two-phase training: k-means centers/widths, then the ridge solve.

    width_scale is a test hook that shrinks or stretches all widths after
    the width rule has been applied.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise DataError(f"y shape {y.shape} does not match {X.shape[0]} rows")
    if X.shape[0] < k:
        raise DataError(f"need at least k={k} rows, got {X.shape[0]}")
    if width_rule != "nearest_center_mean":
        raise DataError(f"unknown width rule {width_rule!r}")
    if not ridge >= 0:
        raise DataError(f"ridge must be >= 0, got {ridge}")

    centers = kmeans(X, k, seed=seed)
    widths = _widths_from_centers(centers, X) * width_scale
    design = np.hstack([_activations(X, centers, widths), np.ones((X.shape[0], 1))])
    lhs = design.T @ design + ridge * np.eye(k + 1)
    rhs = design.T @ y
    try:
        weights = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise DataError(f"singular activation design beyond ridge rescue: {exc}") from exc
    return RbfNetwork(centers=centers, widths=widths, weights=weights, norm=norm)


def predict_rbf(model: RbfNetwork, rows: np.ndarray) -> np.ndarray:
    """Gaussian activations times weights plus bias, denormalized."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[None, :]
    if rows.shape[1] != model.centers.shape[1]:
        raise DataError(
            f"rows have {rows.shape[1]} features, model expects {model.centers.shape[1]}"
        )
    acts = _activations(rows, model.centers, model.widths)
    f = acts @ model.weights[:-1] + model.weights[-1]
    if model.norm is not None:
        f = denormalize(f, model.norm)
    return f
