"""Regression trees, random forests and gradient-boosted trees with
mean-decrease-impurity variable ranking.

Splits are binary tests x_m < c with c at midpoints of consecutive distinct
sorted values; node impurity is the variance of the node's targets. A node
splits whenever it is impure, a legal split exists and the depth budget
allows, taking the split with the largest impurity decrease (ties broken by
lowest feature index, then lowest cutpoint).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass
class TreeNode:
    """Split node (left/right set) or leaf (left/right None)."""

    n_samples: int
    impurity: float
    prediction: float
    feature: int = -1
    cutpoint: float = 0.0
    decrease: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class ForestModel:
    """A bag of trees: averaged for RF, shrinkage-weighted sum for GBT."""

    trees: list[TreeNode]
    kind: str  # "random_forest" | "gradient_boost"
    n_features: int
    seed: int
    shrinkage: float | None = None
    base_prediction: float | None = None


@dataclass
class ImportanceEntry:
    raw: np.ndarray
    normalized: np.ndarray


@dataclass
class ImportanceReport:
    """Per-model MDI importances; combine() takes the elementwise max."""

    entries: dict[str, ImportanceEntry] = field(default_factory=dict)

    def combined(self) -> np.ndarray:
        stacked = np.stack([e.normalized for e in self.entries.values()])
        return stacked.max(axis=0)

    def merge(self, other: "ImportanceReport") -> "ImportanceReport":
        merged = dict(self.entries)
        merged.update(other.entries)
        return ImportanceReport(entries=merged)


def _best_split(
    X: np.ndarray, y: np.ndarray, idx: np.ndarray, candidates: np.ndarray, min_leaf: int
) -> tuple[int, float] | None:
    """Best (feature, cutpoint) over the candidate features for rows idx.

    Scores every midpoint between consecutive distinct sorted values of each
    candidate, all columns at once. Among equal child-SSE splits the lowest
    feature index wins, then the lowest cutpoint (ascending scan order).
    """
    n = idx.size
    ks = np.arange(min_leaf, n - min_leaf + 1)  # left block sizes
    if ks.size == 0:
        return None
    Xc = X[np.ix_(idx, candidates)]
    order = np.argsort(Xc, axis=0, kind="stable")
    xs = np.take_along_axis(Xc, order, axis=0)
    ys = y[idx][order]
    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys * ys, axis=0)

    left_sum, left_sq = csum[ks - 1], csq[ks - 1]
    right_sum, right_sq = csum[-1] - left_sum, csq[-1] - left_sq
    kcol = ks[:, None].astype(np.float64)
    sse = (left_sq - left_sum**2 / kcol) + (right_sq - right_sum**2 / (n - kcol))
    sse[xs[ks - 1] >= xs[ks]] = np.inf  # cut only between distinct values

    rows = np.argmin(sse, axis=0)
    vals = sse[rows, np.arange(sse.shape[1])]
    best_col, best_val = -1, np.inf
    for c, v in enumerate(vals):  # ascending feature order; strict < keeps the first
        if v < best_val:
            best_col, best_val = c, v
    if not np.isfinite(best_val):
        return None
    k = int(ks[rows[best_col]])
    cut = 0.5 * (xs[k - 1, best_col] + xs[k, best_col])
    return int(candidates[best_col]), float(cut)


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    depth_left: int | None,
    min_leaf: int,
    mtry: int,
    rng: np.random.Generator,
) -> TreeNode:
    yn = y[idx]
    n = idx.size
    impurity = float(np.var(yn))
    node = TreeNode(n_samples=n, impurity=impurity, prediction=float(yn.mean()))

    pure = bool(np.all(yn == yn[0]))
    if pure or n < 2 * min_leaf or (depth_left is not None and depth_left <= 0):
        return node

    p = X.shape[1]
    if mtry < p:
        candidates = np.sort(rng.choice(p, size=mtry, replace=False))
    else:
        candidates = np.arange(p)
    found = _best_split(X, y, idx, candidates, min_leaf)
    if found is None:
        return node
    feature, cut = found

    mask = X[idx, feature] < cut
    child_depth = None if depth_left is None else depth_left - 1
    node.feature = feature
    node.cutpoint = cut
    node.left = _grow(X, y, idx[mask], child_depth, min_leaf, mtry, rng)
    node.right = _grow(X, y, idx[~mask], child_depth, min_leaf, mtry, rng)
    # Recompute the decrease from the stored child impurities so the
    # telescoping identity holds to rounding.
    p_l = node.left.n_samples / n
    p_r = node.right.n_samples / n
    node.decrease = max(
        0.0, impurity - p_l * node.left.impurity - p_r * node.right.impurity
    )
    return node


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int | None = None,
    min_leaf: int = 1,
    feature_subset_size: int | None = None,
    seed=None,
) -> TreeNode:
    """Greedy top-down regression tree with variance impurity."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError(f"X must be a non-empty 2-D array, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise DataError(f"y shape {y.shape} does not match {X.shape[0]} rows")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise DataError("tree fitting requires finite inputs")
    if min_leaf < 1:
        raise DataError("min_leaf must be >= 1")
    mtry = X.shape[1] if feature_subset_size is None else feature_subset_size
    if not 1 <= mtry <= X.shape[1]:
        raise DataError(f"feature_subset_size must be in [1, {X.shape[1]}], got {mtry}")
    rng = np.random.default_rng(seed)
    return _grow(X, y, np.arange(X.shape[0]), max_depth, min_leaf, mtry, rng)


def _tree_predict(node: TreeNode, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    stack = [(node, np.arange(X.shape[0]))]
    while stack:
        cur, idx = stack.pop()
        if cur.is_leaf:
            out[idx] = cur.prediction
            continue
        mask = X[idx, cur.feature] < cur.cutpoint
        stack.append((cur.left, idx[mask]))
        stack.append((cur.right, idx[~mask]))
    return out


def fit_random_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int = 100,
    mtry: int | None = None,
    min_leaf: int = 5,
    max_depth: int | None = None,
    bootstrap: bool = True,
    seed: int = 0,
) -> ForestModel:
    """Bootstrap-aggregated trees with per-node feature subsampling.

    mtry defaults to ceil(p / 3). Per-tree seeds are spawned from the
    master seed up front, so results do not depend on fitting order.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if n_trees < 1:
        raise DataError("n_trees must be >= 1")
    if X.shape[0] < 2:
        raise DataError("random forest needs at least 2 rows")
    p = X.shape[1]
    if mtry is None:
        mtry = int(np.ceil(p / 3))
    mtry = min(max(mtry, 1), p)

    children = np.random.SeedSequence(seed).spawn(n_trees)
    trees = []
    for child in children:
        rng = np.random.default_rng(child)
        if bootstrap:
            idx = rng.integers(0, X.shape[0], size=X.shape[0])
            Xb, yb = X[idx], y[idx]
        else:
            Xb, yb = X, y
        trees.append(fit_tree(Xb, yb, max_depth=max_depth, min_leaf=min_leaf,
                              feature_subset_size=mtry, seed=rng))
    return ForestModel(trees=trees, kind="random_forest", n_features=p, seed=seed)


def fit_gbt(
    X: np.ndarray,
    y: np.ndarray,
    n_rounds: int = 200,
    shrinkage: float = 0.1,
    max_depth: int | None = 3,
    min_leaf: int = 1,
    seed: int = 0,
) -> ForestModel:
    """Least-squares gradient boosting: each round fits a shallow tree to
    the current residuals and adds shrinkage times its prediction."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if n_rounds < 1:
        raise DataError("n_rounds must be >= 1")
    if not 0 < shrinkage <= 1:
        raise DataError(f"shrinkage must be in (0, 1], got {shrinkage}")
    if X.shape[0] < 2:
        raise DataError("gradient boosting needs at least 2 rows")

    base = float(y.mean())
    residual = y - base
    trees = []
    for _ in range(n_rounds):
        tree = fit_tree(X, residual, max_depth=max_depth, min_leaf=min_leaf)
        trees.append(tree)
        residual = residual - shrinkage * _tree_predict(tree, X)
    return ForestModel(trees=trees, kind="gradient_boost", n_features=X.shape[1],
                       seed=seed, shrinkage=shrinkage, base_prediction=base)


def predict(model: ForestModel, rows: np.ndarray) -> np.ndarray:
    """Mean over trees (RF) or base + shrinkage-weighted sum (GBT)."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[None, :]
    if rows.shape[1] != model.n_features:
        raise DataError(f"rows have {rows.shape[1]} features, model expects {model.n_features}")
    acc = np.zeros(rows.shape[0])
    for tree in model.trees:
        acc += _tree_predict(tree, rows)
    if model.kind == "gradient_boost":
        return model.base_prediction + model.shrinkage * acc
    return acc / len(model.trees)


def tree_importance(root: TreeNode) -> dict[int, float]:
    """Sum of p(t) * decrease over the split nodes of one tree, per feature."""
    total = root.n_samples
    acc: dict[int, float] = {}
    stack = [root]
    while stack:
        node = stack.pop()
        if node.is_leaf:
            continue
        acc[node.feature] = acc.get(node.feature, 0.0) + (node.n_samples / total) * node.decrease
        stack.append(node.left)
        stack.append(node.right)
    return acc


def importance(model: ForestModel) -> ImportanceReport:
    """Mean-decrease-impurity importance, averaged over the model's trees
    and normalized so the largest value is 1."""
    raw = np.zeros(model.n_features)
    for tree in model.trees:
        for f, v in tree_importance(tree).items():
            raw[f] += v
    raw /= len(model.trees)
    peak = raw.max()
    normalized = raw / peak if peak > 0 else np.zeros_like(raw)
    return ImportanceReport(entries={model.kind: ImportanceEntry(raw=raw, normalized=normalized)})
