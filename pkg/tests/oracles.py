"""Independent reference implementations used to derive expected test values.

Everything here is deliberately brute-force and structurally unrelated to
the library code it checks: plain loops, exhaustive enumeration, dense
linear algebra. Slow is fine; these run on tiny inputs (or once, offline,
to freeze constants).
"""

from __future__ import annotations

import numpy as np

from hhtforecast.svr import KernelSpec, kernel_matrix


# ---------------------------------------------------------------------------
# Signal processing oracles


def naive_dft(x: np.ndarray) -> np.ndarray:
    """O(N^2) discrete Fourier transform."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    out = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        for j in range(n):
            out[k] += x[j] * np.exp(-2j * np.pi * j * k / n)
    return out


def plateau_extrema_scan(x) -> tuple[list[int], list[int]]:
    """Exhaustive plateau-aware extrema scan with explicit run bookkeeping."""
    x = [float(v) for v in x]
    n = len(x)
    runs = []  # (start, end_inclusive, value)
    start = 0
    for i in range(1, n + 1):
        if i == n or x[i] != x[start]:
            runs.append((start, i - 1, x[start]))
            start = i
    maxima, minima = [], []
    for r in range(1, len(runs) - 1):
        s, e, v = runs[r]
        center = s + (e - s) // 2
        if runs[r - 1][2] < v and runs[r + 1][2] < v:
            maxima.append(center)
        if runs[r - 1][2] > v and runs[r + 1][2] > v:
            minima.append(center)
    return maxima, minima


# ---------------------------------------------------------------------------
# Regression tree oracles


def _sse(y: np.ndarray) -> float:
    return float(np.sum((y - y.mean()) ** 2)) if y.size else 0.0


def _cutpoints(col: np.ndarray) -> list[float]:
    vals = sorted(set(float(v) for v in col))
    return [(a + b) / 2.0 for a, b in zip(vals, vals[1:])]


def exhaustive_tree_sse(X: np.ndarray, y: np.ndarray, depth: int, min_leaf: int = 1) -> float:
    """Minimum training SSE over all trees of at most the given depth,
    searching every (feature, cutpoint) combination at every node."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    def best(rows: np.ndarray, d: int) -> float:
        leaf = _sse(y[rows])
        if d == 0 or rows.size < 2 * min_leaf:
            return leaf
        out = leaf
        for f in range(X.shape[1]):
            for cut in _cutpoints(X[rows, f]):
                mask = X[rows, f] < cut
                left, right = rows[mask], rows[~mask]
                if left.size < min_leaf or right.size < min_leaf:
                    continue
                out = min(out, best(left, d - 1) + best(right, d - 1))
        return out

    return best(np.arange(X.shape[0]), depth)


def greedy_tree_reference(X, y, max_depth=None, min_leaf=1):
    """Slow re-derivation of the greedy split rule: at each impure node take
    the (feature, cutpoint) with maximal impurity decrease, ties to the
    lowest feature then lowest cutpoint. Returns nested dict nodes."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    def grow(rows, depth_left):
        yn = y[rows]
        node = {"n": rows.size, "prediction": float(yn.mean())}
        if np.all(yn == yn[0]) or rows.size < 2 * min_leaf or depth_left == 0:
            return node
        best = None  # (children_sse, feature, cut)
        for f in range(X.shape[1]):
            for cut in _cutpoints(X[rows, f]):
                mask = X[rows, f] < cut
                left, right = rows[mask], rows[~mask]
                if left.size < min_leaf or right.size < min_leaf:
                    continue
                score = _sse(y[left]) + _sse(y[right])
                if best is None or score < best[0]:
                    best = (score, f, cut)
        if best is None:
            return node
        _, f, cut = best
        mask = X[rows, f] < cut
        node["feature"], node["cutpoint"] = f, cut
        node["left"] = grow(rows[mask], None if depth_left is None else depth_left - 1)
        node["right"] = grow(rows[~mask], None if depth_left is None else depth_left - 1)
        return node

    return grow(np.arange(X.shape[0]), max_depth)


def reference_tree_predict(node, rows: np.ndarray) -> np.ndarray:
    out = np.empty(rows.shape[0])
    for i, row in enumerate(rows):
        cur = node
        while "feature" in cur:
            cur = cur["left"] if row[cur["feature"]] < cur["cutpoint"] else cur["right"]
        out[i] = cur["prediction"]
    return out


# ---------------------------------------------------------------------------
# SVR dual oracle: projected gradient on the 2n-variable box/equality QP


def _project(v: np.ndarray, s: np.ndarray, C: float) -> np.ndarray:
    """Euclidean projection onto {a in [0, C]^m, s . a = 0} via the exact
    piecewise-linear root of phi(mu) = s . clip(v - mu s, 0, C)."""

    def a_of(mu):
        return np.clip(v - mu * s, 0.0, C)

    bps = np.unique(np.concatenate([v - C, v, -v, C - v]))
    # phi evaluated at every breakpoint in one shot; phi is non-increasing.
    vals = np.clip(v[None, :] - bps[:, None] * s[None, :], 0.0, C) @ s
    idx = int(np.searchsorted(-vals, 0.0))  # first breakpoint with phi <= 0
    if idx == 0:
        return a_of(bps[0])
    if idx == bps.size:
        return a_of(bps[-1])
    b_lo, b_hi = bps[idx - 1], bps[idx]
    p_lo, p_hi = vals[idx - 1], vals[idx]
    if p_lo == p_hi:
        return a_of(b_lo)
    mu = b_lo + (b_hi - b_lo) * p_lo / (p_lo - p_hi)
    return a_of(mu)


def svr_dual_pg(
    K: np.ndarray, y: np.ndarray, C: float, epsilon: float, iters: int = 1_000_000
) -> np.ndarray:
    """Projected-gradient ascent on the epsilon-SVR dual; returns beta."""
    n = y.size
    s = np.concatenate([np.ones(n), -np.ones(n)])
    a = np.zeros(2 * n)
    lam = float(np.linalg.eigvalsh(K).max())
    step = 1.0 / (2.0 * max(lam, 1e-12))
    for _ in range(iters):
        beta = a[:n] - a[n:]
        resid = y - K @ beta
        grad = np.concatenate([resid - epsilon, -resid - epsilon])
        a = _project(a + step * grad, s, C)
    return a[:n] - a[n:]


def svr_oracle_bias(K, y, beta, C, epsilon, atol=1e-8):
    """Bias from unbounded support vectors, midpoint fallback."""
    F = y - K @ beta
    ub = (beta > atol) & (beta < C - atol)
    db = (beta < -atol) & (beta > -C + atol)
    implied = np.concatenate([F[ub] - epsilon, F[db] + epsilon])
    if implied.size:
        return float(implied.mean())
    hi = np.where(beta < C, np.where(beta >= 0, F - epsilon, F + epsilon), -np.inf).max()
    lo = np.where(beta > -C, np.where(beta <= 0, F + epsilon, F - epsilon), np.inf).min()
    return float(0.5 * (hi + lo))


def fixed_svr_problems():
    """The five small regression problems used for solver/oracle agreement."""
    rng = np.random.default_rng(7)
    problems = []
    X1 = np.array([[-2.0], [-1.0], [0.0], [1.0], [2.0]])
    y1 = np.array([-1.5, -0.8, 0.3, 0.9, 1.8])
    problems.append(("lin5", X1, y1, 1.0, 0.1, KernelSpec("polynomial", gamma=1.0, degree=1)))
    X2 = np.linspace(0, 1, 8)[:, None]
    y2 = np.sin(2 * np.pi * X2[:, 0])
    problems.append(("sin8", X2, y2, 10.0, 0.05, KernelSpec("rbf", gamma=2.0)))
    X3 = rng.normal(size=(10, 2))
    y3 = X3[:, 0] - 0.5 * X3[:, 1] + 0.1 * rng.normal(size=10)
    problems.append(("rand10", X3, y3, 5.0, 0.2, KernelSpec("rbf", gamma=0.7)))
    X4 = rng.uniform(-1, 1, size=(7, 1))
    y4 = X4[:, 0] ** 3
    problems.append(("cube7", X4, y4, 2.0, 0.05, KernelSpec("polynomial", gamma=1.0, degree=3, coef0=1.0)))
    X5 = rng.normal(size=(9, 3))
    y5 = np.sign(X5[:, 0]) + 0.2 * rng.normal(size=9)
    problems.append(("sign9", X5, y5, 1.0, 0.15, KernelSpec("rbf", gamma=0.4)))
    return problems


def svr_query_grid(name: str, n_features: int) -> np.ndarray:
    """Fixed held-out query points per problem (seeded by name length)."""
    rng = np.random.default_rng(1000 + len(name))
    return rng.normal(size=(6, n_features))


def run_svr_oracle(iters: int = 1_000_000):
    """Oracle objective and predictions for every fixed problem."""
    from hhtforecast.svr import dual_objective

    out = {}
    for name, X, y, C, eps, spec in fixed_svr_problems():
        K = kernel_matrix(spec, X, X)
        beta = svr_dual_pg(K, y, C, eps, iters=iters)
        bias = svr_oracle_bias(K, y, beta, C, eps)
        grid = svr_query_grid(name, X.shape[1])
        preds = kernel_matrix(spec, grid, X) @ beta + bias
        out[name] = {
            "objective": dual_objective(K, y, beta, eps),
            "predictions": [float(p) for p in preds],
        }
    return out


# ---------------------------------------------------------------------------
# Feature alignment oracle


def alignment_errors(matrix, component_lookup, target_values) -> list[str]:
    """Re-derive every matrix cell and target from first principles; returns
    human-readable mismatch descriptions (empty when fully aligned).

    component_lookup maps (series, component) -> full-length array.
    """
    errors = []
    for r, t in enumerate(matrix.row_time_index):
        for col in matrix.columns:
            src = component_lookup[(col.source_series, col.component)]
            want = src[t - col.lag]
            got = col.values[r]
            if want != got:
                errors.append(f"row {r} (t={t}) col {col.label}: {got} != {want}")
        for h, tgt in matrix.targets.items():
            want = target_values[t + h]
            if tgt[r] != want:
                errors.append(f"row {r} (t={t}) target h={h}: {tgt[r]} != {want}")
    return errors
