"""Epsilon-insensitive support vector regression.

The dual problem is solved by pairwise coordinate ascent on the net
coefficients beta_i = alpha_i - alpha_i*: at each step the maximally
KKT-violating (up, down) pair transfers weight t, preserving sum(beta) = 0
and the box |beta_i| <= C. Updates stop at the epsilon-tube kinks
(beta = 0), so the piecewise-quadratic objective is exact along every step.
"""

from __future__ import annotations

import json
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DataError
from .series_io import NormParams, denormalize

# Full Gram matrix below this row count; row-wise LRU cache above it.
GRAM_CACHE_LIMIT = 4096
KERNEL_ROW_CACHE = 256

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class KernelSpec:
    """RBF or polynomial kernel parameters."""

    kind: str  # "rbf" | "polynomial"
    gamma: float = 1.0
    degree: int = 3
    coef0: float = 0.0

    def __post_init__(self):
        if self.kind not in ("rbf", "polynomial"):
            raise DataError(f"unknown kernel kind {self.kind!r}")
        if not self.gamma > 0:
            raise DataError(f"kernel gamma must be > 0, got {self.gamma}")
        if self.degree < 1:
            raise DataError(f"polynomial degree must be >= 1, got {self.degree}")


@dataclass
class SvrModel:
    support_vectors: np.ndarray  # all training rows, in training order
    coefficients: np.ndarray  # beta_i = alpha_i - alpha_i*
    bias: float
    kernel: KernelSpec
    C: float
    epsilon: float
    norm: NormParams | None = None

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "model": "svr",
            "kernel": {
                "kind": self.kernel.kind,
                "gamma": self.kernel.gamma,
                "degree": self.kernel.degree,
                "coef0": self.kernel.coef0,
            },
            "C": self.C,
            "epsilon": self.epsilon,
            "bias": self.bias,
            "support_vectors": self.support_vectors.tolist(),
            "coefficients": self.coefficients.tolist(),
            "norm": None
            if self.norm is None
            else {"kind": self.norm.kind, "offset": self.norm.offset, "scale": self.norm.scale},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SvrModel":
        if doc.get("format_version") != MODEL_FORMAT_VERSION:
            raise DataError(f"unsupported svr model version {doc.get('format_version')!r}")
        norm = doc.get("norm")
        return cls(
            support_vectors=np.asarray(doc["support_vectors"], dtype=np.float64),
            coefficients=np.asarray(doc["coefficients"], dtype=np.float64),
            bias=float(doc["bias"]),
            kernel=KernelSpec(**doc["kernel"]),
            C=float(doc["C"]),
            epsilon=float(doc["epsilon"]),
            norm=None if norm is None else NormParams(**norm),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path) -> "SvrModel":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def kernel_eval(spec: KernelSpec, x: np.ndarray, z: np.ndarray) -> float:
    """K(x, z) for a single pair of points."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise DataError(f"kernel operands have shapes {x.shape} and {z.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
        raise DataError("kernel operands must be finite")
    return float(kernel_matrix(spec, x[None, :], z[None, :])[0, 0])


def kernel_matrix(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Gram block K[i, j] = K(A_i, B_j)."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise DataError(f"kernel operands have {A.shape[1]} and {B.shape[1]} features")
    if spec.kind == "rbf":
        sq = (
            np.sum(A * A, axis=1)[:, None]
            + np.sum(B * B, axis=1)[None, :]
            - 2.0 * (A @ B.T)
        )
        return np.exp(-spec.gamma * np.maximum(sq, 0.0))
    return (spec.gamma * (A @ B.T) + spec.coef0) ** spec.degree


class _KernelRows:
    """Kernel rows on demand: full Gram when small, LRU row cache when large."""

    def __init__(self, spec: KernelSpec, X: np.ndarray, full: np.ndarray | None = None):
        self.spec = spec
        self.X = X
        n = X.shape[0]
        if full is not None:
            if full.shape != (n, n):
                raise DataError(f"precomputed Gram has shape {full.shape}, expected {(n, n)}")
            self.full = full
            self.cache = None
        elif n <= GRAM_CACHE_LIMIT:
            self.full = kernel_matrix(spec, X, X)
            self.cache = None
        else:
            self.full = None
            self.cache: OrderedDict[int, np.ndarray] = OrderedDict()

    def row(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[i]
        hit = self.cache.get(i)
        if hit is not None:
            self.cache.move_to_end(i)
            return hit
        row = kernel_matrix(self.spec, self.X[i : i + 1], self.X)[0]
        self.cache[i] = row
        if len(self.cache) > KERNEL_ROW_CACHE:
            self.cache.popitem(last=False)
        return row

    def diag(self) -> np.ndarray:
        if self.full is not None:
            return np.diagonal(self.full).copy()
        if self.spec.kind == "rbf":
            return np.ones(self.X.shape[0])
        sq = np.sum(self.X * self.X, axis=1)
        return (self.spec.gamma * sq + self.spec.coef0) ** self.spec.degree


def dual_objective(K: np.ndarray, y: np.ndarray, beta: np.ndarray, epsilon: float) -> float:
    """W(beta) = -1/2 beta'K beta - eps*||beta||_1 + y'beta (maximized by the dual)."""
    return float(-0.5 * beta @ K @ beta - epsilon * np.abs(beta).sum() + y @ beta)


def _candidate_values(beta, F, epsilon, C):
    """Ascent derivatives for increasing (v_up) and decreasing (v_dn) each beta_i."""
    v_up = np.where(beta >= 0, F - epsilon, F + epsilon)
    v_dn = np.where(beta <= 0, F + epsilon, F - epsilon)
    v_up = np.where(beta < C, v_up, -np.inf)
    v_dn = np.where(beta > -C, v_dn, np.inf)
    return v_up, v_dn


def kkt_violation(K: np.ndarray, y: np.ndarray, beta: np.ndarray, epsilon: float, C: float) -> float:
    """Largest pairwise KKT violation; <= 0 at the exact optimum."""
    F = y - K @ beta
    v_up, v_dn = _candidate_values(beta, F, epsilon, C)
    return float(v_up.max() - v_dn.min())


def fit_svr(
    X: np.ndarray,
    y: np.ndarray,
    C: float = 1.0,
    epsilon: float = 0.1,
    spec: KernelSpec | None = None,
    tol: float = 1e-3,
    max_passes: int = 200_000,
    norm: NormParams | None = None,
    gram: np.ndarray | None = None,
    selection: str = "max_violating",
    record_objective: bool = False,
) -> SvrModel:
    """Train epsilon-SVR by pairwise coordinate ascent on the dual.

    The up-coordinate is always the maximal KKT violator. selection picks
    the partner: "max_violating" takes the most violating down-coordinate;
    "second_order" takes the one with the largest exact objective gain,
    which converges in far fewer updates on smooth, strongly correlated
    designs. Both terminate on the same criterion (max violation < tol) and
    reach the same optimum within tol.

    `gram` optionally injects a precomputed full Gram matrix of X (callers
    fitting many targets on one design share it). Raises ConvergenceError
    when the violation is still above tol after max_passes pairwise updates.

    The returned model keeps only rows with nonzero coefficients; the full
    training coefficient vector stays available as model.training_beta_ and
    the update count as model.n_iter_.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DataError(f"fit_svr needs a 2-D X with >= 2 rows, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise DataError(f"y shape {y.shape} does not match {X.shape[0]} rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("fit_svr requires finite inputs")
    if not C > 0:
        raise DataError(f"C must be > 0, got {C}")
    if epsilon < 0:
        raise DataError(f"epsilon must be >= 0, got {epsilon}")
    if selection not in ("max_violating", "second_order"):
        raise DataError(f"unknown working-pair selection {selection!r}")
    spec = spec or KernelSpec(kind="rbf", gamma=1.0)

    n = X.shape[0]
    rows = _KernelRows(spec, X, full=gram)
    diag = rows.diag()
    beta = np.zeros(n)
    Kbeta = np.zeros(n)

    violation = np.inf
    n_iter = 0
    trace: list[float] = []
    for n_iter in range(1, max_passes + 1):
        if record_objective:
            trace.append(float(-0.5 * beta @ Kbeta - epsilon * np.abs(beta).sum() + y @ beta))
        F = y - Kbeta
        v_up, v_dn = _candidate_values(beta, F, epsilon, C)
        i = int(np.argmax(v_up))
        violation = v_up[i] - v_dn.min()
        if violation < tol:
            break
        row_i = rows.row(i)

        if selection == "second_order":
            gap = v_up[i] - v_dn
            eligible = gap > 0
            eta_all = np.maximum(diag[i] + diag - 2.0 * row_i, 1e-12)
            gain = np.where(eligible, gap * gap / eta_all, -np.inf)
            j = int(np.argmax(gain))
        else:
            j = int(np.argmin(v_dn))

        # Caps: box bounds, stopping at the beta = 0 kink of the |beta| term.
        cap_i = -beta[i] if beta[i] < 0 else C - beta[i]
        cap_j = beta[j] if beta[j] > 0 else C + beta[j]
        t_max = min(cap_i, cap_j)

        row_j = rows.row(j)
        eta = diag[i] + diag[j] - 2.0 * row_i[j]
        if eta > 1e-12:
            t = min((v_up[i] - v_dn[j]) / eta, t_max)
        else:
            t = t_max
        beta[i] += t
        beta[j] -= t
        Kbeta += t * (row_i - row_j)
    else:
        raise ConvergenceError(
            f"SVR did not converge in {max_passes} updates (violation {violation:.3e} > tol {tol})"
        )

    # Bias from unbounded support vectors when present, else the midpoint of
    # the feasible interval.
    F = y - Kbeta
    unbounded_up = (beta > 0) & (beta < C)
    unbounded_dn = (beta < 0) & (beta > -C)
    implied = np.concatenate([F[unbounded_up] - epsilon, F[unbounded_dn] + epsilon])
    if implied.size:
        bias = float(implied.mean())
    else:
        v_up, v_dn = _candidate_values(beta, F, epsilon, C)
        bias = float(0.5 * (v_up.max() + v_dn.min()))

    # Rows inside the tube (beta exactly 0) contribute nothing to predictions.
    sv = beta != 0.0
    model = SvrModel(
        support_vectors=X[sv].copy(),
        coefficients=beta[sv].copy(),
        bias=bias,
        kernel=spec,
        C=C,
        epsilon=epsilon,
        norm=norm,
    )
    model.n_iter_ = n_iter
    model.training_beta_ = beta
    if record_objective:
        model.objective_trace_ = trace
    return model


def predict_svr(model: SvrModel, rows: np.ndarray) -> np.ndarray:
    """f(x) = sum_i beta_i K(x_i, x) + b, denormalized to signal units."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[None, :]
    if rows.shape[1] != model.support_vectors.shape[1]:
        raise DataError(
            f"rows have {rows.shape[1]} features, model expects "
            f"{model.support_vectors.shape[1]}"
        )
    K = kernel_matrix(model.kernel, rows, model.support_vectors)
    f = K @ model.coefficients + model.bias
    if model.norm is not None:
        f = denormalize(f, model.norm)
    return f
