"""End-to-end orchestration: decompose, rank, prune, cross-validate, train,
forecast, evaluate; plus the on-disk artifact store.

The decomposition and all supervised-learning features are computed on the
training range only; the holdout enters a run solely as evaluation actuals.
The canonical evaluation forecasts every configured horizon from the single
origin at the end of the training range, mirroring a reserved-final-window
assessment.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from . import baselines, forest, svr
from .baselines import MetricsReport
from .config import BUNDLE_VERSION, FEATURE_MODEL_KINDS, ModelSpec, PipelineConfig
from .emd import decompose
from .errors import ConfigError, DataError
from .features import FeatureMatrix, SeriesComponents, build_matrix, prune_by_importance
from .rbfnet import RbfNetwork, fit_rbf, predict_rbf
from .series_io import NormParams, TimeSeries, load_csv, normalize, split_holdout
from .spectral import inst_attributes
from .svr import KernelSpec, SvrModel, fit_svr, predict_svr


def _atomic_write(path, text: str) -> None:
    """Write via temp + rename so failures never leave partial artifacts."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _seed_for(master: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master, spawn_key=tuple(key))


# ---------------------------------------------------------------------------
# Decomposition stage


@dataclass
class DecompositionArtifact:
    """Per-series components on the training range, in normalized units."""

    components: dict[str, SeriesComponents]
    norms: dict[str, NormParams]
    train: dict[str, TimeSeries]  # raw training-range series
    test: TimeSeries  # raw holdout of the target
    target_name: str

    @property
    def n_train(self) -> int:
        return len(self.train[self.target_name])


def _guarded_normalize(series: TimeSeries, kind: str) -> tuple[TimeSeries, NormParams]:
    """normalize(), but constant series map to zeros instead of erroring so a
    flat exogenous input cannot abort a run."""
    if np.ptp(series.values) == 0.0:
        params = NormParams(kind=kind, offset=float(series.values[0]), scale=1.0)
        flat = TimeSeries(series.values - params.offset, series.start_time, series.step, series.name)
        return flat, params
    return normalize(series, kind)


def run_decompose(config: PipelineConfig) -> DecompositionArtifact:
    """Load inputs, split off the holdout, decompose the normalized training
    ranges into IMFs and instantaneous attributes."""
    components: dict[str, SeriesComponents] = {}
    norms: dict[str, NormParams] = {}
    train: dict[str, TimeSeries] = {}
    test_target: TimeSeries | None = None

    n_ref = None
    for spec in config.inputs:
        series = load_csv(spec.path, spec.column, spec.gap_policy)
        if n_ref is None:
            n_ref = len(series)
        elif len(series) != n_ref:
            raise DataError(
                f"input series must share one length, got {len(series)} for "
                f"{spec.column!r} vs {n_ref}"
            )
        tr, te = split_holdout(series, config.holdout)
        train[spec.column] = tr
        if spec.role == "target":
            test_target = te
        normed, params = _guarded_normalize(tr, config.normalization)
        norms[spec.column] = params
        emd_result = decompose(normed, config.emd)
        attrs = [inst_attributes(imf) for imf in emd_result.imfs]
        components[spec.column] = SeriesComponents(
            name=spec.column, emd=emd_result, attributes=attrs
        )

    return DecompositionArtifact(
        components=components,
        norms=norms,
        train=train,
        test=test_target,
        target_name=config.target.column,
    )


def write_decomposition_csv(artifact: DecompositionArtifact, directory) -> list[str]:
    """Export one CSV per series: IMF1..k, A1..k, F1..k, residue columns."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name, sc in artifact.components.items():
        header = [f"IMF{i + 1}" for i in range(sc.emd.n_imfs)]
        header += [f"A{i + 1}" for i in range(sc.emd.n_imfs)]
        header += [f"F{i + 1}" for i in range(sc.emd.n_imfs)]
        header.append("residue")
        cols = list(sc.emd.imfs)
        cols += [a.amplitude for a in sc.attributes]
        cols += [a.frequency for a in sc.attributes]
        cols.append(sc.emd.residue)
        lines = [",".join(header)]
        for r in range(len(sc.emd.residue)):
            lines.append(",".join(repr(float(c[r])) for c in cols))
        path = os.path.join(directory, f"{name}.csv")
        _atomic_write(path, "\n".join(lines) + "\n")
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# Feature assembly and ranking


def _normalized_values(artifact: DecompositionArtifact, name: str) -> np.ndarray:
    from .series_io import apply_norm

    return apply_norm(artifact.train[name].values, artifact.norms[name])


def assemble_matrix(config: PipelineConfig, artifact: DecompositionArtifact) -> FeatureMatrix:
    """Full (unpruned) design matrix over all components, raw series and lags."""
    components = [artifact.components[s.column] for s in config.inputs]
    raw = [(s.column, _normalized_values(artifact, s.column)) for s in config.inputs]
    target = _normalized_values(artifact, config.target.column)

    time_of_day = None
    if config.time_of_day:
        tr = artifact.train[config.target.column]
        times = tr.start_time + np.arange(len(tr)) * tr.step
        time_of_day = (times % 86400.0) / 3600.0

    valid_bounds = None
    if config.drop_edge_samples:
        n = artifact.n_train
        ranges = [
            at.valid_range
            for sc in artifact.components.values()
            for at in sc.attributes
        ]
        if ranges:
            valid_bounds = (max(r[0] for r in ranges), min(r[1] for r in ranges))
        else:
            valid_bounds = (0, n)

    return build_matrix(
        components=components,
        raw=raw,
        target=target,
        lags=config.lags,
        horizons=config.horizons,
        time_of_day=time_of_day,
        valid_bounds=valid_bounds,
    )


@dataclass
class RankingResult:
    feature_labels: list[str]
    report: forest.ImportanceReport

    @property
    def combined(self) -> np.ndarray:
        return self.report.combined()

    def to_csv(self) -> str:
        rf = self.report.entries["random_forest"].normalized
        bt = self.report.entries["gradient_boost"].normalized
        lines = ["feature,rf_importance,bt_importance"]
        for label, a, b in zip(self.feature_labels, rf, bt):
            lines.append(f"{label},{a!r},{b!r}")
        return "\n".join(lines) + "\n"


def run_rank(
    config: PipelineConfig, artifact: DecompositionArtifact, matrix: FeatureMatrix | None = None
) -> RankingResult:
    """Fit RF and GBT on the full matrix at the smallest horizon and rank
    every column by mean-decrease-impurity importance."""
    matrix = matrix if matrix is not None else assemble_matrix(config, artifact)
    if matrix.n_rows == 0:
        raise DataError("feature matrix has no rows; cannot rank")
    X = matrix.to_array()
    y = matrix.targets[min(config.horizons)]

    rf_seed, bt_seed = (int(s.generate_state(1)[0]) for s in _seed_for(config.seed, 0).spawn(2))
    rf_params = {"n_trees": 100, "min_leaf": 5, **config.importance.rf}
    bt_params = {"n_rounds": 200, "shrinkage": 0.1, "max_depth": 3, **config.importance.bt}
    rf_model = forest.fit_random_forest(X, y, seed=rf_seed, **rf_params)
    bt_model = forest.fit_gbt(X, y, seed=bt_seed, **bt_params)
    report = forest.importance(rf_model).merge(forest.importance(bt_model))
    return RankingResult(feature_labels=matrix.labels, report=report)


# ---------------------------------------------------------------------------
# Cross-validation and training


@dataclass
class CvResult:
    best_params: dict
    table: list[dict]  # one row per grid point: params + mean fold MAE


class _BaselineModel:
    """Per-horizon baseline: forecasts depend on the raw target series only."""

    def __init__(self, kind: str, horizon: int, alpha: float | None = None):
        self.kind = kind
        self.horizon = horizon
        self.alpha = alpha

    def forecast_at(self, series_values: np.ndarray, origins: np.ndarray) -> np.ndarray:
        if self.kind == "persistence":
            return series_values[origins]
        levels = baselines.smoothing_levels(series_values, self.alpha)
        return levels[origins]

    def to_dict(self) -> dict:
        return {"model": self.kind, "horizon": self.horizon, "alpha": self.alpha}


def _kernel_from_params(params: dict) -> KernelSpec:
    return KernelSpec(
        kind=params.get("kernel", "rbf"),
        gamma=float(params.get("gamma", 1.0)),
        degree=int(params.get("degree", 3)),
        coef0=float(params.get("coef0", 0.0)),
    )


def _fit_feature_model(
    spec: ModelSpec,
    params: dict,
    X: np.ndarray,
    y: np.ndarray,
    norm: NormParams,
    seed_seq: np.random.SeedSequence,
    gram: np.ndarray | None = None,
):
    if spec.kind == "svr":
        return fit_svr(
            X,
            y,
            C=float(params.get("C", 1.0)),
            epsilon=float(params.get("epsilon", 0.1)),
            spec=_kernel_from_params(params),
            tol=spec.tol,
            max_passes=spec.max_passes,
            norm=norm,
            gram=gram,
            selection=spec.selection,
        )
    if spec.kind == "rbf":
        return fit_rbf(
            X,
            y,
            k=int(params.get("k", 16)),
            ridge=spec.ridge,
            seed=seed_seq,
            norm=norm,
        )
    raise ConfigError(f"not a feature model kind: {spec.kind}")


def _predict_feature_model(model, rows: np.ndarray) -> np.ndarray:
    if isinstance(model, SvrModel):
        return predict_svr(model, rows)
    if isinstance(model, RbfNetwork):
        return predict_rbf(model, rows)
    raise DataError(f"unknown model object {type(model).__name__}")


def _grid_key(params: dict) -> str:
    return json.dumps(params, sort_keys=True)


def run_cv(
    config: PipelineConfig,
    matrix: FeatureMatrix,
    model_spec: ModelSpec,
    horizon: int,
    artifact: DecompositionArtifact,
) -> CvResult:
    """Grid search with time-ordered contiguous folds.

    For each grid point the mean validation MAE (signal units) over the
    folds is recorded; the argmin wins, ties broken by grid order.
    """
    if not model_spec.grid:
        raise ConfigError(f"model {model_spec.name!r}: empty grid")
    n = matrix.n_rows
    if n < config.cv_folds:
        raise DataError(f"{n} rows are too few for {config.cv_folds}-fold CV")

    folds = np.array_split(np.arange(n), config.cv_folds)
    X = matrix.to_array()
    target_norm = artifact.norms[artifact.target_name]
    y_norm = matrix.targets[horizon]
    from .series_io import denormalize

    y_raw = denormalize(y_norm, target_norm)
    raw_values = artifact.train[artifact.target_name].values
    origins = matrix.row_time_index

    table = []
    errors = []
    for params in model_spec.grid:
        fold_maes = []
        for fold in folds:
            train_rows = np.setdiff1d(np.arange(n), fold)
            if model_spec.kind in FEATURE_MODEL_KINDS:
                model = _fit_feature_model(
                    model_spec, params, X[train_rows], y_norm[train_rows],
                    target_norm, _seed_for(config.seed, 1, horizon),
                )
                pred = _predict_feature_model(model, X[fold])
            else:
                bl = _BaselineModel(model_spec.kind, horizon, alpha=params.get("alpha"))
                pred = bl.forecast_at(raw_values, origins[fold])
            fold_maes.append(float(np.mean(np.abs(pred - y_raw[fold]))))
        mean_mae = float(np.mean(fold_maes))
        errors.append(mean_mae)
        table.append({"params": dict(params), "mean_mae": mean_mae, "fold_maes": fold_maes})
    best = int(np.argmin(errors))
    return CvResult(best_params=dict(model_spec.grid[best]), table=table)


@dataclass
class ModelBundle:
    """Trained per-horizon models for every configured spec."""

    fingerprint: str
    version: str
    retained_labels: list[str]
    retained_indices: list[int]
    ranking: RankingResult | None
    models: dict[str, dict[int, object]]  # spec name -> horizon -> model
    chosen_params: dict[str, dict[int, dict]]
    cv_tables: dict[str, dict[int, list[dict]]]
    norms: dict[str, NormParams]
    target_name: str

    def spec_names(self) -> list[str]:
        return list(self.models.keys())


def run_train(
    config: PipelineConfig, artifact: DecompositionArtifact | None = None
) -> tuple[ModelBundle, DecompositionArtifact]:
    """Prune by importance, select hyperparameters, fit the final models."""
    artifact = artifact if artifact is not None else run_decompose(config)

    ranking = None
    pruned = None
    retained_labels: list[str] = []
    retained_indices: list[int] = []
    if config.has_feature_models():
        full = assemble_matrix(config, artifact)
        ranking = run_rank(config, artifact, matrix=full)
        pruned = prune_by_importance(full, ranking.combined, config.importance.threshold)
        label_to_idx = {label: i for i, label in enumerate(full.labels)}
        retained_labels = pruned.labels
        retained_indices = [label_to_idx[l] for l in retained_labels]

    target_norm = artifact.norms[artifact.target_name]
    models: dict[str, dict[int, object]] = {}
    chosen: dict[str, dict[int, dict]] = {}
    tables: dict[str, dict[int, list[dict]]] = {}

    X_final = pruned.to_array() if pruned is not None else None
    gram_cache: dict[str, np.ndarray] = {}

    def shared_gram(params: dict) -> np.ndarray:
        # Per-horizon fits reuse one Gram per distinct kernel parameterization.
        kernel = _kernel_from_params(params)
        key = _grid_key({"kernel": kernel.kind, "gamma": kernel.gamma,
                         "degree": kernel.degree, "coef0": kernel.coef0})
        if key not in gram_cache:
            gram_cache[key] = svr.kernel_matrix(kernel, X_final, X_final)
        return gram_cache[key]

    for spec in config.models:
        models[spec.name] = {}
        chosen[spec.name] = {}
        tables[spec.name] = {}
        for horizon in config.horizons:
            if spec.kind == "persistence":
                params, table = {}, []
            elif len(spec.grid) == 1:
                params, table = dict(spec.grid[0]), []
            else:
                cv = run_cv(config, pruned if pruned is not None else _baseline_matrix(config, artifact),
                            spec, horizon, artifact)
                params, table = cv.best_params, cv.table

            if spec.kind in FEATURE_MODEL_KINDS:
                y = pruned.targets[horizon]
                gram = shared_gram(params) if spec.kind == "svr" else None
                model = _fit_feature_model(
                    spec, params, X_final, y, target_norm,
                    _seed_for(config.seed, 2, horizon), gram=gram,
                )
            else:
                model = _BaselineModel(spec.kind, horizon, alpha=params.get("alpha"))
            models[spec.name][horizon] = model
            chosen[spec.name][horizon] = params
            tables[spec.name][horizon] = table

    bundle = ModelBundle(
        fingerprint=config.fingerprint(),
        version=BUNDLE_VERSION,
        retained_labels=retained_labels,
        retained_indices=retained_indices,
        ranking=ranking,
        models=models,
        chosen_params=chosen,
        cv_tables=tables,
        norms=artifact.norms,
        target_name=artifact.target_name,
    )
    return bundle, artifact


def _baseline_matrix(config: PipelineConfig, artifact: DecompositionArtifact) -> FeatureMatrix:
    """Matrix scaffold for configs without feature models: rows/targets only."""
    target = _normalized_values(artifact, config.target.column)
    return build_matrix(
        components=[],
        raw=[(config.target.column, target)],
        target=target,
        lags=config.lags,
        horizons=config.horizons,
    )


# ---------------------------------------------------------------------------
# Forecasting and evaluation


def feature_rows_at(
    config: PipelineConfig,
    artifact: DecompositionArtifact,
    bundle: ModelBundle,
    origins: np.ndarray,
) -> np.ndarray:
    """Retained feature values at the given forecast origins."""
    matrix = assemble_matrix_at(config, artifact, origins)
    return matrix.to_array()[:, bundle.retained_indices]


def assemble_matrix_at(
    config: PipelineConfig, artifact: DecompositionArtifact, origins: np.ndarray
) -> FeatureMatrix:
    """Full-column matrix evaluated at explicit origins (no target alignment)."""
    components = [artifact.components[s.column] for s in config.inputs]
    raw = [(s.column, _normalized_values(artifact, s.column)) for s in config.inputs]
    n = artifact.n_train
    max_lag = max(config.lags)
    origins = np.asarray(origins, dtype=np.intp)
    if origins.size == 0:
        raise DataError("empty forecast origin range")
    if origins.min() - max_lag < 0 or origins.max() >= n:
        raise DataError(
            f"origins [{origins.min()}, {origins.max()}] outside feature coverage "
            f"[{max_lag}, {n - 1}]"
        )

    sources = []
    for sc in components:
        sources.extend((sc.name, comp, arr) for comp, arr in sc.component_arrays())
    sources.extend((name, "RAW", arr) for name, arr in raw)

    from .features import FeatureColumn

    columns = [
        FeatureColumn(series, comp, lag, arr[origins - lag])
        for series, comp, arr in sources
        for lag in config.lags
    ]
    if config.time_of_day:
        tr = artifact.train[config.target.column]
        times = tr.start_time + origins * tr.step
        hours = (times % 86400.0) / 3600.0
        angle = 2.0 * np.pi * hours / 24.0
        columns.append(FeatureColumn("time", "TOD_SIN", 0, np.sin(angle)))
        columns.append(FeatureColumn("time", "TOD_COS", 0, np.cos(angle)))
    return FeatureMatrix(columns=columns, targets={}, row_time_index=origins)


def run_forecast(
    config: PipelineConfig,
    bundle: ModelBundle,
    artifact: DecompositionArtifact,
    origins: np.ndarray | None = None,
) -> dict[str, dict[int, np.ndarray]]:
    """Per-model, per-horizon forecasts (signal units) from the given origins.

    Defaults to the single origin at the end of the training range.
    """
    if bundle.fingerprint != config.fingerprint():
        raise DataError("bundle fingerprint does not match the current config; retrain first")
    n = artifact.n_train
    if origins is None:
        origins = np.array([n - 1], dtype=np.intp)
    origins = np.asarray(origins, dtype=np.intp)

    feature_rows = None
    if bundle.retained_indices:
        feature_rows = feature_rows_at(config, artifact, bundle, origins)
    raw_values = artifact.train[artifact.target_name].values

    out: dict[str, dict[int, np.ndarray]] = {}
    for spec in config.models:
        out[spec.name] = {}
        for horizon in config.horizons:
            model = bundle.models[spec.name][horizon]
            if isinstance(model, _BaselineModel):
                pred = model.forecast_at(raw_values, origins)
            else:
                if feature_rows is None:
                    raise DataError("bundle has no retained features for a feature model")
                pred = _predict_feature_model(model, feature_rows)
            out[spec.name][horizon] = pred
    return out


def _sub_interval_spec(horizons: list[int], holdout: int) -> list[tuple[str, int, int]]:
    """24-sample blocks over the evaluated horizon list, labelled in hours."""
    hs = sorted(horizons)
    subs = []
    block = 24
    for lo in range(0, holdout, block):
        hi = min(lo + block, holdout)
        members = [i for i, h in enumerate(hs) if lo < h <= hi]
        if members:
            subs.append((f"{lo}-{hi}h", members[0], members[-1] + 1))
    return subs if len(subs) > 1 else []


@dataclass
class EvaluationReport:
    model_order: list[str]
    metrics: dict[str, MetricsReport]
    forecasts: dict[str, np.ndarray]  # per model, aligned with horizons
    actuals: np.ndarray
    horizons: list[int]
    fingerprint: str

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "fingerprint": self.fingerprint,
            "horizons": [int(h) for h in self.horizons],
            "order": self.model_order,
            "models": {name: m.to_dict() for name, m in self.metrics.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def run_evaluate(
    config: PipelineConfig,
    bundle: ModelBundle,
    artifact: DecompositionArtifact,
) -> EvaluationReport:
    """Forecast the holdout from the end of training and score every model."""
    test = artifact.test
    hs = sorted(config.horizons)
    if len(test) < max(hs):
        raise DataError(f"holdout of {len(test)} samples cannot cover horizon {max(hs)}")

    forecasts = run_forecast(config, bundle, artifact)
    actuals = np.array([test.values[h - 1] for h in hs])

    subs = _sub_interval_spec(hs, config.holdout)
    report_metrics: dict[str, MetricsReport] = {}
    flat_forecasts: dict[str, np.ndarray] = {}
    for spec in config.models:
        pred = np.array([float(forecasts[spec.name][h][0]) for h in hs])
        flat_forecasts[spec.name] = pred
        report_metrics[spec.name] = baselines.metrics(actuals, pred, sub_intervals=subs)

    return EvaluationReport(
        model_order=[spec.name for spec in config.models],
        metrics=report_metrics,
        forecasts=flat_forecasts,
        actuals=actuals,
        horizons=hs,
        fingerprint=bundle.fingerprint,
    )


def comparison_table(report: EvaluationReport) -> str:
    """Fixed-width comparison of every model's MAPE/MAE/RMSE, overall and
    per sub-interval."""
    rows = [("interval", "model", "MAPE,%", "MAE", "RMSE")]
    for name in report.model_order:
        m = report.metrics[name]
        mape = "-" if m.mape is None else f"{m.mape:.2f}"
        rows.append(("overall", name, mape, f"{m.mae:.4f}", f"{m.rmse:.4f}"))
    for i, _ in enumerate(report.metrics[report.model_order[0]].sub_intervals):
        for name in report.model_order:
            s = report.metrics[name].sub_intervals[i]
            mape = "-" if s.mape is None else f"{s.mape:.2f}"
            rows.append((s.label, name, mape, f"{s.mae:.4f}", f"{s.rmse:.4f}"))
    widths = [max(len(r[c]) for r in rows) for c in range(5)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Workspace artifact store


class Workspace:
    """Directory tree of run artifacts; every write is temp-then-rename."""

    def __init__(self, root):
        self.root = str(root)

    def path(self, *parts) -> str:
        return os.path.join(self.root, *parts)

    def ensure(self, *subdirs) -> None:
        os.makedirs(self.root, exist_ok=True)
        for sub in subdirs:
            os.makedirs(self.path(sub), exist_ok=True)

    def write_text(self, rel: str, text: str) -> str:
        full = self.path(rel)
        os.makedirs(os.path.dirname(full), exist_ok=True)
        _atomic_write(full, text)
        return full


def _model_to_doc(model) -> dict:
    if isinstance(model, (SvrModel, RbfNetwork)):
        return model.to_dict()
    return model.to_dict()  # _BaselineModel


def _model_from_doc(doc: dict):
    kind = doc.get("model")
    if kind == "svr":
        return SvrModel.from_dict(doc)
    if kind == "rbf":
        return RbfNetwork.from_dict(doc)
    if kind in ("persistence", "exp_smoothing"):
        return _BaselineModel(kind, int(doc["horizon"]), alpha=doc.get("alpha"))
    raise DataError(f"unknown persisted model kind {kind!r}")


def save_bundle(bundle: ModelBundle, workspace: Workspace) -> list[str]:
    """Persist per-horizon model files plus the bundle manifest."""
    workspace.ensure("models")
    paths = []
    files: dict[str, dict[str, str]] = {}
    for name, per_h in bundle.models.items():
        files[name] = {}
        for horizon, model in per_h.items():
            rel = f"models/{name}_h{horizon}.json"
            paths.append(
                workspace.write_text(rel, json.dumps(_model_to_doc(model), sort_keys=True))
            )
            files[name][str(horizon)] = rel
    manifest = {
        "version": bundle.version,
        "fingerprint": bundle.fingerprint,
        "retained_features": bundle.retained_labels,
        "retained_indices": bundle.retained_indices,
        "chosen_params": {
            name: {str(h): p for h, p in per_h.items()}
            for name, per_h in bundle.chosen_params.items()
        },
        "cv_tables": {
            name: {str(h): t for h, t in per_h.items()}
            for name, per_h in bundle.cv_tables.items()
        },
        "model_files": files,
        "norms": {
            name: {"kind": p.kind, "offset": p.offset, "scale": p.scale}
            for name, p in bundle.norms.items()
        },
        "target": bundle.target_name,
    }
    paths.append(
        workspace.write_text("models/bundle.json", json.dumps(manifest, sort_keys=True, indent=2))
    )
    return paths


def load_bundle(workspace: Workspace) -> ModelBundle:
    manifest_path = workspace.path("models", "bundle.json")
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise DataError(f"no trained bundle at {manifest_path} (run train first): {exc}") from exc
    if manifest.get("version") != BUNDLE_VERSION:
        raise DataError(f"unsupported bundle version {manifest.get('version')!r}")

    models: dict[str, dict[int, object]] = {}
    for name, per_h in manifest["model_files"].items():
        models[name] = {}
        for h, rel in per_h.items():
            with open(workspace.path(rel), "r", encoding="utf-8") as fh:
                models[name][int(h)] = _model_from_doc(json.load(fh))
    return ModelBundle(
        fingerprint=manifest["fingerprint"],
        version=manifest["version"],
        retained_labels=list(manifest["retained_features"]),
        retained_indices=[int(i) for i in manifest["retained_indices"]],
        ranking=None,
        models=models,
        chosen_params={
            name: {int(h): dict(p) for h, p in per_h.items()}
            for name, per_h in manifest["chosen_params"].items()
        },
        cv_tables={
            name: {int(h): list(t) for h, t in per_h.items()}
            for name, per_h in manifest["cv_tables"].items()
        },
        norms={
            name: NormParams(kind=p["kind"], offset=p["offset"], scale=p["scale"])
            for name, p in manifest["norms"].items()
        },
        target_name=manifest["target"],
    )


def write_forecast_csv(report: EvaluationReport, workspace: Workspace) -> list[str]:
    """Per-model forecast-vs-actual pairs, one CSV per model."""
    workspace.ensure("forecasts")
    paths = []
    for name in report.model_order:
        lines = ["horizon,actual,forecast"]
        for h, a, f in zip(report.horizons, report.actuals, report.forecasts[name]):
            lines.append(f"{h},{a!r},{f!r}")
        paths.append(workspace.write_text(f"forecasts/{name}.csv", "\n".join(lines) + "\n"))
    return paths
