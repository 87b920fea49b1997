"""Pipeline configuration: schema-versioned JSON parsing and fingerprinting."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .emd import EmdConfig
from .errors import ConfigError

SCHEMA_VERSION = 1
BUNDLE_VERSION = "1"

MODEL_KINDS = ("svr", "rbf", "persistence", "exp_smoothing")
FEATURE_MODEL_KINDS = ("svr", "rbf")

DEFAULT_LAGS = [1, 2, 3, 4, 5, 6]


@dataclass(frozen=True)
class SeriesSpec:
    path: str
    column: str
    role: str  # "target" | "exogenous"
    gap_policy: str = "interpolate_max3"


@dataclass(frozen=True)
class ModelSpec:
    name: str
    kind: str
    grid: list[dict] = field(default_factory=lambda: [{}])
    tol: float = 1e-3
    max_passes: int = 200_000
    ridge: float = 1e-8
    selection: str = "max_violating"  # svr working-pair rule


@dataclass(frozen=True)
class ImportanceConfig:
    threshold: float = 0.3
    combine: str = "max"
    rf: dict = field(default_factory=dict)  # fit_random_forest keyword overrides
    bt: dict = field(default_factory=dict)  # fit_gbt keyword overrides


@dataclass(frozen=True)
class PipelineConfig:
    inputs: list[SeriesSpec]
    horizons: list[int]
    holdout: int
    models: list[ModelSpec]
    emd: EmdConfig = field(default_factory=EmdConfig)
    lags: list[int] = field(default_factory=lambda: list(DEFAULT_LAGS))
    importance: ImportanceConfig = field(default_factory=ImportanceConfig)
    cv_folds: int = 10
    seed: int = 0
    normalization: str = "minmax"
    time_of_day: bool = False
    drop_edge_samples: bool = False

    def __post_init__(self):
        targets = [s for s in self.inputs if s.role == "target"]
        if len(targets) != 1:
            raise ConfigError(f"config needs exactly one target input, got {len(targets)}")
        if not self.horizons or any(h < 1 for h in self.horizons):
            raise ConfigError(f"horizons must be a non-empty list of ints >= 1, got {self.horizons}")
        if len(set(self.horizons)) != len(self.horizons):
            raise ConfigError("horizons must be unique")
        if not self.lags or any(l < 0 for l in self.lags):
            raise ConfigError(f"lags must be non-empty with entries >= 0, got {self.lags}")
        if self.cv_folds < 2:
            raise ConfigError(f"cv_folds must be >= 2, got {self.cv_folds}")
        if self.holdout < max(self.horizons):
            raise ConfigError(
                f"holdout ({self.holdout}) must cover the largest horizon ({max(self.horizons)})"
            )
        if not self.models:
            raise ConfigError("at least one model spec is required")
        names = [m.name for m in self.models]
        if len(set(names)) != len(names):
            raise ConfigError(f"model names must be unique, got {names}")
        if self.normalization not in ("minmax", "zscore"):
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        if not 0 <= self.importance.threshold <= 1:
            raise ConfigError(f"importance threshold must be in [0, 1], got {self.importance.threshold}")
        if self.importance.combine != "max":
            raise ConfigError(f"unsupported importance combine rule {self.importance.combine!r}")

    @property
    def target(self) -> SeriesSpec:
        return next(s for s in self.inputs if s.role == "target")

    @property
    def exogenous(self) -> list[SeriesSpec]:
        return [s for s in self.inputs if s.role != "target"]

    def has_feature_models(self) -> bool:
        return any(m.kind in FEATURE_MODEL_KINDS for m in self.models)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "inputs": [
                {"path": s.path, "column": s.column, "role": s.role, "gap_policy": s.gap_policy}
                for s in self.inputs
            ],
            "emd": {
                "sd_threshold": self.emd.sd_threshold,
                "max_sift_iters": self.emd.max_sift_iters,
                "max_imfs": self.emd.max_imfs,
                "boundary_pad_extrema": self.emd.boundary_pad_extrema,
            },
            "lags": list(self.lags),
            "horizons": list(self.horizons),
            "importance": {
                "threshold": self.importance.threshold,
                "combine": self.importance.combine,
                "rf": dict(self.importance.rf),
                "bt": dict(self.importance.bt),
            },
            "models": [
                {
                    "name": m.name,
                    "kind": m.kind,
                    "grid": [dict(g) for g in m.grid],
                    "tol": m.tol,
                    "max_passes": m.max_passes,
                    "ridge": m.ridge,
                    "selection": m.selection,
                }
                for m in self.models
            ],
            "cv_folds": self.cv_folds,
            "holdout": self.holdout,
            "seed": self.seed,
            "normalization": self.normalization,
            "time_of_day": self.time_of_day,
            "drop_edge_samples": self.drop_edge_samples,
        }

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _require(doc: dict, key: str, context: str):
    if key not in doc:
        raise ConfigError(f"{context}: missing required key {key!r}")
    return doc[key]


def _check_keys(doc: dict, allowed: set[str], context: str):
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")


def parse_model_spec(doc: dict) -> ModelSpec:
    _check_keys(doc, {"name", "kind", "grid", "tol", "max_passes", "ridge", "selection"}, "model spec")
    kind = _require(doc, "kind", "model spec")
    if kind not in MODEL_KINDS:
        raise ConfigError(f"unknown model kind {kind!r} (expected one of {MODEL_KINDS})")
    grid = doc.get("grid", [{}])
    if not isinstance(grid, list) or not grid or not all(isinstance(g, dict) for g in grid):
        raise ConfigError(f"model {kind!r}: grid must be a non-empty list of parameter objects")
    selection = doc.get("selection", "max_violating")
    if selection not in ("max_violating", "second_order"):
        raise ConfigError(f"unknown svr selection rule {selection!r}")
    return ModelSpec(
        name=doc.get("name", kind),
        kind=kind,
        grid=[dict(g) for g in grid],
        tol=float(doc.get("tol", 1e-3)),
        max_passes=int(doc.get("max_passes", 200_000)),
        ridge=float(doc.get("ridge", 1e-8)),
        selection=selection,
    )


def config_from_dict(doc: dict) -> PipelineConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config schema_version {version!r} (expected {SCHEMA_VERSION})")
    _check_keys(
        doc,
        {
            "schema_version", "inputs", "emd", "lags", "horizons", "importance",
            "models", "cv_folds", "holdout", "seed", "normalization",
            "time_of_day", "drop_edge_samples",
        },
        "config",
    )

    inputs = []
    for entry in _require(doc, "inputs", "config"):
        _check_keys(entry, {"path", "column", "role", "gap_policy"}, "input spec")
        role = entry.get("role", "exogenous")
        if role not in ("target", "exogenous"):
            raise ConfigError(f"input role must be 'target' or 'exogenous', got {role!r}")
        inputs.append(
            SeriesSpec(
                path=str(_require(entry, "path", "input spec")),
                column=str(_require(entry, "column", "input spec")),
                role=role,
                gap_policy=entry.get("gap_policy", "interpolate_max3"),
            )
        )

    emd_doc = doc.get("emd", {})
    _check_keys(emd_doc, {"sd_threshold", "max_sift_iters", "max_imfs", "boundary_pad_extrema"}, "emd")
    try:
        emd_cfg = EmdConfig(
            sd_threshold=float(emd_doc.get("sd_threshold", 0.2)),
            max_sift_iters=int(emd_doc.get("max_sift_iters", 100)),
            max_imfs=int(emd_doc.get("max_imfs", 12)),
            boundary_pad_extrema=int(emd_doc.get("boundary_pad_extrema", 2)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid emd config: {exc}") from exc

    imp_doc = doc.get("importance", {})
    _check_keys(imp_doc, {"threshold", "combine", "rf", "bt"}, "importance")
    importance = ImportanceConfig(
        threshold=float(imp_doc.get("threshold", 0.3)),
        combine=imp_doc.get("combine", "max"),
        rf=dict(imp_doc.get("rf", {})),
        bt=dict(imp_doc.get("bt", {})),
    )

    models = [parse_model_spec(m) for m in _require(doc, "models", "config")]

    try:
        return PipelineConfig(
            inputs=inputs,
            horizons=[int(h) for h in _require(doc, "horizons", "config")],
            holdout=int(_require(doc, "holdout", "config")),
            models=models,
            emd=emd_cfg,
            lags=[int(l) for l in doc.get("lags", DEFAULT_LAGS)],
            importance=importance,
            cv_folds=int(doc.get("cv_folds", 10)),
            seed=int(doc.get("seed", 0)),
            normalization=doc.get("normalization", "minmax"),
            time_of_day=bool(doc.get("time_of_day", False)),
            drop_edge_samples=bool(doc.get("drop_edge_samples", False)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config value: {exc}") from exc


def load_config(path) -> PipelineConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot open config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(doc)
