"""Command-line interface.

Subcommands map 1:1 onto the pipeline stages; `compare` renders the stored
multi-model metrics table. Exit codes: 0 success, 1 usage/config error,
2 data error, 3 convergence or compute error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .config import PipelineConfig, load_config
from .errors import ConfigError, ConvergenceError, DataError
from . import pipeline

WORKSPACE_ENV = "HHTFORECAST_WORKSPACE"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_COMPUTE = 3


@dataclasses.dataclass
class CommandOutcome:
    exit_code: int
    summary: str
    artifact_paths: list[str]

    def to_dict(self) -> dict:
        return {
            "exit_code": self.exit_code,
            "summary": self.summary,
            "artifact_paths": list(self.artifact_paths),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CommandOutcome":
        return cls(
            exit_code=int(doc["exit_code"]),
            summary=str(doc["summary"]),
            artifact_paths=[str(p) for p in doc["artifact_paths"]],
        )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hhtforecast",
        description="Hybrid short-term forecasting: signal decomposition, "
        "importance-pruned features, SVR/RBF regressors and naive baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("decompose", "decompose the inputs into modes and attributes"),
        ("rank", "rank feature importance with RF and boosted trees"),
        ("train", "select hyperparameters and fit the per-horizon models"),
        ("forecast", "forecast every horizon from the end of training"),
        ("evaluate", "score every model on the holdout"),
        ("compare", "render the stored multi-model comparison table"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the JSON config")
        cmd.add_argument(
            "--workspace",
            default=None,
            help=f"artifact directory (default: ${WORKSPACE_ENV} or ./workspace)",
        )
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument(
            "--format", choices=("table", "json", "csv"), default="table", dest="fmt"
        )
    return parser


def _resolve_workspace(flag_value) -> pipeline.Workspace:
    root = flag_value or os.environ.get(WORKSPACE_ENV) or "workspace"
    return pipeline.Workspace(root)


def _load(args) -> PipelineConfig:
    config = load_config(args.config)
    if args.seed is not None:
        doc = config.to_dict()
        doc["seed"] = args.seed
        from .config import config_from_dict

        config = config_from_dict(doc)
    return config


def _trained_state(config: PipelineConfig, ws: pipeline.Workspace):
    artifact = pipeline.run_decompose(config)
    bundle = pipeline.load_bundle(ws)
    if bundle.fingerprint != config.fingerprint():
        raise DataError(
            "stored bundle was trained with a different config; rerun train"
        )
    return bundle, artifact


def _cmd_decompose(config, ws, fmt) -> CommandOutcome:
    artifact = pipeline.run_decompose(config)
    ws.ensure("decomposition")
    paths = pipeline.write_decomposition_csv(artifact, ws.path("decomposition"))
    n_modes = {name: sc.emd.n_imfs for name, sc in artifact.components.items()}
    return CommandOutcome(EXIT_OK, f"decomposed {len(paths)} series: {n_modes}", paths)


def _cmd_rank(config, ws, fmt) -> CommandOutcome:
    artifact = pipeline.run_decompose(config)
    ranking = pipeline.run_rank(config, artifact)
    path = ws.write_text("importance.csv", ranking.to_csv())
    kept = int((ranking.combined >= config.importance.threshold).sum())
    return CommandOutcome(
        EXIT_OK,
        f"ranked {len(ranking.feature_labels)} features; "
        f"{kept} at or above threshold {config.importance.threshold}",
        [path],
    )


def _cmd_train(config, ws, fmt) -> CommandOutcome:
    bundle, artifact = pipeline.run_train(config)
    ws.ensure("decomposition")
    paths = pipeline.write_decomposition_csv(artifact, ws.path("decomposition"))
    if bundle.ranking is not None:
        paths.append(ws.write_text("importance.csv", bundle.ranking.to_csv()))
    paths.extend(pipeline.save_bundle(bundle, ws))
    return CommandOutcome(
        EXIT_OK,
        f"trained {len(bundle.models)} model specs x {len(config.horizons)} horizons; "
        f"retained {len(bundle.retained_labels)} features",
        paths,
    )


def _cmd_forecast(config, ws, fmt) -> CommandOutcome:
    bundle, artifact = _trained_state(config, ws)
    forecasts = pipeline.run_forecast(config, bundle, artifact)
    ws.ensure("forecasts")
    paths = []
    for name, per_h in forecasts.items():
        lines = ["horizon,forecast"]
        for h in sorted(per_h):
            lines.append(f"{h},{float(per_h[h][0])!r}")
        paths.append(ws.write_text(f"forecasts/{name}.csv", "\n".join(lines) + "\n"))
    return CommandOutcome(EXIT_OK, f"forecast {len(forecasts)} models", paths)


def _cmd_evaluate(config, ws, fmt) -> CommandOutcome:
    bundle, artifact = _trained_state(config, ws)
    report = pipeline.run_evaluate(config, bundle, artifact)
    paths = [ws.write_text("metrics.json", report.to_json())]
    paths.extend(pipeline.write_forecast_csv(report, ws))
    lines = [
        f"{name}: MAE {report.metrics[name].mae:.4f} RMSE {report.metrics[name].rmse:.4f}"
        for name in report.model_order
    ]
    return CommandOutcome(EXIT_OK, "; ".join(lines), paths)


def _cmd_compare(config, ws, fmt) -> CommandOutcome:
    path = ws.path("metrics.json")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DataError(f"no stored metrics at {path} (run evaluate first): {exc}") from exc
    return CommandOutcome(EXIT_OK, f"compared {len(doc.get('order', []))} models", [path])


_COMMANDS = {
    "decompose": _cmd_decompose,
    "rank": _cmd_rank,
    "train": _cmd_train,
    "forecast": _cmd_forecast,
    "evaluate": _cmd_evaluate,
    "compare": _cmd_compare,
}


def _render(args, config, ws, outcome: CommandOutcome) -> str:
    if args.fmt == "json":
        doc = outcome.to_dict()
        if args.command in ("evaluate", "compare"):
            metrics_path = ws.path("metrics.json")
            if os.path.exists(metrics_path):
                with open(metrics_path, "r", encoding="utf-8") as fh:
                    doc["metrics"] = json.load(fh)
        return json.dumps(doc, sort_keys=True, indent=2)
    if args.fmt == "csv":
        if args.command in ("evaluate", "compare"):
            lines = ["model,horizon,actual,forecast"]
            for name in _stored_order(ws):
                fpath = ws.path("forecasts", f"{name}.csv")
                if not os.path.exists(fpath):
                    continue
                with open(fpath, "r", encoding="utf-8") as fh:
                    body = fh.read().strip().splitlines()[1:]
                lines.extend(f"{name},{row}" for row in body)
            return "\n".join(lines)
        return "\n".join(["artifact"] + outcome.artifact_paths)
    if args.command in ("evaluate", "compare"):
        return _stored_table(ws) + outcome.summary
    return outcome.summary


def _stored_order(ws) -> list[str]:
    try:
        with open(ws.path("metrics.json"), "r", encoding="utf-8") as fh:
            return json.load(fh).get("order", [])
    except OSError:
        return []


def _stored_table(ws) -> str:
    try:
        with open(ws.path("metrics.json"), "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError:
        return ""
    rows = [("interval", "model", "MAPE,%", "MAE", "RMSE")]
    for name in doc.get("order", []):
        m = doc["models"][name]
        mape = "-" if m["mape"] is None else f"{m['mape']:.2f}"
        rows.append(("overall", name, mape, f"{m['mae']:.4f}", f"{m['rmse']:.4f}"))
    n_subs = len(doc["models"][doc["order"][0]]["sub_intervals"]) if doc.get("order") else 0
    for i in range(n_subs):
        for name in doc["order"]:
            s = doc["models"][name]["sub_intervals"][i]
            mape = "-" if s["mape"] is None else f"{s['mape']:.2f}"
            rows.append((s["label"], name, mape, f"{s['mae']:.4f}", f"{s['rmse']:.4f}"))
    widths = [max(len(r[c]) for r in rows) for c in range(5)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK

    ws = _resolve_workspace(args.workspace)
    try:
        config = _load(args)
        outcome = _COMMANDS[args.command](config, ws, args.fmt)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE

    print(_render(args, config, ws, outcome))
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
