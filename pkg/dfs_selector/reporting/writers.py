from __future__ import annotations

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from ..core.models import DfsSolution, EvalReport, GammaSearchReport, PSearchReport, RunManifest


def _ensure_parent(path: Path) -> None:
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)


def write_json(path: str | Path, payload: dict[str, Any]) -> Path:
    target = Path(path)
    _ensure_parent(target)
    target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logging.info("Wrote %s", target)
    return target


def read_json(path: str | Path) -> dict[str, Any]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(payload, dict):
        raise ValueError(f"{path} does not hold a JSON object")
    return payload


def ranking_payload(solution: DfsSolution, *, top: int | None = None, feature_names: tuple[str, ...] | None = None) -> dict[str, Any]:
    entries: list[dict[str, Any]] = []
    for feature in solution.ranking:
        row: dict[str, Any] = {"feature_index": int(feature), "score": float(solution.row_scores[feature])}
        if feature_names is not None:
            row["feature_name"] = feature_names[int(feature)]
        entries.append(row)
    selected = len(entries) if top is None else max(0, min(int(top), len(entries)))
    return {
        "top": [int(feature) for feature in solution.ranking[:selected]],
        "ranking": entries,
    }


def write_ranking(path: str | Path, solution: DfsSolution, *, top: int | None = None, feature_names: tuple[str, ...] | None = None) -> Path:
    return write_json(path, ranking_payload(solution, top=top, feature_names=feature_names))


def write_solution(path: str | Path, solution: DfsSolution) -> Path:
    return write_json(path, solution.to_dict())


def write_traces_csv(path: str | Path, solution: DfsSolution) -> Path:
    """One row per iteration; the first iteration has no divergence yet."""
    target = Path(path)
    _ensure_parent(target)
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["iteration", "objective_smoothed", "objective_raw", "divergence"])
        for idx, (smoothed, raw) in enumerate(zip(solution.objective_trace, solution.raw_objective_trace)):
            div = repr(solution.divergence_trace[idx - 1]) if idx > 0 else ""
            writer.writerow([idx + 1, repr(smoothed), repr(raw), div])
    logging.info("Wrote %s", target)
    return target


def write_report(path: str | Path, report: EvalReport) -> Path:
    return write_json(path, report.to_dict())


def write_curve_csv(path: str | Path, report: EvalReport) -> Path:
    target = Path(path)
    _ensure_parent(target)
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["k", "mean_accuracy", "redundancy"])
        for k, accuracy, redundancy in zip(report.k_grid, report.accuracy_mean, report.redundancy):
            writer.writerow([k, repr(accuracy), "" if redundancy is None else repr(redundancy)])
    logging.info("Wrote %s", target)
    return target


def write_tuning(path: str | Path, search: GammaSearchReport | PSearchReport) -> Path:
    return write_json(path, search.to_dict())


def write_manifest(path: str | Path, manifest: RunManifest) -> Path:
    if not manifest.created_at:
        manifest.created_at = datetime.now(timezone.utc).isoformat()
    return write_json(path, manifest.to_dict())
