"""End-to-end evaluation runs: ingestion, metric dispatch, aggregation,
report rendering, and in-vs-out-of-domain deltas."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .entities import esa, extract_entities_heuristic, f1_combine
from .errors import ConfigError, IngestionError, ReportError
from .faithfulness import qafe_precision, qafe_recall, summac_precision, summac_recall
from .scorer import ScorerClient, nli_matrix, sle_scores_via_scorer
from .simplicity import TargetLevel, format_level_cell, lookup_sle_scores, sle_doc
from .surface import bleu_c, fkgl
from .textcore import Document, document_from_sentences, doc_stats

SCHEMA_VERSION = "docsimpeval-report/1"

ALL_METRICS = ("lengths", "bleu_c", "fkgl", "sle", "esa", "summac", "qafe")

# diagnostic: read against the task, no better/worse direction by itself
METRIC_ORIENTATIONS = {
    "lengths": "diagnostic",
    "bleu_c": "diagnostic",
    "fkgl": "lower_simpler",
    "sle": "lower_better",
    "esa": "higher_better",
    "summac": "higher_better",
    "qafe": "higher_better",
}

SCORER_METRICS = frozenset({"sle", "summac", "qafe"})

PER_DOC_LEVEL = "per-doc"


@dataclass(frozen=True)
class EvalInstance:
    doc_id: str
    source: Document
    output: Document
    target: TargetLevel
    system: str

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise IngestionError("instance without a doc_id")
        if not self.system:
            raise IngestionError(f"doc {self.doc_id!r}: empty system name")


@dataclass(frozen=True)
class RunConfig:
    metrics: tuple[str, ...] = ALL_METRICS
    target_level: float | str = PER_DOC_LEVEL
    workers: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.metrics:
            raise ConfigError("no metrics requested")
        unknown = [m for m in self.metrics if m not in ALL_METRICS]
        if unknown:
            raise ConfigError(
                f"unknown metrics {unknown}; valid: {list(ALL_METRICS)}"
            )
        if len(set(self.metrics)) != len(self.metrics):
            raise ConfigError("duplicate metric names requested")
        if isinstance(self.target_level, str) and self.target_level != PER_DOC_LEVEL:
            raise ConfigError(
                f"target_level must be a number or {PER_DOC_LEVEL!r}"
            )
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def load_outputs(
    paths: Sequence[str | Path],
    sources: Mapping[str, Document],
    target_level: float | str = PER_DOC_LEVEL,
) -> list[EvalInstance]:
    """System outputs as JSON Lines records {"doc_id", "system",
    "target_level", "sentences"}. A fixed numeric target_level overrides
    the per-record field; otherwise the field is required."""
    instances: list[EvalInstance] = []
    seen: set[tuple[str, str]] = set()
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise IngestionError(
                        f"{path}:{lineno}: invalid JSON: {exc}"
                    ) from exc
                if not isinstance(record, dict):
                    raise IngestionError(f"{path}:{lineno}: record must be an object")
                doc_id = record.get("doc_id")
                system = record.get("system")
                sentences = record.get("sentences")
                if not isinstance(doc_id, str) or not doc_id:
                    raise IngestionError(f"{path}:{lineno}: missing doc_id")
                if not isinstance(system, str) or not system:
                    raise IngestionError(
                        f"{path}:{lineno}: doc {doc_id!r}: missing system"
                    )
                if doc_id not in sources:
                    raise IngestionError(
                        f"{path}:{lineno}: doc {doc_id!r} not in the source corpus"
                    )
                if (doc_id, system) in seen:
                    raise IngestionError(
                        f"{path}:{lineno}: duplicate output for doc {doc_id!r} "
                        f"system {system!r}"
                    )
                seen.add((doc_id, system))
                if target_level == PER_DOC_LEVEL:
                    level = record.get("target_level")
                    if not isinstance(level, (int, float)) or isinstance(level, bool):
                        raise IngestionError(
                            f"{path}:{lineno}: doc {doc_id!r}: target_level "
                            "must be numeric when running per-doc"
                        )
                else:
                    level = target_level
                if not isinstance(sentences, list) or not sentences or any(
                    not isinstance(s, str) for s in sentences
                ):
                    raise IngestionError(
                        f"{path}:{lineno}: doc {doc_id!r}: 'sentences' must be "
                        "a non-empty list of strings"
                    )
                try:
                    output = document_from_sentences(sentences)
                except IngestionError as exc:
                    raise IngestionError(
                        f"{path}:{lineno}: doc {doc_id!r}: {exc}"
                    ) from exc
                instances.append(EvalInstance(
                    doc_id=doc_id,
                    source=sources[doc_id],
                    output=output,
                    target=TargetLevel(float(level)),
                    system=system,
                ))
    if not instances:
        raise IngestionError("no system outputs found")
    return instances


def check_metric_resources(
    metrics: Sequence[str],
    scorer: ScorerClient | None,
    sle_table: Mapping[tuple[str, str | None], list[float]] | None,
) -> None:
    """Fail before any work if a requested metric has no backing scorer."""
    for metric in metrics:
        if metric not in SCORER_METRICS:
            continue
        if metric == "sle" and sle_table is not None:
            continue
        if scorer is None:
            raise ConfigError(
                f"metric {metric!r} needs a scorer command, fixtures, or "
                "a precomputed score file"
            )


def compute_instance(
    instance: EvalInstance,
    metrics: Sequence[str],
    scorer: ScorerClient | None = None,
    sle_table: Mapping[tuple[str, str | None], list[float]] | None = None,
) -> dict[str, Any]:
    """All requested metric values for one (doc, system) pair."""
    values: dict[str, Any] = {}
    out = instance.output
    src = instance.source
    for metric in metrics:
        if metric == "lengths":
            stats = doc_stats(out)
            values[metric] = {
                "tokens": stats.token_count,
                "sentences": stats.sentence_count,
            }
        elif metric == "bleu_c":
            values[metric] = bleu_c(out, src)
        elif metric == "fkgl":
            values[metric] = fkgl(out)
        elif metric == "sle":
            scores = None
            if sle_table is not None:
                scores = lookup_sle_scores(sle_table, instance.doc_id,
                                           instance.system)
            if scores is None:
                if scorer is None:
                    raise IngestionError(
                        f"doc {instance.doc_id!r} system {instance.system!r}: "
                        "no precomputed sentence scores and no scorer"
                    )
                scores = sle_scores_via_scorer(out, scorer)
            raw = sle_doc(scores, expected_sentence_count=len(out.sentences))
            values[metric] = {
                "raw": raw,
                "epsilon": abs(raw - instance.target.level),
            }
        elif metric == "esa":
            triple = esa(
                extract_entities_heuristic(src),
                extract_entities_heuristic(out),
            )
            values[metric] = {"precision": triple.p, "recall": triple.r}
        elif metric == "summac":
            matrix = nli_matrix(src, out, scorer)
            values[metric] = {
                "precision": summac_precision(matrix),
                "recall": summac_recall(matrix),
            }
        elif metric == "qafe":
            values[metric] = {
                "precision": qafe_precision(src, out, scorer).score,
                "recall": qafe_recall(src, out, scorer).score,
            }
        else:
            raise ConfigError(f"unknown metric {metric!r}")
    return values


def compute_all(
    instances: Sequence[EvalInstance],
    config: RunConfig,
    scorer: ScorerClient | None = None,
    sle_table: Mapping[tuple[str, str | None], list[float]] | None = None,
) -> list[dict[str, Any]]:
    """Per-instance values, in instance order regardless of worker count."""
    check_metric_resources(config.metrics, scorer, sle_table)

    def work(instance: EvalInstance) -> dict[str, Any]:
        return compute_instance(instance, config.metrics, scorer, sle_table)

    if config.workers == 1:
        return [work(inst) for inst in instances]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(work, instances))


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def _aggregate_group(
    metrics: Sequence[str],
    rows: Sequence[dict[str, Any]],
) -> dict[str, Any]:
    agg: dict[str, Any] = {}
    n = len(rows)
    for metric in metrics:
        cells = [row[metric] for row in rows]
        if metric == "lengths":
            agg[metric] = {
                "avg_tokens": _mean([c["tokens"] for c in cells]),
                "avg_sentences": _mean([c["sentences"] for c in cells]),
                "count": n,
            }
        elif metric in ("bleu_c", "fkgl"):
            agg[metric] = {"mean": _mean(cells), "count": n}
        elif metric == "sle":
            agg[metric] = {
                "epsilon": _mean([c["epsilon"] for c in cells]),
                "raw": _mean([c["raw"] for c in cells]),
                "count": n,
            }
        elif metric in ("esa", "summac"):
            p = _mean([c["precision"] for c in cells])
            r = _mean([c["recall"] for c in cells])
            agg[metric] = {
                "precision": p,
                "recall": r,
                "f1": f1_combine(p, r),
                "count": n,
            }
        elif metric == "qafe":
            kept_p = [c["precision"] for c in cells if c["precision"] is not None]
            kept_r = [c["recall"] for c in cells if c["recall"] is not None]
            p = _mean(kept_p) if kept_p else None
            r = _mean(kept_r) if kept_r else None
            agg[metric] = {
                "precision": p,
                "recall": r,
                "f1": f1_combine(p, r) if p is not None and r is not None else None,
                "count_precision": len(kept_p),
                "count_recall": len(kept_r),
                "missing_precision": n - len(kept_p),
                "missing_recall": n - len(kept_r),
            }
    return agg


def build_report(
    instances: Sequence[EvalInstance],
    per_instance: Sequence[dict[str, Any]],
    config: RunConfig,
) -> dict[str, Any]:
    """Aggregate per (system, level); groups keep configuration order for
    systems and ascending order for levels."""
    if len(instances) != len(per_instance):
        raise ReportError("instance values out of step with instances")
    systems: list[str] = []
    for inst in instances:
        if inst.system not in systems:
            systems.append(inst.system)
    levels = sorted({inst.target.level for inst in instances})

    grouped: dict[tuple[str, float], list[dict[str, Any]]] = {}
    by_system: dict[str, list[dict[str, Any]]] = {}
    for inst, row in zip(instances, per_instance):
        grouped.setdefault((inst.system, inst.target.level), []).append(row)
        by_system.setdefault(inst.system, []).append(row)

    groups = []
    for system in systems:
        for level in levels:
            rows = grouped.get((system, level))
            if not rows:
                continue
            groups.append({
                "system": system,
                "level": level,
                "count": len(rows),
                "metrics": _aggregate_group(config.metrics, rows),
            })
    totals = [
        {
            "system": system,
            "count": len(by_system[system]),
            "metrics": _aggregate_group(config.metrics, by_system[system]),
        }
        for system in systems
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "metrics": list(config.metrics),
        "orientations": {
            m: METRIC_ORIENTATIONS[m] for m in config.metrics
        },
        "systems": systems,
        "levels": levels,
        "instance_count": len(instances),
        "groups": groups,
        "totals": totals,
    }


def run_evaluation(
    instances: Sequence[EvalInstance],
    config: RunConfig,
    scorer: ScorerClient | None = None,
    sle_table: Mapping[tuple[str, str | None], list[float]] | None = None,
) -> dict[str, Any]:
    per_instance = compute_all(instances, config, scorer, sle_table)
    return build_report(instances, per_instance, config)


def render_report_json(report: Mapping[str, Any]) -> bytes:
    """Canonical bytes: sorted keys, two-space indent, trailing newline."""
    text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def parse_report(data: bytes | str) -> dict[str, Any]:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        report = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ReportError(f"report is not valid JSON: {exc}") from exc
    if not isinstance(report, dict):
        raise ReportError("report must be a JSON object")
    if report.get("schema_version") != SCHEMA_VERSION:
        raise ReportError(
            f"unsupported report schema {report.get('schema_version')!r}"
        )
    return report


def load_report(path: str | Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            return parse_report(fh.read())
    except OSError as exc:
        raise ReportError(f"cannot read report {path}: {exc}") from exc


def _fmt(value: Any, decimals: int = 2) -> str:
    if value is None:
        return "-"
    return f"{value:.{decimals}f}"


def _metric_columns(metric: str) -> list[str]:
    if metric == "lengths":
        return ["Tokens", "Sentences"]
    if metric == "bleu_c":
        return ["BLEU_C"]
    if metric == "fkgl":
        return ["FKGL"]
    if metric == "sle":
        return ["εSLE (SLE)"]
    if metric == "esa":
        return ["ESA P", "ESA R", "ESA F1"]
    if metric == "summac":
        return ["SummaC P", "SummaC R", "SummaC F1"]
    if metric == "qafe":
        return ["QAFE P", "QAFE R", "QAFE F1"]
    raise ReportError(f"unknown metric {metric!r}")


def _metric_cells(metric: str, agg: Mapping[str, Any]) -> list[str]:
    if metric == "lengths":
        return [_fmt(agg["avg_tokens"], 1), _fmt(agg["avg_sentences"], 1)]
    if metric == "bleu_c":
        return [_fmt(agg["mean"])]
    if metric == "fkgl":
        return [_fmt(agg["mean"])]
    if metric == "sle":
        return [format_level_cell(agg["epsilon"], agg["raw"])]
    if metric in ("esa", "summac", "qafe"):
        return [_fmt(agg["precision"]), _fmt(agg["recall"]), _fmt(agg["f1"])]
    raise ReportError(f"unknown metric {metric!r}")


def render_report_markdown(report: Mapping[str, Any]) -> str:
    """One table per target level plus a totals table, systems as rows,
    metric columns in request order, counts disclosed per row."""
    metrics = report["metrics"]
    lines: list[str] = []
    header_cols = ["System", "Docs"]
    for metric in metrics:
        header_cols.extend(_metric_columns(metric))
    header = "| " + " | ".join(header_cols) + " |"
    rule = "|---" * len(header_cols) + "|"

    def emit_table(title: str, rows: Iterable[Mapping[str, Any]]) -> None:
        lines.append(f"## {title}")
        lines.append("")
        lines.append(header)
        lines.append(rule)
        for row in rows:
            cells = [row["system"], str(row["count"])]
            for metric in metrics:
                cells.extend(_metric_cells(metric, row["metrics"][metric]))
            lines.append("| " + " | ".join(cells) + " |")
        lines.append("")

    for level in report["levels"]:
        rows = [g for g in report["groups"] if g["level"] == level]
        emit_table(f"Target level {level:g}", rows)
    if len(report["levels"]) > 1:
        emit_table("All levels", report["totals"])
    if any(m == "qafe" for m in metrics):
        missing = sum(
            g["metrics"]["qafe"]["missing_precision"]
            + g["metrics"]["qafe"]["missing_recall"]
            for g in report["groups"]
        )
        lines.append(
            f"QAFE cells exclude {missing} missing value(s) "
            "(no surviving questions); per-group counts are in the JSON report."
        )
        lines.append("")
    return "\n".join(lines)


DELTA_SCHEMA_VERSION = "docsimpeval-delta/1"

# numeric leaves that subtract cleanly, per metric
_DELTA_FIELDS = {
    "lengths": ("avg_tokens", "avg_sentences"),
    "bleu_c": ("mean",),
    "fkgl": ("mean",),
    "sle": ("epsilon", "raw"),
    "esa": ("precision", "recall", "f1"),
    "summac": ("precision", "recall", "f1"),
    "qafe": ("precision", "recall", "f1"),
}


def delta_report(
    in_report: Mapping[str, Any],
    out_report: Mapping[str, Any],
    level: float,
) -> dict[str, Any]:
    """Cellwise out-of-domain minus in-domain at one target level."""
    in_systems = list(in_report["systems"])
    out_systems = list(out_report["systems"])
    if set(in_systems) != set(out_systems):
        raise ReportError(
            f"system sets differ: {sorted(in_systems)} vs {sorted(out_systems)}"
        )
    for name, report in (("in", in_report), ("out", out_report)):
        if level not in report["levels"]:
            raise ReportError(f"{name}-domain report has no level {level:g}")
    shared_metrics = [m for m in in_report["metrics"]
                      if m in set(out_report["metrics"])]
    if not shared_metrics:
        raise ReportError("reports share no metrics")

    def group_for(report: Mapping[str, Any], system: str) -> Mapping[str, Any]:
        for group in report["groups"]:
            if group["system"] == system and group["level"] == level:
                return group
        raise ReportError(
            f"system {system!r} has no group at level {level:g}"
        )

    rows = []
    for system in in_systems:
        gin = group_for(in_report, system)
        gout = group_for(out_report, system)
        deltas: dict[str, Any] = {}
        for metric in shared_metrics:
            a = gin["metrics"][metric]
            b = gout["metrics"][metric]
            cell = {}
            for field_name in _DELTA_FIELDS[metric]:
                left = a.get(field_name)
                right = b.get(field_name)
                cell[field_name] = (
                    right - left
                    if isinstance(left, (int, float)) and isinstance(right, (int, float))
                    else None
                )
            deltas[metric] = cell
        rows.append({
            "system": system,
            "count_in": gin["count"],
            "count_out": gout["count"],
            "deltas": deltas,
        })
    return {
        "schema_version": DELTA_SCHEMA_VERSION,
        "level": level,
        "metrics": shared_metrics,
        "systems": in_systems,
        "rows": rows,
    }


def render_delta_markdown(delta: Mapping[str, Any]) -> str:
    """Delta table; the simplicity cell pairs Δepsilon with Δraw, e.g.
    "0.17 (-0.25)"."""
    metrics = delta["metrics"]
    header_cols = ["System"]
    for metric in metrics:
        header_cols.extend(_metric_columns(metric))
    lines = [
        f"## Out-of-domain minus in-domain at level {delta['level']:g}",
        "",
        "| " + " | ".join(header_cols) + " |",
        "|---" * len(header_cols) + "|",
    ]
    for row in delta["rows"]:
        cells = [row["system"]]
        for metric in metrics:
            cell = row["deltas"][metric]
            if metric == "lengths":
                cells.append(_fmt(cell["avg_tokens"], 1))
                cells.append(_fmt(cell["avg_sentences"], 1))
            elif metric in ("bleu_c", "fkgl"):
                cells.append(_fmt(cell["mean"]))
            elif metric == "sle":
                if cell["epsilon"] is None or cell["raw"] is None:
                    cells.append("-")
                else:
                    cells.append(format_level_cell(cell["epsilon"], cell["raw"]))
            else:
                cells.extend([
                    _fmt(cell["precision"]),
                    _fmt(cell["recall"]),
                    _fmt(cell["f1"]),
                ])
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    return "\n".join(lines)
