"""Report serialization: one JSON document plus CSV/markdown table renders.

Every renderer works from the plain-dict form of the report, so re-rendering
an existing ``report.json`` and emitting a fresh experiment share one code
path and identical inputs produce byte-identical files.
"""

import json
from pathlib import Path

from .errors import DataError
from .experiment import ExperimentReport

SUMMARY_ROWS = ("max", "q75", "median", "q25", "min", "mean", "iqr", "std")
JSON_NAME = "report.json"
CSV_NAMES = ("losses.csv", "summary.csv", "feature_scores.csv", "boxplot.csv")
MARKDOWN_NAME = "report.md"


def report_to_dict(report: ExperimentReport) -> dict:
    """Canonical plain-dict form of an experiment report."""
    cfg = report.config
    doc = {
        "config": {
            "master_seed": cfg.master_seed,
            "iterations": cfg.iterations,
            "K": cfg.K,
            "test_fraction": cfg.test_fraction,
            "max_subset_size": cfg.max_subset_size,
            "box_constraint": cfg.train_cfg.box_constraint,
            "kkt_tolerance": cfg.train_cfg.kkt_tolerance,
            "max_sweeps": cfg.train_cfg.max_sweeps,
            "standardize": cfg.standardize,
            "relevance_cutoff": cfg.relevance_cutoff,
            "alpha": cfg.alpha,
        },
        "iterations": [
            {
                "index": r.index,
                "classic": _outcome_dict(r.classic),
                "pooled": _outcome_dict(r.pooled),
                "flags": {
                    "unconverged_cells": r.unconverged_cells,
                    "degenerate_cells": r.degenerate_cells,
                },
            }
            for r in report.records
        ],
        "summary": {
            "classic": dict(report.summary_classic.as_ordered_pairs()),
            "pooled": dict(report.summary_pooled.as_ordered_pairs()),
        },
        "utest": {
            "U": report.utest.U,
            "z": report.utest.z,
            "p": report.utest.p_two_sided,
            "significant": report.utest.significant,
            "degenerate": report.utest.degenerate,
        },
        "feature_scores": [
            {
                "name": name,
                "classic": float(report.feature_scores.classic_scores[j]),
                "pooled": float(report.feature_scores.pooled_scores[j]),
                "relevant_classic": bool(report.feature_scores.relevant_classic[j]),
                "relevant_pooled": bool(report.feature_scores.relevant_pooled[j]),
            }
            for j, name in enumerate(report.feature_scores.feature_names)
        ],
        "unique_subset_counts": {
            "classic": report.feature_scores.unique_count_classic,
            "pooled": report.feature_scores.unique_count_pooled,
        },
    }
    return doc


def _outcome_dict(outcome) -> dict:
    return {
        "subset": list(outcome.subset),
        "fold": outcome.fold,
        "selection_loss": outcome.selection_loss,
        "test_loss": outcome.test_loss,
        "converged": bool(outcome.model.converged),
    }


def load_report_json(path) -> dict:
    """Read and structurally validate a previously emitted report.json."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    required = (
        "config",
        "iterations",
        "summary",
        "utest",
        "feature_scores",
        "unique_subset_counts",
    )
    missing = [key for key in required if key not in doc]
    if missing:
        raise DataError(f"{path}: missing report fields: {', '.join(missing)}")
    return doc


def _feature_names(doc: dict) -> list:
    return [row["name"] for row in doc["feature_scores"]]


def _fmt(value) -> str:
    """Stable cell text: full-precision repr for floats, plain text otherwise."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _subset_label(subset, names) -> str:
    return "+".join(names[j] for j in subset)


def render_losses_csv(doc: dict) -> str:
    names = _feature_names(doc)
    lines = ["iteration,recipe,test_loss,fold,subset"]
    for it in doc["iterations"]:
        for recipe in ("classic", "pooled"):
            o = it[recipe]
            lines.append(
                f"{it['index']},{recipe},{_fmt(o['test_loss'])},{o['fold']},"
                f"{_subset_label(o['subset'], names)}"
            )
    return "\n".join(lines) + "\n"


def render_summary_csv(doc: dict) -> str:
    lines = ["statistic,classic,pooled"]
    for stat in SUMMARY_ROWS:
        lines.append(
            f"{stat},{_fmt(doc['summary']['classic'][stat])},"
            f"{_fmt(doc['summary']['pooled'][stat])}"
        )
    return "\n".join(lines) + "\n"


def render_feature_scores_csv(doc: dict) -> str:
    lines = ["feature,classic,pooled,relevant_classic,relevant_pooled"]
    for row in doc["feature_scores"]:
        lines.append(
            f"{row['name']},{_fmt(row['classic'])},{_fmt(row['pooled'])},"
            f"{_fmt(row['relevant_classic'])},{_fmt(row['relevant_pooled'])}"
        )
    return "\n".join(lines) + "\n"


def render_boxplot_csv(doc: dict) -> str:
    lines = ["recipe,min,q25,median,q75,max"]
    for recipe in ("classic", "pooled"):
        s = doc["summary"][recipe]
        lines.append(
            f"{recipe},{_fmt(s['min'])},{_fmt(s['q25'])},{_fmt(s['median'])},"
            f"{_fmt(s['q75'])},{_fmt(s['max'])}"
        )
    return "\n".join(lines) + "\n"


def render_markdown(doc: dict) -> str:
    """Human-readable recap: summary table, U test, feature-score table."""
    cfg = doc["config"]
    u = doc["utest"]
    counts = doc["unique_subset_counts"]
    out = []
    out.append("# Cross-validation selection report")
    out.append("")
    out.append(
        f"{cfg['iterations']} iterations, K={cfg['K']}, "
        f"test fraction {_fmt(cfg['test_fraction'])}, "
        f"subsets up to size {cfg['max_subset_size']}, "
        f"C={_fmt(cfg['box_constraint'])}, seed {cfg['master_seed']}."
    )
    out.append("")
    out.append("## Test loss summary")
    out.append("")
    out.append("| statistic | classic | pooled |")
    out.append("|---|---|---|")
    for stat in SUMMARY_ROWS:
        c = doc["summary"]["classic"][stat]
        p = doc["summary"]["pooled"][stat]
        out.append(f"| {stat} | {c:.4f} | {p:.4f} |")
    out.append("")
    verdict = "significant" if u["significant"] else "not significant"
    out.append(
        f"Mann-Whitney U = {_fmt(u['U'])}, z = {u['z']:.4f}, "
        f"two-sided p = {u['p']:.4f} ({verdict} at alpha = {_fmt(cfg['alpha'])})."
    )
    out.append("")
    out.append(
        f"Unique selected subsets: classic {counts['classic']}, pooled {counts['pooled']}."
    )
    out.append("")
    out.append("## Feature scores over unique subsets")
    out.append("")
    out.append(f"Relevance cutoff: {_fmt(cfg['relevance_cutoff'])} (marked with *).")
    out.append("")
    # the all-train column is an externally computed baseline; left blank here
    out.append("| feature | classic | pooled | all train |")
    out.append("|---|---|---|---|")
    for row in doc["feature_scores"]:
        c_mark = "*" if row["relevant_classic"] else ""
        p_mark = "*" if row["relevant_pooled"] else ""
        out.append(
            f"| {row['name']} | {row['classic']:.2f}{c_mark} "
            f"| {row['pooled']:.2f}{p_mark} | |"
        )
    out.append("")
    return "\n".join(out)


def write_report_files(doc: dict, out_dir, formats=("json", "csv", "markdown")) -> list:
    """Write the selected renders under ``out_dir``; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        path = out_dir / JSON_NAME
        text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
        path.write_text(text, encoding="utf-8")
        written.append(path)
    if "csv" in formats:
        renders = (
            render_losses_csv(doc),
            render_summary_csv(doc),
            render_feature_scores_csv(doc),
            render_boxplot_csv(doc),
        )
        for name, text in zip(CSV_NAMES, renders):
            path = out_dir / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
    if "markdown" in formats:
        path = out_dir / MARKDOWN_NAME
        path.write_text(render_markdown(doc), encoding="utf-8")
        written.append(path)
    return written


def emit_report(report: ExperimentReport, out_dir, formats=("json", "csv", "markdown")) -> list:
    """Serialize a freshly computed report to files."""
    return write_report_files(report_to_dict(report), out_dir, formats)
