"""
Report bundle emission and comparison against published targets.

A bundle directory holds:
    manifest.json   dataset manifests (with content hashes) used by the run
    runs.csv        one row per (task, gamma, repeat)
    aggregate.csv   mean and sample std per gamma
    curve.svg       learning curve with error bars (when there are >= 2 gammas)
    summary.json    ExperimentResult: config, manifest hash, target checks
    summary.md      the same, human-readable
    run_info.json   timestamps and log path (the only non-deterministic file)
"""

from __future__ import annotations

import json
import logging
import math
from importlib import resources
from pathlib import Path
from typing import Any

import matplotlib
import pandas as pd
import yaml

from cayley_learn.core.errors import ConfigError
from cayley_learn.core.schema import ExperimentResult, RunInfo, RunRow, TargetCheck
from cayley_learn.core.storage import atomic_write
from cayley_learn.metrics.curves import METRICS, LearningCurvePoint

logger = logging.getLogger(__name__)

UNDEFINED = "undefined"

# Fixed SVG element ids keep curve.svg byte-identical between runs
matplotlib.rcParams["svg.hashsalt"] = "cayley-learn"


def load_targets() -> dict[str, Any]:
    text = resources.files("cayley_learn").joinpath("data/targets.yaml").read_text(encoding="utf-8")
    return yaml.safe_load(text) or {}


def _band(achieved: float | None, lower: float | None, upper: float | None) -> bool | None:
    if achieved is None or (lower is None and upper is None):
        return None
    if lower is not None and achieved < lower:
        return False
    if upper is not None and achieved > upper:
        return False
    return True


def monotone_check(points: list[LearningCurvePoint], metric: str) -> TargetCheck | None:
    """Means may drop by at most one pooled std from one gamma to the next."""
    defined = [p for p in sorted(points, key=lambda p: p.gamma) if p.mean.get(metric) is not None]
    if len(defined) < 2:
        return None
    variances = [p.std[metric] ** 2 for p in defined if p.std.get(metric) is not None]
    pooled = math.sqrt(sum(variances) / len(variances)) if variances else 0.0
    means = [p.mean[metric] for p in defined]
    passed = all(b >= a - pooled for a, b in zip(means, means[1:]))
    return TargetCheck(metric=f"{metric}-curve-monotone", achieved=means[-1], achieved_std=pooled, passed=passed)


def check_targets(
    recipe: str, main: LearningCurvePoint, points: list[LearningCurvePoint], targets: dict[str, Any] | None = None
) -> tuple[list[TargetCheck], str | None]:
    """Compare the main-size point (and the curve) against the recipe's targets."""
    table = load_targets() if targets is None else targets
    entry = table.get(recipe)
    if entry is None:
        return [], None
    checks = []
    for target in entry.get("targets", []) or []:
        metric = target["metric"]
        if metric not in METRICS:
            raise ConfigError(f"target for {recipe} names unknown metric {metric!r}")
        achieved = main.mean.get(metric)
        achieved_std = main.std.get(metric)
        lower, upper = target.get("lower"), target.get("upper")
        sigmas = target.get("above_chance_sigmas")
        if sigmas is not None:
            lower = 0.5 + sigmas * achieved_std if achieved_std is not None else None
            passed = achieved > lower if achieved is not None and lower is not None else None
        else:
            passed = _band(achieved, lower, upper)
        checks.append(
            TargetCheck(
                metric=metric,
                achieved=achieved,
                achieved_std=achieved_std,
                published_mean=target.get("mean"),
                published_std=target.get("std"),
                lower=lower,
                upper=upper,
                passed=passed,
            )
        )
    if entry.get("monotone_curve"):
        check = monotone_check(points, entry["monotone_curve"])
        if check is not None:
            checks.append(check)
    return checks, entry.get("citation")


def rows_frame(rows: list[RunRow]) -> pd.DataFrame:
    columns = list(RunRow.model_fields)
    return pd.DataFrame([r.model_dump() for r in rows], columns=columns)


def points_frame(points: list[LearningCurvePoint], task: str) -> pd.DataFrame:
    summaries = [p.to_summary(task).model_dump() for p in points]
    return pd.DataFrame(summaries)


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    atomic_write(path, frame.to_csv(index=False, na_rep=UNDEFINED, lineterminator="\n"))
    return path


def plot_curve(points: list[LearningCurvePoint], path: Path, title: str, metrics=("accuracy", "phi")) -> Path | None:
    """Learning curve with sample-std error bars, one line per metric."""
    if len(points) < 2:
        return None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        for metric in metrics:
            shown = [p for p in points if p.mean.get(metric) is not None]
            if not shown:
                continue
            ax.errorbar(
                [p.gamma for p in shown],
                [p.mean[metric] for p in shown],
                yerr=[p.std.get(metric) or 0.0 for p in shown],
                marker="o",
                capsize=3,
                label=metric,
            )
        ax.set_xlabel("training fraction")
        ax.set_ylabel("validation score")
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend(loc="lower right")
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return path


def _fmt(value: float | None, digits: int = 4) -> str:
    return UNDEFINED if value is None else f"{value:.{digits}f}"


def render_markdown(result: ExperimentResult, points: list[LearningCurvePoint] | None = None) -> str:
    lines = [f"# {result.recipe} (v{result.version})", ""]
    lines.append(f"- status: {'ok' if result.success else 'failed'}")
    lines.append(f"- records: {result.records}")
    if result.manifest_hash:
        lines.append(f"- dataset hash: `{result.manifest_hash}`")
    if result.citation:
        lines.append(f"- compared with: {result.citation}")
    for error in result.errors:
        lines.append(f"- error: {error}")
    if result.checks:
        lines += ["", "| metric | achieved | std | published | band | pass |", "|---|---|---|---|---|---|"]
        for c in result.checks:
            published = "" if c.published_mean is None else _fmt(c.published_mean) + (
                f" ± {_fmt(c.published_std)}" if c.published_std is not None else ""
            )
            band = f"[{_fmt(c.lower, 3) if c.lower is not None else '-'}, {_fmt(c.upper, 3) if c.upper is not None else '-'}]"
            verdict = {True: "yes", False: "NO", None: "n/a"}[c.passed]
            lines.append(f"| {c.metric} | {_fmt(c.achieved)} | {_fmt(c.achieved_std)} | {published} | {band} | {verdict} |")
    if points:
        lines += ["", "| gamma | repeats | accuracy | phi | f1 |", "|---|---|---|---|---|"]
        for p in points:
            cells = [f"{_fmt(p.mean.get(m))} ± {_fmt(p.std.get(m))}" for m in ("accuracy", "phi", "f1")]
            lines.append(f"| {p.gamma:.4f} | {p.repeats} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def write_bundle(
    output_dir: Path,
    result: ExperimentResult,
    rows: list[RunRow],
    points: list[LearningCurvePoint],
    manifests: dict[str, dict[str, Any]],
    task: str,
) -> list[Path]:
    output_dir = Path(output_dir)
    written = [output_dir / "manifest.json"]
    atomic_write(written[0], json.dumps(manifests, indent=2, sort_keys=True) + "\n")
    written.append(write_csv(rows_frame(rows), output_dir / "runs.csv"))
    written.append(write_csv(points_frame(points, task), output_dir / "aggregate.csv"))
    svg = plot_curve(points, output_dir / "curve.svg", title=result.recipe)
    if svg is not None:
        written.append(svg)
    written += write_summary(output_dir, result, points)
    logger.info(f"Wrote report bundle to {output_dir}")
    return written


def write_summary(output_dir: Path, result: ExperimentResult, points: list[LearningCurvePoint] | None = None) -> list[Path]:
    """summary.json and summary.md; also written for failed runs."""
    output_dir = Path(output_dir)
    json_path, md_path = output_dir / "summary.json", output_dir / "summary.md"
    atomic_write(json_path, result.model_dump_json(indent=2) + "\n")
    atomic_write(md_path, render_markdown(result, points))
    return [json_path, md_path]


def write_run_info(output_dir: Path, info: RunInfo) -> Path:
    path = Path(output_dir) / "run_info.json"
    atomic_write(path, info.model_dump_json(indent=2) + "\n")
    return path


def load_result(bundle_dir: Path | str) -> ExperimentResult:
    """
    Raises:
        FileNotFoundError: if the directory has no summary.json
    """
    path = Path(bundle_dir) / "summary.json"
    return ExperimentResult.model_validate_json(path.read_text(encoding="utf-8"))
