"""
CLI entry point for cayley-learn.

This module provides the command-line interface for generating datasets,
running recipes, checking tables with the exact oracles and reporting.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 acceptance-band miss (``report --strict`` only).
"""

import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import click
from pydantic import ValidationError

from cayley_learn import __version__
from cayley_learn.config import Settings, reload_settings
from cayley_learn.core.errors import AcceptanceMiss, CayleyLearnError, ConfigError
from cayley_learn.core.logging import setup_logging
from cayley_learn.core.schema import RunInfo, TrainerConfig
from cayley_learn.core.storage import MANIFEST_PREFIX, atomic_write, dumps_line
from cayley_learn.datasets.builders import BUILDERS, build_from_config
from cayley_learn.datasets.io import read_dataset, read_manifest, write_dataset
from cayley_learn.datasets.oracles import ORACLE_TASKS, oracle_verdict, verify_labels
from cayley_learn.datasets.records import Dataset
from cayley_learn.experiments.recipes import RECIPES, load_config_file, parse_overrides, resolve_config
from cayley_learn.experiments.report import (
    load_result,
    plot_curve,
    points_frame,
    render_markdown,
    rows_frame,
    write_csv,
    write_run_info,
    write_summary,
)
from cayley_learn.experiments.runner import RecipeExperiment
from cayley_learn.metrics.curves import gammas_from_sizes, learning_curve

PASSTHROUGH = {"ignore_unknown_options": True, "allow_extra_args": True}


class CayleyGroup(click.Group):
    """Click group mapping usage errors to exit 1 and library errors to their exit codes."""

    def parse_args(self, ctx: click.Context, args: list[str]) -> list[str]:
        try:
            return super().parse_args(ctx, args)
        except click.UsageError as e:
            e.exit_code = 1
            raise

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = 1
            raise
        except CayleyLearnError as e:
            click.echo(f"Error: {e}", err=True)
            ctx.exit(e.exit_code)


def _settings(ctx: click.Context) -> Settings:
    return ctx.obj["settings"]


def _split_paths(out: Path) -> tuple[Path, Path]:
    """data.ndjson -> data.train.ndjson, data.valid.ndjson"""
    suffix = out.suffix or ".ndjson"
    return out.with_name(f"{out.stem}.train{suffix}"), out.with_name(f"{out.stem}.valid{suffix}")


def _echo_dataset(path: Path, dataset: Dataset, digest: str) -> None:
    counts = dataset.label_counts()
    total = max(len(dataset), 1)
    balance = ", ".join(f"{label}: {count} ({count / total:.1%})" for label, count in counts.items())
    click.echo(f"✓ {path}: {len(dataset)} records, n_max={dataset.n_max}")
    click.echo(f"  labels: {balance}")
    click.echo(f"  sha256: {digest}")


@click.group(cls=CayleyGroup)
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose output")
@click.version_option(__version__, prog_name="cayley-learn")
@click.pass_context
def cli(ctx: click.Context, verbose: bool) -> None:
    """
    cayley-learn - exact algebraic datasets and from-scratch classifiers.

    Commands:
        gen       Build a labelled dataset
        run       Run a recipe and write its report bundle
        oracle    Check NDJSON tables with an exact oracle
        curve     Learning curve over an existing dataset
        report    Show a bundle's summary
        recipes   List the registered recipes
    """
    settings = reload_settings()
    if verbose:
        settings.log_level = "DEBUG"
    log_file = setup_logging(settings)
    ctx.obj = {"settings": settings, "log_file": log_file}


@cli.command(context_settings=PASSTHROUGH)
@click.argument("builder", type=click.Choice(sorted(BUILDERS)))
@click.option("--out", "out", type=click.Path(dir_okay=False, path_type=Path), required=True, help="NDJSON output")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.pass_context
def gen(ctx: click.Context, builder: str, out: Path, config_file: Path | None) -> None:
    """
    Build a dataset: gen BUILDER --out FILE [--key value ...]

    Builders returning a fixed validation set write FILE.train.ndjson and
    FILE.valid.ndjson.
    """
    settings = _settings(ctx)
    params = load_config_file(config_file) if config_file else {}
    if isinstance(params.get("dataset"), dict):
        params = params["dataset"]
    params.update(parse_overrides(ctx.args))

    built = build_from_config(builder, params)
    parts = zip(_split_paths(out), built) if isinstance(built, tuple) else [(out, built)]
    for path, dataset in parts:
        report = verify_labels(dataset, sample_rate=settings.oracle_sample_rate)
        if not report.ok:
            click.echo(f"✗ oracle disagrees with {len(report.disagreements)} label(s): {report.disagreements[:10]}", err=True)
            ctx.exit(2)
        digest = write_dataset(path, dataset, oracle_sample_rate=settings.oracle_sample_rate)
        _echo_dataset(path, dataset, digest)


@cli.command(context_settings=PASSTHROUGH)
@click.argument("recipe", required=False)
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out", type=click.Path(file_okay=False, path_type=Path), help="Bundle directory")
@click.option("--write-data", is_flag=True, help="Also write the dataset NDJSON files into the bundle")
@click.pass_context
def run(ctx: click.Context, recipe: str | None, config_file: Path | None, out: Path | None, write_data: bool) -> None:
    """Run a recipe: run [RECIPE] [--config FILE] [--out DIR] [--key value ...]"""
    settings = _settings(ctx)
    args = list(ctx.args)
    if recipe is not None and recipe.startswith("--"):
        args.insert(0, recipe)
        recipe = None
    overrides = parse_overrides(args)
    if out is not None:
        overrides["output_dir"] = str(out)
    config = resolve_config(recipe, config_file, overrides)

    experiment = RecipeExperiment(config, settings, write_data=write_data)
    click.echo(f"Running {config.recipe} v{config.version} -> {experiment.output_dir}")
    started = datetime.now(timezone.utc)
    clock = time.perf_counter()
    result = experiment.run()
    finished = datetime.now(timezone.utc)

    experiment.output_dir.mkdir(parents=True, exist_ok=True)
    if not result.success:
        write_summary(experiment.output_dir, result)
    write_run_info(
        experiment.output_dir,
        RunInfo(
            recipe=config.recipe,
            started_at=started,
            finished_at=finished,
            duration_seconds=time.perf_counter() - clock,
            log_file=str(ctx.obj.get("log_file")) if ctx.obj.get("log_file") else None,
            package_version=__version__,
        ),
    )

    if not result.success:
        click.echo(f"✗ {config.recipe} failed", err=True)
        for error in result.errors:
            click.echo(f"  - {error}", err=True)
        ctx.exit(2)

    click.echo(f"✓ {config.recipe} completed: {result.records} records")
    for check in result.checks:
        verdict = {True: "pass", False: "MISS", None: "info"}[check.passed]
        achieved = "undefined" if check.achieved is None else f"{check.achieved:.4f}"
        click.echo(f"  {check.metric}: {achieved} [{verdict}]")
    if result.citation:
        click.echo(f"  compared with: {result.citation}")


@cli.command()
@click.argument("kind", type=click.Choice(list(ORACLE_TASKS)))
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out", type=click.Path(dir_okay=False, path_type=Path), help="Write verdicts here instead of stdout")
@click.pass_context
def oracle(ctx: click.Context, kind: str, input_path: Path, out: Path | None) -> None:
    """
    Exact verdict per NDJSON line: oracle {quadrangle|simple|subgroups|iso|distrib} FILE

    Accepts dataset files, table records ({"n", "table"}), ring records
    ({"n", "moduli", "mult", "add"}) and {"first", "second"} table pairs.
    Exits 2 if any line is malformed or disagrees with its stored label.
    """
    manifest = read_manifest(input_path)
    compare = manifest is None or manifest.task == ORACLE_TASKS[kind]
    task_config = manifest.config if manifest is not None else None

    verdicts = []
    failures = 0
    with input_path.open(encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            raw = raw.strip()
            if not raw or raw.startswith(MANIFEST_PREFIX):
                continue
            try:
                obj = json.loads(raw)
                if not isinstance(obj, dict):
                    raise ValueError("record is not a JSON object")
                verdict = {"line": line_no, **oracle_verdict(kind, obj, task_config, compare_label=compare)}
            except (ValueError, ValidationError, CayleyLearnError) as e:
                message = str(e).splitlines()[0]
                verdict = {"line": line_no, "error": message}
                click.echo(f"line {line_no}: {message}", err=True)
            if "error" in verdict or verdict.get("agrees") is False:
                failures += 1
            line = dumps_line(verdict)
            if out is None:
                click.echo(line)
            verdicts.append(line)

    if out is not None:
        atomic_write(out, "\n".join(verdicts) + ("\n" if verdicts else ""))
    click.echo(f"{kind}: {len(verdicts)} line(s), {failures} failure(s)", err=True)
    if failures:
        ctx.exit(2)


def _trainer_overrides(args: list[str]) -> TrainerConfig:
    overrides = {key.removeprefix("trainer."): value for key, value in parse_overrides(args).items()}
    try:
        return TrainerConfig.model_validate(overrides)
    except ValidationError as e:
        raise ConfigError(f"invalid trainer options: {e}") from e


def _number_list(text: str | None, cast) -> list:
    if not text:
        return []
    try:
        return [cast(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from e


@cli.command(context_settings=PASSTHROUGH)
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--gammas", help="Comma-separated training fractions in (0, 1)")
@click.option("--sizes", help="Comma-separated absolute training sizes")
@click.option("--repeats", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.pass_context
def curve(
    ctx: click.Context,
    dataset_path: Path,
    gammas: str | None,
    sizes: str | None,
    repeats: int,
    seed: int,
    out: Path,
) -> None:
    """Learning curve over a dataset file: curve FILE --gammas 0.1,0.2 --out DIR [--trainer.key value ...]"""
    trainer = _trainer_overrides(ctx.args)
    dataset = read_dataset(dataset_path)
    grid = set(_number_list(gammas, float)) | set(gammas_from_sizes(_number_list(sizes, int), len(dataset)))
    if not grid:
        raise click.UsageError("give --gammas and/or --sizes")

    result = learning_curve(dataset, sorted(grid), repeats, trainer, seed=seed)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(rows_frame(result.rows), out / "runs.csv")
    write_csv(points_frame(result.points, dataset.task), out / "aggregate.csv")
    plot_curve(result.points, out / "curve.svg", title=dataset_path.stem)
    click.echo(f"✓ {len(result.rows)} runs written to {out}")
    for point in result.points:
        phi = point.mean.get("phi")
        click.echo(
            f"  gamma={point.gamma:.4f} accuracy={point.mean['accuracy']:.4f} "
            f"phi={'undefined' if phi is None else f'{phi:.4f}'}"
        )


@cli.command()
@click.argument("bundle", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--strict", is_flag=True, help="Exit 3 when an acceptance band is missed")
def report(bundle: Path, strict: bool) -> None:
    """Print a bundle's summary: report DIR [--strict]"""
    try:
        result = load_result(bundle)
    except FileNotFoundError:
        raise click.BadParameter(f"{bundle} has no summary.json", param_hint="BUNDLE") from None
    click.echo(render_markdown(result), nl=False)
    if strict and not result.accepted:
        missed = [c.metric for c in result.checks if c.passed is False]
        reason = f"missed {', '.join(missed)}" if missed else "run did not succeed"
        raise AcceptanceMiss(f"{result.recipe}: {reason}")


@cli.command("recipes")
def list_recipes() -> None:
    """List the registered recipes."""
    for name, recipe in RECIPES.items():
        click.echo(f"{name} (v{recipe.version}): {recipe.description}")


def main(argv: list[str] | None = None) -> None:
    """Main entry point."""
    try:
        code = cli.main(args=argv, prog_name="cayley-learn", obj={}, standalone_mode=False)
    except click.ClickException as e:
        e.show()
        sys.exit(e.exit_code)
    except click.Abort:
        click.echo("Aborted!", err=True)
        sys.exit(1)
    sys.exit(code if isinstance(code, int) else 0)


if __name__ == "__main__":
    main()
