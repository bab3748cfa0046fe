"""
RecipeExperiment: dataset build, label re-check, seeded trials, report bundle.

Two evaluation protocols:
    split   repeated random gamma-splits of one dataset (learning_curve)
    fixed   training draws from a pool, scored on a fixed validation set whose
            structures never occur in training (fixed_split_trials)
"""

from __future__ import annotations

from typing import Any

from cayley_learn.config import Settings
from cayley_learn.core.errors import DomainError
from cayley_learn.core.schema import ExperimentConfig, ExperimentResult, RunRow
from cayley_learn.core.storage import content_hash
from cayley_learn.datasets.builders import BUILDERS, build_from_config
from cayley_learn.datasets.io import dataset_hash, write_dataset
from cayley_learn.datasets.oracles import verify_labels
from cayley_learn.datasets.records import Dataset, split, split_sized
from cayley_learn.experiments.base import Experiment
from cayley_learn.experiments.report import check_targets, write_bundle
from cayley_learn.learn.checkpoint import save_model
from cayley_learn.learn.encoding import FeatureEncoder
from cayley_learn.learn.trainer import TrainedModel, encoder_for, fit
from cayley_learn.metrics.curves import (
    LearningCurvePoint,
    aggregate,
    fixed_split_trials,
    gammas_from_sizes,
    learning_curve,
)

# Builders returning (train, valid) with disjoint source structures
FIXED_PROTOCOL_BUILDERS = frozenset({"unseen-groups", "group-iso-pairs", "ring-collection"})


def embedded_config(config: ExperimentConfig) -> dict[str, Any]:
    """The config as stored in every result; the output directory is left out."""
    return config.model_dump(mode="json", exclude={"output_dir"})


class RecipeExperiment(Experiment):
    """
    Run one ExperimentConfig end to end.

    Usage:
        experiment = RecipeExperiment(config, settings)
        result = experiment.run()
    """

    def __init__(self, config: ExperimentConfig, settings: Settings, write_data: bool = False):
        """
        Args:
            config: Validated experiment configuration
            settings: Application settings
            write_data: Also write the dataset NDJSON files into the bundle
        """
        output_dir = config.output_dir or settings.output_root / config.recipe
        super().__init__(config.recipe, config.version, settings, output_dir, embedded_config(config))
        self.experiment = config
        self.write_data = write_data
        self.points: list[LearningCurvePoint] = []

    def validate_prerequisites(self) -> bool:
        builder = self.experiment.builder
        evaluation = self.experiment.evaluation
        if builder not in BUILDERS:
            self.problems.append(f"unknown builder {builder!r}; available: {', '.join(sorted(BUILDERS))}")
        elif builder in FIXED_PROTOCOL_BUILDERS and evaluation.protocol != "fixed":
            self.problems.append(f"builder {builder} yields a fixed validation set; use evaluation.protocol=fixed")
        elif builder not in FIXED_PROTOCOL_BUILDERS and evaluation.protocol != "split":
            self.problems.append(f"builder {builder} yields one dataset; use evaluation.protocol=split")
        if evaluation.protocol == "split" and evaluation.repeats < 2:
            self.problems.append("learning curves need at least 2 repeats")
        if evaluation.protocol == "split" and evaluation.gamma == 1.0:
            self.problems.append("gamma=1 leaves no validation records under the split protocol")
        if self.experiment.trainer.model == "linear" and builder == "subgroup-classes":
            self.problems.append("subgroup classes are multiclass; use trainer.model=mlp")
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            self.problems.append(f"cannot create output directory {self.output_dir}: {e}")
        return not self.problems

    def _record_dataset(self, name: str, dataset: Dataset) -> tuple[dict[str, Any], str]:
        """Check a sample of labels, optionally write the file, return (manifest, hash)."""
        rate = self.settings.oracle_sample_rate
        report = verify_labels(dataset, sample_rate=rate, seed=self.experiment.evaluation.seed)
        if not report.ok:
            raise DomainError(
                f"{name}: {len(report.disagreements)} of {report.checked} records disagree with the oracle "
                f"(ids {report.disagreements[:10]})"
            )
        if self.write_data:
            digest = write_dataset(self.output_dir / f"{name}.ndjson", dataset, oracle_sample_rate=rate)
        else:
            digest = dataset_hash(dataset)
        manifest = dataset.manifest(rate).model_copy(update={"content_hash": digest})
        return manifest.model_dump(mode="json"), digest

    def _split_protocol(self, dataset: Dataset) -> tuple[list[RunRow], float, Dataset]:
        evaluation = self.experiment.evaluation
        trainer = self.experiment.trainer
        N = len(dataset)
        if evaluation.gamma is not None:
            main_gamma = evaluation.gamma
        else:
            main_gamma = gammas_from_sizes([evaluation.train_size], N)[0]
        gammas = {main_gamma, *evaluation.curve_gammas, *gammas_from_sizes(evaluation.curve_sizes, N)}
        curve = learning_curve(dataset, sorted(gammas), evaluation.repeats, trainer, seed=evaluation.seed)
        final_train = split(dataset, main_gamma, evaluation.seed)[0]
        return curve.rows, main_gamma, final_train

    def _fixed_protocol(self, pool: Dataset, valid: Dataset) -> tuple[list[RunRow], float, Dataset]:
        evaluation = self.experiment.evaluation
        trainer = self.experiment.trainer
        if evaluation.train_size is not None:
            main_size = evaluation.train_size
        else:
            main_size = int(round(evaluation.gamma * len(pool)))
        sizes = sorted({main_size, *evaluation.curve_sizes})
        rows: list[RunRow] = []
        for size in sizes:
            trials = fixed_split_trials(
                pool,
                valid,
                None if size >= len(pool) else size,
                evaluation.repeats,
                trainer,
                seed=evaluation.seed,
            )
            rows.extend(trials.rows)
        final_train = pool if main_size >= len(pool) else split_sized(pool, main_size, evaluation.seed)[0]
        return rows, min(main_size, len(pool)) / len(pool), final_train

    def _final_model(self, train: Dataset, datasets: list[Dataset]) -> TrainedModel:
        trainer = self.experiment.trainer
        if len(datasets) == 1:
            encoder = encoder_for(datasets[0], trainer)
        else:
            encoder = FeatureEncoder(
                scheme=trainer.encoding,
                n_max=max(d.n_max for d in datasets),
                max_symbol=trainer.max_symbol or max(d.max_symbol() for d in datasets),
                pair=datasets[0].pair,
            )
        return fit(train, trainer, encoder=encoder, seed=trainer.seed)

    def execute(self) -> ExperimentResult:
        config = self.experiment
        self.logger.info(f"Building {config.builder} dataset: {config.dataset}")
        built = build_from_config(config.builder, config.dataset)

        if isinstance(built, tuple):
            pool, valid = built
            named = {"train": pool, "valid": valid}
        else:
            named = {"dataset": built}
        manifests: dict[str, dict[str, Any]] = {}
        digests = []
        for name, dataset in named.items():
            manifests[name], digest = self._record_dataset(name, dataset)
            digests.append(digest)
        manifest_hash = digests[0] if len(digests) == 1 else content_hash(digests)

        if isinstance(built, tuple):
            rows, main_gamma, final_train = self._fixed_protocol(pool, valid)
        else:
            rows, main_gamma, final_train = self._split_protocol(built)
        self.points = aggregate(rows)
        main_point = min(self.points, key=lambda p: abs(p.gamma - main_gamma))
        self.logger.info(f"Main point gamma={main_point.gamma:.4f}: {main_point.mean}")

        checks, citation = check_targets(config.recipe, main_point, self.points)
        for check in checks:
            if check.passed is False:
                self.logger.warning(f"{check.metric}={check.achieved} outside [{check.lower}, {check.upper}]")

        trained = self._final_model(final_train, list(named.values()))
        save_model(self.output_dir / "model.json", trained, manifest_hash=manifest_hash)

        datasets = list(named.values())
        result = ExperimentResult(
            recipe=config.recipe,
            version=config.version,
            success=True,
            config=self.config,
            manifest_hash=manifest_hash,
            records=sum(len(d) for d in datasets),
            corpus=sorted({name for d in datasets for name in d.corpus}),
            checks=checks,
            citation=citation,
        )
        task = datasets[-1].task
        write_bundle(self.output_dir, result, rows, self.points, manifests, task)
        return result
