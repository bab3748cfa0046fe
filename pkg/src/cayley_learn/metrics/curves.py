"""
Learning curves: validation scores as a function of the training fraction.

Each (gamma, repeat) cell draws its own seeded split, trains a fresh model and
scores it on the held-out records. Cells run concurrently; results are
collected back into (gamma, repeat) order, so aggregates never depend on
completion order.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from cayley_learn.config import get_settings
from cayley_learn.core.errors import DomainError
from cayley_learn.core.schema import CurveSummary, RunRow, TrainerConfig
from cayley_learn.datasets.records import Dataset, split, split_sized
from cayley_learn.learn.encoding import FeatureEncoder
from cayley_learn.learn.trainer import encoder_for, fit
from cayley_learn.metrics.confusion import score

logger = logging.getLogger(__name__)

METRICS = ("accuracy", "phi", "f1", "predicted_one")


@dataclass
class LearningCurvePoint:
    """Mean and sample standard deviation of each metric over the repeats at one gamma."""

    gamma: float
    repeats: int
    mean: dict[str, float | None] = field(default_factory=dict)
    std: dict[str, float | None] = field(default_factory=dict)

    def to_summary(self, task: str) -> CurveSummary:
        values = {}
        for metric in METRICS:
            values[f"{metric}_mean"] = self.mean.get(metric)
            values[f"{metric}_std"] = self.std.get(metric)
        return CurveSummary(task=task, gamma=self.gamma, repeats=self.repeats, **values)


@dataclass
class CurveResult:
    rows: list[RunRow]
    points: list[LearningCurvePoint]

    def point(self, gamma: float) -> LearningCurvePoint:
        for p in self.points:
            if np.isclose(p.gamma, gamma):
                return p
        raise KeyError(gamma)


def repeat_seed(seed: int, repeat: int) -> int:
    return int(np.random.SeedSequence([seed, repeat]).generate_state(1)[0])


def _mean_std(values: list[float | None]) -> tuple[float | None, float | None]:
    defined = np.array([v for v in values if v is not None], dtype=np.float64)
    if defined.size == 0:
        return None, None
    mean = float(defined.mean())
    std = float(defined.std(ddof=1)) if defined.size > 1 else None
    return mean, std


def aggregate(rows: list[RunRow]) -> list[LearningCurvePoint]:
    """Group run rows by gamma, in ascending gamma order."""
    by_gamma: dict[float, list[RunRow]] = {}
    for row in rows:
        by_gamma.setdefault(row.gamma, []).append(row)
    points = []
    for gamma in sorted(by_gamma):
        cell = by_gamma[gamma]
        point = LearningCurvePoint(gamma=gamma, repeats=len(cell))
        for metric in METRICS:
            point.mean[metric], point.std[metric] = _mean_std([getattr(r, metric) for r in cell])
        points.append(point)
    return points


def _seeds(seed: int, repeats: int, repeat_seeds: Sequence[int] | None) -> list[int]:
    if repeat_seeds is None:
        return [repeat_seed(seed, r) for r in range(repeats)]
    if len(repeat_seeds) != repeats:
        raise DomainError(f"{len(repeat_seeds)} repeat seeds given for {repeats} repeats")
    return [int(s) for s in repeat_seeds]


def _run_cells(cells, job, max_workers: int | None) -> list[RunRow]:
    workers = max_workers or get_settings().max_workers
    if workers <= 1 or len(cells) <= 1:
        return [job(*cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda cell: job(*cell), cells))


def learning_curve(
    D: Dataset,
    gammas: Sequence[float],
    repeats: int,
    trainer: TrainerConfig,
    seed: int = 0,
    repeat_seeds: Sequence[int] | None = None,
    max_workers: int | None = None,
) -> CurveResult:
    """
    Repeated seeded splits of D at every gamma.

    Args:
        repeat_seeds: Explicit seed per repeat, used for both the split and
            the model; by default seeds are derived from ``seed``

    Raises:
        DomainError: for a gamma outside (0, 1), fewer than two repeats, or a
            split with an empty validation side
    """
    if repeats < 2:
        raise DomainError(f"a learning curve needs at least 2 repeats, got {repeats}")
    for gamma in gammas:
        if not 0 < gamma < 1:
            raise DomainError(f"learning-curve gamma must lie in (0, 1), got {gamma}")
    seeds = _seeds(seed, repeats, repeat_seeds)
    encoder = encoder_for(D, trainer)

    def job(gamma: float, repeat: int, cell_seed: int) -> RunRow:
        train, valid = split(D, gamma, cell_seed)
        if not len(valid):
            raise DomainError(f"gamma={gamma} leaves no validation records")
        trained = fit(train, trainer, encoder=encoder, seed=cell_seed)
        scores = score(trained.predict_dataset(valid), valid.labels, D.K)
        logger.debug(f"gamma={gamma} repeat={repeat}: {scores}")
        return RunRow(
            task=D.task,
            gamma=gamma,
            repeat=repeat,
            seed=cell_seed,
            train_size=len(train),
            valid_size=len(valid),
            **scores,
        )

    cells = [(float(g), r, seeds[r]) for g in gammas for r in range(repeats)]
    logger.info(f"Learning curve: {len(gammas)} gamma(s) x {repeats} repeats on {len(D)} records")
    rows = _run_cells(cells, job, max_workers)
    return CurveResult(rows=rows, points=aggregate(rows))


def fixed_split_trials(
    train_pool: Dataset,
    valid: Dataset,
    train_size: int | None,
    repeats: int,
    trainer: TrainerConfig,
    seed: int = 0,
    repeat_seeds: Sequence[int] | None = None,
    max_workers: int | None = None,
) -> CurveResult:
    """
    Train on random draws from a fixed pool and score on a fixed validation set.

    Used where validation structures must stay unseen in training. With
    ``train_size`` None every repeat trains on the whole pool and repeats
    differ only by the model seed.
    """
    if not len(train_pool) or not len(valid):
        raise DomainError("fixed-split trials need a nonempty training pool and validation set")
    size = len(train_pool) if train_size is None else train_size
    if not 0 < size <= len(train_pool):
        raise DomainError(f"train_size {size} outside 1..{len(train_pool)}")
    seeds = _seeds(seed, repeats, repeat_seeds)
    K = max(train_pool.K, valid.K)
    encoder = FeatureEncoder(
        scheme=trainer.encoding,
        n_max=max(train_pool.n_max, valid.n_max),
        max_symbol=trainer.max_symbol or max(train_pool.max_symbol(), valid.max_symbol()),
        pair=train_pool.pair,
    )
    gamma = size / len(train_pool)

    def job(repeat: int, cell_seed: int) -> RunRow:
        train = split_sized(train_pool, size, cell_seed)[0] if size < len(train_pool) else train_pool
        trained = fit(train, trainer, encoder=encoder, seed=cell_seed)
        scores = score(trained.predict_dataset(valid), valid.labels, K)
        return RunRow(
            task=valid.task,
            gamma=gamma,
            repeat=repeat,
            seed=cell_seed,
            train_size=len(train),
            valid_size=len(valid),
            **scores,
        )

    logger.info(f"Fixed-split trials: {repeats} x {size} training records, {len(valid)} validation")
    rows = _run_cells([(r, seeds[r]) for r in range(repeats)], job, max_workers)
    return CurveResult(rows=rows, points=aggregate(rows))


def gammas_from_sizes(sizes: Sequence[int], N: int) -> list[float]:
    """Absolute training sizes as fractions of a dataset of N records."""
    out = []
    for size in sizes:
        if not 0 < size < N:
            raise DomainError(f"training size {size} must lie strictly between 0 and {N}")
        out.append(size / N)
    return out
