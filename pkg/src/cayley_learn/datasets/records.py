"""
Labelled records and datasets.

A record keeps its table(s) as views: a shared base table plus the row and
column permutation and entry shift that produce the live block. The live
block is only materialised on demand, so tens of thousands of permuted copies
of a large group (A6 is 360 x 360) cost little memory. Padding to ``n_max`` is
applied at encoding time.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from cayley_learn.core.errors import DomainError, ShapeError
from cayley_learn.core.schema import DatasetManifest, DatasetRecordModel, RecordMetaModel


def pad(table, N: int) -> np.ndarray:
    """
    Place an m x m table in the top-left corner of an N x N zero matrix.

    Raises:
        ShapeError: if m > N
    """
    arr = np.asarray(table, dtype=np.int64)
    m = arr.shape[-1]
    if m > N:
        raise ShapeError(f"cannot pad a {m}x{m} table into {N}x{N}")
    out = np.zeros(arr.shape[:-2] + (N, N), dtype=np.int64)
    out[..., :m, :m] = arr
    return out


def shift_entries(table, delta: int) -> np.ndarray:
    """
    Add ``delta`` to every live entry; zero (padding) entries stay zero.

    Raises:
        DomainError: if delta < 0
    """
    if delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    arr = np.asarray(table, dtype=np.int64)
    return np.where(arr > 0, arr + delta, 0)


@dataclass(frozen=True, eq=False)
class TableView:
    """base[rows][:, cols] + delta, with the base array shared between views."""

    base: np.ndarray
    rows: np.ndarray | None = None
    cols: np.ndarray | None = None
    delta: int = 0

    @property
    def n(self) -> int:
        return self.base.shape[0]

    def materialize(self) -> np.ndarray:
        arr = self.base
        if self.rows is not None or self.cols is not None:
            rows = self.rows if self.rows is not None else np.arange(self.n)
            cols = self.cols if self.cols is not None else np.arange(self.n)
            arr = arr[np.ix_(rows, cols)]
        if self.delta:
            arr = shift_entries(arr, self.delta)
        return np.asarray(arr, dtype=np.int64)


@dataclass(frozen=True)
class RecordMeta:
    source: str
    seed: int
    delta: int = 0
    perm_id: int = 0
    extra: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class Record:
    """
    One labelled example.

    Attributes:
        id: Position in the builder's output
        views: One table, or (mult, add) for pair records
        label: Class label
        meta: Provenance
    """

    id: int
    views: tuple[TableView, ...]
    label: int
    meta: RecordMeta

    @property
    def n(self) -> int:
        return self.views[0].n

    @property
    def pair(self) -> bool:
        return len(self.views) == 2

    @property
    def x(self) -> np.ndarray:
        """Live block: (m, m) or (2, m, m)."""
        if self.pair:
            return np.stack([v.materialize() for v in self.views])
        return self.views[0].materialize()

    def max_symbol(self) -> int:
        return int(max(v.base.max() + v.delta for v in self.views))

    def with_id(self, new_id: int) -> Record:
        return Record(id=new_id, views=self.views, label=self.label, meta=self.meta)

    def to_model(self) -> DatasetRecordModel:
        return DatasetRecordModel(
            id=self.id,
            x=self.x.tolist(),
            n=self.n,
            label=self.label,
            meta=RecordMetaModel(
                source=self.meta.source,
                seed=self.meta.seed,
                delta=self.meta.delta,
                perm_id=self.meta.perm_id,
                extra=self.meta.extra,
            ),
        )

    @classmethod
    def from_model(cls, model: DatasetRecordModel) -> Record:
        x = np.asarray(model.x, dtype=np.int64)
        if x.ndim == 2:
            views = (TableView(x),)
        elif x.ndim == 3 and x.shape[0] == 2:
            views = (TableView(x[0]), TableView(x[1]))
        else:
            raise ShapeError(f"record {model.id}: x must be m x m or 2 x m x m, got {x.shape}")
        if x.shape[-1] != model.n or x.shape[-2] != model.n:
            raise ShapeError(f"record {model.id}: declared n={model.n} but table is {x.shape[-1]} wide")
        meta = RecordMeta(
            source=model.meta.source,
            seed=model.meta.seed,
            delta=model.meta.delta,
            perm_id=model.meta.perm_id,
            extra=dict(model.meta.extra),
        )
        return cls(id=model.id, views=views, label=model.label, meta=meta)


@dataclass
class Dataset:
    """
    Ordered labelled records.

    Attributes:
        records: The records, in builder order
        n_max: Padded dimension
        K: Largest label
        task: Labelling task (see core.schema.TaskName)
        builder: Name of the builder
        config: Builder configuration
        corpus: Names of the source structures
        part: "all", "train" or "valid"
    """

    records: list[Record]
    n_max: int
    K: int
    task: str
    builder: str = ""
    config: dict[str, Any] = field(default_factory=dict)
    corpus: list[str] = field(default_factory=list)
    part: str = "all"

    def __post_init__(self):
        for record in self.records:
            if not 0 <= record.label <= self.K:
                raise DomainError(f"record {record.id} has label {record.label} outside 0..{self.K}")
            if record.n > self.n_max:
                raise ShapeError(f"record {record.id} has size {record.n} > n_max={self.n_max}")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def pair(self) -> bool:
        return bool(self.records) and self.records[0].pair

    @property
    def labels(self) -> np.ndarray:
        return np.fromiter((r.label for r in self.records), dtype=np.int64, count=len(self.records))

    def label_counts(self) -> dict[int, int]:
        counts = Counter(r.label for r in self.records)
        return {label: counts.get(label, 0) for label in range(self.K + 1)}

    def max_symbol(self) -> int:
        return max((r.max_symbol() for r in self.records), default=1)

    def require_classes(self, minimum: int = 2) -> None:
        """
        Raises:
            DomainError: if the dataset is empty or has fewer distinct labels
        """
        present = sum(1 for c in self.label_counts().values() if c)
        if not self.records or present < minimum:
            raise DomainError(f"{self.builder or 'dataset'} needs >= {minimum} classes, found {present}")

    def subset(self, indices, part: str | None = None) -> Dataset:
        return Dataset(
            records=[self.records[i] for i in indices],
            n_max=self.n_max,
            K=self.K,
            task=self.task,
            builder=self.builder,
            config=self.config,
            corpus=self.corpus,
            part=part or self.part,
        )

    def manifest(self, oracle_sample_rate: float = 0.01) -> DatasetManifest:
        return DatasetManifest(
            builder=self.builder or "unknown",
            task=self.task,
            part=self.part,
            config=self.config,
            n_max=self.n_max,
            K=self.K,
            pair=self.pair,
            count=len(self.records),
            label_counts={str(k): v for k, v in self.label_counts().items()},
            oracle_sample_rate=oracle_sample_rate,
            corpus=self.corpus,
        )

    def describe(self) -> str:
        counts = ", ".join(f"{k}: {v}" for k, v in self.label_counts().items())
        return f"{len(self)} records (n_max={self.n_max}, labels {{{counts}}})"


def split(D: Dataset, gamma: float, seed: int) -> tuple[Dataset, Dataset]:
    """
    Uniformly random split with |train| = round(gamma * N).

    Raises:
        DomainError: if gamma is outside (0, 1]
    """
    if not 0 < gamma <= 1:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    n_train = int(np.floor(gamma * len(D) + 0.5))
    return split_sized(D, n_train, seed)


def split_sized(D: Dataset, train_size: int, seed: int) -> tuple[Dataset, Dataset]:
    """Random split with exactly ``train_size`` training records."""
    if not 0 <= train_size <= len(D):
        raise DomainError(f"train_size {train_size} outside 0..{len(D)}")
    order = np.random.default_rng(seed).permutation(len(D))
    return D.subset(order[:train_size], part="train"), D.subset(order[train_size:], part="valid")


def concat(parts: list[Dataset], part: str | None = None) -> Dataset:
    """Join datasets of the same task, renumbering ids in order."""
    if not parts:
        raise DomainError("nothing to concatenate")
    records = [r.with_id(i) for i, r in enumerate(r for d in parts for r in d.records)]
    first = parts[0]
    return Dataset(
        records=records,
        n_max=max(d.n_max for d in parts),
        K=max(d.K for d in parts),
        task=first.task,
        builder=first.builder,
        config=first.config,
        corpus=sorted({name for d in parts for name in d.corpus}),
        part=part or first.part,
    )
