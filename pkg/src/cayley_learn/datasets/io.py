"""Dataset NDJSON files: a ``#!manifest`` line followed by one record per line."""

from __future__ import annotations

import logging
from pathlib import Path

from pydantic import ValidationError

from cayley_learn.core.errors import RecordParseError
from cayley_learn.core.schema import DatasetManifest, DatasetRecordModel
from cayley_learn.core.storage import NDJSONStore, content_hash, dumps_line
from cayley_learn.datasets.records import Dataset, Record

logger = logging.getLogger(__name__)


def write_dataset(path: Path | str, dataset: Dataset, oracle_sample_rate: float = 0.01) -> str:
    """
    Write a dataset with its manifest.

    Returns:
        sha256 of the record lines (also stored in the manifest)
    """
    path = Path(path)
    store = NDJSONStore(path.parent)
    manifest = dataset.manifest(oracle_sample_rate).model_dump(mode="json")
    digest = store.write(path.name, (r.to_model() for r in dataset.records), manifest=manifest)
    logger.info(f"Wrote {len(dataset)} records to {path} (sha256 {digest[:12]})")
    return digest


def dataset_hash(dataset: Dataset) -> str:
    """sha256 of the record lines write_dataset would produce."""
    return content_hash(dumps_line(r.to_model()) for r in dataset.records)


def read_manifest(path: Path | str) -> DatasetManifest | None:
    path = Path(path)
    raw = NDJSONStore(path.parent).read_manifest(path.name)
    return DatasetManifest.model_validate(raw) if raw is not None else None


def read_dataset(path: Path | str) -> Dataset:
    """
    Load a dataset file.

    Raises:
        RecordParseError: on the first malformed line, with its line number
        FileNotFoundError: if the file is missing
    """
    path = Path(path)
    store = NDJSONStore(path.parent)
    if not store.resolve(path.name).exists():
        raise FileNotFoundError(path)
    manifest = read_manifest(path)
    records = []
    for line_no, obj in store.iter_lines(path.name):
        try:
            records.append(Record.from_model(DatasetRecordModel.model_validate(obj)))
        except (ValidationError, ValueError) as e:
            raise RecordParseError(str(e).splitlines()[0], line=line_no) from e
    if manifest is None:
        n_max = max((r.n for r in records), default=1)
        K = max((r.label for r in records), default=1)
        logger.warning(f"{path} has no manifest; inferred n_max={n_max}, K={K}")
        return Dataset(records=records, n_max=n_max, K=max(K, 1), task="cayley")
    return Dataset(
        records=records,
        n_max=manifest.n_max,
        K=manifest.K,
        task=manifest.task,
        builder=manifest.builder,
        config=manifest.config,
        corpus=manifest.corpus,
        part=manifest.part,
    )
