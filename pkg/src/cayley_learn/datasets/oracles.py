"""
Exact label oracles per task and sampled re-verification of datasets.

Records hold permuted and entry-shifted live blocks, so every oracle first
brings symbols back to 1..m before asking the algebra layer.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from cayley_learn.algebra.latin import reduce
from cayley_learn.algebra.oracles import (
    are_isomorphic,
    is_group_table,
    is_simple,
    quadrangle_criterion,
    subgroup_counts,
)
from cayley_learn.algebra.rings import is_consistent_pair
from cayley_learn.algebra.tables import GroupTable, is_associative, is_latin_square
from cayley_learn.config import get_settings
from cayley_learn.core.errors import DomainError
from cayley_learn.core.schema import DatasetRecordModel, RingRecord, TableRecord
from cayley_learn.datasets.builders import subgroup_class
from cayley_learn.datasets.records import Dataset, Record

logger = logging.getLogger(__name__)


def normalize_symbols(block: np.ndarray) -> np.ndarray:
    """Undo an entry shift: the live block's smallest symbol becomes 1."""
    arr = np.asarray(block, dtype=np.int64)
    return arr - arr.min() + 1


def as_group(block: np.ndarray) -> GroupTable | None:
    """
    The group a permuted Cayley table presents, or None.

    The reduced form of a permuted group table has identity 1 in its first
    row and column and is isomorphic to the original group.
    """
    arr = normalize_symbols(block)
    if not is_latin_square(arr):
        return None
    reduced = reduce(arr).square
    if not is_associative(reduced):
        return None
    return GroupTable.from_array(reduced, check=False)


def cayley_label(record: Record) -> int:
    arr = normalize_symbols(record.x)
    return int(is_latin_square(arr) and is_group_table(arr))


def simplicity_label(record: Record) -> int:
    group = as_group(record.x)
    if group is None:
        raise DomainError(f"record {record.id} is not a group table")
    return int(is_simple(group))


def iso_label(record: Record) -> int:
    first, second = (as_group(v.materialize()) for v in record.views)
    if first is None or second is None:
        raise DomainError(f"record {record.id} does not hold two group tables")
    return int(are_isomorphic(first, second) is not None)


def ring_label(record: Record) -> int:
    mult, add = (v.materialize() for v in record.views)
    return int(is_consistent_pair(mult, add))


@dataclass
class VerificationReport:
    """Outcome of re-checking a sample of records."""

    task: str
    checked: int = 0
    disagreements: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def to_dict(self) -> dict:
        return {"task": self.task, "checked": self.checked, "disagreements": self.disagreements}


def label_oracle(dataset: Dataset):
    """The exact labelling function for a dataset's task."""
    if dataset.task == "cayley":
        return cayley_label
    if dataset.task == "simplicity":
        return simplicity_label
    if dataset.task == "group-iso":
        return iso_label
    if dataset.task == "ring-match":
        return ring_label
    if dataset.task == "subgroups":
        thresholds = tuple(dataset.config.get("thresholds", (30, 100)))
        kind = dataset.config.get("count_kind", "total")

        def subgroups_label(record: Record) -> int:
            group = as_group(record.x)
            if group is None:
                raise DomainError(f"record {record.id} is not a group table")
            return subgroup_class(subgroup_counts(group).get(kind), thresholds)

        return subgroups_label
    raise DomainError(f"no label oracle for task {dataset.task!r}")


def verify_labels(dataset: Dataset, sample_rate: float | None = None, seed: int = 0) -> VerificationReport:
    """
    Re-check a random sample of records against the exact oracle.

    At least one record is checked whenever the dataset is nonempty and the
    rate is positive. A rate of 1 checks every record.
    """
    rate = get_settings().oracle_sample_rate if sample_rate is None else sample_rate
    if not 0 <= rate <= 1:
        raise DomainError(f"sample_rate must lie in [0, 1], got {rate}")
    report = VerificationReport(task=dataset.task)
    if not len(dataset) or rate == 0:
        return report

    count = max(1, int(round(rate * len(dataset))))
    rng = np.random.default_rng(seed)
    indices = np.sort(rng.choice(len(dataset), size=min(count, len(dataset)), replace=False))
    oracle = label_oracle(dataset)
    for i in indices:
        record = dataset.records[int(i)]
        if oracle(record) != record.label:
            report.disagreements.append(record.id)
    report.checked = len(indices)
    if report.ok:
        logger.info(f"Oracle check: {report.checked} {dataset.task} record(s) agree with their labels")
    else:
        logger.warning(f"Oracle check: {len(report.disagreements)} of {report.checked} records disagree")
    return report


# === Line-by-line verdicts ===

# Oracle kind -> dataset task whose labels it decides
ORACLE_TASKS = {
    "quadrangle": "cayley",
    "simple": "simplicity",
    "subgroups": "subgroups",
    "iso": "group-iso",
    "distrib": "ring-match",
}


def _blocks(obj: dict[str, Any]) -> tuple[list[np.ndarray], DatasetRecordModel | None]:
    """Tables of one input line plus its dataset record, if it is one."""
    if "x" in obj:
        model = DatasetRecordModel.model_validate(obj)
        record = Record.from_model(model)
        return [v.materialize() for v in record.views], model
    if "mult" in obj:
        ring = RingRecord.model_validate(obj)
        shape = (ring.n, ring.n)
        return [np.reshape(ring.mult, shape), np.reshape(ring.add, shape)], None
    if "first" in obj and "second" in obj:
        tables = [TableRecord.model_validate(obj[key]) for key in ("first", "second")]
        return [np.reshape(t.table, (t.n, t.n)) for t in tables], None
    table = TableRecord.model_validate(obj)
    return [np.reshape(table.table, (table.n, table.n))], None


def _need(blocks: list[np.ndarray], count: int, kind: str) -> None:
    if len(blocks) != count:
        raise DomainError(f"{kind} needs {count} table(s) per line, got {len(blocks)}")


def _group_of(block: np.ndarray) -> GroupTable:
    group = as_group(block)
    if group is None:
        raise DomainError("table is not a permuted group table")
    return group


def oracle_verdict(
    kind: str, obj: dict[str, Any], task_config: dict[str, Any] | None = None, compare_label: bool = True
) -> dict[str, Any]:
    """
    Run one exact oracle on one NDJSON line.

    Lines may be dataset records, table records, ring records or
    ``{"first": table record, "second": table record}`` pairs. For dataset
    records the stored label is compared with the label the oracle implies
    unless ``compare_label`` is off (the file labels a different task).

    Raises:
        pydantic.ValidationError: for a line matching none of the record shapes
        DomainError: when the line's tables do not suit the oracle
    """
    if kind not in ORACLE_TASKS:
        raise DomainError(f"unknown oracle {kind!r}; choose from {', '.join(ORACLE_TASKS)}")
    blocks, model = _blocks(obj)
    verdict: dict[str, Any] = {}
    if kind == "quadrangle":
        _need(blocks, 1, kind)
        arr = normalize_symbols(blocks[0])
        latin = is_latin_square(arr)
        verdict["latin"] = latin
        verdict["verdict"] = bool(latin and quadrangle_criterion(arr))
        implied = int(verdict["verdict"])
    elif kind == "simple":
        _need(blocks, 1, kind)
        verdict["verdict"] = is_simple(_group_of(blocks[0]))
        implied = int(verdict["verdict"])
    elif kind == "subgroups":
        _need(blocks, 1, kind)
        counts = subgroup_counts(_group_of(blocks[0]))
        verdict.update(total=counts.total, iso_classes=counts.iso_classes, verdict=counts.total)
        config = task_config or {}
        thresholds = tuple(config.get("thresholds", (30, 100)))
        implied = subgroup_class(counts.get(config.get("count_kind", "total")), thresholds)
    elif kind == "iso":
        _need(blocks, 2, kind)
        mapping = are_isomorphic(_group_of(blocks[0]), _group_of(blocks[1]))
        verdict["verdict"] = mapping is not None
        implied = int(verdict["verdict"])
    else:
        _need(blocks, 2, kind)
        verdict["verdict"] = is_consistent_pair(blocks[0], blocks[1])
        implied = int(verdict["verdict"])
    if model is not None:
        verdict["id"] = model.id
        if compare_label:
            verdict.update(label=model.label, agrees=model.label == implied)
    return verdict
