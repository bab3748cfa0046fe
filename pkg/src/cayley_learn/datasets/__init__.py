"""Labelled datasets built from groups, Latin squares and rings."""

from cayley_learn.datasets.builders import (
    BUILDERS,
    build_cayley_vs_latin,
    build_entry_shift,
    build_from_config,
    build_group_iso_pairs,
    build_ring_collection,
    build_ring_match,
    build_ring_partitions,
    build_simplicity,
    build_subgroup_classes,
    build_unseen_group_split,
)
from cayley_learn.datasets.io import dataset_hash, read_dataset, read_manifest, write_dataset
from cayley_learn.datasets.oracles import ORACLE_TASKS, VerificationReport, oracle_verdict, verify_labels
from cayley_learn.datasets.records import Dataset, Record, RecordMeta, TableView, concat, pad, shift_entries, split

__all__ = [
    "BUILDERS",
    "ORACLE_TASKS",
    "Dataset",
    "Record",
    "RecordMeta",
    "TableView",
    "VerificationReport",
    "build_cayley_vs_latin",
    "build_entry_shift",
    "build_from_config",
    "build_group_iso_pairs",
    "build_ring_collection",
    "build_ring_match",
    "build_ring_partitions",
    "build_simplicity",
    "build_subgroup_classes",
    "build_unseen_group_split",
    "concat",
    "dataset_hash",
    "oracle_verdict",
    "pad",
    "read_dataset",
    "read_manifest",
    "shift_entries",
    "split",
    "verify_labels",
    "write_dataset",
]
