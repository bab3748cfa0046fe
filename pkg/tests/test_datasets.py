from pathlib import Path
from tempfile import TemporaryDirectory
import json
import unittest

import numpy as np

from cayley_learn.algebra.groups import catalog, cyclic_group, named_group
from cayley_learn.algebra.rings import cyclic_product_ring
from cayley_learn.core.errors import ConfigError, DomainError, RecordParseError, ShapeError
from cayley_learn.core.storage import MANIFEST_PREFIX
from cayley_learn.datasets.builders import (
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
    resolve_corpus,
)
from cayley_learn.datasets.io import dataset_hash, read_dataset, read_manifest, write_dataset
from cayley_learn.datasets.oracles import cayley_label, oracle_verdict, verify_labels
from cayley_learn.datasets.records import concat, pad, shift_entries, split, split_sized

LOOP = [1, 2, 3, 4, 5, 2, 1, 4, 5, 3, 3, 4, 5, 1, 2, 4, 5, 2, 3, 1, 5, 3, 1, 2, 4]


class RecordTests(unittest.TestCase):
    def test_pad_places_table_top_left(self) -> None:
        np.testing.assert_array_equal(pad([[1, 2], [2, 1]], 3), [[1, 2, 0], [2, 1, 0], [0, 0, 0]])
        with self.assertRaises(ShapeError):
            pad(np.ones((4, 4)), 3)

    def test_shift_keeps_padding_zero(self) -> None:
        shifted = shift_entries(pad([[1, 2], [2, 1]], 3), 2)
        np.testing.assert_array_equal(shifted, [[3, 4, 0], [4, 3, 0], [0, 0, 0]])
        with self.assertRaises(DomainError):
            shift_entries([[1]], -1)

    def test_split_sizes_round_half_up(self) -> None:
        dataset = build_cayley_vs_latin(n=5, k_perms=2, num_latin=6, seed=1)
        self.assertEqual(len(dataset), 10)
        train, valid = split(dataset, 0.25, seed=3)
        self.assertEqual((len(train), len(valid)), (3, 7))
        self.assertEqual({r.id for r in train} | {r.id for r in valid}, set(range(10)))
        self.assertEqual([r.id for r in split(dataset, 0.25, seed=3)[0]], [r.id for r in train])
        self.assertEqual(len(split(dataset, 1.0, seed=0)[1]), 0)
        with self.assertRaises(DomainError):
            split(dataset, 0.0, seed=0)
        with self.assertRaises(DomainError):
            split_sized(dataset, 11, seed=0)

    def test_concat_renumbers(self) -> None:
        dataset = build_cayley_vs_latin(n=5, k_perms=2, num_latin=2, seed=1)
        joined = concat([dataset, dataset])
        self.assertEqual([r.id for r in joined], list(range(12)))


class BuilderTests(unittest.TestCase):
    def test_cayley_vs_latin_is_deterministic_and_correct(self) -> None:
        first = build_cayley_vs_latin(n=6, k_perms=2, num_latin=8, seed=5)
        second = build_cayley_vs_latin(n=6, k_perms=2, num_latin=8, seed=5)
        self.assertEqual(first.label_counts(), {0: 8, 1: 8})
        self.assertEqual(first.corpus, ["C6", "D6"])
        self.assertEqual(dataset_hash(first), dataset_hash(second))
        self.assertNotEqual(dataset_hash(first), dataset_hash(build_cayley_vs_latin(n=6, k_perms=2, num_latin=8, seed=6)))
        for record in first:
            self.assertEqual(cayley_label(record), record.label)

    def test_small_orders_have_no_negatives(self) -> None:
        with self.assertRaises(DomainError):
            build_cayley_vs_latin(n=4, k_perms=2, num_latin=3, seed=0)
        only_positive = build_cayley_vs_latin(n=4, k_perms=2, num_latin=0, seed=0)
        self.assertEqual(only_positive.label_counts(), {0: 0, 1: 8})

    def test_unseen_groups_split(self) -> None:
        names = ["C8", "C4xC2", "D8", "Q8", "C2xC2xC2"]
        train, valid = build_unseen_group_split(n=8, S=[1, 2, 4], k_perms=2, num_latin=5, seed=1, names=names)
        self.assertEqual(train.corpus, ["C8", "C4xC2", "Q8"])
        self.assertEqual(valid.corpus, ["D8", "C2xC2xC2"])
        self.assertEqual(train.label_counts(), {0: 5, 1: 12})
        self.assertEqual(valid.label_counts(), {0: 0, 1: 8})
        self.assertEqual((train.part, valid.part), ("train", "valid"))
        with self.assertRaises(DomainError):
            build_unseen_group_split(n=8, S=[1, 2, 3, 4, 5], k_perms=2, num_latin=5, seed=1, names=names)
        with self.assertRaises(DomainError):
            build_unseen_group_split(n=8, S=[0, 2], k_perms=2, num_latin=5, seed=1, names=names)

    def test_entry_shift_deltas_count_permutations(self) -> None:
        dataset = build_entry_shift(n=5, perms_per_group=3, num_negative=3, seed=2)
        self.assertEqual(dataset.label_counts(), {0: 3, 1: 3})
        for record in dataset:
            self.assertIn(record.meta.delta, (1, 2, 3))
            self.assertEqual(int(record.x.min()), record.meta.delta + 1)
        self.assertTrue(verify_labels(dataset, sample_rate=1.0).ok)

    def test_simplicity_labels(self) -> None:
        dataset = build_simplicity(catalog(6), perms_simple=2, perms_nonsimple=1, seed=0)
        self.assertEqual(dataset.config["simple"], ["C2", "C3", "C5"])
        self.assertEqual(dataset.label_counts(), {0: 5, 1: 12})
        self.assertEqual(dataset.n_max, 6)
        self.assertTrue(verify_labels(dataset, sample_rate=1.0).ok)
        with self.assertRaises(DomainError):
            build_simplicity([cyclic_group(4), cyclic_group(6)], 2, 1, seed=0)

    def test_subgroup_classes(self) -> None:
        dataset = build_subgroup_classes(catalog(8), thresholds=(3, 6), perms=1, seed=0)
        counts = dataset.config["counts"]
        self.assertEqual((counts["D6"], counts["Q8"], counts["C2xC2xC2"]), (6, 6, 16))
        self.assertEqual(dataset.K, 2)
        labels = {r.meta.source: r.label for r in dataset}
        self.assertEqual((labels["C1"], labels["C4"], labels["D8"]), (0, 1, 2))
        self.assertTrue(verify_labels(dataset, sample_rate=1.0).ok)
        with self.assertRaises(DomainError):
            build_subgroup_classes(catalog(4), thresholds=(5, 5))

    def test_group_iso_pairs(self) -> None:
        S1 = [named_group("C4"), named_group("C2xC2")]
        S2 = [named_group("C6"), named_group("D6")]
        train, valid = build_group_iso_pairs(S1, S2, pairs_per_class=3, seed=4)
        self.assertEqual(train.label_counts(), {0: 3, 1: 3})
        self.assertEqual(valid.corpus, ["C6", "D6"])
        self.assertEqual(train.n_max, 6)
        self.assertTrue(verify_labels(train, sample_rate=1.0).ok)
        self.assertTrue(verify_labels(valid, sample_rate=1.0).ok)
        deltas: dict[str, list[int]] = {}
        for record in sorted(train, key=lambda r: r.meta.perm_id):
            for name, delta in zip(record.meta.source.split("|"), record.meta.extra["deltas"]):
                deltas.setdefault(name, []).append(delta)
        for seen in deltas.values():
            self.assertEqual(seen, list(range(1, len(seen) + 1)))
        with self.assertRaises(DomainError):
            build_group_iso_pairs(S1, [named_group("C4"), named_group("C6")], pairs_per_class=1, seed=0)
        with self.assertRaises(DomainError):
            build_group_iso_pairs(S1[:1], S2, pairs_per_class=1, seed=0)
        with self.assertRaisesRegex(DomainError, "S3 ~ D6"):
            build_group_iso_pairs(S1, [named_group("D6"), named_group("S3")], pairs_per_class=1, seed=0)
        with self.assertRaisesRegex(DomainError, "non-isomorphic"):
            build_group_iso_pairs(S2, [named_group("C2xC3"), named_group("S3")], pairs_per_class=1, seed=0)

    def test_ring_match_is_balanced_and_verified(self) -> None:
        dataset = build_ring_match([cyclic_product_ring([2, 3])], k_correct=4, k_incorrect=4, seed=7)
        self.assertEqual(dataset.label_counts(), {0: 4, 1: 4})
        self.assertTrue(dataset.pair)
        self.assertTrue(verify_labels(dataset, sample_rate=1.0).ok)
        with self.assertRaises(DomainError):
            build_ring_match([cyclic_product_ring([2, 3])], k_correct=1, k_incorrect=2, seed=7)

    def test_ring_partitions(self) -> None:
        dataset = build_ring_partitions(N=3, k_correct=2, k_incorrect=1, seed=1)
        self.assertEqual(dataset.corpus, ["Z8", "Z4xZ2", "Z2xZ2xZ2"])
        self.assertEqual(len(dataset), 9)
        self.assertEqual(dataset.builder, "ring-partitions")

    def test_ring_collection_pads_to_N(self) -> None:
        train, valid = build_ring_collection(N=5, F=2, k_correct=8, k_incorrect=2, seed=1)
        self.assertEqual(train.corpus, ["Z2", "Z3"])
        self.assertEqual(valid.corpus, ["Z2xZ2", "Z5"])
        self.assertEqual((train.n_max, valid.n_max), (5, 5))
        self.assertTrue(verify_labels(valid, sample_rate=1.0).ok)
        for F in (1, 4):
            with self.assertRaises(DomainError):
                build_ring_collection(N=5, F=F, k_correct=8, k_incorrect=2, seed=1)

    def test_config_construction(self) -> None:
        dataset = build_from_config("cayley-vs-latin", {"n": 5, "k_perms": 2, "num_latin": 3, "seed": 1})
        self.assertEqual(len(dataset), 7)
        with self.assertRaises(ConfigError):
            build_from_config("nope", {})
        with self.assertRaises(ConfigError):
            build_from_config("cayley-vs-latin", {"n": 5})

    def test_resolve_corpus(self) -> None:
        names = [g.name for g in resolve_corpus({"catalog": 3, "names": ["C3", "S3"]})]
        self.assertEqual(names, ["C1", "C2", "C3", "S3"])
        with self.assertRaises(ConfigError):
            resolve_corpus({})

    def test_resolve_corpus_keeps_one_group_per_isomorphism_class(self) -> None:
        expected = [g.name for g in catalog(6)]
        names = [g.name for g in resolve_corpus({"catalog": 6, "names": ["S3", "C2xC3"]})]
        self.assertEqual(names, expected)
        self.assertNotIn("S3", names)
        self.assertIn("D6", names)

        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "extra.ndjson"
            lines = [
                {"n": 3, "table": cyclic_group(3).table.ravel().tolist(), "name": "renamed C3"},
                {"n": 8, "table": named_group("Q8").table.ravel().tolist()},
            ]
            path.write_text("".join(json.dumps(line) + "\n" for line in lines))
            corpus = resolve_corpus({"catalog": 6, "path": str(path)})
        self.assertEqual([g.name for g in corpus], expected + ["G8#2"])


class DatasetFileTests(unittest.TestCase):
    def test_written_hash_matches_in_memory_hash(self) -> None:
        dataset = build_entry_shift(n=5, perms_per_group=2, num_negative=2, seed=3)
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "shift.ndjson"
            digest = write_dataset(path, dataset)
            manifest = read_manifest(path)
            loaded = read_dataset(path)
        self.assertEqual(digest, dataset_hash(dataset))
        self.assertEqual(manifest.content_hash, digest)
        self.assertEqual(manifest.label_counts, {"0": 2, "1": 2})
        self.assertEqual(dataset_hash(loaded), digest)
        np.testing.assert_array_equal(loaded.labels, dataset.labels)
        self.assertEqual(loaded.builder, "entry-shift")

    def test_malformed_line_reports_its_number(self) -> None:
        dataset = build_cayley_vs_latin(n=5, k_perms=1, num_latin=1, seed=3)
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "bad.ndjson"
            write_dataset(path, dataset)
            lines = path.read_text().splitlines()
            self.assertTrue(lines[0].startswith(MANIFEST_PREFIX))
            lines.append(json.dumps({"id": 9, "x": [[1, 2], [2, 1]], "n": 3, "label": 0}))
            path.write_text("\n".join(lines) + "\n")
            with self.assertRaises(RecordParseError) as ctx:
                read_dataset(path)
        self.assertEqual(ctx.exception.line, 4)


class OracleVerdictTests(unittest.TestCase):
    def test_quadrangle_on_table_records(self) -> None:
        loop = oracle_verdict("quadrangle", {"n": 5, "table": LOOP})
        self.assertEqual(loop, {"latin": True, "verdict": False})
        c4 = oracle_verdict("quadrangle", {"n": 4, "table": cyclic_group(4).table.ravel().tolist()})
        self.assertTrue(c4["verdict"])

    def test_dataset_records_are_compared_with_labels(self) -> None:
        dataset = build_cayley_vs_latin(n=5, k_perms=1, num_latin=2, seed=8)
        for record in dataset:
            verdict = oracle_verdict("quadrangle", record.to_model().model_dump(mode="json"))
            self.assertTrue(verdict["agrees"])
            self.assertEqual(verdict["id"], record.id)

    def test_group_oracles(self) -> None:
        q8 = {"n": 8, "table": named_group("Q8").table.ravel().tolist()}
        self.assertEqual(oracle_verdict("subgroups", q8)["total"], 6)
        self.assertFalse(oracle_verdict("simple", q8)["verdict"])
        pair = {"first": {"n": 4, "table": named_group("C4").table.ravel().tolist()},
                "second": {"n": 4, "table": named_group("C2xC2").table.ravel().tolist()}}
        self.assertFalse(oracle_verdict("iso", pair)["verdict"])
        with self.assertRaises(DomainError):
            oracle_verdict("simple", {"n": 5, "table": LOOP})
        with self.assertRaises(DomainError):
            oracle_verdict("unknown", q8)

    def test_ring_records(self) -> None:
        ring = cyclic_product_ring([2, 2, 3])
        self.assertTrue(oracle_verdict("distrib", ring.to_record())["verdict"])


if __name__ == "__main__":
    unittest.main()
