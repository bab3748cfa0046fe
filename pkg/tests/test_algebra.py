from collections import Counter
from pathlib import Path
from tempfile import TemporaryDirectory
import json
import unittest

import numpy as np
from scipy import stats

from cayley_learn.algebra.groups import (
    alternating_group,
    catalog,
    cyclic_group,
    dicyclic_group,
    dihedral_group,
    direct_product,
    export_tables,
    groups_of_order,
    import_tables,
    named_group,
    symmetric_group,
)
from cayley_learn.algebra.latin import (
    LatinSquareSampler,
    enumerate_latin_squares,
    is_reduced,
    permute,
    random_latin_square,
    reduce,
)
from cayley_learn.algebra.oracles import (
    are_isomorphic,
    element_orders,
    is_group_table,
    is_normal,
    is_simple,
    normal_subgroups,
    quadrangle_criterion,
    subgroup_counts,
    subgroups,
)
from cayley_learn.algebra.rings import (
    cyclic_product_ring,
    is_consistent_pair,
    is_distributive,
    is_ring,
    paired_permute,
    partitions,
    prime_factors,
    recover_pair,
    ring_for_order,
    ring_isomorphism,
)
from cayley_learn.algebra.tables import GroupTable, is_associative, is_latin_square
from cayley_learn.core.errors import (
    DomainError,
    InvalidOrderError,
    ResourceLimitError,
    ShapeError,
    TableImportError,
    TableValidationError,
)
from cayley_learn.datasets.records import pad

# A loop of order 5 (identity 1, 2*2 = 1) that no group is isotopic to
NON_GROUP_LOOP = [
    [1, 2, 3, 4, 5],
    [2, 1, 4, 5, 3],
    [3, 4, 5, 1, 2],
    [4, 5, 2, 3, 1],
    [5, 3, 1, 2, 4],
]


def _divisors(n: int) -> int:
    return sum(1 for d in range(1, n + 1) if n % d == 0)


def _is_homomorphism(G: GroupTable, H: GroupTable, phi: tuple[int, ...]) -> bool:
    images = np.asarray(phi) - 1
    return bool(np.array_equal(images[G.zero_based], H.zero_based[images[:, None], images[None, :]]))


class LatinSquareTests(unittest.TestCase):
    def test_enumeration_counts_small_orders(self) -> None:
        counts = [sum(1 for _ in enumerate_latin_squares(n)) for n in range(1, 5)]
        self.assertEqual(counts, [1, 2, 12, 576])

    def test_enumeration_refuses_large_orders(self) -> None:
        with self.assertRaises(ResourceLimitError):
            next(enumerate_latin_squares(6))

    def test_permute_reorders_rows_and_columns(self) -> None:
        square = cyclic_group(3).table
        swapped = permute(square, [2, 1, 3], [1, 2, 3]).square
        np.testing.assert_array_equal(swapped, [[2, 3, 1], [1, 2, 3], [3, 1, 2]])
        self.assertTrue(is_latin_square(swapped))

    def test_permute_rejects_bad_permutations(self) -> None:
        with self.assertRaises(ShapeError):
            permute(cyclic_group(3).table, [1, 2], [1, 2, 3])
        with self.assertRaises(DomainError):
            permute(cyclic_group(3).table, [1, 1, 3], [1, 2, 3])

    def test_reduce_puts_identity_sequence_first(self) -> None:
        rng = np.random.default_rng(4)
        for _ in range(10):
            square = permute(dihedral_group(8).table, rng.permutation(8) + 1, rng.permutation(8) + 1)
            reduced = reduce(square)
            self.assertTrue(is_reduced(reduced))
            self.assertTrue(is_latin_square(reduced.square))

    def test_sampler_is_deterministic_and_latin(self) -> None:
        first = LatinSquareSampler(7, seed=11).sample(5)
        second = LatinSquareSampler(7, seed=11).sample(5)
        self.assertEqual(first, second)
        for square in first:
            self.assertTrue(is_latin_square(square.square))
        self.assertEqual(random_latin_square(6, seed=3), random_latin_square(6, seed=3))

    def test_sampler_order_one(self) -> None:
        self.assertEqual(random_latin_square(1, seed=0).to_list(), [[1]])

    def test_sampler_rejects_order_zero(self) -> None:
        with self.assertRaises(InvalidOrderError):
            LatinSquareSampler(0, seed=0)

    def test_sampler_is_uniform_over_order_three(self) -> None:
        squares = {sq.tobytes(): i for i, sq in enumerate(enumerate_latin_squares(3))}
        draws = Counter(
            squares[LatinSquareSampler(3, seed=s, burn_in=200).next().square.astype(np.int64).tobytes()]
            for s in range(600)
        )
        observed = [draws.get(i, 0) for i in range(len(squares))]
        self.assertEqual(len(squares), 12)
        self.assertGreater(stats.chisquare(observed).pvalue, 1e-3)


class GroupTableTests(unittest.TestCase):
    def test_catalog_counts_orders_up_to_fifteen(self) -> None:
        counts = [len(groups_of_order(n)) for n in range(1, 16)]
        self.assertEqual(counts, [1, 1, 1, 2, 1, 2, 1, 5, 2, 2, 1, 5, 1, 2, 1])

    def test_catalog_groups_are_pairwise_non_isomorphic(self) -> None:
        for n in (8, 12):
            groups = groups_of_order(n)
            for i, G in enumerate(groups):
                for H in groups[i + 1:]:
                    self.assertIsNone(are_isomorphic(G, H), f"{G.name} ~ {H.name}")

    def test_order_eight_names(self) -> None:
        names = {g.name for g in groups_of_order(8)}
        self.assertEqual(names, {"C8", "C4xC2", "C2xC2xC2", "D8", "Q8"})

    def test_constructors_satisfy_group_axioms(self) -> None:
        for G in (
            cyclic_group(9),
            dihedral_group(10),
            dicyclic_group(12),
            alternating_group(4),
            symmetric_group(4),
            direct_product(cyclic_group(2), dihedral_group(6)),
        ):
            GroupTable.from_array(G.table, name=G.name)
            self.assertTrue(is_group_table(G.table))

    def test_named_group_products(self) -> None:
        G = named_group("C4xC2")
        self.assertEqual((G.n, G.name), (8, "C4xC2"))
        self.assertEqual(named_group("A5").n, 60)
        with self.assertRaises(DomainError):
            named_group("X9")
        with self.assertRaises(DomainError):
            named_group("Q12")

    def test_from_array_rejects_non_groups(self) -> None:
        with self.assertRaises(TableValidationError):
            GroupTable.from_array(NON_GROUP_LOOP)
        with self.assertRaises(TableValidationError):
            GroupTable.from_array([[2, 1], [1, 2]])

    def test_import_relabels_identity_and_reports_bad_lines(self) -> None:
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "groups.ndjson"
            path.write_text(json.dumps({"n": 2, "table": [2, 1, 1, 2], "name": "flipped"}) + "\n")
            (imported,) = import_tables(path)
            np.testing.assert_array_equal(imported.table, [[1, 2], [2, 1]])

            lines = [
                {"n": 3, "table": cyclic_group(3).table.ravel().tolist()},
                {"n": 5, "table": np.ravel(NON_GROUP_LOOP).tolist()},
                {"n": 2, "table": [1, 1, 2, 2]},
            ]
            path.write_text("".join(json.dumps(line) + "\n" for line in lines))
            with self.assertRaises(TableImportError) as ctx:
                import_tables(path)
            self.assertEqual([p.line for p in ctx.exception.problems], [2, 3])

    def test_import_lists_malformed_lines_and_keeps_reading(self) -> None:
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "mixed.ndjson"
            c3 = json.dumps({"n": 3, "table": cyclic_group(3).table.ravel().tolist()})
            path.write_text("\n".join([c3, '{"n": 3, "table": ', "[1, 2]", c3, '{"n": 2, "table": [1, 1, 2, 2]}']) + "\n")
            with self.assertRaises(TableImportError) as ctx:
                import_tables(path)
        problems = ctx.exception.problems
        self.assertEqual([p.line for p in problems], [2, 3, 5])
        self.assertTrue(problems[0].message.startswith("invalid JSON"))
        self.assertEqual(problems[1].message, "record is not a JSON object")

    def test_export_then_import_keeps_tables(self) -> None:
        groups = groups_of_order(12)
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "order12.ndjson"
            export_tables(path, groups)
            loaded = import_tables(path)
        self.assertEqual([g.name for g in loaded], [g.name for g in groups])
        self.assertTrue(all(a.same_table(b) for a, b in zip(loaded, groups)))


class GroupOracleTests(unittest.TestCase):
    def test_quadrangle_agrees_with_group_check_on_small_orders(self) -> None:
        for n in range(1, 5):
            for square in enumerate_latin_squares(n):
                self.assertEqual(quadrangle_criterion(square), is_group_table(square))

    def test_quadrangle_agrees_on_random_squares(self) -> None:
        for n in (5, 6):
            for square in LatinSquareSampler(n, seed=n).sample(30):
                self.assertEqual(quadrangle_criterion(square), is_group_table(square))

    def test_known_loop_is_not_a_group_isotope(self) -> None:
        self.assertTrue(is_latin_square(NON_GROUP_LOOP))
        self.assertFalse(is_associative(NON_GROUP_LOOP))
        self.assertFalse(quadrangle_criterion(NON_GROUP_LOOP))
        self.assertFalse(is_group_table(NON_GROUP_LOOP))

    def test_permuted_group_tables_pass(self) -> None:
        rng = np.random.default_rng(1)
        G = dicyclic_group(12)
        square = permute(G.table, rng.permutation(12) + 1, rng.permutation(12) + 1)
        self.assertTrue(quadrangle_criterion(square))
        self.assertTrue(is_group_table(square))

    def test_quadrangle_needs_a_latin_square(self) -> None:
        with self.assertRaises(DomainError):
            quadrangle_criterion([[1, 1], [2, 2]])

    def test_cyclic_subgroups_match_divisors(self) -> None:
        for n in range(1, 41):
            self.assertEqual(subgroup_counts(cyclic_group(n)).total, _divisors(n), f"C{n}")

    def test_known_subgroup_counts(self) -> None:
        expected = {"C2xC2": 5, "D6": 6, "Q8": 6, "D8": 10, "A4": 10}
        for name, total in expected.items():
            self.assertEqual(subgroup_counts(named_group(name)).total, total, name)
        self.assertEqual(subgroup_counts(named_group("Q8")).iso_classes, 4)

    def test_subgroup_orders_divide_group_order(self) -> None:
        for G in catalog(12):
            for sub in subgroups(G):
                self.assertEqual(G.n % sub.order, 0)

    def test_element_orders_of_quaternions(self) -> None:
        orders = sorted(element_orders(dicyclic_group(8)).tolist())
        self.assertEqual(orders, [1, 2, 4, 4, 4, 4, 4, 4])

    def test_simplicity(self) -> None:
        for G in (cyclic_group(2), cyclic_group(5), alternating_group(5)):
            self.assertTrue(is_simple(G), G.name)
        for G in (cyclic_group(1), cyclic_group(4), cyclic_group(6), alternating_group(4), symmetric_group(4)):
            self.assertFalse(is_simple(G), G.name)

    def test_normal_subgroups_of_s3(self) -> None:
        S3 = symmetric_group(3)
        self.assertEqual(sorted(sub.order for sub in normal_subgroups(S3)), [1, 3, 6])
        non_normal = [sub for sub in subgroups(S3) if sub.order == 2]
        self.assertTrue(all(not is_normal(S3, sub) for sub in non_normal))

    def test_isomorphism_search(self) -> None:
        self.assertIsNone(are_isomorphic(named_group("Q8"), named_group("D8")))
        self.assertIsNone(are_isomorphic(named_group("Dic12"), named_group("D12")))
        G, H = named_group("C4xC2"), named_group("C2xC4")
        phi = are_isomorphic(G, H)
        self.assertIsNotNone(phi)
        self.assertTrue(_is_homomorphism(G, H, phi))
        S3, D6 = symmetric_group(3), dihedral_group(6)
        phi = are_isomorphic(S3, D6)
        self.assertTrue(_is_homomorphism(S3, D6, phi))

    def test_isomorphic_to_a_relabelled_copy(self) -> None:
        G = alternating_group(4)
        relabel = np.array([1, 5, 3, 12, 2, 7, 4, 9, 6, 11, 8, 10])
        table = np.empty_like(G.table)
        table[np.ix_(relabel - 1, relabel - 1)] = relabel[G.table - 1]
        H = GroupTable.from_array(table, name="A4'")
        phi = are_isomorphic(G, H)
        self.assertIsNotNone(phi)
        self.assertTrue(_is_homomorphism(G, H, phi))


class RingTests(unittest.TestCase):
    def test_z2_by_z3_tables(self) -> None:
        R = cyclic_product_ring([2, 3])
        self.assertEqual(R.name, "Z2xZ3")
        np.testing.assert_array_equal(
            R.mult,
            [
                [1, 1, 1, 1, 1, 1],
                [1, 2, 3, 1, 2, 3],
                [1, 3, 2, 1, 3, 2],
                [1, 1, 1, 4, 4, 4],
                [1, 2, 3, 4, 5, 6],
                [1, 3, 2, 4, 6, 5],
            ],
        )
        np.testing.assert_array_equal(
            R.add,
            [
                [1, 2, 3, 4, 5, 6],
                [2, 3, 1, 5, 6, 4],
                [3, 1, 2, 6, 4, 5],
                [4, 5, 6, 1, 2, 3],
                [5, 6, 4, 2, 3, 1],
                [6, 4, 5, 3, 1, 2],
            ],
        )

    def test_product_rings_are_rings(self) -> None:
        for moduli in ([4], [2, 3], [2, 2, 2], [8, 8], [4, 4, 4]):
            R = cyclic_product_ring(moduli)
            self.assertTrue(is_distributive(R.mult, R.add), R.name)
            self.assertTrue(is_ring(R.mult, R.add), R.name)
            self.assertTrue(is_latin_square(R.add))
            self.assertFalse(is_latin_square(R.mult))

    def test_ring_bounds(self) -> None:
        with self.assertRaises(InvalidOrderError):
            cyclic_product_ring([])
        with self.assertRaises(ResourceLimitError):
            cyclic_product_ring([16, 16, 2], bound=256)

    def test_partitions_and_factors(self) -> None:
        self.assertEqual(partitions(4), [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)])
        self.assertEqual(len(partitions(6)), 11)
        self.assertEqual(prime_factors(12), [2, 2, 3])
        self.assertEqual(prime_factors(13), [13])
        self.assertEqual(ring_for_order(12).moduli, (2, 2, 3))

    def test_joint_permutation_is_recovered(self) -> None:
        R = cyclic_product_ring([2, 2, 3])
        rng = np.random.default_rng(5)
        for _ in range(5):
            mult, add = paired_permute(R, rng.permutation(12) + 1, rng.permutation(12) + 1)
            self.assertTrue(is_consistent_pair(mult, add))
            recovered = recover_pair(mult, add)
            self.assertTrue(is_ring(*recovered))
            self.assertTrue(is_consistent_pair(pad(mult, 15), pad(add, 15)))

    def test_mismatched_permutations_are_inconsistent(self) -> None:
        R = cyclic_product_ring([2, 3])
        mult, _ = paired_permute(R, [2, 1, 3, 4, 5, 6], [1, 2, 3, 4, 5, 6])
        self.assertFalse(is_consistent_pair(mult, R.add))

    def test_ring_isomorphism(self) -> None:
        self.assertIsNotNone(ring_isomorphism(cyclic_product_ring([6]), cyclic_product_ring([2, 3])))
        self.assertIsNone(ring_isomorphism(cyclic_product_ring([4]), cyclic_product_ring([2, 2])))


if __name__ == "__main__":
    unittest.main()
