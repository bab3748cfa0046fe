"""
Exact finite algebra: Cayley tables, Latin squares and product rings.
"""

from cayley_learn.algebra.groups import (
    abelian_group,
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
    RingTables,
    cyclic_product_ring,
    is_consistent_pair,
    is_distributive,
    is_ring,
    paired_permute,
    partition_ring,
    partitions,
    recover_pair,
    ring_isomorphism,
)
from cayley_learn.algebra.tables import GroupTable, LatinSquare, is_associative, is_latin_square

__all__ = [
    "GroupTable",
    "LatinSquare",
    "LatinSquareSampler",
    "RingTables",
    "abelian_group",
    "alternating_group",
    "are_isomorphic",
    "catalog",
    "cyclic_group",
    "cyclic_product_ring",
    "dicyclic_group",
    "dihedral_group",
    "direct_product",
    "element_orders",
    "enumerate_latin_squares",
    "export_tables",
    "groups_of_order",
    "import_tables",
    "is_associative",
    "is_consistent_pair",
    "is_distributive",
    "is_group_table",
    "is_latin_square",
    "is_normal",
    "is_reduced",
    "is_ring",
    "is_simple",
    "named_group",
    "normal_subgroups",
    "paired_permute",
    "partition_ring",
    "partitions",
    "permute",
    "quadrangle_criterion",
    "random_latin_square",
    "recover_pair",
    "reduce",
    "ring_isomorphism",
    "subgroup_counts",
    "subgroups",
    "symmetric_group",
]
