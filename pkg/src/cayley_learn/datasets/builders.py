"""
Dataset builders for every experiment.

All builders are deterministic functions of their arguments and ``seed``.
Random streams are derived from ``(seed, stream tag, source index)`` so each
source's records do not depend on how many records other sources produced.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np

from cayley_learn.algebra.groups import catalog, groups_of_order, import_tables, named_group, unique_up_to_isomorphism
from cayley_learn.algebra.latin import LatinSquareSampler
from cayley_learn.algebra.oracles import is_group_table, is_simple, subgroup_counts
from cayley_learn.algebra.rings import (
    RingTables,
    cyclic_product_ring,
    is_consistent_pair,
    partition_ring,
    partitions,
    ring_for_order,
)
from cayley_learn.algebra.tables import GroupTable, LatinSquare
from cayley_learn.core.errors import ConfigError, DomainError
from cayley_learn.datasets.records import Dataset, Record, RecordMeta, TableView

logger = logging.getLogger(__name__)

# Stream tags for np.random.default_rng([seed, tag, index])
_PERMS = 1
_NEGATIVE_PERMS = 2
_PAIRS = 3
_SHUFFLE = 9

MAX_MISMATCH_REDRAWS = 100


def _rng(seed: int, tag: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, tag, index])


def _grid_views(base: np.ndarray, k: int, rng: np.random.Generator) -> list[tuple[int, TableView]]:
    """k row permutations x k column permutations: all k^2 combinations."""
    n = base.shape[0]
    rows = [rng.permutation(n) for _ in range(k)]
    cols = [rng.permutation(n) for _ in range(k)]
    return [(a * k + b, TableView(base, rows[a], cols[b])) for a in range(k) for b in range(k)]


def _finish(
    records: list[Record],
    *,
    seed: int,
    n_max: int,
    K: int,
    task: str,
    builder: str,
    config: dict[str, Any],
    corpus: list[str],
    part: str = "all",
    shuffle: bool = True,
) -> Dataset:
    if shuffle:
        order = _rng(seed, _SHUFFLE).permutation(len(records))
        records = [records[i] for i in order]
    dataset = Dataset(
        records=[r.with_id(i) for i, r in enumerate(records)],
        n_max=n_max,
        K=K,
        task=task,
        builder=builder,
        config=config,
        corpus=corpus,
        part=part,
    )
    logger.info(f"{builder} ({part}): {dataset.describe()}")
    return dataset


def _latin_negatives(n: int, count: int, seed: int) -> list[LatinSquare]:
    """Random Latin squares of order n that are not isotopic to any group."""
    if count == 0:
        return []
    if n <= 4:
        raise DomainError(f"every Latin square of order {n} is isotopic to a group; negatives need n >= 5")
    sampler = LatinSquareSampler(n, seed)
    squares: list[LatinSquare] = []
    resampled = 0
    while len(squares) < count:
        square = sampler.next()
        if is_group_table(square):
            resampled += 1
            continue
        squares.append(square)
    if resampled:
        logger.warning(f"Resampled {resampled} random Latin square(s) of order {n} that were group tables")
    return squares


def _negative_records(squares: list[LatinSquare], seed: int) -> list[Record]:
    return [
        Record(
            id=0,
            views=(TableView(sq.square),),
            label=0,
            meta=RecordMeta(source="latin", seed=seed, perm_id=i),
        )
        for i, sq in enumerate(squares)
    ]


def _group_positive_records(groups: list[tuple[int, GroupTable]], k_perms: int, seed: int, label: int = 1) -> list[Record]:
    records = []
    for index, group in groups:
        for perm_id, view in _grid_views(group.table, k_perms, _rng(seed, _PERMS, index)):
            records.append(
                Record(id=0, views=(view,), label=label, meta=RecordMeta(source=group.name, seed=seed, perm_id=perm_id))
            )
    return records


# ---------------------------------------------------------------------------
# Cayley tables vs Latin squares
# ---------------------------------------------------------------------------


def build_cayley_vs_latin(
    n: int, k_perms: int, num_latin: int, seed: int, groups: Sequence[GroupTable] | None = None
) -> Dataset:
    """
    Random Latin squares (label 0) against permuted Cayley tables (label 1).

    Every group of order n contributes k_perms^2 row/column permutations.

    Raises:
        DomainError: if no group of order n is available or n <= 4
    """
    groups = list(groups) if groups is not None else groups_of_order(n)
    if not groups:
        raise DomainError(f"no groups of order {n} in the catalog")
    records = _negative_records(_latin_negatives(n, num_latin, seed), seed)
    records += _group_positive_records(list(enumerate(groups)), k_perms, seed)
    config = {"n": n, "k_perms": k_perms, "num_latin": num_latin, "seed": seed}
    return _finish(
        records,
        seed=seed,
        n_max=n,
        K=1,
        task="cayley",
        builder="cayley-vs-latin",
        config=config,
        corpus=[g.name for g in groups],
    )


def _ordered_groups(n: int, names: Sequence[str] | None) -> list[GroupTable]:
    available = groups_of_order(n)
    if not names:
        return available
    by_name = {g.name: g for g in available}
    missing = [name for name in names if name not in by_name]
    if missing:
        raise DomainError(f"groups not in the order-{n} catalog: {missing}; available: {sorted(by_name)}")
    return [by_name[name] for name in names]


def build_unseen_group_split(
    n: int,
    S: Sequence[int],
    k_perms: int,
    num_latin: int,
    seed: int,
    names: Sequence[str] | None = None,
) -> tuple[Dataset, Dataset]:
    """
    Train on groups indexed by S (1-based), validate on the other groups.

    Training holds Latin negatives plus permuted tables of the groups in S;
    validation holds only permuted tables of the complement, all labelled 1.

    Args:
        names: Order in which S indexes the groups (default: catalog order)

    Raises:
        DomainError: if S is empty, covers every group, or is out of range
    """
    groups = _ordered_groups(n, names)
    chosen = sorted(set(S))
    if not chosen or len(chosen) >= len(groups):
        raise DomainError(f"S must be a proper nonempty subset of 1..{len(groups)}, got {list(S)}")
    if chosen[0] < 1 or chosen[-1] > len(groups):
        raise DomainError(f"S indices must lie in 1..{len(groups)}, got {list(S)}")

    seen = [(i - 1, groups[i - 1]) for i in chosen]
    unseen = [(i, g) for i, g in enumerate(groups) if i + 1 not in chosen]
    config = {
        "n": n,
        "S": chosen,
        "k_perms": k_perms,
        "num_latin": num_latin,
        "seed": seed,
        "names": [g.name for g in groups],
    }
    negatives = _negative_records(_latin_negatives(n, num_latin, seed), seed)
    train = _finish(
        negatives + _group_positive_records(seen, k_perms, seed),
        seed=seed,
        n_max=n,
        K=1,
        task="cayley",
        builder="unseen-groups",
        config=config,
        corpus=[g.name for _, g in seen],
        part="train",
    )
    valid = _finish(
        _group_positive_records(unseen, k_perms, seed),
        seed=seed,
        n_max=n,
        K=1,
        task="cayley",
        builder="unseen-groups",
        config=config,
        corpus=[g.name for _, g in unseen],
        part="valid",
    )
    return train, valid


def build_entry_shift(
    n: int, perms_per_group: int, num_negative: int, seed: int, groups: Sequence[GroupTable] | None = None
) -> Dataset:
    """
    Permuted tables whose entries are shifted once more for every permutation.

    Each group of order n gets ``perms_per_group`` random row/column
    permutations (label 1); one fixed non-group Latin square gets
    ``num_negative`` (label 0). The k-th permutation of a source, counting
    from 1, is shifted by delta = k.
    """
    groups = list(groups) if groups is not None else groups_of_order(n)
    if not groups:
        raise DomainError(f"no groups of order {n} in the catalog")
    fixed = _latin_negatives(n, 1, seed)[0] if num_negative else None

    sources: list[tuple[str, np.ndarray, int, int, int]] = [
        (g.name, g.table, 1, perms_per_group, i) for i, g in enumerate(groups)
    ]
    if fixed is not None:
        sources.append(("latin", fixed.square, 0, num_negative, len(groups)))

    records = []
    for name, base, label, count, index in sources:
        rng = _rng(seed, _PERMS, index)
        size = base.shape[0]
        for k in range(1, count + 1):
            view = TableView(base, rng.permutation(size), rng.permutation(size), delta=k)
            records.append(
                Record(id=0, views=(view,), label=label, meta=RecordMeta(source=name, seed=seed, delta=k, perm_id=k))
            )
    config = {"n": n, "perms_per_group": perms_per_group, "num_negative": num_negative, "seed": seed}
    return _finish(
        records,
        seed=seed,
        n_max=n,
        K=1,
        task="cayley",
        builder="entry-shift",
        config=config,
        corpus=[g.name for g in groups] + (["latin"] if fixed is not None else []),
    )


# ---------------------------------------------------------------------------
# Group properties
# ---------------------------------------------------------------------------


def build_simplicity(corpus: Sequence[GroupTable], perms_simple: int, perms_nonsimple: int, seed: int) -> Dataset:
    """
    Permuted Cayley tables labelled 1 for simple groups, 0 otherwise.

    Simple groups get perms_simple^2 permutations and the rest
    perms_nonsimple^2, which oversamples the minority class.

    Raises:
        DomainError: if the corpus lacks either class
    """
    corpus = list(corpus)
    labels = {g.name: int(is_simple(g)) for g in corpus}
    if len(set(labels.values())) < 2:
        raise DomainError("simplicity corpus needs at least one simple and one non-simple group")
    records = []
    for index, group in enumerate(corpus):
        label = labels[group.name]
        k = perms_simple if label else perms_nonsimple
        records += _group_positive_records([(index, group)], k, seed, label=label)
    config = {
        "perms_simple": perms_simple,
        "perms_nonsimple": perms_nonsimple,
        "seed": seed,
        "simple": sorted(name for name, lab in labels.items() if lab),
    }
    return _finish(
        records,
        seed=seed,
        n_max=max(g.n for g in corpus),
        K=1,
        task="simplicity",
        builder="simplicity",
        config=config,
        corpus=[g.name for g in corpus],
    )


def subgroup_class(count: int, thresholds: tuple[int, int]) -> int:
    t1, t2 = thresholds
    if count < t1:
        return 0
    if count < t2:
        return 1
    return 2


def build_subgroup_classes(
    corpus: Sequence[GroupTable],
    thresholds: tuple[int, int] = (30, 100),
    perms: int = 5,
    count_kind: str = "total",
    seed: int = 0,
) -> Dataset:
    """
    Three-class labels from the number of subgroups.

    Label 0 below t1, 1 in [t1, t2), 2 from t2 on. ``count_kind`` selects
    total subgroups or isomorphism classes of subgroups.

    Raises:
        DomainError: for an empty corpus or t1 >= t2
    """
    corpus = list(corpus)
    if not corpus:
        raise DomainError("subgroup corpus is empty")
    t1, t2 = thresholds
    if t1 >= t2:
        raise DomainError(f"thresholds must satisfy t1 < t2, got {thresholds}")
    counts = {g.name: subgroup_counts(g).get(count_kind) for g in corpus}
    records = []
    for index, group in enumerate(corpus):
        label = subgroup_class(counts[group.name], (t1, t2))
        records += _group_positive_records([(index, group)], perms, seed, label=label)
    distribution = {str(k): 0 for k in range(3)}
    for count in counts.values():
        distribution[str(subgroup_class(count, (t1, t2)))] += 1
    config = {
        "thresholds": [t1, t2],
        "perms": perms,
        "count_kind": count_kind,
        "seed": seed,
        "counts": counts,
        "groups_per_label": distribution,
    }
    return _finish(
        records,
        seed=seed,
        n_max=max(g.n for g in corpus),
        K=2,
        task="subgroups",
        builder="subgroup-classes",
        config=config,
        corpus=[g.name for g in corpus],
    )


def _iso_side(groups: list[GroupTable], pairs_per_class: int, seed: int, index: int, part: str) -> list[Record]:
    rng = _rng(seed, _PAIRS, index)
    counters = [0] * len(groups)

    def fresh(gi: int) -> TableView:
        counters[gi] += 1
        g = groups[gi]
        return TableView(g.table, rng.permutation(g.n), rng.permutation(g.n), delta=counters[gi])

    records = []
    for label in (1, 0):
        for _ in range(pairs_per_class):
            if label:
                gi = gj = int(rng.integers(len(groups)))
            else:
                gi, gj = (int(v) for v in rng.choice(len(groups), size=2, replace=False))
            first, second = fresh(gi), fresh(gj)
            meta = RecordMeta(
                source=f"{groups[gi].name}|{groups[gj].name}",
                seed=seed,
                delta=first.delta,
                perm_id=len(records),
                extra={"deltas": [first.delta, second.delta], "part": part},
            )
            records.append(Record(id=0, views=(first, second), label=label, meta=meta))
    return records


def build_group_iso_pairs(
    S1: Sequence[GroupTable], S2: Sequence[GroupTable], pairs_per_class: int, seed: int
) -> tuple[Dataset, Dataset]:
    """
    Pairs of permuted, entry-shifted tables labelled 1 iff the groups agree.

    Training pairs come from S1 only and validation pairs from S2 only; each
    side has ``pairs_per_class`` records of each label. Every permuted table
    of a group is shifted one further than the previous one. Distinct groups
    give label 0, so the groups must be pairwise non-isomorphic.

    Raises:
        DomainError: if a side has fewer than two groups, the groups of a side
            differ in order, or two groups (on one side or across sides) are
            isomorphic
    """
    S1, S2 = list(S1), list(S2)
    for side_name, side in (("S1", S1), ("S2", S2)):
        if len(side) < 2:
            raise DomainError(f"{side_name} needs at least two groups to form negative pairs")
        if len({g.n for g in side}) != 1:
            raise DomainError(f"groups of {side_name} must share one order")
    _, dropped = unique_up_to_isomorphism(S1 + S2)
    if dropped:
        clashes = ", ".join(f"{a.name} ~ {b.name}" for a, b in dropped)
        raise DomainError(f"S1 and S2 must hold pairwise non-isomorphic groups: {clashes}")

    config = {
        "S1": [g.name for g in S1],
        "S2": [g.name for g in S2],
        "pairs_per_class": pairs_per_class,
        "seed": seed,
    }
    n_max = max(g.n for g in S1 + S2)
    train = _finish(
        _iso_side(S1, pairs_per_class, seed, 0, "train"),
        seed=seed,
        n_max=n_max,
        K=1,
        task="group-iso",
        builder="group-iso-pairs",
        config=config,
        corpus=config["S1"],
        part="train",
    )
    valid = _finish(
        _iso_side(S2, pairs_per_class, seed, 1, "valid"),
        seed=seed,
        n_max=n_max,
        K=1,
        task="group-iso",
        builder="group-iso-pairs",
        config=config,
        corpus=config["S2"],
        part="valid",
    )
    return train, valid


# ---------------------------------------------------------------------------
# Rings
# ---------------------------------------------------------------------------


def _ring_records(ring: RingTables, k_correct: int, k_incorrect: int, seed: int, index: int) -> list[Record]:
    if k_incorrect and k_correct < 2:
        raise DomainError(f"{ring.name}: mismatched pairs need at least two correct variants")
    rng = _rng(seed, _PERMS, index)
    pool = [(rng.permutation(ring.n), rng.permutation(ring.n)) for _ in range(k_correct)]
    records = []
    for j, (rows, cols) in enumerate(pool):
        views = (TableView(ring.mult, rows, cols), TableView(ring.add, rows, cols))
        records.append(Record(id=0, views=views, label=1, meta=RecordMeta(source=ring.name, seed=seed, perm_id=j)))

    mismatch_rng = _rng(seed, _NEGATIVE_PERMS, index)
    for m in range(k_incorrect):
        for _ in range(MAX_MISMATCH_REDRAWS):
            j, j2 = (int(v) for v in mismatch_rng.choice(len(pool), size=2, replace=False))
            views = (TableView(ring.mult, *pool[j]), TableView(ring.add, *pool[j2]))
            if not is_consistent_pair(views[0].materialize(), views[1].materialize()):
                break
        else:
            raise DomainError(f"{ring.name}: could not draw an inconsistent mismatched pair")
        meta = RecordMeta(source=ring.name, seed=seed, perm_id=m, extra={"mult_variant": j, "add_variant": j2})
        records.append(Record(id=0, views=views, label=0, meta=meta))
    return records


def build_ring_match(
    rings: Sequence[RingTables],
    k_correct: int,
    k_incorrect: int,
    seed: int,
    n_max: int | None = None,
    part: str = "all",
    index_offset: int = 0,
) -> Dataset:
    """
    Jointly permuted (mult, add) pairs (label 1) against cross-matched pairs (label 0).

    Per ring, k_correct pairs share one row permutation and one column
    permutation between both tables. k_incorrect records combine the mult of
    one variant with the add of a different variant of the same ring; a draw
    that happens to form a consistent ring is redrawn.
    """
    rings = list(rings)
    if not rings:
        raise DomainError("ring_match needs at least one ring")
    records = []
    for i, ring in enumerate(rings):
        records += _ring_records(ring, k_correct, k_incorrect, seed, index_offset + i)
    config = {
        "rings": [list(r.moduli) for r in rings],
        "k_correct": k_correct,
        "k_incorrect": k_incorrect,
        "seed": seed,
    }
    return _finish(
        records,
        seed=seed,
        n_max=n_max or max(r.n for r in rings),
        K=1,
        task="ring-match",
        builder="ring-match",
        config=config,
        corpus=[r.name for r in rings],
        part=part,
    )


def build_ring_partitions(N: int, k_correct: int, k_incorrect: int, seed: int) -> Dataset:
    """Ring matching over Z/2^p_1 x .. for every partition of N (rings of size 2^N)."""
    dataset = build_ring_match([partition_ring(p) for p in partitions(N)], k_correct, k_incorrect, seed)
    dataset.builder = "ring-partitions"
    dataset.config = dict(dataset.config, N=N)
    return dataset


def build_ring_collection(N: int, F: int, k_correct: int, k_incorrect: int, seed: int) -> tuple[Dataset, Dataset]:
    """
    Ring matching on unseen rings.

    Rings come from the prime factorisations of j = 2..N; the first F train
    and the remaining N-1-F validate. All tables are padded to N x N.

    Raises:
        DomainError: unless 2 <= F < N - 1
    """
    if not 2 <= F < N - 1:
        raise DomainError(f"F must satisfy 2 <= F < N-1, got F={F}, N={N}")
    rings = [ring_for_order(j) for j in range(2, N + 1)]
    train = build_ring_match(rings[:F], k_correct, k_incorrect, seed, n_max=N, part="train")
    valid = build_ring_match(rings[F:], k_correct, k_incorrect, seed, n_max=N, part="valid", index_offset=F)
    for d in (train, valid):
        d.builder = "ring-collection"
        d.config = dict(d.config, N=N, F=F)
    return train, valid


# ---------------------------------------------------------------------------
# Config-driven construction
# ---------------------------------------------------------------------------


def resolve_corpus(corpus: dict[str, Any] | None) -> list[GroupTable]:
    """
    Build a group corpus from a config mapping.

    Keys: ``catalog`` (max order), ``names`` (extra named groups) and
    ``path`` (NDJSON table file). One group per isomorphism class is kept,
    the first listed: catalog groups, then names, then imported tables.
    """
    if not corpus:
        raise ConfigError("dataset.corpus is required")
    groups: list[GroupTable] = []
    if corpus.get("catalog"):
        groups += catalog(int(corpus["catalog"]))
    for name in corpus.get("names", []) or []:
        groups.append(named_group(name))
    if corpus.get("path"):
        groups += import_tables(corpus["path"])
    unique, dropped = unique_up_to_isomorphism(groups)
    for duplicate, twin in dropped:
        logger.info(f"Corpus: {duplicate.name} is isomorphic to {twin.name}; keeping {twin.name}")
    if not unique:
        raise ConfigError(f"corpus {corpus} yields no groups")
    return unique


def _named_list(names) -> list[GroupTable]:
    return [named_group(name) for name in names]


BUILDERS: dict[str, Callable[[dict[str, Any]], Dataset | tuple[Dataset, Dataset]]] = {
    "cayley-vs-latin": lambda p: build_cayley_vs_latin(
        n=p["n"], k_perms=p["k_perms"], num_latin=p["num_latin"], seed=p.get("seed", 0)
    ),
    "unseen-groups": lambda p: build_unseen_group_split(
        n=p["n"],
        S=p["S"],
        k_perms=p["k_perms"],
        num_latin=p["num_latin"],
        seed=p.get("seed", 0),
        names=p.get("names"),
    ),
    "entry-shift": lambda p: build_entry_shift(
        n=p["n"], perms_per_group=p["perms_per_group"], num_negative=p["num_negative"], seed=p.get("seed", 0)
    ),
    "simplicity": lambda p: build_simplicity(
        resolve_corpus(p.get("corpus")),
        perms_simple=p.get("perms_simple", 20),
        perms_nonsimple=p.get("perms_nonsimple", 5),
        seed=p.get("seed", 0),
    ),
    "subgroup-classes": lambda p: build_subgroup_classes(
        resolve_corpus(p.get("corpus")),
        thresholds=tuple(p.get("thresholds", (30, 100))),
        perms=p.get("perms", 5),
        count_kind=p.get("count_kind", "total"),
        seed=p.get("seed", 0),
    ),
    "group-iso-pairs": lambda p: build_group_iso_pairs(
        _named_list(p["S1"]), _named_list(p["S2"]), pairs_per_class=p["pairs_per_class"], seed=p.get("seed", 0)
    ),
    "ring-match": lambda p: build_ring_match(
        [cyclic_product_ring(m) for m in p["rings"]],
        k_correct=p["k_correct"],
        k_incorrect=p["k_incorrect"],
        seed=p.get("seed", 0),
    ),
    "ring-partitions": lambda p: build_ring_partitions(
        N=p["N"], k_correct=p["k_correct"], k_incorrect=p["k_incorrect"], seed=p.get("seed", 0)
    ),
    "ring-collection": lambda p: build_ring_collection(
        N=p["N"], F=p["F"], k_correct=p["k_correct"], k_incorrect=p["k_incorrect"], seed=p.get("seed", 0)
    ),
}


def build_from_config(builder: str, params: dict[str, Any]) -> Dataset | tuple[Dataset, Dataset]:
    """
    Run a named builder on a parameter mapping.

    Raises:
        ConfigError: for an unknown builder or a missing parameter
    """
    if builder not in BUILDERS:
        raise ConfigError(f"unknown dataset builder {builder!r}; choose from {sorted(BUILDERS)}")
    try:
        return BUILDERS[builder](params)
    except KeyError as e:
        raise ConfigError(f"builder {builder!r} is missing parameter {e.args[0]!r}") from e
