"""
Exact oracles on Cayley tables and Latin squares.

These are the ground truth behind every dataset label: group-ness of a Latin
square, simplicity, subgroup counts and isomorphism.
"""

from __future__ import annotations

import logging
from collections import Counter, deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from cayley_learn.algebra.latin import reduce
from cayley_learn.algebra.tables import (
    GroupTable,
    LatinSquare,
    as_square_array,
    is_associative,
    is_latin_square,
)
from cayley_learn.config import get_settings
from cayley_learn.core.errors import DomainError, ResourceLimitError

logger = logging.getLogger(__name__)


def _latin_array(L) -> np.ndarray:
    if isinstance(L, LatinSquare):
        arr = L.square
    elif isinstance(L, GroupTable):
        arr = L.table
    else:
        arr = as_square_array(L, "Latin square")
    if not is_latin_square(arr):
        raise DomainError("input is not a Latin square over symbols 1..n")
    return np.asarray(arr, dtype=np.int64)


def _zero_based(G) -> np.ndarray:
    if isinstance(G, GroupTable):
        return G.zero_based
    return np.asarray(G, dtype=np.int64) - 1


# ---------------------------------------------------------------------------
# Latin square oracles
# ---------------------------------------------------------------------------


def quadrangle_criterion(L) -> bool:
    """
    Check the quadrangle criterion on a Latin square.

    Whenever a[i,k]=a[i',k'], a[i,l]=a[i',l'] and a[j,k]=a[j',k'], the
    criterion requires a[j,l]=a[j',l']. Given (i, j, k, l, i') the other three
    primed indices are forced by the Latin property, so the scan is over n^5
    tuples, vectorised over (i', j, k, l) for each i.

    Raises:
        DomainError: if L is not a Latin square
    """
    a = _latin_array(L) - 1
    n = a.shape[0]
    idx = np.arange(n)
    # row_pos[r, s]: column where row r holds s; col_pos[c, s]: row where column c holds s
    row_pos = np.empty((n, n), dtype=np.int64)
    row_pos[idx[:, None], a] = idx[None, :]
    col_pos = np.empty((n, n), dtype=np.int64)
    col_pos[idx[None, :], a] = idx[:, None]

    ip = idx[:, None, None, None]
    j = idx[None, :, None, None]
    k = idx[None, None, :, None]
    l = idx[None, None, None, :]
    target = a[j, l]
    for i in range(n):
        kp = row_pos[ip, a[i, k]]
        lp = row_pos[ip, a[i, l]]
        jp = col_pos[kp, a[j, k]]
        if not np.all(a[jp, lp] == target):
            return False
    return True


def is_group_table(L) -> bool:
    """
    True iff the quasigroup of L is isotopic to a group.

    The square is normalised to a loop with identity 1 by sorting its first row
    and column; a loop isotopic to a group is isomorphic to it, so the n^3
    associativity scan on the loop decides the question.

    Raises:
        DomainError: if L is not a Latin square
    """
    arr = _latin_array(L)
    return is_associative(reduce(arr).square)


# ---------------------------------------------------------------------------
# Element invariants
# ---------------------------------------------------------------------------


def element_orders(G) -> np.ndarray:
    """Order of every element, indexed by 0-based label."""
    t = _zero_based(G)
    n = t.shape[0]
    idx = np.arange(n)
    orders = np.zeros(n, dtype=np.int64)
    power = idx.copy()
    for k in range(1, n + 1):
        hit = (power == 0) & (orders == 0)
        orders[hit] = k
        if np.all(orders):
            break
        power = t[power, idx]
    return orders


def order_profile(G) -> tuple[int, ...]:
    """Sorted element orders, an isomorphism invariant."""
    return tuple(sorted(element_orders(G).tolist()))


def inverses(G) -> np.ndarray:
    """0-based inverse of each element."""
    t = _zero_based(G)
    return np.argmax(t == 0, axis=1)


def is_abelian(G) -> bool:
    t = _zero_based(G)
    return bool(np.array_equal(t, t.T))


def conjugacy_classes(G) -> list[np.ndarray]:
    """Conjugacy classes as sorted 0-based label arrays, the identity class first."""
    t = _zero_based(G)
    n = t.shape[0]
    inv = inverses(t + 1)
    idx = np.arange(n)
    seen = np.zeros(n, dtype=bool)
    classes = []
    for x in range(n):
        if seen[x]:
            continue
        # g x g^-1 for every g
        cls = np.unique(t[t[idx, x], inv])
        seen[cls] = True
        classes.append(cls)
    return classes


# ---------------------------------------------------------------------------
# Subgroups
# ---------------------------------------------------------------------------


def _close(t: np.ndarray, members: np.ndarray, gens: list[int]) -> np.ndarray:
    """Smallest subset containing ``members`` closed under right multiplication by ``gens``."""
    closed = members.copy()
    closed[0] = True
    frontier = np.flatnonzero(closed)
    g = np.asarray(gens, dtype=np.int64)
    while frontier.size:
        products = np.unique(t[np.ix_(frontier, g)])
        fresh = products[~closed[products]]
        closed[fresh] = True
        frontier = fresh
    return closed


@dataclass(frozen=True)
class Subgroup:
    """
    A subgroup given by its 1-based elements.

    Attributes:
        elements: Sorted labels, always starting with the identity 1
        order: Number of elements
        generators: Labels that generate the subgroup
    """

    elements: tuple[int, ...]
    order: int
    generators: tuple[int, ...]
    parent: GroupTable

    def __post_init__(self):
        if self.parent.n % self.order:
            raise DomainError(f"subgroup order {self.order} does not divide {self.parent.n}")

    def __contains__(self, label: int) -> bool:
        return label in self.elements

    def induced_table(self) -> GroupTable:
        """Cayley table of the subgroup relabelled 1..order in element order."""
        sub = np.asarray(self.elements, dtype=np.int64) - 1
        relabel = np.full(self.parent.n, -1, dtype=np.int64)
        relabel[sub] = np.arange(self.order)
        block = relabel[self.parent.zero_based[np.ix_(sub, sub)]] + 1
        return GroupTable.from_array(block, name=f"{self.parent.name}<{self.order}>", check=False)


@lru_cache(maxsize=256)
def _subgroup_masks(key: bytes, n: int) -> tuple[tuple[bytes, tuple[int, ...]], ...]:
    t = np.frombuffer(key, dtype=np.int64).reshape(n, n)
    empty = np.zeros(n, dtype=bool)

    found: dict[bytes, tuple[np.ndarray, tuple[int, ...]]] = {}
    cyclic_gens = []
    for g in range(n):
        mask = _close(t, empty, [g])
        k = mask.tobytes()
        if k not in found:
            found[k] = (mask, (g,))
            cyclic_gens.append(g)

    # Pairwise-join fixpoint: join every known subgroup with every cyclic one
    queue = deque(found.keys())
    while queue:
        k = queue.popleft()
        mask, gens = found[k]
        for g in cyclic_gens:
            if mask[g]:
                continue
            joined = _close(t, mask, list(gens) + [g])
            jk = joined.tobytes()
            if jk not in found:
                found[jk] = (joined, gens + (g,))
                queue.append(jk)
    return tuple((k, gens) for k, (_, gens) in found.items())


def subgroups(G: GroupTable, bound: int | None = None) -> list[Subgroup]:
    """
    Enumerate every subgroup of G.

    Seeds with the cyclic subgroups, then joins each known subgroup with each
    cyclic subgroup until nothing new appears. Every subgroup is generated by
    finitely many elements, so the fixpoint is complete.

    Args:
        G: Group to analyse
        bound: Largest accepted order (defaults to settings.subgroup_order_bound)

    Returns:
        Subgroups sorted by (order, elements)

    Raises:
        ResourceLimitError: if |G| exceeds the bound
    """
    limit = bound if bound is not None else get_settings().subgroup_order_bound
    if G.n > limit:
        raise ResourceLimitError(f"subgroup enumeration is limited to order <= {limit}, got {G.n}")

    t = np.ascontiguousarray(G.zero_based, dtype=np.int64)
    result = []
    for k, gens in _subgroup_masks(t.tobytes(), G.n):
        mask = np.frombuffer(k, dtype=bool)
        elements = tuple(int(e) + 1 for e in np.flatnonzero(mask))
        result.append(
            Subgroup(
                elements=elements,
                order=len(elements),
                generators=tuple(g + 1 for g in gens),
                parent=G,
            )
        )
    result.sort(key=lambda s: (s.order, s.elements))
    return result


@dataclass(frozen=True)
class SubgroupCounts:
    total: int
    iso_classes: int

    def get(self, kind: str) -> int:
        if kind == "total":
            return self.total
        if kind in ("iso-classes", "iso_classes"):
            return self.iso_classes
        raise DomainError(f"unknown subgroup count kind: {kind}")


def subgroup_counts(G: GroupTable, bound: int | None = None) -> SubgroupCounts:
    """Total number of subgroups and number of isomorphism classes among them."""
    subs = subgroups(G, bound=bound)
    buckets: dict[tuple, list[GroupTable]] = {}
    classes = 0
    for sub in subs:
        table = sub.induced_table()
        key = (sub.order, order_profile(table), is_abelian(table))
        reps = buckets.setdefault(key, [])
        if any(are_isomorphic(table, rep) is not None for rep in reps):
            continue
        reps.append(table)
        classes += 1
    return SubgroupCounts(total=len(subs), iso_classes=classes)


def is_normal(G: GroupTable, sub: Subgroup) -> bool:
    t = G.zero_based
    inv = inverses(G)
    members = np.zeros(G.n, dtype=bool)
    members[np.asarray(sub.elements) - 1] = True
    gens = np.asarray(sub.generators, dtype=np.int64) - 1
    idx = np.arange(G.n)
    # g s g^-1 for all g and each generator s
    conj = t[t[idx[:, None], gens[None, :]], inv[:, None]]
    return bool(np.all(members[conj]))


def normal_subgroups(G: GroupTable, bound: int | None = None) -> list[Subgroup]:
    return [s for s in subgroups(G, bound=bound) if is_normal(G, s)]


def is_simple(G: GroupTable) -> bool:
    """
    True iff G has no normal subgroup besides {1} and G.

    Works from conjugacy classes: the subgroup generated by a class is normal,
    and every nontrivial normal subgroup contains such a closure. This avoids
    full subgroup enumeration and so also handles A6. The trivial group is not
    simple.
    """
    if G.n == 1:
        return False
    t = G.zero_based
    empty = np.zeros(G.n, dtype=bool)
    for cls in conjugacy_classes(G)[1:]:
        closure = _close(t, empty, cls.tolist())
        if not closure.all():
            return False
    return True


# ---------------------------------------------------------------------------
# Isomorphism
# ---------------------------------------------------------------------------


def generating_set(G) -> list[int]:
    """Greedy generators (0-based): largest order first, smallest label on ties."""
    t = _zero_based(G)
    n = t.shape[0]
    orders = element_orders(t + 1)
    ranking = sorted(range(n), key=lambda g: (-orders[g], g))
    members = np.zeros(n, dtype=bool)
    members[0] = True
    gens: list[int] = []
    for g in ranking:
        if members.all():
            break
        if members[g]:
            continue
        gens.append(g)
        members = _close(t, members, gens)
    return gens


def _extend(tG: np.ndarray, tH: np.ndarray, gens: list[int], images: list[int]) -> np.ndarray | None:
    """BFS the Cayley graph on ``gens``; return the forced partial map or None on conflict."""
    n = tG.shape[0]
    phi = np.full(n, -1, dtype=np.int64)
    used = np.zeros(n, dtype=bool)
    phi[0] = 0
    used[0] = True
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for g, h in zip(gens, images):
            y = tG[x, g]
            img = tH[phi[x], h]
            if phi[y] < 0:
                if used[img]:
                    return None
                phi[y] = img
                used[img] = True
                queue.append(y)
            elif phi[y] != img:
                return None
    return phi


def are_isomorphic(G, H) -> tuple[int, ...] | None:
    """
    Search for an isomorphism G -> H.

    Generators of G are assigned images of the same element order; generators
    whose order class in H is smallest are assigned first. Each partial
    assignment is propagated through the Cayley graph and rejected on the
    first conflict.

    Returns:
        1-based images (phi(1), .., phi(n)) of a witnessing bijection, or None
    """
    tG = _zero_based(G)
    tH = _zero_based(H)
    n = tG.shape[0]
    if n != tH.shape[0]:
        return None
    if n == 1:
        return (1,)
    ordG = element_orders(tG + 1)
    ordH = element_orders(tH + 1)
    if sorted(ordG.tolist()) != sorted(ordH.tolist()):
        return None
    if is_abelian(tG + 1) != is_abelian(tH + 1):
        return None

    class_size = Counter(ordH.tolist())
    gens = sorted(generating_set(tG + 1), key=lambda g: (class_size[ordG[g]], -ordG[g], g))
    candidates = [np.flatnonzero(ordH == ordG[g]).tolist() for g in gens]

    def search(depth: int, images: list[int]) -> np.ndarray | None:
        if depth == len(gens):
            phi = _extend(tG, tH, gens, images)
            if phi is None or (phi < 0).any():
                return None
            if np.array_equal(phi[tG], tH[phi[:, None], phi[None, :]]):
                return phi
            return None
        for h in candidates[depth]:
            if h in images:
                continue
            if _extend(tG, tH, gens[: depth + 1], images + [h]) is None:
                continue
            found = search(depth + 1, images + [h])
            if found is not None:
                return found
        return None

    phi = search(0, [])
    if phi is None:
        return None
    return tuple(int(v) + 1 for v in phi)


__all__ = [
    "Subgroup",
    "SubgroupCounts",
    "are_isomorphic",
    "conjugacy_classes",
    "element_orders",
    "generating_set",
    "inverses",
    "is_abelian",
    "is_group_table",
    "is_normal",
    "is_simple",
    "normal_subgroups",
    "order_profile",
    "quadrangle_criterion",
    "subgroup_counts",
    "subgroups",
]
