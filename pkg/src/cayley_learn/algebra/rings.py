"""
Finite commutative rings Z/n_1 x .. x Z/n_k given by their two tables.

Elements are tuples in lexicographic order with mixed-radix labels 1..n; the
zero tuple is label 1.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np

from cayley_learn.algebra.latin import check_permutation
from cayley_learn.algebra.oracles import _extend, element_orders, generating_set
from cayley_learn.algebra.tables import as_square_array, is_associative, is_latin_square
from cayley_learn.config import get_settings
from cayley_learn.core.errors import InvalidOrderError, ResourceLimitError

logger = logging.getLogger(__name__)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.int64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RingTables:
    """
    Multiplication and addition tables of a product of cyclic rings.

    Attributes:
        n: Ring size
        moduli: Cyclic factors, product n
        mult: n x n multiplication table over 1..n
        add: n x n addition table over 1..n
    """

    n: int
    moduli: tuple[int, ...]
    mult: np.ndarray
    add: np.ndarray

    @property
    def name(self) -> str:
        return "x".join(f"Z{m}" for m in self.moduli)

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "moduli": list(self.moduli),
            "mult": self.mult.ravel().tolist(),
            "add": self.add.ravel().tolist(),
        }

    def __repr__(self) -> str:
        return f"RingTables({self.name}, n={self.n})"


def ring_elements(moduli) -> np.ndarray:
    """All tuples of the product, lexicographic, zero first; shape (n, k)."""
    grids = np.meshgrid(*[np.arange(m) for m in moduli], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def cyclic_product_ring(moduli, bound: int | None = None) -> RingTables:
    """
    Build Z/n_1 x .. x Z/n_k with componentwise arithmetic.

    Args:
        moduli: Factors n_i >= 1
        bound: Largest accepted ring size (defaults to settings.ring_size_bound)

    Raises:
        InvalidOrderError: for an empty list or a modulus < 1
        ResourceLimitError: if the product exceeds the bound
    """
    moduli = tuple(int(m) for m in moduli)
    if not moduli or any(m < 1 for m in moduli):
        raise InvalidOrderError(f"moduli must be a non-empty list of integers >= 1, got {moduli}")
    n = int(np.prod(moduli))
    limit = bound if bound is not None else get_settings().ring_size_bound
    if n > limit:
        raise ResourceLimitError(f"ring size {n} exceeds bound {limit}")

    mods = np.asarray(moduli, dtype=np.int64)
    # weights[i] = prod(moduli[i+1:])
    weights = np.concatenate([np.cumprod(mods[::-1])[::-1][1:], [1]])
    elems = ring_elements(moduli)
    mult = (elems[:, None, :] * elems[None, :, :]) % mods @ weights + 1
    add = (elems[:, None, :] + elems[None, :, :]) % mods @ weights + 1
    return RingTables(n=n, moduli=moduli, mult=_frozen(mult), add=_frozen(add))


def prime_factors(j: int) -> list[int]:
    """Prime factors of j with multiplicity, ascending (12 -> [2, 2, 3])."""
    if j < 1:
        raise InvalidOrderError(f"cannot factor {j}")
    factors = []
    p = 2
    while p * p <= j:
        while j % p == 0:
            factors.append(p)
            j //= p
        p += 1
    if j > 1:
        factors.append(j)
    return factors


def ring_for_order(j: int) -> RingTables:
    """The ring Z/p_1 x .. x Z/p_r built from the prime factorisation of j."""
    return cyclic_product_ring(prime_factors(j) or [1])


def partitions(N: int) -> list[tuple[int, ...]]:
    """
    Integer partitions of N in reverse-lexicographic order.

    Example:
        >>> partitions(4)
        [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    """
    if N < 1:
        raise InvalidOrderError(f"N must be >= 1, got {N}")

    def parts(remaining: int, largest: int):
        if remaining == 0:
            yield ()
            return
        for first in range(min(remaining, largest), 0, -1):
            for rest in parts(remaining - first, first):
                yield (first,) + rest

    return list(parts(N, N))


def partition_ring(partition) -> RingTables:
    """Z/2^p_1 x .. x Z/2^p_k for a partition (p_1, .., p_k)."""
    return cyclic_product_ring([2**p for p in partition])


def paired_permute(R: RingTables, row_perm, col_perm) -> tuple[np.ndarray, np.ndarray]:
    """
    Apply one row permutation and one column permutation to both tables.

    Entries are not relabelled, so the pair stays a consistent presentation
    of R under the induced row/column labelling.

    Raises:
        ShapeError: if a permutation has the wrong length
    """
    rp = check_permutation(row_perm, R.n, "row_perm")
    cp = check_permutation(col_perm, R.n, "col_perm")
    return R.mult[np.ix_(rp, cp)].copy(), R.add[np.ix_(rp, cp)].copy()


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def first_distributivity_violation(mult, add) -> tuple[int, int, int] | None:
    """
    Scan a*(b+c) = a*b + a*c and (b+c)*a = b*a + c*a on all triples.

    Returns:
        The first violating (a, b, c), 1-based, or None
    """
    m = np.asarray(mult, dtype=np.int64) - 1
    s = np.asarray(add, dtype=np.int64) - 1
    n = m.shape[0]
    for a in range(n):
        left = m[a][s]  # [b, c] -> a*(b+c)
        right = s[m[a][:, None], m[a][None, :]]
        right_side = m[:, a][s]
        right_rhs = s[m[:, a][:, None], m[:, a][None, :]]
        bad = np.argwhere((left != right) | (right_side != right_rhs))
        if bad.size:
            b, c = bad[0]
            return (a + 1, int(b) + 1, int(c) + 1)
    return None


def is_distributive(mult, add) -> bool:
    return first_distributivity_violation(mult, add) is None


def is_ring(mult, add) -> bool:
    """
    Both tables on labels 1..n form a commutative ring with zero 1.

    Checks: add is an abelian group table with identity 1, mult is
    associative and commutative, and mult distributes over add.
    """
    mult = as_square_array(mult, "mult")
    add = as_square_array(add, "add")
    n = add.shape[0]
    if mult.shape != add.shape:
        return False
    if mult.min() < 1 or mult.max() > n or not is_latin_square(add):
        return False
    expected = np.arange(1, n + 1)
    if not np.array_equal(add[0], expected) or not np.array_equal(add, add.T):
        return False
    if not np.array_equal(mult, mult.T):
        return False
    return is_associative(add) and is_associative(mult) and is_distributive(mult, add)


def strip_padding(table) -> np.ndarray:
    """Drop the zero rows/columns that padding adds at the bottom-right."""
    arr = np.asarray(table, dtype=np.int64)
    live = int(np.count_nonzero(arr[0]))
    return arr[:live, :live]


def recover_pair(mult, add) -> tuple[np.ndarray, np.ndarray] | None:
    """
    Undo a joint row/column permutation of a (mult, add) pair.

    The zero element absorbs under mult, so the all-ones row of mult marks
    zero's row; that row of add lists the column labels. The all-ones column
    gives the row labels the same way. The un-permuted pair is returned only
    if it is a commutative ring.

    Returns:
        (mult, add) with rows and columns in label order, or None
    """
    m = strip_padding(mult)
    a = strip_padding(add)
    n = m.shape[0]
    if a.shape != (n, n):
        return None
    zero_rows = np.flatnonzero((m == 1).all(axis=1))
    zero_cols = np.flatnonzero((m == 1).all(axis=0))
    if zero_rows.size == 0 or zero_cols.size == 0:
        return None
    expected = np.arange(1, n + 1)
    for i0 in zero_rows:
        q = a[i0]
        if not np.array_equal(np.sort(q), expected):
            continue
        for j0 in zero_cols:
            p = a[:, j0]
            if not np.array_equal(np.sort(p), expected):
                continue
            m0 = np.empty_like(m)
            a0 = np.empty_like(a)
            m0[np.ix_(p - 1, q - 1)] = m
            a0[np.ix_(p - 1, q - 1)] = a
            if is_ring(m0, a0):
                return m0, a0
    return None


def is_consistent_pair(mult, add) -> bool:
    """True iff (mult, add) is a jointly permuted presentation of a commutative ring."""
    return recover_pair(mult, add) is not None


def ring_isomorphism(R: RingTables, S: RingTables) -> tuple[int, ...] | None:
    """
    Search for a bijection preserving both tables.

    Candidates are additive isomorphisms: images of additive generators with
    matching additive order, extended through the addition table. Each is then
    checked against the multiplication tables.

    Returns:
        1-based images, or None
    """
    if R.n != S.n:
        return None
    addR = R.add - 1
    addS = S.add - 1
    mR = R.mult - 1
    mS = S.mult - 1
    ordR = element_orders(R.add)
    ordS = element_orders(S.add)
    if sorted(ordR.tolist()) != sorted(ordS.tolist()):
        return None
    if R.n == 1:
        return (1,)

    class_size = Counter(ordS.tolist())
    gens = sorted(generating_set(R.add), key=lambda g: (class_size[ordR[g]], -ordR[g], g))
    candidates = [np.flatnonzero(ordS == ordR[g]).tolist() for g in gens]

    def search(depth: int, images: list[int]) -> np.ndarray | None:
        if depth == len(gens):
            phi = _extend(addR, addS, gens, images)
            if phi is None or (phi < 0).any():
                return None
            if np.array_equal(phi[mR], mS[phi[:, None], phi[None, :]]):
                return phi
            return None
        for h in candidates[depth]:
            if h in images:
                continue
            if _extend(addR, addS, gens[: depth + 1], images + [h]) is None:
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
    "RingTables",
    "cyclic_product_ring",
    "first_distributivity_violation",
    "is_consistent_pair",
    "is_distributive",
    "is_ring",
    "paired_permute",
    "partition_ring",
    "partitions",
    "prime_factors",
    "recover_pair",
    "ring_elements",
    "ring_for_order",
    "ring_isomorphism",
    "strip_padding",
]
