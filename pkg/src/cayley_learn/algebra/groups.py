"""
Constructors for finite groups as reduced Cayley tables.

Families: cyclic, direct products, dihedral, dicyclic, alternating and
symmetric. ``catalog`` sweeps these families per order and keeps one
representative per isomorphism class.
"""

from __future__ import annotations

import itertools
import logging
import re
from functools import lru_cache
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from cayley_learn.algebra.oracles import are_isomorphic, is_abelian, order_profile
from cayley_learn.algebra.tables import (
    GroupTable,
    first_associativity_violation,
    is_latin_square,
)
from cayley_learn.config import get_settings
from cayley_learn.core.errors import (
    DomainError,
    InvalidOrderError,
    RecordParseError,
    RecordProblem,
    TableImportError,
    UnsupportedOrderError,
)
from cayley_learn.core.schema import TableRecord
from cayley_learn.core.storage import NDJSONStore

logger = logging.getLogger(__name__)


def cyclic_group(n: int) -> GroupTable:
    """C_n with table[i][j] = ((i + j - 2) mod n) + 1."""
    if n < 1:
        raise InvalidOrderError(f"cyclic group order must be >= 1, got {n}")
    idx = np.arange(n)
    return GroupTable.from_array((idx[:, None] + idx[None, :]) % n + 1, name=f"C{n}", check=False)


def direct_product(G: GroupTable, H: GroupTable) -> GroupTable:
    """
    G x H over pairs (g, h) in lexicographic order.

    The pair (g, h) gets label (g - 1) * |H| + h, so the identity pair is 1.
    """
    m = H.n
    tG = G.zero_based
    tH = H.zero_based
    # [g1, h1, g2, h2] -> index of (g1 g2, h1 h2)
    prod = tG[:, None, :, None] * m + tH[None, :, None, :]
    table = prod.reshape(G.n * m, G.n * m) + 1
    return GroupTable.from_array(table, name=f"{G.name}x{H.name}", check=False)


def dihedral_group(order: int) -> GroupTable:
    """
    Dihedral group with ``order`` elements, D_order.

    Elements r^a s^f are listed as 1, r, .., r^(m-1), s, sr, .., sr^(m-1) with
    m = order / 2; index f * m + a.
    """
    if order < 2 or order % 2:
        raise InvalidOrderError(f"dihedral group order must be even and >= 2, got {order}")
    m = order // 2
    f = np.repeat(np.arange(2), m)
    a = np.tile(np.arange(m), 2)
    # (f1, a1)(f2, a2) = (f1 ^ f2, (-1)^f2 * a1 + a2)
    sign = np.where(f == 1, -1, 1)
    f_prod = f[:, None] ^ f[None, :]
    a_prod = (sign[None, :] * a[:, None] + a[None, :]) % m
    table = f_prod * m + a_prod + 1
    return GroupTable.from_array(table, name=f"D{order}", check=False)


def dicyclic_group(order: int) -> GroupTable:
    """
    Dicyclic group <a, b | a^(2m) = 1, b^2 = a^m, b^-1 a b = a^-1>, order 4m.

    Elements a^k b^f have index f * 2m + k. Order 8 is the quaternion group Q8.
    """
    if order < 4 or order % 4:
        raise InvalidOrderError(f"dicyclic group order must be a positive multiple of 4, got {order}")
    m = order // 4
    two_m = 2 * m
    f = np.repeat(np.arange(2), two_m)
    k = np.tile(np.arange(two_m), 2)
    k1, k2 = k[:, None], k[None, :]
    f1, f2 = f[:, None], f[None, :]
    # a^i a^j = a^(i+j); a^i b a^j = a^(i-j) b; b b = a^m
    k_prod = np.where(f2 == 0, np.where(f1 == 0, k1 + k2, k1 - k2), np.where(f1 == 0, k1 + k2, k1 - k2 + m))
    table = (f1 ^ f2) * two_m + k_prod % two_m + 1
    name = "Q8" if order == 8 else f"Dic{order}"
    return GroupTable.from_array(table, name=name, check=False)


def _permutation_group(perms: np.ndarray, name: str) -> GroupTable:
    """Cayley table of a set of permutations (rows, lexicographically sorted) under p o q."""
    count, m = perms.shape
    weights = m ** np.arange(m - 1, -1, -1)
    codes = perms @ weights
    # (p o q)(x) = p(q(x))
    composed = perms[np.arange(count)[:, None, None], perms[None, :, :]]
    table = np.searchsorted(codes, composed @ weights) + 1
    return GroupTable.from_array(table, name=name, check=False)


def _sorted_permutations(m: int, even_only: bool) -> np.ndarray:
    perms = []
    for p in itertools.permutations(range(m)):
        if even_only:
            inversions = sum(1 for i in range(m) for j in range(i + 1, m) if p[i] > p[j])
            if inversions % 2:
                continue
        perms.append(p)
    return np.asarray(perms, dtype=np.int64).reshape(len(perms), m)


def alternating_group(m: int) -> GroupTable:
    """
    A_m, the even permutations of m points, identity first.

    Raises:
        UnsupportedOrderError: if m is outside 1..alternating_max_degree
    """
    limit = get_settings().alternating_max_degree
    if not 1 <= m <= limit:
        raise UnsupportedOrderError(f"alternating_group supports 1 <= m <= {limit}, got {m}")
    return _permutation_group(_sorted_permutations(m, even_only=True), name=f"A{m}")


def symmetric_group(m: int) -> GroupTable:
    """
    S_m under composition, identity first.

    Raises:
        UnsupportedOrderError: if m is outside 1..symmetric_max_degree
    """
    limit = get_settings().symmetric_max_degree
    if not 1 <= m <= limit:
        raise UnsupportedOrderError(f"symmetric_group supports 1 <= m <= {limit}, got {m}")
    return _permutation_group(_sorted_permutations(m, even_only=False), name=f"S{m}")


def invariant_factorizations(n: int) -> list[list[int]]:
    """
    All lists d_1 >= d_2 >= .. > 1 with d_(i+1) | d_i and product n.

    Each list is one abelian group of order n; the single-factor list is C_n.
    """
    if n == 1:
        return [[]]

    def extend(remaining: int, bound: int) -> list[list[int]]:
        if remaining == 1:
            return [[]]
        out = []
        for d in range(min(remaining, bound), 1, -1):
            if remaining % d == 0 and (bound % d == 0):
                for tail in extend(remaining // d, d):
                    out.append([d] + tail)
        return out

    found = []
    for first in range(n, 1, -1):
        if n % first:
            continue
        for tail in extend(n // first, first):
            found.append([first] + tail)
    return sorted(found, key=lambda fs: (len(fs), [-d for d in fs]))


def abelian_group(factors: list[int]) -> GroupTable:
    """Direct product of cyclic groups, named like ``C4xC2``."""
    if not factors:
        return cyclic_group(1)
    group = cyclic_group(factors[0])
    for d in factors[1:]:
        group = direct_product(group, cyclic_group(d))
    return group


def _family_members(n: int) -> list[GroupTable]:
    """Every family construction of order n, before deduplication."""
    settings = get_settings()
    members = [abelian_group(fs) for fs in invariant_factorizations(n)]
    if n % 2 == 0:
        members.append(dihedral_group(n))
    if n % 4 == 0:
        members.append(dicyclic_group(n))
    for m in range(2, settings.alternating_max_degree + 1):
        if _factorial(m) // 2 == n:
            members.append(alternating_group(m))
    for m in range(1, settings.symmetric_max_degree + 1):
        if _factorial(m) == n:
            members.append(symmetric_group(m))
    return members


def _factorial(m: int) -> int:
    out = 1
    for k in range(2, m + 1):
        out *= k
    return out


def unique_up_to_isomorphism(groups) -> tuple[list[GroupTable], list[tuple[GroupTable, GroupTable]]]:
    """
    Keep the first group of every isomorphism class, in input order.

    Candidates are compared only when order, element-order profile and
    commutativity agree; the isomorphism search decides the rest.

    Returns:
        (kept groups, [(dropped, kept isomorphic copy), ...])
    """
    kept: list[tuple[tuple, GroupTable]] = []
    dropped: list[tuple[GroupTable, GroupTable]] = []
    for candidate in groups:
        key = (candidate.n, order_profile(candidate), is_abelian(candidate))
        twin = next((g for k, g in kept if k == key and are_isomorphic(candidate, g) is not None), None)
        if twin is None:
            kept.append((key, candidate))
        else:
            dropped.append((candidate, twin))
    return [g for _, g in kept], dropped


@lru_cache(maxsize=8)
def _catalog(max_order: int) -> tuple[GroupTable, ...]:
    groups: list[GroupTable] = []
    for n in range(1, max_order + 1):
        kept, _ = unique_up_to_isomorphism(_family_members(n))
        groups.extend(kept)
        logger.debug(f"catalog: order {n} has {len(kept)} group(s)")
    return tuple(groups)


def catalog(max_order: int) -> list[GroupTable]:
    """
    Deduplicated groups of order <= max_order from the family set.

    Within an order the listing is: cyclic, other abelian (fewest factors
    first), dihedral, dicyclic, alternating, symmetric. For orders 1..15 the
    family set is complete.
    """
    if max_order < 1:
        raise InvalidOrderError(f"max_order must be >= 1, got {max_order}")
    return list(_catalog(max_order))


def groups_of_order(n: int) -> list[GroupTable]:
    return [g for g in catalog(n) if g.n == n]


_NAME_PATTERN = re.compile(r"^(C|D|Q|Dic|A|S)(\d+)$")


def named_group(name: str) -> GroupTable:
    """
    Build a group from its name: C12, D8, Q8, Dic12, A5, S4, or x-joined
    products such as C4xC2 or C3xS3.

    Raises:
        DomainError: if the name is not recognised
    """
    parts = name.split("x")
    if len(parts) > 1:
        group = named_group(parts[0])
        for part in parts[1:]:
            group = direct_product(group, named_group(part))
        return group.renamed(name)
    match = _NAME_PATTERN.match(name)
    if not match:
        raise DomainError(f"unrecognised group name: {name!r}")
    family, value = match.group(1), int(match.group(2))
    if family == "C":
        return cyclic_group(value)
    if family == "D":
        return dihedral_group(value)
    if family == "Q":
        if value != 8:
            raise DomainError("only Q8 is named Q; use Dic<order> for other dicyclic groups")
        return dicyclic_group(8)
    if family == "Dic":
        return dicyclic_group(value)
    if family == "A":
        return alternating_group(value)
    return symmetric_group(value)


def _canonicalise(arr: np.ndarray) -> np.ndarray | None:
    """Relabel so the identity is 1 by swapping labels 1 and e; None if no identity."""
    n = arr.shape[0]
    expected = np.arange(1, n + 1)
    rows = np.flatnonzero((arr == expected[None, :]).all(axis=1))
    if rows.size == 0:
        return None
    e = int(rows[0])
    if not np.array_equal(arr[:, e], expected):
        return None
    if e == 0:
        return arr
    swap = np.arange(n)
    swap[0], swap[e] = e, 0
    # new[s(i), s(j)] = s(old[i, j]) with s swapping 0 and e
    out = np.empty_like(arr)
    out[np.ix_(swap, swap)] = swap[arr - 1] + 1
    return out


def import_tables(path: Path | str) -> list[GroupTable]:
    """
    Load group tables from an NDJSON file.

    Each line holds ``n``, a row-major ``table`` and an optional ``name``.
    Tables whose identity is not labelled 1 are relabelled by swapping 1 with
    the identity.

    Raises:
        TableImportError: listing every rejected line with its reason
    """
    path = Path(path)
    store = NDJSONStore(path.parent)
    problems: list[RecordProblem] = []
    tables: list[GroupTable] = []
    malformed: list[RecordParseError] = []
    for line_no, obj in store.iter_lines(path.name, problems=malformed):
        try:
            record = TableRecord.model_validate(obj)
        except ValidationError as e:
            problems.append(RecordProblem(line=line_no, message=str(e.errors()[0]["msg"])))
            continue
        arr = np.asarray(record.table, dtype=np.int64).reshape(record.n, record.n)
        if not is_latin_square(arr):
            problems.append(RecordProblem(line=line_no, message="not a Latin square over 1..n"))
            continue
        violation = first_associativity_violation(arr)
        if violation is not None:
            problems.append(RecordProblem(line=line_no, message=f"associativity fails at {violation}"))
            continue
        canonical = _canonicalise(arr)
        if canonical is None:
            problems.append(RecordProblem(line=line_no, message="no identity element"))
            continue
        tables.append(GroupTable.from_array(canonical, name=record.name or f"G{record.n}#{line_no}"))

    problems += [RecordProblem(line=e.line or 0, message=e.message) for e in malformed]
    problems.sort(key=lambda p: p.line)
    if problems:
        raise TableImportError(problems)
    logger.info(f"Imported {len(tables)} group table(s) from {path}")
    return tables


def export_tables(path: Path | str, groups: list[GroupTable]) -> str:
    """Write groups in the NDJSON table format; returns the content hash."""
    path = Path(path)
    records = [TableRecord(n=g.n, table=g.table.ravel().tolist(), name=g.name) for g in groups]
    return NDJSONStore(path.parent).write(path.name, records)
