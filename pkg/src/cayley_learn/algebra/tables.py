"""
Table types shared by the group, Latin square and ring code.

All public tables use element labels 1..n. Internally the algorithms work on
0-based copies obtained with ``zero_based``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cayley_learn.core.errors import DomainError, ShapeError, TableValidationError


def as_square_array(values, name: str = "table") -> np.ndarray:
    """Coerce nested sequences to a 2-D int64 array and check it is square."""
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ShapeError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise DomainError(f"{name} entries must be integers")
    return arr.astype(np.int64)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.int64, copy=True)
    arr.setflags(write=False)
    return arr


def is_latin_square(matrix) -> bool:
    """
    Check the Latin property over symbols 1..n.

    Args:
        matrix: n x n integer array-like

    Returns:
        True iff every row and every column is a permutation of 1..n

    Raises:
        ShapeError: if the input is not square
    """
    arr = as_square_array(matrix, "Latin square candidate")
    n = arr.shape[0]
    expected = np.arange(1, n + 1)
    rows_ok = np.array_equal(np.sort(arr, axis=1), np.broadcast_to(expected, (n, n)))
    cols_ok = np.array_equal(np.sort(arr, axis=0), np.broadcast_to(expected[:, None], (n, n)))
    return bool(rows_ok and cols_ok)


def first_associativity_violation(table) -> tuple[int, int, int] | None:
    """
    Scan all n^3 triples for (ij)k != i(jk).

    The table is read as an operation on its own labels: row i, column j hold
    the label of i*j. Scanning is chunked per left factor to keep memory at n^2.

    Returns:
        The lexicographically first violating triple (1-based), or None
    """
    t = np.asarray(table, dtype=np.int64) - 1
    n = t.shape[0]
    for i in range(n):
        left = t[t[i]]  # [j, k] -> (i*j)*k
        right = t[i][t]  # [j, k] -> i*(j*k)
        bad = np.argwhere(left != right)
        if bad.size:
            j, k = bad[0]
            return (i + 1, int(j) + 1, int(k) + 1)
    return None


def is_associative(table) -> bool:
    return first_associativity_violation(table) is None


@dataclass(frozen=True, eq=False)
class LatinSquare:
    """An n x n array over symbols 1..n with the row/column Latin property."""

    n: int
    square: np.ndarray

    @classmethod
    def from_array(cls, values, check: bool = True) -> LatinSquare:
        arr = as_square_array(values, "Latin square")
        if check and not is_latin_square(arr):
            raise DomainError("array is not a Latin square over symbols 1..n")
        return cls(n=arr.shape[0], square=_frozen(arr))

    def to_list(self) -> list[list[int]]:
        return self.square.tolist()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatinSquare):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.square, other.square)

    def __hash__(self) -> int:
        return hash((self.n, self.square.tobytes()))


@dataclass(frozen=True, eq=False)
class GroupTable:
    """
    Cayley table of a finite group in reduced form.

    Element 1 is the identity, so row 1 and column 1 read 1..n.
    """

    n: int
    table: np.ndarray
    name: str = ""

    @classmethod
    def from_array(cls, values, name: str = "", check: bool = True) -> GroupTable:
        """
        Build a GroupTable, validating Latin property, identity and associativity.

        Raises:
            TableValidationError: if any group axiom fails
        """
        arr = as_square_array(values, "Cayley table")
        n = arr.shape[0]
        if check:
            if not is_latin_square(arr):
                raise TableValidationError("table is not a Latin square over 1..n")
            expected = np.arange(1, n + 1)
            if not (np.array_equal(arr[0], expected) and np.array_equal(arr[:, 0], expected)):
                raise TableValidationError("element 1 is not the identity (first row/column must be 1..n)")
            violation = first_associativity_violation(arr)
            if violation is not None:
                i, j, k = violation
                raise TableValidationError(f"associativity fails at ({i}, {j}, {k})")
        return cls(n=n, table=_frozen(arr), name=name or f"G{n}")

    @property
    def zero_based(self) -> np.ndarray:
        return self.table - 1

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def as_latin_square(self) -> LatinSquare:
        return LatinSquare(n=self.n, square=self.table)

    def to_list(self) -> list[list[int]]:
        return self.table.tolist()

    def renamed(self, name: str) -> GroupTable:
        return GroupTable(n=self.n, table=self.table, name=name)

    def same_table(self, other: GroupTable) -> bool:
        return self.n == other.n and np.array_equal(self.table, other.table)

    def __repr__(self) -> str:
        return f"GroupTable(name={self.name!r}, n={self.n})"
