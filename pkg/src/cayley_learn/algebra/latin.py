"""
Random Latin squares and row/column manipulation.

Sampling uses the Jacobson-Matthews +-1 move chain on the incidence cube of
the square. A proper state is an ordinary Latin square; an improper state has
exactly one cell holding -1 and is resolved by the following moves.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator

import numpy as np

from cayley_learn.algebra.tables import GroupTable, LatinSquare, as_square_array, is_latin_square
from cayley_learn.config import get_settings
from cayley_learn.core.errors import DomainError, InvalidOrderError, ResourceLimitError, ShapeError

logger = logging.getLogger(__name__)

# Exhaustive enumeration beyond this order is impractical (n=5 already has 161280 squares)
MAX_ENUMERATION_ORDER = 5


def _square_of(L) -> np.ndarray:
    if isinstance(L, LatinSquare):
        return L.square
    if isinstance(L, GroupTable):
        return L.table
    return as_square_array(L, "Latin square")


def check_permutation(perm, n: int, name: str) -> np.ndarray:
    p = np.asarray(perm, dtype=np.int64).ravel()
    if p.shape[0] != n:
        raise ShapeError(f"{name} has length {p.shape[0]}, expected {n}")
    if not np.array_equal(np.sort(p), np.arange(1, n + 1)):
        raise DomainError(f"{name} is not a permutation of 1..{n}")
    return p - 1


def permute(L, row_perm, col_perm) -> LatinSquare:
    """
    Reorder rows and columns: result[i][j] = L[row_perm(i)][col_perm(j)].

    Permutations are 1-based sequences of length n. Symbols are left unchanged.

    Raises:
        ShapeError: if a permutation has the wrong length
        DomainError: if a sequence is not a permutation of 1..n
    """
    arr = _square_of(L)
    n = arr.shape[0]
    rp = check_permutation(row_perm, n, "row_perm")
    cp = check_permutation(col_perm, n, "col_perm")
    return LatinSquare.from_array(arr[np.ix_(rp, cp)], check=False)


def reduce(L) -> LatinSquare:
    """
    Return the row/column permutation of L whose first row and first column
    are both 1..n.
    """
    arr = _square_of(L)
    by_first_row = arr[:, np.argsort(arr[0], kind="stable")]
    reduced = by_first_row[np.argsort(by_first_row[:, 0], kind="stable")]
    return LatinSquare.from_array(reduced, check=False)


def is_reduced(L) -> bool:
    arr = _square_of(L)
    expected = np.arange(1, arr.shape[0] + 1)
    return bool(np.array_equal(arr[0], expected) and np.array_equal(arr[:, 0], expected))


def random_permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform 1-based permutation of length n."""
    return rng.permutation(n) + 1


class LatinSquareSampler:
    """
    One Jacobson-Matthews chain of order n.

    The chain starts from the cyclic square, runs ``burn_in`` proper moves once
    and then ``thinning`` proper moves between consecutive samples. Both default
    to powers of n taken from settings.

    Example:
        >>> sampler = LatinSquareSampler(8, seed=7)
        >>> squares = sampler.sample(100)
    """

    def __init__(self, n: int, seed: int, burn_in: int | None = None, thinning: int | None = None):
        if n < 1:
            raise InvalidOrderError(f"Latin square order must be >= 1, got {n}")
        settings = get_settings()
        self.n = n
        self.seed = seed
        self.burn_in = burn_in if burn_in is not None else n**settings.latin_burn_in_power
        self.thinning = thinning if thinning is not None else n**settings.latin_thinning_power
        self.rng = np.random.default_rng(seed)

        idx = np.arange(n)
        self.cube = np.zeros((n, n, n), dtype=np.int8)
        self.cube[idx[:, None], idx[None, :], (idx[:, None] + idx[None, :]) % n] = 1
        self.improper: tuple[int, int, int] | None = None
        self.moves = 0
        self._burned_in = False

    @property
    def is_proper(self) -> bool:
        return self.improper is None

    def current(self) -> LatinSquare:
        """The square of the current proper state."""
        if self.improper is not None:
            raise DomainError("chain is in an improper state")
        square = np.argmax(self.cube, axis=2) + 1
        return LatinSquare.from_array(square, check=False)

    def step(self) -> bool:
        """
        Apply one +-1 move.

        Returns:
            True if the chain is in a proper state afterwards
        """
        n = self.n
        cube = self.cube
        rng = self.rng
        if n == 1:
            return True

        if self.improper is None:
            while True:
                r, c, s = (int(v) for v in rng.integers(0, n, size=3))
                if cube[r, c, s] == 0:
                    break
            r1 = int(np.flatnonzero(cube[:, c, s] == 1)[0])
            c1 = int(np.flatnonzero(cube[r, :, s] == 1)[0])
            s1 = int(np.flatnonzero(cube[r, c, :] == 1)[0])
        else:
            r, c, s = self.improper
            r1 = int(rng.choice(np.flatnonzero(cube[:, c, s] == 1)))
            c1 = int(rng.choice(np.flatnonzero(cube[r, :, s] == 1)))
            s1 = int(rng.choice(np.flatnonzero(cube[r, c, :] == 1)))

        cube[r, c, s] += 1
        cube[r, c1, s1] += 1
        cube[r1, c, s1] += 1
        cube[r1, c1, s] += 1
        cube[r, c, s1] -= 1
        cube[r, c1, s] -= 1
        cube[r1, c, s] -= 1
        cube[r1, c1, s1] -= 1

        self.moves += 1
        self.improper = (r1, c1, s1) if cube[r1, c1, s1] < 0 else None
        return self.improper is None

    def advance(self, proper_moves: int) -> None:
        """Run until ``proper_moves`` moves have ended in a proper state."""
        done = 0
        while done < proper_moves or self.improper is not None:
            if self.step():
                done += 1

    def next(self) -> LatinSquare:
        if self.n == 1:
            return LatinSquare.from_array([[1]], check=False)
        if not self._burned_in:
            self.advance(self.burn_in)
            self._burned_in = True
            logger.debug(f"Latin chain n={self.n} seed={self.seed} burned in after {self.moves} moves")
        else:
            self.advance(self.thinning)
        return self.current()

    def sample(self, count: int) -> list[LatinSquare]:
        """Draw ``count`` squares from this chain."""
        return [self.next() for _ in range(count)]

    def __iter__(self) -> Iterator[LatinSquare]:
        while True:
            yield self.next()


def random_latin_square(n: int, seed: int) -> LatinSquare:
    """
    A single Latin square of order n, deterministic given (n, seed).

    Raises:
        InvalidOrderError: if n < 1
    """
    return LatinSquareSampler(n, seed).next()


def enumerate_latin_squares(n: int) -> Iterator[np.ndarray]:
    """
    Yield every Latin square of order n by row-wise backtracking.

    Counts are 1, 2, 12, 576 for n = 1..4.

    Raises:
        ResourceLimitError: if n exceeds MAX_ENUMERATION_ORDER
    """
    if n < 1:
        raise InvalidOrderError(f"Latin square order must be >= 1, got {n}")
    if n > MAX_ENUMERATION_ORDER:
        raise ResourceLimitError(f"exhaustive enumeration is limited to n <= {MAX_ENUMERATION_ORDER}")

    grid = np.zeros((n, n), dtype=np.int64)
    row_used = np.zeros((n, n + 1), dtype=bool)
    col_used = np.zeros((n, n + 1), dtype=bool)

    def fill(cell: int) -> Iterator[np.ndarray]:
        if cell == n * n:
            yield grid.copy()
            return
        r, c = divmod(cell, n)
        for s in range(1, n + 1):
            if row_used[r, s] or col_used[c, s]:
                continue
            grid[r, c] = s
            row_used[r, s] = col_used[c, s] = True
            yield from fill(cell + 1)
            row_used[r, s] = col_used[c, s] = False
        grid[r, c] = 0

    yield from fill(0)


__all__ = [
    "LatinSquareSampler",
    "enumerate_latin_squares",
    "is_latin_square",
    "is_reduced",
    "permute",
    "random_latin_square",
    "random_permutation",
    "reduce",
]
