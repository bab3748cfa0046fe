"""
Feature encoding of table records.

one-hot: every cell of the padded n_max x n_max table becomes a
(max_symbol + 1)-wide indicator block; block index 0 is the padding symbol.
scaled-integer: every cell becomes entry / max_symbol.

Pair records encode the multiplication table first, then the addition table.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from cayley_learn.config import get_settings
from cayley_learn.core.errors import DomainError, ShapeError
from cayley_learn.datasets.records import Dataset, Record, pad

logger = logging.getLogger(__name__)

Scheme = Literal["one-hot", "scaled-integer"]

# Rows encoded per call when streaming a dataset that does not fit the cache
STREAM_CHUNK = 256


@dataclass(frozen=True)
class FeatureEncoder:
    scheme: Scheme
    n_max: int
    max_symbol: int
    pair: bool = False

    def __post_init__(self):
        if self.scheme not in ("one-hot", "scaled-integer"):
            raise DomainError(f"unknown encoding scheme {self.scheme!r}")
        if self.max_symbol < 1 or self.n_max < 1:
            raise DomainError("n_max and max_symbol must be >= 1")

    @classmethod
    def for_dataset(cls, dataset: Dataset, scheme: Scheme, max_symbol: int | None = None) -> FeatureEncoder:
        return cls(
            scheme=scheme,
            n_max=dataset.n_max,
            max_symbol=max_symbol or dataset.max_symbol(),
            pair=dataset.pair,
        )

    @property
    def cells(self) -> int:
        return self.n_max * self.n_max * (2 if self.pair else 1)

    @property
    def dim(self) -> int:
        if self.scheme == "one-hot":
            return self.cells * (self.max_symbol + 1)
        return self.cells

    def encode_table(self, table) -> np.ndarray:
        """Encode a live block of shape (m, m), or (2, m, m) for pairs."""
        arr = np.asarray(table, dtype=np.int64)
        expected_ndim = 3 if self.pair else 2
        if arr.ndim != expected_ndim:
            raise ShapeError(f"expected a {expected_ndim}-d table, got shape {arr.shape}")
        if arr.size and (arr.max() > self.max_symbol or arr.min() < 0):
            raise DomainError(f"entry {int(arr.max())} exceeds max_symbol={self.max_symbol}")
        padded = pad(arr, self.n_max).ravel()
        if self.scheme == "one-hot":
            out = np.zeros((padded.shape[0], self.max_symbol + 1), dtype=np.float32)
            out[np.arange(padded.shape[0]), padded] = 1.0
            return out.ravel()
        return (padded / self.max_symbol).astype(np.float32)

    def encode(self, record: Record) -> np.ndarray:
        return self.encode_table(record.x)

    def encode_many(self, records) -> np.ndarray:
        records = list(records)
        out = np.empty((len(records), self.dim), dtype=np.float32)
        for i, record in enumerate(records):
            out[i] = self.encode(record)
        return out

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "n_max": self.n_max, "max_symbol": self.max_symbol, "pair": self.pair}


def encode(record: Record | np.ndarray, scheme: Scheme, n_max: int, max_symbol: int | None = None) -> np.ndarray:
    """
    Encode one record (or raw table) as a feature vector.

    Raises:
        DomainError: if an entry exceeds max_symbol
        ShapeError: if the table does not fit into n_max
    """
    table = record.x if isinstance(record, Record) else np.asarray(record, dtype=np.int64)
    pair = table.ndim == 3
    symbol = max_symbol if max_symbol is not None else max(int(table.max()), 1)
    return FeatureEncoder(scheme=scheme, n_max=n_max, max_symbol=symbol, pair=pair).encode_table(table)


class EncodedSet:
    """
    Feature rows and labels for training and prediction.

    The dense matrix is built once when it fits ``cache_bytes``; otherwise
    rows are encoded on demand, chunk by chunk.
    """

    def __init__(
        self,
        y: np.ndarray,
        dim: int,
        dense: np.ndarray | None = None,
        records: list[Record] | None = None,
        encoder: FeatureEncoder | None = None,
    ):
        self.y = np.asarray(y, dtype=np.int64)
        self.dim = dim
        self._dense = dense
        self._records = records
        self._encoder = encoder

    @classmethod
    def from_arrays(cls, X, y) -> EncodedSet:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] != len(y):
            raise ShapeError(f"X must be (N, d) with N={len(y)}, got {X.shape}")
        return cls(y=y, dim=X.shape[1], dense=X)

    @classmethod
    def from_dataset(cls, dataset: Dataset, encoder: FeatureEncoder, cache_bytes: int | None = None) -> EncodedSet:
        budget = get_settings().feature_cache_bytes if cache_bytes is None else cache_bytes
        size = len(dataset) * encoder.dim * 4
        if size <= budget:
            return cls(y=dataset.labels, dim=encoder.dim, dense=encoder.encode_many(dataset.records))
        logger.debug(f"Feature matrix needs {size} bytes > {budget}; encoding lazily")
        return cls(y=dataset.labels, dim=encoder.dim, records=list(dataset.records), encoder=encoder)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def is_dense(self) -> bool:
        return self._dense is not None

    def rows(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        if self._dense is not None:
            return self._dense[indices]
        return self._encoder.encode_many(self._records[i] for i in indices)

    def chunks(self, order=None, size: int = STREAM_CHUNK):
        """Yield (indices, rows) in ``order`` (default: stored order)."""
        order = np.arange(len(self)) if order is None else np.asarray(order)
        for start in range(0, len(order), size):
            idx = order[start : start + size]
            yield idx, self.rows(idx)
