"""
NDJSON storage with atomic writes.

Every data file in this project is NDJSON: one JSON object per line, UTF-8,
LF line endings. Dataset files carry an optional first line
``#!manifest {...}`` describing how the records were produced.
"""

import hashlib
import json
import logging
from collections.abc import Iterable, Iterator
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from cayley_learn.core.errors import RecordParseError

logger = logging.getLogger(__name__)

MANIFEST_PREFIX = "#!manifest "


def atomic_write(path: Path, content: str) -> None:
    """
    Write content to file atomically.

    Uses a temporary file and atomic rename to prevent corruption.

    Args:
        path: Target file path
        content: Content to write
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_path = path.with_suffix(path.suffix + ".tmp")

    try:
        with temp_path.open("w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        # Atomic rename (POSIX)
        temp_path.replace(path)
    except Exception:
        if temp_path.exists():
            temp_path.unlink()
        raise


def dumps_line(item: dict[str, Any] | BaseModel) -> str:
    """Serialise one record as a compact, key-ordered JSON line."""
    if isinstance(item, BaseModel):
        item = item.model_dump(mode="json")
    return json.dumps(item, ensure_ascii=False, separators=(",", ":"), sort_keys=True, default=str)


def content_hash(lines: Iterable[str]) -> str:
    digest = hashlib.sha256()
    for line in lines:
        digest.update(line.encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()


class NDJSONStore:
    """
    NDJSON file handler rooted at a directory.

    Relative paths are resolved against ``data_root``; absolute paths are used
    as given.
    """

    def __init__(self, data_root: Path):
        self.data_root = Path(data_root)
        self.data_root.mkdir(parents=True, exist_ok=True)

    def resolve(self, path: Path | str) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.data_root / path

    def write(
        self,
        path: Path | str,
        items: Iterable[dict[str, Any] | BaseModel],
        manifest: dict[str, Any] | None = None,
    ) -> str:
        """
        Write items to an NDJSON file (overwrite).

        Args:
            path: Target file
            items: Records to write
            manifest: Optional manifest; its ``content_hash`` is filled in

        Returns:
            sha256 of the record lines
        """
        lines = [dumps_line(item) for item in items]
        digest = content_hash(lines)
        header = []
        if manifest is not None:
            manifest = dict(manifest, content_hash=digest)
            header.append(MANIFEST_PREFIX + dumps_line(manifest))
        all_lines = header + lines
        content = "\n".join(all_lines) + ("\n" if all_lines else "")
        target = self.resolve(path)
        atomic_write(target, content)
        logger.debug(f"Wrote {len(lines)} records to {target}")
        return digest

    def iter_lines(
        self, path: Path | str, problems: list[RecordParseError] | None = None
    ) -> Iterator[tuple[int, dict[str, Any]]]:
        """
        Yield (line number, object) for every non-blank record line.

        The manifest line is skipped; use ``read_manifest`` for it. When
        ``problems`` is given, malformed lines are appended to it and skipped.

        Raises:
            RecordParseError: on the first line that is not a JSON object,
                unless ``problems`` collects them
        """
        target = self.resolve(path)
        with target.open(encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                line = line.strip()
                if not line or line.startswith(MANIFEST_PREFIX):
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as e:
                    error = RecordParseError(f"invalid JSON: {e.msg}", line=line_no)
                    if problems is None:
                        raise error from e
                    problems.append(error)
                    continue
                if not isinstance(obj, dict):
                    error = RecordParseError("record is not a JSON object", line=line_no)
                    if problems is None:
                        raise error
                    problems.append(error)
                    continue
                yield line_no, obj

    def read_all(self, path: Path | str) -> list[dict[str, Any]]:
        """Read all records; a missing file reads as empty."""
        if not self.resolve(path).exists():
            return []
        return [obj for _, obj in self.iter_lines(path)]

    def read_manifest(self, path: Path | str) -> dict[str, Any] | None:
        target = self.resolve(path)
        if not target.exists():
            return None
        with target.open(encoding="utf-8") as f:
            first = f.readline().strip()
        if not first.startswith(MANIFEST_PREFIX):
            return None
        try:
            return json.loads(first[len(MANIFEST_PREFIX) :])
        except json.JSONDecodeError as e:
            raise RecordParseError(f"invalid manifest: {e.msg}", line=1) from e
