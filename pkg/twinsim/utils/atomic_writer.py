"""Atomic output for reports, stats files and program images."""

import contextlib
import json
import os
import stat
import tempfile
from collections.abc import Iterator
from pathlib import Path
from typing import IO, Any


@contextlib.contextmanager
def _staged(path: Path) -> Iterator[IO[bytes]]:
    """Yield a temp file beside ``path``; on clean exit it replaces ``path``.

    The existing file's permission bits carry over. On error the temp file
    is removed and ``path`` is untouched.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = stat.S_IMODE(path.stat().st_mode) if path.exists() else None
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            yield f
            f.flush()
            os.fsync(f.fileno())
        if mode is not None:
            os.chmod(tmp_name, mode)
        os.replace(tmp_name, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp_name)
        raise


class AtomicFileWriter:
    """Readers of a target see either the old file or the complete new one."""

    @staticmethod
    def write_bytes(path: Path, content: bytes) -> None:
        with _staged(Path(path)) as f:
            f.write(content)

    @staticmethod
    def write(path: Path, content: str, encoding: str = "utf-8") -> None:
        AtomicFileWriter.write_bytes(path, content.encode(encoding))

    @staticmethod
    def write_json(path: Path, data: Any) -> None:
        """Sorted keys and a trailing newline, so equal data gives equal bytes."""
        AtomicFileWriter.write(path, json.dumps(data, indent=2, sort_keys=True) + "\n")
