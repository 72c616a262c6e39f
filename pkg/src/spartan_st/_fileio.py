"""Atomic file output (write to a temporary sibling, then rename)."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path


def atomic_write(path, data):
    """Write ``data`` (bytes or str) to ``path`` so readers never see a partial file."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
