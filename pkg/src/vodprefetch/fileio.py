"""Atomic text-file writes shared by every output writer."""

from __future__ import annotations

import os
from pathlib import Path


def atomic_write(path: str | os.PathLike[str], text: str) -> None:
    """Write `text` to `path` via a temp file and rename.

    Readers either see the old content or the new content, never a
    partial file. The parent directory must already exist.
    """
    target = Path(path)
    tmp = target.with_name(f"{target.name}.tmp{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, target)
