"""Shared file plumbing: atomic writes and JSONL output.

Output files are written to a temp file in the destination directory and
renamed into place, so a crashed run never leaves a half-written artifact.

JSONL artifacts produced by the CLI may start with a single header object
``{"_config": {...}}`` echoing the effective run configuration; every
loader in this package skips that line.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable

CONFIG_HEADER_KEY = "_config"


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_jsonl(
    path: str | Path,
    records: Iterable[dict[str, Any]],
    header: dict[str, Any] | None = None,
) -> None:
    """Write one JSON object per line, optionally preceded by a config header."""
    lines = []
    if header is not None:
        lines.append(json.dumps({CONFIG_HEADER_KEY: header}, ensure_ascii=False, sort_keys=True))
    lines.extend(json.dumps(rec, ensure_ascii=False) for rec in records)
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
