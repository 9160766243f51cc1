"""Atomic file output used by every writer in the toolkit.

Files are written to a temporary sibling and renamed into place, so a reader
never sees a half-written report.
"""
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Callable, Dict, Union

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _atomic(path: PathLike, writer: Callable[[Path], None]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=str(target.parent))
    os.close(fd)
    tmp = Path(tmp_name)
    try:
        writer(tmp)
        os.replace(tmp, target)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise
    logger.debug("Wrote %s", target)
    return target


def write_text_atomic(path: PathLike, text: str) -> Path:
    return _atomic(path, lambda tmp: tmp.write_text(text, encoding="utf-8", newline="\n"))


def write_bytes_atomic(path: PathLike, data: bytes) -> Path:
    return _atomic(path, lambda tmp: tmp.write_bytes(data))


def write_json_atomic(path: PathLike, payload: Dict[str, Any]) -> Path:
    """Serialize with sorted keys and a trailing newline so re-emission is byte-stable."""
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"
    return write_text_atomic(path, text)


def write_with_atomic(path: PathLike, writer: Callable[[Path], None]) -> Path:
    """Run an arbitrary ``writer(tmp_path)`` (numpy, matplotlib, ...) and rename into place."""
    return _atomic(path, writer)
