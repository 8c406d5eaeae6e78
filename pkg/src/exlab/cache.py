"""Append-only binary trace cache.

Each record is 24 little-endian bytes: curve-label hash (u64), p (u64),
a_p (i64, two's complement). Rows that break the Hasse bound are dropped
on read and counted.
"""
from __future__ import annotations

import hashlib
import logging
import os

import numpy as np

RECORD = np.dtype([("h", "<u8"), ("p", "<u8"), ("ap", "<i8")])
ENV_VAR = "EXLAB_CACHE"

log = logging.getLogger(__name__)


def label_hash(label: str) -> int:
    return int.from_bytes(hashlib.blake2b(label.encode(), digest_size=8).digest(), "little")


def default_path():
    return os.environ.get(ENV_VAR)


def cache_write(path, label: str, entries) -> int:
    """Append (p, ap) pairs for one curve; returns the number written."""
    entries = list(entries)
    rows = np.empty(len(entries), dtype=RECORD)
    rows["h"] = label_hash(label)
    rows["p"] = [p for p, _ in entries]
    rows["ap"] = [a for _, a in entries]
    with open(path, "ab") as fh:
        fh.write(rows.tobytes())
    return len(entries)


def cache_read(path, label: str | None = None):
    """Return ([(p, ap), ...], rejected) for the curve (all curves if label is None).

    A missing file reads as empty. A file whose length is not a whole
    number of records raises OSError.
    """
    if not os.path.exists(path):
        return [], 0
    size = os.path.getsize(path)
    if size % RECORD.itemsize:
        raise OSError(f"{path}: short record ({size} bytes is not a multiple of {RECORD.itemsize})")
    rows = np.fromfile(path, dtype=RECORD)
    if label is not None:
        rows = rows[rows["h"] == np.uint64(label_hash(label))]
    p = rows["p"].astype(object)
    ap = rows["ap"].astype(object)
    ok = [a * a <= 4 * q for q, a in zip(p, ap)]
    rejected = ok.count(False)
    if rejected:
        log.warning("%s: rejected %d cache rows violating the Hasse bound", path, rejected)
    from .curves import HASSE_AUDIT

    HASSE_AUDIT.record(len(ok), 0)
    return [(int(q), int(a)) for q, a, good in zip(p, ap, ok) if good], rejected
