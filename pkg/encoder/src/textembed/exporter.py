"""Turn a keyed statement file into a binary embedding file.

Input is a UTF-8 text file with one statement per line:

    key-hex16<TAB>text

Output is the ``PEMB`` binary format (little-endian): magic ``PEMB``,
version u16 = 1, dim u32, count u64, then one record per statement of
(key u64, dim float32 components).  Records are written in input order
regardless of how the texts were batched through the encoder, so the
output is a pure function of the input file and the encoder weights.

Keys are taken verbatim from the input file and are never recomputed;
a key appearing twice is an error because the file format cannot
represent two vectors for one key.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass

import numpy as np

log = logging.getLogger("textembed")

MAGIC = b"PEMB"
VERSION = 1
_HEADER = struct.Struct("<4sHIQ")
_KEY = struct.Struct("<Q")


class StatementFileError(ValueError):
    """Raised when the statement file violates the line grammar."""


class DuplicateKeyError(ValueError):
    """Raised when two statements share a key."""

    def __init__(self, key: int):
        super().__init__(f"duplicate statement key 0x{key:016x}")
        self.key = key


@dataclass(frozen=True)
class ExportResult:
    """What an export run produced: record count, vector width, and how
    many statements were truncated to fit the encoder window."""

    count: int
    dim: int
    truncated: int


def read_statement_file(lines) -> list[tuple[int, str]]:
    """Parse ``key-hex16<TAB>text`` lines into (key, text) pairs.

    Blank lines are skipped.  Duplicate keys raise, malformed lines raise
    with their line number.
    """
    out: list[tuple[int, str]] = []
    seen: set[int] = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise StatementFileError(
                f"line {lineno}: expected 2 tab-separated fields, got {len(fields)}"
            )
        try:
            key = int(fields[0], 16)
        except ValueError:
            raise StatementFileError(
                f"line {lineno}: key {fields[0]!r} is not hexadecimal"
            ) from None
        if not 0 <= key < 2**64:
            raise StatementFileError(f"line {lineno}: key out of 64-bit range")
        if key in seen:
            raise DuplicateKeyError(key)
        seen.add(key)
        out.append((key, fields[1]))
    return out


def write_embedding_file(path: str, dim: int, records) -> None:
    """Write (key, vector) records to ``path`` in the order given."""
    records = list(records)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, dim, len(records)))
        for key, vec in records:
            arr = np.asarray(vec, dtype="<f4")
            if arr.shape != (dim,):
                raise ValueError(
                    f"vector for key 0x{key:016x} has shape {arr.shape}, want ({dim},)"
                )
            f.write(_KEY.pack(key))
            f.write(arr.tobytes())


def export_embeddings(statements_path: str, encoder, out_path: str,
                      batch_size: int = 32) -> ExportResult:
    """Encode every statement in ``statements_path`` and write a PEMB file.

    ``encoder`` must expose ``hidden_size`` and
    ``encode(texts) -> (matrix of shape (n, hidden_size), n_truncated)``.
    Statements longer than the encoder window are truncated to the prefix;
    the count is logged and returned, never silently dropped.
    """
    with open(statements_path, "r", encoding="utf-8") as f:
        statements = read_statement_file(f)
    keys = [k for k, _ in statements]
    texts = [t for _, t in statements]

    dim = encoder.hidden_size
    vectors = np.empty((len(texts), dim), dtype=np.float32)
    truncated = 0
    for start in range(0, len(texts), batch_size):
        batch = texts[start : start + batch_size]
        mat, cut = encoder.encode(batch)
        mat = np.asarray(mat, dtype=np.float32)
        if mat.shape != (len(batch), dim):
            raise ValueError(
                f"encoder returned shape {mat.shape}, want ({len(batch)}, {dim})"
            )
        vectors[start : start + len(batch)] = mat
        truncated += cut
    if truncated:
        log.warning("%d of %d statements truncated to the encoder window",
                    truncated, len(texts))

    write_embedding_file(out_path, dim, zip(keys, vectors))
    return ExportResult(count=len(keys), dim=dim, truncated=truncated)
