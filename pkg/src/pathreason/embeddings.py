"""Statement-keyed text-embedding store with a bit-exact binary format.

File layout (little-endian): magic ``PEMB``, version u16 = 1, dim u32,
count u64, then ``count`` records of (key u64, dim float32 components).
The dimension is declared by the file; the engine accepts any dim >= 1.

Lookups run in one of two modes.  ``strict`` returns the stored vector or
raises.  ``synthetic`` fills misses with a deterministic unit-norm
pseudo-random vector derived from ``(seed, key)``, which lets the whole
engine run end to end before any encoder exists.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError, MissingEmbeddingError

MAGIC = b"PEMB"
VERSION = 1
_HEADER = struct.Struct("<4sHIQ")
_KEY = struct.Struct("<Q")


class TextEmbeddingStore:
    """Immutable map from statement key to a fixed-width float vector."""

    def __init__(self, dim: int, vectors: dict[int, np.ndarray] | None = None):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.vectors: dict[int, np.ndarray] = {}
        for key, vec in (vectors or {}).items():
            self._put(key, vec)

    def _put(self, key: int, vec) -> None:
        arr = np.asarray(vec, dtype=np.float32)
        if arr.shape != (self.dim,):
            raise ValueError(f"vector for key 0x{key:016x} has shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"vector for key 0x{key:016x} has non-finite components")
        self.vectors[key] = arr

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, key: int) -> bool:
        return key in self.vectors


def synthetic_vector(dim: int, seed: int, key: int) -> np.ndarray:
    """Deterministic unit-norm pseudo-random vector for ``(seed, key)``."""
    rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, key & 0xFFFFFFFFFFFFFFFF])
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def lookup(
    store: TextEmbeddingStore, key: int, mode: str = "strict", seed: int = 0
) -> np.ndarray:
    """Fetch the vector for a statement key.

    Raises:
        MissingEmbeddingError: on a miss in strict mode.
    """
    vec = store.vectors.get(key)
    if vec is not None:
        return vec.astype(np.float64)
    if mode == "strict":
        raise MissingEmbeddingError(key)
    if mode == "synthetic":
        return synthetic_vector(store.dim, seed, key)
    raise ValueError(f"unknown lookup mode {mode!r}")


def write_store(store: TextEmbeddingStore, path: str) -> None:
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, store.dim, len(store.vectors)))
        for key in sorted(store.vectors):
            f.write(_KEY.pack(key))
            f.write(store.vectors[key].astype("<f4").tobytes())


def read_store(path: str) -> TextEmbeddingStore:
    """Load a PEMB file, verifying magic, version, and record counts."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _HEADER.size:
        raise FormatError("truncated header", offset=len(data))
    magic, version, dim, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if dim < 1:
        raise FormatError(f"invalid dimension {dim}")
    record = _KEY.size + 4 * dim
    offset = _HEADER.size
    vectors: dict[int, np.ndarray] = {}
    for _ in range(count):
        if offset + record > len(data):
            raise FormatError("truncated record payload", offset=offset)
        (key,) = _KEY.unpack_from(data, offset)
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset + _KEY.size)
        vectors[key] = vec.copy()
        offset += record
    if offset != len(data):
        raise FormatError("trailing bytes after final record", offset=offset)
    return TextEmbeddingStore(dim=dim, vectors=vectors)
