"""Exact dense cosine-similarity index over chunk embeddings.

At advisory-corpus scale (hundreds of chunks) a flat scan is microseconds,
so search is exact by construction: every query is scored against every
entry and results are totally ordered by (score desc, chunk_id asc), which
keeps downstream tests deterministic.

Index file layout (single file, little-endian):

    magic ``CXRG`` (4 bytes)
    format version  u16
    dim             u32
    count           u64
    vector block    count x dim float32
    metadata-length u64
    metadata block  one JSON object per line, line i describing entry i
                    (chunk_id, doc_id, source_name, page, text)
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Chunk
from .errors import CorruptIndexError

MAGIC = b"CXRG"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIQ")  # magic, version, dim, count


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of unit vectors, clamped to the valid cosine range."""
    score = float(np.dot(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)))
    return max(-1.0, min(1.0, score))


@dataclass(frozen=True)
class IndexEntry:
    chunk_id: str
    vector: np.ndarray
    doc_id: str
    source_name: str
    page: int | None
    text: str

    @classmethod
    def from_chunk(cls, chunk: Chunk, vector: np.ndarray) -> "IndexEntry":
        return cls(
            chunk_id=chunk.chunk_id,
            vector=vector,
            doc_id=chunk.doc_id,
            source_name=chunk.source_name,
            page=chunk.page,
            text=chunk.text,
        )


@dataclass(frozen=True)
class SearchHit:
    chunk_id: str
    score: float
    rank: int
    doc_id: str
    source_name: str
    page: int | None
    text: str

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "score": self.score,
            "rank": self.rank,
            "doc_id": self.doc_id,
            "source_name": self.source_name,
            "page": self.page,
            "text": self.text,
        }


class VectorIndex:
    """Flat cosine index. Build once, then treat as immutable for searching.

    Vectors are L2-normalized at add time so search is a plain dot product.
    A published index must never be mutated in place; ingestion builds a
    fresh one and swaps the reference.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = dim
        self._ids: list[str] = []
        self._vectors: list[np.ndarray] = []
        self._meta: list[dict] = []
        self._id_set: set[str] = set()
        self._matrix: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self._ids)

    def add(self, entries: list[IndexEntry]) -> int:
        """Add entries; validates the whole batch before mutating anything."""
        seen_new: set[str] = set()
        for entry in entries:
            vec = np.asarray(entry.vector, dtype=np.float32)
            if vec.shape != (self.dim,):
                raise ValueError(
                    f"dim mismatch for chunk_id {entry.chunk_id!r}: "
                    f"got {vec.shape[0] if vec.ndim == 1 else vec.shape}, index dim is {self.dim}"
                )
            if entry.chunk_id in self._id_set or entry.chunk_id in seen_new:
                raise ValueError(f"duplicate chunk_id {entry.chunk_id!r}")
            seen_new.add(entry.chunk_id)

        for entry in entries:
            vec = np.asarray(entry.vector, dtype=np.float32)
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise ValueError(f"zero vector for chunk_id {entry.chunk_id!r}")
            self._ids.append(entry.chunk_id)
            self._vectors.append((vec / norm).astype(np.float32))
            self._meta.append(
                {
                    "chunk_id": entry.chunk_id,
                    "doc_id": entry.doc_id,
                    "source_name": entry.source_name,
                    "page": entry.page,
                    "text": entry.text,
                }
            )
            self._id_set.add(entry.chunk_id)
        self._matrix = None
        return len(self._ids)

    def _get_matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.vstack(self._vectors).astype(np.float64)
        return self._matrix

    def search_top_k(self, query: np.ndarray, k: int) -> list[SearchHit]:
        """The k highest-cosine entries, ties broken by chunk_id ascending."""
        if k <= 0:
            raise ValueError(f"k must be >= 1, got {k}")
        if not self._ids:
            return []
        q = np.asarray(query, dtype=np.float64)
        if q.shape != (self.dim,):
            raise ValueError(f"query dim {q.shape} does not match index dim {self.dim}")
        scores = self._get_matrix() @ q
        order = sorted(range(len(self._ids)), key=lambda i: (-scores[i], self._ids[i]))
        hits = []
        for rank, i in enumerate(order[:k], start=1):
            meta = self._meta[i]
            hits.append(
                SearchHit(
                    chunk_id=self._ids[i],
                    score=max(-1.0, min(1.0, float(scores[i]))),
                    rank=rank,
                    doc_id=meta["doc_id"],
                    source_name=meta["source_name"],
                    page=meta["page"],
                    text=meta["text"],
                )
            )
        return hits

    def source_names(self) -> list[str]:
        return sorted({m["source_name"] for m in self._meta})

    def save(self, path: str | Path) -> int:
        """Write the index to disk atomically; returns bytes written."""
        path = Path(path)
        header = _HEADER.pack(MAGIC, FORMAT_VERSION, self.dim, len(self._ids))
        if self._vectors:
            vector_block = np.vstack(self._vectors).astype("<f4").tobytes()
        else:
            vector_block = b""
        meta_lines = [
            json.dumps(m, ensure_ascii=False, sort_keys=True) + "\n" for m in self._meta
        ]
        meta_block = "".join(meta_lines).encode("utf-8")
        payload = header + vector_block + struct.pack("<Q", len(meta_block)) + meta_block

        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(payload)
        os.replace(tmp, path)
        return len(payload)

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        """Read an index file, validating structure byte by byte."""
        data = Path(path).read_bytes()
        if len(data) < _HEADER.size:
            raise CorruptIndexError(
                f"file too short for header ({len(data)} bytes)", offset=len(data)
            )
        magic, version, dim, count = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise CorruptIndexError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
        if version != FORMAT_VERSION:
            raise CorruptIndexError(
                f"unsupported format version {version}, expected {FORMAT_VERSION}", offset=4
            )
        if dim < 1:
            raise CorruptIndexError(f"invalid dim {dim}", offset=6)

        vec_start = _HEADER.size
        vec_bytes = count * dim * 4
        meta_len_off = vec_start + vec_bytes
        if len(data) < meta_len_off + 8:
            raise CorruptIndexError(
                f"truncated file: expected at least {meta_len_off + 8} bytes, got {len(data)}",
                offset=len(data),
            )
        (meta_len,) = struct.unpack_from("<Q", data, meta_len_off)
        meta_start = meta_len_off + 8
        if len(data) != meta_start + meta_len:
            raise CorruptIndexError(
                f"metadata block length mismatch: declared {meta_len}, "
                f"actual {len(data) - meta_start}",
                offset=meta_len_off,
            )

        index = cls(dim)
        if count:
            vectors = np.frombuffer(data, dtype="<f4", count=count * dim, offset=vec_start)
            matrix = vectors.reshape(count, dim)
            meta_text = data[meta_start:].decode("utf-8")
            # json.dumps escapes literal newlines, so "\n" is a safe line split
            # (splitlines() would also split on U+2028 inside chunk text).
            lines = meta_text.split("\n")
            if lines and lines[-1] == "":
                lines.pop()
            if len(lines) != count:
                raise CorruptIndexError(
                    f"metadata has {len(lines)} lines for {count} entries", offset=meta_start
                )
            for i, line in enumerate(lines):
                try:
                    meta = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorruptIndexError(
                        f"metadata line {i} is not valid JSON: {exc}", offset=meta_start
                    ) from exc
                chunk_id = meta["chunk_id"]
                if chunk_id in index._id_set:
                    raise CorruptIndexError(
                        f"duplicate chunk_id {chunk_id!r} in metadata", offset=meta_start
                    )
                index._ids.append(chunk_id)
                # Keep stored bits exactly; normalization happened before save.
                index._vectors.append(np.array(matrix[i], dtype=np.float32))
                index._meta.append(meta)
                index._id_set.add(chunk_id)
        return index
