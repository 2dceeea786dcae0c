"""Corpus loading and fixed-length overlapping chunking.

Documents arrive as pre-extracted plain text (``.txt``/``.md``); an optional
sidecar ``<stem>.meta.json`` next to each file may declare ``source_name``
and ``page_map`` (a list of ``[char_offset, page_number]`` pairs marking
page starts). Chunk offsets are Unicode scalar values, never bytes, so a
chunk boundary can never split a code point.
"""

from __future__ import annotations

import bisect
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

TEXT_SUFFIXES = (".txt", ".md")

DEFAULT_CHUNK_SIZE = 600
DEFAULT_CHUNK_OVERLAP = 50


@dataclass(frozen=True)
class Document:
    """A single corpus file with provenance metadata."""

    doc_id: str
    source_name: str
    text: str
    page_map: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        offsets = [off for off, _ in self.page_map]
        if offsets != sorted(set(offsets)):
            raise ValueError(f"page_map offsets must be strictly increasing in {self.doc_id}")
        if offsets and (offsets[0] < 0 or offsets[-1] > len(self.text)):
            raise ValueError(f"page_map offsets out of range in {self.doc_id}")

    def page_at(self, char_offset: int) -> int | None:
        """Page containing the given offset, per page_map; None if unmapped."""
        if not self.page_map:
            return None
        offsets = [off for off, _ in self.page_map]
        i = bisect.bisect_right(offsets, char_offset) - 1
        if i < 0:
            return None
        return self.page_map[i][1]


@dataclass(frozen=True)
class Chunk:
    """A fixed-length overlapping text segment with provenance."""

    chunk_id: str
    doc_id: str
    source_name: str
    page: int | None
    char_start: int
    char_end: int
    text: str


def _read_sidecar(path: Path) -> dict:
    """Parse ``<stem>.meta.json`` next to a corpus file, if present."""
    sidecar = path.with_suffix(".meta.json")
    if not sidecar.exists():
        return {}
    raw = json.loads(sidecar.read_text(encoding="utf-8"))
    meta: dict = {}
    if "source_name" in raw:
        meta["source_name"] = str(raw["source_name"])
    if "page_map" in raw:
        meta["page_map"] = [(int(off), int(page)) for off, page in raw["page_map"]]
    return meta


def load_documents(
    dir_path: str | Path,
    on_error: Callable[[Path, Exception], None] | None = None,
) -> list[Document]:
    """Load every ``.txt``/``.md`` file under ``dir_path`` as a Document.

    Files are loaded in lexicographic order of their relative path, which
    fixes doc_id and chunk ordering for the whole corpus. A file that
    cannot be read (missing permission, invalid UTF-8, bad sidecar) is
    skipped; the error is passed to ``on_error`` (default: logged as a
    warning naming the file) and the remaining files are still loaded.
    """
    dir_path = Path(dir_path)
    if not dir_path.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {dir_path}")
    if on_error is None:
        on_error = lambda p, e: logger.warning("skipping %s: %s", p, e)

    paths = sorted(
        (p for p in dir_path.rglob("*") if p.is_file() and p.suffix in TEXT_SUFFIXES),
        key=lambda p: p.relative_to(dir_path).as_posix(),
    )
    documents: list[Document] = []
    for path in paths:
        rel = path.relative_to(dir_path).as_posix()
        try:
            raw = path.read_bytes()
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ValueError(f"file {rel} is not valid UTF-8: {exc}") from exc
            meta = _read_sidecar(path)
            documents.append(
                Document(
                    doc_id=rel,
                    source_name=meta.get("source_name", path.stem),
                    text=text,
                    page_map=meta.get("page_map", []),
                )
            )
        except Exception as exc:  # noqa: BLE001 - per-file isolation is the contract
            on_error(path, exc)
    return documents


def chunk_count(length: int, chunk_size: int, chunk_overlap: int) -> int:
    """Closed-form number of chunks for a document of the given length."""
    if length == 0:
        return 0
    if length <= chunk_size:
        return 1
    stride = chunk_size - chunk_overlap
    return math.ceil((length - chunk_size) / stride) + 1


def chunk_text(
    doc: Document,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    chunk_overlap: int = DEFAULT_CHUNK_OVERLAP,
) -> list[Chunk]:
    """Segment a document into fixed-length overlapping chunks.

    Consecutive chunks start ``chunk_size - chunk_overlap`` characters
    apart; the final chunk is right-anchored to end exactly at the
    document end, so every chunk of a long document is exactly
    ``chunk_size`` characters. Cuts are hard (no whitespace snapping),
    keeping the count formula exact.
    """
    if chunk_overlap < 0 or chunk_overlap >= chunk_size:
        raise ConfigurationError(
            f"chunk_overlap must satisfy 0 <= overlap < chunk_size, got "
            f"overlap={chunk_overlap} size={chunk_size}"
        )
    length = len(doc.text)
    count = chunk_count(length, chunk_size, chunk_overlap)
    if count == 0:
        logger.warning("document %s is empty, producing no chunks", doc.doc_id)
        return []

    stride = chunk_size - chunk_overlap
    chunks: list[Chunk] = []
    for i in range(count):
        if i == count - 1:
            start = max(0, length - chunk_size)
            end = length
        else:
            start = i * stride
            end = start + chunk_size
        chunks.append(
            Chunk(
                chunk_id=f"{doc.doc_id}:{i:04d}",
                doc_id=doc.doc_id,
                source_name=doc.source_name,
                page=doc.page_at(start),
                char_start=start,
                char_end=end,
                text=doc.text[start:end],
            )
        )
    return chunks


def ingest_corpus(
    dir_path: str | Path,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    chunk_overlap: int = DEFAULT_CHUNK_OVERLAP,
    on_error: Callable[[Path, Exception], None] | None = None,
) -> list[Chunk]:
    """Load a corpus directory and chunk every document, in document order."""
    documents = load_documents(dir_path, on_error=on_error)
    chunks: list[Chunk] = []
    for doc in documents:
        chunks.extend(chunk_text(doc, chunk_size, chunk_overlap))
    logger.info("ingested %d documents into %d chunks", len(documents), len(chunks))
    return chunks
