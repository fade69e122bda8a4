"""Desk-scale dense retrieval over a local paper corpus.

Exact inner-product search over a few thousand unit vectors needs no ANN
library: a full scan is milliseconds and perfectly reproducible.  The index
persists to a small binary format; document metadata lives in a co-located
SQLite file keyed by doc id.
"""

from __future__ import annotations

import json
import sqlite3
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .adapters import Embedder

__all__ = [
    "QUERY_PREFIX",
    "PASSAGE_PREFIX",
    "CorpusDocument",
    "IngestStats",
    "SearchResult",
    "VectorIndex",
    "MetadataStore",
    "IndexFormatError",
    "ingest_corpus",
    "embed_query",
    "read_corpus_jsonl",
    "mrr_at_k",
    "load_run",
    "load_qrels",
    "metadata_path_for",
]

QUERY_PREFIX = "query: "
PASSAGE_PREFIX = "passage: "

_MAGIC = b"PMIX1"  # format versioned through the magic's trailing digit
_UNIT_TOL = 1e-5  # slack for float32 storage rounding


class IndexFormatError(ValueError):
    """The bytes on disk are not a readable index file."""


@dataclass(frozen=True)
class CorpusDocument:
    doc_id: str
    title: str
    abstract: str
    authors: tuple[str, ...] = ()
    year: int | None = None
    url: str | None = None


@dataclass
class IngestStats:
    records_in: int = 0
    indexed: int = 0
    filtered_no_abstract: int = 0
    rejected_duplicate: int = 0
    malformed: int = 0

    def conserved(self) -> bool:
        return (
            self.records_in
            == self.indexed
            + self.filtered_no_abstract
            + self.rejected_duplicate
            + self.malformed
        )


@dataclass(frozen=True)
class SearchResult:
    doc_id: str
    score: float
    rank: int  # 1-based
    metadata: CorpusDocument | None = None


class VectorIndex:
    """Exact top-k inner-product index over unit vectors.

    Vectors are stored as float32 (the on-disk width); scores are computed
    row-wise in float64, so a result is bit-for-bit identical to a plain
    per-document dot product and unchanged by a save/load cycle.
    """

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self._ids: list[str] = []
        self._id_set: set[str] = set()
        self._rows: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None  # float64 cache for search

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self._ids)

    def add(self, doc_id: str, vector: np.ndarray) -> None:
        if doc_id in self._id_set:
            raise ValueError(f"duplicate doc id {doc_id!r}")
        vec = np.asarray(vector, dtype=np.float32)
        if vec.shape != (self.dimension,):
            raise ValueError(
                f"vector for {doc_id!r} has shape {vec.shape}, want ({self.dimension},)"
            )
        norm = float(np.linalg.norm(vec.astype(np.float64)))
        if abs(norm - 1.0) > _UNIT_TOL:
            raise ValueError(f"vector for {doc_id!r} is not unit norm (|v|={norm:.6f})")
        self._ids.append(doc_id)
        self._id_set.add(doc_id)
        self._rows.append(vec)
        self._matrix = None

    def search(
        self,
        query_vec: np.ndarray,
        k: int,
        metadata: "MetadataStore | None" = None,
    ) -> list[SearchResult]:
        """Top-k by inner product; ties break by ascending doc id."""
        q = np.asarray(query_vec, dtype=np.float64)
        if q.shape != (self.dimension,):
            raise ValueError(f"query has shape {q.shape}, want ({self.dimension},)")
        if k <= 0 or not self._ids:
            return []
        if self._matrix is None:
            self._matrix = np.stack(self._rows).astype(np.float64)
        # row-wise dots, not a matrix product: BLAS gemv may re-associate
        # sums, and ranking must not depend on the backing library
        scores = [float(np.dot(row, q)) for row in self._matrix]
        order = sorted(range(len(self._ids)), key=lambda i: (-scores[i], self._ids[i]))
        results = []
        for rank, i in enumerate(order[: min(k, len(order))], start=1):
            doc_id = self._ids[i]
            results.append(
                SearchResult(
                    doc_id=doc_id,
                    score=float(scores[i]),
                    rank=rank,
                    metadata=metadata.get(doc_id) if metadata is not None else None,
                )
            )
        return results

    def save(self, path: str | Path) -> None:
        """Binary layout: magic, u32-LE dimension, u64-LE count, then per
        document a u16-LE id length, the UTF-8 id bytes, and dimension
        little-endian float32 components."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<I", self.dimension))
            fh.write(struct.pack("<Q", len(self._ids)))
            for doc_id, row in zip(self._ids, self._rows):
                raw = doc_id.encode("utf-8")
                if len(raw) > 0xFFFF:
                    raise ValueError(f"doc id too long: {doc_id[:40]!r}...")
                fh.write(struct.pack("<H", len(raw)))
                fh.write(raw)
                fh.write(row.astype("<f4").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        with open(path, "rb") as fh:
            data = fh.read()
        if data[: len(_MAGIC)] != _MAGIC:
            raise IndexFormatError(f"{path}: bad magic {data[:5]!r}")
        off = len(_MAGIC)
        try:
            (dimension,) = struct.unpack_from("<I", data, off)
            off += 4
            (count,) = struct.unpack_from("<Q", data, off)
            off += 8
            index = cls(dimension)
            for _ in range(count):
                (id_len,) = struct.unpack_from("<H", data, off)
                off += 2
                doc_id = data[off : off + id_len].decode("utf-8")
                off += id_len
                vec = np.frombuffer(data, dtype="<f4", count=dimension, offset=off)
                off += 4 * dimension
                index._ids.append(doc_id)
                index._id_set.add(doc_id)
                index._rows.append(np.array(vec, dtype=np.float32))
        except (struct.error, UnicodeDecodeError, ValueError) as exc:
            raise IndexFormatError(f"{path}: truncated or corrupt index: {exc}") from exc
        if off != len(data):
            raise IndexFormatError(f"{path}: {len(data) - off} trailing bytes")
        return index


def metadata_path_for(index_path: str | Path) -> Path:
    return Path(str(index_path) + ".meta")


class MetadataStore:
    """SQLite-backed document metadata, keyed by doc id."""

    def __init__(self, path: str | Path = ":memory:"):
        self.path = str(path)
        if self.path != ":memory:":
            Path(self.path).parent.mkdir(parents=True, exist_ok=True)
        self._db = sqlite3.connect(self.path, check_same_thread=False)
        self._db.execute(
            "CREATE TABLE IF NOT EXISTS docs ("
            " doc_id TEXT PRIMARY KEY, title TEXT NOT NULL,"
            " abstract TEXT NOT NULL, authors TEXT NOT NULL,"
            " year INTEGER, url TEXT)"
        )
        self._db.commit()

    def put(self, doc: CorpusDocument) -> None:
        self._db.execute(
            "INSERT OR REPLACE INTO docs VALUES (?, ?, ?, ?, ?, ?)",
            (
                doc.doc_id,
                doc.title,
                doc.abstract,
                json.dumps(list(doc.authors), ensure_ascii=False),
                doc.year,
                doc.url,
            ),
        )
        self._db.commit()

    def get(self, doc_id: str) -> CorpusDocument | None:
        row = self._db.execute(
            "SELECT doc_id, title, abstract, authors, year, url FROM docs WHERE doc_id = ?",
            (doc_id,),
        ).fetchone()
        if row is None:
            return None
        return CorpusDocument(
            doc_id=row[0],
            title=row[1],
            abstract=row[2],
            authors=tuple(json.loads(row[3])),
            year=row[4],
            url=row[5],
        )

    def __len__(self) -> int:
        return self._db.execute("SELECT COUNT(*) FROM docs").fetchone()[0]

    def close(self) -> None:
        self._db.close()


def read_corpus_jsonl(path: str | Path) -> Iterator[object]:
    """Yield parsed corpus records; unparseable lines yield None (counted as malformed)."""
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.strip()
            if not raw:
                continue
            try:
                yield json.loads(raw)
            except json.JSONDecodeError:
                yield None


def _coerce_document(rec: object) -> CorpusDocument | None:
    if not isinstance(rec, dict):
        return None
    doc_id, title = rec.get("id"), rec.get("title")
    if not isinstance(doc_id, str) or not doc_id or not isinstance(title, str):
        return None
    abstract = rec.get("abstract")
    if abstract is not None and not isinstance(abstract, str):
        return None
    authors = rec.get("authors", [])
    if not isinstance(authors, list) or not all(isinstance(a, str) for a in authors):
        return None
    year = rec.get("year")
    if year is not None and not isinstance(year, int):
        return None
    url = rec.get("url")
    if url is not None and not isinstance(url, str):
        return None
    return CorpusDocument(
        doc_id=doc_id,
        title=title,
        abstract=abstract or "",
        authors=tuple(authors),
        year=year,
        url=url,
    )


def ingest_corpus(
    records: Iterable[object],
    embedder: Embedder,
    metadata: MetadataStore | None = None,
) -> tuple[VectorIndex, MetadataStore, IngestStats]:
    """Embed and index every well-formed record with a non-empty abstract.

    Records without an abstract are filtered (titles alone retrieve poorly),
    duplicate ids are rejected, malformed records are counted and skipped.
    """
    index = VectorIndex(embedder.dimension)
    store = metadata if metadata is not None else MetadataStore()
    stats = IngestStats()
    for rec in records:
        stats.records_in += 1
        doc = _coerce_document(rec)
        if doc is None:
            stats.malformed += 1
            continue
        if not doc.abstract.strip():
            stats.filtered_no_abstract += 1
            continue
        if doc.doc_id in index._id_set:
            stats.rejected_duplicate += 1
            continue
        passage = f"{PASSAGE_PREFIX}{doc.title} {doc.abstract}"
        index.add(doc.doc_id, embedder.embed(passage))
        store.put(doc)
        stats.indexed += 1
    return index, store, stats


def embed_query(text: str, embedder: Embedder) -> np.ndarray:
    if not text:
        raise ValueError("cannot embed an empty query")
    return embedder.embed(QUERY_PREFIX + text)


def mrr_at_k(
    run: Mapping[str, Sequence[str]],
    qrels: Mapping[str, set[str] | frozenset[str]],
    k: int = 10,
) -> float:
    """Mean reciprocal rank at cutoff ``k`` over the run's queries.

    A query scores 1/rank of its first relevant document within the top
    ``k``, else 0.  Every run query must appear in qrels.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not run:
        raise ValueError("run is empty")
    total = 0.0
    for query_id, ranking in run.items():
        if query_id not in qrels:
            raise KeyError(f"query {query_id!r} missing from qrels")
        relevant = qrels[query_id]
        for position, doc_id in enumerate(ranking[:k], start=1):
            if doc_id in relevant:
                total += 1.0 / position
                break
    return total / len(run)


def load_qrels(path: str | Path) -> dict[str, set[str]]:
    """Parse 'query_id doc_id' lines (whitespace-separated)."""
    qrels: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: want 'query_id doc_id', got {raw!r}")
            qrels.setdefault(parts[0], set()).add(parts[1])
    return qrels


def load_run(path: str | Path) -> dict[str, list[str]]:
    """Parse 'query_id doc_id rank score' lines into per-query rankings."""
    rows: dict[str, list[tuple[int, str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise ValueError(
                    f"{path}:{lineno}: want 'query_id doc_id rank score', got {raw!r}"
                )
            query_id, doc_id, rank_s, _score = parts
            try:
                rank = int(rank_s)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad rank {rank_s!r}") from exc
            rows.setdefault(query_id, []).append((rank, doc_id))
    return {
        qid: [doc_id for _, doc_id in sorted(pairs)] for qid, pairs in rows.items()
    }
