"""Immutable retrieval index over lemmatized chunks: BM25 and averaged
word-embedding scoring with deterministic top-k selection.

The BM25 variant uses the non-negative IDF form
``ln(1 + (N - df + 0.5) / (df + 0.5))``; each query-lemma occurrence
contributes a full term score (bag semantics). Ties are broken by chunk
id ascending, so rankings are reproducible.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimMismatchError,
    DuplicateChunkIdError,
    EmbeddingParseError,
    EmptyCorpusError,
    UnknownChunkError,
    UnlemmatizedChunkError,
)
from .textproc import DocumentChunk

log = logging.getLogger(__name__)

_WORD_RE = re.compile(r"\w", re.UNICODE)


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.5
    b: float = 0.75

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must be in [0, 1]")


@dataclass(frozen=True)
class ScoredChunk:
    chunk_id: str
    score: float
    rank: int  # 1-based, dense


@dataclass(frozen=True)
class RetrievalIndex:
    """Term statistics over a lemmatized corpus. Immutable after build."""

    chunks: tuple[DocumentChunk, ...]
    params: Bm25Params
    doc_freq: dict[str, int]
    doc_len: dict[str, int]
    avg_len: float
    postings: dict[str, list[tuple[str, int]]]  # lemma -> [(chunk_id, tf)]
    _by_id: dict[str, DocumentChunk] = field(repr=False, default_factory=dict)

    def chunk(self, chunk_id: str) -> DocumentChunk:
        try:
            return self._by_id[chunk_id]
        except KeyError:
            raise UnknownChunkError(chunk_id) from None

    @property
    def size(self) -> int:
        return len(self.chunks)


def build_index(chunks: list[DocumentChunk], params: Bm25Params | None = None) -> RetrievalIndex:
    """Build the inverted index; raises on duplicate ids or missing lemmas."""
    if not chunks:
        raise EmptyCorpusError("cannot index an empty corpus")
    params = params or Bm25Params()

    by_id: dict[str, DocumentChunk] = {}
    doc_freq: dict[str, int] = {}
    doc_len: dict[str, int] = {}
    postings: dict[str, list[tuple[str, int]]] = {}

    for chunk in chunks:
        if chunk.id in by_id:
            raise DuplicateChunkIdError(chunk.id)
        if chunk.lemmatized_text is None or (
            not chunk.lemmatized_text and _WORD_RE.search(chunk.raw_text)
        ):
            raise UnlemmatizedChunkError(chunk.id)
        by_id[chunk.id] = chunk
        doc_len[chunk.id] = len(chunk.lemmatized_text)
        tf: dict[str, int] = {}
        for lemma in chunk.lemmatized_text:
            tf[lemma] = tf.get(lemma, 0) + 1
        for lemma, count in tf.items():
            doc_freq[lemma] = doc_freq.get(lemma, 0) + 1
            postings.setdefault(lemma, []).append((chunk.id, count))

    avg_len = sum(doc_len.values()) / len(chunks)
    return RetrievalIndex(
        chunks=tuple(chunks),
        params=params,
        doc_freq=doc_freq,
        doc_len=doc_len,
        avg_len=avg_len,
        postings=postings,
        _by_id=by_id,
    )


def idf(index: RetrievalIndex, lemma: str) -> float:
    df = index.doc_freq.get(lemma, 0)
    n = index.size
    return math.log(1.0 + (n - df + 0.5) / (df + 0.5))


def bm25_score(index: RetrievalIndex, query: list[str], chunk_id: str) -> float:
    """BM25 score of one chunk against a lemmatized query."""
    chunk = index.chunk(chunk_id)
    params = index.params
    length = index.doc_len[chunk_id]
    if index.avg_len > 0:
        norm = params.k1 * (1.0 - params.b + params.b * length / index.avg_len)
    else:
        norm = params.k1
    tf: dict[str, int] = {}
    assert chunk.lemmatized_text is not None
    for lemma in chunk.lemmatized_text:
        tf[lemma] = tf.get(lemma, 0) + 1
    score = 0.0
    for lemma in query:
        f = tf.get(lemma, 0)
        if f == 0:
            continue
        score += idf(index, lemma) * f * (params.k1 + 1.0) / (f + norm)
    return score


# --- embeddings ---

@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]

    def __contains__(self, lemma: str) -> bool:
        return lemma in self.vectors


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Parse whitespace-separated ``lemma v1 ... vdim`` lines.

    The dimension is inferred from the first line; later lines with a
    different arity are rejected. Duplicate lemmas: last occurrence wins,
    with a logged warning.
    """
    path = Path(path)
    dim: int | None = None
    vectors: dict[str, np.ndarray] = {}
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) < 2:
                raise EmbeddingParseError(line_no, "expected 'lemma v1 ... vdim'")
            lemma, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise DimMismatchError(line_no, dim, len(values))
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingParseError(line_no, str(exc)) from None
            if lemma in vectors:
                log.warning("duplicate embedding for %r at line %d; keeping last", lemma, line_no)
            vectors[lemma] = vec
    if dim is None:
        raise EmbeddingParseError(0, "empty embedding file")
    return EmbeddingTable(dim=dim, vectors=vectors)


@dataclass(frozen=True)
class AveragedEmbedding:
    vector: np.ndarray
    matched: int
    total: int

    @property
    def all_oov(self) -> bool:
        return self.matched == 0


def embed_average(lemmas: list[str], table: EmbeddingTable) -> AveragedEmbedding:
    """Arithmetic mean of the vectors of in-vocabulary lemmas.

    OOV lemmas are skipped; an all-OOV input yields the zero vector with
    ``all_oov`` set (flagged, never an error).
    """
    acc = np.zeros(table.dim, dtype=np.float64)
    matched = 0
    for lemma in lemmas:
        vec = table.vectors.get(lemma)
        if vec is not None:
            acc += vec
            matched += 1
    if matched:
        acc /= matched
    return AveragedEmbedding(vector=acc, matched=matched, total=len(lemmas))


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; defined as 0.0 when either vector is zero."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


# --- top-k ---

def rank_all_bm25(index: RetrievalIndex, query: list[str]) -> list[tuple[str, float]]:
    scores = {cid: 0.0 for cid in index.doc_len}
    params = index.params
    for lemma in query:
        for chunk_id, f in index.postings.get(lemma, ()):
            length = index.doc_len[chunk_id]
            if index.avg_len > 0:
                norm = params.k1 * (1.0 - params.b + params.b * length / index.avg_len)
            else:
                norm = params.k1
            scores[chunk_id] += idf(index, lemma) * f * (params.k1 + 1.0) / (f + norm)
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


def rank_all_embedding(
    index: RetrievalIndex, query: list[str], table: EmbeddingTable
) -> list[tuple[str, float]]:
    q = embed_average(query, table)
    if q.all_oov:
        log.warning("query embeds to the zero vector (all lemmas OOV); empty result")
        return []
    scores = {}
    for chunk in index.chunks:
        assert chunk.lemmatized_text is not None
        d = embed_average(chunk.lemmatized_text, table)
        scores[chunk.id] = cosine(q.vector, d.vector)
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


def top_k(
    index: RetrievalIndex,
    query_lemmas: list[str],
    k: int,
    table: EmbeddingTable | None = None,
) -> list[ScoredChunk]:
    """Top-k chunks by BM25, or by cosine of averaged embeddings when
    ``table`` is given. Fewer than k results only if the corpus (or an
    all-OOV embedding query) cannot supply k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if table is None:
        ranking = rank_all_bm25(index, query_lemmas)
    else:
        ranking = rank_all_embedding(index, query_lemmas, table)
    return [
        ScoredChunk(chunk_id=cid, score=score, rank=i + 1)
        for i, (cid, score) in enumerate(ranking[:k])
    ]


# --- persistence ---

INDEX_MAGIC = "#vakya-index"
INDEX_VERSION = 1


def save_index(index: RetrievalIndex, path: str | Path) -> None:
    """Write the index as a line-oriented file: a magic/version header, a
    params line, then one JSON document per chunk."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"{INDEX_MAGIC} v{INDEX_VERSION}\n")
        fh.write(json.dumps({"k1": index.params.k1, "b": index.params.b}) + "\n")
        for chunk in index.chunks:
            fh.write(
                json.dumps(
                    {
                        "id": chunk.id,
                        "span": list(chunk.source_ref),
                        "raw": chunk.raw_text,
                        "lemmas": chunk.lemmatized_text,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_index(path: str | Path) -> RetrievalIndex:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith(INDEX_MAGIC):
            raise ValueError(f"{path}: not a vakya index file")
        version = header.removeprefix(INDEX_MAGIC).strip()
        if version != f"v{INDEX_VERSION}":
            raise ValueError(f"{path}: unsupported index version {version!r}")
        params = Bm25Params(**json.loads(fh.readline()))
        chunks = []
        for line in fh:
            rec = json.loads(line)
            chunks.append(
                DocumentChunk(
                    id=rec["id"],
                    source_ref=tuple(rec["span"]),
                    raw_text=rec["raw"],
                    lemmatized_text=rec["lemmas"],
                )
            )
    return build_index(chunks, params)
