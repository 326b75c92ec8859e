"""Word/document occurrence matrix and cosine similarities between word vectors."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Corpus, Vocabulary

logger = logging.getLogger(__name__)


class MatrixError(ValueError):
    pass


@dataclass(frozen=True)
class WordDocumentMatrix:
    """Documents as rows (cases), words as columns (variables)."""

    words: tuple[str, ...]
    doc_ids: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != (len(self.doc_ids), len(self.words)):
            raise MatrixError(f"counts shape {counts.shape} does not match "
                              f"{len(self.doc_ids)} docs x {len(self.words)} words")
        if not np.issubdtype(counts.dtype, np.integer):
            raise MatrixError("counts must be integers")
        if (counts < 0).any():
            raise MatrixError("counts must be non-negative")
        empty = [w for w, s in zip(self.words, counts.sum(axis=0)) if s == 0]
        if empty:
            raise MatrixError(f"all-zero column(s) for: {', '.join(empty)}")
        counts = counts.astype(np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    def column_sums(self) -> dict[str, int]:
        return dict(zip(self.words, (int(s) for s in self.counts.sum(axis=0))))


@dataclass(frozen=True)
class SimilarityMatrix:
    words: tuple[str, ...]
    values: np.ndarray


def build_word_document_matrix(corpus: Corpus, vocab: Vocabulary | Sequence[str]) -> WordDocumentMatrix:
    """Count vocabulary words per document; other tokens are ignored."""
    words = tuple(vocab.words if isinstance(vocab, Vocabulary) else vocab)
    if not words:
        raise MatrixError("vocabulary is empty")
    index = {w: j for j, w in enumerate(words)}
    counts = np.zeros((len(corpus), len(words)), dtype=np.int64)
    for i, doc in enumerate(corpus.documents):
        for tok in doc.tokens:
            j = index.get(tok)
            if j is not None:
                counts[i, j] += 1
    return WordDocumentMatrix(words, tuple(corpus.doc_ids), counts)


def cosine_similarity(x: Sequence[float], y: Sequence[float]) -> float:
    """Salton's cosine between two count vectors; 0.0 (with a warning) for a zero vector."""
    if len(x) != len(y):
        raise MatrixError(f"length mismatch: {len(x)} vs {len(y)}")
    dot = xx = yy = 0.0
    for a, b in zip(x, y):
        a = float(a)
        b = float(b)
        dot += a * b
        xx += a * a
        yy += b * b
    if xx == 0.0 or yy == 0.0:
        logger.warning("cosine of a zero-norm vector set to 0")
        return 0.0
    return dot / (math.sqrt(xx) * math.sqrt(yy))


def cosine_matrix(m: WordDocumentMatrix) -> SimilarityMatrix:
    """Pairwise cosine over word columns.

    Integer dot products are exact, so results do not depend on summation
    order. The upper triangle is mirrored to make the result exactly symmetric.
    """
    c = m.counts
    gram = c.T @ c  # exact int64
    norms = np.sqrt(np.diag(gram).astype(np.float64))
    p = len(m.words)
    zero = norms == 0
    if zero.any():
        logger.warning("zero-norm word vectors: %s", [m.words[j] for j in np.flatnonzero(zero)])
    safe = np.where(zero, 1.0, norms)
    values = gram / np.outer(safe, safe)
    values[zero, :] = 0.0
    values[:, zero] = 0.0
    iu = np.triu_indices(p, 1)
    values[(iu[1], iu[0])] = values[iu]
    values[np.diag_indices(p)] = np.where(zero, 0.0, 1.0)
    np.clip(values, 0.0, 1.0, out=values)
    return SimilarityMatrix(m.words, values)


def write_matrix_csv(m: WordDocumentMatrix, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["doc", *m.words])
        for doc_id, row in zip(m.doc_ids, m.counts):
            w.writerow([doc_id, *(int(v) for v in row)])


def read_matrix_csv(path: str | Path) -> WordDocumentMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MatrixError(f"{path}: empty file")
    header, body = rows[0], [r for r in rows[1:] if r]
    words = tuple(header[1:])
    try:
        counts = np.array([[int(v) for v in r[1:]] for r in body], dtype=np.int64)
    except ValueError as exc:
        raise MatrixError(f"{path}: non-integer cell ({exc})") from exc
    if counts.ndim != 2 or counts.shape[1] != len(words):
        raise MatrixError(f"{path}: ragged rows")
    return WordDocumentMatrix(words, tuple(r[0] for r in body), counts)
