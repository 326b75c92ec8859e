"""Corpus ingestion: splitting, tokenizing, stopword filtering and vocabulary selection."""

from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

SPLIT_MODES = ("paragraphs", "files", "delimiter")
FILTER_ORDERS = ("stopwords-then-frequency", "frequency-then-stopwords")

_SPLIT_ALIASES = {"one-doc-per-file": "files"}
_ORDER_ALIASES = {"stop-first": "stopwords-then-frequency", "freq-first": "frequency-then-stopwords"}

# a run of letters/digits, optionally joined to further runs by single internal hyphens
_TOKEN_RE = re.compile(r"[^\W_]+(?:-[^\W_]+)*")
_BLANK_LINES_RE = re.compile(r"\n[ \t\r\f\v]*\n")


class CorpusError(ValueError):
    """Raised when a corpus cannot be built from the given input."""


@dataclass(frozen=True)
class Document:
    id: str
    raw_text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    provenance: str = ""

    def __post_init__(self):
        if not self.documents:
            raise CorpusError("corpus has zero documents")
        ids = [d.id for d in self.documents]
        if len(set(ids)) != len(ids):
            raise CorpusError("document ids are not unique")

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def doc_ids(self) -> list[str]:
        return [d.id for d in self.documents]

    def token_count(self) -> int:
        return sum(len(d.tokens) for d in self.documents)

    def word_counts(self) -> Counter:
        counts: Counter = Counter()
        for doc in self.documents:
            counts.update(doc.tokens)
        return counts

    def map_tokens(self, fn) -> "Corpus":
        """Return a new corpus whose token sequences are ``fn(tokens)``."""
        docs = tuple(Document(d.id, d.raw_text, tuple(fn(d.tokens))) for d in self.documents)
        return Corpus(docs, self.provenance)


@dataclass(frozen=True)
class StopwordList:
    words: frozenset[str]

    def __post_init__(self):
        if any(w != w.lower() for w in self.words):
            raise CorpusError("stopwords must be lowercase")

    def __contains__(self, word: str) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def empty(cls) -> "StopwordList":
        return cls(frozenset())

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "StopwordList":
        words = set()
        for line in lines:
            line = line.split("#", 1)[0].strip().lower()
            if line:
                words.add(line)
        return cls(frozenset(words))


@dataclass(frozen=True)
class VocabEntry:
    word: str
    corpus_frequency: int
    document_frequency: int


@dataclass(frozen=True)
class Vocabulary:
    entries: tuple[VocabEntry, ...]
    min_frequency: int
    stopwords_applied: bool
    order: str = FILTER_ORDERS[0]
    # words passing the frequency cut before stopword removal (frequency-first order only)
    candidates_before_stopwords: int | None = None

    @property
    def words(self) -> list[str]:
        return [e.word for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.frequencies

    @property
    def frequencies(self) -> dict[str, int]:
        return {e.word: e.corpus_frequency for e in self.entries}


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    drop_digits: bool = True
    keep_hyphens: bool = True


def tokenize(raw_text: str, config: TokenizerConfig | None = None) -> list[str]:
    """Split text into lowercase word forms.

    Anything that is neither alphanumeric nor a hyphen between two word
    characters separates tokens. Tokens made only of digits (and hyphens)
    are dropped.

    >>> tokenize("High-impact journals, 2015.")
    ['high-impact', 'journals']
    """
    config = config or TokenizerConfig()
    text = raw_text.lower() if config.lowercase else raw_text
    tokens = _TOKEN_RE.findall(text)
    if not config.keep_hyphens:
        tokens = [part for tok in tokens for part in tok.split("-")]
    if config.drop_digits:
        tokens = [t for t in tokens if not t.replace("-", "").isdigit()]
    return tokens


def load_stopwords(path: str | Path | None = None) -> StopwordList:
    """Read a stopword file; ``None`` loads the bundled 429-word English list."""
    if path is None:
        text = resources.files("cowordmap.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return StopwordList.from_lines(text.splitlines())


def bundled_path(name: str) -> Path:
    """Filesystem path of a bundled data file (``manifesto.txt``, ``stopwords.txt``...)."""
    return Path(str(resources.files("cowordmap.data").joinpath(name)))


def _split_units(text: str, split_mode: str, delimiter: str | None) -> list[str]:
    if split_mode == "paragraphs":
        units = _BLANK_LINES_RE.split(text.replace("\r\n", "\n"))
    elif split_mode == "delimiter":
        if not delimiter:
            raise CorpusError("delimiter split mode needs a delimiter string")
        units = text.split(delimiter)
    else:
        raise CorpusError(f"cannot split a single file in mode {split_mode!r}")
    return [" ".join(u.split()) for u in units if u.strip()]


def load_corpus(
    source: str | Path,
    split_mode: str = "paragraphs",
    delimiter: str | None = None,
    tokenizer: TokenizerConfig | None = None,
) -> Corpus:
    """Load raw text into a tokenized corpus.

    In ``paragraphs`` mode blank lines delimit documents; ``files`` reads every
    ``.txt`` file of a directory (sorted by name) as one document; ``delimiter``
    splits a single file on a literal separator. Documents get sequential ids
    starting at 1. Tokens are tokenized only; stopwords are still present.
    """
    split_mode = _SPLIT_ALIASES.get(split_mode, split_mode)
    if split_mode not in SPLIT_MODES:
        raise CorpusError(f"unknown split mode {split_mode!r}")
    source = Path(source)
    if not source.exists():
        raise CorpusError(f"source does not exist: {source}")

    try:
        if split_mode == "files":
            if not source.is_dir():
                raise CorpusError(f"files mode needs a directory: {source}")
            units = []
            for p in sorted(source.glob("*.txt")):
                text = " ".join(p.read_text("utf-8").split())
                if text:
                    units.append(text)
        else:
            if source.is_dir():
                raise CorpusError(f"{split_mode} mode needs a file, got a directory: {source}")
            units = _split_units(source.read_text("utf-8"), split_mode, delimiter)
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusError(f"cannot read {source}: {exc}") from exc

    if not units:
        raise CorpusError(f"zero documents after splitting {source}")
    docs = tuple(Document(str(i + 1), u, tuple(tokenize(u, tokenizer))) for i, u in enumerate(units))
    return Corpus(docs, provenance=f"{source} ({split_mode})")


def corpus_from_texts(texts: Sequence[str], provenance: str = "in-memory", tokenizer=None) -> Corpus:
    docs = tuple(Document(str(i + 1), t, tuple(tokenize(t, tokenizer))) for i, t in enumerate(texts))
    return Corpus(docs, provenance)


def filter_stopwords(tokens: Iterable[str], stoplist: StopwordList) -> list[str]:
    return [t for t in tokens if t not in stoplist]


def equate_plurals(words: Iterable[str]) -> dict[str, str]:
    """Map each word to its canonical singular form.

    A word ending in ``s`` maps to the word without that ``s`` when the
    shorter form also occurs and is itself canonical. Only one suffix is
    stripped, so ``rankings -> ranking`` while ``ranking`` stays put. Every
    target is a fixed point, which makes the map idempotent.
    """
    vocab = set(words)
    canon: dict[str, str] = {}
    for w in sorted(vocab, key=lambda s: (len(s), s)):
        stem = w[:-1]
        if w.endswith("s") and stem in vocab and canon.get(stem) == stem:
            canon[w] = stem
        else:
            canon[w] = w
    return canon


def canonicalize(corpus: Corpus, stoplist: StopwordList | None = None, plurals: bool = True) -> Corpus:
    """Drop stopwords, then replace plural forms by their singular over the whole corpus."""
    if stoplist is not None and len(stoplist):
        corpus = corpus.map_tokens(lambda toks: filter_stopwords(toks, stoplist))
    if plurals:
        canon = equate_plurals(corpus.word_counts())
        corpus = corpus.map_tokens(lambda toks: [canon[t] for t in toks])
    return corpus


def resolve_filter_order(name: str) -> str:
    """Canonical filter-order name; accepts the short forms ``stop-first`` and ``freq-first``."""
    order = _ORDER_ALIASES.get(name, name)
    if order not in FILTER_ORDERS:
        raise CorpusError(f"unknown filter order {name!r}")
    return order


def _entries(counts: Counter, doc_freq: Counter, keep) -> tuple[VocabEntry, ...]:
    rows = [VocabEntry(w, c, doc_freq[w]) for w, c in counts.items() if keep(w, c)]
    rows.sort(key=lambda e: (-e.corpus_frequency, e.word))
    return tuple(rows)


def build_vocabulary(
    corpus: Corpus,
    min_frequency: int = 1,
    order: str = FILTER_ORDERS[0],
    stoplist: StopwordList | None = None,
) -> Vocabulary:
    """Select the working vocabulary by frequency.

    With ``stopwords-then-frequency`` stopwords are removed before the
    frequency cut; with ``frequency-then-stopwords`` the cut comes first and the
    number of words it retained is recorded before stopwords are dropped.
    Entries are ordered by descending corpus frequency, then by word.
    """
    order = resolve_filter_order(order)
    if min_frequency < 1:
        raise CorpusError("min_frequency must be >= 1")
    stoplist = stoplist or StopwordList.empty()

    counts = corpus.word_counts()
    doc_freq: Counter = Counter()
    for doc in corpus.documents:
        doc_freq.update(set(doc.tokens))

    candidates = None
    if order == "stopwords-then-frequency":
        entries = _entries(counts, doc_freq, lambda w, c: w not in stoplist and c >= min_frequency)
    else:
        frequent = _entries(counts, doc_freq, lambda w, c: c >= min_frequency)
        candidates = len(frequent)
        entries = tuple(e for e in frequent if e.word not in stoplist)
    if not entries:
        raise CorpusError("vocabulary is empty after filtering")
    return Vocabulary(entries, min_frequency, bool(len(stoplist)), order, candidates)


def corpus_statistics(corpus: Corpus, stoplist: StopwordList) -> dict[str, int]:
    """Raw token and type counts before and after stopword removal."""
    counts = corpus.word_counts()
    kept = {w: c for w, c in counts.items() if w not in stoplist}
    canonical = canonicalize(corpus, stoplist)
    return {
        "documents": len(corpus),
        "tokens": sum(counts.values()),
        "unique_words": len(counts),
        "tokens_after_stopwords": sum(kept.values()),
        "unique_after_stopwords": len(kept),
        "unique_after_plurals": len(canonical.word_counts()),
    }


def generate_synthetic_corpus(
    num_topics: int,
    num_docs: int,
    doc_length: int,
    vocab_block_size: int,
    seed: int = 0,
    alpha: float = 0.1,
    word_concentration: float = 1.0,
) -> tuple[Corpus, np.ndarray]:
    """Sample a corpus from block-structured LDA.

    Topic ``t`` puts all its mass on its own block of ``vocab_block_size``
    words (``t{t}w{i}``), with weights drawn from a symmetric Dirichlet. Each
    document draws topic proportions from Dirichlet(``alpha``) and then
    ``doc_length`` tokens. Returns the corpus and the per-document topic
    proportions used to generate it.
    """
    for name, value in [("num_topics", num_topics), ("num_docs", num_docs),
                        ("doc_length", doc_length), ("vocab_block_size", vocab_block_size)]:
        if value < 1:
            raise CorpusError(f"{name} must be >= 1, got {value}")
    rng = np.random.default_rng(seed)
    words = [[f"t{t}w{i}" for i in range(vocab_block_size)] for t in range(num_topics)]
    phi = rng.dirichlet(np.full(vocab_block_size, word_concentration), size=num_topics)
    if num_topics == 1:
        theta = np.ones((num_docs, 1))
    else:
        theta = rng.dirichlet(np.full(num_topics, alpha), size=num_docs)

    texts = []
    for d in range(num_docs):
        topics = rng.choice(num_topics, size=doc_length, p=theta[d])
        toks = []
        for t in topics:
            toks.append(words[t][rng.choice(vocab_block_size, p=phi[t])])
        texts.append(" ".join(toks))
    provenance = (f"synthetic(T={num_topics}, D={num_docs}, L={doc_length}, "
                  f"B={vocab_block_size}, seed={seed}, alpha={alpha})")
    return corpus_from_texts(texts, provenance), theta


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write documents as blank-line-separated paragraphs (readable back in paragraphs mode)."""
    Path(path).write_text("\n\n".join(d.raw_text for d in corpus.documents) + "\n", encoding="utf-8")
