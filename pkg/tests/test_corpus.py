from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cowordmap.corpus import (
    CorpusError,
    StopwordList,
    TokenizerConfig,
    build_vocabulary,
    bundled_path,
    canonicalize,
    corpus_from_texts,
    corpus_statistics,
    equate_plurals,
    generate_synthetic_corpus,
    load_corpus,
    load_stopwords,
    resolve_filter_order,
    tokenize,
    write_corpus,
)


def test_tokenize_lowercases_and_keeps_internal_hyphens():
    assert tokenize("High-impact journals, the H-index!") == ["high-impact", "journals", "the", "h-index"]


def test_tokenize_drops_numbers_and_dangling_hyphens():
    assert tokenize("In 2004 -- 3.14 and 1990-2000 - well-") == ["in", "and", "well"]


def test_tokenize_splits_on_underscore_and_apostrophe():
    assert tokenize("snake_case it's") == ["snake", "case", "it", "s"]


def test_tokenize_config_without_hyphens():
    assert tokenize("co-word map", TokenizerConfig(keep_hyphens=False)) == ["co", "word", "map"]


def test_tokenize_empty():
    assert tokenize("  \n\t ") == []


def test_bundled_stopwords_has_429_entries(stoplist):
    assert len(stoplist) == 429
    assert "the" in stoplist and "research" not in stoplist


def test_stopwords_from_lines_ignores_comments_and_case():
    sw = StopwordList.from_lines(["# header", "The", "  and  # trailing", ""])
    assert sw.words == frozenset({"the", "and"})


def test_stopword_file_round_trip(tmp_path):
    p = tmp_path / "sw.txt"
    p.write_text("a\nb\n# c\n")
    assert load_stopwords(p).words == frozenset({"a", "b"})


def test_paragraph_split_and_ids(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("One two.\n\n  \nThree\nfour.\n\n\nFive.\n")
    c = load_corpus(p)
    assert c.doc_ids == ["1", "2", "3"]
    assert [d.tokens for d in c.documents] == [("one", "two"), ("three", "four"), ("five",)]


def test_files_split_reads_sorted_txt_files(tmp_path):
    (tmp_path / "b.txt").write_text("beta")
    (tmp_path / "a.txt").write_text("alpha\n\nmore")
    (tmp_path / "skip.md").write_text("ignored")
    c = load_corpus(tmp_path, "files")
    assert [d.tokens for d in c.documents] == [("alpha", "more"), ("beta",)]
    assert load_corpus(tmp_path, "one-doc-per-file").doc_ids == ["1", "2"]


def test_delimiter_split(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("a b|||c|||  |||d")
    assert len(load_corpus(p, "delimiter", delimiter="|||")) == 3


@pytest.mark.parametrize("text", ["", "\n\n  \n"])
def test_zero_documents_is_an_error(tmp_path, text):
    p = tmp_path / "t.txt"
    p.write_text(text)
    with pytest.raises(CorpusError, match="zero documents"):
        load_corpus(p)


def test_bad_split_mode_and_missing_source(tmp_path):
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "nope.txt")
    p = tmp_path / "t.txt"
    p.write_text("x")
    with pytest.raises(CorpusError):
        load_corpus(p, "sentences")
    with pytest.raises(CorpusError):
        load_corpus(p, "files")


def test_equate_plurals_examples():
    canon = equate_plurals(["ranking", "rankings", "news", "indicators", "indicator", "bias", "boss", "bosss"])
    assert canon["rankings"] == "ranking"
    assert canon["indicators"] == "indicator"
    assert canon["news"] == "news"  # "new" does not occur
    assert canon["bias"] == "bias"
    assert canon["bosss"] == "boss"


@given(st.lists(st.text(alphabet="abs", min_size=1, max_size=5), max_size=30))
def test_equate_plurals_is_idempotent(words):
    canon = equate_plurals(words)
    assert set(canon) == set(words)
    for w, c in canon.items():
        assert canon[c] == c
        assert c == w or (w == c + "s")


def test_canonicalize_filters_then_merges(stoplist):
    c = corpus_from_texts(["The rankings and the ranking", "indicators of indicator"])
    out = canonicalize(c, stoplist)
    assert [d.tokens for d in out.documents] == [("ranking", "ranking"), ("indicator", "indicator")]


def test_vocabulary_orders_agree_on_words(manifesto, stoplist):
    plain = canonicalize(manifesto, None)
    a = build_vocabulary(plain, 3, "stop-first", stoplist)
    b = build_vocabulary(plain, 3, "freq-first", stoplist)
    assert a.words == b.words
    assert b.candidates_before_stopwords > len(b)
    assert a.candidates_before_stopwords is None


def test_vocabulary_is_sorted_by_frequency_then_word():
    c = corpus_from_texts(["b a c a b d", "c c"])
    v = build_vocabulary(c, 2)
    assert [(e.word, e.corpus_frequency, e.document_frequency) for e in v.entries] == [
        ("c", 3, 2), ("a", 2, 1), ("b", 2, 1)]


def test_vocabulary_errors():
    c = corpus_from_texts(["a b"])
    with pytest.raises(CorpusError):
        build_vocabulary(c, 0)
    with pytest.raises(CorpusError):
        build_vocabulary(c, 5)
    with pytest.raises(CorpusError):
        resolve_filter_order("random")


def test_manifesto_fixture_shape(manifesto, stoplist):
    stats = corpus_statistics(manifesto, stoplist)
    assert stats["documents"] == 26
    assert stats["unique_after_plurals"] <= stats["unique_after_stopwords"] <= stats["unique_words"]


def test_write_corpus_round_trip(tmp_path):
    c = corpus_from_texts(["alpha beta", "gamma"])
    write_corpus(c, tmp_path / "c.txt")
    back = load_corpus(tmp_path / "c.txt")
    assert [d.tokens for d in back.documents] == [d.tokens for d in c.documents]


def test_synthetic_corpus_is_seeded_and_block_structured():
    c1, th1 = generate_synthetic_corpus(3, 20, 30, 5, seed=7)
    c2, th2 = generate_synthetic_corpus(3, 20, 30, 5, seed=7)
    assert [d.tokens for d in c1.documents] == [d.tokens for d in c2.documents]
    np.testing.assert_array_equal(th1, th2)
    assert all(len(d.tokens) == 30 for d in c1.documents)
    assert set(c1.word_counts()) <= {f"t{t}w{i}" for t in range(3) for i in range(5)}
    np.testing.assert_allclose(th1.sum(axis=1), 1.0)


def test_synthetic_corpus_rejects_bad_sizes():
    with pytest.raises(CorpusError):
        generate_synthetic_corpus(0, 5, 5, 5)


def test_bundled_files_exist():
    for name in ("manifesto.txt", "stopwords.txt", "medium_matrix.csv", "report.schema.json"):
        assert bundled_path(name).is_file()
