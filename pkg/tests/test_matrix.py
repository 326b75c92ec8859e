from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from cowordmap.corpus import corpus_from_texts
from cowordmap.matrix import (
    MatrixError,
    WordDocumentMatrix,
    build_word_document_matrix,
    cosine_matrix,
    cosine_similarity,
    read_matrix_csv,
    write_matrix_csv,
)
from oracles import cosine_py


def _m(counts):
    counts = np.asarray(counts, dtype=np.int64)
    d, w = counts.shape
    return WordDocumentMatrix(tuple(f"w{j}" for j in range(w)), tuple(str(i + 1) for i in range(d)), counts)


def test_counts_from_corpus_ignore_out_of_vocabulary():
    c = corpus_from_texts(["a b a x", "b c"])
    m = build_word_document_matrix(c, ["a", "b", "c"])
    assert m.counts.tolist() == [[2, 1, 0], [0, 1, 1]]
    assert m.doc_ids == ("1", "2")
    assert m.column_sums() == {"a": 2, "b": 2, "c": 1}


def test_matrix_validation():
    with pytest.raises(MatrixError, match="all-zero"):
        _m([[1, 0], [2, 0]])
    with pytest.raises(MatrixError, match="non-negative"):
        _m([[1, -1], [0, 2]])
    with pytest.raises(MatrixError, match="integers"):
        WordDocumentMatrix(("a",), ("1",), np.array([[0.5]]))
    with pytest.raises(MatrixError, match="shape"):
        WordDocumentMatrix(("a", "b"), ("1",), np.array([[1]]))
    with pytest.raises(MatrixError):
        build_word_document_matrix(corpus_from_texts(["a"]), [])


def test_cosine_hand_values():
    assert cosine_similarity([1, 0], [0, 1]) == 0.0
    assert cosine_similarity([2, 2], [1, 1]) == pytest.approx(1.0)
    # (1*1 + 1*0) / (sqrt 2 * 1)
    assert cosine_similarity([1, 1], [1, 0]) == pytest.approx(2 ** -0.5)


def test_cosine_zero_vector_warns(caplog):
    assert cosine_similarity([0, 0], [1, 2]) == 0.0
    assert "zero-norm" in caplog.text
    with pytest.raises(MatrixError):
        cosine_similarity([1], [1, 2])


def test_cosine_matrix_matches_pairwise_oracle():
    rng = np.random.default_rng(3)
    counts = rng.poisson(0.8, size=(12, 7))
    counts[0] += 1
    m = _m(counts)
    s = cosine_matrix(m).values
    for i in range(7):
        for j in range(7):
            expected = 1.0 if i == j else cosine_py(counts[:, i], counts[:, j])
            assert s[i, j] == pytest.approx(expected, abs=1e-12)


@given(arrays(np.int64, st.tuples(st.integers(1, 8), st.integers(1, 6)), elements=st.integers(0, 5)))
def test_cosine_matrix_properties(counts):
    counts = counts.copy()
    counts[0] += 1  # no all-zero column
    s = cosine_matrix(_m(counts)).values
    assert np.array_equal(s, s.T)
    assert np.all((s >= 0) & (s <= 1))
    assert np.all(np.diag(s) == 1.0)


def test_csv_round_trip(tmp_path):
    m = _m([[1, 0, 3], [0, 2, 1]])
    write_matrix_csv(m, tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "doc,w0,w1,w2"
    back = read_matrix_csv(tmp_path / "m.csv")
    assert back.words == m.words and back.doc_ids == m.doc_ids
    np.testing.assert_array_equal(back.counts, m.counts)


def test_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("doc,a\n1,x\n")
    with pytest.raises(MatrixError, match="non-integer"):
        read_matrix_csv(p)
    p.write_text("")
    with pytest.raises(MatrixError, match="empty"):
        read_matrix_csv(p)
