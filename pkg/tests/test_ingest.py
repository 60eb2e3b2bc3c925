import numpy as np
import pytest
import scipy.sparse as sp

from spectralfs.ingest import (
    DEMO_CORPORA,
    Corpus,
    EmptyCorpusError,
    demo_corpus_paths,
    filter_short_terms,
    load_corpus,
    load_demo_corpus,
    read_labels,
    read_vocabulary,
    save_corpus,
)
from spectralfs.linalg import FeatureMatrix, FormatError


def write_files(tmp_path, mtx, labels, vocab):
    paths = [tmp_path / "c.mtx", tmp_path / "c.labels", tmp_path / "c.vocab"]
    for p, text in zip(paths, (mtx, labels, vocab)):
        p.write_text(text, encoding="utf-8")
    return paths


def test_small_hand_written_corpus(tmp_path):
    paths = write_files(tmp_path, "%%matrix 2 2 3\n1 1 2\n2 1 1\n2 2 5\n", "1\n-1\n", "ontario\ncat\n")
    c = load_corpus(*paths)
    np.testing.assert_array_equal(c.matrix.dense(), [[2, 0], [1, 5]])
    np.testing.assert_array_equal(c.labels, [1, -1])
    assert c.vocabulary == ["ontario", "cat"]


def test_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    counts = sp.random(6, 5, density=0.5, random_state=1, format="csr")
    counts.data = np.ceil(counts.data * 4)
    c = Corpus(FeatureMatrix(counts), np.where(rng.random(5) < 0.5, -1, 1),
               ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"])
    p = save_corpus(c, tmp_path / "rt")
    back = load_corpus(p["matrix"], p["labels"], p["vocab"])
    np.testing.assert_array_equal(back.matrix.dense(), c.matrix.dense())
    np.testing.assert_array_equal(back.labels, c.labels)
    assert back.vocabulary == c.vocabulary


def test_column_out_of_range_names_line(tmp_path):
    paths = write_files(tmp_path, "%%matrix 2 2 2\n1 1 1\n2 3 1\n", "1\n-1\n", "aaaaa\nbbbbb\n")
    with pytest.raises(FormatError) as exc:
        load_corpus(*paths)
    assert exc.value.line == 3


def test_dimension_inconsistency(tmp_path):
    paths = write_files(tmp_path, "%%matrix 2 2 1\n1 1 1\n", "1\n-1\n1\n", "aaaaa\nbbbbb\n")
    with pytest.raises(ValueError, match="labels"):
        load_corpus(*paths)
    paths = write_files(tmp_path, "%%matrix 2 2 1\n1 1 1\n", "1\n-1\n", "aaaaa\n")
    with pytest.raises(ValueError, match="terms"):
        load_corpus(*paths)


def test_negative_weights_rejected(tmp_path):
    paths = write_files(tmp_path, "%%matrix 1 2 1\n1 1 -1\n", "1\n-1\n", "aaaaa\n")
    with pytest.raises(ValueError, match="nonnegative"):
        load_corpus(*paths)


def test_label_parse_errors(tmp_path):
    p = tmp_path / "l"
    p.write_text("1\n0\n")
    with pytest.raises(FormatError) as exc:
        read_labels(p)
    assert exc.value.line == 2
    p.write_text("1\nyes\n")
    with pytest.raises(FormatError):
        read_labels(p)


def test_vocabulary_empty_term(tmp_path):
    p = tmp_path / "v"
    p.write_text("alpha\n\nbeta\n")
    with pytest.raises(FormatError) as exc:
        read_vocabulary(p)
    assert exc.value.line == 2


def corpus_from_terms(terms, rng=None):
    rng = rng or np.random.default_rng(0)
    m = rng.integers(0, 3, size=(len(terms), 4)).astype(float)
    m[:, 0] += np.arange(1, len(terms) + 1)  # distinct row fingerprints
    return Corpus(FeatureMatrix(sp.csr_matrix(m)), np.array([1, -1, 1, -1]), list(terms))


def test_filter_removes_short_terms():
    c = filter_short_terms(corpus_from_terms(["cat", "ontario"]), 5)
    assert c.vocabulary == ["ontario"]
    assert c.matrix.d == 1


def test_filter_identity_when_all_long():
    c = corpus_from_terms(["sailing", "harbour", "regatta"])
    f = filter_short_terms(c, 5)
    assert f.vocabulary == c.vocabulary
    np.testing.assert_array_equal(f.matrix.dense(), c.matrix.dense())


def test_filter_keeps_rows_aligned():
    terms = ["navy", "frigate", "art", "gallery", "oil", "canvas", "sea", "voyage", "ship", "museum"]
    c = corpus_from_terms(terms)
    f = filter_short_terms(c, 5)
    # independent scan of the vocabulary
    kept = [i for i, t in enumerate(terms) if len(t) > 4]
    assert f.vocabulary == [terms[i] for i in kept]
    np.testing.assert_array_equal(f.matrix.dense(), c.matrix.dense()[kept])
    np.testing.assert_array_equal(f.labels, c.labels)
    assert f.matrix.n == c.matrix.n
    assert all(len(t) > 4 for t in f.vocabulary)


def test_filter_errors():
    with pytest.raises(EmptyCorpusError):
        filter_short_terms(corpus_from_terms(["cat", "dog"]), 5)
    with pytest.raises(ValueError):
        filter_short_terms(corpus_from_terms(["cat"]), 0)


@pytest.mark.parametrize("name", DEMO_CORPORA)
def test_demo_corpora_load(name):
    c = load_demo_corpus(name)
    assert c.matrix.storage == "sparse"
    assert set(np.unique(c.labels)) == {-1, 1}
    f = filter_short_terms(c)
    assert f.matrix.d > 400  # room for r = 400
    assert any(len(t) <= 4 for t in c.vocabulary)


def test_unknown_demo_corpus():
    with pytest.raises(KeyError):
        demo_corpus_paths("nope")
