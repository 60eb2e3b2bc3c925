"""Document-term corpora on disk.

A corpus is three UTF-8 text files:

* ``*.mtx`` -- header ``%%matrix d n nnz`` then ``row col value`` triples,
  1-indexed, rows are terms and columns are documents;
* ``*.labels`` -- one ``-1`` or ``+1`` per line, one line per document;
* ``*.vocab`` -- one term per line, one line per matrix row.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import List

import numpy as np
import scipy.sparse as sp

from .datagen import write_vector
from .linalg import FeatureMatrix, FormatError, read_matrix, write_matrix

DEMO_CORPORA = ("demo_arts_navy", "demo_travel_sailing")


class EmptyCorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Corpus:
    matrix: FeatureMatrix
    labels: np.ndarray
    vocabulary: List[str]

    def __post_init__(self):
        if len(self.vocabulary) != self.matrix.d:
            raise ValueError(f"{len(self.vocabulary)} terms for {self.matrix.d} matrix rows")
        if self.labels.size != self.matrix.n:
            raise ValueError(f"{self.labels.size} labels for {self.matrix.n} documents")


def _read_lines(path) -> List[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\r\n") for line in fh]


def read_labels(path) -> np.ndarray:
    labels = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        s = line.strip()
        if not s:
            continue
        try:
            v = int(float(s))
        except ValueError:
            raise FormatError(path, lineno, f"cannot parse label {s!r}") from None
        if v not in (-1, 1) or float(s) != v:
            raise FormatError(path, lineno, f"label must be -1 or +1, got {s!r}")
        labels.append(v)
    return np.array(labels, dtype=int)


def read_vector(path) -> np.ndarray:
    vals = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        s = line.strip()
        if not s:
            continue
        try:
            vals.append(float(s))
        except ValueError:
            raise FormatError(path, lineno, f"cannot parse number {s!r}") from None
    return np.array(vals)


def read_vocabulary(path) -> List[str]:
    terms = _read_lines(path)
    while terms and terms[-1] == "":
        terms.pop()
    for lineno, t in enumerate(terms, start=1):
        if not t.strip():
            raise FormatError(path, lineno, "empty term")
    return terms


def load_corpus(matrix_path, labels_path, vocab_path) -> Corpus:
    """Load and cross-check the three corpus files."""
    matrix = read_matrix(matrix_path)
    labels = read_labels(labels_path)
    vocab = read_vocabulary(vocab_path)
    if labels.size != matrix.n:
        raise ValueError(f"{labels_path}: {labels.size} labels but the matrix has "
                         f"{matrix.n} documents")
    if len(vocab) != matrix.d:
        raise ValueError(f"{vocab_path}: {len(vocab)} terms but the matrix has "
                         f"{matrix.d} rows")
    vals = matrix.values
    data = vals.data if sp.issparse(vals) else vals
    if np.any(data < 0):
        raise ValueError(f"{matrix_path}: term weights must be nonnegative")
    return Corpus(matrix, labels, vocab)


def save_corpus(corpus: Corpus, prefix) -> dict:
    prefix = Path(prefix)
    paths = {
        "matrix": prefix.with_suffix(".mtx"),
        "labels": prefix.with_suffix(".labels"),
        "vocab": prefix.with_suffix(".vocab"),
    }
    write_matrix(paths["matrix"], corpus.matrix)
    write_vector(paths["labels"], corpus.labels.astype(int))
    paths["vocab"].write_text("\n".join(corpus.vocabulary) + "\n", encoding="utf-8")
    return {k: str(v) for k, v in paths.items()}


def filter_short_terms(corpus: Corpus, min_length: int = 5) -> Corpus:
    """Drop terms shorter than ``min_length`` characters.

    The default removes every term of length at most four.
    """
    if min_length < 1:
        raise ValueError("min_length must be >= 1")
    keep = np.array([len(t) >= min_length for t in corpus.vocabulary], dtype=bool)
    if not keep.any():
        raise EmptyCorpusError(f"no term has length >= {min_length}")
    rows = np.flatnonzero(keep)
    return Corpus(
        FeatureMatrix(corpus.matrix.values[rows]),
        corpus.labels,
        [corpus.vocabulary[i] for i in rows],
    )


def demo_corpus_paths(name: str) -> dict:
    """Paths of a bundled demo corpus (see ``DEMO_CORPORA``)."""
    if name not in DEMO_CORPORA:
        raise KeyError(f"unknown demo corpus {name!r}; choose from {DEMO_CORPORA}")
    base = resources.files("spectralfs") / "data"
    return {
        "matrix": str(base / f"{name}.mtx"),
        "labels": str(base / f"{name}.labels"),
        "vocab": str(base / f"{name}.vocab"),
    }


def load_demo_corpus(name: str) -> Corpus:
    p = demo_corpus_paths(name)
    return load_corpus(p["matrix"], p["labels"], p["vocab"])
