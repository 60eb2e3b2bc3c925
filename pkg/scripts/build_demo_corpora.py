"""Regenerate the bundled demo corpora in ``src/spectralfs/data``.

The corpora are synthetic bag-of-words collections over pseudo-word
vocabularies: two document classes share a Zipf-like background and differ
in the rates of a few hundred topical terms. Roughly a fifth of the terms
are four characters or shorter, so the default length filter has work to do.

    python scripts/build_demo_corpora.py
"""

from pathlib import Path

import numpy as np
import scipy.sparse as sp

from spectralfs.ingest import Corpus, save_corpus
from spectralfs.linalg import FeatureMatrix

OUT = Path(__file__).resolve().parents[1] / "src" / "spectralfs" / "data"

ONSETS = ["b", "c", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
          "br", "ch", "dr", "gl", "pl", "st", "tr", "sh", "th"]
VOWELS = ["a", "e", "i", "o", "u", "ai", "ou", "ea"]
CODAS = ["", "", "n", "r", "s", "l", "m", "nd", "st"]


def pseudo_words(count, rng):
    words, seen = [], set()
    while len(words) < count:
        syl = rng.choice([1, 2, 3, 4], p=[0.2, 0.35, 0.3, 0.15])
        w = "".join(rng.choice(ONSETS) + rng.choice(VOWELS) for _ in range(syl))
        w += rng.choice(CODAS)
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def make_corpus(seed, n_docs, n_terms, n_topical, lift, doc_len):
    rng = np.random.default_rng(seed)
    vocab = pseudo_words(n_terms, rng)
    base = 1.0 / np.arange(1, n_terms + 1) ** 0.9
    rng.shuffle(base)
    labels = np.where(rng.random(n_docs) < 0.5, -1, 1)
    topical = rng.choice(n_terms, size=2 * n_topical, replace=False)
    pos, neg = topical[:n_topical], topical[n_topical:]
    cols = []
    for y in labels:
        rate = base.copy()
        boost = pos if y == 1 else neg
        rate[boost] *= lift * rng.gamma(2.0, 0.5, size=boost.size)
        rate /= rate.sum()
        length = rng.poisson(doc_len)
        cols.append(rng.multinomial(length, rate))
    counts = np.array(cols, dtype=float).T
    seen = counts.sum(axis=1) > 0
    vocab = [w for w, keep in zip(vocab, seen) if keep]
    return Corpus(FeatureMatrix(sp.csr_matrix(counts[seen])), labels, vocab)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    specs = {
        "demo_arts_navy": dict(seed=101, n_docs=140, n_terms=2400, n_topical=150,
                               lift=1.9, doc_len=150),
        "demo_travel_sailing": dict(seed=202, n_docs=130, n_terms=2200, n_topical=150,
                                    lift=1.7, doc_len=140),
    }
    for name, kw in specs.items():
        corpus = make_corpus(**kw)
        save_corpus(corpus, OUT / name)
        short = sum(len(t) <= 4 for t in corpus.vocabulary)
        print(f"{name}: d={corpus.matrix.d} n={corpus.matrix.n} short_terms={short}")


if __name__ == "__main__":
    main()
