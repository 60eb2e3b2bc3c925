"""Randomized and baseline feature selectors.

Every selector returns a :class:`~spectralfs.linalg.SamplingScheme` over the
``d`` feature rows of a ``d x n`` matrix.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import (
    DimensionError,
    SamplingScheme,
    SvdFactors,
    as_dense,
    as_feature_matrix,
    random_orthonormal,
    spectral_norm,
)

# Calibrated by ``calibrate_leverage_constant(d=500, rho=5, eps=0.5, delta=0.1)``
# over seeds disjoint from the acceptance trials; see README.
LEVERAGE_CONSTANT = 1.0


class ZeroSupportError(ValueError):
    """The leverage profile puts no mass on any feature."""


class SingleClassWarning(UserWarning):
    """All labels are equal, so information gain is identically zero."""


@dataclass(frozen=True)
class LeverageProfile:
    """Per-feature sampling probabilities from the left singular factor.

    ``normalization="rank"`` divides squared row norms by ``rho`` so the
    profile sums to one. ``"samples"`` divides by the sample count ``n``
    instead (sum ``rho / n``); draws are then taken from the renormalized
    profile but weights still use the stored values.
    """

    probabilities: np.ndarray
    rho: int
    normalization: str = "rank"

    @property
    def d(self) -> int:
        return self.probabilities.size


def leverage_scores(svd: SvdFactors, normalization: str = "rank") -> LeverageProfile:
    norms2 = np.einsum("ij,ij->i", svd.u, svd.u)
    if normalization == "rank":
        divisor = svd.rho
    elif normalization == "samples":
        divisor = svd.v.shape[0]
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    p = norms2 / divisor
    p[np.abs(p) < 1e-300] = 0.0
    return LeverageProfile(p, svd.rho, normalization)


def leverage_sample(profile: LeverageProfile, r: int, seed=None) -> SamplingScheme:
    """Draw ``r`` i.i.d. features from ``profile``; weight ``1/sqrt(r p_i)``.

    The ``1/sqrt(r)`` factor makes ``E[U' R' R U] = I``.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    p = profile.probabilities
    if not np.any(p > 0):
        raise ZeroSupportError("leverage profile has no positive entries")
    rng = np.random.default_rng(seed)
    idx = rng.choice(p.size, size=r, replace=True, p=p / p.sum())
    weights = 1.0 / np.sqrt(r * p[idx])
    return SamplingScheme(idx, weights, "leverage", p.size)


def leverage_sample_size(rho: int, epsilon: float, delta: float,
                         constant: float = LEVERAGE_CONSTANT) -> int:
    """``ceil(c rho/eps^2 * ln(rho / (eps^2 sqrt(delta))))``."""
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("epsilon and delta must lie in (0, 1)")
    base = rho / epsilon**2 * math.log(rho / (epsilon**2 * math.sqrt(delta)))
    return max(1, int(math.ceil(constant * base)))


def leverage_failure_rate(u: np.ndarray, r: int, epsilon: float, trials: int,
                          seed=0) -> float:
    """Fraction of ``trials`` leverage schemes with ``||I - U'R'RU|| > epsilon``."""
    rho = u.shape[1]
    profile = LeverageProfile(np.einsum("ij,ij->i", u, u) / rho, rho)
    seeds = np.random.SeedSequence(seed).spawn(trials)
    fails = 0
    for s in seeds:
        scheme = leverage_sample(profile, r, s)
        ru = u[scheme.indices] * scheme.weights[:, None]
        fails += spectral_norm(np.eye(rho) - ru.T @ ru) > epsilon
    return fails / trials


def calibrate_leverage_constant(d: int, rho: int, epsilon: float, delta: float,
                                grid=(0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0),
                                trials: int = 500, seed: int = 12345) -> float:
    """Smallest constant on ``grid`` whose failure rate is at most ``delta / 2``.

    The halved target leaves headroom for fresh seeds.
    """
    u = random_orthonormal(d, rho, seed)
    for c in grid:
        r = leverage_sample_size(rho, epsilon, delta, c)
        if leverage_failure_rate(u, r, epsilon, trials, seed + 1) <= delta / 2:
            return float(c)
    raise RuntimeError("no constant on the grid reaches the target failure rate")


def rrqr_select(x, r: int) -> SamplingScheme:
    """First ``r`` pivots of column-pivoted QR on ``X.T`` (features as columns).

    Pivots past the numerical rank carry no information, so they are
    replaced by the remaining features in order of decreasing norm.
    """
    a = as_dense(x)
    d = a.shape[0]
    if r < 1:
        raise ValueError("r must be >= 1")
    if r > d:
        raise ValueError(f"r={r} exceeds the number of features d={d}")
    _, rfac, piv = scipy.linalg.qr(a.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(rfac))
    rank = int(np.sum(diag > 1e-12 * diag[0])) if diag.size and diag[0] > 0 else 0
    chosen = list(piv[: min(rank, r)])
    if len(chosen) < r:
        rest = np.setdiff1d(np.arange(d), chosen)
        norms = np.linalg.norm(a[rest], axis=1)
        order = rest[np.lexsort((rest, -norms))]
        chosen.extend(order[: r - len(chosen)])
    return SamplingScheme(np.array(chosen), np.ones(r), "rrqr", d)


def _entropy(counts) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        h = -np.where(p > 0, p * np.log2(p), 0.0).sum(axis=0)
    return h


def presence_indicator(x, binarize: str = "auto") -> np.ndarray:
    """Boolean ``d x n`` presence matrix.

    ``"nonzero"`` marks nonzero entries; ``"median"`` marks entries above
    the feature's median. ``"auto"`` uses ``"nonzero"`` for sparse or
    nonnegative data (term counts) and ``"median"`` otherwise.
    """
    fm = as_feature_matrix(x)
    if binarize == "auto":
        if fm.storage == "sparse" or np.all(fm.dense() >= 0):
            binarize = "nonzero"
        else:
            binarize = "median"
    if binarize == "nonzero":
        if fm.storage == "sparse":
            return (fm.values != 0).toarray()
        return fm.values != 0
    if binarize == "median":
        a = fm.dense()
        return a > np.median(a, axis=1, keepdims=True)
    raise ValueError(f"unknown binarization {binarize!r}")


def info_gain_scores(x, labels, binarize: str = "auto") -> np.ndarray:
    """``H(Y) - H(Y | present)`` per feature, in bits."""
    fm = as_feature_matrix(x)
    y = np.asarray(labels).ravel()
    if y.size != fm.n:
        raise DimensionError(f"{y.size} labels for {fm.n} samples")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("labels must be -1 or +1")
    pos = y > 0
    present = presence_indicator(fm, binarize)
    n = y.size
    h_y = _entropy([pos.sum(), (~pos).sum()])

    pres_pos = present[:, pos].sum(axis=1)
    pres_neg = present[:, ~pos].sum(axis=1)
    abs_pos = pos.sum() - pres_pos
    abs_neg = (~pos).sum() - pres_neg
    n_pres = pres_pos + pres_neg
    h_pres = _entropy(np.vstack([pres_pos, pres_neg]))
    h_abs = _entropy(np.vstack([abs_pos, abs_neg]))
    cond = (n_pres * h_pres + (n - n_pres) * h_abs) / n
    return np.maximum(h_y - cond, 0.0)


def info_gain_select(x, labels, r: int, binarize: str = "auto") -> SamplingScheme:
    """Top-``r`` features by information gain; ties go to the lower index.

    With a single class the scores are all zero, a
    :class:`SingleClassWarning` is issued, and the scheme records
    ``extra["single_class"] = True``.
    """
    fm = as_feature_matrix(x)
    if r < 1:
        raise ValueError("r must be >= 1")
    if r > fm.d:
        raise ValueError(f"r={r} exceeds the number of features d={fm.d}")
    y = np.asarray(labels).ravel()
    single = np.unique(y).size < 2
    if single:
        warnings.warn("all labels are equal; information gain is zero", SingleClassWarning)
    scores = info_gain_scores(fm, y, binarize)
    order = np.argsort(-scores, kind="stable")[:r]
    return SamplingScheme(order, np.ones(r), "info-gain", fm.d,
                          extra={"single_class": single})


def random_select(d: int, r: int, seed=None) -> SamplingScheme:
    """Uniform ``r``-subset of ``range(d)`` without replacement."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if r > d:
        raise ValueError(f"r={r} exceeds the number of features d={d}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(d, size=r, replace=False)
    return SamplingScheme(idx, np.ones(r), "random", d)
