"""Synthetic datasets with ``k`` relevant and ``d - k`` noise features."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .linalg import FeatureMatrix, write_matrix


@dataclass(frozen=True)
class SyntheticSpec:
    n: int
    d: int
    k: int
    seed: int = 0
    noise_sigma: Optional[float] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")
        if not 1 <= self.k <= self.d:
            raise ValueError(f"need 1 <= k <= d, got k={self.k}, d={self.d}")
        if self.noise_sigma is not None and self.noise_sigma <= 0:
            raise ValueError("noise_sigma must be positive")


def _features(spec: SyntheticSpec, rng: np.random.Generator):
    labels = rng.choice(np.array([-1, 1]), size=spec.n)
    x = rng.standard_normal((spec.d, spec.n))
    # feature j (1-based, j <= k) is y * N(-j, 1)
    j = np.arange(1, spec.k + 1, dtype=float)[:, None]
    x[: spec.k] = labels * (x[: spec.k] - j)
    return x, labels


def synth_classification(spec: SyntheticSpec):
    """``(X, labels)`` with ``X`` of shape ``d x n`` and labels in ``{-1, +1}``."""
    rng = np.random.default_rng(spec.seed)
    x, labels = _features(spec, rng)
    return FeatureMatrix(x), labels


def synth_regression(spec: SyntheticSpec):
    """``(X, y, beta, z)`` with ``z = X' beta`` and ``y = z + N(0, sigma^2)``."""
    if spec.noise_sigma is None:
        raise ValueError("regression data needs noise_sigma")
    rng = np.random.default_rng(spec.seed)
    x, _ = _features(spec, rng)
    beta = rng.standard_normal(spec.d)
    z = x.T @ beta
    y = z + spec.noise_sigma * rng.standard_normal(spec.n)
    return FeatureMatrix(x), y, beta, z


def write_vector(path, values) -> None:
    """One value per line; integers stay integers."""
    values = np.asarray(values).ravel()
    if np.issubdtype(values.dtype, np.integer):
        text = "\n".join(str(int(v)) for v in values)
    else:
        text = "\n".join(repr(float(v)) for v in values)
    Path(path).write_text(text + "\n", encoding="utf-8")


def write_dataset(prefix, x, y, z=None) -> dict:
    """Write ``prefix.mtx`` and ``prefix.labels`` (or ``.targets`` + ``.z``)."""
    prefix = Path(prefix)
    paths = {"matrix": prefix.with_suffix(".mtx")}
    write_matrix(paths["matrix"], x)
    if z is None:
        paths["labels"] = prefix.with_suffix(".labels")
        write_vector(paths["labels"], np.asarray(y).astype(int))
    else:
        paths["targets"] = prefix.with_suffix(".targets")
        paths["z"] = prefix.with_suffix(".z")
        write_vector(paths["targets"], np.asarray(y, dtype=float))
        write_vector(paths["z"], np.asarray(z, dtype=float))
    return {k: str(v) for k, v in paths.items()}
