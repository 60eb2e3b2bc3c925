"""Matrix data model and shared numerical primitives.

All data matrices follow the ``d x n`` convention: rows are features,
columns are samples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
import scipy.sparse as sp

RANK_TOL = 1e-12

METHODS = ("bss", "leverage", "rrqr", "info-gain", "random", "identity")


class DimensionError(ValueError):
    """Raised when operand shapes do not line up."""


class DegenerateInputError(ValueError):
    """Raised for inputs with no usable numerical content (e.g. all zeros)."""


@dataclass(frozen=True)
class FeatureMatrix:
    """A validated ``d x n`` training matrix, dense or sparse.

    Sparse values are kept in CSR form with duplicates summed and explicit
    zeros removed.
    """

    values: Union[np.ndarray, sp.csr_matrix]

    def __post_init__(self):
        vals = self.values
        if sp.issparse(vals):
            vals = sp.csr_matrix(vals, dtype=float)
            vals.sum_duplicates()
            vals.eliminate_zeros()
            data = vals.data
        else:
            vals = np.array(vals, dtype=float, order="F")
            if vals.ndim != 2:
                raise DimensionError(f"expected a 2-D matrix, got ndim={vals.ndim}")
            data = vals
        if vals.shape[0] < 1 or vals.shape[1] < 1:
            raise DimensionError(f"empty matrix of shape {vals.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("matrix contains non-finite entries")
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    @property
    def storage(self) -> str:
        return "sparse" if sp.issparse(self.values) else "dense"

    def dense(self) -> np.ndarray:
        if sp.issparse(self.values):
            return self.values.toarray()
        return self.values

    def columns(self, idx) -> "FeatureMatrix":
        """Sub-matrix restricted to the samples in ``idx``."""
        return FeatureMatrix(self.values[:, np.asarray(idx)])


def as_feature_matrix(x) -> FeatureMatrix:
    if isinstance(x, FeatureMatrix):
        return x
    return FeatureMatrix(x)


def as_dense(x) -> np.ndarray:
    if isinstance(x, FeatureMatrix):
        return x.dense()
    if sp.issparse(x):
        return x.toarray()
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``X = u @ diag(sigma) @ v.T`` truncated at the numerical rank."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def rho(self) -> int:
        return self.sigma.shape[0]

    @property
    def sigma_max(self) -> float:
        return float(self.sigma[0])

    @property
    def sigma_min(self) -> float:
        return float(self.sigma[-1])

    @property
    def condition_number(self) -> float:
        return self.sigma_max / self.sigma_min

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


def thin_svd(x) -> SvdFactors:
    """Thin SVD of a feature matrix, truncated at rank ``1e-12 * sigma_max``.

    Sparse inputs are densified first.

    Raises
    ------
    DegenerateInputError
        If every entry of ``x`` is zero.
    """
    a = as_dense(x)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if not np.any(a):
        raise DegenerateInputError("cannot factor an all-zero matrix")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    rho = int(np.sum(s > RANK_TOL * s[0]))
    return SvdFactors(u=u[:, :rho].copy(), sigma=s[:rho].copy(), v=vt[:rho].T.copy())


def spectral_norm(m) -> float:
    """Largest singular value of ``m``."""
    a = as_dense(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def random_orthonormal(d: int, ell: int, seed=None) -> np.ndarray:
    """``d x ell`` matrix with orthonormal columns, Haar-distributed."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((d, ell)))
    return q * np.sign(np.diag(r))


@dataclass(frozen=True)
class SamplingScheme:
    """Selected feature indices with positive rescaling weights.

    Realizes ``R = D S`` (``r x d``): row ``j`` of ``R @ X`` is
    ``weights[j] * X[indices[j]]``. Indices may repeat.
    """

    indices: np.ndarray
    weights: np.ndarray
    method: str
    d: int
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if idx.size < 1:
            raise ValueError("a sampling scheme needs r >= 1 picks")
        if idx.shape != w.shape:
            raise DimensionError(f"{idx.size} indices but {w.size} weights")
        if np.any(idx < 0) or np.any(idx >= self.d):
            raise ValueError(f"indices must lie in [0, {self.d})")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and strictly positive")
        idx.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "weights", w)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SamplingScheme):
            return NotImplemented
        return (self.method == other.method and self.d == other.d
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None

    @property
    def r(self) -> int:
        return self.indices.size

    @property
    def source_dims(self):
        return (self.d, self.r)

    def to_matrix(self) -> np.ndarray:
        """Materialize ``R`` as a dense ``r x d`` array."""
        rmat = np.zeros((self.r, self.d))
        rmat[np.arange(self.r), self.indices] = self.weights
        return rmat

    def gram_weights(self) -> np.ndarray:
        """Diagonal of ``R.T @ R`` (length ``d``); repeated picks accumulate."""
        out = np.zeros(self.d)
        np.add.at(out, self.indices, self.weights**2)
        return out

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "d": int(self.d),
            "indices": [int(i) for i in self.indices],
            "weights": [float(w) for w in self.weights],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SamplingScheme":
        idx = obj["indices"]
        d = obj.get("d", max(idx) + 1 if idx else 0)
        return cls(indices=idx, weights=obj["weights"], method=obj["method"], d=int(d))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SamplingScheme":
        return cls.from_dict(json.loads(text))


def identity_scheme(d: int) -> SamplingScheme:
    return SamplingScheme(np.arange(d), np.ones(d), "identity", d)


def apply_scheme(scheme: SamplingScheme, x):
    """Return ``R @ X`` as a FeatureMatrix with the same storage as ``x``."""
    fm = as_feature_matrix(x)
    if scheme.d != fm.d:
        raise DimensionError(f"scheme is over d={scheme.d} features, matrix has d={fm.d}")
    vals = fm.values[scheme.indices]
    if sp.issparse(vals):
        vals = sp.diags(scheme.weights) @ vals
    else:
        vals = vals * scheme.weights[:, None]
    return FeatureMatrix(vals)


def apply_scheme_to_points(scheme: SamplingScheme, q) -> np.ndarray:
    """Reduce test points (length-``d`` vector or ``d x m`` matrix) to ``R @ q``."""
    a = as_dense(q)
    if a.shape[0] != scheme.d:
        raise DimensionError(f"points have {a.shape[0]} features, scheme expects {scheme.d}")
    if a.ndim == 1:
        return a[scheme.indices] * scheme.weights
    return a[scheme.indices] * scheme.weights[:, None]


# -- coordinate text format -------------------------------------------------


class FormatError(ValueError):
    """Parse failure in one of the text formats; carries the 1-based line."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


def write_matrix(path, x) -> None:
    """Write ``x`` as ``%%matrix d n nnz`` followed by 1-indexed triples."""
    fm = as_feature_matrix(x)
    coo = sp.coo_matrix(fm.values)
    coo.sum_duplicates()
    coo.eliminate_zeros()
    order = np.lexsort((coo.row, coo.col))
    lines = [f"%%matrix {fm.d} {fm.n} {coo.nnz}"]
    lines.extend(
        f"{r + 1} {c + 1} {v!r}"
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order].tolist())
    )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix(path) -> FeatureMatrix:
    """Parse the coordinate format written by :func:`write_matrix`.

    Lines starting with a single ``%`` after the header are comments.
    """
    path = Path(path)
    rows, cols, vals = [], [], []
    header = None
    seen = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if header is None:
                parts = line.split()
                if len(parts) != 4 or parts[0] != "%%matrix":
                    raise FormatError(path, lineno, "expected header '%%matrix d n nnz'")
                try:
                    header = tuple(int(p) for p in parts[1:])
                except ValueError:
                    raise FormatError(path, lineno, "header sizes must be integers") from None
                if header[0] < 1 or header[1] < 1 or header[2] < 0:
                    raise FormatError(path, lineno, f"invalid sizes {header}")
                continue
            if not line or line.startswith("%"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise FormatError(path, lineno, "expected 'row col value'")
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise FormatError(path, lineno, f"cannot parse triple {line!r}") from None
            d, n, _ = header
            if not 1 <= i <= d:
                raise FormatError(path, lineno, f"row {i} outside 1..{d}")
            if not 1 <= j <= n:
                raise FormatError(path, lineno, f"column {j} outside 1..{n}")
            if not np.isfinite(v):
                raise FormatError(path, lineno, "non-finite value")
            if (i, j) in seen:
                raise FormatError(path, lineno, f"duplicate entry ({i}, {j})")
            seen.add((i, j))
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(v)
    if header is None:
        raise FormatError(path, 1, "empty file")
    d, n, nnz = header
    if len(vals) != nnz:
        raise FormatError(path, lineno, f"header declares {nnz} entries, found {len(vals)}")
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(d, n))
    return FeatureMatrix(mat)
