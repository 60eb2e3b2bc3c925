"""Closed-form RLSC and ridge regression with the linear kernel ``K = X'X``.

Solves go through the thin SVD of ``X``; the kernel is never inverted
directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import (
    DimensionError,
    FeatureMatrix,
    SvdFactors,
    as_dense,
    as_feature_matrix,
    thin_svd,
)

SINGULAR_TOL = 1e-12


class SingularKernelError(np.linalg.LinAlgError):
    """``lambda = 0`` with a (numerically) singular kernel."""


@dataclass(frozen=True)
class RlscModel:
    coefficients: np.ndarray
    lam: float
    train_features: FeatureMatrix

    def to_dict(self) -> dict:
        return {"kind": "rlsc", "lambda": self.lam,
                "coefficients": self.coefficients.tolist()}


@dataclass(frozen=True)
class RidgeModel:
    dual: np.ndarray
    primal: np.ndarray
    lam: float

    @property
    def n(self) -> int:
        return self.dual.size

    def to_dict(self) -> dict:
        return {"kind": "ridge", "lambda": self.lam,
                "dual": self.dual.tolist(), "primal": self.primal.tolist()}


def model_to_json(model) -> str:
    return json.dumps(model.to_dict(), indent=2)


def model_from_dict(obj: dict, train_features=None):
    """Inverse of ``to_dict``; RLSC models also need their training matrix."""
    kind = obj.get("kind")
    if kind == "ridge":
        return RidgeModel(np.asarray(obj["dual"], dtype=float),
                          np.asarray(obj["primal"], dtype=float), float(obj["lambda"]))
    if kind == "rlsc":
        if train_features is None:
            raise ValueError("an rlsc model needs the training matrix to predict")
        fm = as_feature_matrix(train_features)
        coef = np.asarray(obj["coefficients"], dtype=float)
        if coef.size != fm.n:
            raise DimensionError(f"model has {coef.size} coefficients, matrix has {fm.n} samples")
        return RlscModel(coef, float(obj["lambda"]), fm)
    raise ValueError(f"unknown model kind {kind!r}")


@dataclass(frozen=True)
class TestPoint:
    """``q = X alpha + (I - UU') q``; ``beta_norm`` is the norm of the second term."""

    __test__ = False  # keep pytest from collecting this class

    q: np.ndarray
    alpha: np.ndarray
    in_span: np.ndarray
    residual: np.ndarray

    @property
    def beta_norm(self) -> float:
        return float(np.linalg.norm(self.residual))


def _labels(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    if y.size != n:
        raise DimensionError(f"{y.size} targets for {n} samples")
    return y


def rlsc_train(x, labels, lam: float, svd: Optional[SvdFactors] = None) -> RlscModel:
    """Minimize ``||K c - y||^2 + lam c'K c``; returns ``c = V (S^2 + lam I)^-1 V'y``.

    ``lam = 0`` is allowed only when ``K`` is numerically nonsingular.
    """
    fm = as_feature_matrix(x)
    y = _labels(labels, fm.n)
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if svd is None:
        svd = thin_svd(fm)
    s2 = svd.sigma**2
    if lam == 0 and (svd.rho < fm.n or s2[-1] < SINGULAR_TOL * s2[0]):
        raise SingularKernelError("lambda = 0 requires a nonsingular kernel X'X")
    coef = svd.v @ ((svd.v.T @ y) / (s2 + lam))
    return RlscModel(coef, float(lam), fm)


def rlsc_predict(model: RlscModel, q) -> np.ndarray | float:
    """``f(q) = c' X' q`` for a point (length ``d``) or points (``d x m``)."""
    q = as_dense(q)
    x = model.train_features
    if q.shape[0] != x.d:
        raise DimensionError(f"point has {q.shape[0]} features, model expects {x.d}")
    xq = x.values.T @ q
    out = model.coefficients @ np.asarray(xq)
    return float(out) if np.ndim(out) == 0 else np.asarray(out).ravel()


def ridge_train_dual(x, targets, lam: float, svd: Optional[SvdFactors] = None) -> RidgeModel:
    """``dual = (K + n lam I)^-1 y``, ``primal = X dual``."""
    fm = as_feature_matrix(x)
    y = _labels(targets, fm.n)
    if lam <= 0:
        raise ValueError(f"ridge needs lambda > 0, got {lam}")
    if svd is None:
        svd = thin_svd(fm)
    shift = fm.n * lam
    vy = svd.v.T @ y
    # the component of y outside range(V) only sees the shift
    dual = svd.v @ (vy / (svd.sigma**2 + shift)) + (y - svd.v @ vy) / shift
    primal = np.asarray(fm.values @ dual).ravel()
    return RidgeModel(dual, primal, float(lam))


def ridge_primal_closed_form(x, targets, lam: float) -> np.ndarray:
    """``(X X' + n lam I_d)^-1 X y`` by a generic dense solve."""
    a = as_dense(x)
    y = _labels(targets, a.shape[1])
    n = a.shape[1]
    return np.linalg.solve(a @ a.T + n * lam * np.eye(a.shape[0]), a @ y)


def ridge_predict(model: RidgeModel, q) -> np.ndarray | float:
    q = as_dense(q)
    if q.shape[0] != model.primal.size:
        raise DimensionError(f"point has {q.shape[0]} features, model expects {model.primal.size}")
    out = model.primal @ q
    return float(out) if np.ndim(out) == 0 else out


def ridge_fitted(model: RidgeModel, x) -> np.ndarray:
    """In-sample predictions ``K dual``."""
    fm = as_feature_matrix(x)
    return np.asarray(fm.values.T @ model.primal).ravel()


def decompose_test_point(q, svd: SvdFactors) -> TestPoint:
    q = np.asarray(q, dtype=float).ravel()
    if q.size != svd.u.shape[0]:
        raise DimensionError(f"point has {q.size} features, factors have {svd.u.shape[0]}")
    uq = svd.u.T @ q
    in_span = svd.u @ uq
    alpha = svd.v @ (uq / svd.sigma)
    return TestPoint(q=q, alpha=alpha, in_span=in_span, residual=q - in_span)
