"""Fixed-design risk of kernel ridge regression and p.s.d. sandwich checks."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .linalg import DimensionError, SamplingScheme, apply_scheme, as_feature_matrix

PSD_TOL = 1e-10
MC_CHUNK = 1000


class NotPsdError(ValueError):
    """Kernel is asymmetric or has a negative eigenvalue beyond tolerance."""


@dataclass(frozen=True)
class RiskReport:
    bias: float
    variance: float
    total: float
    lam: float
    sigma2: float
    n: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _psd_eigh(k) -> tuple[np.ndarray, np.ndarray]:
    k = np.asarray(k, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise DimensionError(f"kernel must be square, got {k.shape}")
    scale = max(float(np.abs(k).max()), 1.0)
    if np.abs(k - k.T).max() > PSD_TOL * scale:
        raise NotPsdError("kernel is not symmetric")
    lam, q = np.linalg.eigh(0.5 * (k + k.T))
    norm = max(abs(lam[0]), abs(lam[-1]))
    if lam[0] < -PSD_TOL * max(norm, 1.0):
        raise NotPsdError(f"kernel has negative eigenvalue {lam[0]}")
    return np.clip(lam, 0.0, None), q


def kernel(x) -> np.ndarray:
    """Linear kernel ``X'X`` as a dense array."""
    fm = as_feature_matrix(x)
    k = fm.values.T @ fm.values
    return np.asarray(k.toarray() if hasattr(k, "toarray") else k)


def sampled_kernel(x, scheme: SamplingScheme) -> np.ndarray:
    """``(RX)'(RX)``, built from the reduced matrix."""
    return kernel(apply_scheme(scheme, x))


def risk(k, z, lam: float, sigma2: float) -> RiskReport:
    """Bias/variance split of ``R(K)`` with ``n lam`` shift.

    ``variance = sigma2/n tr[K^2 (K + n lam I)^-2]``,
    ``bias = n lam^2 z'(K + n lam I)^-2 z``.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    ev, q = _psd_eigh(k)
    n = ev.size
    z = np.asarray(z, dtype=float).ravel()
    if z.size != n:
        raise DimensionError(f"z has length {z.size}, kernel is {n}x{n}")
    denom = (ev + n * lam) ** 2
    variance = sigma2 / n * float(np.sum(ev**2 / denom))
    bias = n * lam**2 * float(np.sum((q.T @ z) ** 2 / denom))
    return RiskReport(bias=bias, variance=variance, total=bias + variance,
                      lam=float(lam), sigma2=float(sigma2), n=n)


def monte_carlo_risk(k, z, lam: float, sigma2: float, trials: int = 10000,
                     seed=0) -> tuple[float, float]:
    """Empirical mean and standard error of ``||K(K + n lam I)^-1 y - z||^2 / n``.

    Noise is drawn in fixed chunks with spawned seeds, so the estimate does
    not depend on how chunks are scheduled.
    """
    if trials < 100:
        raise ValueError("use at least 100 trials")
    k = np.asarray(k, dtype=float)
    z = np.asarray(z, dtype=float).ravel()
    n = z.size
    if k.shape != (n, n):
        raise DimensionError(f"kernel {k.shape} does not match z of length {n}")
    hat = np.linalg.solve(k + n * lam * np.eye(n), k.T).T  # K (K + n lam I)^-1
    sd = np.sqrt(sigma2)
    nchunks = -(-trials // MC_CHUNK)
    losses = []
    for c, ss in enumerate(np.random.SeedSequence(seed).spawn(nchunks)):
        m = min(MC_CHUNK, trials - c * MC_CHUNK)
        noise = np.random.default_rng(ss).standard_normal((m, n)) * sd
        resid = (z + noise) @ hat.T - z
        losses.append(np.einsum("ij,ij->i", resid, resid) / n)
    losses = np.concatenate(losses)
    return float(losses.mean()), float(losses.std(ddof=1) / np.sqrt(trials))


def sandwich_certificate(k, k_tilde, delta: float) -> bool:
    """Whether ``(1 - delta) K <= K~ <= (1 + delta) K`` in the p.s.d. order."""
    k = np.asarray(k, dtype=float)
    kt = np.asarray(k_tilde, dtype=float)
    tol = -PSD_TOL * max(float(np.linalg.norm(k, 2)), 1e-300)
    lo = np.linalg.eigvalsh(kt - (1 - delta) * k)[0]
    hi = np.linalg.eigvalsh((1 + delta) * k - kt)[0]
    return bool(lo >= tol and hi >= tol)


def risk_inflation_factor(delta: float) -> float:
    """``(1 - delta)^-2``."""
    if not 0 <= delta < 1:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    return (1.0 - delta) ** -2
