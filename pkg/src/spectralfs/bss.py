"""Deterministic single-set spectral sparsification (BSS).

Greedy barrier-potential selection of ``r`` rescaled columns of an
``ell x d`` matrix with orthonormal rows, so that the sampled Gram matrix
stays spectrally close to the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .linalg import DimensionError, SamplingScheme, spectral_norm

ZERO_NORM_TOL = 1e-14
SHIFT_TOL = 1e-12
SHIFT_NUDGE = 1e-9


class BarrierViolation(ValueError):
    """An eigenvalue sits on the wrong side of a barrier."""


class SingularShiftError(ArithmeticError):
    """A barrier coincides with an eigenvalue of ``A`` (shifted matrix singular)."""


class NoCandidateError(RuntimeError):
    """No column satisfies the upper/lower potential inequality."""


@dataclass(frozen=True)
class BssConfig:
    """Target sample count ``r`` for input rank ``ell``.

    Build with :meth:`from_epsilon` to derive ``r = ceil(9 ell / eps^2)``,
    the smallest ``r`` with ``3 sqrt(ell / r) <= eps``.
    """

    r: int
    ell: int
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError(f"ell must be >= 1, got {self.ell}")
        if self.r <= self.ell:
            raise ValueError(f"r must exceed ell (r={self.r}, ell={self.ell})")
        if self.epsilon is not None:
            if not 0 < self.epsilon <= 0.5:
                raise ValueError(f"epsilon must lie in (0, 1/2], got {self.epsilon}")
            if self.r != r_for_epsilon(self.ell, self.epsilon):
                raise ValueError("r is inconsistent with epsilon; use BssConfig.from_epsilon")

    @classmethod
    def from_epsilon(cls, ell: int, epsilon: float) -> "BssConfig":
        if not 0 < epsilon <= 0.5:
            raise ValueError(f"epsilon must lie in (0, 1/2], got {epsilon}")
        return cls(r=r_for_epsilon(ell, epsilon), ell=ell, epsilon=epsilon)

    @property
    def ratio(self) -> float:
        return math.sqrt(self.ell / self.r)

    @property
    def delta_u(self) -> float:
        s = self.ratio
        return (1 + s) / (1 - s)

    @property
    def delta_l(self) -> float:
        return 1.0

    @property
    def final_scale(self) -> float:
        """Multiplier applied to every ``sqrt(t)`` weight after the loop."""
        return math.sqrt((1 - self.ratio) / self.r)

    def spectral_bound(self) -> float:
        return 3 * self.ratio

    def lower_barrier(self, tau: int) -> float:
        return tau - math.sqrt(self.r * self.ell)

    def upper_barrier(self, tau: int) -> float:
        return self.delta_u * (tau + math.sqrt(self.ell * self.r))


def r_for_epsilon(ell: int, epsilon: float) -> int:
    # guard against 9*ell/eps^2 landing a hair above an integer
    return int(math.ceil(9 * ell / epsilon**2 - 1e-9))


@dataclass
class BssState:
    """Iterate of the greedy loop: ``A_tau`` and the barriers around it."""

    a: np.ndarray
    tau: int
    lower: float
    upper: float
    delta_l: float
    delta_u: float
    picks: List[Tuple[int, float]] = field(default_factory=list)

    @classmethod
    def initial(cls, config: BssConfig) -> "BssState":
        return cls(
            a=np.zeros((config.ell, config.ell)),
            tau=0,
            lower=config.lower_barrier(0),
            upper=config.upper_barrier(0),
            delta_l=config.delta_l,
            delta_u=config.delta_u,
        )

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.a)


def lower_potential(l_barrier: float, eigenvalues) -> float:
    """``sum_i 1 / (lambda_i - L)``."""
    lam = np.asarray(eigenvalues, dtype=float)
    gaps = lam - l_barrier
    if np.any(gaps <= 0):
        raise BarrierViolation(f"eigenvalue {lam.min()} not above lower barrier {l_barrier}")
    return float(np.sum(1.0 / gaps))


def upper_potential(u_barrier: float, eigenvalues) -> float:
    """``sum_i 1 / (U - lambda_i)``."""
    lam = np.asarray(eigenvalues, dtype=float)
    gaps = u_barrier - lam
    if np.any(gaps <= 0):
        raise BarrierViolation(f"eigenvalue {lam.max()} not below upper barrier {u_barrier}")
    return float(np.sum(1.0 / gaps))


def _check_shift(gaps: np.ndarray, scale: float) -> bool:
    return bool(np.min(np.abs(gaps)) > SHIFT_TOL * max(scale, 1.0))


def _scores(w: np.ndarray, lam: np.ndarray, lower: float, upper: float,
            delta_l: float, delta_u: float) -> Tuple[np.ndarray, np.ndarray]:
    """Lower and upper scores for every column of ``w`` in the eigenbasis of ``A``.

    ``w`` holds ``Q.T @ u`` for each candidate ``u`` (one per column), where
    ``A = Q diag(lam) Q.T``.
    """
    scale = float(np.max(np.abs(lam))) if lam.size else 1.0
    shifted_l = lower + delta_l
    shifted_u = upper + delta_u
    gl = lam - shifted_l
    gu = shifted_u - lam
    if not _check_shift(gl, scale):
        shifted_l += SHIFT_NUDGE
        gl = lam - shifted_l
        if not _check_shift(gl, scale):
            raise SingularShiftError(f"A - {shifted_l} I is numerically singular")
    if not _check_shift(gu, scale):
        shifted_u += SHIFT_NUDGE
        gu = shifted_u - lam
        if not _check_shift(gu, scale):
            raise SingularShiftError(f"{shifted_u} I - A is numerically singular")

    w2 = w * w
    lower_gain = lower_potential(shifted_l, lam) - lower_potential(lower, lam)
    upper_drop = upper_potential(upper, lam) - upper_potential(shifted_u, lam)

    l_score = (1.0 / gl**2) @ w2 / lower_gain - (1.0 / gl) @ w2
    u_score = (1.0 / gu**2) @ w2 / upper_drop + (1.0 / gu) @ w2
    return l_score, u_score


def _eig(state: BssState):
    lam, q = np.linalg.eigh(state.a)
    return lam, q


def lower_score(u, state: BssState) -> float:
    """Lower score of vector ``u`` against the current state.

    ``u'(A - L'I)^-2 u / (Phi(L', A) - Phi(L, A)) - u'(A - L'I)^-1 u``
    with ``L' = L + delta_L``.
    """
    lam, q = _eig(state)
    w = q.T @ np.asarray(u, dtype=float).reshape(-1, 1)
    l_score, _ = _scores(w, lam, state.lower, state.upper, state.delta_l, state.delta_u)
    return float(l_score[0])


def upper_score(u, state: BssState) -> float:
    """Upper score of vector ``u``; see :func:`lower_score`."""
    lam, q = _eig(state)
    w = q.T @ np.asarray(u, dtype=float).reshape(-1, 1)
    _, u_score = _scores(w, lam, state.lower, state.upper, state.delta_l, state.delta_u)
    return float(u_score[0])


def bss_step(vt: np.ndarray, state: BssState, config: BssConfig,
             norms: Optional[np.ndarray] = None,
             priority: Optional[np.ndarray] = None) -> BssState:
    """Run one greedy iteration in place and return the updated state."""
    if norms is None:
        norms = np.linalg.norm(vt, axis=0)
    if priority is None:
        priority = norms
    lam, q = _eig(state)
    w = q.T @ vt
    l_score, u_score = _scores(w, lam, state.lower, state.upper, state.delta_l, state.delta_u)

    ok = (u_score <= l_score) & (norms > ZERO_NORM_TOL) & (l_score > 0)
    if not np.any(ok):
        raise NoCandidateError(
            f"no column satisfies U <= L at iteration {state.tau}; "
            "input rows are probably not orthonormal"
        )
    fresh = ok.copy()
    if state.picks:
        fresh[[i for i, _ in state.picks]] = False
    pool = fresh if np.any(fresh) else ok
    # argmax returns the lowest index among equal priorities
    i = int(np.argmax(np.where(pool, priority, -np.inf)))
    t = 2.0 / (u_score[i] + l_score[i])

    v = vt[:, i]
    state.a = state.a + t * np.outer(v, v)
    state.a = 0.5 * (state.a + state.a.T)
    state.picks.append((i, float(t)))
    state.tau += 1
    state.lower = config.lower_barrier(state.tau)
    state.upper = config.upper_barrier(state.tau)
    return state


def bss_select(vt, config: BssConfig, priority=None,
               check_barriers: bool = False) -> SamplingScheme:
    """Pick ``config.r`` weighted columns of ``vt`` (``ell x d``, orthonormal rows).

    Among columns meeting the potential inequality, the one not picked yet
    with the largest ``priority`` wins; ties go to the lower index.
    ``priority`` defaults to the Euclidean norms of the columns of ``vt``;
    callers selecting features of a data matrix may pass the norms of the
    feature rows instead. Zero columns of ``vt`` are never picked. The
    returned weights already include the final
    ``sqrt((1 - sqrt(ell/r)) / r)`` rescaling.

    With ``check_barriers`` the eigenvalues of ``A`` are verified to stay
    strictly between the barriers after every step.
    """
    vt = np.asarray(vt, dtype=float)
    if vt.ndim != 2:
        raise DimensionError("vt must be a 2-D array")
    ell, d = vt.shape
    if ell != config.ell:
        raise DimensionError(f"vt has {ell} rows but config.ell={config.ell}")
    gram_err = spectral_norm(vt @ vt.T - np.eye(ell))
    if gram_err > 1e-8:
        raise ValueError(f"rows of vt are not orthonormal (deviation {gram_err:.2e})")

    norms = np.linalg.norm(vt, axis=0)
    if priority is None:
        priority = norms
    else:
        priority = np.asarray(priority, dtype=float).ravel()
        if priority.size != d:
            raise DimensionError(f"priority has length {priority.size}, expected {d}")
    state = BssState.initial(config)
    for _ in range(config.r):
        bss_step(vt, state, config, norms, priority)
        if check_barriers:
            lam = state.eigenvalues()
            if not (lam.min() > state.lower and lam.max() < state.upper):
                raise BarrierViolation(
                    f"iteration {state.tau}: eigenvalues [{lam.min()}, {lam.max()}] "
                    f"escape ({state.lower}, {state.upper})"
                )

    idx = np.array([i for i, _ in state.picks])
    t = np.array([t for _, t in state.picks])
    # A accumulates t v v', so the row weight realizing A is sqrt(t)
    weights = config.final_scale * np.sqrt(t)
    return SamplingScheme(idx, weights, "bss", d, extra={"ell": ell})


def certify_spectral_bound(u, scheme: SamplingScheme) -> float:
    """``|| I - U' R' R U ||_2`` for ``u`` with orthonormal columns (``d x ell``)."""
    u = np.asarray(u, dtype=float)
    if u.shape[0] != scheme.d:
        raise DimensionError(f"u has {u.shape[0]} rows, scheme is over d={scheme.d}")
    ru = u[scheme.indices] * scheme.weights[:, None]
    return spectral_norm(np.eye(u.shape[1]) - ru.T @ ru)


def empirical_bound(ell: int, r: int) -> float:
    """``2 sqrt(ell/r) + ell/r``, the two-sided bound implied by the singular-value sandwich."""
    s = math.sqrt(ell / r)
    return 2 * s + s * s
