"""Cross-validated selector comparisons for RLSC and fixed-design ridge risk.

Seeds are derived hierarchically from ``(seed, repeat)`` for fold splits and
``(seed, repeat, fold, draw)`` for randomized selectors, so adding or
removing a selector never changes the folds any other selector sees.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .bss import BssConfig, bss_select, certify_spectral_bound
from .datagen import SyntheticSpec, synth_classification, synth_regression
from .ingest import demo_corpus_paths, filter_short_terms, load_corpus, read_vector
from .linalg import (
    FeatureMatrix,
    SamplingScheme,
    apply_scheme,
    apply_scheme_to_points,
    as_feature_matrix,
    identity_scheme,
    thin_svd,
)
from .risk import kernel, risk, sampled_kernel
from .samplers import (
    info_gain_select,
    leverage_sample,
    leverage_sample_size,
    leverage_scores,
    random_select,
    rrqr_select,
)
from .solvers import rlsc_predict, rlsc_train

SELECTORS = ("bss", "leverage", "rrqr", "info-gain", "random", "identity")
RANDOMIZED = {"leverage", "random"}
BSS_PRIORITIES = ("feature-norm", "leverage")
CSV_COLUMNS = ("selector", "r", "lambda", "mean_error", "std_error", "runtime_seconds")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``errors`` maps field -> message."""

    def __init__(self, errors: Dict[str, str]):
        self.errors = errors
        super().__init__("; ".join(f"{k}: {v}" for k, v in errors.items()))


@dataclass
class ExperimentConfig:
    task: str
    selectors: List[str]
    r_values: List[int]
    lambdas: List[float]
    folds: int = 10
    repeats: int = 10
    seed: int = 0
    data: dict = field(default_factory=dict)
    timing: bool = True
    output: Optional[str] = None
    format: str = "csv"
    sampling_repeats: int = 5
    bss_priority: str = "feature-norm"

    def __post_init__(self):
        errors = {}
        if self.task not in ("rlsc", "ridge-risk"):
            errors["task"] = f"must be 'rlsc' or 'ridge-risk', got {self.task!r}"
        if not self.selectors:
            errors["selectors"] = "at least one selector is required"
        bad = [s for s in self.selectors if s not in SELECTORS]
        if bad:
            errors["selectors"] = f"unknown selectors {bad}; choose from {list(SELECTORS)}"
        if self.task == "ridge-risk" and "info-gain" in self.selectors:
            errors["selectors"] = "info-gain needs labels and cannot drive label-free risk runs"
        if not self.r_values or any(int(r) < 1 for r in self.r_values):
            errors["r_values"] = "r must be >= 1"
        if not self.lambdas:
            errors["lambdas"] = "at least one lambda is required"
        elif self.task == "rlsc" and any(lam < 0 for lam in self.lambdas):
            errors["lambdas"] = "rlsc needs lambda >= 0"
        elif self.task == "ridge-risk" and any(lam <= 0 for lam in self.lambdas):
            errors["lambdas"] = "ridge needs lambda > 0"
        if self.folds < 2:
            errors["folds"] = "need at least 2 folds"
        if self.repeats < 1:
            errors["repeats"] = "need at least 1 repeat"
        if self.sampling_repeats < 1:
            errors["sampling_repeats"] = "need at least 1 draw per fold"
        if self.bss_priority not in BSS_PRIORITIES:
            errors["bss_priority"] = f"must be one of {list(BSS_PRIORITIES)}"
        if self.format not in ("csv", "json"):
            errors["format"] = "must be 'csv' or 'json'"
        if errors:
            raise ConfigError(errors)
        self.r_values = [int(r) for r in self.r_values]
        self.lambdas = [float(v) for v in self.lambdas]

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError({"config": "top level must be a JSON object"})
        known = {f.name for f in fields(cls)}
        errors = {k: "unknown field" for k in sorted(set(obj) - known)}
        for k in ("task", "selectors", "r_values", "lambdas"):
            if k not in obj:
                errors[k] = "required field missing"
        if errors:
            raise ConfigError(errors)
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError({"config": str(exc)}) from None

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError({"config": f"malformed JSON: {exc}"}) from None
        return cls.from_dict(obj)


@dataclass(frozen=True)
class ResultRow:
    selector: str
    r: int
    lam: float
    mean_error: float
    std_error: float
    runtime_seconds: float


@dataclass
class Dataset:
    x: FeatureMatrix
    y: np.ndarray
    z: Optional[np.ndarray] = None
    sigma2: Optional[float] = None
    vocabulary: Optional[List[str]] = None


def load_data(data: dict) -> Dataset:
    """Materialize the ``data`` block of a config.

    Kinds: ``synthetic-classification`` / ``synthetic-regression`` (keys of
    :class:`SyntheticSpec`), ``corpus`` (``matrix``, ``labels``, ``vocab``)
    and ``demo`` (``name``). Corpora take an optional ``min_term_length``
    (default 5) and, for risk runs, ``noise_sigma`` / ``noise_seed``: the
    labels become the noiseless response ``z`` and Gaussian noise is added.
    """
    data = dict(data)
    kind = data.pop("kind", None)
    if kind in ("synthetic-classification", "synthetic-regression"):
        try:
            spec = SyntheticSpec(**data)
        except TypeError as exc:
            raise ConfigError({"data": str(exc)}) from None
        if kind == "synthetic-classification":
            x, y = synth_classification(spec)
            return Dataset(x, y)
        x, y, _, z = synth_regression(spec)
        return Dataset(x, y, z=z, sigma2=spec.noise_sigma**2)
    if kind in ("corpus", "demo"):
        if kind == "demo":
            paths = demo_corpus_paths(data.pop("name"))
        else:
            paths = {k: data.pop(k) for k in ("matrix", "labels", "vocab")}
        corpus = load_corpus(paths["matrix"], paths["labels"], paths["vocab"])
        min_len = data.pop("min_term_length", 5)
        if min_len > 1:
            corpus = filter_short_terms(corpus, min_len)
        ds = Dataset(corpus.matrix, corpus.labels, vocabulary=corpus.vocabulary)
        if "z" in data:
            ds.z = read_vector(data.pop("z"))
        noise = data.pop("noise_sigma", None)
        noise_seed = data.pop("noise_seed", 0)
        if noise is not None:
            z = ds.z if ds.z is not None else corpus.labels.astype(float)
            rng = np.random.default_rng(noise_seed)
            ds.z = z
            ds.y = z + noise * rng.standard_normal(z.size)
            ds.sigma2 = float(noise) ** 2
        if data:
            raise ConfigError({f"data.{k}": "unknown field" for k in data})
        return ds
    raise ConfigError({"data.kind": f"unknown data kind {kind!r}"})


def feature_norms(x) -> np.ndarray:
    fm = as_feature_matrix(x)
    v = fm.values
    if hasattr(v, "multiply"):
        return np.sqrt(np.asarray(v.multiply(v).sum(axis=1)).ravel())
    return np.linalg.norm(v, axis=1)


def select_features(method: str, x, labels, r: int, seed=None,
                    bss_priority: str = "feature-norm") -> SamplingScheme:
    """Run one selector on a training matrix (``d x n_train``).

    ``bss_priority`` decides which admissible column BSS takes at each step:
    the feature with the largest row norm in ``x`` (``"feature-norm"``) or
    the one with the largest leverage (``"leverage"``).
    """
    fm = as_feature_matrix(x)
    if method == "bss":
        svd = thin_svd(fm)
        if bss_priority not in BSS_PRIORITIES:
            raise ValueError(f"unknown bss_priority {bss_priority!r}")
        priority = feature_norms(fm) if bss_priority == "feature-norm" else None
        return bss_select(svd.u.T, BssConfig(r=r, ell=svd.rho), priority=priority)
    if method == "leverage":
        return leverage_sample(leverage_scores(thin_svd(fm)), r, seed)
    if method == "rrqr":
        return rrqr_select(fm, r)
    if method == "info-gain":
        return info_gain_select(fm, labels, r)
    if method == "random":
        return random_select(fm.d, r, seed)
    if method == "identity":
        return identity_scheme(fm.d)
    raise ValueError(f"unknown selector {method!r}")


def sample_size_for_epsilon(method: str, rho: int, epsilon: float,
                            delta: float = 0.1) -> int:
    """``r`` that targets spectral error ``epsilon`` for bss or leverage."""
    if method == "bss":
        return BssConfig.from_epsilon(rho, epsilon).r
    if method == "leverage":
        return leverage_sample_size(rho, epsilon, delta)
    raise ValueError(f"epsilon only applies to bss and leverage, not {method!r}")


def fold_splits(n: int, folds: int, repeat: int, seed: int) -> List[np.ndarray]:
    """Held-out index sets for one repeat."""
    perm = np.random.default_rng([seed, repeat]).permutation(n)
    return np.array_split(perm, folds)


def selector_seed(seed: int, repeat: int, fold: int, draw: int = 0) -> int:
    return int(np.random.SeedSequence([seed, repeat, fold, draw]).generate_state(1)[0])


@dataclass
class CvResult:
    selector: str
    r: int
    lambdas: List[float]
    errors: np.ndarray  # (repeats, folds, lambdas) misclassifications, averaged over draws
    sizes: np.ndarray  # (repeats, folds) held-out sizes
    selections: List[np.ndarray]
    select_seconds: List[float]

    def repeat_error_pct(self) -> np.ndarray:
        """(repeats, lambdas) percent misclassified over all held-out points."""
        return 100.0 * self.errors.sum(axis=1) / self.sizes.sum(axis=1)[:, None]

    def rows(self, timing: bool = True) -> List[ResultRow]:
        pct = self.repeat_error_pct()
        ddof = 1 if pct.shape[0] > 1 else 0
        runtime = float(np.mean(self.select_seconds)) if timing else 0.0
        return [
            ResultRow(self.selector, self.r, lam, float(pct[:, j].mean()),
                      float(pct[:, j].std(ddof=ddof)), runtime)
            for j, lam in enumerate(self.lambdas)
        ]


def cross_validate_rlsc(x, labels, selector: str, r: int, lambdas: Sequence[float],
                        folds: int = 10, repeats: int = 10, seed: int = 0,
                        sampling_repeats: int = 5,
                        bss_priority: str = "feature-norm") -> CvResult:
    """Repeated k-fold RLSC with features chosen on each training split only.

    Held-out points are reduced with the training scheme before scoring.
    Randomized selectors draw ``sampling_repeats`` schemes per fold and the
    fold error is their average.
    """
    fm = as_feature_matrix(x)
    y = np.asarray(labels).ravel()
    n = fm.n
    lambdas = [float(v) for v in lambdas]
    draws = sampling_repeats if selector in RANDOMIZED else 1
    errors = np.zeros((repeats, folds, len(lambdas)))
    sizes = np.zeros((repeats, folds), dtype=int)
    selections, seconds = [], []
    for rep in range(repeats):
        for f, test in enumerate(fold_splits(n, folds, rep, seed)):
            train = np.setdiff1d(np.arange(n), test)
            x_train = fm.columns(train)
            x_test = fm.columns(test).dense()
            for s in range(draws):
                t0 = time.perf_counter()
                scheme = select_features(selector, x_train, y[train], r,
                                         selector_seed(seed, rep, f, s), bss_priority)
                seconds.append(time.perf_counter() - t0)
                selections.append(scheme.indices.copy())

                x_red = apply_scheme(scheme, x_train)
                q_red = apply_scheme_to_points(scheme, x_test)
                svd = thin_svd(x_red)
                for j, lam in enumerate(lambdas):
                    model = rlsc_train(x_red, y[train], lam, svd=svd)
                    scores = np.atleast_1d(rlsc_predict(model, q_red))
                    pred = np.where(scores >= 0, 1, -1)
                    errors[rep, f, j] += np.sum(pred != y[test]) / draws
            sizes[rep, f] = test.size
    return CvResult(selector, r, lambdas, errors, sizes, selections, seconds)


def selection_counts(selections: Sequence[np.ndarray], d: int) -> np.ndarray:
    """Number of schemes in which each feature was selected."""
    counts = np.zeros(d, dtype=int)
    for idx in selections:
        counts[np.unique(idx)] += 1
    return counts


def mean_positions(selections: Sequence[np.ndarray], d: int) -> np.ndarray:
    """Average relative position (0 = first pick) of each feature, ``inf`` if never picked."""
    total = np.zeros(d)
    seen = np.zeros(d, dtype=int)
    for idx in selections:
        idx = np.asarray(idx)
        uniq, first = np.unique(idx, return_index=True)
        total[uniq] += first / max(idx.size, 1)
        seen[uniq] += 1
    out = np.full(d, np.inf)
    out[seen > 0] = total[seen > 0] / seen[seen > 0]
    return out


def top_features(selections: Sequence[np.ndarray], d: int, m: int = 5) -> np.ndarray:
    """The ``m`` most frequently selected features.

    Equal counts are ordered by mean pick position, so the order a selector
    itself assigns breaks ties; the feature index is the last resort.
    """
    counts = selection_counts(selections, d)
    order = np.lexsort((np.arange(d), mean_positions(selections, d), -counts))
    return order[:m]


def _check_r(config: ExperimentConfig, d: int):
    bad = [r for r in config.r_values if r >= d]
    if bad and set(config.selectors) - {"identity"}:
        raise ConfigError({"r_values": f"r must be < d={d}, got {bad}"})


def run_rlsc_experiment(config: ExperimentConfig, data: Optional[Dataset] = None,
                        return_selections: bool = False):
    if config.task != "rlsc":
        raise ConfigError({"task": "run_rlsc_experiment needs task 'rlsc'"})
    if data is None:
        data = load_data(config.data)
    _check_r(config, data.x.d)
    rows, selections = [], {}
    for sel in config.selectors:
        r_values = [data.x.d] if sel == "identity" else config.r_values
        for r in r_values:
            cv = cross_validate_rlsc(data.x, data.y, sel, r, config.lambdas,
                                     config.folds, config.repeats, config.seed,
                                     config.sampling_repeats, config.bss_priority)
            rows.extend(cv.rows(config.timing))
            selections[(sel, r)] = cv.selections
    return (rows, selections) if return_selections else rows


@dataclass(frozen=True)
class RiskComparison:
    """Full versus sampled risk for one scheme, with the measured distortion."""

    full: float
    sampled: float
    delta_hat: float

    @property
    def ratio(self) -> float:
        return self.sampled / self.full


def compare_risk(x, z, sigma2: float, scheme: SamplingScheme, lam: float,
                 k_full: Optional[np.ndarray] = None, u=None) -> RiskComparison:
    if k_full is None:
        k_full = kernel(x)
    if u is None:
        u = thin_svd(x).u
    full = risk(k_full, z, lam, sigma2).total
    sampled = risk(sampled_kernel(x, scheme), z, lam, sigma2).total
    return RiskComparison(full, sampled, certify_spectral_bound(u, scheme))


def run_risk_experiment(config: ExperimentConfig, data: Optional[Dataset] = None) -> List[ResultRow]:
    """Fixed-design risk of the full kernel and of each selector's kernel.

    Selection uses the full design matrix and never the responses. Rows with
    selector ``"full"`` report ``R(K)``; the others report ``R(K~)``
    averaged over repeats (deterministic selectors run once).
    """
    if config.task != "ridge-risk":
        raise ConfigError({"task": "run_risk_experiment needs task 'ridge-risk'"})
    if data is None:
        data = load_data(config.data)
    if data.z is None or data.sigma2 is None:
        raise ConfigError({"data": "risk runs need a noiseless response and noise level"})
    _check_r(config, data.x.d)
    x = data.x
    k_full = kernel(x)
    rows = []
    for lam in config.lambdas:
        rep = risk(k_full, data.z, lam, data.sigma2)
        rows.append(ResultRow("full", x.d, lam, rep.total, 0.0, 0.0))
    for sel in config.selectors:
        r_values = [x.d] if sel == "identity" else config.r_values
        for r in r_values:
            reps = config.repeats if sel in RANDOMIZED else 1
            totals = np.zeros((reps, len(config.lambdas)))
            seconds = []
            for rep in range(reps):
                t0 = time.perf_counter()
                scheme = select_features(sel, x, None, r, selector_seed(config.seed, rep, 0),
                                         config.bss_priority)
                seconds.append(time.perf_counter() - t0)
                k_s = sampled_kernel(x, scheme)
                for j, lam in enumerate(config.lambdas):
                    totals[rep, j] = risk(k_s, data.z, lam, data.sigma2).total
            ddof = 1 if reps > 1 else 0
            runtime = float(np.mean(seconds)) if config.timing else 0.0
            for j, lam in enumerate(config.lambdas):
                rows.append(ResultRow(sel, r, lam, float(totals[:, j].mean()),
                                      float(totals[:, j].std(ddof=ddof)), runtime))
    return rows


def run_experiment(config: ExperimentConfig, data: Optional[Dataset] = None) -> List[ResultRow]:
    if config.task == "rlsc":
        return run_rlsc_experiment(config, data)
    return run_risk_experiment(config, data)


def _row_record(row: ResultRow) -> dict:
    return {
        "selector": row.selector,
        "r": int(row.r),
        "lambda": round(float(row.lam), 4),
        "mean_error": round(float(row.mean_error), 4),
        "std_error": round(float(row.std_error), 4),
        "runtime_seconds": round(float(row.runtime_seconds), 4),
    }


def format_results(rows: Sequence[ResultRow], fmt: str = "csv") -> str:
    if not rows:
        raise ValueError("no result rows to emit")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([row.selector, int(row.r), f"{row.lam:.4f}", f"{row.mean_error:.4f}",
                             f"{row.std_error:.4f}", f"{row.runtime_seconds:.4f}"])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([_row_record(r) for r in rows], indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_results(rows: Sequence[ResultRow], path, fmt: str = "csv") -> None:
    """Write rows as CSV or JSON with fixed column order and 4-decimal rounding."""
    text = format_results(rows, fmt)
    Path(path).write_text(text, encoding="utf-8")


def load_results(path, fmt: Optional[str] = None) -> List[ResultRow]:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    if fmt == "json":
        records = json.loads(path.read_text(encoding="utf-8"))
    else:
        with path.open(encoding="utf-8", newline="") as fh:
            records = list(csv.DictReader(fh))
    return [
        ResultRow(rec["selector"], int(rec["r"]), float(rec["lambda"]),
                  float(rec["mean_error"]), float(rec["std_error"]),
                  float(rec["runtime_seconds"]))
        for rec in records
    ]


def rounded(row: ResultRow) -> ResultRow:
    rec = _row_record(row)
    return ResultRow(rec["selector"], rec["r"], rec["lambda"], rec["mean_error"],
                     rec["std_error"], rec["runtime_seconds"])


def config_to_dict(config: ExperimentConfig) -> dict:
    return asdict(config)
