"""Command-line front end.

Each command parses flags, calls the library and prints JSON or CSV to
stdout. Diagnostics go to stderr. Exit codes: 0 success, 1 numerical
failure, 2 bad usage or invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bss import BarrierViolation, NoCandidateError, SingularShiftError, certify_spectral_bound
from .datagen import SyntheticSpec, synth_classification, synth_regression, write_dataset
from .harness import (
    BSS_PRIORITIES,
    ConfigError,
    ExperimentConfig,
    format_results,
    run_experiment,
    sample_size_for_epsilon,
    select_features,
)
from .ingest import read_labels, read_vector
from .linalg import (
    DegenerateInputError,
    SamplingScheme,
    apply_scheme,
    apply_scheme_to_points,
    read_matrix,
    thin_svd,
)
from .risk import monte_carlo_risk, kernel, risk, sampled_kernel
from .solvers import (
    model_from_dict,
    ridge_predict,
    ridge_train_dual,
    rlsc_predict,
    rlsc_train,
)

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2
NUMERICAL_ERRORS = (
    np.linalg.LinAlgError,
    NoCandidateError,
    SingularShiftError,
    BarrierViolation,
    DegenerateInputError,
    FloatingPointError,
)


class UsageError(ValueError):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _load_scheme(path) -> SamplingScheme:
    return SamplingScheme.from_json(Path(path).read_text(encoding="utf-8"))


def cmd_select(args) -> int:
    x = read_matrix(args.matrix)
    labels = read_labels(args.labels) if args.labels else None
    if args.method == "info-gain" and labels is None:
        raise UsageError("info-gain needs --labels")
    svd = thin_svd(x)
    if args.epsilon is not None:
        r = sample_size_for_epsilon(args.method, svd.rho, args.epsilon, args.delta)
    else:
        r = args.r
    if r < 1:
        raise UsageError("r must be >= 1")
    scheme = select_features(args.method, x, labels, r, args.seed, args.bss_priority)
    text = scheme.to_json()
    report = {"method": args.method, "r": scheme.r, "rho": svd.rho}
    if args.method in ("bss", "leverage"):
        err = certify_spectral_bound(svd.u, scheme)
        bound = 3.0 * np.sqrt(svd.rho / scheme.r)
        report.update(spectral_error=err, bound=bound, within_bound=bool(err <= bound))
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        _emit(report)
    else:
        sys.stdout.write(text + "\n")
        print(json.dumps(report), file=sys.stderr)
    return EXIT_OK


def _reduce(x, scheme_path):
    if not scheme_path:
        return x, None
    scheme = _load_scheme(scheme_path)
    return apply_scheme(scheme, x), scheme


def cmd_train(args) -> int:
    x = read_matrix(args.matrix)
    x_fit, scheme = _reduce(x, args.scheme)
    if args.kind == "rlsc":
        if not args.labels:
            raise UsageError("rlsc needs --labels")
        model = rlsc_train(x_fit, read_labels(args.labels), args.lam)
    else:
        if not args.targets:
            raise UsageError("ridge needs --targets")
        model = ridge_train_dual(x_fit, read_vector(args.targets), args.lam)
    obj = model.to_dict()
    obj["scheme"] = scheme.to_dict() if scheme is not None else None
    text = json.dumps(obj, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_predict(args) -> int:
    obj = json.loads(Path(args.model).read_text(encoding="utf-8"))
    scheme = SamplingScheme.from_dict(obj["scheme"]) if obj.get("scheme") else None
    q = read_matrix(args.points).dense()
    if scheme is not None:
        q = apply_scheme_to_points(scheme, q)
    if obj.get("kind") == "rlsc":
        if not args.matrix:
            raise UsageError("rlsc prediction needs the training --matrix")
        x = read_matrix(args.matrix)
        if scheme is not None:
            x = apply_scheme(scheme, x)
        scores = np.atleast_1d(rlsc_predict(model_from_dict(obj, x), q))
        _emit({"scores": scores.tolist(),
               "labels": np.where(scores >= 0, 1, -1).tolist()})
    else:
        preds = np.atleast_1d(ridge_predict(model_from_dict(obj), q))
        _emit({"predictions": preds.tolist()})
    return EXIT_OK


def cmd_risk(args) -> int:
    x = read_matrix(args.matrix)
    z = read_vector(args.targets)
    k = kernel(x)
    out = {"full": risk(k, z, args.lam, args.sigma2).to_dict()}
    k_eval = k
    if args.scheme:
        k_eval = sampled_kernel(x, _load_scheme(args.scheme))
        out["sampled"] = risk(k_eval, z, args.lam, args.sigma2).to_dict()
    if args.monte_carlo:
        mean, se = monte_carlo_risk(k_eval, z, args.lam, args.sigma2,
                                    trials=args.monte_carlo, seed=args.seed)
        analytic = out["sampled" if args.scheme else "full"]["total"]
        out["monte_carlo"] = {"mean": mean, "stderr": se, "trials": args.monte_carlo,
                              "within_3_stderr": bool(abs(mean - analytic) <= 3 * se)}
    _emit(out)
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = SyntheticSpec(n=args.n, d=args.d, k=args.k, seed=args.seed,
                         noise_sigma=args.noise_sigma)
    if args.kind == "classification":
        x, y = synth_classification(spec)
        paths = write_dataset(args.out, x, y)
    else:
        x, y, _, z = synth_regression(spec)
        paths = write_dataset(args.out, x, y, z)
    _emit(paths)
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    config = ExperimentConfig.from_json(text)
    fmt = args.format or config.format
    out = args.out or config.output
    result = format_results(run_experiment(config), fmt)
    if out:
        Path(out).write_text(result, encoding="utf-8")
        print(f"wrote {out}", file=sys.stderr)
    else:
        sys.stdout.write(result)
    return EXIT_OK


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("r must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectralfs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="pick features and write a sampling scheme")
    p.add_argument("--method", required=True,
                   choices=["bss", "leverage", "rrqr", "info-gain", "random"])
    p.add_argument("--matrix", required=True)
    size = p.add_mutually_exclusive_group(required=True)
    size.add_argument("--r", type=_positive_int)
    size.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float, default=0.1,
                   help="failure probability for leverage --epsilon (default 0.1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels")
    p.add_argument("--bss-priority", choices=BSS_PRIORITIES, default="feature-norm")
    p.add_argument("--out")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train", help="fit an RLSC or ridge model")
    p.add_argument("--kind", choices=["rlsc", "ridge"], default="rlsc")
    p.add_argument("--matrix", required=True)
    p.add_argument("--labels")
    p.add_argument("--targets")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--scheme")
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score points with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--points", required=True, help="d x m matrix of points")
    p.add_argument("--matrix", help="training matrix (rlsc models)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("risk", help="fixed-design ridge risk of the full or sampled kernel")
    p.add_argument("--matrix", required=True)
    p.add_argument("--targets", required=True, help="noiseless response z, one value per line")
    p.add_argument("--scheme")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--monte-carlo", type=int, default=0, metavar="TRIALS")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("gen", help="write a synthetic dataset")
    p.add_argument("--kind", choices=["classification", "regression"], default="classification")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("experiment", help="run a cross-validation or risk experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"])
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NUMERICAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConfigError as exc:
        for key, msg in exc.errors.items():
            print(f"config error: {key}: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
