"""Command-line front end: ``train``, ``predict``, ``cv`` and ``grid``.

Exit codes: 0 success, 1 input/output failure, 2 bad arguments,
3 infeasible or numerically degenerate training. Failures also print a
one-line JSON object ``{"error": ..., "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

import numpy as np

from .dataset import Dataset, DatasetError, ScalingParams, fit_scaling, load_csv, load_features_csv
from .harness import (DEFAULT_C, DEFAULT_EPSILON, DEFAULT_GAMMA, GridSearchError, HyperGrid,
                      HyperPoint, cross_validate, format_table, grid_search, report_json)
from .kernel import KernelSpec
from .mcm import (Hyper, KernelMcmModel, LinearMcmModel, TrainingError, fit_kernel, fit_linear,
                  predict_kernel, predict_linear)

FORMAT_VERSION = 1

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_TRAINING = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ModelFormatError(Exception):
    pass


# ---------------------------------------------------------------- model files

def model_to_dict(model: LinearMcmModel | KernelMcmModel, scaling: ScalingParams) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "b": model.b,
        "eta": model.eta,
        "h": model.h,
        "epsilon": model.hyper.epsilon,
        "C": model.hyper.C,
        "scaling": scaling.to_dict(),
    }
    if isinstance(model, LinearMcmModel):
        doc.update(kind="linear", w=model.w.tolist())
    else:
        doc.update(kind="kernel", kernel=model.spec.to_dict(),
                   support_indices=model.support_indices.tolist(), train_X=model.train_X.tolist())
        doc["lambda"] = model.lam.tolist()
    return doc


def model_from_dict(doc: dict) -> tuple[LinearMcmModel | KernelMcmModel, ScalingParams]:
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format_version {version!r}")
    try:
        hyper = Hyper(float(doc["epsilon"]), None if doc["C"] is None else float(doc["C"]))
        scaling = ScalingParams.from_dict(doc["scaling"])
        if doc["kind"] == "linear":
            model = LinearMcmModel(np.array(doc["w"], dtype=float), float(doc["b"]),
                                   float(doc["eta"]), float(doc["h"]), np.zeros(0), np.zeros(0),
                                   hyper)
        elif doc["kind"] == "kernel":
            lam = np.array(doc["lambda"], dtype=float)
            X = np.array(doc["train_X"], dtype=float).reshape(len(lam), -1)
            model = KernelMcmModel(lam, float(doc["b"]), float(doc["eta"]), float(doc["h"]),
                                   np.array(doc["support_indices"], dtype=int), X,
                                   KernelSpec.from_dict(doc["kernel"]), hyper)
        else:
            raise ModelFormatError(f"unknown model kind {doc['kind']!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from exc
    return model, scaling


def save_model(path: str, model, scaling: ScalingParams) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model, scaling), fh, indent=1)
        fh.write("\n")


def load_model(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path} is not valid JSON: {exc}") from exc
    return model_from_dict(doc)


def predict(model, X) -> np.ndarray:
    if isinstance(model, LinearMcmModel):
        return predict_linear(model, X)
    return predict_kernel(model, X)


def n_model_features(model) -> int:
    return len(model.w) if isinstance(model, LinearMcmModel) else model.train_X.shape[1]


# ---------------------------------------------------------------- argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or not np.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _positive_list(text: str) -> tuple[float, ...]:
    return tuple(sorted(_positive(t) for t in text.split(",") if t.strip()))


def _target_col(text: str) -> int | str:
    if text == "last":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"target column must be an integer or 'last', got {text!r}") from None


def _add_shared(p: argparse.ArgumentParser, data_help: str = "training CSV") -> None:
    p.add_argument("--data", required=True, help=data_help)
    p.add_argument("--header", action="store_true", help="the CSV starts with a header line")
    p.add_argument("--target-col", type=_target_col, default="last",
                   help="0-based target column index or 'last' (default)")
    p.add_argument("--seed", type=int, default=None, help="fold-shuffling seed")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")


def _add_model_flags(p: argparse.ArgumentParser, single: bool) -> None:
    p.add_argument("--kind", choices=("linear", "kernel"), default="linear")
    p.add_argument("--kernel", choices=("rbf", "linear", "polynomial"), default="rbf")
    p.add_argument("--degree", type=int, default=3, help="polynomial kernel degree")
    p.add_argument("--coef0", type=float, default=1.0, help="polynomial kernel offset")
    p.add_argument("--no-standardize", action="store_true",
                   help="train on raw features and targets")
    if single:
        p.add_argument("--epsilon", type=_positive, default=0.1,
                       help="tube half-width in standardized target units (default 0.1)")
        p.add_argument("--C", type=_positive, default=None,
                       help="slack penalty; omit for the hard margin (linear only)")
        p.add_argument("--gamma", type=_positive, default=1.0, help="rbf width (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcmreg", description="Minimal Complexity Machine regression.",
                     allow_abbrev=False)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", allow_abbrev=False,
                       help="fit one model and write it as JSON")
    _add_shared(p)
    _add_model_flags(p, single=True)

    p = sub.add_parser("predict", allow_abbrev=False,
                       help="apply a model file to a feature CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="feature-only CSV")
    p.add_argument("--header", action="store_true")
    p.add_argument("--out", default=None)
    p.add_argument("--standardized", action="store_true",
                   help="emit predictions in standardized target units")

    p = sub.add_parser("cv", allow_abbrev=False,
                       help="k-fold cross-validation at one hyperparameter point")
    _add_shared(p)
    _add_model_flags(p, single=True)
    p.add_argument("-k", "--folds", type=int, default=5)
    p.add_argument("--raw-units", action="store_true", help="report MSE in raw target units")
    p.add_argument("--no-timings", action="store_true",
                   help="omit wall-clock times so equal runs give identical JSON")

    p = sub.add_parser("grid", allow_abbrev=False,
                       help="grid search by k-fold cross-validation")
    _add_shared(p)
    _add_model_flags(p, single=False)
    p.add_argument("-k", "--folds", type=int, default=5)
    p.add_argument("--raw-units", action="store_true", help="report MSE in raw target units")
    p.add_argument("--no-timings", action="store_true",
                   help="omit wall-clock times so equal runs give identical JSON")
    p.add_argument("--C-values", type=_positive_list, default=DEFAULT_C)
    p.add_argument("--epsilon-values", type=_positive_list, default=DEFAULT_EPSILON)
    p.add_argument("--gamma-values", type=_positive_list, default=DEFAULT_GAMMA)
    return parser


# ---------------------------------------------------------------- commands

def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_training(args) -> Dataset:
    return load_csv(args.data, has_header=args.header, target_column=args.target_col)


def _spec(args) -> KernelSpec:
    return KernelSpec(args.kernel, gamma=getattr(args, "gamma", 1.0) or 1.0,
                      degree=args.degree, coef0=args.coef0)


def cmd_train(args) -> int:
    d = _load_training(args)
    if args.kind == "kernel" and args.C is None:
        raise UsageError("--kind kernel needs --C (the kernel machine is soft-margin only)")
    scaling = ScalingParams.identity(d.n_features) if args.no_standardize else fit_scaling(d)
    ds = scaling.apply(d)
    hyper = Hyper(args.epsilon, args.C)
    if args.kind == "linear":
        model = fit_linear(ds, hyper)
    else:
        model = fit_kernel(ds, _spec(args), hyper)
    pred = predict(model, ds.features)
    mse = float(np.mean((pred - ds.targets) ** 2))
    out = args.out or "model.json"
    save_model(out, model, scaling)
    if not args.quiet:
        n_sv = model.n_support if isinstance(model, KernelMcmModel) else None
        rows = [("model", out), ("kind", args.kind), ("h", f"{model.h:.10g}"),
                ("eta", f"{model.eta:.10g}"), ("support", "-" if n_sv is None else n_sv),
                ("train_mse", f"{mse:.6g}"),
                ("train_mse_raw", f"{mse * scaling.target_std ** 2:.6g}")]
        for key, value in rows:
            print(f"{key:<14}{value}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model, scaling = load_model(args.model)
    X = load_features_csv(args.data, has_header=args.header)
    n = n_model_features(model)
    if X.shape[0] and X.shape[1] != n:
        raise UsageError(f"model expects {n} features per row, got {X.shape[1]}")
    if X.shape[0] == 0:
        _write("", args.out)
        return EXIT_OK
    pred = predict(model, scaling.transform_features(X))
    if not args.standardized:
        pred = scaling.inverse_targets(pred)
    _write("".join(f"{v!r}\n" for v in pred.tolist()), args.out)
    return EXIT_OK


def _require_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required so folds are reproducible")
    return args.seed


def cmd_cv(args) -> int:
    seed = _require_seed(args)
    d = _load_training(args)
    if args.kind == "kernel" and args.C is None:
        raise UsageError("--kind kernel needs --C")
    point = HyperPoint(args.epsilon, args.C, args.gamma if args.kind == "kernel" else None,
                       args.kernel)
    report = cross_validate(d, point, args.folds, seed, args.kind,
                            standardize=not args.no_standardize, raw_units=args.raw_units)
    _emit_report(args, report, [report])
    return EXIT_OK


def cmd_grid(args) -> int:
    seed = _require_seed(args)
    d = _load_training(args)
    grid = HyperGrid(args.C_values, args.epsilon_values, args.gamma_values, args.kernel)
    _, best, table = grid_search(d, grid, args.folds, seed, args.kind,
                                 standardize=not args.no_standardize, raw_units=args.raw_units)
    _emit_report(args, best, table)
    return EXIT_OK


def _emit_report(args, best, table) -> None:
    text = report_json(best, table, include_timings=not args.no_timings) + "\n"
    if args.out is not None:
        _write(text, args.out)
        if not args.quiet:
            print(format_table(table, best))
    else:
        _write(text, None)
        if not args.quiet:
            print(format_table(table, best), file=sys.stderr)


COMMANDS = {"train": cmd_train, "predict": cmd_predict, "cv": cmd_cv, "grid": cmd_grid}


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))
    except (TrainingError, GridSearchError) as exc:
        return _fail(EXIT_TRAINING, "training", str(exc))
    except (DatasetError, ModelFormatError, OSError) as exc:
        return _fail(EXIT_IO, "io", str(exc))
    except ValueError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
