"""Command-line entry points.

Three subcommands:

* ``run``             - one experiment (repeats included), report to stdout
                        and optionally to files.
* ``sweep``           - the same experiment repeated along one config axis
                        (preprocessor or classifier), with a comparison table.
* ``detect-outliers`` - score a whole CSV with the class-outlier detector
                        and print or save the ranked report.

Flags override values from ``--config``. Exit codes: 0 success, 1 bad
configuration, 2 bad data, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .class_outlier import OutlierParams, codb_detect, ecodb_detect
from .errors import ConfigError, DataError
from .distance import Measure
from .harness import (
    config_from_json_obj,
    load_config,
    load_dataset,
    run_experiment,
    run_sweep,
    write_run_report,
    write_sweep_report,
)


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit code 1)."""

    def error(self, message):
        raise ConfigError(message)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.run(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit code 3
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def _build_parser() -> _Parser:
    parser = _Parser(prog="ecoamlp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", parents=[_experiment_flags()],
                           help="run one experiment configuration")
    run_p.set_defaults(run=_cmd_run)

    sweep_p = sub.add_parser("sweep", parents=[_experiment_flags()],
                             help="compare variants along one config axis")
    sweep_p.add_argument("--axis", choices=("preprocessor", "classifier"),
                         default="preprocessor")
    sweep_p.add_argument("--variants", required=True,
                         help="comma-separated variant names, e.g. none,ecodb")
    sweep_p.set_defaults(run=_cmd_sweep)

    det_p = sub.add_parser("detect-outliers",
                           help="rank class outliers in a whole CSV")
    det_p.add_argument("--data", required=True)
    det_p.add_argument("--schema", choices=("infer", "pidd"), default="infer")
    det_p.add_argument("--drop-feature", action="append", default=[], metavar="NAME")
    det_p.add_argument("--algorithm", choices=("ecodb", "codb"), default="ecodb")
    det_p.add_argument("--k", type=int, default=OutlierParams.k)
    det_p.add_argument("--n-outliers", type=int, default=OutlierParams.n_outliers)
    det_p.add_argument("--measure", default=OutlierParams.measure.value,
                       choices=[m.value for m in Measure])
    det_p.add_argument("--alpha", type=float, default=OutlierParams.alpha)
    det_p.add_argument("--beta", type=float, default=OutlierParams.beta)
    det_p.add_argument("--output", metavar="FILE", help="write JSON here instead of stdout")
    det_p.set_defaults(run=_cmd_detect)
    return parser


def _experiment_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="FILE", help="JSON config; flags override it")
    p.add_argument("--data", metavar="FILE")
    p.add_argument("--schema", choices=("infer", "pidd"))
    p.add_argument("--drop-feature", action="append", metavar="NAME",
                   help="drop a feature column by name (repeatable)")
    p.add_argument("--train-fraction", type=float)
    p.add_argument("--validation-fraction", type=float)
    p.add_argument("--test-fraction", type=float)
    p.add_argument("--split-seed", type=int)
    p.add_argument("--stratified", action="store_true", default=None)
    p.add_argument("--preprocessor",
                   choices=("none", "ztransform", "bootstrap", "stratified", "ecodb"))
    p.add_argument("--fraction", type=float, help="sampling fraction for bootstrap/stratified")
    p.add_argument("--preprocessor-seed", type=int)
    p.add_argument("--outlier-k", type=int)
    p.add_argument("--n-outliers", type=int)
    p.add_argument("--outlier-measure", choices=[m.value for m in Measure])
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--classifier", choices=("automlp", "knn", "nb"))
    p.add_argument("--ensemble-size", type=int)
    p.add_argument("--cycles", type=int, help="training cycles per generation")
    p.add_argument("--generations", type=int)
    p.add_argument("--hidden-range", type=int, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--lr-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--automlp-seed", type=int)
    p.add_argument("--warm-start", action="store_true", default=None,
                   help="offspring with unchanged width inherit parent weights")
    p.add_argument("--knn-k", type=int)
    p.add_argument("--knn-measure", choices=[m.value for m in Measure])
    p.add_argument("--repeats", type=int)
    p.add_argument("--output", metavar="DIR", help="write report.json/report.txt here")
    p.add_argument("--evaluate-on-train", action="store_true", default=None,
                   help="score the training set instead of the test set")
    return p


def _experiment_config(args):
    if args.config:
        obj = _raw_config(args.config)
    else:
        obj = {}
    _override(obj, "data", args.data)
    _override(obj, "schema", args.schema)
    if args.drop_feature:
        obj["drop_features"] = list(obj.get("drop_features", [])) + args.drop_feature
    split = obj.setdefault("split", {})
    _override(split, "train", args.train_fraction)
    _override(split, "validation", args.validation_fraction)
    _override(split, "test", args.test_fraction)
    _override(split, "seed", args.split_seed)
    _override(split, "stratified", args.stratified)
    pre = obj.setdefault("preprocessor", {})
    _override(pre, "kind", args.preprocessor)
    _override(pre, "fraction", args.fraction)
    _override(pre, "seed", args.preprocessor_seed)
    outlier = pre.setdefault("outlier", {})
    _override(outlier, "k", args.outlier_k)
    _override(outlier, "n_outliers", args.n_outliers)
    _override(outlier, "measure", args.outlier_measure)
    _override(outlier, "alpha", args.alpha)
    _override(outlier, "beta", args.beta)
    clf = obj.setdefault("classifier", {})
    _override(clf, "kind", args.classifier)
    _override(clf, "knn_k", args.knn_k)
    _override(clf, "knn_measure", args.knn_measure)
    automlp = clf.setdefault("automlp", {})
    _override(automlp, "ensemble_size", args.ensemble_size)
    _override(automlp, "cycles_per_generation", args.cycles)
    _override(automlp, "generations", args.generations)
    _override(automlp, "hidden_range", args.hidden_range)
    _override(automlp, "lr_range", args.lr_range)
    _override(automlp, "seed", args.automlp_seed)
    _override(automlp, "warm_start", args.warm_start)
    _override(obj, "repeats", args.repeats)
    _override(obj, "output_dir", args.output)
    _override(obj, "evaluate_on_train", args.evaluate_on_train)
    return config_from_json_obj(obj)


def _raw_config(path) -> dict:
    # reuse load_config's validation, then re-read the raw object so flag
    # overrides can be applied before the final parse
    load_config(path)
    with open(path) as fh:
        return json.load(fh)


def _override(obj: dict, key: str, value) -> None:
    if value is not None:
        obj[key] = value


def _cmd_run(args) -> int:
    config = _experiment_config(args)
    report = run_experiment(config)
    print(report.to_text(), end="")
    if config.output_dir:
        json_path, text_path = write_run_report(report, config.output_dir)
        print(f"wrote {json_path} and {text_path}")
    return 0


def _cmd_sweep(args) -> int:
    config = _experiment_config(args)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    report = run_sweep(config, args.axis, variants)
    print(report.to_text(), end="")
    if config.output_dir:
        json_path, text_path = write_sweep_report(report, config.output_dir)
        print(f"wrote {json_path} and {text_path}")
    return 0


def _cmd_detect(args) -> int:
    from .data import infer_schema, load_csv, pidd_schema

    schema = pidd_schema() if args.schema == "pidd" else infer_schema(args.data)
    # nominal values are already category ordinals after load; keeping the
    # nominal kind metadata lets the mixed measure see which columns are which
    dataset = load_csv(args.data, schema)
    if args.drop_feature:
        dataset = dataset.drop_features(args.drop_feature)
    params = OutlierParams(
        k=args.k,
        n_outliers=args.n_outliers,
        measure=Measure.parse(args.measure),
        alpha=args.alpha,
        beta=args.beta,
    )
    detect = ecodb_detect if args.algorithm == "ecodb" else codb_detect
    report = detect(dataset, params)
    text = json.dumps(report.to_json_obj(), indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.output}")
    else:
        print(text)
    return 0
