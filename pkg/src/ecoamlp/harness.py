"""Experiment harness: configuration, pipeline stages, reports, sweeps.

A run is: load CSV -> optionally drop features -> split -> encode nominal
features -> preprocess (fit on the training set only) -> fit classifier
(train + validation only) -> evaluate on validation and test.

The test subset is handed exclusively to the evaluation stage; it is
never passed to preparation or fitting, and any fitted transform (such as
a z-transform) is applied to it only inside :func:`evaluate_raw`. Repeat
``i`` of a run offsets every configured seed by ``i`` so repeats differ
from each other but the whole run stays reproducible.

Reports serialise to JSON (stable key order; the timestamp is the only
field that varies between identical runs) and to an aligned text table.
File writes go through a temp file plus rename so readers never observe a
partial report.
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .automlp import AutoMlpParams, AutoMlpRun, fit_automlp
from .baselines import (
    Preprocessor,
    bootstrap_sample,
    knn_predict,
    naive_bayes_fit,
    naive_bayes_predict,
    stratified_sample,
    ztransform_fit,
)
from .class_outlier import (
    OutlierParams,
    OutlierReport,
    ecodb_detect,
    remove_outliers,
)
from .data import (
    Dataset,
    DataSplit,
    SplitSpec,
    infer_schema,
    load_csv,
    pidd_schema,
    split,
    transform_nominal,
)
from .distance import Measure
from .errors import ConfigError
from .metrics import EvalReport, evaluate, format_table

CLASSIFIER_KINDS = ("automlp", "knn", "nb")
SWEEP_AXES = ("preprocessor", "classifier")

ECODB_GAIN_POINTS = 5.0
"""Informational expectation: accuracy gain of ecodb over alternatives."""


@dataclasses.dataclass(frozen=True)
class ClassifierConfig:
    kind: str = "automlp"
    automlp: AutoMlpParams = dataclasses.field(default_factory=AutoMlpParams)
    knn_k: int = 5
    knn_measure: Measure = Measure.EUCLIDEAN

    def __post_init__(self) -> None:
        if self.kind not in CLASSIFIER_KINDS:
            raise ConfigError(
                f"unknown classifier {self.kind!r} (choose from: {', '.join(CLASSIFIER_KINDS)})"
            )
        if self.knn_k < 1:
            raise ConfigError(f"knn_k must be >= 1, got {self.knn_k}")


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    data_path: Optional[str] = None
    schema_name: str = "infer"
    drop_features: Tuple[str, ...] = ()
    split: SplitSpec = dataclasses.field(default_factory=SplitSpec)
    preprocessor: Preprocessor = dataclasses.field(default_factory=Preprocessor)
    classifier: ClassifierConfig = dataclasses.field(default_factory=ClassifierConfig)
    repeats: int = 1
    output_dir: Optional[str] = None
    evaluate_on_train: bool = False

    def __post_init__(self) -> None:
        if self.schema_name not in ("infer", "pidd"):
            raise ConfigError(f"unknown schema {self.schema_name!r} (use 'infer' or 'pidd')")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {self.repeats}")


def config_to_json_obj(config: ExperimentConfig) -> dict:
    pre = config.preprocessor
    out = pre.outlier_params()
    return {
        "data": config.data_path,
        "schema": config.schema_name,
        "drop_features": list(config.drop_features),
        "split": {
            "train": config.split.train_fraction,
            "validation": config.split.validation_fraction,
            "test": config.split.test_fraction,
            "seed": config.split.seed,
            "stratified": config.split.stratified,
        },
        "preprocessor": {
            "kind": pre.kind,
            "fraction": pre.effective_fraction(),
            "seed": pre.seed,
            "outlier": {
                "k": out.k,
                "n_outliers": out.n_outliers,
                "measure": out.measure.value,
                "alpha": out.alpha,
                "beta": out.beta,
            },
        },
        "classifier": {
            "kind": config.classifier.kind,
            "automlp": {
                "ensemble_size": config.classifier.automlp.ensemble_size,
                "cycles_per_generation": config.classifier.automlp.cycles_per_generation,
                "generations": config.classifier.automlp.generations,
                "hidden_range": list(config.classifier.automlp.hidden_range),
                "lr_range": list(config.classifier.automlp.lr_range),
                "seed": config.classifier.automlp.seed,
                "warm_start": config.classifier.automlp.warm_start,
            },
            "knn_k": config.classifier.knn_k,
            "knn_measure": config.classifier.knn_measure.value,
        },
        "repeats": config.repeats,
        "output_dir": config.output_dir,
        "evaluate_on_train": config.evaluate_on_train,
    }


def config_from_json_obj(obj: dict) -> ExperimentConfig:
    obj = _checked_keys("config", obj, {
        "data", "schema", "drop_features", "split", "preprocessor", "classifier",
        "repeats", "output_dir", "evaluate_on_train",
    })
    split_obj = _checked_keys("split", obj.get("split", {}),
                              {"train", "validation", "test", "seed", "stratified"})
    pre_obj = _checked_keys("preprocessor", obj.get("preprocessor", {}),
                            {"kind", "fraction", "seed", "outlier"})
    out_obj = _checked_keys("outlier", pre_obj.get("outlier", {}),
                            {"k", "n_outliers", "measure", "alpha", "beta"})
    clf_obj = _checked_keys("classifier", obj.get("classifier", {}),
                            {"kind", "automlp", "knn_k", "knn_measure"})
    auto_obj = _checked_keys("automlp", clf_obj.get("automlp", {}), {
        "ensemble_size", "cycles_per_generation", "generations",
        "hidden_range", "lr_range", "seed", "warm_start",
    })
    split_default = SplitSpec()
    auto_default = AutoMlpParams()
    outlier = None
    if out_obj:
        base = OutlierParams()
        outlier = OutlierParams(
            k=int(out_obj.get("k", base.k)),
            n_outliers=int(out_obj.get("n_outliers", base.n_outliers)),
            measure=Measure.parse(out_obj.get("measure", base.measure.value)),
            alpha=float(out_obj.get("alpha", base.alpha)),
            beta=float(out_obj.get("beta", base.beta)),
        )
    return ExperimentConfig(
        data_path=obj.get("data"),
        schema_name=obj.get("schema", "infer"),
        drop_features=tuple(obj.get("drop_features", ())),
        split=SplitSpec(
            train_fraction=float(split_obj.get("train", split_default.train_fraction)),
            validation_fraction=float(
                split_obj.get("validation", split_default.validation_fraction)
            ),
            test_fraction=float(split_obj.get("test", split_default.test_fraction)),
            seed=int(split_obj.get("seed", split_default.seed)),
            stratified=bool(split_obj.get("stratified", split_default.stratified)),
        ),
        preprocessor=Preprocessor(
            kind=pre_obj.get("kind", "none"),
            fraction=(float(pre_obj["fraction"]) if "fraction" in pre_obj else None),
            seed=int(pre_obj.get("seed", 0)),
            outlier=outlier,
        ),
        classifier=ClassifierConfig(
            kind=clf_obj.get("kind", "automlp"),
            automlp=AutoMlpParams(
                ensemble_size=int(auto_obj.get("ensemble_size", auto_default.ensemble_size)),
                cycles_per_generation=int(
                    auto_obj.get("cycles_per_generation", auto_default.cycles_per_generation)
                ),
                generations=int(auto_obj.get("generations", auto_default.generations)),
                hidden_range=tuple(auto_obj.get("hidden_range", auto_default.hidden_range)),
                lr_range=tuple(auto_obj.get("lr_range", auto_default.lr_range)),
                seed=int(auto_obj.get("seed", auto_default.seed)),
                warm_start=bool(auto_obj.get("warm_start", auto_default.warm_start)),
            ),
            knn_k=int(clf_obj.get("knn_k", 5)),
            knn_measure=Measure.parse(clf_obj.get("knn_measure", "euclidean")),
        ),
        repeats=int(obj.get("repeats", 1)),
        output_dir=obj.get("output_dir"),
        evaluate_on_train=bool(obj.get("evaluate_on_train", False)),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"no such config file: {path}")
    try:
        with path.open() as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return config_from_json_obj(obj)


@dataclasses.dataclass
class PreparedTraining:
    """Output of the preprocessing stage.

    ``transform`` is what must be applied to any future data before this
    pipeline's classifier may score it (identity for most preprocessors).
    """

    train: Dataset
    validation: Dataset
    transform: Callable[[Dataset], Dataset]
    outliers: Optional[OutlierReport] = None


@dataclasses.dataclass
class FittedClassifier:
    kind: str
    predict: Callable[[np.ndarray], np.ndarray]
    automlp_run: Optional[AutoMlpRun] = None


def prepare_training_data(
    train: Dataset,
    validation: Dataset,
    pre: Preprocessor,
    seed: int,
) -> PreparedTraining:
    """Apply one preprocessor to the training data. Never sees the test set."""
    identity = lambda ds: ds  # noqa: E731
    if pre.kind == "none":
        return PreparedTraining(train, validation, identity)
    if pre.kind == "ztransform":
        zt = ztransform_fit(train)
        return PreparedTraining(zt.apply(train), zt.apply(validation), zt.apply)
    if pre.kind == "bootstrap":
        return PreparedTraining(bootstrap_sample(train, pre.effective_fraction(), seed),
                                validation, identity)
    if pre.kind == "stratified":
        return PreparedTraining(stratified_sample(train, pre.effective_fraction(), seed),
                                validation, identity)
    if pre.kind == "ecodb":
        report = ecodb_detect(train, pre.outlier_params())
        return PreparedTraining(remove_outliers(train, report), validation, identity,
                                outliers=report)
    raise ConfigError(f"unknown preprocessor {pre.kind!r}")


def fit_classifier(
    prepared: PreparedTraining,
    clf: ClassifierConfig,
    seed: int,
) -> FittedClassifier:
    """Fit the configured classifier on preprocessed training data.

    Taking :class:`PreparedTraining` (only ever produced by
    :func:`prepare_training_data`) rather than bare datasets makes it
    impossible to train before preprocessing or to hand the trainer the
    test set.
    """
    if not isinstance(prepared, PreparedTraining):
        raise ConfigError("fit_classifier requires the output of prepare_training_data")
    train, validation = prepared.train, prepared.validation
    if clf.kind == "automlp":
        params = dataclasses.replace(clf.automlp, seed=seed)
        run = fit_automlp(train, validation, params)
        from .mlp import predict as mlp_predict  # local to avoid cycle at import time

        return FittedClassifier("automlp", lambda X: mlp_predict(run.winner, X), run)
    if clf.kind == "knn":
        return FittedClassifier("knn", lambda X: knn_predict(train, X, clf.knn_k, clf.knn_measure))
    if clf.kind == "nb":
        model = naive_bayes_fit(train)
        return FittedClassifier("nb", lambda X: naive_bayes_predict(model, X))
    raise ConfigError(f"unknown classifier {clf.kind!r}")


def evaluate_prepared(fitted: FittedClassifier, dataset: Dataset) -> EvalReport:
    """Score a dataset that already went through the training-side pipeline."""
    return evaluate(fitted.predict(dataset.features), dataset.labels)


def evaluate_raw(fitted: FittedClassifier, prepared: PreparedTraining,
                 dataset: Dataset) -> EvalReport:
    """Score untouched data: encode, apply the fitted transform, predict."""
    return evaluate_prepared(fitted, prepared.transform(transform_nominal(dataset)))


@dataclasses.dataclass(frozen=True)
class RepeatResult:
    repeat_index: int
    split_seed: int
    n_train: int
    n_validation: int
    n_test: int
    validation: EvalReport
    test: EvalReport
    outliers: Optional[OutlierReport] = None
    automlp_history: Optional[list] = None
    winner: Optional[dict] = None

    def to_json_obj(self) -> dict:
        obj = {
            "repeat": self.repeat_index,
            "split_seed": self.split_seed,
            "n_train": self.n_train,
            "n_validation": self.n_validation,
            "n_test": self.n_test,
            "validation": self.validation.to_json_obj(),
            "test": self.test.to_json_obj(),
        }
        if self.outliers is not None:
            obj["outliers"] = self.outliers.to_json_obj()
        if self.automlp_history is not None:
            obj["automlp_history"] = self.automlp_history
        if self.winner is not None:
            obj["winner"] = self.winner
        return obj


AGGREGATED_METRICS = (
    "accuracy",
    "precision_pos",
    "recall_pos",
    "precision_neg",
    "recall_neg",
    "weighted_mean_precision",
    "weighted_mean_recall",
)


def aggregate_reports(reports: Sequence[EvalReport]) -> Dict[str, Dict[str, float]]:
    """Median, min, and max of each metric across repeats."""
    out: Dict[str, Dict[str, float]] = {}
    for name in AGGREGATED_METRICS:
        values = sorted(getattr(r, name) for r in reports)
        mid = len(values) // 2
        median = values[mid] if len(values) % 2 else (values[mid - 1] + values[mid]) / 2.0
        out[name] = {"median": median, "min": values[0], "max": values[-1]}
    return out


@dataclasses.dataclass(frozen=True)
class RunReport:
    config: ExperimentConfig
    repeats: Tuple[RepeatResult, ...]
    created_at: str

    @property
    def aggregates(self) -> Dict[str, Dict[str, Dict[str, float]]]:
        return {
            "validation": aggregate_reports([r.validation for r in self.repeats]),
            "test": aggregate_reports([r.test for r in self.repeats]),
        }

    def to_json_obj(self, include_timestamp: bool = True) -> dict:
        obj = {
            "config": config_to_json_obj(self.config),
            "repeats": [r.to_json_obj() for r in self.repeats],
            "aggregates": self.aggregates,
        }
        if include_timestamp:
            obj["created_at"] = self.created_at
        return obj

    def to_text(self) -> str:
        rows = []
        for r in self.repeats:
            rows.append((f"repeat {r.repeat_index} validation", r.validation))
            rows.append((f"repeat {r.repeat_index} test", r.test))
        agg = self.aggregates["test"]
        lines = [
            f"run of {self.config.classifier.kind} with preprocessor "
            f"{self.config.preprocessor.kind} on {self.config.data_path or '<in-memory>'}",
            f"created {self.created_at}",
            "",
            format_table(rows),
            "",
            "test medians over "
            f"{len(self.repeats)} repeat(s): "
            + ", ".join(
                f"{name} {agg[name]['median'] * 100:.2f}%" for name in AGGREGATED_METRICS
            ),
        ]
        flagged = sorted({name for r in self.repeats
                          for name in r.validation.undefined + r.test.undefined})
        if flagged:
            lines.append("metrics with 0/0 reported as 0 (*): " + ", ".join(flagged))
        return "\n".join(lines) + "\n"


def run_repeat(dataset: Dataset, config: ExperimentConfig, repeat_index: int) -> RepeatResult:
    """One seeded pass of the full pipeline on an already-loaded dataset."""
    spec = dataclasses.replace(config.split, seed=config.split.seed + repeat_index)
    parts = split(dataset, spec)
    train = transform_nominal(parts.train)
    validation = transform_nominal(parts.validation)
    prepared = prepare_training_data(
        train, validation, config.preprocessor, config.preprocessor.seed + repeat_index
    )
    fitted = fit_classifier(
        prepared,
        config.classifier,
        config.classifier.automlp.seed + repeat_index,
    )
    val_report = evaluate_prepared(fitted, prepared.validation)
    target = parts.train if config.evaluate_on_train else parts.test
    test_report = evaluate_raw(fitted, prepared, target)
    winner = None
    history = None
    if fitted.automlp_run is not None:
        run = fitted.automlp_run
        winner = {
            "hidden_units": run.winner.config.hidden_units,
            "learning_rate": run.winner.config.learning_rate,
            "validation_error": run.winner_validation_error,
        }
        history = run.history_json_obj()
    return RepeatResult(
        repeat_index=repeat_index,
        split_seed=spec.seed,
        n_train=len(prepared.train),
        n_validation=len(prepared.validation),
        n_test=len(target),
        validation=val_report,
        test=test_report,
        outliers=prepared.outliers,
        automlp_history=history,
        winner=winner,
    )


def load_dataset(config: ExperimentConfig) -> Dataset:
    if not config.data_path:
        raise ConfigError("no dataset configured: set data_path (--data)")
    schema = pidd_schema() if config.schema_name == "pidd" else infer_schema(config.data_path)
    dataset = load_csv(config.data_path, schema)
    if config.drop_features:
        dataset = dataset.drop_features(config.drop_features)
    return dataset


def run_experiment(config: ExperimentConfig, dataset: Optional[Dataset] = None) -> RunReport:
    """Run all repeats and (if configured) write report files.

    An injected ``dataset`` is used as-is; ``drop_features`` is applied
    only when loading from ``data_path``.
    """
    if dataset is None:
        dataset = load_dataset(config)
    results = tuple(run_repeat(dataset, config, i) for i in range(config.repeats))
    report = RunReport(config, results, created_at=_timestamp())
    if config.output_dir:
        write_run_report(report, config.output_dir)
    return report


@dataclasses.dataclass(frozen=True)
class SweepReport:
    axis: str
    variants: Tuple[str, ...]
    runs: Dict[str, RunReport]
    expectations: Tuple[dict, ...]
    created_at: str

    def to_json_obj(self, include_timestamp: bool = True) -> dict:
        obj = {
            "axis": self.axis,
            "variants": list(self.variants),
            "runs": {v: self.runs[v].to_json_obj(include_timestamp=False)
                     for v in self.variants},
            "expectations": [dict(e) for e in self.expectations],
        }
        if include_timestamp:
            obj["created_at"] = self.created_at
        return obj

    def to_text(self) -> str:
        header = ("variant", "acc%", "wm prec%", "wm rec%")
        body = []
        for v in self.variants:
            agg = self.runs[v].aggregates["test"]
            body.append((
                v,
                f"{agg['accuracy']['median'] * 100:.2f}",
                f"{agg['weighted_mean_precision']['median'] * 100:.2f}",
                f"{agg['weighted_mean_recall']['median'] * 100:.2f}",
            ))
        widths = [max(len(header[c]), *(len(r[c]) for r in body)) for c in range(len(header))]
        lines = [f"sweep over {self.axis} (test medians)"]
        lines.append("  ".join(h.ljust(widths[c]) for c, h in enumerate(header)))
        lines.append("  ".join("-" * w for w in widths))
        for r in body:
            lines.append("  ".join(r[c].ljust(widths[c]) for c in range(len(header))))
        for e in self.expectations:
            status = "met" if e["met"] else "not met"
            lines.append(
                f"reference expectation ({status}, informational only): {e['detail']}"
            )
        return "\n".join(lines) + "\n"


def run_sweep(
    config: ExperimentConfig,
    axis: str,
    variants: Sequence[str],
    dataset: Optional[Dataset] = None,
) -> SweepReport:
    """Re-run the experiment once per variant along one config axis."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r} (choose from: {', '.join(SWEEP_AXES)})")
    variants = tuple(variants)
    if not variants:
        raise ConfigError("sweep needs at least one variant")
    if len(set(variants)) != len(variants):
        raise ConfigError(f"duplicate sweep variants in {variants}")
    if dataset is None:
        dataset = load_dataset(config)
    runs: Dict[str, RunReport] = {}
    for variant in variants:
        if axis == "preprocessor":
            cfg = dataclasses.replace(
                config,
                preprocessor=dataclasses.replace(config.preprocessor, kind=variant),
                output_dir=None,
            )
        else:
            cfg = dataclasses.replace(
                config,
                classifier=dataclasses.replace(config.classifier, kind=variant),
                output_dir=None,
            )
        runs[variant] = run_experiment(cfg, dataset=dataset)
    report = SweepReport(
        axis=axis,
        variants=variants,
        runs=runs,
        expectations=tuple(_sweep_expectations(axis, variants, runs)),
        created_at=_timestamp(),
    )
    if config.output_dir:
        write_sweep_report(report, config.output_dir)
    return report


def _sweep_expectations(axis: str, variants: Tuple[str, ...],
                        runs: Dict[str, RunReport]) -> List[dict]:
    if axis != "preprocessor" or "ecodb" not in variants or len(variants) < 2:
        return []
    acc = {v: runs[v].aggregates["test"]["accuracy"]["median"] for v in variants}
    others = {v: a for v, a in acc.items() if v != "ecodb"}
    best_other, best_acc = max(others.items(), key=lambda kv: kv[1])
    gain = (acc["ecodb"] - best_acc) * 100.0
    return [{
        "name": "ecodb_gain_over_alternatives",
        "threshold_points": ECODB_GAIN_POINTS,
        "observed_points": gain,
        "met": gain >= ECODB_GAIN_POINTS,
        "detail": (
            f"ecodb test accuracy {acc['ecodb'] * 100:.2f}% vs best alternative "
            f"{best_other} at {best_acc * 100:.2f}% "
            f"(gain {gain:+.2f} points, expected >= {ECODB_GAIN_POINTS:.1f})"
        ),
    }]


def write_run_report(report: RunReport, out_dir) -> Tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    text_path = out / "report.txt"
    _write_atomic(json_path, json.dumps(report.to_json_obj(), indent=2) + "\n")
    _write_atomic(text_path, report.to_text())
    return json_path, text_path


def write_sweep_report(report: SweepReport, out_dir) -> Tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "sweep.json"
    text_path = out / "sweep.txt"
    _write_atomic(json_path, json.dumps(report.to_json_obj(), indent=2) + "\n")
    _write_atomic(text_path, report.to_text())
    return json_path, text_path


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _checked_keys(section: str, obj: dict, allowed: set) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{section} section must be a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown {section} option(s): {', '.join(sorted(unknown))}")
    return obj
