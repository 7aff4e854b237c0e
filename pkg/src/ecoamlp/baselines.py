"""Reference preprocessors and classifiers used for comparison runs.

Preprocessing options: identity, per-feature z-transform (fit on train
only), bootstrap resampling, stratified subsampling, and class-outlier
removal (wired up in the harness). Classifier options besides the
evolutionary MLP: k-nearest-neighbour voting and Gaussian naive Bayes.

Everything here is deterministic given its seed arguments and uses the
same tie-breaking conventions as the rest of the package: distance ties
resolve by ascending instance id, vote and posterior ties resolve toward
class 0.
"""

from __future__ import annotations

import dataclasses
from typing import List, Optional, Tuple

import numpy as np

from .class_outlier import OutlierParams
from .data import Dataset, largest_remainder_allocation, round_half_up
from .distance import Measure, distances_to
from .errors import ConfigError, DataError

PREPROCESSOR_KINDS = ("none", "ztransform", "bootstrap", "stratified", "ecodb")

VARIANCE_FLOOR = 1e-9
"""Lower bound on per-class feature variance in naive Bayes."""


@dataclasses.dataclass(frozen=True)
class Preprocessor:
    """Configuration of one train-set preprocessing step.

    ``fraction`` only applies to the sampling kinds and defaults per kind
    (1.0 for bootstrap, 0.9 for stratified) when left as None. ``outlier``
    only applies to ``ecodb``. ``seed`` feeds whichever step needs
    randomness.
    """

    kind: str = "none"
    fraction: Optional[float] = None
    seed: int = 0
    outlier: Optional[OutlierParams] = None

    def __post_init__(self) -> None:
        if self.kind not in PREPROCESSOR_KINDS:
            raise ConfigError(
                f"unknown preprocessor {self.kind!r} (choose from: {', '.join(PREPROCESSOR_KINDS)})"
            )
        if self.fraction is not None and not 0.0 < self.fraction <= 1.0:
            raise ConfigError(f"fraction must be in (0, 1], got {self.fraction}")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")

    def effective_fraction(self) -> float:
        if self.fraction is not None:
            return self.fraction
        return 0.9 if self.kind == "stratified" else 1.0

    def outlier_params(self) -> OutlierParams:
        return self.outlier if self.outlier is not None else OutlierParams()


@dataclasses.dataclass(frozen=True)
class ZTransform:
    """Per-feature standardisation fitted on a training set.

    Features that were constant in training map to exactly 0 everywhere,
    including on unseen data.
    """

    mean: np.ndarray
    scale_inv: np.ndarray

    def apply(self, dataset: Dataset) -> Dataset:
        if dataset.n_features != self.mean.shape[0]:
            raise DataError(
                f"z-transform fitted on {self.mean.shape[0]} features, "
                f"dataset has {dataset.n_features}"
            )
        return dataset.with_feature_matrix((dataset.features - self.mean) * self.scale_inv)


def ztransform_fit(train: Dataset) -> ZTransform:
    if len(train) == 0:
        raise DataError("cannot fit a z-transform on an empty dataset")
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    scale_inv = np.zeros_like(std)
    np.divide(1.0, std, out=scale_inv, where=std > 0.0)
    return ZTransform(mean=mean, scale_inv=scale_inv)


def ztransform_fit_apply(
    train: Dataset,
    others: Tuple[Dataset, ...] = (),
) -> Tuple[Dataset, List[Dataset]]:
    """Fit on train, apply to train and to every dataset in ``others``."""
    zt = ztransform_fit(train)
    return zt.apply(train), [zt.apply(d) for d in others]


def bootstrap_sample(train: Dataset, fraction: float = 1.0, seed: int = 0) -> Dataset:
    """Sample round(fraction * n) instances with replacement.

    Drawn rows get fresh sequential ids (duplicates must stay distinct);
    the originals are kept in ``source_ids``.
    """
    _check_fraction(fraction)
    n = len(train)
    if n == 0:
        raise DataError("cannot sample from an empty dataset")
    m = round_half_up(fraction * n)
    rows = np.random.default_rng(seed).integers(0, n, size=m)
    return Dataset(
        train.schema,
        train.features[rows],
        train.labels[rows],
        np.arange(m, dtype=np.int64),
        source_ids=tuple(int(train.ids[r]) for r in rows),
    )


def stratified_sample(train: Dataset, fraction: float = 0.9, seed: int = 0) -> Dataset:
    """Sample round(fraction * n) instances without replacement.

    Per-class counts follow largest-remainder rounding of the class
    proportions; a class that would receive zero instances is an error.
    Sampled instances keep their original ids.
    """
    _check_fraction(fraction)
    n = len(train)
    if n == 0:
        raise DataError("cannot sample from an empty dataset")
    m = round_half_up(fraction * n)
    counts = train.class_counts()
    if min(counts) == 0:
        raise DataError("stratified sampling needs at least one instance of each class")
    alloc = largest_remainder_allocation([c / n for c in counts], m)
    if min(alloc) == 0:
        raise DataError(
            f"fraction {fraction} leaves a class with zero instances "
            f"(allocations {alloc} from counts {counts})"
        )
    rng = np.random.default_rng(seed)
    picks: List[int] = []
    for label, take in enumerate(alloc):
        rows = np.flatnonzero(train.labels == label)
        picks.extend(rows[rng.permutation(rows.shape[0])[:take]].tolist())
    return train.take_rows(picks)


def knn_classify(
    train: Dataset,
    query_features: np.ndarray,
    k: int = 5,
    measure: Measure = Measure.EUCLIDEAN,
) -> int:
    """Majority vote of the k nearest training instances; ties pick class 0."""
    return int(knn_predict(train, np.asarray(query_features, dtype=np.float64).reshape(1, -1),
                           k, measure)[0])


def knn_predict(
    train: Dataset,
    X: np.ndarray,
    k: int = 5,
    measure: Measure = Measure.EUCLIDEAN,
) -> np.ndarray:
    if len(train) == 0:
        raise DataError("knn needs a non-empty training set")
    if not 1 <= k <= len(train):
        raise ConfigError(f"k must be in [1, {len(train)}], got {k}")
    X = np.asarray(X, dtype=np.float64)
    preds = np.empty(X.shape[0], dtype=np.int64)
    for i in range(X.shape[0]):
        dists = distances_to(train.features, X[i], measure, train.schema.kinds)
        order = np.lexsort((train.ids, dists))[:k]
        votes_one = int(train.labels[order].sum())
        preds[i] = 1 if votes_one * 2 > k else 0
    return preds


@dataclasses.dataclass(frozen=True)
class NaiveBayesModel:
    """Gaussian naive Bayes: per-class priors, feature means and variances."""

    class_log_prior: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    @property
    def n_features(self) -> int:
        return self.means.shape[1]


def naive_bayes_fit(train: Dataset) -> NaiveBayesModel:
    """Fit per-class Gaussians; every class needs at least two instances."""
    counts = train.class_counts()
    if min(counts) < 2:
        raise DataError(
            f"naive Bayes needs >= 2 instances per class, got counts {counts}"
        )
    n = len(train)
    means = np.empty((2, train.n_features))
    variances = np.empty((2, train.n_features))
    for label in (0, 1):
        rows = train.features[train.labels == label]
        means[label] = rows.mean(axis=0)
        variances[label] = np.maximum(rows.var(axis=0), VARIANCE_FLOOR)
    prior = np.array([counts[0] / n, counts[1] / n])
    return NaiveBayesModel(np.log(prior), means, variances)


def naive_bayes_log_posteriors(model: NaiveBayesModel, query_features: np.ndarray) -> np.ndarray:
    """Unnormalised log-posterior for each class."""
    q = np.asarray(query_features, dtype=np.float64)
    if q.shape != (model.n_features,):
        raise DataError(f"expected {model.n_features} features, got shape {q.shape}")
    log_pdf = -0.5 * (np.log(2.0 * np.pi * model.variances)
                      + (q - model.means) ** 2 / model.variances)
    return model.class_log_prior + log_pdf.sum(axis=1)


def naive_bayes_classify(model: NaiveBayesModel, query_features: np.ndarray) -> int:
    """Class with the higher log-posterior; an exact tie picks class 0."""
    post = naive_bayes_log_posteriors(model, query_features)
    return 1 if post[1] > post[0] else 0


def naive_bayes_predict(model: NaiveBayesModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return np.array([naive_bayes_classify(model, X[i]) for i in range(X.shape[0])],
                    dtype=np.int64)


def _check_fraction(fraction: float) -> None:
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"fraction must be in (0, 1], got {fraction}")
