"""Tabular datasets: schema, CSV ingestion, nominal encoding, seeded splits.

File format
-----------
Comma-separated values, decimal-point reals, one instance per row with the
class label in the final column. An optional single header line is
auto-detected: the first row is treated as a header if and only if it fails
to parse under the schema (a numeric cell that is not a finite number, or a
label outside the schema's class labels).

Split reproducibility
---------------------
``split`` shuffles the ascending-id order with a Fisher-Yates pass driven by
xoshiro256** (see :mod:`ecoamlp.rng`), seeded from ``SplitSpec.seed``.
Subset sizes: validation and test each get ``round_half_up(fraction * n)``
and the training set absorbs the remainder. The shuffled order is consumed
as [train | validation | test] segments; within each subset, rows keep the
parent dataset's original order. Stratified splits allocate each subset's
per-class counts by largest remainder so class proportions stay within one
instance of the parent's.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, DataError
from .rng import fisher_yates

NUMERIC = "numeric"
NOMINAL = "nominal"


@dataclass(frozen=True)
class FeatureSpec:
    """One column: a name, a kind, and (for nominal columns) its categories.

    ``categories=None`` on a nominal feature means "discover categories in
    first-appearance order during load"; after loading it holds the mapping
    actually used, so encoded values can be traced back.
    """

    name: str
    kind: str = NUMERIC
    categories: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if not self.name:
            raise ConfigError("feature name must be non-empty")
        if self.kind not in (NUMERIC, NOMINAL):
            raise ConfigError(f"unknown feature kind {self.kind!r}")
        if self.kind == NUMERIC and self.categories is not None:
            raise ConfigError(f"numeric feature {self.name!r} cannot have categories")


@dataclass(frozen=True)
class Schema:
    features: Tuple[FeatureSpec, ...]
    class_labels: Tuple[str, str]

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ConfigError("feature names must be unique")
        if len(self.class_labels) != 2:
            raise ConfigError("exactly two class labels are required")
        if len(set(self.class_labels)) != 2:
            raise ConfigError("class labels must be distinct")

    @property
    def arity(self) -> int:
        return len(self.features)

    @property
    def kinds(self) -> Tuple[str, ...]:
        return tuple(f.kind for f in self.features)

    @property
    def all_numeric(self) -> bool:
        return all(f.kind == NUMERIC for f in self.features)

    def label_index(self, label: str) -> int:
        try:
            return self.class_labels.index(label)
        except ValueError:
            raise DataError(f"unknown class label {label!r}") from None


@dataclass(frozen=True)
class Instance:
    features: np.ndarray
    label: int
    id: int


class Dataset:
    """Immutable table of instances conforming to one schema.

    Feature values are always stored as float64; nominal columns hold
    category ordinals. Arrays are frozen after construction, so a Dataset is
    safe to share across threads.
    """

    def __init__(
        self,
        schema: Schema,
        features: np.ndarray,
        labels: np.ndarray,
        ids: np.ndarray,
        source_ids: Optional[Tuple[int, ...]] = None,
    ):
        features = np.ascontiguousarray(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
        ids = np.asarray(ids, dtype=np.int64)
        if features.ndim != 2 or features.shape[1] != schema.arity:
            raise DataError(
                f"feature matrix shape {features.shape} does not match "
                f"schema arity {schema.arity}"
            )
        n = features.shape[0]
        if labels.shape != (n,) or ids.shape != (n,):
            raise DataError("features, labels and ids must have equal length")
        if not np.all(np.isfinite(features)):
            raise DataError("feature values must be finite")
        if np.any((labels < 0) | (labels > 1)):
            raise DataError("labels must be class indices 0 or 1")
        if len(np.unique(ids)) != n:
            raise DataError("instance ids must be unique")
        for arr in (features, labels, ids):
            arr.setflags(write=False)
        self.schema = schema
        self.features = features
        self.labels = labels
        self.ids = ids
        self.source_ids = source_ids
        self._row_of = {int(i): r for r, i in enumerate(ids)}

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.schema.arity

    def row_of(self, instance_id: int) -> int:
        try:
            return self._row_of[int(instance_id)]
        except KeyError:
            raise DataError(f"unknown instance id {instance_id}") from None

    def instance(self, instance_id: int) -> Instance:
        r = self.row_of(instance_id)
        return Instance(self.features[r], int(self.labels[r]), int(self.ids[r]))

    def instances(self) -> Iterator[Instance]:
        for r in range(len(self)):
            yield Instance(self.features[r], int(self.labels[r]), int(self.ids[r]))

    def class_counts(self) -> Tuple[int, int]:
        counts = np.bincount(self.labels, minlength=2)
        return int(counts[0]), int(counts[1])

    def take_rows(self, rows: Sequence[int], source_ids=None) -> "Dataset":
        rows = list(rows)
        return Dataset(
            self.schema,
            self.features[rows],
            self.labels[rows],
            self.ids[rows],
            source_ids=source_ids,
        )

    def drop_ids(self, drop: Sequence[int]) -> "Dataset":
        """Survivors in original order; every id in ``drop`` must exist."""
        drop_set = set(int(i) for i in drop)
        for i in drop_set:
            self.row_of(i)
        keep = [r for r in range(len(self)) if int(self.ids[r]) not in drop_set]
        return self.take_rows(keep)

    def drop_features(self, names: Sequence[str]) -> "Dataset":
        known = {f.name: i for i, f in enumerate(self.schema.features)}
        for name in names:
            if name not in known:
                raise ConfigError(f"cannot drop unknown feature {name!r}")
        keep = [i for i, f in enumerate(self.schema.features) if f.name not in set(names)]
        if not keep:
            raise ConfigError("cannot drop every feature")
        schema = Schema(
            tuple(self.schema.features[i] for i in keep), self.schema.class_labels
        )
        return Dataset(schema, self.features[:, keep], self.labels, self.ids)

    def with_feature_matrix(self, features: np.ndarray, schema: Optional[Schema] = None) -> "Dataset":
        return Dataset(schema or self.schema, features, self.labels, self.ids,
                       source_ids=self.source_ids)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70
    validation_fraction: float = 0.15
    test_fraction: float = 0.15
    seed: int = 0
    stratified: bool = False

    def __post_init__(self):
        fracs = (self.train_fraction, self.validation_fraction, self.test_fraction)
        if not all(0.0 < f < 1.0 for f in fracs):
            raise ConfigError("split fractions must each lie in (0, 1)")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ConfigError(f"split fractions must sum to 1, got {sum(fracs)!r}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")


@dataclass(frozen=True)
class DataSplit:
    train: Dataset
    validation: Dataset
    test: Dataset


def round_half_up(x: float) -> int:
    """Deterministic rounding rule used for all subset sizing."""
    return int(math.floor(x + 0.5))


def largest_remainder_allocation(weights: Sequence[float], total: int) -> List[int]:
    """Split ``total`` units proportionally to ``weights``.

    Floor each exact share, then hand the leftover units to the largest
    fractional remainders (ties to the lower index). Each allocation is
    within one unit of its exact share.
    """
    if total < 0:
        raise ConfigError("total must be non-negative")
    wsum = float(sum(weights))
    if wsum <= 0:
        raise ConfigError("weights must have a positive sum")
    exact = [w / wsum * total for w in weights]
    alloc = [int(math.floor(e)) for e in exact]
    leftovers = total - sum(alloc)
    order = sorted(range(len(weights)), key=lambda i: (-(exact[i] - alloc[i]), i))
    for i in order[:leftovers]:
        alloc[i] += 1
    return alloc


def split(dataset: Dataset, spec: SplitSpec) -> DataSplit:
    """Deterministic three-way partition of ``dataset`` per ``spec``."""
    n = len(dataset)
    if n < 3:
        raise DataError("dataset must have at least 3 instances to split")
    n_val = round_half_up(spec.validation_fraction * n)
    n_test = round_half_up(spec.test_fraction * n)
    n_train = n - n_val - n_test
    if min(n_train, n_val, n_test) < 1:
        raise ConfigError(
            f"split of {n} instances yields empty subset "
            f"(train={n_train}, validation={n_val}, test={n_test})"
        )

    order = fisher_yates(sorted(int(i) for i in dataset.ids), spec.seed)
    if spec.stratified:
        train_ids, val_ids, test_ids = _stratified_segments(
            dataset, order, n_val, n_test
        )
    else:
        train_ids = set(order[:n_train])
        val_ids = set(order[n_train:n_train + n_val])
        test_ids = set(order[n_train + n_val:])

    def subset(members: set) -> Dataset:
        rows = [r for r in range(n) if int(dataset.ids[r]) in members]
        return dataset.take_rows(rows)

    return DataSplit(subset(train_ids), subset(val_ids), subset(test_ids))


def _stratified_segments(dataset, order, n_val, n_test):
    label_of = {int(i): int(l) for i, l in zip(dataset.ids, dataset.labels)}
    per_class = [[i for i in order if label_of[i] == c] for c in (0, 1)]
    counts = [len(g) for g in per_class]
    if min(counts) == 0:
        raise DataError("stratified split requires both classes present")
    val_alloc = largest_remainder_allocation(counts, n_val)
    test_alloc = largest_remainder_allocation(counts, n_test)
    for c in (0, 1):
        if val_alloc[c] + test_alloc[c] >= counts[c]:
            raise DataError(
                f"class {c} too small for stratified split "
                f"({counts[c]} members, {val_alloc[c] + test_alloc[c]} requested)"
            )
    val_ids, test_ids, train_ids = set(), set(), set()
    for c in (0, 1):
        members = per_class[c]
        val_ids.update(members[:val_alloc[c]])
        test_ids.update(members[val_alloc[c]:val_alloc[c] + test_alloc[c]])
        train_ids.update(members[val_alloc[c] + test_alloc[c]:])
    return train_ids, val_ids, test_ids


def load_csv(path, schema: Schema) -> Dataset:
    """Read ``path`` as instances of ``schema``; ids follow row order.

    Raises :class:`DataError` naming the 1-based file line and the column
    for any malformed cell. Blank cells are rejected, never imputed.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [(lineno, row) for lineno, row in enumerate(csv.reader(fh), start=1)
                if row and any(cell.strip() for cell in row)]
    categories: List[Optional[List[str]]] = [
        list(f.categories) if f.categories is not None else ([] if f.kind == NOMINAL else None)
        for f in schema.features
    ]
    frozen = [f.categories is not None for f in schema.features]

    if rows and _row_fails(rows[0][1], schema):
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: empty dataset")

    features = np.empty((len(rows), schema.arity), dtype=np.float64)
    labels = np.empty(len(rows), dtype=np.int64)
    for out_row, (lineno, row) in enumerate(rows):
        if len(row) != schema.arity + 1:
            raise DataError(
                f"{path}: row {lineno} has {len(row)} columns, "
                f"expected {schema.arity + 1}"
            )
        for col, spec in enumerate(schema.features):
            cell = row[col].strip()
            if not cell:
                raise DataError(f"{path}: row {lineno}, column {spec.name!r}: blank cell")
            if spec.kind == NUMERIC:
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: row {lineno}, column {spec.name!r}: "
                        f"not a number: {cell!r}"
                    ) from None
                if not math.isfinite(value):
                    raise DataError(
                        f"{path}: row {lineno}, column {spec.name!r}: "
                        f"non-finite value {cell!r}"
                    )
            else:
                cats = categories[col]
                if cell not in cats:
                    if frozen[col]:
                        raise DataError(
                            f"{path}: row {lineno}, column {spec.name!r}: "
                            f"unknown category {cell!r}"
                        )
                    cats.append(cell)
                value = float(cats.index(cell))
            features[out_row, col] = value
        label_cell = row[schema.arity].strip()
        if label_cell not in schema.class_labels:
            raise DataError(
                f"{path}: row {lineno}, column 'label': "
                f"unknown class label {label_cell!r}"
            )
        labels[out_row] = schema.class_labels.index(label_cell)

    resolved = Schema(
        tuple(
            replace(f, categories=tuple(categories[i]) if f.kind == NOMINAL else None)
            for i, f in enumerate(schema.features)
        ),
        schema.class_labels,
    )
    return Dataset(resolved, features, labels, np.arange(len(rows)))


def _row_fails(row: List[str], schema: Schema) -> bool:
    if len(row) != schema.arity + 1:
        return True
    for cell, spec in zip(row, schema.features):
        if spec.kind == NUMERIC:
            try:
                if not math.isfinite(float(cell.strip())):
                    return True
            except ValueError:
                return True
        elif not cell.strip():
            return True
    return row[schema.arity].strip() not in schema.class_labels


def infer_schema(path) -> Schema:
    """Guess a schema from a CSV: numeric columns where every cell parses,
    nominal otherwise, labels = the two distinct values of the last column
    in ascending string order.

    The first row counts as a header when any column that is numeric in
    the remaining rows holds a non-numeric value there. A file whose
    feature columns are all nominal therefore cannot have its header
    auto-detected; pass an explicit schema to ``load_csv`` in that case.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise DataError(f"{path}: empty dataset")
    width = len(rows[0])
    if width < 2:
        raise DataError(f"{path}: need at least one feature column plus a label")
    if any(len(r) != width for r in rows):
        raise DataError(f"{path}: inconsistent column counts")

    def numeric_cell(cell: str) -> bool:
        try:
            return math.isfinite(float(cell.strip()))
        except ValueError:
            return False

    def column_kinds(sample: List[List[str]]) -> List[str]:
        return [
            NUMERIC if all(numeric_cell(r[c]) for r in sample) else NOMINAL
            for c in range(width - 1)
        ]

    header = False
    if len(rows) > 1:
        body_kinds = column_kinds(rows[1:])
        header = any(
            kind == NUMERIC and not numeric_cell(rows[0][c])
            for c, kind in enumerate(body_kinds)
        )
    names = [c.strip() for c in rows[0][:-1]] if header else [f"f{i}" for i in range(width - 1)]
    body = rows[1:] if header else rows
    kinds = column_kinds(body)
    labels = sorted({r[-1].strip() for r in body})
    if len(labels) != 2:
        raise DataError(f"{path}: expected exactly 2 class labels, found {len(labels)}")
    return Schema(
        tuple(FeatureSpec(n, k) for n, k in zip(names, kinds)),
        (labels[0], labels[1]),
    )


def transform_nominal(dataset: Dataset) -> Dataset:
    """Re-declare nominal columns as numeric; values are already the
    first-appearance ordinals assigned at load, so they pass through
    unchanged. All-numeric input is returned as-is (idempotent)."""
    if dataset.schema.all_numeric:
        return dataset
    schema = Schema(
        tuple(FeatureSpec(f.name, NUMERIC) for f in dataset.schema.features),
        dataset.schema.class_labels,
    )
    return Dataset(schema, dataset.features, dataset.labels, dataset.ids,
                   source_ids=dataset.source_ids)


PIDD_FEATURES = (
    "Pregnancies",
    "Glucose",
    "BloodPressure",
    "SkinThickness",
    "Insulin",
    "BMI",
    "DiabetesPedigreeFunction",
    "Age",
)


def pidd_schema() -> Schema:
    """Schema of the Pima Indians diabetes table: 8 numeric features and a
    0/1 outcome label (1 = diabetic, the positive class)."""
    return Schema(
        tuple(FeatureSpec(name, NUMERIC) for name in PIDD_FEATURES),
        ("0", "1"),
    )
