"""Distance measures between instance feature vectors.

Three measures are supported:

* ``euclidean`` - root of summed squared coordinate differences.
* ``correlation`` - 1 minus the Pearson correlation of the two vectors
  treated as paired samples, giving a dissimilarity in [0, 2]. If either
  vector has zero variance the correlation is taken as 0 (distance 1),
  except that element-wise equal vectors are always at distance 0.
* ``mixed`` - euclidean over the numeric features plus the count of
  mismatching nominal features; requires per-feature kind metadata.

No feature scaling happens here; callers decide what the coordinates mean.
All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import enum
from typing import Optional, Sequence

import numpy as np

from .data import NOMINAL, NUMERIC
from .errors import ConfigError


class Measure(enum.Enum):
    EUCLIDEAN = "euclidean"
    CORRELATION = "correlation"
    MIXED = "mixed"

    @classmethod
    def parse(cls, name: str) -> "Measure":
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown measure {name!r} (choose from: {choices})") from None


def distance(
    a: np.ndarray,
    b: np.ndarray,
    measure: Measure = Measure.EUCLIDEAN,
    kinds: Optional[Sequence[str]] = None,
) -> float:
    """Distance between two feature vectors under ``measure``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("distance expects 1-D feature vectors")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(distances_to(b.reshape(1, -1), a, measure, kinds)[0])


def distances_to(
    X: np.ndarray,
    q: np.ndarray,
    measure: Measure = Measure.EUCLIDEAN,
    kinds: Optional[Sequence[str]] = None,
) -> np.ndarray:
    """Vector of distances from ``q`` to every row of ``X``.

    This is the single implementation all other entry points delegate to,
    so scalar, batched, and pairwise results are bit-identical.
    """
    X = np.asarray(X, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix of row vectors")
    if q.shape != (X.shape[1],):
        raise ValueError(f"length mismatch: rows have {X.shape[1]} features, query has {q.shape}")
    if measure is Measure.EUCLIDEAN:
        return _euclidean_to(X, q)
    if measure is Measure.CORRELATION:
        if X.shape[1] < 2:
            raise ValueError("correlation distance needs vectors of length >= 2")
        return _correlation_to(X, q)
    if measure is Measure.MIXED:
        if kinds is None:
            raise ConfigError("mixed measure requires per-feature kind metadata")
        if len(kinds) != X.shape[1]:
            raise ConfigError("kind metadata length does not match feature count")
        return _mixed_to(X, q, kinds)
    raise ConfigError(f"unsupported measure {measure!r}")


def pairwise_distances(
    X: np.ndarray,
    measure: Measure = Measure.EUCLIDEAN,
    kinds: Optional[Sequence[str]] = None,
) -> np.ndarray:
    """Symmetric n x n distance matrix with an exactly-zero diagonal."""
    X = np.asarray(X, dtype=np.float64)
    return np.stack([distances_to(X, X[i], measure, kinds) for i in range(X.shape[0])])


def _euclidean_to(X, q):
    diff = X - q
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _correlation_to(X, q):
    # the query goes through the same per-row reduction kernels as the
    # matrix rows so that distance(a, b) == distance(b, a) bit-for-bit
    qrow = q.reshape(1, -1)
    Xc = X - X.mean(axis=1, keepdims=True)
    qc = (qrow - qrow.mean(axis=1, keepdims=True))[0]
    x_sq = np.sum(Xc * Xc, axis=1)
    q_sq = float(np.sum(qc.reshape(1, -1) * qc.reshape(1, -1), axis=1)[0])
    out = np.ones(X.shape[0])
    if q_sq > 0.0:
        valid = x_sq > 0.0
        r = np.sum(Xc[valid] * qc, axis=1) / np.sqrt(x_sq[valid] * q_sq)
        out[valid] = 1.0 - np.clip(r, -1.0, 1.0)
    equal = np.all(X == q, axis=1)
    out[equal] = 0.0
    return out


def _mixed_to(X, q, kinds):
    kinds = list(kinds)
    numeric = [i for i, k in enumerate(kinds) if k == NUMERIC]
    nominal = [i for i, k in enumerate(kinds) if k == NOMINAL]
    if len(numeric) + len(nominal) != len(kinds):
        raise ConfigError(f"unknown feature kind in {sorted(set(kinds))}")
    out = np.zeros(X.shape[0])
    if numeric:
        out += _euclidean_to(X[:, numeric], q[numeric])
    if nominal:
        out += (X[:, nominal] != q[nominal]).sum(axis=1).astype(np.float64)
    return out
