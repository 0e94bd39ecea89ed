"""Per-class Pearson correlation and selection of cryptojacking-distinctive features."""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateVariance, InsufficientRows, LengthMismatch, SchemaMismatch
from .jsmetrics.features import FEATURE_NAMES


class DegenerateVarianceWarning(UserWarning):
    pass


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"pearson needs equal-length vectors, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise LengthMismatch("pearson needs at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateVariance("zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class CorrelationMatrix:
    feature_names: tuple[str, ...]
    values: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([""] + list(self.feature_names))
        for name, row in zip(self.feature_names, self.values):
            writer.writerow([name] + [repr(float(v)) for v in row])
        return buf.getvalue()

    def column_means(self, exclude_diagonal: bool = False) -> np.ndarray:
        k = len(self.feature_names)
        if not exclude_diagonal:
            return self.values.mean(axis=0)
        if k < 2:
            return np.zeros(k)
        return (self.values.sum(axis=0) - np.diag(self.values)) / (k - 1)


def class_correlation(matrix, feature_names: Sequence[str] = FEATURE_NAMES) -> CorrelationMatrix:
    """Correlation of every feature pair over the rows of one class.

    Cells whose variance is zero are set to 0 (1 on the diagonal) and a
    :class:`DegenerateVarianceWarning` is emitted.
    """
    data = np.asarray(matrix, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise InsufficientRows("class_correlation needs at least two rows")
    k = data.shape[1]
    if len(feature_names) != k:
        raise SchemaMismatch(f"{len(feature_names)} names for {k} columns")
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            try:
                r = pearson(data[:, i], data[:, j])
            except DegenerateVariance:
                r = 0.0
            out[i, j] = out[j, i] = r
    constant = np.flatnonzero(np.ptp(data, axis=0) == 0)
    if len(constant):
        names = ", ".join(feature_names[i] for i in constant)
        warnings.warn(f"zero-variance features: {names}", DegenerateVarianceWarning, stacklevel=2)
    return CorrelationMatrix(tuple(feature_names), out)


@dataclass(frozen=True)
class FeatureSelection:
    selected: tuple[str, ...]
    cmean: dict
    mmean: dict
    bmean: dict
    strategy: str
    exclude_diagonal: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _conjunctive(c: float, m: float, b: float) -> bool:
    return (c - m) > (m - b) and (c - b) > (m - b)


STRATEGIES: dict[str, Callable[[float, float, float], bool]] = {
    "conjunctive": _conjunctive,
}


def select_features(
    cj: CorrelationMatrix,
    mal: CorrelationMatrix,
    ben: CorrelationMatrix,
    strategy: str = "conjunctive",
    exclude_diagonal: bool = False,
) -> FeatureSelection:
    """Keep features whose cryptojacking column mean stands out from the other two classes.

    ``cj``, ``mal`` and ``ben`` are the per-class correlation matrices. With the
    default strategy a feature ``k`` is kept iff
    ``C[k] - M[k] > M[k] - B[k]`` and ``C[k] - B[k] > M[k] - B[k]``, where
    ``C``, ``M``, ``B`` are column means (diagonal included unless
    ``exclude_diagonal``).
    """
    if not (cj.feature_names == mal.feature_names == ben.feature_names):
        raise SchemaMismatch("correlation matrices disagree on feature names/order")
    try:
        rule = STRATEGIES[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}; known: {sorted(STRATEGIES)}") from None
    names = cj.feature_names
    c = cj.column_means(exclude_diagonal)
    m = mal.column_means(exclude_diagonal)
    b = ben.column_means(exclude_diagonal)
    selected = tuple(n for k, n in enumerate(names) if rule(c[k], m[k], b[k]))
    return FeatureSelection(
        selected=selected,
        cmean=dict(zip(names, map(float, c))),
        mmean=dict(zip(names, map(float, m))),
        bmean=dict(zip(names, map(float, b))),
        strategy=strategy,
        exclude_diagonal=exclude_diagonal,
    )
