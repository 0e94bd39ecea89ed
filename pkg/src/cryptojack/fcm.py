"""Fuzzy C-Means clustering of script feature vectors and its evaluation."""

from __future__ import annotations

import itertools
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateData, LengthMismatch

CLASSES = ("benign", "malicious", "cryptojacking")


class DroppedFeatureWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray
    kept: np.ndarray  # indices of columns with nonzero variance

    @classmethod
    def fit(cls, data: np.ndarray) -> "Standardizer":
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[0] < 2:
            raise DegenerateData("need a 2-D matrix with at least two rows")
        std = data.std(axis=0)
        kept = np.flatnonzero(std > 0)
        if len(kept) == 0:
            raise DegenerateData("every feature has zero variance")
        if len(kept) < data.shape[1]:
            dropped = sorted(set(range(data.shape[1])) - set(kept.tolist()))
            warnings.warn(f"dropping zero-variance feature columns {dropped}", DroppedFeatureWarning, stacklevel=3)
        return cls(data.mean(axis=0)[kept], std[kept], kept)

    def transform(self, data: np.ndarray) -> np.ndarray:
        return (np.asarray(data, dtype=float)[:, self.kept] - self.mean) / self.scale

    def inverse(self, z: np.ndarray) -> np.ndarray:
        return z * self.scale + self.mean


def membership(x: np.ndarray, centers: np.ndarray, m: float = 2.0) -> np.ndarray:
    """Membership matrix (n x C) of points ``x`` given cluster ``centers``."""
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
    u = np.empty_like(d2)
    zero = d2 == 0
    exact = zero.any(axis=1)
    if exact.any():
        u[exact] = zero[exact] / zero[exact].sum(axis=1, keepdims=True)
    rest = ~exact
    if rest.any():
        inv = d2[rest] ** (-1.0 / (m - 1))
        u[rest] = inv / inv.sum(axis=1, keepdims=True)
    return u


def centers_from(x: np.ndarray, u: np.ndarray, m: float) -> np.ndarray:
    um = u ** m
    return (um.T @ x) / um.sum(axis=0)[:, None]


def objective(x: np.ndarray, u: np.ndarray, centers: np.ndarray, m: float) -> float:
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
    return float(((u ** m) * d2).sum())


@dataclass
class ClusterModel:
    centers: np.ndarray  # C x k, in input units (kept columns only)
    memberships: np.ndarray  # n x C
    m: float
    objective: float
    iterations: int
    seed: int
    converged: bool
    history: list = field(default_factory=list)
    standardizer: Standardizer | None = None

    @property
    def n_clusters(self) -> int:
        return self.centers.shape[0]

    def hard_labels(self) -> np.ndarray:
        return self.memberships.argmax(axis=1)

    def predict(self, data) -> np.ndarray:
        """Memberships of new rows, using the fitted centers and scaling."""
        data = np.asarray(data, dtype=float)
        if self.standardizer is not None:
            x = self.standardizer.transform(data)
            c = (self.centers - self.standardizer.mean) / self.standardizer.scale
        else:
            x, c = data, self.centers
        return membership(x, c, self.m)


def _run(x: np.ndarray, n_clusters: int, m: float, tol: float, max_iter: int, rng: np.random.Generator):
    lo, hi = x.min(axis=0), x.max(axis=0)
    centers = rng.uniform(lo, hi, size=(n_clusters, x.shape[1]))
    u = membership(x, centers, m)
    history: list[float] = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        centers = centers_from(x, u, m)
        history.append(objective(x, u, centers, m))
        u = membership(x, centers, m)
        if len(history) > 1 and abs(history[-2] - history[-1]) < tol:
            converged = True
            break
    return centers, u, history, it, converged


def fit(
    data,
    n_clusters: int = 3,
    m: float = 2.0,
    tol: float = 1e-9,
    max_iter: int = 300,
    seed: int = 0,
    standardize: bool = True,
) -> ClusterModel:
    """One FCM run from a seeded random initialization.

    Convergence failure is reported through ``ClusterModel.converged``.
    """
    data = np.asarray(data, dtype=float)
    if m <= 1:
        raise ValueError("fuzzifier m must be > 1")
    if not 2 <= n_clusters <= data.shape[0]:
        raise ValueError(f"need 2 <= n_clusters <= n, got C={n_clusters}, n={data.shape[0]}")
    scaler = Standardizer.fit(data) if standardize else None
    x = scaler.transform(data) if scaler else data
    rng = np.random.default_rng(seed)
    centers, u, history, iterations, converged = _run(x, n_clusters, m, tol, max_iter, rng)
    return ClusterModel(
        centers=scaler.inverse(centers) if scaler else centers,
        memberships=u,
        m=m,
        objective=history[-1],
        iterations=iterations,
        seed=seed,
        converged=converged,
        history=history,
        standardizer=scaler,
    )


def fit_best(data, n_clusters: int = 3, m: float = 2.0, restarts: int = 20, seed: int = 0,
             workers: int = 1, **kwargs) -> ClusterModel:
    """Best-objective model over ``restarts`` runs seeded ``seed, seed+1, ...``.

    Ties keep the lowest seed, so the result does not depend on ``workers``.
    """
    seeds = [seed + i for i in range(restarts)]

    def one(s: int) -> ClusterModel:
        return fit(data, n_clusters=n_clusters, m=m, seed=s, **kwargs)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            models = list(pool.map(one, seeds))
    else:
        models = [one(s) for s in seeds]
    return min(models, key=lambda mod: (mod.objective, mod.seed))


# evaluation

@dataclass
class EvaluationReport:
    classes: tuple[str, ...]
    confusion: list  # rows = true class, columns = assigned class
    accuracy: float
    false_positive_rate: dict
    false_negative_rate: dict
    per_class_accuracy: dict
    cluster_to_class: dict
    # Convention of the published table: "FPR" = share of a class assigned
    # elsewhere, "FNR" = share of a cluster that belongs to another class.
    table_style_fpr: dict
    table_style_fnr: dict
    divergences: list

    @property
    def correct(self) -> int:
        return int(np.trace(np.array(self.confusion)))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _pct(num: float, den: float) -> float:
    return 100.0 * num / den if den else 0.0


def confusion_metrics(confusion, classes: Sequence[str] = CLASSES,
                      cluster_to_class: dict | None = None) -> EvaluationReport:
    cm = np.asarray(confusion, dtype=int)
    k = len(classes)
    if cm.shape != (k, k):
        raise LengthMismatch(f"confusion matrix must be {k}x{k}")
    n = int(cm.sum())
    tp = np.diag(cm)
    row = cm.sum(axis=1)
    col = cm.sum(axis=0)
    fp = col - tp
    fn = row - tp
    tn = n - tp - fp - fn
    fpr = {c: _pct(fp[i], fp[i] + tn[i]) for i, c in enumerate(classes)}
    fnr = {c: _pct(fn[i], fn[i] + tp[i]) for i, c in enumerate(classes)}
    t_fpr = {c: _pct(row[i] - tp[i], row[i]) for i, c in enumerate(classes)}
    t_fnr = {c: _pct(col[i] - tp[i], col[i]) for i, c in enumerate(classes)}
    for d in (fpr, fnr, t_fpr, t_fnr):
        d["total"] = float(np.mean([d[c] for c in classes]))
    divergences = []
    for key in list(classes) + ["total"]:
        if abs(fpr[key] - t_fpr[key]) > 1e-9:
            divergences.append(f"FPR[{key}]: one-vs-rest {fpr[key]:.2f} vs table-style {t_fpr[key]:.2f}")
        if abs(fnr[key] - t_fnr[key]) > 1e-9:
            divergences.append(f"FNR[{key}]: one-vs-rest {fnr[key]:.2f} vs table-style {t_fnr[key]:.2f}")
    return EvaluationReport(
        classes=tuple(classes),
        confusion=cm.tolist(),
        accuracy=_pct(tp.sum(), n),
        false_positive_rate=fpr,
        false_negative_rate=fnr,
        per_class_accuracy={c: _pct(tp[i], row[i]) for i, c in enumerate(classes)},
        cluster_to_class=dict(cluster_to_class or {i: c for i, c in enumerate(classes)}),
        table_style_fpr=t_fpr,
        table_style_fnr=t_fnr,
        divergences=divergences,
    )


def evaluate(model: ClusterModel, labels: Sequence[str], classes: Sequence[str] = CLASSES) -> EvaluationReport:
    """Hard-assign by max membership, map clusters to classes by the best permutation, score."""
    labels = list(labels)
    u = model.memberships
    if len(labels) != u.shape[0]:
        raise LengthMismatch(f"{len(labels)} labels for {u.shape[0]} rows")
    k = len(classes)
    if model.n_clusters != k:
        raise ValueError(f"model has {model.n_clusters} clusters but there are {k} classes")
    index = {c: i for i, c in enumerate(classes)}
    unknown = set(labels) - set(index)
    if unknown:
        raise ValueError(f"unknown class labels: {sorted(unknown)}")
    raw = np.zeros((k, k), dtype=int)  # true class x cluster
    for label, cluster in zip(labels, model.hard_labels()):
        raw[index[label], cluster] += 1
    best = max(itertools.permutations(range(k)), key=lambda p: sum(raw[p[c], c] for c in range(k)))
    # best[cluster] = class index
    cm = np.zeros((k, k), dtype=int)
    for cluster in range(k):
        cm[:, best[cluster]] += raw[:, cluster]
    return confusion_metrics(cm, classes, {cluster: classes[best[cluster]] for cluster in range(k)})


# projection

@dataclass(frozen=True)
class Projection:
    coords: np.ndarray  # n x 2
    components: np.ndarray  # 2 x k (standardized feature space)
    explained_variance_ratio: np.ndarray  # length 2


def project_2d(data, standardize: bool = True) -> Projection:
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise DegenerateData("projection needs at least two rows")
    if standardize:
        x = Standardizer.fit(data).transform(data)
    else:
        x = data - data.mean(axis=0)
    _, s, vt = np.linalg.svd(x, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        raise DegenerateData("data has no variance")
    comps = np.zeros((2, x.shape[1]))
    r = min(2, vt.shape[0])
    comps[:r] = vt[:r]
    for i in range(r):
        if comps[i, np.argmax(np.abs(comps[i]))] < 0:
            comps[i] = -comps[i]
    var = s ** 2
    ratio = np.zeros(2)
    ratio[:r] = var[:r] / var.sum()
    return Projection(coords=x @ comps.T, components=comps, explained_variance_ratio=ratio)
