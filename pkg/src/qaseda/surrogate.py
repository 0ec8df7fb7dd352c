"""Pairwise ansatz comparison: exact labels, Score aggregation and the learned comparator.

Labels follow the three-way comparator ``h(A, B)``:

* ``0``: B performs at least ``eps`` better than A
* ``1``: A performs at least ``eps`` better than B
* ``2``: neither (too close to call)

Performance is ``P = -energy`` so that lower energy means higher ``P`` and a
higher Score.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from sklearn.svm import SVC

from qaseda.circuits import Ansatz, as_ansatz, flatten
from qaseda.rng import substream

log = logging.getLogger(__name__)

A_WORSE, A_BETTER, TIE = 0, 1, 2
CLASSES = (A_WORSE, A_BETTER, TIE)
DEFAULT_MAX_PAIRS = 20_000


def true_compare(p_a: float, p_b: float, eps: float) -> int:
    if p_b >= p_a + eps:
        return A_WORSE
    if p_a >= p_b + eps:
        return A_BETTER
    return TIE


def performance(energy: float) -> float:
    return -float(energy)


def true_label_matrix(energies: Sequence[float], eps: float) -> np.ndarray:
    """``L[i, j] = h(i, j)`` for all ordered pairs; the diagonal is ``TIE``."""
    p = -np.asarray(energies, dtype=float)
    pa, pb = p[:, None], p[None, :]
    out = np.full((p.size, p.size), TIE, dtype=np.int64)
    out[pa >= pb + eps] = A_BETTER
    out[pb >= pa + eps] = A_WORSE
    return out


def scores_from_labels(labels: np.ndarray) -> np.ndarray:
    """``Score_i = sum_{j != i} (L[i, j] + 1 - L[j, i])``."""
    labels = np.asarray(labels, dtype=np.int64)
    k = labels.shape[0]
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    total = labels + 1 - labels.T
    np.fill_diagonal(total, 0)
    return total.sum(axis=1)


def score(a_index: int, population: Sequence, compare: Callable[[object, object], int]) -> int:
    """Score of ``population[a_index]`` against everyone else under ``compare``."""
    if not population:
        return 0
    a = population[a_index]
    return int(
        sum(compare(a, b) + 1 - compare(b, a) for j, b in enumerate(population) if j != a_index)
    )


def pair_feature(a: Ansatz, b: Ansatz) -> np.ndarray:
    """``concat(flat(A) + flat(B), flat(A) - flat(B))``, length ``2*n*m``."""
    fa, fb = flatten(as_ansatz(a)), flatten(as_ansatz(b))
    if fa.shape != fb.shape or as_ansatz(a).matrix.shape != as_ansatz(b).matrix.shape:
        raise ValueError(f"shape mismatch {as_ansatz(a).matrix.shape} vs {as_ansatz(b).matrix.shape}")
    return np.concatenate([fa + fb, fa - fb])


def pair_features(flat: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Batched :func:`pair_feature` over rows of a flattened population."""
    fa, fb = flat[left], flat[right]
    return np.hstack([fa + fb, fa - fb])


def labelled_pairs(
    ansatzes: Sequence[Ansatz],
    energies: Sequence[float],
    eps: float,
    seed: int,
    max_pairs: int = DEFAULT_MAX_PAIRS,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Training pairs from truly evaluated circuits.

    Every unordered pair enters once with a seeded random orientation; above
    ``max_pairs`` a seeded subsample is kept. Returns ``(X, y, index_pairs)``.
    """
    k = len(ansatzes)
    if k < 2:
        return np.zeros((0, 0)), np.zeros(0, dtype=np.int64), np.zeros((0, 2), dtype=np.int64)
    rng = substream(seed, "pairs")
    idx = np.array(list(itertools.combinations(range(k), 2)), dtype=np.int64)
    swap = rng.random(len(idx)) < 0.5
    idx[swap] = idx[swap][:, ::-1]
    if len(idx) > max_pairs:
        keep = np.sort(rng.choice(len(idx), size=max_pairs, replace=False))
        idx = idx[keep]
    flat = np.stack([flatten(a) for a in ansatzes])
    labels = true_label_matrix(energies, eps)
    return pair_features(flat, idx[:, 0], idx[:, 1]), labels[idx[:, 0], idx[:, 1]], idx


def fingerprint(x: np.ndarray, y: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(x, dtype=np.float64).tobytes())
    h.update(np.ascontiguousarray(y, dtype=np.int64).tobytes())
    return h.hexdigest()[:16]


def rbf_kernel(x: np.ndarray, sv: np.ndarray, gamma: float) -> np.ndarray:
    d2 = (x * x).sum(1)[:, None] + (sv * sv).sum(1)[None, :] - 2.0 * x @ sv.T
    return np.exp(-gamma * np.maximum(d2, 0.0))


@dataclass
class ComparatorModel:
    """Trained three-class pair classifier (one-vs-one RBF SVM) or a constant fallback.

    Holds everything prediction needs, so a JSON checkpoint reproduces the
    exact predictions of the trained model.
    """

    n_features: int
    classes: tuple[int, ...]
    fingerprint: str
    mean: np.ndarray
    scale: np.ndarray
    gamma: float = 0.0
    C: float = 1.0
    support_vectors: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    n_support: tuple[int, ...] = ()
    dual_coef: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    intercept: np.ndarray = field(default_factory=lambda: np.zeros(0))
    constant: int | None = None
    n_train: int = 0

    @property
    def degenerate(self) -> bool:
        return self.constant is not None

    def decision_votes(self, x: np.ndarray) -> np.ndarray:
        k = len(self.classes)
        z = (np.asarray(x, dtype=float) - self.mean) / self.scale
        kern = rbf_kernel(z, self.support_vectors, self.gamma)
        # sklearn stores the two-class decision with the opposite sign
        sign = -1.0 if k == 2 else 1.0
        starts = np.concatenate([[0], np.cumsum(self.n_support)])
        votes = np.zeros((z.shape[0], k), dtype=np.int64)
        p = 0
        for i in range(k):
            for j in range(i + 1, k):
                si = slice(starts[i], starts[i + 1])
                sj = slice(starts[j], starts[j + 1])
                dec = sign * (
                    kern[:, si] @ self.dual_coef[j - 1, si]
                    + kern[:, sj] @ self.dual_coef[i, sj]
                    + self.intercept[p]
                )
                votes[:, i] += dec > 0
                votes[:, j] += dec <= 0
                p += 1
        return votes

    def predict_features(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.n_features:
            raise ValueError(f"feature length {x.shape[1]} != trained length {self.n_features}")
        if self.degenerate:
            return np.full(x.shape[0], self.constant, dtype=np.int64)
        votes = self.decision_votes(x)
        return np.asarray(self.classes, dtype=np.int64)[np.argmax(votes, axis=1)]

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "classes": list(self.classes),
            "fingerprint": self.fingerprint,
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "gamma": self.gamma,
            "C": self.C,
            "support_vectors": self.support_vectors.tolist(),
            "n_support": list(self.n_support),
            "dual_coef": self.dual_coef.tolist(),
            "intercept": self.intercept.tolist(),
            "constant": self.constant,
            "n_train": self.n_train,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparatorModel":
        nf = int(d["n_features"])
        return cls(
            n_features=nf,
            classes=tuple(d["classes"]),
            fingerprint=d["fingerprint"],
            mean=np.asarray(d["mean"], dtype=float),
            scale=np.asarray(d["scale"], dtype=float),
            gamma=float(d["gamma"]),
            C=float(d["C"]),
            support_vectors=np.asarray(d["support_vectors"], dtype=float).reshape(-1, nf),
            n_support=tuple(d["n_support"]),
            dual_coef=np.asarray(d["dual_coef"], dtype=float),
            intercept=np.asarray(d["intercept"], dtype=float),
            constant=d["constant"],
            n_train=int(d.get("n_train", 0)),
        )


def train_comparator(x: np.ndarray, y: np.ndarray, C: float = 1.0, gamma: float | None = None) -> ComparatorModel:
    """Fit the pair classifier on standardized features.

    ``gamma`` defaults to ``1 / n_features`` (``1/(2nm)`` for pair features).
    A training set with a single class yields a constant predictor.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != y.shape[0] or x.shape[0] == 0:
        raise ValueError("training data must be a non-empty 2-D feature array with one label per row")
    nf = x.shape[1]
    fp = fingerprint(x, y)
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0] = 1.0
    present = np.unique(y)
    if present.size < 2:
        warnings.warn(f"comparator training set has a single class ({present[0]}); using a constant predictor")
        return ComparatorModel(nf, tuple(int(c) for c in present), fp, mean, scale, constant=int(present[0]), n_train=len(y))
    if gamma is None:
        gamma = 1.0 / nf
    svc = SVC(C=C, kernel="rbf", gamma=gamma, decision_function_shape="ovo", cache_size=500)
    svc.fit((x - mean) / scale, y)
    return ComparatorModel(
        n_features=nf,
        classes=tuple(int(c) for c in svc.classes_),
        fingerprint=fp,
        mean=mean,
        scale=scale,
        gamma=float(gamma),
        C=float(C),
        support_vectors=np.asarray(svc.support_vectors_, dtype=float),
        n_support=tuple(int(v) for v in svc.n_support_),
        dual_coef=np.asarray(svc.dual_coef_, dtype=float),
        intercept=np.asarray(svc.intercept_, dtype=float),
        n_train=len(y),
    )


def predict(model: ComparatorModel, a: Ansatz, b: Ansatz) -> int:
    return int(model.predict_features(pair_feature(a, b)[None, :])[0])


def predict_label_matrix(model: ComparatorModel, ansatzes: Sequence[Ansatz]) -> np.ndarray:
    """Predicted ``L[i, j]`` for all ordered pairs ``i != j``; diagonal ``TIE``."""
    k = len(ansatzes)
    out = np.full((k, k), TIE, dtype=np.int64)
    if k < 2:
        return out
    flat = np.stack([flatten(a) for a in ansatzes])
    left, right = np.nonzero(~np.eye(k, dtype=bool))
    out[left, right] = model.predict_features(pair_features(flat, left, right))
    return out


def refit(
    elite: Sequence[tuple[Ansatz, float]],
    archive: Sequence[tuple[Ansatz, float]],
    eps: float,
    seed: int,
    max_pairs: int = DEFAULT_MAX_PAIRS,
) -> ComparatorModel:
    """Retrain on all pairs among ``elite`` and ``archive`` (ansatz, exact energy).

    Ansatzes present in both are counted once with the lower energy.
    """
    pool: dict[bytes, tuple[Ansatz, float]] = {}
    for a, e in list(archive) + list(elite):
        a = as_ansatz(a)
        if a.key not in pool or e < pool[a.key][1]:
            pool[a.key] = (a, float(e))
    members = [pool[k] for k in sorted(pool)]
    x, y, _ = labelled_pairs([a for a, _ in members], [e for _, e in members], eps, seed, max_pairs)
    if x.shape[0] == 0:
        raise ValueError("refit needs at least two distinct evaluated ansatzes")
    return train_comparator(x, y)
