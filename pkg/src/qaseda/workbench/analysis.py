"""Post-hoc analysis: state clusters, gate statistics and the comparator benchmark."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.model_selection import KFold

from qaseda import quantumsim as qs
from qaseda.circuits import CNOT_BASE, GATE_NAMES, Ansatz, as_ansatz, count_params, n_codes, postprocess
from qaseda.hamiltonians import build_hamiltonian, spectral_span
from qaseda.optimize import OptBudget, minimize_energy
from qaseda.rng import subseed, substream
from qaseda.surrogate import CLASSES, labelled_pairs, train_comparator

FAMILIES = ("CNOT", "Rx", "Ry", "Rz", "H")
BENCH_EPS_FRACTION = 1e-3


@dataclass
class ClusterSet:
    label: str
    states: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.states = [np.asarray(s, dtype=complex) for s in self.states]
        if len({s.shape for s in self.states}) > 1:
            raise ValueError(f"cluster {self.label!r} mixes state sizes")


def distance_to_cluster(s: np.ndarray, c: ClusterSet) -> float:
    """Mean infidelity ``1 - |<s|s_B>|^2`` over the cluster members."""
    if not c.states:
        raise ValueError(f"cluster {c.label!r} is empty")
    d = np.mean([1.0 - qs.fidelity(s, b) for b in c.states])
    return float(min(max(d, 0.0), 1.0))


def assign_cluster(s: np.ndarray, clusters: Sequence[ClusterSet]) -> str:
    if not clusters:
        raise ValueError("need at least one cluster")
    dists = [distance_to_cluster(s, c) for c in clusters]
    return clusters[int(np.argmin(dists))].label  # argmin keeps the first on ties


def confusion(queries: Sequence[tuple[str, np.ndarray]], clusters: Sequence[ClusterSet]) -> dict:
    """Assign every ``(true_label, state)`` query to a cluster.

    Returns the row-normalized confusion matrix (rows: true label, columns:
    assigned label, both in cluster order) and the own-label fraction per row.
    """
    labels = [c.label for c in clusters]
    pos = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)))
    for true, s in queries:
        counts[pos[true], pos[assign_cluster(s, clusters)]] += 1
    rows = counts.sum(axis=1, keepdims=True)
    frac = np.divide(counts, rows, out=np.zeros_like(counts), where=rows > 0)
    return {
        "labels": labels,
        "matrix": frac.tolist(),
        "counts": counts.astype(int).tolist(),
        "own_fraction": {lab: float(frac[i, i]) for i, lab in enumerate(labels)},
    }


def gate_stats(pop: Sequence[Ansatz]) -> dict:
    """Gate-family ratios over non-identity cells and angle-count statistics."""
    if not pop:
        raise ValueError("gate_stats needs a non-empty population")
    counts = dict.fromkeys(FAMILIES, 0)
    params = []
    for a in pop:
        mat = as_ansatz(a).matrix
        for code in range(1, CNOT_BASE):
            counts[GATE_NAMES[code]] += int((mat == code).sum())
        counts["CNOT"] += int((mat >= CNOT_BASE).sum())
        params.append(count_params(a))
    total = sum(counts.values())
    ratios = {k: (v / total if total else 0.0) for k, v in counts.items()}
    return {
        "ratios": ratios,
        "counts": counts,
        "params_mean": float(np.mean(params)),
        "params_std": float(np.std(params)),
        "size": len(pop),
    }


def default_count(n: int) -> int:
    # 37.5 n rounded half up
    return int(math.floor(37.5 * n + 0.5))


def random_circuits(n: int, m: int, count: int, seed: int) -> list[Ansatz]:
    """``count`` distinct post-processed circuits from the uniform cell model."""
    rng = substream(seed, "bench-circuits")
    out, seen = [], set()
    tries = 0
    while len(out) < count:
        a = postprocess(Ansatz(rng.integers(0, n_codes(n), (n, m))))
        tries += 1
        if a.key in seen:
            if tries > 100 * count:
                raise RuntimeError("could not draw enough distinct circuits")
            continue
        seen.add(a.key)
        out.append(a)
    return out


def surrogate_benchmark(
    n: int,
    m: int = 60,
    count: int | None = None,
    kind: str = "H1",
    seed: int = 0,
    folds: int = 15,
    budget: OptBudget | None = None,
    eps: float | None = None,
    shuffle_labels: bool = False,
) -> dict | None:
    """Cross-validated accuracy of the pair comparator on random circuits.

    Draws ``count`` circuits (default ``37.5 n``), optimizes each, labels all
    pairs and reports ``folds``-fold accuracy. ``eps`` defaults to
    ``1e-3 * spectral_span``. Returns ``None`` (with a warning) when there are
    too few circuits to cross-validate.
    """
    count = default_count(n) if count is None else count
    n_pairs = count * (count - 1) // 2
    if count < 3 or n_pairs < folds:
        warnings.warn(f"count={count} gives {n_pairs} pairs, too few for {folds}-fold validation; aborting")
        return None
    h = build_hamiltonian(kind, n)
    eps = BENCH_EPS_FRACTION * spectral_span(h) if eps is None else float(eps)
    budget = budget or OptBudget()
    circuits = random_circuits(n, m, count, seed)
    energies = [
        minimize_energy(a, h, budget=OptBudget(
            max_evals=budget.max_evals, ftol=budget.ftol, seed=subseed(seed, "bench-opt", i),
            restarts=budget.restarts, method=budget.method, evals_per_param=budget.evals_per_param,
        )).best_energy
        for i, a in enumerate(circuits)
    ]
    x, y, _ = labelled_pairs(circuits, energies, eps, subseed(seed, "bench-pairs"))
    if shuffle_labels:
        y = substream(seed, "bench-shuffle").permutation(y)
    prior = np.bincount(y, minlength=len(CLASSES)) / len(y)
    accs = []
    kf = KFold(folds, shuffle=True, random_state=subseed(seed, "bench-folds") % 2**32)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for train, test in kf.split(x):
            model = train_comparator(x[train], y[train])
            accs.append(float(np.mean(model.predict_features(x[test]) == y[test])))
    return {
        "n": n,
        "m": m,
        "count": count,
        "hamiltonian": kind,
        "eps": eps,
        "pairs": int(len(y)),
        "folds": folds,
        "shuffled": shuffle_labels,
        "class_prior": prior.tolist(),
        "majority_baseline": float(prior.max()),
        "energy_min": float(np.min(energies)),
        "energy_max": float(np.max(energies)),
        "fold_accuracy": accs,
        "accuracy": float(np.mean(accs)),
        "accuracy_std": float(np.std(accs)),
    }
