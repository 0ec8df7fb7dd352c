"""Surrogate-assisted univariate EDA over encoded ansatzes.

One run:

1. ``G0``: N distinct circuits (uniform or from a file), each truly optimized;
   the pair comparator is trained on all their pairs.
2. Each iteration: IC for every individual, surrogate Scores (no circuit
   evaluations), hypervolume-box value ``g`` per individual, truncation to
   the ``floor(alpha*N)`` lowest ``g``. The 5 best are truly optimized and
   the comparator refit. A per-cell categorical model is fit to the
   selection and the next generation sampled from it, keeping the elite.
3. Stop at ``t_max`` or when the best ``g`` seen has not improved for
   ``stall_iterations``.

True optimizations per run: ``N + 5 t`` for ``t`` executed iterations.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from qaseda import quantumsim as qs
from qaseda.circuits import (
    Ansatz,
    InvalidAnsatz,
    ansatz_from_dict,
    n_codes,
    pad_depth,
    postprocess,
)
from qaseda.hamiltonians import PauliSum, spectral_span
from qaseda.optimize import OptBudget, minimize_energy
from qaseda.rng import subseed, substream
from qaseda.surrogate import (
    ComparatorModel,
    DEFAULT_MAX_PAIRS,
    predict_label_matrix,
    refit,
    scores_from_labels,
    true_label_matrix,
)
from qaseda.trainability import WalkConfig, information_content

log = logging.getLogger(__name__)

REFIT_TOP = 5


# --------------------------------------------------------------------------
# data
# --------------------------------------------------------------------------


@dataclass
class Individual:
    ansatz: Ansatz
    born: int = 0
    energy: float | None = None
    truly_optimized: bool = False
    ic: float | None = None
    score: float | None = None
    g: float | None = None

    def to_dict(self) -> dict:
        return {
            "matrix": self.ansatz.matrix.tolist(),
            "born": self.born,
            "energy": self.energy,
            "truly_optimized": self.truly_optimized,
            "ic": self.ic,
            "score": self.score,
            "g": self.g,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Individual":
        return cls(
            Ansatz(np.asarray(d["matrix"], dtype=np.int64)),
            born=d["born"],
            energy=d["energy"],
            truly_optimized=d["truly_optimized"],
            ic=d["ic"],
            score=d["score"],
            g=d["g"],
        )


@dataclass(frozen=True)
class SearchConfig:
    n: int
    m: int
    N: int = 150
    t_max: int = 50
    alpha: float = 0.4
    reference: tuple[float, float] | None = None  # default (2N, 2)
    seed: int = 0
    shots: int = 1024
    ic_shots: int = 0
    walk_steps: int | None = None
    walk_step_scale: float = 0.05
    tolerance: float | None = None  # default 0.05 * spectral span
    tolerance_fraction: float = 0.05
    init: str = "uniform"  # or a population file path
    disabled_codes: tuple[int, ...] = ()
    opt_method: str = "nelder-mead"
    opt_max_evals: int | None = None
    opt_evals_per_param: int = 200
    opt_restarts: int = 1
    polish_restarts: int = 0
    stall_iterations: int = 15
    retry_cap: int = 20
    p_min: float | None = None  # default 1 / (10 * n_codes)
    max_pairs: int = DEFAULT_MAX_PAIRS

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if self.N < 1 or self.t_max < 1:
            raise ValueError("N and t_max must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if math.floor(self.alpha * self.N) < 1:
            raise ValueError(f"floor(alpha * N) = 0 for alpha={self.alpha}, N={self.N}")
        if self.reference is not None:
            object.__setattr__(self, "reference", tuple(float(v) for v in self.reference))
        object.__setattr__(self, "disabled_codes", tuple(sorted(int(c) for c in self.disabled_codes)))
        bad = [c for c in self.disabled_codes if not 0 < c < n_codes(self.n)]
        if bad:
            raise ValueError(f"cannot disable codes {bad} (code 0 is always allowed)")

    @property
    def ref_point(self) -> tuple[float, float]:
        return self.reference if self.reference is not None else (2.0 * self.N, 2.0)

    @property
    def n_select(self) -> int:
        return math.floor(self.alpha * self.N)

    @property
    def allowed(self) -> np.ndarray:
        mask = np.ones(n_codes(self.n), dtype=bool)
        mask[list(self.disabled_codes)] = False
        return mask

    @property
    def floor_prob(self) -> float:
        return self.p_min if self.p_min is not None else 1.0 / (10 * n_codes(self.n))

    def budget(self, seed: int, restarts: int | None = None) -> OptBudget:
        return OptBudget(
            max_evals=self.opt_max_evals,
            seed=seed,
            restarts=restarts or self.opt_restarts,
            method=self.opt_method,
            evals_per_param=self.opt_evals_per_param,
        )

    def walk(self) -> WalkConfig:
        return WalkConfig(steps=self.walk_steps, step_scale=self.walk_step_scale, seed=subseed(self.seed, "ic"))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["reference"] = list(self.reference) if self.reference is not None else None
        d["disabled_codes"] = list(self.disabled_codes)
        return d


# --------------------------------------------------------------------------
# probabilistic model
# --------------------------------------------------------------------------


@dataclass
class MultinomialModel:
    """Independent categorical distribution per cell, ``probs[i, j, code]``."""

    probs: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape[:2]

    @classmethod
    def uniform(cls, n: int, m: int, allowed: np.ndarray | None = None) -> "MultinomialModel":
        k = n_codes(n)
        allowed = np.ones(k, dtype=bool) if allowed is None else allowed
        p = allowed / allowed.sum()
        return cls(np.broadcast_to(p, (n, m, k)).copy())

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """``count`` raw (not post-processed) matrices, shape ``(count, n, m)``."""
        cdf = np.cumsum(self.probs, axis=-1)
        cdf[..., -1] = 1.0
        u = rng.random((count,) + self.shape)
        return (u[..., None] >= cdf[None]).sum(axis=-1).astype(np.int64)


def fit_model(
    selected: Sequence[Individual | Ansatz],
    p_min: float = 0.0,
    allowed: np.ndarray | None = None,
) -> MultinomialModel:
    """Per-cell code frequencies over ``selected``, mixed with a floor.

    With ``K`` allowed codes the result is ``(1 - K p_min) * freq + p_min``
    on allowed codes (zero elsewhere), so every allowed code keeps at least
    ``p_min`` and each cell still sums to one.
    """
    if not selected:
        raise ValueError("cannot fit a model to an empty selection")
    mats = np.stack([(s.ansatz if isinstance(s, Individual) else s).matrix for s in selected])
    n, m = mats.shape[1:]
    k = n_codes(n)
    allowed = np.ones(k, dtype=bool) if allowed is None else np.asarray(allowed, dtype=bool)
    counts = np.zeros((n, m, k))
    for code in range(k):
        counts[..., code] = (mats == code).sum(axis=0)
    freq = counts / len(selected)
    if p_min > 0:
        n_allowed = int(allowed.sum())
        if p_min * n_allowed >= 1:
            raise ValueError("p_min too large for the number of allowed codes")
        freq = (1 - n_allowed * p_min) * freq + p_min
    freq[..., ~allowed] = 0.0
    freq /= freq.sum(axis=-1, keepdims=True)
    return MultinomialModel(freq)


def _fill(
    pop: list[Individual],
    N: int,
    model: MultinomialModel,
    rng: np.random.Generator,
    born: int,
    retry_cap: int,
    allowed: np.ndarray | None,
) -> list[Individual]:
    """Append distinct post-processed samples to ``pop`` until it holds ``N``."""
    seen = {ind.ansatz.key for ind in pop}
    n, m = model.shape
    fallback = MultinomialModel.uniform(n, m, allowed)
    warned = False
    while len(pop) < N:
        for source in (model, fallback):
            tries = retry_cap if source is model else 10 * retry_cap
            a = None
            for _ in range(tries):
                cand = postprocess(Ansatz(source.sample(rng, 1)[0]))
                if cand.key not in seen:
                    a = cand
                    break
            if a is not None:
                break
            if source is model and not warned:
                warnings.warn("duplicate retry cap exhausted; filling from the uniform model")
                warned = True
        if a is None:
            # search space smaller than N distinct circuits
            warnings.warn("could not find a new distinct circuit; accepting a duplicate")
            a = cand
        seen.add(a.key)
        pop.append(Individual(a, born=born))
    return pop


def sample_population(
    model: MultinomialModel,
    N: int,
    elite: Individual | None,
    rng: np.random.Generator,
    born: int = 0,
    retry_cap: int = 20,
    allowed: np.ndarray | None = None,
) -> list[Individual]:
    """Elite plus ``N - 1`` distinct post-processed samples.

    A slot that keeps drawing duplicates for ``retry_cap`` tries is filled
    from the uniform model instead.
    """
    pop = [elite] if elite is not None else []
    return _fill(pop, N, model, rng, born, retry_cap, allowed)


# --------------------------------------------------------------------------
# ranking
# --------------------------------------------------------------------------


def g_value(score: float, ic: float, r: tuple[float, float]) -> float:
    """Area of the box between ``(score, ic)`` and the ideal corner ``r``; minimize."""
    r1, r2 = r
    s = min(max(float(score), 0.0), r1)
    c = min(max(float(ic), 0.0), r2)
    return (r1 - s) * (r2 - c)


def _rank_key(ind: Individual):
    return (ind.g, -ind.ic, ind.born, ind.ansatz.matrix.shape, ind.ansatz.matrix.ravel().tolist())


def rank(pop: Sequence[Individual], r: tuple[float, float]) -> list[Individual]:
    """Fill ``g`` and sort best first (g asc, IC desc, age, matrix order)."""
    for ind in pop:
        if ind.score is None or ind.ic is None:
            raise ValueError("every individual needs score and ic before ranking")
        ind.g = g_value(ind.score, ind.ic, r)
    return sorted(pop, key=_rank_key)


def rank_and_truncate(pop: Sequence[Individual], alpha: float, r: tuple[float, float]):
    """``(selected, elite)``: the ``floor(alpha*|pop|)`` lowest-g individuals and the best."""
    k = math.floor(alpha * len(pop))
    if k < 1:
        raise ValueError(f"floor(alpha * N) = 0 for alpha={alpha}, N={len(pop)}")
    ranked = rank(pop, r)
    return ranked[:k], ranked[0]


def pareto_front(points: Sequence) -> list:
    """Non-dominated items under maximization of ``(score, ic)``, sorted by score.

    Accepts ``Individual`` objects or ``(score, ic)`` pairs.
    """
    def coords(p):
        return (p.score, p.ic) if isinstance(p, Individual) else (p[0], p[1])

    items = list(points)
    # sweep by score desc, ic desc; a point survives if its ic beats every
    # previously seen point with strictly larger score, and it is not a
    # duplicate-dominated point at equal score
    order = sorted(range(len(items)), key=lambda i: (-coords(items[i])[0], -coords(items[i])[1]))
    front = []
    best_ic = -math.inf
    i = 0
    while i < len(order):
        s = coords(items[order[i]])[0]
        group = [order[i]]
        while i + 1 < len(order) and coords(items[order[i + 1]])[0] == s:
            i += 1
            group.append(order[i])
        top_ic = coords(items[group[0]])[1]
        if top_ic > best_ic:
            front.extend(j for j in group if coords(items[j])[1] == top_ic)
            best_ic = top_ic
        i += 1
    front.sort(key=lambda j: (coords(items[j])[0], coords(items[j])[1], j))
    return [items[j] for j in front]


# --------------------------------------------------------------------------
# run
# --------------------------------------------------------------------------


def load_population_file(path, n: int, m: int) -> list[Ansatz]:
    """Read a JSON list of ansatz objects; shallower circuits are padded with I."""
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("ansatzes", [])
    out = []
    for obj in data:
        a, _ = ansatz_from_dict(obj)
        if a.n != n:
            raise InvalidAnsatz(f"population file circuit has {a.n} qubits, config has {n}")
        out.append(pad_depth(a, m))
    return out


def init_population(cfg: SearchConfig) -> list[Individual]:
    """Generation 0: the population file (if any), topped up from the uniform model."""
    pop: list[Individual] = []
    if cfg.init != "uniform":
        seen: set[bytes] = set()
        for a in load_population_file(cfg.init, cfg.n, cfg.m):
            a = postprocess(a)
            if a.key not in seen and len(pop) < cfg.N:
                seen.add(a.key)
                pop.append(Individual(a, born=0))
        if len(pop) < cfg.N:
            log.info("population file gave %d distinct circuits; topping up to %d", len(pop), cfg.N)
    model = MultinomialModel.uniform(cfg.n, cfg.m, cfg.allowed)
    return _fill(pop, cfg.N, model, substream(cfg.seed, "init"), 0, cfg.retry_cap, cfg.allowed)


@dataclass
class ArchiveEntry:
    ansatz: Ansatz
    energy: float
    params: list[float]
    born: int
    optimizations: int = 1

    def to_dict(self) -> dict:
        return {
            "matrix": self.ansatz.matrix.tolist(),
            "energy": self.energy,
            "params": self.params,
            "born": self.born,
            "optimizations": self.optimizations,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArchiveEntry":
        return cls(Ansatz(np.asarray(d["matrix"])), d["energy"], d["params"], d["born"], d["optimizations"])


@dataclass
class RunState:
    cfg: SearchConfig
    h: PauliSum
    tolerance: float
    iteration: int = 0
    population: list[Individual] = field(default_factory=list)
    archive: dict[bytes, ArchiveEntry] = field(default_factory=dict)
    ic_cache: dict[bytes, float] = field(default_factory=dict)
    model: ComparatorModel | None = None
    true_opts: int = 0
    best_g: float = math.inf
    since_improved: int = 0
    records: list[dict] = field(default_factory=list)
    finished: bool = False

    def to_dict(self) -> dict:
        return {
            "config": self.cfg.to_dict(),
            "hamiltonian": self.h.to_dict(),
            "tolerance": self.tolerance,
            "iteration": self.iteration,
            "population": [ind.to_dict() for ind in self.population],
            "archive": [e.to_dict() for e in self.archive.values()],
            "ic_cache": [[k.hex(), v] for k, v in self.ic_cache.items()],
            "model": self.model.to_dict() if self.model is not None else None,
            "true_opts": self.true_opts,
            "best_g": self.best_g if math.isfinite(self.best_g) else None,
            "since_improved": self.since_improved,
            "records": self.records,
            "finished": self.finished,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunState":
        cfg_d = dict(d["config"])
        cfg_d["reference"] = tuple(cfg_d["reference"]) if cfg_d["reference"] is not None else None
        cfg_d["disabled_codes"] = tuple(cfg_d["disabled_codes"])
        state = cls(SearchConfig(**cfg_d), PauliSum.from_dict(d["hamiltonian"]), d["tolerance"])
        state.iteration = d["iteration"]
        state.population = [Individual.from_dict(x) for x in d["population"]]
        for x in d["archive"]:
            e = ArchiveEntry.from_dict(x)
            state.archive[e.ansatz.key] = e
        state.ic_cache = {bytes.fromhex(k): v for k, v in d["ic_cache"]}
        state.model = ComparatorModel.from_dict(d["model"]) if d["model"] is not None else None
        state.true_opts = d["true_opts"]
        state.best_g = d["best_g"] if d["best_g"] is not None else math.inf
        state.since_improved = d["since_improved"]
        state.records = d["records"]
        state.finished = d["finished"]
        return state


@dataclass
class RunRecord:
    records: list[dict]
    summary: dict
    state: RunState = field(repr=False)

    def jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)

    def summary_json(self) -> str:
        return json.dumps(self.summary, sort_keys=True, indent=2) + "\n"


class Search:
    """Stateful driver; ``run_search`` is the one-call entry point."""

    def __init__(self, cfg: SearchConfig, h: PauliSum, state: RunState | None = None):
        if h.n != cfg.n:
            raise ValueError(f"Hamiltonian has {h.n} qubits, config has {cfg.n}")
        self.cfg = cfg
        self.h = h
        self.sm = qs.ShotModel(cfg.shots, subseed(cfg.seed, "shots"))
        self.ic_sm = qs.ShotModel(cfg.ic_shots, subseed(cfg.seed, "ic-shots"))
        self.walk = cfg.walk()
        if state is None:
            tol = cfg.tolerance if cfg.tolerance is not None else cfg.tolerance_fraction * spectral_span(h)
            state = RunState(cfg, h, float(tol))
        self.state = state

    # -- evaluation ------------------------------------------------------

    def optimize(self, ind: Individual, seed: int, iteration: int) -> None:
        st = self.state
        # per-evaluation noise stream: derived from the optimizer seed
        sm = qs.ShotModel(self.sm.shots, subseed(seed, "noise"))
        res = minimize_energy(ind.ansatz, self.h, sm, self.cfg.budget(seed))
        st.true_opts += 1
        key = ind.ansatz.key
        prev = st.archive.get(key)
        if prev is None:
            st.archive[key] = ArchiveEntry(ind.ansatz, res.best_energy, res.best_params.tolist(), iteration)
        else:
            prev.optimizations += 1
            if res.best_energy < prev.energy:
                prev.energy = res.best_energy
                prev.params = res.best_params.tolist()
        ind.energy = st.archive[key].energy
        ind.truly_optimized = True

    def ic_of(self, a: Ansatz) -> float:
        cache = self.state.ic_cache
        if a.key not in cache:
            cache[a.key] = information_content(a, self.h, self.walk, self.ic_sm).metric
        return cache[a.key]

    def train(self, tag) -> None:
        st = self.state
        entries = [(e.ansatz, e.energy) for e in st.archive.values()]
        st.model = refit([], entries, st.tolerance, subseed(self.cfg.seed, "train", tag), self.cfg.max_pairs)

    # -- loop ----------------------------------------------------------------

    def initialize(self) -> None:
        st = self.state
        st.population = init_population(self.cfg)
        for i, ind in enumerate(st.population):
            self.optimize(ind, subseed(self.cfg.seed, "opt", 0, i), 0)
        self.train(0)

    def step(self) -> dict:
        cfg, st = self.cfg, self.state
        t = st.iteration + 1
        pop = st.population
        for ind in pop:
            ind.ic = self.ic_of(ind.ansatz)
        labels = predict_label_matrix(st.model, [ind.ansatz for ind in pop])
        for ind, s in zip(pop, scores_from_labels(labels)):
            ind.score = int(s)
        ranked = rank(pop, cfg.ref_point)
        selected = ranked[: cfg.n_select]
        elite = ranked[0]

        top = ranked[: min(REFIT_TOP, len(ranked))]
        for slot, ind in enumerate(top):
            self.optimize(ind, subseed(cfg.seed, "opt", t, slot), t)
        self.train(t)

        if elite.g < st.best_g:
            st.best_g = elite.g
            st.since_improved = 0
        else:
            st.since_improved += 1

        front = pareto_front(pop)
        record = {
            "iter": t,
            "elite_g": elite.g,
            "elite_score": elite.score,
            "elite_ic": elite.ic,
            "elite_energy": elite.energy,
            "elite_matrix": elite.ansatz.matrix.tolist(),
            "best_g": st.best_g,
            "mean_ic": float(np.mean([ind.ic for ind in pop])),
            "mean_score": float(np.mean([ind.score for ind in pop])),
            "n_true_opts": st.true_opts,
            "archive_size": len(st.archive),
            "pareto": [
                {"score": p.score, "ic": p.ic, "energy": p.energy, "matrix": p.ansatz.matrix.tolist()}
                for p in front
            ],
        }
        st.records.append(record)

        model = fit_model(selected, cfg.floor_prob, cfg.allowed)
        carried = Individual(elite.ansatz, elite.born, elite.energy, elite.truly_optimized)
        st.population = sample_population(
            model, cfg.N, carried, substream(cfg.seed, "sample", t), t, cfg.retry_cap, cfg.allowed
        )
        st.iteration = t
        if t >= cfg.t_max or st.since_improved >= cfg.stall_iterations:
            st.finished = True
        return record

    def summary(self) -> dict:
        """Final Pareto front over all truly optimized circuits.

        Scores use exact energies within the archive; the reference corner
        is ``(2(K-1), r2)`` for an archive of ``K`` circuits. ``best`` is the
        front member with the smallest box value.
        """
        cfg, st = self.cfg, self.state
        entries = sorted(st.archive.values(), key=lambda e: e.ansatz.key)
        energies = [e.energy for e in entries]
        scores = scores_from_labels(true_label_matrix(energies, st.tolerance))
        inds = []
        for e, s in zip(entries, scores):
            inds.append(
                Individual(e.ansatz, e.born, e.energy, True, ic=self.ic_of(e.ansatz), score=int(s))
            )
        r = (2.0 * max(len(inds) - 1, 1), cfg.ref_point[1])
        front = pareto_front(inds)
        for ind in front:
            ind.g = g_value(ind.score, ind.ic, r)
        best = min(front, key=_rank_key)
        best_entry = st.archive[best.ansatz.key]
        lowest = min(entries, key=lambda e: (e.energy, e.ansatz.key))
        out = {
            "iterations": st.iteration,
            "n_true_opts": st.true_opts,
            "expected_true_opts": cfg.N + min(REFIT_TOP, cfg.N) * st.iteration,
            "tolerance": st.tolerance,
            "reference_point": list(r),
            "best": {
                "matrix": best.ansatz.matrix.tolist(),
                "energy": best.energy,
                "ic": best.ic,
                "score": best.score,
                "g": best.g,
                "params": best_entry.params,
            },
            "lowest_energy": {
                "matrix": lowest.ansatz.matrix.tolist(),
                "energy": lowest.energy,
                "ic": self.ic_of(lowest.ansatz),
                "params": lowest.params,
            },
            "pareto": [
                {"score": p.score, "ic": p.ic, "energy": p.energy, "g": p.g, "matrix": p.ansatz.matrix.tolist()}
                for p in front
            ],
        }
        if cfg.polish_restarts:
            res = minimize_energy(
                best.ansatz, self.h, qs.EXACT, cfg.budget(subseed(cfg.seed, "polish"), cfg.polish_restarts)
            )
            out["best"]["polished_energy"] = min(res.best_energy, best.energy)
        return out


def run_search(
    cfg: SearchConfig,
    h: PauliSum,
    resume: RunState | None = None,
    stop_after: int | None = None,
    on_iteration: Callable[[RunState, dict], None] | None = None,
) -> RunRecord:
    """Run (or resume) a search.

    ``stop_after`` ends the session after that many iterations without
    marking the run finished, which is how interruption is simulated;
    ``on_iteration`` is called after each iteration (checkpointing hook).
    """
    search = Search(cfg, h, resume)
    st = search.state
    if not st.population:
        search.initialize()
        if on_iteration is not None:
            on_iteration(st, {})
    done = 0
    while not st.finished:
        if stop_after is not None and done >= stop_after:
            break
        record = search.step()
        done += 1
        log.info("iter %d elite_g=%.4g elite_E=%s mean_ic=%.4g", record["iter"], record["elite_g"], record["elite_energy"], record["mean_ic"])
        if on_iteration is not None:
            on_iteration(st, record)
    summary = search.summary() if st.finished else {}
    return RunRecord(list(st.records), summary, st)
