"""Derivative-free inner-loop angle optimization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from qaseda import quantumsim as qs
from qaseda.circuits import Ansatz, as_ansatz, count_params
from qaseda.hamiltonians import PauliSum
from qaseda.rng import substream

METHODS = ("nelder-mead", "cobyla")


@dataclass(frozen=True)
class OptBudget:
    """Inner-optimizer settings.

    ``max_evals=None`` means ``evals_per_param * max(1, M)`` for an ansatz with
    ``M`` angles. ``max_evals`` is per restart.
    """

    max_evals: int | None = None
    ftol: float = 1e-6
    seed: int = 0
    restarts: int = 1
    method: str = "nelder-mead"
    evals_per_param: int = 200
    init_step: float = 0.5

    def __post_init__(self):
        if self.max_evals is not None and self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.ftol <= 0:
            raise ValueError("ftol must be > 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")

    def evals_for(self, n_params: int) -> int:
        if self.max_evals is not None:
            return self.max_evals
        return self.evals_per_param * max(1, n_params)


@dataclass(frozen=True)
class OptResult:
    best_params: np.ndarray
    best_energy: float
    evals_used: int


class _BudgetExhausted(Exception):
    pass


class _Objective:
    def __init__(self, a: Ansatz, h: PauliSum, sm: qs.ShotModel, max_evals: int, rng):
        self.a, self.h, self.sm = a, h, sm
        self.max_evals = max_evals
        self.rng = rng
        self.evals = 0
        self.best_x: np.ndarray | None = None
        self.best_f = math.inf

    def __call__(self, x):
        if self.evals >= self.max_evals:
            raise _BudgetExhausted
        self.evals += 1
        if self.sm.exact:
            f = qs.energy(self.a, x, self.h)
        else:
            f = qs.expectation_noisy(qs.prepare_state(self.a, x), self.h, self.sm, self.rng)
        if f < self.best_f:
            self.best_f = f
            self.best_x = np.array(x, dtype=float)
        return f


def _run_once(obj: _Objective, x0: np.ndarray, budget: OptBudget):
    try:
        if budget.method == "nelder-mead":
            simplex = np.vstack([x0, x0 + budget.init_step * np.eye(x0.size)])
            scipy.optimize.minimize(
                obj,
                x0,
                method="Nelder-Mead",
                options={
                    "maxfev": obj.max_evals,
                    "fatol": budget.ftol,
                    "xatol": 1e-5,
                    "adaptive": True,
                    "initial_simplex": simplex,
                },
            )
        else:
            scipy.optimize.minimize(
                obj,
                x0,
                method="COBYLA",
                options={"maxiter": obj.max_evals, "rhobeg": budget.init_step, "tol": budget.ftol},
            )
    except _BudgetExhausted:
        pass


def minimize_energy(
    a: Ansatz,
    h: PauliSum,
    sm: qs.ShotModel = qs.EXACT,
    budget: OptBudget = OptBudget(),
) -> OptResult:
    """Minimize ``<H>`` over the angles of ``a``.

    Each restart starts from angles drawn uniformly in ``[0, 2pi)``. The
    objective sees shot noise when ``sm`` asks for it; the reported energy is
    always the exact energy at the returned angles.
    """
    a = as_ansatz(a)
    n_params = count_params(a)
    if n_params == 0:
        return OptResult(np.zeros(0), qs.energy(a, (), h), 1)
    max_evals = budget.evals_for(n_params)
    best: OptResult | None = None
    used = 0
    for r in range(budget.restarts):
        rng = substream(budget.seed, "restart", r)
        x0 = rng.uniform(0.0, 2 * math.pi, n_params)
        obj = _Objective(a, h, sm, max_evals, rng)
        _run_once(obj, x0, budget)
        used += obj.evals
        params = np.mod(obj.best_x, 2 * math.pi)
        e = qs.energy(a, params, h)
        if best is None or e < best.best_energy:
            best = OptResult(params, e, 0)
    return OptResult(best.best_params, best.best_energy, used)
