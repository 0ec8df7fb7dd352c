"""Information content of the energy landscape along a random walk.

A walk of ``W`` fixed-length steps in angle space gives ``W`` directional
slopes ``y_t``. For a sensitivity ``eps`` each slope becomes a symbol in
``{-1, 0, +1}`` and the information content ``IC(eps)`` is the base-6 entropy
of the off-diagonal transitions between consecutive symbols. ``eps_M`` is
the sensitivity that maximizes it; ``eps_M * sqrt(M)`` tracks the average
gradient norm and is the trainability objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from qaseda import quantumsim as qs
from qaseda.circuits import Ansatz, as_ansatz, count_params
from qaseda.hamiltonians import PauliSum
from qaseda.rng import substream

DEFAULT_GRID_POINTS = 64
DEFAULT_GRID_SPAN = (1e-4, 1e2)
ROUNDOFF = 1e-12

# transition (a, b) with a, b in {-1, 0, 1} is encoded as 3*(a+1) + (b+1);
# the diagonal a == b is 0, 4, 8
_OFF_DIAGONAL = np.array([c for c in range(9) if c not in (0, 4, 8)])


class NoParameters(ValueError):
    pass


@dataclass(frozen=True)
class WalkConfig:
    """Random-walk settings.

    ``steps=None`` picks ``min(10*M, 500)`` (at least 10). ``eps_grid=None``
    uses 64 log-spaced thresholds over ``[1e-4, 1e2] * max|slope|``; an
    explicit grid is used as given (absolute values).
    """

    steps: int | None = None
    step_scale: float = 0.05
    eps_grid: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.steps is not None and self.steps < 10:
            raise ValueError("walk needs at least 10 steps")
        if self.step_scale <= 0:
            raise ValueError("step_scale must be positive")
        if self.eps_grid is not None:
            grid = np.asarray(self.eps_grid, dtype=float)
            if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
                raise ValueError("eps_grid must be strictly increasing and positive")
            object.__setattr__(self, "eps_grid", tuple(float(x) for x in grid))

    def steps_for(self, n_params: int) -> int:
        if self.steps is not None:
            return self.steps
        return max(10, min(10 * n_params, 500))


@dataclass(frozen=True)
class ICResult:
    eps_M: float
    ic_curve: list[tuple[float, float]]
    metric: float
    grad_norm_proxy: float
    n_params: int
    energies: list[float] = field(default_factory=list, repr=False)

    @property
    def max_ic(self) -> float:
        return max((v for _, v in self.ic_curve), default=0.0)

    def to_dict(self, include_energies: bool = False) -> dict:
        out = {
            "eps_M": self.eps_M,
            "metric": self.metric,
            "grad_norm_proxy": self.grad_norm_proxy,
            "n_params": self.n_params,
            "max_ic": self.max_ic,
            "ic_curve": [[e, v] for e, v in self.ic_curve],
        }
        if include_energies:
            out["energies"] = list(self.energies)
        return out


def random_walk_energies(
    a: Ansatz,
    h: PauliSum,
    wc: WalkConfig = WalkConfig(),
    sm: qs.ShotModel = qs.EXACT,
) -> np.ndarray:
    """Energies at the ``W + 1`` points of a random walk in angle space.

    Start uniform in ``[0, 2pi)^M``; every step has length ``step_scale *
    sqrt(M)`` in a uniformly random direction.
    """
    a = as_ansatz(a)
    n_params = count_params(a)
    if n_params == 0:
        raise NoParameters("ansatz has no parameters to walk over")
    steps = wc.steps_for(n_params)
    rng = substream(wc.seed, "walk", a.key)
    theta = rng.uniform(0.0, 2 * math.pi, n_params)
    dirs = rng.standard_normal((steps, n_params))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs *= wc.step_scale * math.sqrt(n_params)
    noise_rng = None if sm.exact else substream(sm.seed, "walk-noise", wc.seed, a.key)
    out = np.empty(steps + 1)
    for t in range(steps + 1):
        if t:
            theta = theta + dirs[t - 1]
        if sm.exact:
            out[t] = qs.energy(a, theta, h)
        else:
            out[t] = qs.expectation_noisy(qs.prepare_state(a, theta), h, sm, noise_rng)
    return out


def walk_slopes(energies, step_scale: float, n_params: int = 1) -> np.ndarray:
    """Directional slopes; energy changes at round-off level count as zero."""
    energies = np.asarray(energies, dtype=float)
    diffs = np.diff(energies)
    floor = ROUNDOFF * max(1.0, float(np.max(np.abs(energies))))
    diffs[np.abs(diffs) <= floor] = 0.0
    return diffs / (step_scale * math.sqrt(n_params))


def ic_values(slopes: np.ndarray, eps_grid) -> np.ndarray:
    """``IC(eps)`` for every threshold in ``eps_grid``."""
    slopes = np.asarray(slopes, dtype=float)
    eps = np.asarray(eps_grid, dtype=float)[:, None]
    symbols = np.where(np.abs(slopes)[None, :] > eps, np.sign(slopes)[None, :], 0.0).astype(np.int64)
    codes = 3 * (symbols[:, :-1] + 1) + (symbols[:, 1:] + 1)
    n_trans = codes.shape[1]
    counts = np.stack([np.bincount(row, minlength=9) for row in codes])
    p = counts[:, _OFF_DIAGONAL] / n_trans
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(p) / math.log(6.0), 0.0)
    return terms.sum(axis=1)


def default_eps_grid(slopes: np.ndarray) -> np.ndarray:
    top = float(np.max(np.abs(slopes)))
    lo, hi = DEFAULT_GRID_SPAN
    return np.logspace(math.log10(lo * top), math.log10(hi * top), DEFAULT_GRID_POINTS)


def ic_curve(energies, step_scale: float, eps_grid=None, n_params: int = 1) -> list[tuple[float, float]]:
    """``[(eps, IC(eps)), ...]`` for a walk's energy trace."""
    energies = np.asarray(energies, dtype=float)
    if energies.size < 3:
        raise ValueError("need at least 3 energies for an information-content curve")
    slopes = walk_slopes(energies, step_scale, n_params)
    if eps_grid is None:
        if not np.any(slopes):
            return []
        eps_grid = default_eps_grid(slopes)
    values = ic_values(slopes, eps_grid)
    return [(float(e), float(v)) for e, v in zip(eps_grid, values)]


def information_content(
    a: Ansatz,
    h: PauliSum,
    wc: WalkConfig = WalkConfig(),
    sm: qs.ShotModel = qs.EXACT,
) -> ICResult:
    """IC-based trainability of ``a`` for observable ``h``.

    ``metric`` is ``eps_M * sqrt(M)``; parameter-free circuits and landscapes
    that are flat along the walk get ``metric = 0``. ``grad_norm_proxy`` is
    ``M * Var(slopes)``, a walk estimate of the mean squared gradient norm.
    """
    a = as_ansatz(a)
    n_params = count_params(a)
    if n_params == 0:
        return ICResult(0.0, [], 0.0, 0.0, 0)
    energies = random_walk_energies(a, h, wc, sm)
    slopes = walk_slopes(energies, wc.step_scale, n_params)
    proxy = float(n_params * np.var(slopes, ddof=1))
    if not np.any(slopes):
        grid = wc.eps_grid
        curve = [(e, 0.0) for e in grid] if grid is not None else []
        return ICResult(0.0, curve, 0.0, proxy, n_params, energies.tolist())
    curve = ic_curve(energies, wc.step_scale, wc.eps_grid, n_params)
    values = np.array([v for _, v in curve])
    # argmax returns the first maximum, i.e. ties go to the smaller eps
    best = int(np.argmax(values))
    eps_m = curve[best][0]
    return ICResult(eps_m, curve, eps_m * math.sqrt(n_params), proxy, n_params, energies.tolist())
