"""Dense statevector simulation of encoded ansatzes.

States are plain ``complex128`` numpy arrays of length ``2**n``; bit ``q`` of
a basis index is qubit ``q``. Every circuit starts from ``|0...0>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qaseda import kernels
from qaseda.circuits import Ansatz, as_ansatz, count_params
from qaseda.hamiltonians import PauliSum


@dataclass(frozen=True)
class ShotModel:
    """Measurement-noise settings. ``shots=0`` means exact expectation values."""

    shots: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.shots < 0:
            raise ValueError("shots must be non-negative")

    @property
    def exact(self) -> bool:
        return self.shots == 0


EXACT = ShotModel(0)


def _n_qubits(state: np.ndarray) -> int:
    n = int(state.shape[0]).bit_length() - 1
    if state.ndim != 1 or 1 << n != state.shape[0]:
        raise ValueError(f"state length {state.shape[0]} is not a power of two")
    return n


def _check_params(a: Ansatz, theta) -> np.ndarray:
    theta = np.ascontiguousarray(theta, dtype=np.float64).reshape(-1)
    expected = count_params(a)
    if theta.size != expected:
        raise ValueError(f"ansatz has {expected} parameters, got {theta.size}")
    return theta


def prepare_state(a: Ansatz, theta=()) -> np.ndarray:
    a = as_ansatz(a)
    theta = _check_params(a, theta)
    return kernels.simulate(a.n, *a.program, theta)


def expectation(state: np.ndarray, h: PauliSum) -> float:
    if _n_qubits(state) != h.n:
        raise ValueError(f"state has {_n_qubits(state)} qubits, observable has {h.n}")
    if not h.terms:
        return 0.0
    return float(kernels.expectation(state, *h.compiled))


def variance(state: np.ndarray, h: PauliSum) -> float:
    """``<H^2> - <H>^2`` computed from ``H|psi>``."""
    if _n_qubits(state) != h.n:
        raise ValueError("qubit count mismatch")
    if not h.terms:
        return 0.0
    hpsi = kernels.apply_pauli_sum(state, *h.compiled)
    mean = float(np.vdot(state, hpsi).real)
    return max(float(np.vdot(hpsi, hpsi).real) - mean * mean, 0.0)


def expectation_noisy(
    state: np.ndarray,
    h: PauliSum,
    sm: ShotModel,
    rng: np.random.Generator | None = None,
) -> float:
    """Shot-noisy estimate of ``<H>``.

    Uses the Gaussian limit of the sample mean: ``<H> + N(0, Var(H)/shots)``.
    ``rng`` defaults to a fresh generator seeded with ``sm.seed``.
    """
    mean = expectation(state, h)
    if sm.exact:
        return mean
    var = variance(state, h)
    if var == 0.0:
        return mean
    if rng is None:
        rng = np.random.default_rng(sm.seed)
    return mean + float(rng.normal(0.0, math.sqrt(var / sm.shots)))


def energy(a: Ansatz, theta, h: PauliSum) -> float:
    """Exact ``<0|U(theta)^dag H U(theta)|0>`` in one kernel call."""
    a = as_ansatz(a)
    if a.n != h.n:
        raise ValueError(f"ansatz has {a.n} qubits, observable has {h.n}")
    theta = _check_params(a, theta)
    if not h.terms:
        return 0.0
    return float(kernels.energy(a.n, *a.program, theta, *h.compiled))


def fidelity(s1: np.ndarray, s2: np.ndarray) -> float:
    if s1.shape != s2.shape:
        raise ValueError(f"dimension mismatch {s1.shape} vs {s2.shape}")
    return float(min(abs(np.vdot(s1, s2)) ** 2, 1.0))


def parameter_shift_grad(a: Ansatz, theta, h: PauliSum, k: int) -> float:
    """Exact partial derivative w.r.t. angle ``k`` via the +-pi/2 shift rule."""
    a = as_ansatz(a)
    theta = _check_params(a, theta)
    if not 0 <= k < theta.size:
        raise IndexError(f"parameter index {k} out of range for {theta.size} parameters")
    plus, minus = theta.copy(), theta.copy()
    plus[k] += math.pi / 2
    minus[k] -= math.pi / 2
    return 0.5 * (energy(a, plus, h) - energy(a, minus, h))


def gradient(a: Ansatz, theta, h: PauliSum) -> np.ndarray:
    theta = _check_params(as_ansatz(a), theta)
    return np.array([parameter_shift_grad(a, theta, h, k) for k in range(theta.size)])


def state_to_json(state: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in state]


def state_from_json(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    return arr[:, 0] + 1j * arr[:, 1]
