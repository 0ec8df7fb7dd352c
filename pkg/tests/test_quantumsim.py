import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qaseda import quantumsim as qs
from qaseda.circuits import Ansatz, count_params
from qaseda.hamiltonians import PauliSum, build_hamiltonian

from conftest import ansatzes

R = 1 / math.sqrt(2)
Z1 = PauliSum(1, ((1.0, "Z"),))
ZZ = PauliSum(2, ((1.0, "ZZ"),))
PLUS = np.array([R, R], dtype=complex)
BELL = Ansatz([[4, 5], [0, 0]])  # H on q0 then CNOT 0 -> 1


def test_identity_circuit():
    s = qs.prepare_state(Ansatz(np.zeros((3, 2), dtype=int)))
    assert s.tolist() == [1] + [0] * 7


def test_hadamard_and_bell():
    np.testing.assert_allclose(qs.prepare_state(Ansatz([[4]])), [R, R], atol=1e-15)
    np.testing.assert_allclose(qs.prepare_state(BELL), [R, 0, 0, R], atol=1e-15)


def test_expectation_examples():
    assert qs.expectation(qs.prepare_state(Ansatz(np.zeros((4, 1), dtype=int))), build_hamiltonian("H1", 4)) == 3.0
    assert abs(qs.expectation(PLUS, Z1)) < 1e-15
    assert abs(qs.expectation(qs.prepare_state(BELL), ZZ) - 1.0) < 1e-14


def test_qubit_mismatch():
    with pytest.raises(ValueError):
        qs.expectation(PLUS, ZZ)
    with pytest.raises(ValueError):
        qs.prepare_state(Ansatz([[1]]), [0.1, 0.2])


def test_noise_disabled_and_eigenstates():
    s = qs.prepare_state(Ansatz([[2]]), [0.7])
    assert qs.expectation_noisy(s, Z1, qs.ShotModel(0)) == qs.expectation(s, Z1)
    zero = np.array([1, 0], dtype=complex)
    assert qs.expectation_noisy(zero, Z1, qs.ShotModel(10, seed=3)) == 1.0


def test_shot_noise_band():
    # Var(Z) on |+> is 1, so 10^4 shots give sigma = 0.01 and +-0.04 is a 4-sigma band
    vals = [qs.expectation_noisy(PLUS, Z1, qs.ShotModel(10_000, seed=s)) for s in range(2000)]
    assert np.mean(np.abs(vals) <= 0.04) >= 0.999
    assert abs(np.std(vals) - 0.01) < 0.001


def test_fidelity_examples():
    zero, one = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    assert qs.fidelity(zero, zero) == 1.0
    assert qs.fidelity(zero, one) == 0.0
    assert abs(qs.fidelity(zero, PLUS) - 0.5) < 1e-15
    with pytest.raises(ValueError):
        qs.fidelity(zero, np.ones(4))


def test_parameter_shift_examples():
    rx = Ansatz([[1]])
    assert abs(qs.parameter_shift_grad(rx, [0.0], Z1, 0)) < 1e-15
    assert abs(qs.parameter_shift_grad(rx, [math.pi / 2], Z1, 0) + 1.0) < 1e-14
    with pytest.raises(IndexError):
        qs.parameter_shift_grad(rx, [0.0], Z1, 1)


def test_state_json_roundtrip(rng):
    s = qs.prepare_state(Ansatz([[2, 5], [1, 3]]), rng.uniform(0, 6, 3))
    back = qs.state_from_json(json.loads(json.dumps(qs.state_to_json(s))))
    assert np.array_equal(back, s)


@given(ansatzes(), st.integers(0, 2**32 - 1))
def test_norm_preserved(a, seed):
    theta = np.random.default_rng(seed).uniform(0, 2 * np.pi, count_params(a))
    assert abs(np.linalg.norm(qs.prepare_state(a, theta)) - 1) < 1e-12


@given(ansatzes(min_n=2, max_n=4), st.integers(0, 2**32 - 1))
def test_expectation_linear_and_real(a, seed):
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi, count_params(a))
    h = build_hamiltonian("H3" if a.n < 3 else "H4", a.n)
    s = qs.prepare_state(a, theta)
    total = qs.expectation(s, h)
    parts = sum(qs.expectation(s, PauliSum(a.n, ((c, w),))) for c, w in h.terms)
    assert abs(total - parts) < 1e-10
    dense = np.vdot(s, h.to_dense() @ s)
    assert abs(dense.imag) < 1e-10 and abs(dense.real - total) < 1e-10
    assert abs(qs.energy(a, theta, h) - total) < 1e-10


@given(ansatzes(min_n=2, max_n=4), st.integers(0, 2**32 - 1))
def test_parameter_shift_matches_finite_difference(a, seed):
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi, count_params(a))
    h = build_hamiltonian("H1", a.n)
    step = 1e-5
    for k in range(theta.size):
        plus, minus = theta.copy(), theta.copy()
        plus[k] += step
        minus[k] -= step
        fd = (qs.energy(a, plus, h) - qs.energy(a, minus, h)) / (2 * step)
        assert abs(qs.parameter_shift_grad(a, theta, h, k) - fd) < 1e-6
