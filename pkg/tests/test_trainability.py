import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaseda.circuits import Ansatz, n_codes
from qaseda.hamiltonians import PauliSum
from qaseda.trainability import (
    NoParameters,
    WalkConfig,
    ic_curve,
    ic_values,
    information_content,
    random_walk_energies,
)

Z1 = PauliSum(1, ((1.0, "Z"),))
LOG6_2 = math.log(2) / math.log(6)


def parity(n):
    return PauliSum(n, ((1.0, "Z" * n),))


def test_walk_length():
    e = random_walk_energies(Ansatz([[1, 2]]), Z1, WalkConfig(steps=10))
    assert len(e) == 11


def test_walk_energy_bounds_and_null_observable():
    e = random_walk_energies(Ansatz([[1]]), Z1, WalkConfig(steps=50))
    assert np.all(np.abs(e) <= 1 + 1e-12)
    assert np.all(random_walk_energies(Ansatz([[1]]), PauliSum(1, ()), WalkConfig(steps=10)) == 0)


def test_walk_requires_parameters():
    with pytest.raises(NoParameters):
        random_walk_energies(Ansatz([[4]]), Z1)


def test_walk_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(steps=5)
    with pytest.raises(ValueError):
        WalkConfig(step_scale=0)
    with pytest.raises(ValueError):
        WalkConfig(eps_grid=(1.0, 0.5))
    assert WalkConfig().steps_for(1) == 10 and WalkConfig().steps_for(30) == 300 and WalkConfig().steps_for(90) == 500


def test_constant_and_monotone_traces():
    grid = [1e-3, 1e-2, 1e-1]
    assert all(v == 0 for _, v in ic_curve([2.0] * 20, 0.05, grid))
    assert all(v == 0 for _, v in ic_curve(np.arange(20.0), 0.05, [1e-6]))


def test_alternating_trace():
    # 20 energies give 19 slopes alternating +,-: 18 transitions split 9/9 between
    # (+,-) and (-,+), so the entropy is log6(2)
    e = [0.0, 1.0] * 10
    (_, v), = ic_curve(e, 0.05, [1e-3])
    assert v == pytest.approx(LOG6_2, abs=1e-12)


def test_too_few_energies():
    with pytest.raises(ValueError):
        ic_curve([0.0, 1.0], 0.05, [0.1])


def test_zero_parameter_and_null_metric():
    assert information_content(Ansatz([[4, 0]]), Z1).metric == 0.0
    assert information_content(Ansatz([[1]]), PauliSum(1, ())).metric == 0.0


def test_grad_norm_proxy_single_rx():
    # E = cos(theta), mean |dE|^2 = E[sin^2] = 1/2
    vals = [information_content(Ansatz([[1]]), Z1, WalkConfig(steps=200, seed=s)).grad_norm_proxy for s in range(10)]
    assert 1 / 6 <= np.mean(vals) <= 3 / 2


@settings(max_examples=30)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=60), st.floats(1e-3, 1e3))
def test_ic_bounded(energies, eps):
    for _, v in ic_curve(energies, 0.05, [eps]):
        assert 0.0 <= v <= 1.0 + 1e-12


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=60))
def test_ic_vanishes_for_large_eps(energies):
    slopes = np.diff(energies) / 0.05
    assert ic_values(slopes, [1e9])[0] == 0.0


def _rand_ansatz(seed, n=2, m=4):
    rng = np.random.default_rng(seed)
    mat = rng.integers(0, n_codes(n), (n, m))
    mat[0, 0] = 2
    return Ansatz(mat)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1), st.floats(-10, 10))
def test_metric_invariant_under_constant_shift(seed, c):
    a = _rand_ansatz(seed)
    h = PauliSum(2, ((1.0, "ZZ"), (2.0, "XI")))
    base = information_content(a, h, WalkConfig(seed=seed))
    shifted = information_content(a, h.shifted(c), WalkConfig(seed=seed))
    assert shifted.metric == pytest.approx(base.metric, rel=1e-9, abs=1e-12)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.5, 2.0, 4.0]))
def test_scaling_moves_argmax(seed, c):
    a = _rand_ansatz(seed)
    h = PauliSum(2, ((1.0, "ZZ"), (2.0, "XI")))
    base_grid = np.logspace(-4, 3, 281)
    r = information_content(a, h, WalkConfig(seed=seed, eps_grid=tuple(base_grid)))
    rs = information_content(a, h.scaled(c), WalkConfig(seed=seed, eps_grid=tuple(c * base_grid)))
    # slopes scale by c, so on a grid scaled by c the maximizing threshold scales by c
    assert [v for _, v in rs.ic_curve] == pytest.approx([v for _, v in r.ic_curve], abs=1e-12)
    assert rs.eps_M == pytest.approx(c * r.eps_M, rel=1e-12)
    assert rs.metric == pytest.approx(c * r.metric, rel=1e-12)


def test_metric_decreases_with_qubits():
    # global parity observable on random depth-8 circuits
    means = []
    for n in (2, 4, 6):
        vals = []
        for s in range(50):
            a = _rand_ansatz(1000 * n + s, n, 8)
            vals.append(information_content(a, parity(n), WalkConfig(seed=s)).metric)
        means.append(np.mean(vals))
    assert means[0] >= means[1] >= means[2]


def test_deterministic_and_json():
    a = Ansatz([[2, 5, 1], [1, 0, 3]])
    h = PauliSum(2, ((1.0, "ZZ"),))
    r1, r2 = information_content(a, h, WalkConfig(seed=3)), information_content(a, h, WalkConfig(seed=3))
    assert r1 == r2
    d = r1.to_dict()
    assert r1.metric > 0
    assert d["metric"] == r1.metric and len(d["ic_curve"]) == 64
