import json

import numpy as np
import pytest

from qaseda import quantumsim as qs
from qaseda.hamiltonians import PauliSum, build_hamiltonian, exact_ground_energy, load_hamiltonian, spectral_span

# frozen dense-diagonalization values
GROUND = {
    (2, "H1"): -4.123105625617661,
    (2, "H2"): -3.0,
    (2, "H3"): -7.5,
    (4, "H1"): -8.376798636850358,
    (4, "H2"): -7.828427124746188,
    (4, "H3"): -15.03565375285274,
    (4, "H4"): -18.16515138991168,
    (8, "H1"): -16.88514149320817,
    (8, "H2"): -15.928961951051535,
    (8, "H3"): -30.107086064765458,
    (8, "H4"): -39.08777061793145,
}

# published dataset means (two decimals) for circuits near the target depth
DATASET_MEAN = {
    (4, "H1"): -8.37, (4, "H2"): -7.83, (4, "H3"): -14.19, (4, "H4"): -17.18,
    (8, "H1"): -16.89, (8, "H2"): -15.92, (8, "H3"): -30.07, (8, "H4"): -39.05,
}


@pytest.mark.parametrize("key", sorted(GROUND))
def test_ground_energy_oracle(key):
    n, kind = key
    e, v = exact_ground_energy(build_hamiltonian(kind, n))
    assert abs(e - GROUND[key]) < 1e-9
    assert abs(np.linalg.norm(v) - 1) < 1e-12
    assert abs(qs.expectation(v, build_hamiltonian(kind, n)) - e) < 1e-8


@pytest.mark.parametrize("key", sorted(DATASET_MEAN))
def test_dataset_means_consistent(key):
    # the two-decimal rounding of published means allows 0.005 below the true ground
    g = GROUND[key]
    assert g - 0.005 - 1e-9 <= DATASET_MEAN[key] <= g + 1.0


def test_term_counts():
    h1 = build_hamiltonian("H1", 4)
    assert len(h1) == 7
    assert sorted(c for c, _ in h1.terms) == [1, 1, 1, 2, 2, 2, 2]
    h4 = build_hamiltonian("H4", 4)
    assert len(h4) == 15  # XX, YY, ZZ on 3 nearest and 2 next-nearest bonds
    assert sum(1 for c, _ in h4.terms if c == 1.0) == 9
    assert sum(1 for c, _ in h4.terms if c == 3.0) == 6


def test_h3_alternating_bonds():
    h3 = build_hamiltonian("H3", 4)
    coeff = dict((w, c) for c, w in h3.terms)
    assert [coeff["ZZII"], coeff["IZZI"], coeff["IIZZ"]] == [2.5, -0.5, 2.5]


def test_single_qubit_grounds():
    e, v = exact_ground_energy(PauliSum(1, ((1.0, "Z"),)))
    assert e == pytest.approx(-1.0) and abs(abs(v[1]) - 1) < 1e-12
    e, v = exact_ground_energy(PauliSum(1, ((2.0, "X"),)))
    minus = np.array([1, -1]) / np.sqrt(2)
    assert e == pytest.approx(-2.0) and qs.fidelity(v, minus) == pytest.approx(1.0)


def test_errors():
    with pytest.raises(ValueError):
        build_hamiltonian("H7", 4)
    with pytest.raises(ValueError):
        build_hamiltonian("H1", 1)
    with pytest.raises(ValueError):
        build_hamiltonian("H4", 2)
    with pytest.raises(ValueError):
        PauliSum(2, ((1.0, "XQ"),))
    with pytest.raises(ValueError):
        exact_ground_energy(PauliSum(15, ((1.0, "Z" * 15),)))


def test_case_insensitive_kind():
    assert build_hamiltonian("h2", 3) == build_hamiltonian("H2", 3) == build_hamiltonian(2, 3)


def test_merge_and_algebra():
    a = PauliSum(2, ((1.0, "ZZ"), (2.0, "ZZ"), (0.0, "XX")))
    assert a.terms == ((3.0, "ZZ"),)
    b = a + PauliSum(2, ((-3.0, "ZZ"),))
    assert len(b) == 0
    assert a.scaled(2).terms == ((6.0, "ZZ"),)


@pytest.mark.parametrize("kind,n", [("H1", 3), ("H2", 4), ("H3", 5), ("H4", 4)])
def test_hermitian(kind, n):
    m = build_hamiltonian(kind, n).to_dense()
    assert np.abs(m - m.conj().T).max() <= 1e-12


def test_y_phase_convention():
    m = PauliSum(1, ((1.0, "Y"),)).to_dense()
    np.testing.assert_allclose(m, [[0, -1j], [1j, 0]])
    # qubit 0 is the least significant bit
    z0 = PauliSum(2, ((1.0, "ZI"),)).to_dense().diagonal().real
    assert z0.tolist() == [1, -1, 1, -1]


def test_json_roundtrip(tmp_path):
    h = build_hamiltonian("H3", 4)
    p = tmp_path / "h.json"
    p.write_text(json.dumps(h.to_dict()))
    assert load_hamiltonian(p) == h


def test_spectral_span():
    assert spectral_span(PauliSum(1, ((1.0, "Z"),))) == pytest.approx(2.0)
    assert spectral_span(build_hamiltonian("H1", 4)) == pytest.approx(16.753597273700713)
    assert spectral_span(PauliSum(2, ())) == 0.0
