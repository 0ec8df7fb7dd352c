"""Hot statevector kernels.

Each kernel exists twice: a loop version compiled with numba and a vectorized
numpy version. ``JIT_ENABLED`` (see :mod:`qaseda._jit`) picks which one the
public names point to. Both are importable directly so tests and the benchmark
can compare them.

Basis convention: bit ``q`` of a basis-state index is qubit ``q``.

Compiled circuit programs are four parallel int64 arrays ``(kind, q0, q1, pidx)``:

* ``kind`` is one of ``OP_RX, OP_RY, OP_RZ, OP_H, OP_CNOT``
* ``q0`` is the acted-on qubit (control for CNOT)
* ``q1`` is the CNOT target, ``-1`` otherwise
* ``pidx`` indexes the angle vector for rotations, ``-1`` otherwise

Compiled Pauli sums are ``(flip, phase, coeff)``: ``flip`` is the X/Y bitmask,
``phase`` the Z/Y bitmask and ``coeff`` the complex coefficient with the
``i**(#Y)`` factor folded in, so ``P|b> = coeff * (-1)**popcount(b & phase) |b ^ flip>``.
"""

import numpy as np

from qaseda._jit import JIT_ENABLED, NUMBA_AVAILABLE, njit

OP_RX, OP_RY, OP_RZ, OP_H, OP_CNOT = 1, 2, 3, 4, 5

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


def gate_matrix(kind, angle=0.0):
    """2x2 unitary for a single-qubit op kind."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if kind == OP_RX:
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if kind == OP_RY:
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind == OP_RZ:
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]], dtype=np.complex128)
    if kind == OP_H:
        return np.array([[1, 1], [1, -1]], dtype=np.complex128) * _INV_SQRT2
    raise ValueError(f"no 2x2 matrix for op kind {kind}")


# --------------------------------------------------------------------------
# numba versions
# --------------------------------------------------------------------------


@njit
def _nb_apply_1q(state, q, u00, u01, u10, u11):
    half = state.shape[0] >> 1
    low = (1 << q) - 1
    bit = 1 << q
    for k in range(half):
        i0 = ((k & ~low) << 1) | (k & low)
        i1 = i0 | bit
        a = state[i0]
        b = state[i1]
        state[i0] = u00 * a + u01 * b
        state[i1] = u10 * a + u11 * b


@njit
def _nb_apply_cnot(state, control, target):
    dim = state.shape[0]
    cbit = 1 << control
    tbit = 1 << target
    for i in range(dim):
        if (i & cbit) and not (i & tbit):
            j = i | tbit
            tmp = state[i]
            state[i] = state[j]
            state[j] = tmp


@njit
def _nb_simulate(n, kind, q0, q1, pidx, theta):
    state = np.zeros(1 << n, dtype=np.complex128)
    state[0] = 1.0
    r = 1.0 / np.sqrt(2.0)
    for op in range(kind.shape[0]):
        k = kind[op]
        q = q0[op]
        if k == 5:
            _nb_apply_cnot(state, q, q1[op])
        elif k == 4:
            _nb_apply_1q(state, q, r + 0j, r + 0j, r + 0j, -r + 0j)
        else:
            half = 0.5 * theta[pidx[op]]
            c = np.cos(half)
            s = np.sin(half)
            if k == 1:
                _nb_apply_1q(state, q, c + 0j, -1j * s, -1j * s, c + 0j)
            elif k == 2:
                _nb_apply_1q(state, q, c + 0j, -s + 0j, s + 0j, c + 0j)
            else:
                _nb_apply_1q(state, q, c - 1j * s, 0j, 0j, c + 1j * s)
    return state


@njit
def _nb_parity(x):
    p = 0
    while x:
        x &= x - 1
        p ^= 1
    return p


@njit
def _nb_apply_pauli_sum(state, flip, phase, coeff):
    out = np.zeros_like(state)
    for t in range(flip.shape[0]):
        f = flip[t]
        z = phase[t]
        c = coeff[t]
        for b in range(state.shape[0]):
            if _nb_parity(b & z):
                out[b ^ f] -= c * state[b]
            else:
                out[b ^ f] += c * state[b]
    return out


@njit
def _nb_expectation(state, flip, phase, coeff):
    total = 0.0 + 0.0j
    for t in range(flip.shape[0]):
        f = flip[t]
        z = phase[t]
        acc = 0.0 + 0.0j
        for b in range(state.shape[0]):
            v = np.conj(state[b ^ f]) * state[b]
            if _nb_parity(b & z):
                acc -= v
            else:
                acc += v
        total += coeff[t] * acc
    return total.real


@njit
def _nb_energy(n, kind, q0, q1, pidx, theta, flip, phase, coeff):
    return _nb_expectation(_nb_simulate(n, kind, q0, q1, pidx, theta), flip, phase, coeff)


# --------------------------------------------------------------------------
# numpy versions
# --------------------------------------------------------------------------


def _np_apply_1q(state, n, q, u):
    view = state.reshape(1 << (n - 1 - q), 2, 1 << q)
    return np.einsum("ab,ibj->iaj", u, view).reshape(-1)


def _np_apply_cnot(state, n, control, target):
    view = state.reshape((2,) * n).copy()
    c_ax, t_ax = n - 1 - control, n - 1 - target
    sel = [slice(None)] * n
    sel[c_ax] = 1
    sub = view[tuple(sel)]
    # removing the control axis shifts the target axis down if it was after it
    t_sub = t_ax if t_ax < c_ax else t_ax - 1
    view[tuple(sel)] = np.flip(sub, axis=t_sub).copy()
    return view.reshape(-1)


def _np_simulate(n, kind, q0, q1, pidx, theta):
    state = np.zeros(1 << n, dtype=np.complex128)
    state[0] = 1.0
    for k, q, t, p in zip(kind, q0, q1, pidx):
        if k == OP_CNOT:
            state = _np_apply_cnot(state, n, int(q), int(t))
        else:
            angle = theta[p] if p >= 0 else 0.0
            state = _np_apply_1q(state, n, int(q), gate_matrix(int(k), angle))
    return state


def _np_signs(dim, phase):
    idx = np.arange(dim, dtype=np.int64)
    return 1.0 - 2.0 * (np.bitwise_count(idx & phase) & 1)


def _np_apply_pauli_sum(state, flip, phase, coeff):
    idx = np.arange(state.shape[0], dtype=np.int64)
    out = np.zeros_like(state)
    for f, z, c in zip(flip, phase, coeff):
        out[idx ^ f] += c * _np_signs(state.shape[0], z) * state
    return out


def _np_expectation(state, flip, phase, coeff):
    idx = np.arange(state.shape[0], dtype=np.int64)
    total = 0.0 + 0.0j
    for f, z, c in zip(flip, phase, coeff):
        total += c * np.sum(np.conj(state[idx ^ f]) * _np_signs(state.shape[0], z) * state)
    return float(total.real)


def _np_energy(n, kind, q0, q1, pidx, theta, flip, phase, coeff):
    return _np_expectation(_np_simulate(n, kind, q0, q1, pidx, theta), flip, phase, coeff)


if JIT_ENABLED:
    simulate = _nb_simulate
    apply_pauli_sum = _nb_apply_pauli_sum
    expectation = _nb_expectation
    energy = _nb_energy
else:
    simulate = _np_simulate
    apply_pauli_sum = _np_apply_pauli_sum
    expectation = _np_expectation
    energy = _np_energy

BACKEND = "numba" if JIT_ENABLED else "numpy"

__all__ = [
    "BACKEND",
    "NUMBA_AVAILABLE",
    "OP_CNOT",
    "OP_H",
    "OP_RX",
    "OP_RY",
    "OP_RZ",
    "apply_pauli_sum",
    "energy",
    "expectation",
    "gate_matrix",
    "simulate",
]
