"""Pauli-sum observables and the four benchmark spin chains."""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

PAULI_CHARS = "IXYZ"
MAX_EXACT_QUBITS = 14
DENSE_LIMIT = 12


@dataclass(frozen=True, eq=False)
class PauliSum:
    """Real-weighted sum of Pauli words.

    ``word[q]`` is the Pauli acting on qubit ``q``. Duplicate words are merged
    on construction and exact zeros dropped, so two equal operators built
    from the same terms compare equal.
    """

    n: int
    terms: tuple[tuple[float, str], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"invalid qubit count {self.n}")
        merged: dict[str, float] = {}
        for coeff, word in self.terms:
            word = word.upper()
            if len(word) != self.n or any(ch not in PAULI_CHARS for ch in word):
                raise ValueError(f"bad Pauli word {word!r} for n={self.n}")
            merged[word] = merged.get(word, 0.0) + float(coeff)
        terms = tuple((c, w) for w, c in merged.items() if c != 0.0)
        object.__setattr__(self, "terms", terms)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n == other.n and dict((w, c) for c, w in self.terms) == dict((w, c) for c, w in other.terms)

    def __len__(self):
        return len(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        return PauliSum(self.n, self.terms + other.terms)

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum(self.n, tuple((c * factor, w) for c, w in self.terms))

    def shifted(self, constant: float) -> "PauliSum":
        """``self + constant * I``."""
        return PauliSum(self.n, self.terms + ((constant, "I" * self.n),))

    @functools.cached_property
    def compiled(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(flip, phase, coeff)`` arrays, see :mod:`qaseda.kernels`."""
        flip, phase, coeff = [], [], []
        for c, word in self.terms:
            f = z = ny = 0
            for q, ch in enumerate(word):
                if ch in "XY":
                    f |= 1 << q
                if ch in "ZY":
                    z |= 1 << q
                ny += ch == "Y"
            flip.append(f)
            phase.append(z)
            coeff.append(c * 1j**ny)
        return (
            np.array(flip, dtype=np.int64),
            np.array(phase, dtype=np.int64),
            np.array(coeff, dtype=np.complex128),
        )

    def to_sparse(self) -> scipy.sparse.csr_matrix:
        dim = 1 << self.n
        idx = np.arange(dim, dtype=np.int64)
        out = scipy.sparse.csr_matrix((dim, dim), dtype=np.complex128)
        for f, z, c in zip(*self.compiled):
            signs = 1.0 - 2.0 * (np.bitwise_count(idx & z) & 1)
            out = out + scipy.sparse.csr_matrix((c * signs, (idx ^ f, idx)), shape=(dim, dim))
        return out

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def to_dict(self) -> dict:
        return {"n": self.n, "terms": [{"coeff": c, "word": w} for c, w in self.terms]}

    @classmethod
    def from_dict(cls, obj: dict) -> "PauliSum":
        return cls(int(obj["n"]), tuple((float(t["coeff"]), str(t["word"])) for t in obj["terms"]))


def pauli_term(n: int, ops: dict[int, str], coeff: float = 1.0) -> tuple[float, str]:
    word = ["I"] * n
    for q, p in ops.items():
        word[q] = p
    return coeff, "".join(word)


def _bond(n: int, i: int, j: int, coeff: float) -> list[tuple[float, str]]:
    return [pauli_term(n, {i: p, j: p}, coeff) for p in "XYZ"]


def build_hamiltonian(kind: str | int, n: int) -> PauliSum:
    """Open-boundary chains H1..H4.

    * H1 transverse-field Ising: ``sum Z_i Z_{i+1} + 2 sum X_i``
    * H2 Heisenberg in a field: ``sum (XX+YY+ZZ)_{i,i+1} + 2 sum Z_i``
    * H3 SSH-like: ``sum (1 + 1.5 (-1)^(i-1)) (XX+YY+ZZ)_{i,i+1} + 2 sum X_i``, i from 1
    * H4 J1-J2: ``sum (XX+YY+ZZ)_{i,i+1} + 3 sum (XX+YY+ZZ)_{i,i+2}``
    """
    kind = str(kind).upper()
    if not kind.startswith("H"):
        kind = "H" + kind
    if kind not in ("H1", "H2", "H3", "H4"):
        raise ValueError(f"unknown Hamiltonian kind {kind!r}")
    if n < 2 or (kind == "H4" and n < 3):
        raise ValueError(f"invalid qubit count {n} for {kind}")
    terms: list[tuple[float, str]] = []
    if kind == "H1":
        terms += [pauli_term(n, {i: "Z", i + 1: "Z"}) for i in range(n - 1)]
        terms += [pauli_term(n, {i: "X"}, 2.0) for i in range(n)]
    elif kind == "H2":
        for i in range(n - 1):
            terms += _bond(n, i, i + 1, 1.0)
        terms += [pauli_term(n, {i: "Z"}, 2.0) for i in range(n)]
    elif kind == "H3":
        # 0-based i here is the 1-based i-1, so (-1)^(i-1) becomes (-1)^i
        for i in range(n - 1):
            terms += _bond(n, i, i + 1, 1.0 + 1.5 * (-1) ** i)
        terms += [pauli_term(n, {i: "X"}, 2.0) for i in range(n)]
    else:
        for i in range(n - 1):
            terms += _bond(n, i, i + 1, 1.0)
        for i in range(n - 2):
            terms += _bond(n, i, i + 2, 3.0)
    return PauliSum(n, tuple(terms))


def exact_ground_energy(h: PauliSum) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue and a normalized eigenvector.

    Dense Hermitian solve up to 12 qubits, Lanczos (``eigsh``) for 13-14.
    """
    if h.n > MAX_EXACT_QUBITS:
        raise ValueError(f"n={h.n} too large for an exact solve (max {MAX_EXACT_QUBITS})")
    if not h.terms:
        vec = np.zeros(1 << h.n, dtype=np.complex128)
        vec[0] = 1.0
        return 0.0, vec
    if h.n <= DENSE_LIMIT:
        vals, vecs = scipy.linalg.eigh(h.to_dense(), subset_by_index=[0, 0])
        lam, vec = float(vals[0]), vecs[:, 0]
    else:
        vals, vecs = scipy.sparse.linalg.eigsh(h.to_sparse(), k=1, which="SA", tol=1e-12)
        lam, vec = float(vals[0]), vecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    # fix the global phase so the largest amplitude is real positive
    k = int(np.argmax(np.abs(vec)))
    vec = vec * (abs(vec[k]) / vec[k])
    return lam, vec


def spectral_span(h: PauliSum) -> float:
    """``E_max - E_min``; exact up to 10 qubits, else the bound ``2 * sum |c|``."""
    if not h.terms:
        return 0.0
    if h.n <= 10:
        vals = np.linalg.eigvalsh(h.to_dense())
        return float(vals[-1] - vals[0])
    return 2.0 * sum(abs(c) for c, w in h.terms if set(w) != {"I"})


def load_hamiltonian(path) -> PauliSum:
    with open(path) as fh:
        return PauliSum.from_dict(json.load(fh))
