"""Integer-matrix ansatz encoding.

An ansatz on ``n`` qubits with maximal depth ``m`` is an ``n x m`` integer
matrix. Row ``i`` is qubit ``i``; column ``j`` holds the gates applied at depth
step ``j``. Cell codes:

====  ==========================================================
code  gate
====  ==========================================================
0     I
1     Rx(theta)
2     Ry(theta)
3     Rz(theta)
4     H
5+k   CNOT, control = this row, target = k-th other qubit
====  ==========================================================

"Other qubits" are listed in ascending index order with the row itself
skipped, so on ``n`` qubits codes run ``0 .. n + 3``.

Within a column, cells are applied top to bottom. Angles are ordered
column by column, top to bottom within a column (execution order).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from qaseda import kernels

I, RX, RY, RZ, H = 0, 1, 2, 3, 4
CNOT_BASE = 5
PARAMETRIC_CODES = (RX, RY, RZ)
GATE_NAMES = {I: "I", RX: "Rx", RY: "Ry", RZ: "Rz", H: "H"}
TWO_PI = 2.0 * math.pi


class InvalidAnsatz(ValueError):
    pass


def n_codes(n: int) -> int:
    """Number of distinct cell codes on ``n`` qubits: I, Rx, Ry, Rz, H and n-1 CNOTs."""
    if n < 1:
        raise ValueError(f"invalid qubit count {n}")
    return n + 4


def cnot_target(row: int, code: int, n: int) -> int:
    k = code - CNOT_BASE
    if not 0 <= k < n - 1:
        raise ValueError(f"code {code} is not a CNOT on {n} qubits")
    return k if k < row else k + 1


def cnot_code(control: int, target: int) -> int:
    if control == target:
        raise ValueError("CNOT control and target must differ")
    return CNOT_BASE + (target if target < control else target - 1)


def gate_family(code: int) -> str:
    return "CNOT" if code >= CNOT_BASE else GATE_NAMES[code]


@dataclass(frozen=True)
class GateInfo:
    code: int
    name: str
    arity: int
    parametric: bool
    # CNOT target per control row, None for single-qubit codes
    targets: tuple[int, ...] | None = None


def gate_alphabet(n: int) -> list[GateInfo]:
    """Describe every cell code available on ``n`` qubits."""
    if n < 1:
        raise ValueError(f"invalid qubit count {n}")
    out = [GateInfo(c, GATE_NAMES[c], 1, c in PARAMETRIC_CODES) for c in range(CNOT_BASE)]
    for code in range(CNOT_BASE, n_codes(n)):
        targets = tuple(cnot_target(r, code, n) for r in range(n))
        out.append(GateInfo(code, f"CNOT+{code - CNOT_BASE + 1}", 2, False, targets))
    return out


@dataclass(frozen=True, eq=False)
class Ansatz:
    """Immutable ``n x m`` gate-code matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.int64, copy=True)
        if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
            raise InvalidAnsatz(f"ansatz matrix must be a non-empty 2-D array, got shape {mat.shape}")
        top = n_codes(mat.shape[0])
        if mat.min() < 0 or mat.max() >= top:
            raise InvalidAnsatz(f"cell codes must lie in 0..{top - 1} for n={mat.shape[0]}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.matrix.shape[1]

    @functools.cached_property
    def key(self) -> bytes:
        """Hashable identity: shape plus raw cell bytes."""
        return np.array(self.matrix.shape, dtype=np.int64).tobytes() + self.matrix.tobytes()

    def __eq__(self, other):
        if not isinstance(other, Ansatz):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other: "Ansatz") -> bool:
        return (self.matrix.shape, self.matrix.ravel().tolist()) < (
            other.matrix.shape,
            other.matrix.ravel().tolist(),
        )

    def __repr__(self):
        return f"Ansatz({self.matrix.tolist()})"

    @functools.cached_property
    def program(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Compiled op list for :mod:`qaseda.kernels`."""
        kind, q0, q1, pidx = [], [], [], []
        p = 0
        n = self.n
        for j in range(self.m):
            for i in range(n):
                c = int(self.matrix[i, j])
                if c == I:
                    continue
                kind.append(c if c < CNOT_BASE else kernels.OP_CNOT)
                q0.append(i)
                if c >= CNOT_BASE:
                    q1.append(cnot_target(i, c, n))
                    pidx.append(-1)
                elif c in PARAMETRIC_CODES:
                    q1.append(-1)
                    pidx.append(p)
                    p += 1
                else:
                    q1.append(-1)
                    pidx.append(-1)
        arrays = tuple(np.array(x, dtype=np.int64) for x in (kind, q0, q1, pidx))
        for a in arrays:
            a.setflags(write=False)
        return arrays  # type: ignore[return-value]


def as_ansatz(a) -> Ansatz:
    return a if isinstance(a, Ansatz) else Ansatz(np.asarray(a))


def flatten(a: Ansatz) -> np.ndarray:
    """Row-major integer vector of length ``n*m``."""
    return as_ansatz(a).matrix.reshape(-1).copy()


def unflatten(vec: Sequence[int], n: int, m: int) -> Ansatz:
    vec = np.asarray(vec, dtype=np.int64)
    if vec.size != n * m:
        raise InvalidAnsatz(f"vector of length {vec.size} cannot be reshaped to {n}x{m}")
    return Ansatz(vec.reshape(n, m))


def count_params(a: Ansatz) -> int:
    mat = as_ansatz(a).matrix
    return int(np.count_nonzero((mat >= RX) & (mat <= RZ)))


def param_positions(a: Ansatz) -> list[tuple[int, int]]:
    """(row, col) of every parametric cell in angle-vector order."""
    mat = as_ansatz(a).matrix
    return [(i, j) for j in range(mat.shape[1]) for i in range(mat.shape[0]) if RX <= mat[i, j] <= RZ]


def pad_depth(a: Ansatz, m: int) -> Ansatz:
    """Append all-I columns up to depth ``m``."""
    a = as_ansatz(a)
    if a.m > m:
        raise InvalidAnsatz(f"ansatz depth {a.m} exceeds target depth {m}")
    if a.m == m:
        return a
    return Ansatz(np.hstack([a.matrix, np.zeros((a.n, m - a.m), dtype=np.int64)]))


# --------------------------------------------------------------------------
# simplification
# --------------------------------------------------------------------------


def _barrier_columns(mat: np.ndarray) -> np.ndarray:
    """Boolean ``n x m``: True where a CNOT touches qubit i in column j."""
    n, m = mat.shape
    touched = mat >= CNOT_BASE
    for i in range(n):
        for j in range(m):
            c = mat[i, j]
            if c >= CNOT_BASE:
                touched[cnot_target(i, int(c), n), j] = True
    return touched


def _simplify(mat: np.ndarray, angles: np.ndarray | None):
    """Stack reduction of each row's gate sequence.

    A CNOT touching the row (as control or target) in some column isolates
    that column: nothing on either side merges across it, and the row's own
    gate in that column merges with nothing.
    """
    mat = mat.copy()
    angles = None if angles is None else angles.copy()
    barrier = _barrier_columns(mat)
    n, m = mat.shape
    for i in range(n):
        stack: list[int] = []  # columns of surviving gates in the current segment
        for j in range(m):
            c = mat[i, j]
            if barrier[i, j]:
                stack = []
                continue
            if c == I:
                continue
            top = stack[-1] if stack else None
            if top is not None and c == H and mat[i, top] == H:
                mat[i, top] = I
                mat[i, j] = I
                stack.pop()
            elif top is not None and c in PARAMETRIC_CODES and mat[i, top] == c:
                if angles is not None:
                    angles[i, top] = (angles[i, top] + angles[i, j]) % TWO_PI
                    angles[i, j] = 0.0
                mat[i, j] = I
            else:
                stack.append(j)
    return mat, angles


def postprocess(a: Ansatz) -> Ansatz:
    """Cancel H-H pairs and merge repeated same-axis rotations on each qubit.

    Gates count as consecutive when only I cells lie between them on the
    row. The reduction cascades (``Rx H H Rx`` collapses to one ``Rx``) and the
    result is a fixpoint.
    """
    a = as_ansatz(a)
    mat, _ = _simplify(a.matrix, None)
    return Ansatz(mat)


def postprocess_with_params(a: Ansatz, theta: Sequence[float]) -> tuple[Ansatz, np.ndarray]:
    """Simplify ``a`` and carry an angle vector along (merged angles summed mod 2pi).

    The returned circuit/angles prepare the same state as the input up to a
    global phase.
    """
    a = as_ansatz(a)
    theta = np.asarray(theta, dtype=float)
    pos = param_positions(a)
    if theta.size != len(pos):
        raise ValueError(f"expected {len(pos)} angles, got {theta.size}")
    grid = np.zeros(a.matrix.shape)
    for (i, j), t in zip(pos, theta):
        grid[i, j] = t
    mat, grid = _simplify(a.matrix, grid)
    out = Ansatz(mat)
    return out, np.array([grid[i, j] for i, j in param_positions(out)])


# --------------------------------------------------------------------------
# JSON
# --------------------------------------------------------------------------


def ansatz_to_dict(a: Ansatz, params: Iterable[float] | None = None) -> dict:
    a = as_ansatz(a)
    out = {"n": a.n, "m": a.m, "matrix": a.matrix.tolist()}
    if params is not None:
        out["params"] = [float(x) for x in params]
    return out


def ansatz_from_dict(obj: dict) -> tuple[Ansatz, np.ndarray | None]:
    try:
        a = Ansatz(np.asarray(obj["matrix"], dtype=np.int64))
    except (KeyError, TypeError) as exc:
        raise InvalidAnsatz(f"malformed ansatz object: {exc}") from exc
    if "n" in obj and obj["n"] != a.n or "m" in obj and obj["m"] != a.m:
        raise InvalidAnsatz(f"declared shape ({obj.get('n')}, {obj.get('m')}) != matrix shape {a.matrix.shape}")
    params = obj.get("params")
    if params is not None:
        params = np.asarray(params, dtype=float)
        if params.size != count_params(a):
            raise InvalidAnsatz(f"ansatz has {count_params(a)} parameters but {params.size} were given")
    return a, params
