"""Compare the numba and numpy simulator kernels.

Times one energy evaluation (statevector + Pauli-sum expectation) of
random ansatzes for each backend, after a warm-up call so JIT compilation is
excluded. Results are printed as a table and optionally written as JSON.

    python3 benchmarks/bench_kernels.py --qubits 2 4 8 --depth 60
"""

import argparse
import json
import time

import numpy as np

from qaseda import kernels
from qaseda.circuits import Ansatz, count_params, n_codes
from qaseda.hamiltonians import build_hamiltonian


def time_call(fn, args, repeats):
    fn(*args)  # warm-up / compile
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--qubits", type=int, nargs="+", default=[2, 4, 6, 8, 10])
    p.add_argument("--depth", type=int, default=60)
    p.add_argument("--repeats", type=int, default=200)
    p.add_argument("--kind", default="H1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", help="write results here")
    args = p.parse_args()

    if not kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    rows = []
    print(f"{'n':>3} {'params':>6} {'numba us':>10} {'numpy us':>10} {'speedup':>8} {'max |dE|':>10}")
    for n in args.qubits:
        a = Ansatz(rng.integers(0, n_codes(n), (n, args.depth)))
        theta = rng.uniform(0, 2 * np.pi, count_params(a))
        h = build_hamiltonian(args.kind, n)
        call = (n, *a.program, theta, *h.compiled)
        t_nb = time_call(kernels._nb_energy, call, args.repeats)
        t_np = time_call(kernels._np_energy, call, max(1, args.repeats // 10))
        diff = abs(kernels._nb_energy(*call) - kernels._np_energy(*call))
        rows.append({"n": n, "params": count_params(a), "numba_s": t_nb, "numpy_s": t_np, "abs_diff": diff})
        print(f"{n:>3} {count_params(a):>6} {t_nb * 1e6:>10.1f} {t_np * 1e6:>10.1f} {t_np / t_nb:>8.1f} {diff:>10.1e}")

    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"depth": args.depth, "kind": args.kind, "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
