"""Command-line entry point.

Exit codes: 0 ok, 2 configuration error, 3 runtime error. Errors are
printed to stderr as ``{"code": ..., "message": ...}``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from qaseda import quantumsim as qs
from qaseda.circuits import InvalidAnsatz, ansatz_from_dict, ansatz_to_dict, count_params
from qaseda.hamiltonians import build_hamiltonian, exact_ground_energy
from qaseda.optimize import OptBudget, minimize_energy
from qaseda.search import RunState, pareto_front, run_search
from qaseda.trainability import WalkConfig, information_content
from qaseda.workbench.analysis import gate_stats, surrogate_benchmark
from qaseda.workbench.config import OUTPUT_ENV, ConfigError, load_run_config, run_config_from_dict

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("qaseda")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_text(path, text: str) -> None:
    """Write via a temporary file so a crash never leaves a torn artifact."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def emit(obj, out: str | None) -> None:
    text = dumps(obj)
    if out:
        write_text(out, text)
    sys.stdout.write(text)


def _load_ansatz(path):
    try:
        with open(path) as fh:
            return ansatz_from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read ansatz {path}: {exc}") from exc
    except InvalidAnsatz as exc:
        raise ConfigError(str(exc)) from exc


def _hamiltonian(kind, n):
    try:
        return build_hamiltonian(kind, n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_run(args) -> int:
    if args.config is None and args.resume is None:
        raise ConfigError("run needs --config or --resume")
    state = None
    if args.resume:
        try:
            with open(args.resume) as fh:
                state = RunState.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"cannot read checkpoint {args.resume}: {exc}") from exc
        if args.config:
            with open(args.config) as fh:
                raw = json.load(fh)
        else:
            with open(Path(args.resume).with_name("config.json")) as fh:
                raw = json.load(fh)
        rc = run_config_from_dict(raw)
        out_dir = os.environ.get(OUTPUT_ENV) or str(Path(args.resume).parent)
        cfg, h = state.cfg, state.h
    else:
        rc = load_run_config(args.config)
        if args.seed is not None:
            rc = rc.with_seed(args.seed)
        out_dir = rc.resolved_output_dir()
        cfg, h = rc.search, rc.build_hamiltonian()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_text(out / "config.json", dumps(rc.to_dict() | cfg.to_dict()))

    def checkpoint(st: RunState, record: dict) -> None:
        write_text(out / "checkpoint.json", json.dumps(st.to_dict(), sort_keys=True) + "\n")
        write_text(out / "iterations.jsonl", "".join(json.dumps(r, sort_keys=True) + "\n" for r in st.records))

    rec = run_search(cfg, h, resume=state, stop_after=args.stop_after, on_iteration=checkpoint)
    checkpoint(rec.state, {})
    population = [ansatz_to_dict(ind.ansatz) for ind in rec.state.population]
    write_text(out / "population.json", dumps(population))
    if rec.summary:
        write_text(out / "summary.json", rec.summary_json())
        sys.stdout.write(rec.summary_json())
    else:
        sys.stdout.write(dumps({"status": "interrupted", "iteration": rec.state.iteration, "checkpoint": str(out / "checkpoint.json")}))
    return EXIT_OK


def cmd_ground(args) -> int:
    h = _hamiltonian(args.kind, args.qubits)
    e, vec = exact_ground_energy(h)
    obj = {"hamiltonian": args.kind.upper(), "n": args.qubits, "energy": e}
    if args.state:
        obj["state"] = qs.state_to_json(vec)
    emit(obj, args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    a, params = _load_ansatz(args.ansatz)
    h = _hamiltonian(args.kind, args.qubits)
    if a.n != h.n:
        raise ConfigError(f"ansatz has {a.n} qubits, --qubits is {h.n}")
    sm = qs.ShotModel(args.shots, args.seed)
    obj = {"n_params": count_params(a), "shots": args.shots}
    if args.optimize:
        res = minimize_energy(a, h, sm, OptBudget(max_evals=args.max_evals, seed=args.seed, restarts=args.restarts))
        params = res.best_params
        obj["evals_used"] = res.evals_used
    elif params is None:
        params = np.zeros(count_params(a))
    state = qs.prepare_state(a, params)
    obj["params"] = [float(x) for x in params]
    obj["exact_energy"] = qs.expectation(state, h)
    obj["energy"] = obj["exact_energy"] if sm.exact else qs.expectation_noisy(state, h, sm)
    emit(obj, args.out)
    return EXIT_OK


def cmd_ic(args) -> int:
    a, _ = _load_ansatz(args.ansatz)
    h = _hamiltonian(args.kind, args.qubits)
    if a.n != h.n:
        raise ConfigError(f"ansatz has {a.n} qubits, --qubits is {h.n}")
    try:
        wc = WalkConfig(steps=args.steps, step_scale=args.step_scale, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    res = information_content(a, h, wc, qs.ShotModel(args.shots, args.seed))
    emit(res.to_dict(), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    budget = OptBudget(max_evals=args.max_evals)
    table = surrogate_benchmark(
        args.qubits, args.depth, args.count, args.kind, args.seed, args.folds, budget, args.eps, args.shuffle
    )
    if table is None:
        raise ConfigError("benchmark aborted: too few circuits for cross-validation")
    emit(table, args.out)
    return EXIT_OK


def _front_rows(summary: dict) -> list[dict]:
    pts = [(p["score"], p["ic"]) for p in summary["pareto"]]
    keep = {tuple(q) for q in pareto_front(pts)}
    return [p for p in summary["pareto"] if (p["score"], p["ic"]) in keep]


def cmd_analyze(args) -> int:
    run = Path(args.run)
    try:
        summary = json.loads((run / "summary.json").read_text())
        records = [json.loads(line) for line in (run / "iterations.jsonl").read_text().splitlines() if line]
        population = json.loads((run / "population.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read run directory {run}: {exc}") from exc
    out = Path(args.out or run)
    out.mkdir(parents=True, exist_ok=True)

    rows = _front_rows(summary)
    with open(out / "pareto.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["score", "ic", "energy", "g", "matrix"])
        for p in rows:
            w.writerow([p["score"], repr(p["ic"]), repr(p["energy"]), repr(p["g"]), json.dumps(p["matrix"])])

    cols = ["iter", "elite_g", "best_g", "elite_score", "elite_ic", "elite_energy", "mean_ic", "mean_score", "n_true_opts", "archive_size"]
    with open(out / "convergence.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in records:
            w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])

    pop = [ansatz_from_dict(d)[0] for d in population]
    front = [ansatz_from_dict({"matrix": p["matrix"]})[0] for p in rows]
    stats = {"final_population": gate_stats(pop), "pareto_front": gate_stats(front)}
    write_text(out / "gate_stats.json", dumps(stats))
    sys.stdout.write(dumps({"pareto_rows": len(rows), "iterations": len(records), "out": str(out)}))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qaseda", description="Surrogate-assisted EDA architecture search for VQE ansatzes")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run (or resume) a search")
    r.add_argument("--config")
    r.add_argument("--seed", type=int)
    r.add_argument("--resume", help="checkpoint.json of an interrupted run")
    r.add_argument("--stop-after", type=int, help="stop after this many iterations (leaves a checkpoint)")
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("ground", help="exact ground energy")
    g.add_argument("--kind", required=True)
    g.add_argument("--qubits", type=int, required=True)
    g.add_argument("--state", action="store_true", help="include the ground state vector")
    g.add_argument("--out")
    g.set_defaults(func=cmd_ground)

    e = sub.add_parser("eval", help="energy of an ansatz file")
    e.add_argument("--ansatz", required=True)
    e.add_argument("--kind", required=True)
    e.add_argument("--qubits", type=int, required=True)
    e.add_argument("--shots", type=int, default=0)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--optimize", action="store_true")
    e.add_argument("--max-evals", type=int)
    e.add_argument("--restarts", type=int, default=1)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    i = sub.add_parser("ic", help="information-content trainability of an ansatz file")
    i.add_argument("--ansatz", required=True)
    i.add_argument("--kind", required=True)
    i.add_argument("--qubits", type=int, required=True)
    i.add_argument("--steps", type=int)
    i.add_argument("--step-scale", type=float, default=0.05)
    i.add_argument("--shots", type=int, default=0)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--out")
    i.set_defaults(func=cmd_ic)

    b = sub.add_parser("bench-surrogate", help="cross-validated comparator accuracy")
    b.add_argument("--qubits", type=int, required=True)
    b.add_argument("--depth", type=int, default=60)
    b.add_argument("--count", type=int, help="default: 37.5 * qubits, rounded")
    b.add_argument("--kind", default="H1")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--folds", type=int, default=15)
    b.add_argument("--max-evals", type=int, help="per-circuit optimizer budget")
    b.add_argument("--eps", type=float, help="comparison tolerance (default 1e-3 * spectral span)")
    b.add_argument("--shuffle", action="store_true", help="permute labels (sanity baseline)")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    a = sub.add_parser("analyze", help="plot-ready CSV/JSON from a run directory")
    a.add_argument("--run", required=True)
    a.add_argument("--out", help="output directory (default: the run directory)")
    a.set_defaults(func=cmd_analyze)
    return p


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"code": code, "message": str(exc) or type(exc).__name__}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvalidAnsatz) as exc:
        return _fail(EXIT_CONFIG, exc)
    except Exception as exc:  # noqa: BLE001 - top-level boundary
        log.debug("runtime failure", exc_info=True)
        return _fail(EXIT_RUNTIME, exc)


if __name__ == "__main__":
    sys.exit(main())
