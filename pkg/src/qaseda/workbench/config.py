"""Run configuration: one flat JSON object.

Every key of :class:`~qaseda.search.SearchConfig` is accepted at top level,
plus:

* ``hamiltonian``: a kind (``"H1"`` .. ``"H4"``) built at ``n`` qubits
* ``hamiltonian_file``: path to a Pauli-sum JSON file (overrides ``hamiltonian``)
* ``output_dir``: where artifacts go (default ``"runs/<hamiltonian>_n<n>_s<seed>"``)

``QASEDA_OUTPUT_DIR`` in the environment overrides ``output_dir``; nothing
else is read from the environment.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass

from qaseda.hamiltonians import PauliSum, build_hamiltonian, load_hamiltonian
from qaseda.search import SearchConfig

OUTPUT_ENV = "QASEDA_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


_SEARCH_FIELDS = {f.name for f in dataclasses.fields(SearchConfig)}


@dataclass(frozen=True)
class RunConfig:
    search: SearchConfig
    hamiltonian: str = "H1"
    hamiltonian_file: str | None = None
    output_dir: str | None = None

    def build_hamiltonian(self) -> PauliSum:
        if self.hamiltonian_file:
            h = load_hamiltonian(self.hamiltonian_file)
            if h.n != self.search.n:
                raise ConfigError(f"Hamiltonian file has {h.n} qubits, config n={self.search.n}")
            return h
        return build_hamiltonian(self.hamiltonian, self.search.n)

    def resolved_output_dir(self) -> str:
        env = os.environ.get(OUTPUT_ENV)
        if env:
            return env
        if self.output_dir:
            return self.output_dir
        return os.path.join("runs", f"{self.hamiltonian}_n{self.search.n}_s{self.search.seed}")

    def with_seed(self, seed: int) -> "RunConfig":
        return dataclasses.replace(self, search=dataclasses.replace(self.search, seed=seed))

    def to_dict(self) -> dict:
        d = self.search.to_dict()
        d.update(hamiltonian=self.hamiltonian, hamiltonian_file=self.hamiltonian_file, output_dir=self.output_dir)
        return d


def run_config_from_dict(d: dict) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    extra = {"hamiltonian", "hamiltonian_file", "output_dir"}
    unknown = sorted(set(d) - _SEARCH_FIELDS - extra)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    kw = {k: v for k, v in d.items() if k in _SEARCH_FIELDS}
    if kw.get("reference") is not None:
        kw["reference"] = tuple(kw["reference"])
    if "disabled_codes" in kw:
        kw["disabled_codes"] = tuple(kw["disabled_codes"])
    try:
        search = SearchConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    kind = str(d.get("hamiltonian", "H1")).upper()
    cfg = RunConfig(search, kind, d.get("hamiltonian_file"), d.get("output_dir"))
    try:
        cfg.build_hamiltonian()
    except (ValueError, OSError, KeyError) as exc:
        raise ConfigError(f"bad Hamiltonian: {exc}") from exc
    return cfg


def load_run_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return run_config_from_dict(d)
