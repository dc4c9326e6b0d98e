"""System configuration files.

A config is a YAML mapping whose numeric keys carry their unit in the name
(``E_J_GHz``, ``J1_MHz``, ``dt_ns``).  Missing keys take the default device
values; unknown keys are rejected with the offending line number.

Example::

    qubits:
      F1: {kind: fluxonium, E_J_GHz: 3.95, E_C_GHz: 1.4, E_L_GHz: 0.9}
      T:  {kind: transmon, E_J_GHz: 18.0, E_C_GHz: 0.25}
      F2: {kind: fluxonium, E_J_GHz: 4.05, E_C_GHz: 1.4, E_L_GHz: 0.9}
    coupling: {J1_MHz: 22, J2_MHz: 22, I_MHz: 0}

Dropping ``F2`` gives the two-qubit fluxonium-transmon system.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import yaml

from .circuits import DEFAULT_BASIS, DEFAULT_KEEP, FLUXONIUM, TRANSMON, QubitSpec, diagonalize_qubit
from .composite import DEFAULT_TRUNCATION, CouplingSpec, DressedSystem, build_system
from .pulses import DEFAULT_DT, HALVING_TOL

QUBIT_NAMES = ("F1", "T", "F2")

DEFAULTS = {
    "qubits": {
        "F1": {"kind": FLUXONIUM, "E_J_GHz": 3.95, "E_C_GHz": 1.4, "E_L_GHz": 0.9, "phi_ext_rad": float(np.pi),
               "basis_size": DEFAULT_BASIS[FLUXONIUM], "keep_levels": DEFAULT_KEEP},
        "T": {"kind": TRANSMON, "E_J_GHz": 18.0, "E_C_GHz": 0.25,
              "basis_size": DEFAULT_BASIS[TRANSMON], "keep_levels": DEFAULT_KEEP},
        "F2": {"kind": FLUXONIUM, "E_J_GHz": 4.05, "E_C_GHz": 1.4, "E_L_GHz": 0.9, "phi_ext_rad": float(np.pi),
               "basis_size": DEFAULT_BASIS[FLUXONIUM], "keep_levels": DEFAULT_KEEP},
    },
    "coupling": {"J1_MHz": 22.0, "J2_MHz": 22.0, "I_MHz": 0.0},
    "truncation": {"F1": DEFAULT_TRUNCATION, "T": DEFAULT_TRUNCATION, "F2": DEFAULT_TRUNCATION},
    "integrator": {"dt_ns": DEFAULT_DT, "e_max_GHz": 35.0, "halving_tol": HALVING_TOL},
    "optimizer": {"budget": 400, "fatol": 1e-7, "t_r_ns": 5.0},
}

_QUBIT_KEYS = {
    FLUXONIUM: {"kind", "E_J_GHz", "E_C_GHz", "E_L_GHz", "phi_ext_rad", "basis_size", "keep_levels"},
    TRANSMON: {"kind", "E_J_GHz", "E_C_GHz", "basis_size", "keep_levels"},
}
_INT_KEYS = {"basis_size", "keep_levels", "budget"}


class ConfigError(ValueError):
    """Invalid configuration; the message carries ``file:line`` when known."""


class _LineLoader(yaml.SafeLoader):
    """Safe loader that remembers the line of every mapping key."""


def _construct_mapping(loader, node, deep=False):
    out = {}
    lines = {}
    for knode, vnode in node.value:
        key = loader.construct_object(knode, deep=deep)
        if key in out:
            raise ConfigError(f"line {knode.start_mark.line + 1}: duplicate key {key!r}")
        out[key] = loader.construct_object(vnode, deep=True)
        lines[key] = knode.start_mark.line + 1
    return _Mapping(out, lines)


class _Mapping(dict):
    def __init__(self, data, lines):
        super().__init__(data)
        self.lines = lines


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


@dataclass
class SystemConfig:
    """Validated configuration tree plus the objects it describes."""

    tree: dict
    source: Optional[str] = None

    @property
    def qubit_names(self) -> List[str]:
        names = [n for n in QUBIT_NAMES if n in self.tree["qubits"]]
        # composite order: (F1, T) or (T, F1, F2)
        return ["T", "F1", "F2"] if len(names) == 3 else ["F1", "T"]

    @property
    def three_qubit(self) -> bool:
        return "F2" in self.tree["qubits"]

    def qubit_spec(self, name: str) -> QubitSpec:
        q = self.tree["qubits"][name]
        return QubitSpec(kind=q["kind"], E_C=q["E_C_GHz"], E_J=q["E_J_GHz"], E_L=q.get("E_L_GHz", 0.0),
                         phi_ext=q.get("phi_ext_rad", np.pi), basis_size=q["basis_size"],
                         keep_levels=q["keep_levels"])

    @property
    def coupling(self) -> CouplingSpec:
        c = self.tree["coupling"]
        if not self.three_qubit:
            return CouplingSpec(c["J1_MHz"] * 1e-3, 0.0, 0.0)
        return CouplingSpec(c["J1_MHz"] * 1e-3, c["J2_MHz"] * 1e-3, c["I_MHz"] * 1e-3)

    @property
    def truncation(self) -> List[int]:
        return [self.tree["truncation"][n] for n in self.qubit_names]

    @property
    def dt(self) -> float:
        return self.tree["integrator"]["dt_ns"]

    @property
    def e_max(self) -> Optional[float]:
        return self.tree["integrator"]["e_max_GHz"]

    @property
    def halving_tol(self) -> float:
        return self.tree["integrator"]["halving_tol"]

    @property
    def optimizer(self) -> dict:
        return self.tree["optimizer"]

    def eigen_qubits(self):
        return [diagonalize_qubit(self.qubit_spec(n)) for n in self.qubit_names]

    def system(self) -> DressedSystem:
        return build_system(self.eigen_qubits(), self.coupling, self.truncation)

    def physics_tree(self) -> dict:
        """The parts of the tree that determine computed numbers."""
        return {k: self.tree[k] for k in ("qubits", "coupling", "truncation", "integrator")}

    def hash(self) -> str:
        return config_hash(self.physics_tree())

    def updated(self, **paths) -> "SystemConfig":
        """Copy with dotted-path overrides, e.g. ``updated(**{"qubits.F1.E_J_GHz": 4.2})``."""
        tree = copy.deepcopy(self.tree)
        for path, value in paths.items():
            node = tree
            keys = path.split(".")
            for k in keys[:-1]:
                node = node[k]
            node[keys[-1]] = value
        return from_dict(tree, self.source)

    def to_yaml(self) -> str:
        return yaml.safe_dump(_plain(self.tree), sort_keys=False)


def config_hash(tree: dict) -> str:
    blob = json.dumps(_plain(tree), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def _where(source, lines, key):
    line = getattr(lines, "lines", {}).get(key) if lines is not None else None
    prefix = source or "<config>"
    return f"{prefix}:{line}" if line else prefix


def _merge(section: str, given, default: dict, allowed: set, source, path: str) -> dict:
    if given is None:
        return dict(default)
    if not isinstance(given, dict):
        raise ConfigError(f"{source or '<config>'}: {path} must be a mapping")
    for k in given:
        if k not in allowed:
            raise ConfigError(f"{_where(source, given, k)}: unknown key {path}.{k}")
    out = dict(default)
    for k, v in given.items():
        if k == "kind":
            out[k] = v
            continue
        if k == "e_max_GHz" and v is None:  # no energy cutoff
            out[k] = None
            continue
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{_where(source, given, k)}: {path}.{k} must be a number")
        if k in _INT_KEYS:
            if v != int(v):
                raise ConfigError(f"{_where(source, given, k)}: {path}.{k} must be an integer")
            v = int(v)
        else:
            v = float(v)
        out[k] = v
    return out


def from_dict(data: Optional[dict], source: Optional[str] = None) -> SystemConfig:
    """Validate a raw mapping and fill defaults."""
    data = {} if data is None else data
    if not isinstance(data, dict):
        raise ConfigError(f"{source or '<config>'}: top level must be a mapping")
    for k in data:
        if k not in DEFAULTS:
            raise ConfigError(f"{_where(source, data, k)}: unknown key {k}")
    tree: Dict = {}
    qubits = data.get("qubits")
    if qubits is None:
        qubits = {n: {} for n in QUBIT_NAMES}
    if not isinstance(qubits, dict):
        raise ConfigError(f"{source or '<config>'}: qubits must be a mapping")
    for k in qubits:
        if k not in QUBIT_NAMES:
            raise ConfigError(f"{_where(source, qubits, k)}: unknown qubit {k}")
    if "T" not in qubits or "F1" not in qubits:
        raise ConfigError(f"{source or '<config>'}: qubits F1 and T are required")
    tree["qubits"] = {}
    for name in QUBIT_NAMES:
        if name not in qubits:
            continue
        q = qubits[name] or {}
        kind = q.get("kind", DEFAULTS["qubits"][name]["kind"]) if isinstance(q, dict) else None
        if kind not in _QUBIT_KEYS:
            raise ConfigError(f"{_where(source, qubits, name)}: qubits.{name}.kind must be fluxonium or transmon")
        default = dict(DEFAULTS["qubits"][name])
        if default["kind"] != kind:
            default = {k: v for k, v in DEFAULTS["qubits"]["T" if kind == TRANSMON else "F1"].items()}
        tree["qubits"][name] = _merge("qubits", q, default, _QUBIT_KEYS[kind], source, f"qubits.{name}")
    for section in ("coupling", "truncation", "integrator", "optimizer"):
        default = DEFAULTS[section]
        allowed = set(default)
        tree[section] = _merge(section, data.get(section), default, allowed, source, section)
    for k, v in tree["truncation"].items():
        tree["truncation"][k] = int(v)
    cfg = SystemConfig(tree, source)
    try:
        for n in cfg.qubit_names:
            spec = cfg.qubit_spec(n)
            if cfg.tree["truncation"][n] > spec.keep_levels:
                raise ValueError(f"truncation.{n} exceeds keep_levels")
        cfg.coupling
        if cfg.dt <= 0 or cfg.halving_tol <= 0:
            raise ValueError("integrator dt_ns and halving_tol must be positive")
        if cfg.optimizer["budget"] < 4:
            raise ValueError("optimizer budget must allow an initial simplex")
    except ValueError as exc:
        raise ConfigError(f"{source or '<config>'}: {exc}") from None
    return cfg


def loads(text: str, source: Optional[str] = None) -> SystemConfig:
    try:
        data = yaml.load(text, Loader=_LineLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        line = f":{mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{source or '<config>'}{line}: {exc.problem}") from None
    return from_dict(data, source)


def load(path: Optional[str] = None) -> SystemConfig:
    """Read a config file; ``None`` gives the default device."""
    if path is None:
        return from_dict(None)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return loads(text, str(path))


def default_config(three_qubit: bool = True) -> SystemConfig:
    if three_qubit:
        return from_dict(None)
    return from_dict({"qubits": {"F1": {}, "T": {}}})
