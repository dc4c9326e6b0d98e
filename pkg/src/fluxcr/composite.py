"""Coupled fluxonium-transmon Hamiltonians, dressed-state labeling and ZZ rates.

Tensor order is ``(F1, T)`` for the two-qubit FT system and ``(T, F1, F2)``
for the three-qubit FTF system, matching the state labels ``|ij>`` and
``|ijk>`` used throughout the package.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .circuits import EigenQubit, fix_phases

MAX_DIM = 4096
GHZ_TO_HZ = 1e9
DEFAULT_TRUNCATION = 6


class LabelingAmbiguityError(RuntimeError):
    """Two dressed states overlap a bare state almost equally (a resonance)."""


@dataclass(frozen=True)
class CouplingSpec:
    """Capacitive couplings in GHz: F1-T, F2-T and F1-F2."""

    J1: float = 0.022
    J2: float = 0.022
    I: float = 0.0

    def __post_init__(self):
        for v in (self.J1, self.J2, self.I):
            if not np.isfinite(v):
                raise ValueError("couplings must be finite")


@dataclass
class DressedSystem:
    """Labeled eigenstates of a coupled system.

    ``n_ops`` maps ``"T"``, ``"F1"`` (and ``"F2"``) to charge operators in the
    dressed basis; rows and columns follow ``labels``.
    """

    labels: List[Tuple[int, ...]]
    energies: np.ndarray
    n_ops: Dict[str, np.ndarray]
    overlap_quality: np.ndarray
    order: Tuple[str, ...]
    vectors: np.ndarray = field(repr=False, default=None)
    bare_energies: np.ndarray = field(repr=False, default=None)
    _index: Dict[Tuple[int, ...], int] = field(init=False, repr=False)

    def __post_init__(self):
        self._index = {lab: k for k, lab in enumerate(self.labels)}

    @property
    def three_qubit(self) -> bool:
        return len(self.order) == 3

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self._index[tuple(label)]
        except KeyError:
            raise KeyError(f"no dressed state labeled {tuple(label)}") from None

    def energy(self, label) -> float:
        return float(self.energies[self.index(label)])

    def comp_labels(self) -> List[Tuple[int, ...]]:
        return list(itertools.product((0, 1), repeat=len(self.order)))

    def comp_indices(self) -> np.ndarray:
        return np.array([self.index(lab) for lab in self.comp_labels()])


def _embed(ops: Sequence[np.ndarray], pos: int, op: np.ndarray) -> np.ndarray:
    mats = [np.eye(len(o)) for o in ops]
    mats[pos] = op
    return reduce(np.kron, mats)


def _order_for(n_qubits: int) -> Tuple[str, ...]:
    if n_qubits == 2:
        return ("F1", "T")
    if n_qubits == 3:
        return ("T", "F1", "F2")
    raise ValueError("only FT (2 qubits) and FTF (3 qubits) systems are supported")


def assemble_hamiltonian(qubits: Sequence[EigenQubit], coupling: CouplingSpec,
                         truncation: Optional[Sequence[int]] = None):
    """Coupled Hamiltonian in the bare product basis.

    ``qubits`` are given in tensor order: ``(F1, T)`` or ``(T, F1, F2)``.
    Returns ``(H, n_ops)`` where ``n_ops`` holds the embedded charge operators.
    """
    order = _order_for(len(qubits))
    if truncation is None:
        truncation = [DEFAULT_TRUNCATION] * len(qubits)
    if len(truncation) != len(qubits):
        raise ValueError("one truncation per qubit required")
    for q, t in zip(qubits, truncation):
        if not 0 < t <= q.levels:
            raise ValueError(f"truncation {t} exceeds the {q.levels} retained levels")
    dim = int(np.prod(truncation))
    if dim > MAX_DIM:
        raise ValueError(f"composite dimension {dim} exceeds {MAX_DIM}")

    diag = [np.diag(q.energies[:t]).astype(complex) for q, t in zip(qubits, truncation)]
    ns = [q.n_elems[:t, :t] for q, t in zip(qubits, truncation)]
    H = sum(_embed(diag, k, diag[k]) for k in range(len(qubits)))
    n_ops = {name: _embed(diag, k, ns[k]) for k, name in enumerate(order)}
    H = H + coupling.J1 * n_ops["T"] @ n_ops["F1"]
    if "F2" in n_ops:
        H = H + coupling.J2 * n_ops["T"] @ n_ops["F2"] + coupling.I * n_ops["F1"] @ n_ops["F2"]
    return H, n_ops


def bare_labels(truncation: Sequence[int]) -> List[Tuple[int, ...]]:
    return list(itertools.product(*[range(t) for t in truncation]))


def dress(H: np.ndarray, labels: Sequence[Tuple[int, ...]],
          n_ops: Optional[Dict[str, np.ndarray]] = None,
          order: Optional[Tuple[str, ...]] = None,
          ambiguity_tol: float = 1e-6) -> DressedSystem:
    """Diagonalize ``H`` and label each eigenstate by its largest bare overlap.

    Assignment is greedy in descending squared overlap with each bare label and
    each eigenstate used once.  Raises :class:`LabelingAmbiguityError` when the
    winning overlap beats the runner-up for the same bare state by less than
    ``ambiguity_tol``.
    """
    if not np.allclose(H, H.conj().T, atol=1e-12 * max(1.0, np.abs(H).max())):
        raise ValueError("H must be Hermitian")
    vals, vecs = np.linalg.eigh(H)
    ov = np.abs(vecs) ** 2  # ov[bare, dressed]
    n = len(vals)
    flat = np.argsort(ov, axis=None)[::-1]
    bare_taken = np.zeros(n, bool)
    dressed_taken = np.zeros(n, bool)
    assign = np.empty(n, int)  # dressed index for each bare index
    remaining = n
    for f in flat:
        b, d = divmod(int(f), n)
        if bare_taken[b] or dressed_taken[d]:
            continue
        row = np.where(dressed_taken, -1.0, ov[b])
        row[d] = -1.0
        runner = row.max()
        if ov[b, d] - runner < ambiguity_tol and ov[b, d] > ambiguity_tol:
            raise LabelingAmbiguityError(
                f"bare state {labels[b]} overlaps two eigenstates within {ambiguity_tol:g}")
        assign[b] = d
        bare_taken[b] = dressed_taken[d] = True
        remaining -= 1
        if remaining == 0:
            break
    vecs = vecs[:, assign]
    energies = vals[assign]
    quality = ov[np.arange(n), assign]
    # dominant bare component (the label itself) real positive
    lead = vecs[np.arange(n), np.arange(n)]
    vecs = vecs * (np.abs(lead) / np.where(lead == 0, 1, lead))
    ground = labels.index(tuple([0] * len(labels[0])))
    energies = energies - energies[ground]
    if order is None:
        order = _order_for(len(labels[0]))
    dn = {}
    if n_ops is not None:
        dn = {k: vecs.conj().T @ op @ vecs for k, op in n_ops.items()}
    return DressedSystem(list(map(tuple, labels)), energies, dn, quality, order,
                         vecs, np.real(np.diag(H)) - np.real(H[ground, ground]))


def build_system(qubits: Sequence[EigenQubit], coupling: CouplingSpec,
                 truncation: Optional[Sequence[int]] = None) -> DressedSystem:
    """Assemble and dress in one call."""
    if truncation is None:
        truncation = [DEFAULT_TRUNCATION] * len(qubits)
    H, n_ops = assemble_hamiltonian(qubits, coupling, truncation)
    return dress(H, bare_labels(truncation), n_ops, _order_for(len(qubits)))


def zz_ff(ds: DressedSystem, transmon_level: int) -> float:
    """Fluxonium-fluxonium ZZ rate in Hz with the transmon in ``transmon_level``."""
    if not ds.three_qubit:
        raise ValueError("zz_ff needs the three-qubit system")
    i = transmon_level
    e = ds.energy
    return (e((i, 1, 1)) + e((i, 0, 0)) - e((i, 1, 0)) - e((i, 0, 1))) * GHZ_TO_HZ


def zz_ft(ds: DressedSystem, alpha: int = 1, spectator_level: Optional[int] = None) -> float:
    """Fluxonium ``alpha``-transmon ZZ rate in Hz.

    For the FTF system the spectator fluxonium is held in ``spectator_level``.
    """
    if not ds.three_qubit:
        e = lambda t, f: ds.energy((f, t))
        return (e(1, 1) + e(0, 0) - e(0, 1) - e(1, 0)) * GHZ_TO_HZ
    k = 0 if spectator_level is None else spectator_level
    e = lambda t, a: ds.energy(ftf_label(t, a, k, alpha))
    return (e(1, 1) + e(0, 0) - e(0, 1) - e(1, 0)) * GHZ_TO_HZ


def ftf_label(t: int, a: int, b: int, alpha: int = 1) -> Tuple[int, int, int]:
    """Map ``|T, F_alpha, F_beta>`` to the stored ``(T, F1, F2)`` label."""
    return (t, a, b) if alpha == 1 else (t, b, a)


def transmon_frequency(ds: DressedSystem, f1: int = 0, f2: int = 0) -> float:
    """Dressed transmon 0-1 frequency (GHz) with the fluxoniums held fixed."""
    if ds.three_qubit:
        return ds.energy((1, f1, f2)) - ds.energy((0, f1, f2))
    return ds.energy((f1, 1)) - ds.energy((f1, 0))
