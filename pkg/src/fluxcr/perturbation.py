"""Perturbative estimates used as independent checks on exact diagonalization."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .circuits import EigenQubit, transition_frequency
from .composite import GHZ_TO_HZ, CouplingSpec, assemble_hamiltonian, bare_labels

CHARGE_FLOOR = 0.01
MAX_TERMS = 12
RESONANCE_GHZ = 0.01


class ResonanceError(ValueError):
    """A perturbative denominator is too small to trust."""


@dataclass
class PTReport:
    quantity: str
    perturbative: float
    exact: float
    bound: float = 0.15

    @property
    def deviation(self) -> float:
        if self.exact == 0:
            return abs(self.perturbative)
        return abs(self.perturbative - self.exact) / abs(self.exact)

    @property
    def flagged(self) -> bool:
        return not np.isfinite(self.deviation) or self.deviation > self.bound


def effective_cr_rates(omega_A: float, omega_B: float, J: float, Omega_d: float) -> Dict[str, float]:
    """ZX, ZZ and IX rates of the two-level cross-resonance model."""
    delta = omega_A - omega_B
    if delta == 0:
        raise ZeroDivisionError("qubits are degenerate")
    return {"zx": J * Omega_d / delta, "zz": J ** 2 / delta, "ix": Omega_d ** 2 / (4 * delta)}


# ------------------------------------------------------------ matrix elements

def pt_matrix_elements(eqF: EigenQubit, eqT: EigenQubit, J: float,
                       min_gap: float = RESONANCE_GHZ) -> Dict[str, float]:
    """First-order cross-qubit charge elements of a fluxonium-transmon pair.

    Keys name dressed ``<ab|n_x|cd>`` in ``|F, T>`` order: the fluxonium charge
    driving a transmon flip (``nF``) and the transmon charge driving a
    fluxonium flip (``nT``), conditioned on the other qubit.  Bare charge
    elements enter by magnitude and frequencies in GHz, so signs follow a
    convention with positive bare ``0-1`` elements.
    """
    nF = np.abs(eqF.n_elems)
    nT = np.abs(eqT.n_elems)
    f = lambda q, i, j: transition_frequency(q, i, j)
    fT01, fT12 = f(eqT, 0, 1), f(eqT, 1, 2)
    fF01, fF03, fF12 = f(eqF, 0, 1), f(eqF, 0, 3), f(eqF, 1, 2)

    def frac(n, w, w_other):
        if abs(w - w_other) < min_gap:
            raise ResonanceError(f"near-resonant denominator {w:.4f} vs {w_other:.4f} GHz")
        return n ** 2 * w / (w ** 2 - w_other ** 2)

    return {
        "00|nF|01": -2 * J * nT[0, 1] * (frac(nF[0, 1], fF01, fT01) + frac(nF[0, 3], fF03, fT01)),
        "10|nF|11": 2 * J * nT[0, 1] * (frac(nF[0, 1], fF01, fT01) - frac(nF[1, 2], fF12, fT01)),
        "00|nT|10": -2 * J * nF[0, 1] * frac(nT[0, 1], fT01, fF01),
        "01|nT|11": 2 * J * nF[0, 1] * (frac(nT[0, 1], fT01, fF01) - frac(nT[1, 2], fT12, fF01)),
    }


def pt_darkening_ratio(eqF: EigenQubit, eqT: EigenQubit, J: float) -> float:
    """Darkening ratio with the transmon's own charge element taken at zeroth order."""
    m = pt_matrix_elements(eqF, eqT, J)
    return float(-m["00|nF|01"] / abs(eqT.n_elems[0, 1]))


# ---------------------------------------------------------- second-order energies

@dataclass
class SecondOrderLevel:
    label: Tuple[int, ...]
    bare: float
    correction: float
    terms: List[Tuple[Tuple[int, ...], float]]
    resonances: List[Tuple[int, ...]]
    top4: float

    @property
    def energy(self) -> float:
        return self.bare + self.correction


def pt_energies_second_order(qubits: Sequence[EigenQubit], J: float,
                             levels: Optional[Sequence[Tuple[int, ...]]] = None,
                             truncation: Optional[Sequence[int]] = None,
                             max_terms: int = MAX_TERMS, floor: float = CHARGE_FLOOR,
                             resonance: float = RESONANCE_GHZ) -> Dict[Tuple[int, ...], SecondOrderLevel]:
    """Second-order shifts of bare product levels from ``J n_F n_T`` couplings.

    ``qubits`` follow the composite order: ``(F, T)`` for two qubits and
    ``(T, F1, F2)`` for three, with equal couplings ``J`` and no direct
    fluxonium coupling.  Pathways whose bare charge elements fall below
    ``floor`` are dropped, the ``max_terms`` largest remaining terms are kept,
    and intermediates within ``resonance`` GHz are reported instead of summed.
    """
    n = len(qubits)
    if n == 2:
        t_pos, f_pos = 1, [0]
    elif n == 3:
        t_pos, f_pos = 0, [1, 2]
    else:
        raise ValueError("two or three qubits required")
    if truncation is None:
        truncation = [min(6, q.levels) for q in qubits]
    E = [q.energies[:t] for q, t in zip(qubits, truncation)]
    N = [np.abs(q.n_elems[:t, :t]) for q, t in zip(qubits, truncation)]
    if levels is None:
        levels = bare_labels([2] * n)
    out = {}
    for lab in levels:
        e0 = sum(E[k][lab[k]] for k in range(n))
        terms, res = [], []
        for fp in f_pos:
            for q in range(truncation[t_pos]):
                nt = N[t_pos][q, lab[t_pos]]
                if nt < floor:
                    continue
                for p in range(truncation[fp]):
                    nf = N[fp][p, lab[fp]]
                    if nf < floor:
                        continue
                    mid = list(lab)
                    mid[t_pos], mid[fp] = q, p
                    mid = tuple(mid)
                    den = e0 - sum(E[k][mid[k]] for k in range(n))
                    if abs(den) < resonance:
                        res.append(mid)
                        continue
                    terms.append((mid, (nt * nf) ** 2 / den))
        terms.sort(key=lambda t: -abs(t[1]))
        kept = terms[:max_terms]
        corr = J ** 2 * sum(v for _, v in kept)
        top4 = J ** 2 * sum(v for _, v in kept[:4])
        out[tuple(lab)] = SecondOrderLevel(tuple(lab), float(e0), float(corr),
                                           [(m, J ** 2 * v) for m, v in kept], res, float(top4))
    return out


# -------------------------------------------------------------- full RS series

def rs_energies(H0: np.ndarray, V: np.ndarray, index: int, order: int = 4) -> List[float]:
    """Rayleigh-Schrodinger corrections ``[E0, E1, ..., E_order]`` for one state.

    ``H0`` is diagonal (vector or matrix) and ``V`` Hermitian.  Uses the
    state-vector recursion, valid up to any order for a non-degenerate level.
    """
    e = np.diag(H0).real if np.ndim(H0) == 2 else np.asarray(H0, dtype=float)
    V = np.asarray(V)
    gap = e[index] - e
    gap[index] = np.inf
    if np.min(np.abs(gap)) < 1e-12:
        raise ResonanceError("degenerate unperturbed level")
    R = 1.0 / gap
    R[index] = 0.0
    psi = [np.zeros(len(e), complex)]
    psi[0][index] = 1.0
    E = [e[index]]
    for k in range(1, order + 1):
        Ek = (V @ psi[k - 1])[index]
        E.append(Ek.real)
        # |k> = R (V|k-1> - sum_{j=1}^{k} E_j |k-j>)
        rhs = V @ psi[k - 1]
        for j in range(1, k + 1):
            rhs = rhs - E[j] * psi[k - j]
        psi.append(R * rhs)
    return [float(x) for x in E]


def zz_ff_perturbative(qubits: Sequence[EigenQubit], coupling: CouplingSpec, transmon_level: int = 0,
                       truncation: Optional[Sequence[int]] = None, order: int = 4) -> float:
    """Fluxonium-fluxonium ZZ (Hz) from the Rayleigh-Schrodinger series.

    The second-order part cancels exactly, so the leading contribution comes
    from fourth order, through virtual transmon excitations.
    """
    if truncation is None:
        truncation = [6, 6, 6]
    H, _ = assemble_hamiltonian(qubits, coupling, truncation)
    H0 = np.diag(H).real
    V = H - np.diag(H0)
    labels = bare_labels(truncation)
    idx = {lab: k for k, lab in enumerate(labels)}
    i = transmon_level
    tot = 0.0
    for lab, sgn in (((i, 1, 1), 1), ((i, 0, 0), 1), ((i, 1, 0), -1), ((i, 0, 1), -1)):
        tot += sgn * sum(rs_energies(H0, V, idx[lab], order))
    return tot * GHZ_TO_HZ


def zz_ft_second_order(levels: Dict[Tuple[int, ...], SecondOrderLevel], three_qubit: bool = True,
                       spectator: int = 0) -> float:
    """Fluxonium-transmon ZZ (Hz) from second-order energies."""
    if three_qubit:
        e = lambda t, a: levels[(t, a, spectator)].energy
    else:
        e = lambda t, a: levels[(a, t)].energy
    return (e(1, 1) + e(0, 0) - e(0, 1) - e(1, 0)) * GHZ_TO_HZ
