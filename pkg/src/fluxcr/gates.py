"""Gate metrics on computational propagator blocks.

Blocks are indexed by computational labels in product order.  FT blocks use
``(F, T)`` with index ``2f + t``.  FTF blocks are stored in ``(T, F1, F2)``
order with index ``4t + 2f1 + f2``; for a ``CX_alpha`` gate most routines
first permute to ``(T, F_alpha, F_beta)`` so that the active fluxonium sits in
the middle slot.

Matrix elements are written ``U[out, in]``.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .composite import DressedSystem, ftf_label

SUBUNITARY_SLACK = 1e-9
REFINE_TOL = 1e-12

_FT_MAJORS = [(0, 0), (1, 1), (3, 2), (2, 3)]  # (out, in), dark then bright
_FT_NAMES = ["00", "01", "10", "11"]

# letter -> (out, in) in the (T, F_alpha, F_beta) frame
_MAJOR_3Q = {
    "a": (0, 0), "b": (1, 1), "c": (2, 6), "d": (3, 7),
    "f": (4, 4), "g": (5, 5), "h": (6, 2), "j": (7, 3),
}
_DARK_3Q = "abfg"
_BRIGHT_3Q = "cdhj"

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

_SINGLE_STATES = {
    "0": np.array([1, 0], complex),
    "1": np.array([0, 1], complex),
    "+x": np.array([1, 1], complex) / np.sqrt(2),
    "-x": np.array([1, -1], complex) / np.sqrt(2),
    "+y": np.array([1, 1j], complex) / np.sqrt(2),
    "-y": np.array([1, -1j], complex) / np.sqrt(2),
}


@dataclass
class GateReport:
    comp_block: np.ndarray
    fidelity: float
    error_total: float
    budget: Dict
    phase_angles: List[float]
    raw_phases: Dict[str, float]
    alpha: int = 1
    refined: bool = False
    fallback: bool = False

    def budget_sum(self) -> float:
        return budget_total(self.budget)

    def as_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "error_total": self.error_total,
            "budget": self.budget,
            "phase_angles": list(map(float, self.phase_angles)),
            "raw_phases": self.raw_phases,
            "alpha": self.alpha,
            "refined": self.refined,
            "fallback": self.fallback,
            "comp_block_re": self.comp_block.real.tolist(),
            "comp_block_im": self.comp_block.imag.tolist(),
        }


@dataclass
class ParityReport:
    U_e: np.ndarray
    U_o: np.ndarray
    F_e: float
    F_o: float
    F_8x8: float
    groups: Dict[str, float]
    group_blocks: Dict[str, np.ndarray] = field(repr=False, default_factory=dict)
    U_ff: Optional[np.ndarray] = field(repr=False, default=None)

    def as_dict(self) -> dict:
        return {"F_e": self.F_e, "F_o": self.F_o, "F_8x8": self.F_8x8, "groups": self.groups}


def budget_total(budget: Dict) -> float:
    tot = 0.0
    for v in budget.values():
        tot += budget_total(v) if isinstance(v, dict) else v
    return tot


# ---------------------------------------------------------------- ideal gates

def _perm_alpha(alpha: int) -> np.ndarray:
    """Native ``(T, F1, F2)`` index for each ``(T, F_alpha, F_beta)`` index."""
    if alpha == 1:
        return np.arange(8)
    return np.array([4 * t + 2 * b + a for t, a, b in itertools.product((0, 1), repeat=3)])


def to_alpha_frame(U: np.ndarray, alpha: int) -> np.ndarray:
    """Reorder an 8x8 block to ``(T, F_alpha, F_beta)``; an involution."""
    p = _perm_alpha(alpha)
    return U[np.ix_(p, p)]


def ideal_cx(alpha: int = 1, three_qubit: bool = True) -> np.ndarray:
    """Ideal CNOT with fluxonium ``alpha`` as control and the transmon as target."""
    if not three_qubit:
        return CNOT.copy()
    U = np.zeros((8, 8), complex)
    for t, a, b in itertools.product((0, 1), repeat=3):
        U[4 * (t ^ a) + 2 * a + b, 4 * t + 2 * a + b] = 1.0
    return to_alpha_frame(U, alpha)


def process_fidelity(U: np.ndarray, U_id: np.ndarray) -> float:
    U = np.asarray(U)
    U_id = np.asarray(U_id)
    if U.shape != U_id.shape or U.shape[0] != U.shape[1]:
        raise ValueError(f"shape mismatch {U.shape} vs {U_id.shape}")
    d = U.shape[0]
    return float((np.trace(U.conj().T @ U).real + abs(np.trace(U_id.conj().T @ U)) ** 2) / (d * (d + 1)))


def _check_subunitary(U, what="block"):
    s = np.linalg.svd(U, compute_uv=False)
    if s.max() > 1 + SUBUNITARY_SLACK:
        raise ValueError(f"{what} is not sub-unitary (largest singular value {s.max():.12f})")


# ------------------------------------------------------------ darkening ratio

def sd_ratio(ds: DressedSystem, alpha: int = 1, beta: int = 0) -> float:
    """Drive ratio that cancels the ``|0_T 0_alpha beta> -> |1_T 0_alpha beta>`` element."""
    if ds.three_qubit:
        lo, hi = ds.index(ftf_label(0, 0, beta, alpha)), ds.index(ftf_label(1, 0, beta, alpha))
    else:
        lo, hi = ds.index((0, 0)), ds.index((0, 1))
    num = ds.n_ops[f"F{alpha}"][lo, hi]
    den = ds.n_ops["T"][lo, hi]
    if abs(den) < 1e-12:
        raise ValueError("no transmon transition dipole; darkening ratio undefined")
    eta = -num / den
    if abs(eta.imag) > 1e-8 * max(abs(eta), 1e-300):
        warnings.warn(f"discarding imaginary part {eta.imag:.3g} of the darkening ratio")
    return float(eta.real)


# ------------------------------------------------------------------- budgets

def _budget(majors_dark, majors_bright, U, phases_dark, phases_bright) -> Dict:
    d = U.shape[0]
    norm = d * (d + 1)
    md, mb = np.abs(majors_dark), np.abs(majors_bright)
    pd, pb = np.asarray(phases_dark), np.asarray(phases_bright)
    imag = np.sum(md * np.sin(pd)) + np.sum(mb * np.sin(pb))
    return {
        "dark": float(2 * d / norm * np.sum(1 - md)),
        "flip": float(2 * d / norm * np.sum(1 - mb)),
        "leak": float(1 / (d + 1) - np.trace(U.conj().T @ U).real / norm),
        "phase": {
            "d_phase": float(2 * d / norm * np.sum(md * (1 - np.cos(pd)))),
            "b_phase": float(2 * d / norm * np.sum(mb * (1 - np.cos(pb)))),
            "imag": float(-imag ** 2 / norm),
        },
    }


def error_budget_2q(report_or_block) -> Dict:
    """Dark/flip/leak decomposition of a (phase-corrected) FT block."""
    U = getattr(report_or_block, "comp_block", report_or_block)
    el = np.array([U[o, i] for o, i in _FT_MAJORS])
    ph = np.angle(el * np.conj(el[0]))
    b = _budget(el[:2], el[2:], U, ph[:2], ph[2:])
    return b


def error_budget_2q_legacy(block: np.ndarray) -> Dict:
    """Probability-grouped FT budget with control-flip terms."""
    U = np.asarray(block)
    P = lambda a, b: abs(U[int(b, 2), int(a, 2)]) ** 2
    return {
        "ctrl1": (P("00", "10") + P("10", "00") + P("01", "10") + P("10", "01")) / 5,
        "ctrl2": (P("01", "11") + P("11", "01") + P("00", "11") + P("11", "00")) / 5,
        "dark": (P("00", "01") + P("01", "00")) / 5,
        "bright": (P("10", "10") + P("11", "11")) / 5,
        "leak": 1 - np.trace(U.conj().T @ U).real / 4,
    }


def major_phases_3q(block: np.ndarray, alpha: int = 1, relative: bool = True) -> Dict[str, float]:
    Ua = to_alpha_frame(np.asarray(block), alpha)
    ref = np.angle(Ua[0, 0]) if relative else 0.0
    return {k: float(np.angle(Ua[o, i] * np.exp(-1j * ref))) for k, (o, i) in _MAJOR_3Q.items()}


def error_budget_3q(report_or_block, alpha: Optional[int] = None, relative: bool = True) -> Dict:
    """Dark/flip/leak/phase decomposition of an FTF ``CX_alpha`` block.

    Phases are measured from the ``000 -> 000`` element unless ``relative`` is
    false, in which case raw element phases are used.
    """
    U = getattr(report_or_block, "comp_block", report_or_block)
    if alpha is None:
        alpha = getattr(report_or_block, "alpha", 1)
    ph = major_phases_3q(U, alpha, relative)
    Ua = to_alpha_frame(U, alpha)
    el = {k: Ua[o, i] for k, (o, i) in _MAJOR_3Q.items()}
    return _budget([el[k] for k in _DARK_3Q], [el[k] for k in _BRIGHT_3Q], Ua,
                   [ph[k] for k in _DARK_3Q], [ph[k] for k in _BRIGHT_3Q])


# ---------------------------------------------------------- phase correction

def _rz(theta):
    return np.array([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def phase_correct_2q(block: np.ndarray) -> GateReport:
    """Exact local Z correction of an FT block.

    Z rotations on the fluxonium and before and after on the transmon make all
    four major elements share one phase.
    """
    U = np.asarray(block, dtype=complex)
    # rows: coefficients of (theta_F, theta_T_pre, theta_T_post, -gamma)
    A, rhs = [], []
    for o, i in _FT_MAJORS:
        f, ti, to = i >> 1, i & 1, o & 1
        A.append([f - 0.5, ti - 0.5, to - 0.5, -1.0])
        rhs.append(-np.angle(U[o, i]))
    thF, thp, thq, _ = np.linalg.solve(np.array(A), np.array(rhs))
    post = np.kron(_rz(thF), _rz(thq))
    pre = np.kron(np.ones(2), _rz(thp))
    Uc = post[:, None] * U * pre[None, :]
    raw = {n: float(np.angle(U[o, i] * np.conj(U[0, 0]))) for n, (o, i) in zip(_FT_NAMES, _FT_MAJORS)}
    F = process_fidelity(Uc, CNOT)
    return GateReport(Uc, F, 1 - F, error_budget_2q(Uc), [thF, thp, thq], raw, alpha=1)


def _apply_rot_3q(Ua, th):
    post = np.kron(np.kron(_rz(th[1]), _rz(th[2])), _rz(th[3]))
    pre = np.kron(_rz(th[0]), np.ones(4))
    return post[:, None] * Ua * pre[None, :]


def _sector_angles(p, a, f, c, h):
    return np.array([
        0.5 * (p[a] - p[f] - p[c] + p[h]),
        0.5 * (p[a] - p[f] - p[h] + p[c]),
        0.5 * (p[a] - p[h] - p[c] + p[f]),
    ])


def _nearest_equivalent(th, ref):
    """Shift ``th`` by angle patterns that leave all major phases equal.

    Adding 2 pi to any angle, or pi to all three, changes the corrected block
    by a global phase only, so each sector solution is defined up to that
    lattice.  Pick the representative closest to ``ref`` before averaging.
    """
    best, best_d = th, np.inf
    for s in (0.0, np.pi):
        t = th + s
        t = t - 2 * np.pi * np.round((t - ref) / (2 * np.pi))
        d = np.sum((t - ref) ** 2)
        if d < best_d:
            best, best_d = t, d
    return best


def analytic_angles_3q(Ua: np.ndarray) -> np.ndarray:
    """Sector-averaged Z angles ``(theta_1..theta_4)`` for a block in the alpha frame."""
    p = {k: np.angle(Ua[o, i]) for k, (o, i) in _MAJOR_3Q.items()}
    th_a = _sector_angles(p, "a", "f", "c", "h")
    th_b = _nearest_equivalent(_sector_angles(p, "b", "g", "d", "j"), th_a)
    th = np.append(0.5 * (th_a + th_b), 0.0)
    # spectator angle aligns the mean phases of the two spectator sectors
    rot = _apply_rot_3q(Ua, th)
    s0 = sum(rot[_MAJOR_3Q[k]] for k in "afch")
    s1 = sum(rot[_MAJOR_3Q[k]] for k in "bgdj")
    th[3] = np.angle(s0) - np.angle(s1)
    return th


def phase_correct_3q(block: np.ndarray, alpha: int = 1, refine: bool = True) -> GateReport:
    """Z-rotation phase correction of an FTF ``CX_alpha`` block.

    Starts from sector-averaged analytic angles and, if ``refine``, polishes
    all four angles with a simplex search on the process fidelity.
    """
    U = np.asarray(block, dtype=complex)
    Ua = to_alpha_frame(U, alpha)
    ideal = ideal_cx(1)
    raw = major_phases_3q(U, alpha)
    th0 = analytic_angles_3q(Ua)
    err = lambda th: 1.0 - process_fidelity(_apply_rot_3q(Ua, th), ideal)
    th, refined, fallback = th0, False, False
    if refine:
        e0 = err(th0)
        res = minimize(err, th0, method="Nelder-Mead",
                       options=dict(xatol=1e-10, fatol=REFINE_TOL, maxfev=2000))
        if res.fun <= e0:
            th, refined = res.x, True
        else:
            fallback = True
    Uc = to_alpha_frame(_apply_rot_3q(Ua, th), alpha)
    F = process_fidelity(Uc, ideal_cx(alpha))
    return GateReport(Uc, F, 1 - F, error_budget_3q(Uc, alpha), list(map(float, th)), raw,
                      alpha=alpha, refined=refined, fallback=fallback)


def phase_correct(block: np.ndarray, alpha: int = 1, refine: bool = True) -> GateReport:
    if block.shape == (4, 4):
        return phase_correct_2q(block)
    return phase_correct_3q(block, alpha, refine)


# ------------------------------------------------------------------ readout

def readout_fidelities(block: np.ndarray, beta: int = 0, alpha: int = 1) -> Dict[str, float]:
    """Assignment fidelities for mapping fluxonium ``alpha`` onto the transmon."""
    U = np.asarray(block)
    if U.shape == (4, 4):
        P = lambda a, b: abs(U[int(b, 2), int(a, 2)]) ** 2
        qnd = (P("00", "00") + P("10", "11")) / 2
        extra = (P("00", "10") + P("10", "01")) / 2
    else:
        Ua = to_alpha_frame(U, alpha)
        idx = lambda t, a: 4 * t + 2 * a + beta
        P = lambda i, o: abs(Ua[idx(*o), idx(*i)]) ** 2
        qnd = (P((0, 0), (0, 0)) + P((0, 1), (1, 1))) / 2
        extra = (P((0, 0), (0, 1)) + P((0, 1), (1, 0))) / 2
    return {"F_QND": float(qnd), "F_nonQND": float(qnd + extra),
            "E_read": float(1 - qnd), "E_read_nonQND": float(1 - qnd - extra)}


# ------------------------------------------------------------- parity checks

def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def effective_ff_block(U_pc_alpha: np.ndarray) -> np.ndarray:
    """Fluxonium 4x4 block from transmon-0 columns, reading T at the ideal flag."""
    out = np.zeros((4, 4), complex)
    for r in range(4):
        out[r] = U_pc_alpha[4 * _parity(r) + r, :4]
    return out


def parity_check(blockA: np.ndarray, blockB: np.ndarray, alpha: int = 1) -> ParityReport:
    """Parity check ``CX_beta . CX_alpha`` from two phase-corrected blocks.

    ``blockA`` implements ``CX_alpha`` and ``blockB`` ``CX_beta``; both are
    in native ``(T, F1, F2)`` order.
    """
    A, B = np.asarray(blockA), np.asarray(blockB)
    if A.shape != (8, 8) or B.shape != (8, 8):
        raise ValueError("parity checks need two 8x8 FTF blocks")
    beta = 3 - alpha
    U = to_alpha_frame(B @ A, alpha)
    ideal = to_alpha_frame(ideal_cx(beta) @ ideal_cx(alpha), alpha)
    U_e = U[np.ix_([0, 3], [0, 3])]
    U_o = U[np.ix_([5, 6], [1, 2])]
    Fp = lambda M: float((np.trace(M @ M.conj().T).real + abs(np.trace(M)) ** 2) / 6)
    names = ("assignment-error", "parity-switch-right-flag", "parity-switch-wrong-flag")
    blocks = {n: np.zeros((4, 2), complex) for n in names}
    fill = {n: [0, 0, 0, 0] for n in names}
    for col in range(4):
        p_in = _parity(col)
        for row in range(8):
            t, ff = row >> 2, row & 3
            kept, flag_ok = _parity(ff) == p_in, t == p_in
            if kept and flag_ok:
                continue
            name = names[0] if kept else (names[1] if flag_ok else names[2])
            blocks[name][col, fill[name][col]] = U[row, col]
            fill[name][col] += 1
    groups = {n: float(np.sum(np.abs(m) ** 2)) for n, m in blocks.items()}
    return ParityReport(U_e, U_o, Fp(U_e), Fp(U_o), process_fidelity(U, ideal), groups,
                        blocks, effective_ff_block(U))


def parity_phase_correction(U_ff: np.ndarray):
    """Z rotations on both fluxoniums leaving one phase per parity sector.

    Returns ``(corrected, theta_1, theta_2)``.
    """
    U = np.asarray(U_ff, dtype=complex)
    a, g, h, d = (np.angle(U[k, k]) for k in range(4))
    th1 = a / 2 - d / 2 + g / 2 - h / 2
    th2 = a / 2 - d / 2 - g / 2 + h / 2
    rot = np.kron(_rz(th1), _rz(th2))
    return rot[:, None] * U, float(th1), float(th2)


# ------------------------------------------------------------ compound gate

def compound_cx(blockA: np.ndarray, blockB: np.ndarray, alpha: int = 1) -> Dict:
    """Fluxonium-fluxonium CNOT built as ``CX_a (H.I.H) CX_b (H.I.H) CX_a``.

    ``blockA`` implements ``CX_alpha`` and ``blockB`` ``CX_beta``, both in native
    order.  Hadamards on T and ``F_beta`` are exact.
    """
    A = to_alpha_frame(np.asarray(blockA), alpha)
    B = to_alpha_frame(np.asarray(blockB), alpha)
    HH = np.kron(np.kron(HADAMARD, np.eye(2)), HADAMARD)
    U = A @ HH @ B @ HH @ A
    _check_subunitary(U, "compound gate")
    U0, U1 = U[:4, :4], U[4:, :4]
    F = [(np.trace(Ui.conj().T @ Ui).real + abs(np.trace(CNOT.conj().T @ Ui)) ** 2) / 20
         for Ui in (U0, U1)]
    states = {}
    for (na, va), (nb, vb) in itertools.product(_SINGLE_STATES.items(), repeat=2):
        s = np.kron(va, vb)
        psi = (U[:, :4] @ s).reshape(2, 4)  # transmon x fluxonium pair
        rho = psi.T @ psi.conj()  # trace over the transmon
        target = CNOT @ s
        states[f"{na},{nb}"] = float(1 - (target.conj() @ rho @ target).real)
    errs = np.array(list(states.values()))
    return {
        "E0": float(1 - F[0]),
        "E01": float(1 - F[0] - F[1]),
        "E1": float(F[1]),
        "F0": float(F[0]),
        "F1": float(F[1]),
        "E_s": float(errs.mean()),
        "E_s_min": float(errs.min()),
        "E_s_max": float(errs.max()),
        "state_errors": states,
        "U": U,
    }


# ---------------------------------------------------------------- decoherence

def estimate_decoherence_error(t_g: float, T1: Sequence[float], Tphi: Sequence[float]) -> float:
    """Incoherent error estimate summed over qubits; infinite times contribute nothing."""
    T1 = np.atleast_1d(np.asarray(T1, dtype=float))
    Tphi = np.atleast_1d(np.asarray(Tphi, dtype=float))
    if t_g < 0 or np.any(T1 <= 0) or np.any(Tphi <= 0):
        raise ValueError("times must be positive")
    T1, Tphi = np.broadcast_arrays(T1, Tphi)
    rate = 1.0 / T1 + 1.0 / Tphi
    return float(np.sum(-np.expm1(-t_g * rate)))
