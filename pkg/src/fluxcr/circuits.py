"""Single-qubit fluxonium and transmon Hamiltonians.

All energies are linear frequencies in GHz (energy / h).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

FLUXONIUM = "fluxonium"
TRANSMON = "transmon"

DEFAULT_BASIS = {FLUXONIUM: 120, TRANSMON: 61}
DEFAULT_KEEP = 8
CONVERGENCE_GHZ = 1e-6  # 1 kHz


class ConvergenceError(RuntimeError):
    """Raised when a truncated basis does not reproduce the retained spectrum."""


@dataclass(frozen=True)
class QubitSpec:
    """Circuit energies of one qubit.

    For a transmon ``basis_size`` is the number of charge states, ``2 n_cut + 1``.
    For a fluxonium it is the number of harmonic-oscillator levels.
    """

    kind: str
    E_C: float
    E_J: float
    E_L: float = 0.0
    phi_ext: float = np.pi
    basis_size: Optional[int] = None
    keep_levels: int = DEFAULT_KEEP

    def __post_init__(self):
        if self.kind not in (FLUXONIUM, TRANSMON):
            raise ValueError(f"unknown qubit kind {self.kind!r}")
        if self.basis_size is None:
            object.__setattr__(self, "basis_size", DEFAULT_BASIS[self.kind])
        if self.E_C <= 0 or self.E_J <= 0:
            raise ValueError("E_C and E_J must be positive")
        if self.kind == FLUXONIUM and self.E_L <= 0:
            raise ValueError("a fluxonium needs E_L > 0")
        if self.kind == TRANSMON and self.basis_size % 2 == 0:
            raise ValueError("transmon basis_size must be odd (2 n_cut + 1)")
        if not 0 < self.keep_levels <= self.basis_size:
            raise ValueError("keep_levels must lie in [1, basis_size]")
        # below this the top of the basis is visibly contaminated
        if self.basis_size < 2 * self.keep_levels + 10:
            raise ValueError(
                f"basis_size={self.basis_size} too small to converge "
                f"{self.keep_levels} levels")

    @property
    def n_cut(self) -> int:
        return (self.basis_size - 1) // 2

    def with_basis(self, basis_size: int) -> "QubitSpec":
        if self.kind == TRANSMON and basis_size % 2 == 0:
            basis_size += 1
        return replace(self, basis_size=basis_size)


@dataclass(frozen=True)
class EigenQubit:
    spec: QubitSpec
    energies: np.ndarray
    n_elems: np.ndarray
    phi_elems: Optional[np.ndarray] = None
    vectors: np.ndarray = field(default=None, repr=False)

    @property
    def levels(self) -> int:
        return len(self.energies)


def displacement_matrix(size: int, alpha: complex) -> np.ndarray:
    """Fock-basis matrix elements of ``exp(alpha a^dag - alpha* a)``.

    Uses the closed form in terms of generalized Laguerre polynomials, so the
    elements are exact for the untruncated operator.
    """
    x = abs(alpha) ** 2
    m, n = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    lo = np.minimum(m, n)
    k = np.abs(m - n)
    log_pref = 0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1)) - x / 2
    lag = eval_genlaguerre(lo, k, x)
    # alpha^(m-n) below the diagonal, (-alpha*)^(n-m) above
    th = np.angle(alpha)
    with np.errstate(divide="ignore"):
        log_abs = np.where(k > 0, k * np.log(abs(alpha)), 0.0) if alpha != 0 else np.where(k > 0, -np.inf, 0.0)
    # phase from the angle: dividing by |alpha| overflows for subnormal alpha
    phase = np.where(m >= n, np.exp(1j * k * th), (-1.0) ** k * np.exp(-1j * k * th))
    return np.exp(log_pref + log_abs) * phase * lag


def _fluxonium_operators(spec: QubitSpec):
    N = spec.basis_size
    phi_zpf = (2.0 * spec.E_C / spec.E_L) ** 0.25
    n_zpf = (spec.E_L / (32.0 * spec.E_C)) ** 0.25
    a = np.diag(np.sqrt(np.arange(1, N)), 1).astype(complex)
    phi = phi_zpf * (a + a.conj().T)
    n_op = 1j * n_zpf * (a.conj().T - a)
    w_osc = np.sqrt(8.0 * spec.E_C * spec.E_L)
    exp_iphi = displacement_matrix(N, 1j * phi_zpf) * np.exp(-1j * spec.phi_ext)
    cos_term = 0.5 * (exp_iphi + exp_iphi.conj().T)
    H = np.diag(w_osc * (np.arange(N) + 0.5)).astype(complex) - spec.E_J * cos_term
    return H, n_op, phi


def _transmon_operators(spec: QubitSpec):
    n_cut = spec.n_cut
    charges = np.arange(-n_cut, n_cut + 1, dtype=float)
    off = np.full(len(charges) - 1, -0.5 * spec.E_J)
    H = np.diag(4.0 * spec.E_C * charges**2) + np.diag(off, 1) + np.diag(off, -1)
    return H.astype(complex), np.diag(charges).astype(complex), None


def transmon_oscillator_energies(spec: QubitSpec, size: int = 40) -> np.ndarray:
    """Transmon levels in a harmonic-oscillator basis with a non-compact phase.

    Independent of the charge-basis construction; the two agree up to the
    charge dispersion, which is negligible deep in the transmon regime.  Keep
    ``size`` moderate: a large basis reaches the neighbouring ``2 pi`` wells
    and adds copies of the low levels.
    """
    if spec.kind != TRANSMON:
        raise ValueError("transmon spec required")
    phi_zpf = (2.0 * spec.E_C / spec.E_J) ** 0.25
    n_zpf = 1.0 / (2.0 * phi_zpf)
    k = np.arange(size)
    # exact elements of n^2 = -n_zpf^2 (a^dag - a)^2, free of truncation edges
    a2 = np.diag(np.sqrt(k[2:] * (k[2:] - 1)), 2)
    n2 = n_zpf ** 2 * (np.diag(2 * k + 1.0) - a2 - a2.T)
    D = displacement_matrix(size, 1j * phi_zpf)
    H = 4.0 * spec.E_C * n2 - spec.E_J * 0.5 * (D + D.conj().T)
    vals = np.linalg.eigvalsh(H)[:spec.keep_levels]
    return vals - vals[0]


def build_qubit_hamiltonian(spec: QubitSpec):
    """Return ``(H, n_op)`` in the internal basis of ``spec``."""
    if spec.kind == FLUXONIUM:
        H, n_op, _ = _fluxonium_operators(spec)
    else:
        H, n_op, _ = _transmon_operators(spec)
    return H, n_op


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    lead = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(lead) / lead)


def _diagonalize(spec: QubitSpec) -> EigenQubit:
    if spec.kind == FLUXONIUM:
        H, n_op, phi = _fluxonium_operators(spec)
    else:
        H, n_op, phi = _transmon_operators(spec)
    vals, vecs = np.linalg.eigh(H)
    keep = spec.keep_levels
    vecs = fix_phases(vecs[:, :keep])
    energies = vals[:keep] - vals[0]
    n_elems = vecs.conj().T @ n_op @ vecs
    phi_elems = None if phi is None else vecs.conj().T @ phi @ vecs
    return EigenQubit(spec, energies, n_elems, phi_elems, vecs)


def diagonalize_qubit(spec: QubitSpec, check_convergence: bool = False) -> EigenQubit:
    """Diagonalize ``spec`` and keep its lowest ``keep_levels`` eigenstates.

    With ``check_convergence`` the basis is doubled and a
    :class:`ConvergenceError` is raised if any retained energy moves by more
    than 1 kHz.
    """
    eq = _diagonalize(spec)
    if check_convergence:
        big = _diagonalize(spec.with_basis(2 * spec.basis_size))
        drift = np.max(np.abs(big.energies - eq.energies))
        if drift > CONVERGENCE_GHZ:
            raise ConvergenceError(
                f"{spec.kind} energies moved by {drift * 1e6:.3g} kHz on basis doubling")
    return eq


def transition_frequency(eq: EigenQubit, i: int, j: int) -> float:
    """Frequency (GHz) of the ``i -> j`` transition, ``E_j - E_i``."""
    n = eq.levels
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"levels ({i}, {j}) outside the {n} retained levels")
    return float(eq.energies[j] - eq.energies[i])


def fluxonium(E_J, E_C=1.4, E_L=0.9, phi_ext=np.pi, **kw) -> QubitSpec:
    return QubitSpec(FLUXONIUM, E_C=E_C, E_J=E_J, E_L=E_L, phi_ext=phi_ext, **kw)


def transmon(E_J=18.0, E_C=0.25, **kw) -> QubitSpec:
    return QubitSpec(TRANSMON, E_C=E_C, E_J=E_J, **kw)
