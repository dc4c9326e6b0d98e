"""Cross-resonance drive pulses and time-ordered propagation.

States are integrated in the interaction picture of the dressed static
Hamiltonian, ``c(t) = exp(i 2 pi E t) psi(t)``, with a fixed-step classical
RK4 scheme.  Over the flat top of a pulse the lab-frame Hamiltonian repeats
with the carrier period, so one full-period propagator is computed and raised
to the required power instead of integrating every period.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from .composite import DressedSystem

TWO_PI = 2.0 * np.pi
DEFAULT_DT = 5e-4  # ns
NORM_SLACK = 1e-9
HALVING_TOL = 1e-7  # max |change| of block entries when dt is halved


class PropagationError(RuntimeError):
    """Integration blew up or did not converge under step halving."""


@dataclass(frozen=True)
class PulseSpec:
    """Drive ``epsilon f(t) cos(2 pi omega_d t) (n_F[active] + eta n_T)``.

    ``epsilon`` and ``omega_d`` in GHz, times in ns.
    """

    epsilon: float
    eta: float
    omega_d: float
    t_g: float = 50.0
    t_r: float = 5.0
    active: int = 1

    def __post_init__(self):
        if not self.t_g > 2 * self.t_r > 0:
            raise ValueError("need t_g > 2 t_r > 0")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.omega_d <= 0:
            raise ValueError("omega_d must be positive")
        if self.active not in (1, 2):
            raise ValueError("active fluxonium must be 1 or 2")

    def replace(self, **kw) -> "PulseSpec":
        return replace(self, **kw)


@dataclass
class PropagatorBlock:
    """Evolved computational columns at ``t_g`` in the dressed rotating frame."""

    columns: Dict[Tuple[int, ...], np.ndarray]
    comp_block: np.ndarray
    frame: str = "dressed-rotating"
    states: Optional[np.ndarray] = None  # (N, d) array of the same columns
    labels: Optional[Sequence[Tuple[int, ...]]] = None
    dt: float = DEFAULT_DT
    convergence: Optional[float] = None

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=0)


def envelope(t, t_g: float, t_r: float):
    """sin^2 ramp up over ``t_r``, flat top, sin^2 ramp down; clamped to [0, t_g]."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, t_g)
    rise = np.sin(np.pi * t / (2 * t_r)) ** 2
    fall = np.sin(np.pi * (t_g - t) / (2 * t_r)) ** 2
    out = np.where(t < t_r, rise, np.where(t < t_g - t_r, 1.0, fall))
    return out if out.ndim else float(out)


def _active_key(pulse_or_alpha) -> str:
    alpha = getattr(pulse_or_alpha, "active", pulse_or_alpha)
    return f"F{alpha}"


def drive_operator(ds: DressedSystem, pulse: PulseSpec) -> np.ndarray:
    """Time-independent drive coupling ``n_F[active] + eta n_T`` in the dressed basis."""
    key = _active_key(pulse)
    if key not in ds.n_ops:
        raise KeyError(f"system has no qubit {key}")
    return ds.n_ops[key] + pulse.eta * ds.n_ops["T"]


@njit(cache=True)
def _rk4_real_kernel(w, D, c, t0, h, n, s):
    """Fused RK4 loop for a real drive operator; ``c`` is updated in place."""
    N, m = c.shape
    x = np.empty((N, 2 * m))
    y = np.empty((N, 2 * m))
    acc = np.zeros((N, m), dtype=np.complex128)
    kprev = np.zeros((N, m), dtype=np.complex128)
    p = np.exp(1j * w * t0)
    ph_half = np.exp(0.5j * w * h)
    pm = np.empty(N, dtype=np.complex128)
    p1 = np.empty(N, dtype=np.complex128)
    for k in range(n):
        for i in range(N):
            pm[i] = p[i] * ph_half[i]
            p1[i] = pm[i] * ph_half[i]
        for stage in range(4):
            if stage == 0:
                ph, a, frac = p, s[2 * k], 0.0
            elif stage == 3:
                ph, a, frac = p1, s[2 * k + 2], 1.0
            else:
                ph, a, frac = pm, s[2 * k + 1], 0.5
            for i in range(N):
                pc = ph[i].conjugate()
                for j in range(m):
                    z = pc * (c[i, j] + frac * h * kprev[i, j])
                    x[i, j] = z.real
                    x[i, m + j] = z.imag
            np.dot(D, x, y)
            wgt = 1.0 if (stage == 0 or stage == 3) else 2.0
            for i in range(N):
                q = a * ph[i]
                for j in range(m):
                    kk = q * (y[i, j] + 1j * y[i, m + j])
                    kprev[i, j] = kk
                    acc[i, j] += wgt * kk
        for i in range(N):
            for j in range(m):
                c[i, j] += (h / 6.0) * acc[i, j]
                acc[i, j] = 0.0
                kprev[i, j] = 0.0
        if k % 64 == 63:
            for i in range(N):
                p[i] = np.exp(1j * w[i] * (t0 + (k + 1) * h))
        else:
            for i in range(N):
                p[i] = p1[i]
    return c


class _Integrator:
    """RK4 in the interaction picture for one (E, D, pulse) triple.

    A real ``D`` is multiplied against the real and imaginary parts in a single
    real matrix product, which halves the arithmetic.
    """

    def __init__(self, energies, D, pulse: PulseSpec, dt: float, flat_envelope=False):
        self.w = TWO_PI * np.asarray(energies, dtype=float)
        D = np.asarray(D)
        self.real = not np.iscomplexobj(D)
        self.D = np.ascontiguousarray(D)
        self.pulse = pulse
        self.dt = dt
        self.flat_envelope = flat_envelope

    def drive(self, t, flat=False):
        p = self.pulse
        f = 1.0 if (flat or self.flat_envelope) else envelope(t, p.t_g, p.t_r)
        return p.epsilon * f * np.cos(TWO_PI * p.omega_d * t)

    def _apply(self, X):
        if self.real:
            m = X.shape[1]
            return (self.D @ X.view(np.float64)).view(np.complex128).reshape(-1, m)
        return self.D @ X

    def run(self, c, t0, t1, flat=False):
        """Integrate ``c`` from ``t0`` to ``t1`` (either direction)."""
        span = t1 - t0
        c = np.array(c, dtype=complex, copy=True)
        if span == 0:
            return c
        n = max(1, int(np.ceil(abs(span) / self.dt - 1e-9)))
        h = span / n
        ts = t0 + h * np.arange(2 * n + 1) / 2.0
        s = -1j * TWO_PI * self.drive(ts, flat)
        w = self.w
        squeeze = c.ndim == 1
        if squeeze:
            c = c[:, None]
        if self.real:
            c = _rk4_real_kernel(w, self.D, np.ascontiguousarray(c), float(t0), float(h), n,
                                 np.ascontiguousarray(s))
            return c[:, 0] if squeeze else c
        ph_half = np.exp(0.5j * w * h)[:, None]
        p = np.exp(1j * w * t0)[:, None]
        for k in range(n):
            pm = p * ph_half
            p1 = pm * ph_half
            a0, am, a1 = s[2 * k], s[2 * k + 1], s[2 * k + 2]
            k1 = (a0 * p) * self._apply(p.conj() * c)
            k2 = (am * pm) * self._apply(pm.conj() * (c + 0.5 * h * k1))
            k3 = (am * pm) * self._apply(pm.conj() * (c + 0.5 * h * k2))
            k4 = (a1 * p1) * self._apply(p1.conj() * (c + h * k3))
            c += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            # re-anchor the phase recursion periodically to stop drift
            p = np.exp(1j * w * (t0 + (k + 1) * h))[:, None] if k % 64 == 63 else p1
        return c[:, 0] if squeeze else c

    def period_propagator(self, t0):
        """Lab-frame propagator over one carrier period from ``t0`` at full amplitude."""
        T = 1.0 / self.pulse.omega_d
        N = len(self.w)
        M = self.run(np.eye(N, dtype=complex), t0, t0 + T, flat=True)
        # M = e^{iH0 (t0+T)} W e^{-iH0 t0}
        return np.exp(-1j * self.w * (t0 + T))[:, None] * M * np.exp(1j * self.w * t0)[None, :]


def evolve(energies, D, pulse: PulseSpec, c0, t0: float, t1: float,
           dt: float = DEFAULT_DT, use_floquet: bool = True,
           flat_envelope: bool = False) -> np.ndarray:
    """Interaction-picture states at ``t1`` given states ``c0`` at ``t0``.

    ``flat_envelope`` replaces the ramped envelope with a constant one.
    """
    integ = _Integrator(energies, D, pulse, dt, flat_envelope)
    c = np.asarray(c0, dtype=complex)
    lo, hi = (-np.inf, np.inf) if flat_envelope else (pulse.t_r, pulse.t_g - pulse.t_r)
    T = 1.0 / pulse.omega_d
    forward = t1 >= t0
    a, b = (max(t0, lo), min(t1, hi)) if forward else (min(t0, hi), max(t1, lo))
    n_periods = int(abs(b - a) // T) if (b - a) * (1 if forward else -1) > 0 else 0
    ncols = 1 if c.ndim == 1 else c.shape[1]
    # the full-period propagator only pays off with enough periods to reuse
    if not use_floquet or n_periods * ncols < 4 * len(energies) or n_periods < 8:
        return integ.run(c, t0, t1)
    c = integ.run(c, t0, a)
    W = integ.period_propagator(a if forward else a - T)
    if not forward:
        W = W.conj().T
    w = integ.w
    psi = np.exp(-1j * w * a)[:, None] * (c if c.ndim == 2 else c[:, None])
    # repeated squaring would lose the exact periodic structure less gracefully
    for _ in range(n_periods):
        psi = W @ psi
    t_mid = a + (n_periods * T if forward else -n_periods * T)
    c_mid = np.exp(1j * w * t_mid)[:, None] * psi
    if c.ndim == 1:
        c_mid = c_mid[:, 0]
    return integ.run(c_mid, t_mid, t1)


def parity_gauge(ds: DressedSystem) -> np.ndarray:
    """Diagonal phases ``i^(fluxonium levels)`` per dressed state.

    At half flux the fluxonium charge operator only links levels of opposite
    parity, so in this gauge the drive operator is real.
    """
    pos = [k for k, name in enumerate(ds.order) if name.startswith("F")]
    return np.array([1j ** (sum(lab[k] for k in pos) % 4) for lab in ds.labels])


def _subspace(ds: DressedSystem, limits: Optional[Sequence[int]], e_max: Optional[float]):
    keep = np.ones(ds.dim, bool)
    if limits is not None:
        keep &= np.array([all(l < m for l, m in zip(lab, limits)) for lab in ds.labels])
    if e_max is not None:
        keep &= ds.energies <= e_max
    return np.flatnonzero(keep)


def _prepare(ds: DressedSystem, pulse: PulseSpec, limits, e_max):
    keep = _subspace(ds, limits, e_max)
    comp = ds.comp_indices()
    pos = np.searchsorted(keep, comp)
    if pos.max() >= len(keep) or not np.array_equal(keep[pos], comp):
        raise ValueError("subspace excludes computational states")
    E = ds.energies[keep]
    D = drive_operator(ds, pulse)[np.ix_(keep, keep)]
    g = parity_gauge(ds)[keep]
    Dg = g.conj()[:, None] * D * g[None, :]
    if np.abs(Dg.imag).max() <= 1e-10 * max(np.abs(Dg).max(), 1e-300):
        D, gauge = np.ascontiguousarray(Dg.real), g
    else:
        gauge = np.ones(len(keep), complex)
    return keep, comp, pos, E, D, gauge


def propagate(ds: DressedSystem, pulse: PulseSpec, tol: Optional[float] = None,
              dt: float = DEFAULT_DT, limits: Optional[Sequence[int]] = None,
              e_max: Optional[float] = None, use_floquet: bool = True) -> PropagatorBlock:
    """Evolve every computational dressed state through ``pulse``.

    ``limits`` (per-qubit level counts) and ``e_max`` (GHz) optionally restrict
    the dynamics to a subset of dressed states.  When ``tol`` is given the run
    is repeated at ``dt / 2`` and :class:`PropagationError` is raised if any
    computational element moves by more than ``tol``.
    """
    keep, comp, pos, E, D, gauge = _prepare(ds, pulse, limits, e_max)
    c0 = np.zeros((len(keep), len(comp)), complex)
    c0[pos, np.arange(len(comp))] = gauge[pos].conj()

    def run(step):
        return gauge[:, None] * evolve(E, D, pulse, c0, 0.0, pulse.t_g, step, use_floquet)

    c = run(dt)
    block = c[pos]
    norms = np.linalg.norm(c, axis=0)
    if not np.all(np.isfinite(c)) or norms.max() > 1 + NORM_SLACK:
        raise PropagationError(f"column norm {norms.max():.12f} exceeds 1; reduce dt")
    change = None
    if tol is not None:
        change = float(np.abs(run(dt / 2)[pos] - block).max())
        if change > tol:
            raise PropagationError(f"halving dt moved the block by {change:.3g} > {tol:g}")
    labels = [ds.labels[k] for k in keep]
    cols = {ds.labels[k]: c[:, j] for j, k in enumerate(comp)}
    return PropagatorBlock(cols, block, states=c, labels=labels, dt=dt, convergence=change)


def population_trace(ds: DressedSystem, pulse: PulseSpec, label, n_samples: int = 201,
                     dt: float = DEFAULT_DT, e_max: Optional[float] = None,
                     threshold: float = 1e-2) -> Dict:
    """Dressed-state populations during the pulse for one initial label.

    Only states whose population reaches ``threshold`` at some sample are kept.
    """
    keep, comp, pos, E, D, gauge = _prepare(ds, pulse, None, e_max)
    start = int(np.searchsorted(keep, ds.index(tuple(label))))
    c = np.zeros(len(keep), complex)
    c[start] = 1.0
    times = np.linspace(0.0, pulse.t_g, n_samples)
    pops = np.empty((n_samples, len(keep)))
    pops[0] = np.abs(c) ** 2
    for k in range(1, n_samples):
        c = evolve(E, D, pulse, c, times[k - 1], times[k], dt, use_floquet=False)
        pops[k] = np.abs(c) ** 2
    shown = np.flatnonzero(pops.max(axis=0) >= threshold)
    return {"t": times, "labels": [ds.labels[keep[j]] for j in shown], "populations": pops[:, shown]}
