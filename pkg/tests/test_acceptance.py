"""End-to-end acceptance checks at the stated tolerances.

Calibrated pulses are read from ``data/calibrations`` when present and
re-propagated; missing ones are calibrated (minutes each) and stored.  Run
directly with ``python tests/test_acceptance.py`` for the per-criterion
summary alone.
"""
import sys
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from fluxcr import gates
from fluxcr.calibrate import optimize_gate, seed_parameters
from fluxcr.circuits import diagonalize_qubit, fluxonium, transition_frequency, transmon
from fluxcr.cli import CalibrationStore, calibrated, ej_cell
from fluxcr.composite import CouplingSpec, build_system, transmon_frequency, zz_ff
from fluxcr.config import default_config
from fluxcr.perturbation import pt_energies_second_order, zz_ff_perturbative
from fluxcr.pulses import PulseSpec, envelope, evolve

STORE_DIR = Path(__file__).resolve().parents[1] / "data" / "calibrations"

TG_SWEEP = [30, 35, 40, 42, 44, 46, 48, 50, 54, 56, 60, 70]
TG_STABLE = [42, 46, 50, 54, 56]  # high-time regime used for parity and compound gates
TG_READOUT = [t for t in TG_SWEEP if t >= 40]

_CFG = default_config(True)
_STORE = CalibrationStore(STORE_DIR)


@lru_cache(maxsize=None)
def _ftf():
    return _CFG.system()


@lru_cache(maxsize=None)
def gate(alpha, t_g):
    return calibrated(_CFG, alpha, float(t_g), _STORE, ds=_ftf())


def _block(alpha, t_g):
    return gate(alpha, t_g).report.comp_block


# --------------------------------------------------------------- criterion 1

@pytest.mark.criterion(1)
def test_c1_spectra():
    t0 = time.perf_counter()
    eqs = [diagonalize_qubit(s) for s in (fluxonium(3.95), transmon(), fluxonium(4.05))]
    elapsed = time.perf_counter() - t0
    for eq, (f01, f12) in zip(eqs, [(0.88, 3.98), (5.74, 5.46), (0.85, 4.04)]):
        assert abs(transition_frequency(eq, 0, 1) - f01) <= 0.02
        assert abs(transition_frequency(eq, 1, 2) - f12) <= 0.02
    assert elapsed < 1.0


# --------------------------------------------------------------- criterion 2

@pytest.mark.criterion(2)
def test_c2_zz():
    t0 = time.perf_counter()
    eqs = [diagonalize_qubit(s) for s in (transmon(), fluxonium(3.95), fluxonium(4.05))]
    ds = build_system(eqs, CouplingSpec())
    f0, f1 = zz_ff(ds, 0), zz_ff(ds, 1)
    pt1 = zz_ff_perturbative(eqs, CouplingSpec(), 1)
    elapsed = time.perf_counter() - t0
    # energies near 10 GHz carry ~1e-15 relative rounding, about 1e-5 Hz each;
    # the 5 Hz acceptance window sits far above that floor
    floor = 4 * np.finfo(float).eps * np.abs(ds.energies[ds.comp_indices()]).max() * 1e9
    print(f"\nf_ZZ0 = {f0:.4f} Hz, f_ZZ1 = {f1:.4f} Hz, PT f_ZZ1 = {pt1:.4f} Hz, floor = {floor:.2e} Hz")
    assert abs(f1 - (-17)) <= 10
    assert np.sign(pt1) == np.sign(f1) and abs(pt1 - f1) <= 0.15 * abs(f1)
    assert abs(f0) <= 5
    assert elapsed < 10


# --------------------------------------------------------------- criterion 3

@pytest.mark.criterion(3)
def test_c3_ft_gate():
    cfg = default_config(False)
    ds = cfg.system()
    seed = seed_parameters(ds, 1, 50.0)
    assert abs(seed["eta0"] - 1.01e-3) <= 0.10 * 1.01e-3
    t0 = time.perf_counter()
    res = optimize_gate(ds, 1, 50.0, budget=cfg.optimizer["budget"], dt=cfg.dt, e_max=cfg.e_max,
                        fatol=cfg.optimizer["fatol"])
    elapsed = time.perf_counter() - t0
    print(f"\nFT 50 ns: error {res.error:.3e}, eta {res.pulse.eta:.4e}, {elapsed:.0f} s")
    assert res.error <= 5e-5
    assert abs(res.pulse.eta - 1.36e-3) <= 0.15 * 1.36e-3
    assert elapsed < 600


# --------------------------------------------------------------- criterion 4

@pytest.mark.criterion(4)
@pytest.mark.parametrize("alpha", [1, 2])
def test_c4_ftf_50ns(alpha):
    r = gate(alpha, 50)
    print(f"\nCX{alpha} 50 ns: fidelity {r.report.fidelity:.7f}, error {r.error:.3e}")
    assert r.report.fidelity >= 0.99994


@pytest.mark.criterion(4)
def test_c4_tg_valley():
    errs = {t: gate(1, t).error for t in TG_SWEEP}
    best = min(errs, key=errs.get)
    print("\n" + ", ".join(f"{t}:{e:.2e}" for t, e in errs.items()))
    assert 40 <= best <= 50


@pytest.mark.criterion(4)
@pytest.mark.parametrize("t_g", [t for t in TG_SWEEP if t > 44])
def test_c4_phase_flip_share(t_g):
    r = gate(1, t_g)
    b = r.report.budget
    share = (b["flip"] + b["phase"]["d_phase"] + b["phase"]["b_phase"]) / r.error
    assert share > 0.5


# --------------------------------------------------------------- criterion 5

@pytest.mark.criterion(5)
@pytest.mark.parametrize("alpha,t_g", [(1, t) for t in TG_SWEEP] + [(2, t) for t in TG_STABLE])
def test_c5_budget_closure(alpha, t_g):
    rep = gate(alpha, t_g).report
    E = rep.error_total
    assert abs(E - rep.budget_sum()) <= 10 * E ** 2


# --------------------------------------------------------------- criterion 6

@pytest.mark.criterion(6)
@pytest.mark.parametrize("t_g", TG_STABLE)
@pytest.mark.parametrize("order", ["PC12", "PC21"])
def test_c6_parity(t_g, order):
    b1, b2 = _block(1, t_g), _block(2, t_g)
    rep = gates.parity_check(b1, b2, 1) if order == "PC12" else gates.parity_check(b2, b1, 2)
    F = (rep.F_e, rep.F_o, rep.F_8x8)
    print(f"\n{order} {t_g} ns: F_e {F[0]:.6f} F_o {F[1]:.6f} F_8x8 {F[2]:.6f}")
    assert min(F) > 0.9998
    assert max(F) - min(F) <= 2e-4
    assert rep.F_e > rep.F_o > rep.F_8x8


# --------------------------------------------------------------- criterion 7

@pytest.mark.criterion(7)
@pytest.mark.parametrize("t_g", TG_STABLE)
def test_c7_compound(t_g):
    r = gates.compound_cx(_block(1, t_g), _block(2, t_g), 1)
    print(f"\nCX12 {t_g} ns: E0 {r['E0']:.3e} E01 {r['E01']:.3e} E1 {r['E1']:.3e} Es {r['E_s']:.3e}")
    if t_g == 50:
        assert r["E0"] <= 3e-4
    assert r["E_s"] < r["E01"] < r["E0"]
    assert r["E1"] <= 5e-5


# --------------------------------------------------------------- criterion 8

@pytest.mark.criterion(8)
@pytest.mark.parametrize("t_g", TG_READOUT)
def test_c8_readout(t_g):
    gates_here = [(1, t_g)] + ([(2, t_g)] if t_g in TG_STABLE else [])
    for alpha, t in gates_here:
        for beta in (0, 1):
            r = gates.readout_fidelities(_block(alpha, t), beta, alpha)
            assert r["F_nonQND"] - r["F_QND"] < 1e-8


# --------------------------------------------------------------- criterion 9

EJ_SPOT = {(4.21, 4.2, 18.0): 7.67, (4.01, 4.0, 17.0): 7.15, (4.21, 4.2, 16.0): 30.6}


@lru_cache(maxsize=None)
def _cell(cell):
    return ej_cell(_CFG, cell, 50.0, _STORE)


@pytest.mark.criterion(9)
@pytest.mark.parametrize("cell", list(EJ_SPOT))
def test_c9_ej_cells(cell):
    row = _cell(cell)
    print(f"\n{cell}: {row['error_1e-5']:.2f}e-5 (reference {EJ_SPOT[cell]}e-5)")
    assert abs(row["error_1e-5"] - EJ_SPOT[cell]) <= 0.4 * EJ_SPOT[cell]


@pytest.mark.criterion(9)
def test_c9_jump():
    errs = {c: _cell(c)["error_1e-5"] for c in EJ_SPOT}
    low = max(errs[(4.21, 4.2, 18.0)], errs[(4.01, 4.0, 17.0)])
    assert errs[(4.21, 4.2, 16.0)] > 2 * low


# -------------------------------------------------------------- criterion 10

@pytest.mark.criterion(10)
def test_c10_rabi():
    T = diagonalize_qubit(transmon())
    E, D = T.energies[:2], np.real(T.n_elems[:2, :2]).copy()
    rate = 2e-3
    pulse = PulseSpec(rate / abs(D[0, 1]), 0.0, E[1], t_g=1e6, t_r=1.0)
    for frac in (0.25, 0.5, 0.8):
        t = round(frac / rate * E[1]) / E[1]
        c = evolve(E, D, pulse, np.array([1, 0], complex), 0.0, t, flat_envelope=True)
        assert abs(abs(c[1]) ** 2 - np.sin(np.pi * rate * t) ** 2) < 1e-6


@pytest.mark.criterion(10)
def test_c10_pt_oracles():
    F1, T = diagonalize_qubit(fluxonium(3.95)), diagonalize_qubit(transmon())
    for J in (0.01, 0.02, 0.03):
        lv = pt_energies_second_order([F1, T], J)
        pt = lv[(0, 1)].energy - lv[(0, 0)].energy - T.energies[1]
        ex = transmon_frequency(build_system([F1, T], CouplingSpec(J))) - T.energies[1]
        assert abs(pt - ex) < 0.15 * abs(ex)
    a, b = pt_energies_second_order([F1, T], 0.01), pt_energies_second_order([F1, T], 0.02)
    for lab in a:
        assert abs(b[lab].correction / a[lab].correction - 4) < 4e-6


@pytest.mark.criterion(10)
def test_c10_envelope_and_fidelity():
    assert envelope(0.0, 50, 5) == 0 and envelope(5.0, 50, 5) == 1
    assert envelope(25.0, 50, 5) == 1 and envelope(50.0, 50, 5) == 0
    assert gates.process_fidelity(gates.CNOT, gates.CNOT) == pytest.approx(1, abs=1e-15)
    assert gates.process_fidelity(np.exp(1.3j) * gates.CNOT, gates.CNOT) == pytest.approx(1, abs=1e-15)
    assert gates.process_fidelity(np.eye(4), gates.CNOT) == pytest.approx(0.4, abs=1e-15)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
