"""
Qubit spectra and static ZZ
===========================

Diagonalize the two half-flux fluxoniums and the transmon, couple them
capacitively, and look at the static ZZ rates that set the spectator
problem for the three-qubit gates.
"""
import numpy as np

from fluxcr.circuits import diagonalize_qubit, fluxonium, transition_frequency, transmon
from fluxcr.composite import CouplingSpec, build_system, zz_ff, zz_ft
from fluxcr.perturbation import zz_ff_perturbative

# %%
# Single qubits. Energies are in GHz (h = 1).
F1, T, F2 = (diagonalize_qubit(s) for s in (fluxonium(3.95), transmon(), fluxonium(4.05)))
for name, q in [("F1", F1), ("T", T), ("F2", F2)]:
    print(f"{name:3s} f01 = {transition_frequency(q, 0, 1):.4f}  f12 = {transition_frequency(q, 1, 2):.4f}")

# %%
# The fluxonium 0-1 transition is near 0.9 GHz while 1-2 sits near 4 GHz,
# so the 1-2 line is what hybridizes with the transmon.
print("fluxonium charge elements |<i|n|j>|, i,j < 4:")
print(np.round(np.abs(F1.n_elems[:4, :4]), 4))

# %%
# Composite FTF system in the dressed basis, order (T, F1, F2).
ds = build_system([T, F1, F2], CouplingSpec(0.022, 0.022, 0.0))
print("dimension", ds.dim)
for t in (0, 1):
    print(f"F1-F2 ZZ with transmon in |{t}>: {zz_ff(ds, t):9.3f} Hz")

# %%
# The fluxonium-fluxonium ZZ has no second-order part, so the
# perturbative comparison has to go to fourth order.
print(f"4th-order estimate, transmon in |1>: {zz_ff_perturbative([T, F1, F2], CouplingSpec(), 1):.3f} Hz")

# %%
# Transmon-fluxonium ZZ is five orders of magnitude larger. This is the
# spectator coupling that limits CX gates in the three-qubit device.
for alpha in (1, 2):
    print(f"T-F{alpha} ZZ: {zz_ft(ds, alpha) / 1e3:.1f} kHz")

# %%
# Sweep the coupling: both ZZ rates grow with J, the FF rate roughly as J^4.
for J in (0.005, 0.01, 0.02, 0.03):
    d = build_system([T, F1, F2], CouplingSpec(J, J, 0.0))
    print(f"J = {J * 1e3:4.0f} MHz  ZZ_TF1 = {zz_ft(d, 1) / 1e3:8.2f} kHz  ZZ_FF(T=1) = {zz_ff(d, 1):8.3f} Hz")
