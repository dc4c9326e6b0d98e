"""
Parity checks, a compound fluxonium CNOT, and transmon readout
==============================================================

Two calibrated CX gates sharing a transmon give a ZZ parity check and, with
Hadamards, a CNOT between the two fluxoniums.
"""
from pathlib import Path

from fluxcr import gates
from fluxcr.cli import CalibrationStore, calibrated
from fluxcr.config import default_config

cfg = default_config(three_qubit=True)
ds = cfg.system()
store = CalibrationStore(Path(__file__).resolve().parents[1] / "data" / "calibrations")
B1 = calibrated(cfg, 1, 50.0, store, ds=ds).report.comp_block
B2 = calibrated(cfg, 2, 50.0, store, ds=ds).report.comp_block

# %%
# Parity check CX_1 then CX_2 (PC12) and the reverse order (PC21).
# The even and odd sectors are scored separately, then the full 8x8 map.
for name, rep in (("PC12", gates.parity_check(B1, B2, 1)), ("PC21", gates.parity_check(B2, B1, 2))):
    print(f"{name}: F_e {rep.F_e:.6f}  F_o {rep.F_o:.6f}  F_8x8 {rep.F_8x8:.6f}")
    print("   leaked groups:", {k: f"{v:.1e}" for k, v in rep.groups.items()})

# %%
# Compound CNOT between F1 (control) and F2 (target). The transmon should
# return to |0>. E1 is the weight left on the transmon's |1>.
r = gates.compound_cx(B1, B2, 1)
print(f"E0 {r['E0']:.3e}  E01 {r['E01']:.3e}  E1 {r['E1']:.3e}  E_s {r['E_s']:.3e}")
worst = max(r["state_errors"], key=r["state_errors"].get)
print(f"worst product state {worst}: {r['state_errors'][worst]:.3e}")

# %%
# Transmon readout after a CX gate: assignment fidelity with and without a
# QND assumption. The two agree because leakage out of the block is tiny.
for alpha, B in ((1, B1), (2, B2)):
    for beta in (0, 1):
        ro = gates.readout_fidelities(B, beta, alpha)
        print(f"CX{alpha} spectator {beta}: F_QND {ro['F_QND']:.7f}  "
              f"F_nonQND {ro['F_nonQND']:.7f}  E_read {ro['E_read']:.2e}")
