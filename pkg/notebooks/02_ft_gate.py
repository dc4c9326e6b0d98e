"""
Cross-resonance CNOT on a fluxonium-transmon pair
=================================================

Drive the fluxonium at the transmon frequency, mixed with a small direct
transmon drive that cancels the transmon response when the fluxonium is in
|0>. Calibrate the three pulse parameters, then read the error budget.
"""
from pathlib import Path

import numpy as np

from fluxcr import gates
from fluxcr.calibrate import seed_parameters
from fluxcr.cli import CalibrationStore, calibrated
from fluxcr.config import default_config
from fluxcr.pulses import population_trace

cfg = default_config(three_qubit=False)
ds = cfg.system()
store = CalibrationStore(Path(__file__).resolve().parents[1] / "data" / "calibrations")

# %%
# Seeds: the darkening ratio eta0 comes from the dressed charge elements.
seed = seed_parameters(ds, 1, 50.0)
print({k: f"{v:.6g}" for k, v in seed.items()})

# %%
# Nelder-Mead on the phase-stripped error, then exact virtual-Z correction.
# The first run takes a few minutes; later runs reuse the stored pulse.
res = calibrated(cfg, 1, 50.0, store, ds=ds)
p = res.pulse
print(f"epsilon = {p.epsilon:.4f}  eta = {p.eta:.4e}  omega_d = {p.omega_d:.6f} GHz")
print(f"fidelity {res.report.fidelity:.7f}  error {res.error:.2e}")

# %%
# Error budget. The terms add up to the total error to second order.
def flat(b, pre=""):
    for k, v in b.items():
        if isinstance(v, dict):
            yield from flat(v, pre + k + ".")
        else:
            yield pre + k, v

for k, v in flat(res.report.budget):
    print(f"{k:16s} {v: .3e}")
print(f"{'sum':16s} {res.report.budget_sum(): .3e}")

# %%
# Populations during the pulse, starting from |1_F 0_T>: the transmon flips.
# Labels are (fluxonium, transmon); states that stay below 1% are dropped.
tr = population_trace(ds, p, (1, 0), n_samples=11, e_max=cfg.e_max)
print("t (ns) " + " ".join(f"{str(l):>10s}" for l in tr["labels"]))
for t, row in zip(tr["t"], tr["populations"]):
    print(f"{t:6.1f} " + " ".join(f"{v:10.4f}" for v in row))

# %%
# Magnitudes of the computational block against the ideal CNOT.
np.set_printoptions(precision=4, suppress=True)
print(np.abs(res.report.comp_block))
print("ideal:")
print(np.abs(gates.CNOT))
