"""
CX gates with a spectator fluxonium
===================================

In the FTF device each CX gate sees the other fluxonium as a spectator. The
static T-F ZZ splits the bright transmon line in two and the drive has to
sit between them.
"""
from pathlib import Path

import numpy as np

from fluxcr.calibrate import detuning_sweep
from fluxcr.cli import CalibrationStore, calibrated
from fluxcr.composite import zz_ft
from fluxcr.config import default_config

cfg = default_config(three_qubit=True)
ds = cfg.system()
store = CalibrationStore(Path(__file__).resolve().parents[1] / "data" / "calibrations")

# %%
# Calibrated CX_1 and CX_2 at 50 ns (stored pulses; each fresh calibration
# costs several minutes).
for alpha in (1, 2):
    r = calibrated(cfg, alpha, 50.0, store, ds=ds)
    b = r.report.budget
    print(f"CX{alpha}: error {r.error:.3e}  flip {b['flip']:.2e}  "
          f"b_phase {b['phase']['b_phase']:.2e}  d_phase {b['phase']['d_phase']:.2e}")

# %%
# The bright-phase term is set by the spectator ZZ. Over the gate the two
# spectator sectors pick up a relative phase of order 2 pi * ZZ/2 * t_g.
for alpha, beta in ((1, 2), (2, 1)):
    zz = zz_ft(ds, beta)
    print(f"spectator ZZ for CX{alpha}: {zz / 1e3:.1f} kHz, phase scale {np.pi * zz * 50e-9:.3f} rad")

# %%
# Detune the calibrated CX_1 drive. The bright-flip failure for each
# spectator level has its own minimum, and the calibrated frequency lies
# between the two.
r = calibrated(cfg, 1, 50.0, store, ds=ds)
sw = detuning_sweep(ds, 1, r.pulse, np.linspace(-3e-4, 3e-4, 7))
for d, e, f0, f1 in zip(sw["delta"], sw["error"], sw["bright_fail"][0], sw["bright_fail"][1]):
    print(f"delta {d * 1e6:6.0f} kHz  error {e:.2e}  fail(b=0) {f0:.2e}  fail(b=1) {f1:.2e}")
print("minima (kHz):", {b: round(m * 1e6, 1) for b, m in sw["minima"].items()},
      "between:", sw["optimum_between"])

# %%
# Gate-time dependence, using whatever is already in the store.
for t_g in (30, 35, 40, 42, 44, 46, 48, 50, 54, 56, 60, 70):
    hit = store.get(cfg, 1, float(t_g))
    if hit is not None:
        print(f"t_g = {t_g:3d} ns  stored CX1 error {hit['report']['error_total']:.3e}")
