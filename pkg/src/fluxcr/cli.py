"""Command-line runner: spectra, ZZ sweeps, gate calibrations and gate applications.

Every command writes a CSV table and a JSON run record into ``--out``.
Calibrated pulses are cached in a store directory keyed by the config hash,
so ``parity``, ``compound`` and ``readout`` reuse gates produced by ``gate``.

Exit codes: 0 success, 2 config error, 3 convergence failure,
4 resonance or labeling ambiguity.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, is_dataclass
from importlib import metadata
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import calibrate, gates, perturbation
from .circuits import ConvergenceError
from .composite import LabelingAmbiguityError, ftf_label, zz_ff, zz_ft
from .config import ConfigError, SystemConfig, config_hash, from_dict, load
from .pulses import PropagationError, PulseSpec, drive_operator, population_trace, propagate

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_AMBIGUITY = 0, 2, 3, 4

DEFAULT_GRIDS = {"J": "0:40:9", "I": "0:2:9", "EJ": "3.5:4.5:11", "detuning": "-1:1:21"}
EJ_CELLS = ("4.21,4.2,18;4.21,4,18;4.21,3.8,18;4.01,4,18;4.01,3.8,18;3.81,3.8,18;"
            "4.21,4.2,17;4.21,4,17;4.21,3.8,17;4.01,4,17;4.01,3.8,17;3.81,3.8,17;"
            "4.21,4.2,16;4.21,4,16;4.21,3.8,16;4.01,4,16;4.01,3.8,16;3.81,3.8,16")
EJ_BIAS = 0.01  # GHz added to F1 when the fluxonium E_J values coincide
EJ_OFFSET = 0.05  # F1/F2 sit at E_J -/+ this on the locked E_J axis


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# ------------------------------------------------------------------ grids

def parse_grid(spec: str) -> np.ndarray:
    """``start:stop:num`` (inclusive linspace) or a comma list."""
    spec = spec.strip()
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            return np.linspace(float(a), float(b), int(n))
        return np.array([float(x) for x in spec.split(",") if x.strip()])
    except ValueError:
        raise ConfigError(f"bad grid spec {spec!r}") from None


def parse_cells(spec: str) -> List[tuple]:
    """Semicolon-separated ``E_J1,E_J2,E_JT`` triples."""
    cells = []
    for part in spec.split(";"):
        if not part.strip():
            continue
        vals = [float(x) for x in part.split(",")]
        if len(vals) != 3:
            raise ConfigError(f"cell {part!r} needs three values E_J1,E_J2,E_JT")
        cells.append(tuple(vals))
    return cells


def _map(fn, items: Sequence, workers: int) -> list:
    """Ordered map, fanned out to processes when ``workers > 1``."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------------ records

def _jsonable(x):
    if is_dataclass(x) and not isinstance(x, type):
        x = asdict(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": x.real.tolist(), "im": x.imag.tolist()}
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, float) and not np.isfinite(x):
        return None
    return x


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.chmod(tmp, 0o644)  # mkstemp creates 0600
    os.replace(tmp, path)


def write_csv(path: Path, rows: List[dict], cfg_hash: str):
    """Rows share one header; every row carries the config hash."""
    path.parent.mkdir(parents=True, exist_ok=True)
    header: List[str] = []
    for r in rows:
        header += [k for k in r if k not in header]
    header.append("config_hash")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=header)
        w.writeheader()
        for r in rows:
            w.writerow({**{k: _fmt(v) for k, v in r.items()}, "config_hash": cfg_hash})


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


@dataclass
class RunRecord:
    command: str
    argv: List[str]
    config: SystemConfig
    results: dict
    evidence: dict

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "argv": self.argv,
            "config_hash": self.config.hash(),
            "config": self.config.tree,
            "results": self.results,
            "integrator_evidence": self.evidence,
            "version": version(),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }

    def write(self, out: Path, name: Optional[str] = None) -> Path:
        path = Path(out) / f"{name or self.command}.json"
        _atomic_write(path, json.dumps(_jsonable(self.as_dict()), indent=1))
        return path


# ------------------------------------------------------------- calibration store

class CalibrationStore:
    """Calibrated pulses on disk, one JSON file per (config, gate, t_g, seeds)."""

    def __init__(self, root):
        self.root = Path(root)

    @staticmethod
    def key(cfg: SystemConfig, alpha: int, t_g: float, seeds: Optional[dict] = None) -> str:
        seeds = {k: v for k, v in (seeds or {}).items() if v is not None}
        tree = {"physics": cfg.physics_tree(), "optimizer": cfg.optimizer,
                "alpha": int(alpha), "t_g": float(t_g), "seeds": seeds}
        return config_hash(tree)

    def path(self, cfg, alpha, t_g, seeds=None) -> Path:
        return self.root / f"cx{alpha}_tg{float(t_g):g}_{self.key(cfg, alpha, t_g, seeds)}.json"

    def get(self, cfg, alpha, t_g, seeds=None) -> Optional[dict]:
        p = self.path(cfg, alpha, t_g, seeds)
        if not p.exists():
            return None
        with open(p) as fh:
            return json.load(fh)

    def put(self, cfg, alpha, t_g, result: calibrate.CalibrationResult, seeds=None) -> Path:
        d = result.as_dict()
        d.pop("trace")
        d["config_hash"] = cfg.hash()
        d["alpha"], d["t_g"] = int(alpha), float(t_g)
        p = self.path(cfg, alpha, t_g, seeds)
        _atomic_write(p, json.dumps(_jsonable(d), indent=1))
        return p


def _gate_alpha(cfg: SystemConfig, alpha: int) -> int:
    if not cfg.three_qubit and alpha != 1:
        raise ConfigError("the two-qubit system only has CX_1")
    return alpha


def calibrated(cfg: SystemConfig, alpha: int, t_g: float, store: Optional[CalibrationStore] = None,
               seeds: Optional[dict] = None, ds=None) -> calibrate.CalibrationResult:
    """Calibrated ``CX_alpha`` at ``t_g``, from the store when available.

    Cached pulses are re-propagated, so the returned report is recomputed
    rather than read back.
    """
    alpha = _gate_alpha(cfg, alpha)
    ds = cfg.system() if ds is None else ds
    opt = cfg.optimizer
    hit = store.get(cfg, alpha, t_g, seeds) if store is not None else None
    if hit is not None:
        p = hit["pulse"]
        pulse = PulseSpec(p["epsilon"], p["eta"], p["omega_d"], p["t_g"], p["t_r"], p["active"])
        report = calibrate.evaluate_pulse(ds, pulse, dt=cfg.dt, e_max=cfg.e_max)
        return calibrate.CalibrationResult(pulse, report, hit["seed"], [], hit["converged"],
                                           hit.get("stripped_error", np.nan), None, hit.get("n_evals", 0))
    res = calibrate.optimize_gate(ds, alpha, t_g, seeds=seeds, budget=opt["budget"], t_r=opt["t_r_ns"],
                                  dt=cfg.dt, e_max=cfg.e_max, fatol=opt["fatol"])
    if store is not None:
        store.put(cfg, alpha, t_g, res, seeds)
    return res


def _calibrate_job(args):
    tree, source, alpha, t_g, root, seeds = args
    cfg = from_dict(tree, source)
    store = CalibrationStore(root) if root else None
    res = calibrated(cfg, alpha, t_g, store, seeds)
    return res.pulse, res.report, res.converged, res.stripped_error, res.n_evals


def _calibrate_many(cfg, jobs, store, workers, seeds=None):
    root = str(store.root) if store is not None else None
    args = [(cfg.tree, cfg.source, a, t, root, seeds) for a, t in jobs]
    return _map(_calibrate_job, args, workers)


def _budget_row(report: gates.GateReport) -> dict:
    b = report.budget
    row = {"error": report.error_total, "fidelity": report.fidelity,
           "dark": b["dark"], "flip": b["flip"], "leak": b["leak"]}
    if "phase" in b:
        row.update(b["phase"])
    return row


# ------------------------------------------------------------------- commands

def cmd_spectrum(cfg: SystemConfig, args) -> int:
    ds = cfg.system()
    comp = set(ds.comp_labels())
    rows = [{"label": "".join(map(str, lab)), "energy_GHz": float(e), "overlap_quality": float(q),
             "computational": int(lab in comp)}
            for lab, e, q in zip(ds.labels, ds.energies, ds.overlap_quality)]
    write_csv(args.out / "spectrum.csv", rows, cfg.hash())
    RunRecord("spectrum", args.argv, cfg, {"rows": len(rows), "order": ds.order}, {}).write(args.out)
    return EXIT_OK


def _zz_point(job):
    tree, source, axis, x = job
    cfg = from_dict(tree, source)
    if axis == "J":
        cfg = cfg.updated(**{"coupling.J1_MHz": x, "coupling.J2_MHz": x})
    elif axis == "I":
        cfg = cfg.updated(**{"coupling.I_MHz": x})
    else:
        over = {"qubits.F1.E_J_GHz": x - EJ_OFFSET}
        if cfg.three_qubit:
            over["qubits.F2.E_J_GHz"] = x + EJ_OFFSET
        cfg = cfg.updated(**over)
    row = {"axis": axis, "value": x, "status": "ok"}
    try:
        eq = cfg.eigen_qubits()
        ds = cfg.system()
        J = cfg.coupling.J1
        if cfg.three_qubit:
            row.update(f_zz0_Hz=zz_ff(ds, 0), f_zz1_Hz=zz_ff(ds, 1),
                       f_zz_ft_s0_Hz=zz_ft(ds, 1, 0), f_zz_ft_s1_Hz=zz_ft(ds, 1, 1))
            lv = perturbation.pt_energies_second_order(eq, J, truncation=cfg.truncation)
            row.update(pt_zz_ft_s0_Hz=perturbation.zz_ft_second_order(lv, True, 0),
                       pt_zz_ft_s1_Hz=perturbation.zz_ft_second_order(lv, True, 1),
                       pt_zz0_Hz=perturbation.zz_ff_perturbative(eq, cfg.coupling, 0, cfg.truncation),
                       pt_zz1_Hz=perturbation.zz_ff_perturbative(eq, cfg.coupling, 1, cfg.truncation))
        else:
            row.update(f_zz_ft_Hz=zz_ft(ds))
            lv = perturbation.pt_energies_second_order(eq, J, truncation=cfg.truncation)
            row.update(pt_zz_ft_Hz=perturbation.zz_ft_second_order(lv, False))
    except (LabelingAmbiguityError, perturbation.ResonanceError) as exc:
        row["status"] = f"gap: {exc}"
    return row


def cmd_zz(cfg: SystemConfig, args) -> int:
    axis = args.axis
    grid = parse_grid(args.grid or DEFAULT_GRIDS[axis])
    rows = _map(_zz_point, [(cfg.tree, cfg.source, axis, float(x)) for x in grid], args.workers)
    write_csv(args.out / f"zz_{axis}.csv", rows, cfg.hash())
    gaps = [r["value"] for r in rows if r["status"] != "ok"]
    RunRecord("zz", args.argv, cfg, {"axis": axis, "grid": grid, "gaps": gaps}, {}).write(args.out, f"zz_{axis}")
    return EXIT_OK


def _tg_list(args) -> np.ndarray:
    return parse_grid(args.grid) if args.grid else np.array([args.tg])


def _seeds(args) -> Optional[dict]:
    s = {"eta0": args.seed_eta, "epsilon0": args.seed_eps, "omega0": args.seed_freq}
    s = {k: v for k, v in s.items() if v is not None}
    return s or None


def _trace_label(cfg: SystemConfig, alpha: int):
    # bright initial state: fluxoniums excited, transmon in |0>
    if not cfg.three_qubit:
        return (1, 0)
    return (0, 1, 1)


def cmd_gate(cfg: SystemConfig, args) -> int:
    alpha = _gate_alpha(cfg, args.alpha)
    tgs = _tg_list(args)
    store = args.store
    results = _calibrate_many(cfg, [(alpha, float(t)) for t in tgs], store, args.workers, _seeds(args))
    ds = cfg.system()
    rows, recs, evidence = [], [], {}
    ok = True
    for t, (pulse, report, conv, strip, nev) in zip(tgs, results):
        ok &= bool(conv)
        rows.append({"alpha": alpha, "t_g": float(t), **_budget_row(report), "stripped_error": strip,
                     "epsilon": pulse.epsilon, "eta": pulse.eta, "omega_d": pulse.omega_d,
                     "converged": int(conv), "n_evals": nev})
        tag = f"a{alpha}_tg{float(t):g}"
        if not args.no_trace:
            tr = population_trace(ds, pulse, _trace_label(cfg, alpha), dt=cfg.dt, e_max=cfg.e_max)
            trows = [{"t_ns": tt, **{"P_" + "".join(map(str, lab)): float(p) for lab, p in zip(tr["labels"], pp)}}
                     for tt, pp in zip(tr["t"], tr["populations"])]
            write_csv(args.out / f"trace_{tag}.csv", trows, cfg.hash())
        U = np.abs(report.comp_block)
        labels = ["".join(map(str, lab)) for lab in ds.comp_labels()]
        write_csv(args.out / f"umap_{tag}.csv",
                  [{"out": labels[i], **{labels[j]: U[i, j] for j in range(len(labels))}} for i in range(len(labels))],
                  cfg.hash())
        if args.check_convergence:
            blk = propagate(ds, pulse, tol=cfg.halving_tol, dt=cfg.dt, e_max=cfg.e_max)
            evidence[tag] = {"dt": cfg.dt, "halving_change": blk.convergence, "max_norm": float(blk.norms.max())}
        recs.append({"t_g": float(t), "pulse": pulse, "report": report.as_dict(), "converged": conv})
    write_csv(args.out / f"gate_a{alpha}.csv", rows, cfg.hash())
    RunRecord("gate", args.argv, cfg, {"gates": recs}, evidence).write(args.out, f"gate_a{alpha}")
    return EXIT_OK if ok else EXIT_CONVERGENCE


def _blocks(cfg, args, tgs):
    """Phase-corrected CX_1 and CX_2 blocks per gate time."""
    if args.ideal:
        return [(gates.ideal_cx(1), gates.ideal_cx(2))] * len(tgs)
    jobs = [(a, float(t)) for t in tgs for a in (1, 2)]
    res = _calibrate_many(cfg, jobs, args.store, args.workers)
    return [(res[2 * k][1].comp_block, res[2 * k + 1][1].comp_block) for k in range(len(tgs))]


def _require_ftf(cfg):
    if not cfg.three_qubit:
        raise ConfigError("this command needs the three-qubit system (qubit F2)")


def cmd_parity(cfg: SystemConfig, args) -> int:
    _require_ftf(cfg)
    tgs = _tg_list(args)
    rows = []
    for t, (b1, b2) in zip(tgs, _blocks(cfg, args, tgs)):
        for name, (A, B, a) in {"PC12": (b1, b2, 1), "PC21": (b2, b1, 2)}.items():
            r = gates.parity_check(A, B, a)
            F = (r.F_e, r.F_o, r.F_8x8)
            rows.append({"t_g": float(t), "order": name, "F_e": r.F_e, "F_o": r.F_o, "F_8x8": r.F_8x8,
                         "spread": max(F) - min(F), **{f"group_{k}": v for k, v in r.groups.items()}})
    write_csv(args.out / "parity.csv", rows, cfg.hash())
    RunRecord("parity", args.argv, cfg, {"rows": rows, "ideal": args.ideal}, {}).write(args.out)
    return EXIT_OK


def cmd_compound(cfg: SystemConfig, args) -> int:
    _require_ftf(cfg)
    tgs = _tg_list(args)
    rows = []
    for t, (b1, b2) in zip(tgs, _blocks(cfg, args, tgs)):
        for name, (A, B, a) in {"CX12": (b1, b2, 1), "CX21": (b2, b1, 2)}.items():
            r = gates.compound_cx(A, B, a)
            rows.append({"t_g": float(t), "gate": name, "E0": r["E0"], "E01": r["E01"], "E1": r["E1"],
                         "E_s": r["E_s"], "E_s_min": r["E_s_min"], "E_s_max": r["E_s_max"]})
    write_csv(args.out / "compound.csv", rows, cfg.hash())
    RunRecord("compound", args.argv, cfg, {"rows": rows, "ideal": args.ideal}, {}).write(args.out)
    return EXIT_OK


def cmd_readout(cfg: SystemConfig, args) -> int:
    alpha = _gate_alpha(cfg, args.alpha)
    tgs = _tg_list(args)
    if args.ideal:
        reports = [gates.phase_correct(gates.ideal_cx(alpha, cfg.three_qubit), alpha)] * len(tgs)
    else:
        reports = [r[1] for r in _calibrate_many(cfg, [(alpha, float(t)) for t in tgs], args.store, args.workers)]
    rows = []
    for t, rep in zip(tgs, reports):
        for beta in ((0, 1) if cfg.three_qubit else (0,)):
            r = gates.readout_fidelities(rep.comp_block, beta, alpha)
            rows.append({"t_g": float(t), "alpha": alpha, "beta": beta, **r, "gate_error": rep.error_total})
    write_csv(args.out / f"readout_a{alpha}.csv", rows, cfg.hash())
    RunRecord("readout", args.argv, cfg, {"rows": rows, "ideal": args.ideal}, {}).write(args.out, f"readout_a{alpha}")
    return EXIT_OK


def nearest_collision(ds, pulse: PulseSpec, rel: float = 1e-3) -> float:
    """Smallest detuning (GHz) between the drive and a driven leakage transition.

    Counts transitions from computational states to non-computational states
    whose drive element exceeds ``rel`` times the bright element.
    """
    D = np.abs(drive_operator(ds, pulse))
    comp = ds.comp_indices()
    other = np.setdiff1d(np.arange(ds.dim), comp)
    bright = max(D[u, l] for l, u in calibrate._bright_pairs(ds, pulse.active))
    det = np.abs(ds.energies[other][:, None] - ds.energies[comp][None, :] - pulse.omega_d)
    det[D[np.ix_(other, comp)] < rel * bright] = np.inf
    return float(det.min())


def ej_cell(cfg: SystemConfig, cell, t_g: float = 50.0, store=None) -> dict:
    """One stability-grid point: re-diagonalize and calibrate ``CX_1``."""
    ej1, ej2, ejt = cell
    bias = EJ_BIAS if ej1 == ej2 else 0.0
    c = cfg.updated(**{"qubits.F1.E_J_GHz": ej1 + bias, "qubits.F2.E_J_GHz": ej2, "qubits.T.E_J_GHz": ejt})
    ds = c.system()
    res = calibrated(c, 1, t_g, store, ds=ds)
    gap = nearest_collision(ds, res.pulse)
    return {"E_J1": ej1, "E_J2": ej2, "E_JT": ejt, "bias_GHz": bias, "error_1e-5": res.error * 1e5,
            "converged": int(res.converged), "nearest_collision_MHz": gap * 1e3,
            "resonance_flag": int(gap < 0.05), **{k: v for k, v in _budget_row(res.report).items() if k != "fidelity"}}


def _ej_job(args):
    tree, source, cell, t_g, root = args
    return ej_cell(from_dict(tree, source), cell, t_g, CalibrationStore(root) if root else None)


def cmd_ej_stability(cfg: SystemConfig, args) -> int:
    _require_ftf(cfg)
    cells = parse_cells(args.grid or EJ_CELLS)
    root = str(args.store.root) if args.store is not None else None
    rows = _map(_ej_job, [(cfg.tree, cfg.source, c, args.tg, root) for c in cells], args.workers)
    write_csv(args.out / "ej_stability.csv", rows, cfg.hash())
    RunRecord("ej-stability", args.argv, cfg, {"rows": rows}, {}).write(args.out, "ej_stability")
    return EXIT_OK if all(r["converged"] for r in rows) else EXIT_CONVERGENCE


def cmd_detuning_sweep(cfg: SystemConfig, args) -> int:
    alpha = _gate_alpha(cfg, args.alpha)
    ds = cfg.system()
    res = calibrated(cfg, alpha, args.tg, args.store, _seeds(args), ds=ds)
    deltas = parse_grid(args.grid or DEFAULT_GRIDS["detuning"]) * 1e-3  # MHz -> GHz
    sw = calibrate.detuning_sweep(ds, alpha, res.pulse, deltas, dt=cfg.dt, e_max=cfg.e_max)
    rows = []
    for k, d in enumerate(sw["delta"]):
        row = {"delta_MHz": d * 1e3, "error": sw["error"][k]}
        row.update({f"bright_fail_s{b}": v[k] for b, v in sw["bright_fail"].items()})
        rows.append(row)
    write_csv(args.out / f"detuning_a{alpha}.csv", rows, cfg.hash())
    summary = {"minima_MHz": {b: m * 1e3 for b, m in sw["minima"].items()}, "pulse": res.pulse,
               "calibrated_error": res.error}
    if "separation" in sw:
        summary["separation_MHz"] = sw["separation"] * 1e3
        summary["optimum_between"] = sw["optimum_between"]
        # |f_{011-111} - f_{010-110}|, twice the effective detuning
        f = lambda s: ds.energy(ftf_label(1, 1, s, alpha)) - ds.energy(ftf_label(0, 1, s, alpha))
        summary["bright_split_MHz"] = abs(f(1) - f(0)) * 1e3
    RunRecord("detuning-sweep", args.argv, cfg, summary, {}).write(args.out, f"detuning_a{alpha}")
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "zz": cmd_zz,
    "gate": cmd_gate,
    "parity": cmd_parity,
    "compound": cmd_compound,
    "readout": cmd_readout,
    "ej-stability": cmd_ej_stability,
    "detuning-sweep": cmd_detuning_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML system config (default: built-in device)")
    common.add_argument("--out", default="runs", help="output directory")
    common.add_argument("--store", help="calibration cache (default: <out>/calibrations)")
    common.add_argument("--no-store", action="store_true", help="never read or write cached calibrations")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--tg", type=float, default=50.0, help="gate time in ns")
    common.add_argument("--alpha", type=int, choices=(1, 2), default=1, help="control fluxonium")
    common.add_argument("--grid", help="sweep grid: start:stop:num, a comma list, or E_J cells a,b,c;...")
    common.add_argument("--seed-eta", type=float)
    common.add_argument("--seed-eps", type=float, help="drive scale seed (GHz)")
    common.add_argument("--seed-freq", type=float, help="drive frequency seed (GHz)")
    common.add_argument("--ideal", action="store_true", help="use exact CX matrices (dry run)")

    p = argparse.ArgumentParser(prog="fluxcr", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "zz":
            sp.add_argument("--axis", choices=("J", "I", "EJ"), default="J")
        if name == "gate":
            sp.add_argument("--no-trace", action="store_true", help="skip population traces")
            sp.add_argument("--check-convergence", action="store_true",
                            help="re-run the final pulse at dt/2 and record the change")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    args.out = Path(args.out)
    if args.no_store:
        args.store = None
    else:
        args.store = CalibrationStore(args.store or args.out / "calibrations")
    try:
        cfg = load(args.config)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PropagationError, ConvergenceError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (LabelingAmbiguityError, perturbation.ResonanceError) as exc:
        print(f"resonance or labeling ambiguity: {exc}", file=sys.stderr)
        return EXIT_AMBIGUITY


if __name__ == "__main__":
    sys.exit(main())
