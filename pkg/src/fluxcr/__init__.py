"""Cross-resonance CNOT gates in coupled fluxonium-transmon circuits."""
from .circuits import QubitSpec, EigenQubit, diagonalize_qubit, fluxonium, transmon, transition_frequency
from .composite import CouplingSpec, DressedSystem, build_system, zz_ff, zz_ft
from .pulses import PulseSpec, propagate
from .gates import GateReport, ParityReport, process_fidelity, phase_correct
from .calibrate import CalibrationResult, optimize_gate, seed_parameters
from .config import SystemConfig, load as load_config, default_config

__all__ = [
    "QubitSpec", "EigenQubit", "diagonalize_qubit", "fluxonium", "transmon", "transition_frequency",
    "CouplingSpec", "DressedSystem", "build_system", "zz_ff", "zz_ft",
    "PulseSpec", "propagate",
    "GateReport", "ParityReport", "process_fidelity", "phase_correct",
    "CalibrationResult", "optimize_gate", "seed_parameters",
    "SystemConfig", "load_config", "default_config",
]
