import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from fluxcr.circuits import (ConvergenceError, QubitSpec, build_qubit_hamiltonian, diagonalize_qubit,
                             displacement_matrix, fluxonium, transition_frequency, transmon,
                             transmon_oscillator_energies)


def test_spec_validation():
    with pytest.raises(ValueError):
        QubitSpec("fluxonium", E_C=1.4, E_J=4.0, E_L=0.0)
    with pytest.raises(ValueError):
        QubitSpec("transmon", E_C=-0.25, E_J=18)
    with pytest.raises(ValueError):
        transmon(keep_levels=8, basis_size=9)  # too small to converge
    with pytest.raises(ValueError):
        QubitSpec("squid", E_C=1, E_J=1)


def test_harmonic_limit():
    # E_J -> 0 leaves the bare oscillator
    eq = diagonalize_qubit(fluxonium(1e-9, E_C=1.4, E_L=0.9))
    w = np.sqrt(8 * 1.4 * 0.9)
    assert np.allclose(np.diff(eq.energies), w, atol=1e-9)


def test_transmon_asymptotic():
    eq = diagonalize_qubit(transmon(18.0, 0.25))
    assert abs(transition_frequency(eq, 0, 1) - (np.sqrt(8 * 0.25 * 18) - 0.25)) < 0.05


@pytest.mark.parametrize("spec,f01,f12,tol", [
    (fluxonium(3.95), 0.88, 3.98, 0.02),
    (transmon(), 5.74, 5.46, 0.02),
    (fluxonium(4.05), 0.85, 4.04, 0.02),
])
def test_device_frequencies(spec, f01, f12, tol):
    eq = diagonalize_qubit(spec)
    assert abs(transition_frequency(eq, 0, 1) - f01) < tol
    assert abs(transition_frequency(eq, 1, 2) - f12) < tol


def test_transition_frequency_basic(device_qubits):
    F1, T, _ = device_qubits
    assert transition_frequency(F1, 2, 2) == 0
    assert transition_frequency(F1, 1, 3) == -transition_frequency(F1, 3, 1)
    f02 = transition_frequency(T, 0, 2)
    assert abs(f02 - 11.20) < 0.04
    assert np.isclose(f02, transition_frequency(T, 0, 1) + transition_frequency(T, 1, 2))
    with pytest.raises(IndexError):
        transition_frequency(T, 0, 8)


@pytest.mark.parametrize("spec", [fluxonium(3.95), transmon()])
def test_hermitian(spec):
    H, n = build_qubit_hamiltonian(spec)
    assert np.abs(H - H.conj().T).max() <= 1e-12 * np.abs(H).max()
    eq = diagonalize_qubit(spec)
    m = eq.n_elems
    assert np.abs(m - m.conj().T).max() <= 1e-12 * np.abs(m).max()
    assert np.all(np.diff(eq.energies) > 0)
    assert eq.energies[0] == 0


def test_parity_selection_rule(device_qubits):
    for eq in (device_qubits[0], device_qubits[2]):
        n = eq.n_elems
        for i in range(eq.levels):
            for j in range(eq.levels):
                if (i + j) % 2 == 0:
                    assert abs(n[i, j]) <= 1e-10
        assert abs(n[0, 1]) > 0


@pytest.mark.parametrize("spec", [fluxonium(3.95), fluxonium(4.05), transmon()])
def test_basis_convergence(spec):
    diagonalize_qubit(spec, check_convergence=True)


def test_convergence_error_raised():
    with pytest.raises(ConvergenceError):
        diagonalize_qubit(fluxonium(3.95, basis_size=26), check_convergence=True)


def test_transmon_oscillator_cross_check():
    spec = transmon(18.0, 0.25)
    eqc = diagonalize_qubit(spec)
    eo = transmon_oscillator_energies(spec)
    assert abs(transition_frequency(eqc, 0, 1) - eo[1]) < 1e-6  # 1 kHz


def test_phase_fixing(device_qubits):
    for eq in device_qubits:
        v = eq.vectors
        k = np.argmax(np.abs(v), axis=0)
        lead = v[k, np.arange(v.shape[1])]
        assert np.allclose(lead.imag, 0, atol=1e-14) and np.all(lead.real > 0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0, 2 * np.pi))
@example(2.2250738585e-313, 0.0)  # subnormal amplitude
def test_displacement_unitary_core(r, th):
    # the low corner of a large truncated displacement is unitary to high accuracy
    a = r * np.exp(1j * th)
    D = displacement_matrix(80, a)
    sub = D[:, :20]
    assert np.allclose(sub.conj().T @ sub, np.eye(20), atol=1e-10)
    # D(a)^dag = D(-a)
    assert np.allclose(D.conj().T, displacement_matrix(80, -a), atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.floats(2.0, 6.0), st.floats(0.5, 2.0), st.floats(0.5, 1.5))
def test_fluxonium_property(E_J, E_C, E_L):
    eq = diagonalize_qubit(fluxonium(E_J, E_C=E_C, E_L=E_L, keep_levels=6))
    assert np.all(np.diff(eq.energies) > 0)
    n = eq.n_elems
    assert np.abs(n - n.conj().T).max() < 1e-10
    assert abs(n[0, 2]) < 1e-9 and abs(n[0, 1]) > 0
