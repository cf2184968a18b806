import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from loqc_grover.elements import (
    GATE_WAVEPLATES,
    Beamsplitter,
    PhaseDelay,
    PolarizingBeamsplitter,
    Waveplate,
    apply_element,
    apply_elements,
    beamsplitter_unitary,
    compose,
    merge_waveplates,
    one_qubit_gate,
    phase_delay_unitary,
    waveplate_unitary,
)
from loqc_grover.errors import RegistryError
from loqc_grover.fock import ModeRegistry, basis_state, fock_basis

s = 1 / math.sqrt(2)
TABLE = {
    "R": np.array([[s, s], [s, -s]]),
    "T": np.diag([1, cmath.exp(1j * math.pi / 4)]),
    "X": np.array([[0, 1], [1, 0]]),
    "Z": np.diag([1, -1]),
}
angles = st.floats(-360, 360, allow_nan=False)


@pytest.mark.parametrize("name", sorted(TABLE))
def test_gate_waveplates_match_table(name):
    phi, alpha = GATE_WAVEPLATES[name]
    assert np.max(np.abs(waveplate_unitary(phi, alpha) - TABLE[name])) < 1e-12


def test_y_is_y_up_to_global_phase():
    y = compose(one_qubit_gate("Y"))
    target = np.array([[0, -1j], [1j, 0]])
    phase = y[1, 0] / target[1, 0]
    assert abs(abs(phase) - 1) < 1e-12
    assert np.max(np.abs(y - phase * target)) < 1e-12


def test_identity_phase_gate():
    (pd,) = one_qubit_gate("I-phase", theta=30.0)
    assert np.allclose(pd.matrix(), cmath.exp(1j * math.radians(30)) * np.eye(2))


def test_unknown_gate():
    with pytest.raises(KeyError):
        one_qubit_gate("S")


@given(angles, angles)
def test_waveplate_unitary(phi, alpha):
    u = waveplate_unitary(phi, alpha)
    assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12)


@given(angles)
def test_zero_retardance_is_identity(alpha):
    assert np.allclose(waveplate_unitary(0.0, alpha), np.eye(2), atol=1e-12)


def test_waveplate_axis_eigenvectors():
    # light polarized along the slow axis only picks up the phase
    u = waveplate_unitary(90.0, 30.0)
    axis = np.array([math.cos(math.radians(30)), math.sin(math.radians(30))])
    assert np.allclose(u @ axis, 1j * axis)


def test_beamsplitter_sign_conventions():
    r, t = 0.6, 0.8
    assert np.allclose(beamsplitter_unitary(r, "B"), [[r, t], [t, -r]])
    assert np.allclose(beamsplitter_unitary(r, "A"), [[-r, t], [t, r]])
    with pytest.raises(ValueError):
        beamsplitter_unitary(1.2)
    with pytest.raises(ValueError):
        beamsplitter_unitary(0.5, "C")
    with pytest.raises(ValueError):
        Beamsplitter("a", "a", 0.5)
    with pytest.raises(ValueError):
        Beamsplitter("a", "b", 0.5, pol="D")


def test_phase_delay_sign():
    assert np.allclose(phase_delay_unitary(90), -1j * np.eye(2))


def test_waveplate_angle_normalisation():
    w = Waveplate("a", alpha=-247.5, phi=540)
    assert w.alpha == pytest.approx(112.5) and w.phi == pytest.approx(180)
    assert np.allclose(w.matrix(), Waveplate("a", 112.5, 180).matrix())


def test_pbs_swaps_horizontal_modes():
    reg = ModeRegistry.from_rails(["a", "b"])
    state = basis_state(reg, (1, 1, 0, 0))
    out = apply_element(state, PolarizingBeamsplitter("a", "b"))
    assert out.amplitude((0, 1, 1, 0)) == 1


def test_polarization_selective_beamsplitter():
    reg = ModeRegistry.from_rails(["a", "b"])
    state = basis_state(reg, (0, 1, 0, 0))
    untouched = apply_element(state, Beamsplitter("a", "b", 0.5, pol="H"))
    assert untouched.amplitude((0, 1, 0, 0)) == 1
    mixed = apply_element(state, Beamsplitter("a", "b", 0.6, "B", pol="V"))
    assert mixed.amplitude((0, 1, 0, 0)) == pytest.approx(0.6)
    assert mixed.amplitude((0, 0, 0, 1)) == pytest.approx(0.8)


def test_element_on_unknown_rail():
    state = basis_state(ModeRegistry.from_rails(["a"]), (1, 0))
    with pytest.raises(RegistryError):
        apply_element(state, Waveplate("zz", 0, 180))
    with pytest.raises(RegistryError):
        apply_element(state, PolarizingBeamsplitter("a", "zz"))


def test_compose_order_and_type():
    x, z = one_qubit_gate("X"), one_qubit_gate("Z")
    assert np.allclose(compose(x + z), TABLE["Z"] @ TABLE["X"])
    with pytest.raises(TypeError):
        compose([PolarizingBeamsplitter("a", "b")])


def test_rz_cannot_merge():
    # the product of two half-wave plates is a rotation, never a single plate
    run = one_qubit_gate("R", "q") + one_qubit_gate("Z", "q")
    merged = merge_waveplates(run)
    assert len(merged) == 2
    assert np.allclose(compose(merged), compose(run), atol=1e-12)


def test_merge_cancels_and_folds():
    r = one_qubit_gate("R", "q")
    assert merge_waveplates(r + r) == []
    rzr = r + one_qubit_gate("Z", "q") + r
    (plate,) = merge_waveplates(rzr)
    assert np.allclose(plate.matrix(), TABLE["X"], atol=1e-12)


half_wave_runs = st.lists(
    st.tuples(st.sampled_from(["a", "b"]), st.floats(-90, 90, allow_nan=False)), max_size=7
)


@given(half_wave_runs, st.booleans())
def test_merge_preserves_the_circuit(plates, with_bs):
    elements = [Waveplate(rail, alpha, 180) for rail, alpha in plates]
    if with_bs and elements:
        elements.insert(len(elements) // 2, Beamsplitter("a", "b", 0.3, pol="V"))
    elements.append(PhaseDelay("a", 10))
    merged = merge_waveplates(elements)
    assert len(merged) <= len(elements)
    reg = ModeRegistry.from_rails(["a", "b"])
    for occ in fock_basis(4, 2):
        want = apply_elements(basis_state(reg, occ), elements)
        got = apply_elements(basis_state(reg, occ), merged)
        for out in fock_basis(4, 2):
            assert abs(want.amplitude(out) - got.amplitude(out)) < 1e-10
