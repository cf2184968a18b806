import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_unitary
from loqc_grover.errors import (
    DegenerateStateError,
    PhotonCapError,
    RegistryConflictError,
    RegistryError,
    ValidationError,
)
from loqc_grover.fock import (
    ModeLabel,
    ModeRegistry,
    StateVector,
    apply_mode_unitary,
    basis_state,
    check_unitary,
    fock_basis,
    inner_product,
    normalize,
    permanent,
    permanent_naive,
    permute_modes,
    tensor,
    total_photons,
    transition_amplitude_permanent,
    vacuum,
)

BS50 = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def registry(n_rails):
    return ModeRegistry.from_rails([f"r{i}" for i in range(n_rails)])


def test_registry_lookup_and_order():
    reg = ModeRegistry.from_rails(["a", "b"])
    assert len(reg) == 4
    assert reg.index("a", "H") == 0 and reg.index("b", "V") == 3
    assert reg.rail_modes("b") == (2, 3)
    assert reg.rails == ("a", "b")
    assert reg[1] == ModeLabel("a", "V")


def test_registry_errors():
    reg = ModeRegistry.from_rails(["a"])
    with pytest.raises(RegistryError, match="zz"):
        reg.index("zz", "H")
    with pytest.raises(RegistryError):
        ModeRegistry([ModeLabel("a", "H"), ModeLabel("a", "H")])
    with pytest.raises(RegistryConflictError):
        reg.concat(ModeRegistry.from_rails(["a"]))


def test_state_validation():
    reg = registry(1)
    with pytest.raises(ValidationError):
        StateVector(reg, {(1,): 1.0})
    with pytest.raises(ValidationError):
        StateVector(reg, {(-1, 1): 1.0})
    with pytest.raises(PhotonCapError):
        StateVector(reg, {(3, 0): 1.0}, photon_cap=2)
    pruned = StateVector(reg, {(1, 0): 1.0, (0, 1): 1e-20})
    assert len(pruned) == 1


def test_normalize_zero_vector():
    with pytest.raises(DegenerateStateError):
        normalize(StateVector(registry(1), {}))


def test_tensor_and_inner_product():
    a = basis_state(ModeRegistry.from_rails(["a"]), (1, 0))
    b = basis_state(ModeRegistry.from_rails(["b"]), (0, 1))
    ab = tensor(a, b)
    assert ab.amplitude((1, 0, 0, 1)) == 1
    assert inner_product(ab, ab) == pytest.approx(1)
    assert total_photons(ab) == {2}
    with pytest.raises(RegistryError):
        inner_product(a, b)


def test_check_unitary_rejects():
    with pytest.raises(ValidationError):
        check_unitary(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValidationError):
        check_unitary(np.ones((2, 3)))


def test_hong_ou_mandel_both_engines():
    reg = registry(1)
    out = apply_mode_unitary(basis_state(reg, (1, 1)), BS50, (0, 1))
    assert abs(out.amplitude((1, 1))) < 1e-12
    assert abs(out.amplitude((2, 0))) ** 2 == pytest.approx(0.5, abs=1e-12)
    assert abs(transition_amplitude_permanent((1, 1), (1, 1), BS50)) < 1e-12
    assert abs(transition_amplitude_permanent((1, 1), (1, 1), BS50, naive=True)) < 1e-12


def test_permanent_known_values():
    assert permanent(np.ones((3, 3))) == pytest.approx(6)
    assert permanent(np.eye(4)) == pytest.approx(1)
    assert permanent(np.zeros((0, 0))) == 1
    a = np.array([[1, 2], [3, 4]])
    assert permanent(a) == pytest.approx(10)


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_permanent_ryser_matches_naive(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert abs(permanent(a) - permanent_naive(a)) < 1e-9 * max(1.0, abs(permanent_naive(a)))


@given(st.integers(2, 5), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_engines_agree(m, n, seed):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, m)
    basis = fock_basis(m, n)
    inp = basis[rng.integers(len(basis))]
    reg = ModeRegistry([ModeLabel(f"r{i // 2}", "HV"[i % 2]) for i in range(m)])
    out = apply_mode_unitary(basis_state(reg, inp), u, range(m))
    for occ in basis:
        assert abs(out.amplitude(occ) - transition_amplitude_permanent(inp, occ, u)) < 1e-10


@given(st.integers(1, 3), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_unitary_preserves_norm_and_photon_number(rails, n, seed):
    rng = np.random.default_rng(seed)
    reg = registry(rails)
    m = len(reg)
    basis = fock_basis(m, n)
    amps = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    state = normalize(StateVector(reg, dict(zip(basis, amps))))[1]
    out = apply_mode_unitary(state, random_unitary(rng, m), range(m))
    assert out.norm() == pytest.approx(1.0, abs=1e-10)
    assert total_photons(out) <= {n}


@given(st.integers(0, 2**32 - 1))
def test_composition_of_unitaries(seed):
    rng = np.random.default_rng(seed)
    reg = registry(2)
    u, v = random_unitary(rng, 4), random_unitary(rng, 4)
    state = basis_state(reg, (1, 0, 1, 1))
    step = apply_mode_unitary(apply_mode_unitary(state, u, range(4)), v, range(4))
    once = apply_mode_unitary(state, v @ u, range(4))
    for occ in fock_basis(4, 3):
        assert abs(step.amplitude(occ) - once.amplitude(occ)) < 1e-10


def test_unitary_on_subset_of_modes():
    reg = registry(2)
    state = basis_state(reg, (1, 0, 0, 1))
    out = apply_mode_unitary(state, BS50, (1, 3))
    assert out.amplitude((1, 0, 0, 1)) == pytest.approx(-1 / math.sqrt(2))
    assert out.amplitude((1, 1, 0, 0)) == pytest.approx(1 / math.sqrt(2))


def test_apply_mode_unitary_rejects_bad_binding():
    state = vacuum(registry(1))
    with pytest.raises(ValueError):
        apply_mode_unitary(state, BS50, (0,))
    with pytest.raises(ValueError):
        apply_mode_unitary(state, BS50, (0, 0))
    with pytest.raises(RegistryError):
        apply_mode_unitary(state, BS50, (0, 5))


def test_permute_modes_is_exact_swap():
    state = basis_state(registry(2), (2, 0, 1, 0))
    swapped = permute_modes(state, {0: 2, 2: 0})
    assert swapped.amplitude((1, 0, 2, 0)) == 1
    with pytest.raises(ValueError):
        permute_modes(state, {0: 1})


def test_fock_basis_size():
    assert len(fock_basis(4, 2)) == math.comb(5, 2)
    assert fock_basis(2, 0) == [(0, 0)]


def test_transition_amplitude_photon_mismatch_is_zero():
    assert transition_amplitude_permanent((1, 0), (1, 1), BS50) == 0
