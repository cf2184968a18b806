import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from loqc_grover.qubit_reference import (
    MARKED_ITEMS,
    QubitState,
    abstract_grover_circuit,
    apply_gate,
    gates_unitary,
    grover_reference,
    grover_success_closed_form,
    grover_success_dense,
    optimal_iterations,
    oracle_gates,
    output_correction,
    run_gates,
)


def brute_force_best(N):
    bound = math.ceil(math.pi / (4 * math.asin(1 / math.sqrt(N))) - 1e-9)
    probs = [grover_success_dense(N, k) for k in range(bound + 1)]
    best = max(probs)
    return [k for k, p in enumerate(probs) if p > best - 1e-12], probs


def test_basis_and_probabilities():
    s = QubitState.basis("10")
    assert s.probabilities()["10"] == 1
    assert s.probabilities([1])["0"] == 1
    with pytest.raises(ValueError):
        QubitState.basis("")


def test_cnot_truth_table():
    u = gates_unitary(2, [("CNOT", 0, 1)])
    expected = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    assert np.allclose(u, expected)


def test_unknown_gate():
    with pytest.raises(KeyError):
        apply_gate(QubitState.basis("0"), ("S", 0))


@pytest.mark.parametrize("n, marked", [(2, "01"), (3, "110"), (4, "1011")])
def test_reference_matches_closed_form(n, marked):
    N = 2**n
    for k in range(4):
        dist = grover_reference(n, marked, k)
        assert dist[marked] == pytest.approx(grover_success_closed_form(N, k), abs=1e-10)
        assert sum(p for _, p in dist.items()) == pytest.approx(1, abs=1e-12)


@given(st.integers(2, 200), st.integers(0, 12))
def test_dense_matches_closed_form(N, k):
    assert grover_success_dense(N, k) == pytest.approx(grover_success_closed_form(N, k), abs=1e-9)


def test_reference_input_errors():
    with pytest.raises(ValueError):
        grover_reference(2, "012", 1)
    with pytest.raises(ValueError):
        grover_reference(2, "0a", 1)
    with pytest.raises(ValueError):
        grover_reference(2, "01", -1)
    with pytest.raises(ValueError):
        grover_reference(0, "", 1)


def test_four_items_need_one_iteration():
    assert optimal_iterations(4) == 1
    assert grover_success_dense(4, 1) == pytest.approx(1, abs=1e-12)


def test_two_items_is_a_tie():
    # zero and one iterations both succeed half the time; ties round up
    assert grover_success_dense(2, 0) == pytest.approx(0.5)
    assert grover_success_dense(2, 1) == pytest.approx(0.5)
    assert optimal_iterations(2) == 1


@pytest.mark.parametrize("N", range(2, 65))
def test_optimal_iterations_is_an_argmax(N):
    best, _ = brute_force_best(N)
    assert optimal_iterations(N) == max(best)


def test_optimal_iterations_rejects_tiny_spaces():
    with pytest.raises(ValueError):
        optimal_iterations(1)


@pytest.mark.parametrize("marked", MARKED_ITEMS)
def test_abstract_circuit_finds_the_item(marked):
    circ = abstract_grover_circuit(marked)
    assert circ.answer_distribution()[marked] == pytest.approx(1, abs=1e-12)


def test_output_correction_is_identity():
    assert output_correction() == {m: m for m in MARKED_ITEMS}
    assert output_correction(reusable=True) == {m: m for m in MARKED_ITEMS}


@pytest.mark.parametrize("marked", MARKED_ITEMS)
def test_reusable_oracle_is_a_phase_flip(marked):
    u = gates_unitary(2, oracle_gates(marked, reusable=True))
    expected = np.eye(4)
    expected[int(marked, 2), int(marked, 2)] = -1
    assert np.allclose(u, expected)


@pytest.mark.parametrize("marked", MARKED_ITEMS)
def test_short_oracle_agrees_on_uniform_input(marked):
    uniform = run_gates(QubitState.basis("00"), [("R", 0), ("R", 1)])
    a = run_gates(uniform, oracle_gates(marked)).amplitudes
    b = run_gates(uniform, oracle_gates(marked, reusable=True)).amplitudes
    assert np.allclose(a, b)


def test_bad_marked_item():
    with pytest.raises(ValueError):
        oracle_gates("2")
