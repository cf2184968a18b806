"""Dense n-qubit reference for Grover search: the ground truth for the optics.

Qubit 0 is the most significant bit of every bitstring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measurement import OutcomeDistribution

MAX_QUBITS = 13  # 12 data qubits plus the oracle ancilla
NORM_ATOL = 1e-12

R = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
ONE_QUBIT = {"R": R, "X": X, "Z": Z}


@dataclass
class QubitState:
    n: int
    amplitudes: np.ndarray

    @classmethod
    def basis(cls, bits: str) -> "QubitState":
        n = len(bits)
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"{n} qubits outside 1..{MAX_QUBITS}")
        amps = np.zeros(2**n, dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(n, amps)

    def _tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n)

    def apply(self, u: np.ndarray, qubit: int) -> "QubitState":
        t = np.moveaxis(self._tensor(), qubit, 0)
        t = np.tensordot(u, t, axes=([1], [0]))
        return QubitState(self.n, np.moveaxis(t, 0, qubit).reshape(-1))

    def phase(self, signs: np.ndarray) -> "QubitState":
        return QubitState(self.n, self.amplitudes * signs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self, qubits: Sequence[int] | None = None) -> OutcomeDistribution:
        qubits = list(range(self.n)) if qubits is None else list(qubits)
        probs = np.abs(self._tensor()) ** 2
        rest = tuple(q for q in range(self.n) if q not in qubits)
        marg = probs.sum(axis=rest) if rest else probs
        marg = np.transpose(marg, np.argsort(np.argsort(qubits)))
        return OutcomeDistribution(
            {
                "".join(map(str, idx)): float(marg[idx])
                for idx in np.ndindex(*marg.shape)
            }
        )


def _bit_array(n: int, qubit: int) -> np.ndarray:
    return (np.arange(2**n) >> (n - 1 - qubit)) & 1


def apply_gate(state: QubitState, gate: tuple) -> QubitState:
    """Gates are tuples: ("R", q), ("X", q), ("Z", q), ("CSIGN", q1, q2), ("CNOT", c, t)."""
    name = gate[0]
    if name in ONE_QUBIT:
        return state.apply(ONE_QUBIT[name], gate[1])
    if name == "CSIGN":
        both = _bit_array(state.n, gate[1]) & _bit_array(state.n, gate[2])
        return state.phase(1 - 2 * both)
    if name == "CNOT":
        c, t = gate[1], gate[2]
        state = state.apply(R, t)
        state = apply_gate(state, ("CSIGN", c, t))
        return state.apply(R, t)
    raise KeyError(f"unknown gate {name!r}")


def run_gates(state: QubitState, gates) -> QubitState:
    for g in gates:
        state = apply_gate(state, g)
        if abs(state.norm() - 1.0) > NORM_ATOL:
            raise AssertionError(f"gate {g} broke normalisation")
    return state


def gates_unitary(n: int, gates) -> np.ndarray:
    cols = [run_gates(QubitState.basis(format(i, f"0{n}b")), gates).amplitudes for i in range(2**n)]
    return np.array(cols).T


def grover_reference(n: int, marked: str, iterations: int) -> OutcomeDistribution:
    """Textbook Grover search with an explicit bit-flip oracle ancilla.

    The ancilla is prepared in |1>, Hadamard-ed once, and then serves as the
    phase-kickback target of every oracle call; the inversion about the mean
    acts on the data qubits only.
    """
    if not 1 <= n <= MAX_QUBITS - 1:
        raise ValueError(f"n={n} outside 1..{MAX_QUBITS - 1}")
    if len(marked) != n or set(marked) - {"0", "1"}:
        raise ValueError(f"marked item {marked!r} is not an {n}-bit string")
    if iterations < 0:
        raise ValueError("negative iteration count")
    total = n + 1
    state = QubitState.basis("0" * n + "1")
    for q in range(total):
        state = state.apply(R, q)
    data = range(n)
    target = int(marked, 2)
    index = np.arange(2**total)
    flip = index ^ ((index >> 1) == target).astype(int)
    zero_data = ((index >> 1) == 0).astype(float)
    reflect = 2 * zero_data - 1  # 2|0><0| - I on the data register
    for _ in range(iterations):
        state = QubitState(total, state.amplitudes[flip])
        for q in data:
            state = state.apply(R, q)
        state = state.phase(reflect)
        for q in data:
            state = state.apply(R, q)
    if abs(state.norm() - 1.0) > NORM_ATOL:
        raise AssertionError("Grover reference lost normalisation")
    return state.probabilities(list(data))


def grover_success_dense(N: int, iterations: int, marked: int = 0) -> float:
    """Success probability by explicit iteration over an N-item register."""
    v = np.full(N, 1 / math.sqrt(N))
    for _ in range(iterations):
        v[marked] = -v[marked]
        v = 2 * v.mean() - v
    return float(v[marked] ** 2)


def grover_success_closed_form(N: int, iterations: int) -> float:
    theta = math.asin(1 / math.sqrt(N))
    return math.sin((2 * iterations + 1) * theta) ** 2


def optimal_iterations(N: int) -> int:
    """Nearest integer to arccos(sqrt(1/N)) / (2 arccos(sqrt((N-1)/N))), ties rounded up."""
    if N < 2:
        raise ValueError("search space needs at least two items")
    x = math.acos(math.sqrt(1 / N)) / (2 * math.acos(math.sqrt((N - 1) / N)))
    k = math.floor(x + 0.5 + 1e-9)
    bound = math.ceil(math.pi * math.sqrt(N) / 4)
    assert k <= bound, (N, k, bound)
    return k


# -- the simplified two-qubit circuit -----------------------------------------

MARKED_ITEMS = ("00", "01", "10", "11")


def oracle_gates(marked: str, reusable: bool = False) -> list[tuple]:
    """CSIGN followed by X on each qubit whose marked bit is 0.

    The short form is only correct on the uniform superposition; the reusable
    form repeats the X gates before the CSIGN and works on any input.
    """
    if marked not in MARKED_ITEMS:
        raise ValueError(f"marked item must be one of {MARKED_ITEMS}, got {marked!r}")
    xs = [("X", q) for q, bit in enumerate(marked) if bit == "0"]
    return (xs if reusable else []) + [("CSIGN", 0, 1)] + xs


def diffusion_gates() -> list[tuple]:
    # (Z x Z) CSIGN = 2|00><00| - I
    return [("R", 0), ("R", 1), ("Z", 0), ("Z", 1), ("CSIGN", 0, 1), ("R", 0), ("R", 1)]


@dataclass
class AbstractGroverCircuit:
    marked: str
    gates: list[tuple]
    correction: dict[str, str] = field(default_factory=dict)

    def raw_distribution(self) -> OutcomeDistribution:
        return run_gates(QubitState.basis("00"), self.gates).probabilities()

    def answer_distribution(self) -> OutcomeDistribution:
        return self.raw_distribution().relabeled(lambda k: self.correction[k])


def _grover_gates(marked: str, reusable: bool) -> list[tuple]:
    return [("R", 0), ("R", 1)] + oracle_gates(marked, reusable) + diffusion_gates()


def output_correction(reusable: bool = False) -> dict[str, str]:
    """Measured bits -> marked item, derived by simulating every oracle."""
    mapping = {}
    for m in MARKED_ITEMS:
        dist = run_gates(QubitState.basis("00"), _grover_gates(m, reusable)).probabilities()
        (raw,) = [k for k, p in dist.items() if p > 0.5]
        if abs(dist[raw] - 1.0) > 1e-12:
            raise AssertionError(f"oracle {m}: outcome not deterministic ({dist.probabilities})")
        mapping[raw] = m
    if sorted(mapping) != list(MARKED_ITEMS):
        raise AssertionError(f"measured outcomes are not a bijection: {mapping}")
    return mapping


def abstract_grover_circuit(marked: str, reusable: bool = False) -> AbstractGroverCircuit:
    return AbstractGroverCircuit(marked, _grover_gates(marked, reusable), output_correction(reusable))
