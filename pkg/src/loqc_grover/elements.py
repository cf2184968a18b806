"""Optical components bound to rails, and their single-photon matrices.

Matrices act on column vectors of amplitudes.  For rail-local elements the
ordering is (H, V); for two-rail elements it is (rail_a, rail_b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .fock import ModeRegistry, Polarization, StateVector, apply_mode_unitary, permute_modes


@lru_cache(maxsize=None)
def _waveplate(phi_deg: float, alpha_deg: float) -> np.ndarray:
    a = math.radians(alpha_deg)
    e = complex(math.cos(math.radians(phi_deg)), math.sin(math.radians(phi_deg)))
    c, s = math.cos(a), math.sin(a)
    m = np.array(
        [
            [e * c * c + s * s, (e - 1) * c * s],
            [(e - 1) * c * s, e * s * s + c * c],
        ],
        dtype=complex,
    )
    m.setflags(write=False)
    return m


def waveplate_unitary(phi: float, alpha: float) -> np.ndarray:
    """Jones matrix of a waveplate adding phase ``phi`` to the slow axis at ``alpha``.

    Angles in degrees; ``alpha`` is measured counter-clockwise from horizontal
    looking along the propagation direction.
    """
    return _waveplate(float(phi), float(alpha)).copy()


def beamsplitter_unitary(r: float, thick_side: str = "B") -> np.ndarray:
    """Real beamsplitter with amplitude reflectivity ``r``.

    The mode on the thick (coated) side picks up the sign change on
    reflection: thick B gives [[r, t], [t, -r]], thick A gives [[-r, t], [t, r]].
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"amplitude reflectivity {r} outside [0, 1]")
    if thick_side not in ("A", "B"):
        raise ValueError(f"thick side must be 'A' or 'B', got {thick_side!r}")
    t = math.sqrt(max(0.0, 1.0 - r * r))
    if thick_side == "B":
        return np.array([[r, t], [t, -r]], dtype=complex)
    return np.array([[-r, t], [t, r]], dtype=complex)


def phase_delay_unitary(theta: float) -> np.ndarray:
    """A delay of ``theta`` degrees multiplies the rail by exp(-i theta)."""
    return np.exp(-1j * math.radians(theta)) * np.eye(2, dtype=complex)


@dataclass(frozen=True)
class Waveplate:
    rail: str
    alpha: float
    phi: float

    def __post_init__(self):
        alpha = float(self.alpha)
        # keep alpha in (-180, 180] and phi in [0, 360)
        alpha = alpha - 360.0 * math.ceil((alpha - 180.0) / 360.0)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "phi", float(self.phi) % 360.0)

    @property
    def rails(self):
        return (self.rail,)

    def matrix(self) -> np.ndarray:
        return waveplate_unitary(self.phi, self.alpha)


@dataclass(frozen=True)
class PhaseDelay:
    rail: str
    theta: float

    @property
    def rails(self):
        return (self.rail,)

    def matrix(self) -> np.ndarray:
        return phase_delay_unitary(self.theta)


@dataclass(frozen=True)
class Beamsplitter:
    """Ordinary beamsplitter between two rails.

    ``pol`` restricts the coupling to one polarization ("H" or "V"); that is
    the usual PBS-BS-PBS arrangement, drawn as a single polarization-dependent
    beamsplitter.  "both" couples H with H and V with V.
    """

    rail_a: str
    rail_b: str
    r: float
    thick_side: str = "B"
    pol: str = "both"

    def __post_init__(self):
        if self.rail_a == self.rail_b:
            raise ValueError("beamsplitter needs two distinct rails")
        if self.pol not in ("H", "V", "both"):
            raise ValueError(f"polarization must be H, V or both, got {self.pol!r}")
        beamsplitter_unitary(self.r, self.thick_side)

    @property
    def rails(self):
        return (self.rail_a, self.rail_b)

    def matrix(self) -> np.ndarray:
        return beamsplitter_unitary(self.r, self.thick_side)

    def polarizations(self):
        return tuple(Polarization) if self.pol == "both" else (Polarization(self.pol),)


@dataclass(frozen=True)
class PolarizingBeamsplitter:
    """Ideal PBS: H reflected (swaps rails), V transmitted (stays)."""

    rail_a: str
    rail_b: str

    def __post_init__(self):
        if self.rail_a == self.rail_b:
            raise ValueError("PBS needs two distinct rails")

    @property
    def rails(self):
        return (self.rail_a, self.rail_b)


Element = Union[Waveplate, PhaseDelay, Beamsplitter, PolarizingBeamsplitter]

# Waveplate settings (phi, alpha) in degrees for the named gates.
HALF_WAVE = 180.0
GATE_WAVEPLATES = {
    "R": (180.0, -67.5),
    "T": (45.0, 90.0),
    "X": (180.0, -45.0),
    "Z": (180.0, 90.0),
}


def one_qubit_gate(name: str, rail: str = "q", theta: float = 0.0) -> list[Element]:
    """Element sequence (optical-path order) realising a named one-qubit gate.

    ``I-phase`` is exp(i theta) I, built as a delay of -theta.  ``Y`` follows
    the two-waveplate-plus-delay recipe, which is Y up to a global phase.
    """
    if name in GATE_WAVEPLATES:
        phi, alpha = GATE_WAVEPLATES[name]
        return [Waveplate(rail, alpha=alpha, phi=phi)]
    if name == "I-phase":
        return [PhaseDelay(rail, -theta)]
    if name == "Y":
        z_phi, z_alpha = GATE_WAVEPLATES["Z"]
        x_phi, x_alpha = GATE_WAVEPLATES["X"]
        return [
            Waveplate(rail, alpha=z_alpha, phi=z_phi),
            Waveplate(rail, alpha=x_alpha, phi=x_phi),
            PhaseDelay(rail, -45.0),
        ]
    raise KeyError(f"unknown one-qubit gate {name!r}")


def compose(elements) -> np.ndarray:
    """Product of rail-local element matrices, later elements on the left."""
    out = np.eye(2, dtype=complex)
    for el in elements:
        if isinstance(el, (Beamsplitter, PolarizingBeamsplitter)):
            raise TypeError("compose() only handles single-rail elements")
        out = el.matrix() @ out
    return out


def apply_element(state: StateVector, element: Element) -> StateVector:
    reg: ModeRegistry = state.registry
    if isinstance(element, (Waveplate, PhaseDelay)):
        return apply_mode_unitary(state, element.matrix(), reg.rail_modes(element.rail))
    if isinstance(element, Beamsplitter):
        u = element.matrix()
        for pol in element.polarizations():
            modes = (reg.index(element.rail_a, pol), reg.index(element.rail_b, pol))
            state = apply_mode_unitary(state, u, modes)
        return state
    if isinstance(element, PolarizingBeamsplitter):
        a = reg.index(element.rail_a, Polarization.H)
        b = reg.index(element.rail_b, Polarization.H)
        # resolve the V modes too so unbound rails fail loudly
        reg.index(element.rail_a, Polarization.V)
        reg.index(element.rail_b, Polarization.V)
        return permute_modes(state, {a: b, b: a})
    raise TypeError(f"not an optical element: {element!r}")


def apply_elements(state: StateVector, elements) -> StateVector:
    for el in elements:
        state = apply_element(state, el)
    return state


def _half_wave_alpha(m: np.ndarray) -> float:
    # m = [[-cos 2a, -sin 2a], [-sin 2a, cos 2a]]
    alpha = math.degrees(math.atan2(-m[1, 0].real, -m[0, 0].real)) / 2.0
    # drop float noise so merged plates print as the angles one would set
    snapped = round(alpha, 9)
    return snapped if abs(alpha - snapped) < 1e-12 else alpha


def _is_half_wave(el) -> bool:
    return isinstance(el, Waveplate) and abs(el.phi - HALF_WAVE) < 1e-12


def merge_waveplates(elements, atol: float = 1e-12) -> list[Element]:
    """Shorten runs of consecutive half-wave plates on the same rail.

    A run multiplies to a real orthogonal matrix: a reflection (det -1),
    which is one half-wave plate, or a rotation, which needs two unless it is
    the identity.  Elements on other rails commute with the run and are left
    in place; the merged plates sit where the run started.
    """
    elements = list(elements)
    runs: dict[str, list[int]] = {}
    groups: list[list[int]] = []

    def close(rail):
        run = runs.pop(rail, None)
        if run and len(run) > 1:
            groups.append(run)

    for i, el in enumerate(elements):
        if _is_half_wave(el):
            runs.setdefault(el.rail, []).append(i)
            continue
        for rail in el.rails:
            close(rail)
    for rail in list(runs):
        close(rail)

    replace: dict[int, list[Element]] = {}
    drop: set[int] = set()
    for run in groups:
        rail = elements[run[0]].rail
        m = compose(elements[i] for i in run)
        if np.max(np.abs(m.imag)) > atol:
            continue
        m = m.real
        if np.linalg.det(m) < 0:
            new = [Waveplate(rail, _half_wave_alpha(m), HALF_WAVE)]
        elif np.max(np.abs(m - np.eye(2))) <= atol:
            new = []
        else:
            first = Waveplate(rail, 0.0, HALF_WAVE)
            second = m @ np.linalg.inv(first.matrix().real)
            new = [first, Waveplate(rail, _half_wave_alpha(second), HALF_WAVE)]
        if len(new) >= len(run):
            continue
        replace[run[0]] = new
        drop.update(run[1:])

    out: list[Element] = []
    for i, el in enumerate(elements):
        if i in replace:
            out += replace[i]
        elif i not in drop:
            out.append(el)
    return out
