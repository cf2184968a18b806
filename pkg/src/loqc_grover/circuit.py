"""Whole optical experiments: sources, element list, detectors, acceptance rule."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .elements import (
    Beamsplitter,
    Element,
    PhaseDelay,
    PolarizingBeamsplitter,
    Waveplate,
    apply_elements,
)
from .errors import RegistryError, ValidationError
from .fock import (
    DEFAULT_PHOTON_CAP,
    DEFAULT_TOLERANCE,
    ModeRegistry,
    Polarization,
    StateVector,
)
from .measurement import (
    DetectorSpec,
    OutcomeDistribution,
    apply_detector_efficiency,
    count_distribution,
    thin_counts,
)

LOSS_MODELS = ("thinning", "modes")

QUBIT_OUTCOMES = ("00", "01", "10", "11")


@dataclass(frozen=True)
class Detector:
    """Detector bound by label: a whole rail, or one polarization of it."""

    name: str
    rail: str
    pol: Optional[str] = None
    expect: Optional[int] = None

    def modes(self, registry: ModeRegistry) -> tuple[int, ...]:
        if self.pol is None:
            return registry.rail_modes(self.rail)
        return (registry.index(self.rail, self.pol),)


@dataclass(frozen=True)
class Circuit:
    rails: tuple[str, ...]
    photons: tuple[tuple[str, str], ...] = ()
    elements: tuple[Element, ...] = ()
    detectors: tuple[Detector, ...] = ()
    coincidence: Optional[tuple[str, str]] = None
    pdc_sources: tuple[tuple[str, str], ...] = ()
    qubits: Optional[tuple[str, str]] = None
    name: str = ""

    def __post_init__(self):
        for attr in ("rails", "photons", "elements", "detectors", "pdc_sources"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        if len(set(self.rails)) != len(self.rails):
            raise RegistryError("duplicate rail declaration")
        declared = set(self.rails)
        used = [r for r, _ in self.photons]
        used += [r for pair in self.pdc_sources for r in pair]
        used += [r for el in self.elements for r in el.rails]
        used += [d.rail for d in self.detectors]
        used += list(self.coincidence or ()) + list(self.qubits or ())
        for r in used:
            if r not in declared:
                raise RegistryError(f"rail {r!r} is used but not declared")
        reg = self.registry
        seen: set[int] = set()
        for d in self.detectors:
            overlap = seen & set(d.modes(reg))
            if overlap:
                raise ValidationError(f"detector {d.name!r} overlaps another detector")
            seen |= set(d.modes(reg))
        if self.coincidence is not None and self.qubits is None:
            self.readout_positions()

    @property
    def registry(self) -> ModeRegistry:
        return ModeRegistry.from_rails(self.rails)

    def photon_count(self) -> int:
        return len(self.photons) + 2 * len(self.pdc_sources)

    def initial_state(
        self, *, photon_cap: int = DEFAULT_PHOTON_CAP, tolerance: float = DEFAULT_TOLERANCE
    ) -> StateVector:
        reg = self.registry
        base = [0] * len(reg)
        for rail, pol in self.photons:
            base[reg.index(rail, pol)] += 1
        terms = {tuple(base): 1.0 + 0j}
        for a, b in self.pdc_sources:
            # ideal post-selected down-conversion pair (|HH> + |VV>)/sqrt(2)
            nxt = {}
            for occ, amp in terms.items():
                for pol in Polarization:
                    occ2 = list(occ)
                    occ2[reg.index(a, pol)] += 1
                    occ2[reg.index(b, pol)] += 1
                    nxt[tuple(occ2)] = amp / math.sqrt(2)
            terms = nxt
        return StateVector(reg, terms, tolerance=tolerance, photon_cap=photon_cap)

    def detector_specs(self, *, resolving: bool = True) -> list[DetectorSpec]:
        reg = self.registry
        return [
            DetectorSpec(d.modes(reg), d.expect, d.name, resolving) for d in self.detectors
        ]

    def readout_positions(self) -> tuple[int, int, int, int]:
        """Indices into ``detectors`` of (aH, aV, bH, bV) for the coincidence rails."""
        found = {}
        for k, d in enumerate(self.detectors):
            if d.pol is not None:
                found[(d.rail, Polarization(d.pol))] = k
        try:
            a, b = self.coincidence
            return tuple(found[(r, p)] for r in (a, b) for p in Polarization)
        except KeyError:
            raise ValidationError(
                "coincidence acceptance needs separate H and V detectors on both rails"
            ) from None

    def tally(self) -> dict[str, int]:
        counts = {"waveplates": 0, "phase_delays": 0, "beamsplitters": 0, "pbs": 0}
        for el in self.elements:
            if isinstance(el, Waveplate):
                counts["waveplates"] += 1
            elif isinstance(el, PhaseDelay):
                counts["phase_delays"] += 1
            elif isinstance(el, Beamsplitter):
                counts["beamsplitters"] += 1
            elif isinstance(el, PolarizingBeamsplitter):
                counts["pbs"] += 1
        counts["photons"] = self.photon_count()
        counts["detectors"] = len(self.detectors)
        return counts


@dataclass(frozen=True)
class CircuitResult:
    acceptance_probability: float
    readings: OutcomeDistribution
    accepted: OutcomeDistribution
    logical: Optional[OutcomeDistribution]
    final_state: StateVector = field(repr=False)


def accepts(circuit: Circuit, reading: Sequence[int]) -> bool:
    for d, count in zip(circuit.detectors, reading):
        if d.expect is not None and count != d.expect:
            return False
    if circuit.coincidence is not None:
        ah, av, bh, bv = circuit.readout_positions()
        if reading[ah] + reading[av] != 1 or reading[bh] + reading[bv] != 1:
            return False
    return True


def logical_bits(circuit: Circuit, reading: Sequence[int]) -> str:
    _, av, _, bv = circuit.readout_positions()
    return f"{reading[av]}{reading[bv]}"


def run_circuit(
    circuit: Circuit,
    *,
    eta_d: float = 1.0,
    bucket: bool = False,
    photon_cap: int = DEFAULT_PHOTON_CAP,
    tolerance: float = DEFAULT_TOLERANCE,
    initial: Optional[StateVector] = None,
    loss_model: str = "thinning",
) -> CircuitResult:
    """Propagate, detect (optionally lossy or non-resolving) and post-select.

    ``loss_model="thinning"`` applies detector loss to the ideal count
    distribution; ``"modes"`` routes each detected mode through an explicit
    loss beamsplitter into environment modes.  Both give the same readings;
    the second is slower and is kept as a cross-check.
    """
    if loss_model not in LOSS_MODELS:
        raise ValueError(f"loss model must be one of {LOSS_MODELS}, got {loss_model!r}")
    if not 0.0 <= eta_d <= 1.0:
        raise ValueError(f"detector efficiency {eta_d} outside [0, 1]")
    state = initial if initial is not None else circuit.initial_state(
        photon_cap=photon_cap, tolerance=tolerance
    )
    state = apply_elements(state, circuit.elements)
    if loss_model == "modes":
        specs = circuit.detector_specs(resolving=not bucket)
        if eta_d != 1.0:
            for spec in specs:
                state = apply_detector_efficiency(state, spec, eta_d)
        readings = count_distribution(state, specs)
    else:
        readings = count_distribution(state, circuit.detector_specs(resolving=True))
        if eta_d != 1.0 or bucket:
            readings = thin_counts(readings, eta_d, resolving=not bucket)
    accepted = readings.restricted(lambda r: accepts(circuit, r))
    logical = None
    if circuit.coincidence is not None:
        logical = accepted.relabeled(lambda r: logical_bits(circuit, r)).conditional()
        if logical.total_probability > 0:
            logical = logical.with_support(QUBIT_OUTCOMES)
    return CircuitResult(
        acceptance_probability=accepted.total_probability,
        readings=readings,
        accepted=accepted,
        logical=logical,
        final_state=state,
    )


def perturb_reflectivities(circuit: Circuit, delta_r: float) -> Circuit:
    """Shift every ordinary beamsplitter's amplitude reflectivity by ``delta_r``, clipped."""
    if delta_r == 0.0:
        return circuit
    elements = tuple(
        dataclasses.replace(el, r=min(1.0, max(0.0, el.r + delta_r)))
        if isinstance(el, Beamsplitter)
        else el
        for el in circuit.elements
    )
    return dataclasses.replace(circuit, elements=elements)
