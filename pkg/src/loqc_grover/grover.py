"""Optical four-element Grover search, compiled from the abstract two-qubit circuit."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional

from . import qubit_reference as qref
from .circuit import QUBIT_OUTCOMES, Circuit, Detector, perturb_reflectivities, run_circuit
from .elements import Element, merge_waveplates, one_qubit_gate
from .fock import DEFAULT_PHOTON_CAP, DEFAULT_TOLERANCE
from .gates import GateBlueprint, build_coincidence_cnot, build_scalable_cnot, build_scalable_csign
from .measurement import OutcomeDistribution

log = logging.getLogger(__name__)

RAIL_A, RAIL_B = "a", "b"
CROSS_CHECK_TV = 1e-9


class GroverVariant(str, enum.Enum):
    FULL = "full"
    BELL = "bell"
    TWO_SCALABLE = "two_scalable"
    ABSTRACT = "abstract"

    @classmethod
    def parse(cls, value) -> "GroverVariant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower().replace("-", "_"))
        except ValueError:
            names = ", ".join(v.value for v in cls)
            raise ValueError(f"unknown Grover variant {value!r} (choose from {names})") from None


# (photons, detectors) per optical variant
BUDGET = {
    GroverVariant.FULL: (4, 7),
    GroverVariant.BELL: (2, 4),
    GroverVariant.TWO_SCALABLE: (6, 10),
}

# Component counts quoted for each circuit; compared as soft warnings.
QUOTED_TALLIES = {
    GroverVariant.FULL: {"waveplates": (10, 12), "beamsplitters": (5, 5), "pbs": (9, 9)},
    GroverVariant.BELL: {"waveplates": (6, 8), "beamsplitters": (3, 3), "pbs": (6, 6)},
    GroverVariant.TWO_SCALABLE: {"waveplates": (14, 16), "beamsplitters": (4, 4), "pbs": (8, 8)},
}

ACCEPTANCE = {
    GroverVariant.FULL: "heralds+coincidence",
    GroverVariant.BELL: "coincidence",
    GroverVariant.TWO_SCALABLE: "heralds+coincidence",
    GroverVariant.ABSTRACT: "none",
}


class _Builder:
    def __init__(self):
        self.rails = [RAIL_A, RAIL_B]
        self.photons: list[tuple[str, str]] = []
        self.pdc: list[tuple[str, str]] = []
        self.elements: list[Element] = []
        self.heralds: list[Detector] = []

    def gate(self, name, rail):
        self.elements += one_qubit_gate(name, rail)

    def blueprint(self, bp: GateBlueprint):
        self.rails += list(bp.ancilla_rails)
        self.photons += list(bp.ancilla_photons)
        self.elements += list(bp.elements)
        self.heralds += list(bp.heralds)


def _rail(q: int) -> str:
    return (RAIL_A, RAIL_B)[q]


def build_optical_grover(variant, marked: str, *, merge: bool = True) -> Circuit:
    """Translate the abstract circuit gate by gate.

    CSIGNs become optical gates: the oracle's is heralded (Full, TwoScalable)
    or replaced by the down-conversion source plus an R on rail a (Bell); the
    diffusion CSIGN is (I x R) CNOT (I x R) with a coincidence-basis CNOT, or a
    heralded CNOT in the TwoScalable variant.  With ``merge`` adjacent
    half-wave plates are folded together (see :func:`merge_waveplates`).
    """
    variant = GroverVariant.parse(variant)
    if variant is GroverVariant.ABSTRACT:
        raise ValueError("the abstract variant has no optical circuit")
    if marked not in qref.MARKED_ITEMS:
        raise ValueError(f"marked item must be one of {qref.MARKED_ITEMS}, got {marked!r}")

    gates = qref.abstract_grover_circuit(marked).gates
    oracle_at = gates.index(("CSIGN", 0, 1))
    b = _Builder()
    if variant is GroverVariant.BELL:
        # R x R then CSIGN on |00> equals (R x I) applied to (|HH> + |VV>)/sqrt(2)
        b.pdc.append((RAIL_A, RAIL_B))
        b.gate("R", RAIL_A)
        rest = gates[oracle_at + 1 :]
    else:
        b.photons += [(RAIL_A, "H"), (RAIL_B, "H")]
        rest = gates
    oracle_done = variant is GroverVariant.BELL
    for g in rest:
        if g[0] != "CSIGN":
            b.gate(g[0], _rail(g[1]))
            continue
        if not oracle_done:
            b.blueprint(build_scalable_csign(RAIL_A, RAIL_B, prefix="s1"))
            oracle_done = True
            continue
        b.gate("R", RAIL_B)
        if variant is GroverVariant.TWO_SCALABLE:
            b.blueprint(build_scalable_cnot(RAIL_A, RAIL_B, prefix="s2"))
        else:
            b.blueprint(build_coincidence_cnot(RAIL_A, RAIL_B, prefix="cx"))
        b.gate("R", RAIL_B)

    finals = [Detector(f"d_{r}{p}", r, p, None) for r in (RAIL_A, RAIL_B) for p in "HV"]
    return Circuit(
        rails=tuple(b.rails),
        photons=tuple(b.photons),
        elements=tuple(merge_waveplates(b.elements) if merge else b.elements),
        detectors=tuple(b.heralds) + tuple(finals),
        coincidence=(RAIL_A, RAIL_B),
        pdc_sources=tuple(b.pdc),
        name=f"grover-{variant.value}-{marked}",
    )


@dataclass
class RunReport:
    variant: GroverVariant
    marked: str
    overall_success_probability: float
    conditional_distribution: OutcomeDistribution
    raw_distribution: OutcomeDistribution
    counts: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    degenerate: bool = False
    settings: dict = field(default_factory=dict)

    @property
    def answer(self) -> Optional[str]:
        if self.degenerate:
            return None
        return max(self.conditional_distribution.items(), key=lambda kv: kv[1])[0]

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "marked": self.marked,
            "success_probability": self.overall_success_probability,
            "conditional_distribution": self.conditional_distribution.to_dict(),
            "raw_distribution": self.raw_distribution.to_dict(),
            "answer": self.answer,
            "degenerate": self.degenerate,
            "counts": dict(self.counts),
            "warnings": list(self.warnings),
            "settings": dict(self.settings),
        }


def tally_warnings(variant: GroverVariant, counts: dict) -> list[str]:
    out = []
    photons, detectors = BUDGET[variant]
    if counts.get("photons") != photons:
        out.append(f"photons: built {counts.get('photons')}, expected {photons}")
    if counts.get("detectors") != detectors:
        out.append(f"detectors: built {counts.get('detectors')}, expected {detectors}")
    for key, (lo, hi) in QUOTED_TALLIES[variant].items():
        n = counts.get(key, 0)
        if not lo <= n <= hi:
            quoted = f"{lo}" if lo == hi else f"{lo}-{hi}"
            out.append(f"{key}: built {n}, quoted {quoted}")
    return out


def run_grover(
    variant,
    marked: str,
    *,
    eta_d: float = 1.0,
    bucket: bool = False,
    delta_r: float = 0.0,
    photon_cap: int = DEFAULT_PHOTON_CAP,
    tolerance: float = DEFAULT_TOLERANCE,
) -> RunReport:
    variant = GroverVariant.parse(variant)
    settings = {"eta_d": eta_d, "bucket": bucket, "delta_r": delta_r}
    if variant is GroverVariant.ABSTRACT:
        circ = qref.abstract_grover_circuit(marked)
        return RunReport(
            variant,
            marked,
            1.0,
            circ.answer_distribution().with_support(QUBIT_OUTCOMES),
            circ.raw_distribution(),
            settings=settings,
        )

    circuit = perturb_reflectivities(build_optical_grover(variant, marked), delta_r)
    result = run_circuit(
        circuit, eta_d=eta_d, bucket=bucket, photon_cap=photon_cap, tolerance=tolerance
    )
    counts = circuit.tally()
    warnings = tally_warnings(variant, counts)
    correction = qref.output_correction()
    if result.acceptance_probability == 0.0:
        empty = OutcomeDistribution({})
        return RunReport(
            variant, marked, 0.0, empty, empty, counts, warnings + ["zero acceptance"], True, settings
        )
    raw = result.logical
    answer = raw.relabeled(lambda k: correction[k]).with_support(QUBIT_OUTCOMES)
    return RunReport(
        variant,
        marked,
        result.acceptance_probability,
        answer,
        raw,
        counts,
        warnings,
        False,
        settings,
    )


def tv_distance(p: OutcomeDistribution, q: OutcomeDistribution) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p[k] - q[k]) for k in keys)


def cross_check(variant, marked: str, *, atol: float = CROSS_CHECK_TV, **run_kwargs) -> bool:
    """Optical conditional outcomes vs. the dense two-qubit simulation, by total variation."""
    report = run_grover(variant, marked, **run_kwargs)
    reference = qref.abstract_grover_circuit(marked).raw_distribution()
    if report.degenerate:
        log.warning("%s/%s: zero acceptance, nothing to compare", report.variant.value, marked)
        return False
    distance = tv_distance(report.raw_distribution, reference)
    if distance > atol:
        log.warning(
            "%s/%s cross-check failed (TV %.3g)\n  optical:   %s\n  reference: %s",
            report.variant.value,
            marked,
            distance,
            report.raw_distribution.to_dict(),
            reference.to_dict(),
        )
        return False
    return True
