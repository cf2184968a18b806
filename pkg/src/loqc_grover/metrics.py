"""Classical fidelity between outcome distributions, and oracle distinguishability.

Small pairwise fidelity between the distributions produced by different
oracles is the good direction: F = 0 means an experimenter can always tell the
oracles apart from one measurement.  Reports carry both F and the convenience
column 1 - F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import qubit_reference as qref
from .circuit import QUBIT_OUTCOMES
from .errors import ValidationError
from .grover import GroverVariant, RunReport
from .measurement import OutcomeDistribution

NORMALIZATION_ATOL = 1e-9
DIAGONAL_ATOL = 1e-12


def _as_mapping(p) -> Mapping[str, float]:
    if isinstance(p, OutcomeDistribution):
        return p.probabilities
    return dict(p)


def distribution_fidelity(p, q) -> float:
    """F(p, q) = sum_x sqrt(p(x) q(x)).

    Both arguments must be normalised distributions over the same outcome
    set; outcomes with probability zero still have to be listed on both sides.
    """
    p, q = _as_mapping(p), _as_mapping(q)
    if set(p) != set(q):
        only_p = sorted(set(p) - set(q), key=str)
        only_q = sorted(set(q) - set(p), key=str)
        raise ValueError(f"outcome sets differ (only in p: {only_p}, only in q: {only_q})")
    for name, dist in (("p", p), ("q", q)):
        values = np.array(list(dist.values()), dtype=float)
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValidationError(f"{name} has negative or non-finite probabilities")
        total = float(values.sum())
        if abs(total - 1.0) > NORMALIZATION_ATOL:
            raise ValidationError(f"{name} sums to {total:.12g}, not 1")
    f = math.fsum(math.sqrt(p[x] * q[x]) for x in p)
    return min(1.0, f)


def ideal_distribution(marked: str) -> OutcomeDistribution:
    return qref.abstract_grover_circuit(marked).answer_distribution().with_support(QUBIT_OUTCOMES)


def ideal_actual_fidelity(actual, variant, marked: str) -> float:
    """Fidelity of a measured (or simulated) answer distribution to the ideal one."""
    GroverVariant.parse(variant)
    return distribution_fidelity(actual, ideal_distribution(marked))


@dataclass(frozen=True)
class FidelityReport:
    variant: GroverVariant
    oracles: tuple[str, ...]
    matrix: np.ndarray
    ideal_fidelity: dict[str, float]
    acceptance: dict[str, float]

    def __post_init__(self):
        m = self.matrix
        if not np.allclose(np.diag(m), 1.0, atol=DIAGONAL_ATOL):
            raise ValidationError(f"fidelity diagonal is not 1: {np.diag(m)}")
        if not np.allclose(m, m.T, atol=DIAGONAL_ATOL):
            raise ValidationError("fidelity matrix is not symmetric")
        if np.any(m < -DIAGONAL_ATOL) or np.any(m > 1 + DIAGONAL_ATOL):
            raise ValidationError("fidelity entries outside [0, 1]")

    @property
    def distinguishability(self) -> np.ndarray:
        return 1.0 - self.matrix

    @property
    def max_pairwise_fidelity(self) -> float:
        m = self.matrix
        off = m[~np.eye(len(m), dtype=bool)]
        return float(off.max()) if off.size else 0.0

    @property
    def min_pairwise_distinguishability(self) -> float:
        return 1.0 - self.max_pairwise_fidelity

    def rows(self) -> list[dict]:
        out = []
        for i, a in enumerate(self.oracles):
            for j, b in enumerate(self.oracles):
                out.append(
                    {
                        "oracle_a": a,
                        "oracle_b": b,
                        "fidelity": float(self.matrix[i, j]),
                        "distinguishability": float(1.0 - self.matrix[i, j]),
                    }
                )
        return out

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "oracles": list(self.oracles),
            "fidelity": self.matrix.tolist(),
            "distinguishability": self.distinguishability.tolist(),
            "ideal_fidelity": dict(self.ideal_fidelity),
            "acceptance": dict(self.acceptance),
            "min_pairwise_distinguishability": self.min_pairwise_distinguishability,
            "note": "low off-diagonal fidelity means the oracles are easy to tell apart",
        }


def oracle_distinguishability(reports: Sequence[RunReport]) -> FidelityReport:
    """Pairwise fidelities of the per-oracle conditional answer distributions."""
    reports = list(reports)
    variants = {r.variant for r in reports}
    if len(variants) != 1:
        raise ValueError(f"reports mix variants: {sorted(v.value for v in variants)}")
    oracles = tuple(r.marked for r in reports)
    if sorted(oracles) != sorted(set(oracles)):
        raise ValueError(f"duplicate oracles among reports: {oracles}")
    for r in reports:
        if r.degenerate:
            raise ValueError(f"oracle {r.marked}: zero acceptance, no distribution to compare")
    n = len(reports)
    m = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            f = distribution_fidelity(
                reports[i].conditional_distribution, reports[j].conditional_distribution
            )
            m[i, j] = m[j, i] = f
    ideal = {
        r.marked: ideal_actual_fidelity(r.conditional_distribution, r.variant, r.marked)
        for r in reports
    }
    acceptance = {r.marked: r.overall_success_probability for r in reports}
    return FidelityReport(variants.pop(), oracles, m, ideal, acceptance)
