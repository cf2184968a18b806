"""Photon counting, heralding and post-selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional, Sequence

from .elements import beamsplitter_unitary
from .errors import ValidationError
from .fock import ModeLabel, ModeRegistry, StateVector, apply_mode_unitary, normalize

PROB_ATOL = 1e-10


@dataclass(frozen=True)
class DetectorSpec:
    """Photon counter over one or more registry modes.

    ``expectation`` is the count required for acceptance, or None when the
    detector is read out but unconstrained.  Non-resolving ("bucket")
    detectors report min(count, 1).
    """

    modes: tuple[int, ...]
    expectation: Optional[int] = None
    name: str = ""
    resolving: bool = True

    def __post_init__(self):
        modes = tuple(int(i) for i in self.modes)
        if not modes:
            raise ValueError("a detector must read at least one mode")
        if len(set(modes)) != len(modes):
            raise ValueError(f"detector {self.name!r} lists a mode twice")
        object.__setattr__(self, "modes", modes)

    def count(self, occupation: Sequence[int]) -> int:
        n = sum(occupation[i] for i in self.modes)
        return n if self.resolving else min(n, 1)

    def accepts(self, count: int) -> bool:
        return self.expectation is None or count == self.expectation


@dataclass(frozen=True)
class HeraldPattern:
    """Required detector counts plus "one photon in each group" constraints."""

    detectors: tuple[DetectorSpec, ...] = ()
    coincidences: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "detectors", tuple(self.detectors))
        object.__setattr__(self, "coincidences", tuple(tuple(g) for g in self.coincidences))
        seen: set[int] = set()
        groups = [d.modes for d in self.detectors] + list(self.coincidences)
        for group in groups:
            overlap = seen & set(group)
            if overlap:
                raise ValidationError(f"modes {sorted(overlap)} constrained twice")
            seen |= set(group)
        for d in self.detectors:
            if d.expectation is None:
                raise ValidationError(f"herald detector {d.name!r} has no required count")

    def matches(self, occupation: Sequence[int]) -> bool:
        for d in self.detectors:
            if d.count(occupation) != d.expectation:
                return False
        return all(sum(occupation[i] for i in g) == 1 for g in self.coincidences)


@dataclass(frozen=True)
class OutcomeDistribution:
    probabilities: Mapping[Hashable, float] = field(default_factory=dict)
    total_probability: Optional[float] = None

    def __post_init__(self):
        probs = {}
        for k, p in self.probabilities.items():
            p = float(p)
            if p < -PROB_ATOL:
                raise ValidationError(f"negative probability {p} for outcome {k!r}")
            probs[k] = max(p, 0.0)
        total = math.fsum(probs.values())
        if self.total_probability is not None and abs(total - self.total_probability) > PROB_ATOL:
            raise ValidationError(
                f"probabilities sum to {total}, expected {self.total_probability}"
            )
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "total_probability", total)

    def __getitem__(self, outcome) -> float:
        return self.probabilities.get(outcome, 0.0)

    def __iter__(self):
        return iter(self.probabilities)

    def __len__(self):
        return len(self.probabilities)

    def items(self):
        return self.probabilities.items()

    def outcomes(self):
        return list(self.probabilities)

    def conditional(self) -> "OutcomeDistribution":
        """Renormalised copy; an empty distribution stays empty."""
        if self.total_probability == 0.0:
            return OutcomeDistribution({})
        t = self.total_probability
        return OutcomeDistribution({k: p / t for k, p in self.probabilities.items()})

    def restricted(self, predicate) -> "OutcomeDistribution":
        return OutcomeDistribution({k: p for k, p in self.probabilities.items() if predicate(k)})

    def relabeled(self, fn) -> "OutcomeDistribution":
        out: dict = {}
        for k, p in self.probabilities.items():
            key = fn(k)
            out[key] = out.get(key, 0.0) + p
        return OutcomeDistribution(out)

    def marginal(self, positions: Sequence[int]) -> "OutcomeDistribution":
        return self.relabeled(lambda k: tuple(k[i] for i in positions))

    def with_support(self, outcomes: Iterable) -> "OutcomeDistribution":
        outcomes = list(outcomes)
        extra = set(self.probabilities) - set(outcomes)
        if extra:
            raise ValidationError(f"outcomes {sorted(map(str, extra))} outside the declared set")
        return OutcomeDistribution({k: self[k] for k in outcomes})

    def to_dict(self) -> dict:
        return {str(k) if not isinstance(k, str) else k: p for k, p in self.probabilities.items()}


def count_distribution(state: StateVector, detectors: Sequence[DetectorSpec]) -> OutcomeDistribution:
    """Born-rule distribution of the detector readings (unmeasured modes traced)."""
    probs: dict[tuple[int, ...], float] = {}
    for occ, amp in state.amplitudes.items():
        key = tuple(d.count(occ) for d in detectors)
        probs[key] = probs.get(key, 0.0) + abs(amp) ** 2
    return OutcomeDistribution(probs)


def measure_counts(state: StateVector, detectors: Sequence[DetectorSpec]):
    """Measure ``detectors`` on ``state``.

    Returns the reading distribution and, for each reading, the normalised
    post-measurement state of the unmeasured modes.  When one reading can
    arise from several occupations of the measured modes (multi-mode or
    bucket detectors) that state is mixed and reported as None.
    """
    measured = sorted({i for d in detectors for i in d.modes})
    measured_set = set(measured)
    kept = [i for i in range(len(state.registry)) if i not in measured_set]
    sub_registry = ModeRegistry(state.registry[i] for i in kept)

    branches: dict[tuple, dict[tuple, dict]] = {}
    for occ, amp in state.amplitudes.items():
        reading = tuple(d.count(occ) for d in detectors)
        config = tuple(occ[i] for i in measured)
        rest = tuple(occ[i] for i in kept)
        branches.setdefault(reading, {}).setdefault(config, {})[rest] = amp

    dist = count_distribution(state, detectors)
    conditionals: dict[tuple, Optional[StateVector]] = {}
    for reading, configs in branches.items():
        if len(configs) != 1:
            conditionals[reading] = None
            continue
        (amps,) = configs.values()
        sub = StateVector(sub_registry, amps, state.tolerance, state.photon_cap)
        conditionals[reading] = normalize(sub)[1] if not sub.is_empty() else sub
    return dist, conditionals


def postselect(state: StateVector, pattern: HeraldPattern) -> tuple[float, StateVector]:
    """Project onto the accepted readings.

    Returns the acceptance probability (relative to ``state``'s norm) and the
    normalised projected state on the full registry.  A pattern that can never
    fire gives ``(0.0, empty state)``; callers decide whether that is fatal.
    """
    kept = {k: v for k, v in state.amplitudes.items() if pattern.matches(k)}
    projected = StateVector(state.registry, kept, state.tolerance, state.photon_cap)
    base = state.norm() ** 2
    if projected.is_empty() or base == 0.0:
        return 0.0, StateVector(state.registry, {}, state.tolerance, state.photon_cap)
    n, unit = normalize(projected)
    return n * n / base, unit


def coincidence_accept(counts: Sequence[int], rail_a=(0, 1), rail_b=(2, 3)) -> bool:
    """One photon across each rail's (H, V) detector pair."""
    return sum(counts[i] for i in rail_a) == 1 and sum(counts[i] for i in rail_b) == 1


def loss_mode_label(detector: DetectorSpec, label: ModeLabel, position: int) -> ModeLabel:
    tag = detector.name or f"det{position}"
    return ModeLabel(f"~loss[{tag}]{label.rail}", label.pol)


def apply_detector_efficiency(
    state: StateVector, detector: DetectorSpec, eta_d: float
) -> StateVector:
    """Model a detector of efficiency ``eta_d`` as loss in front of an ideal one.

    Every mode the detector reads is coupled to a fresh vacuum environment
    mode on a beamsplitter of amplitude transmission sqrt(eta_d).  The
    environment modes are appended to the registry and never measured, so
    tracing them is implicit in :func:`count_distribution`.
    """
    if not 0.0 <= eta_d <= 1.0:
        raise ValueError(f"detector efficiency {eta_d} outside [0, 1]")
    env_labels = [
        loss_mode_label(detector, state.registry[i], k) for k, i in enumerate(detector.modes)
    ]
    registry = state.registry.concat(ModeRegistry(env_labels))
    pad = (0,) * len(env_labels)
    grown = StateVector(
        registry,
        {k + pad: v for k, v in state.amplitudes.items()},
        state.tolerance,
        state.photon_cap,
    )
    if eta_d == 1.0:
        return grown
    u = beamsplitter_unitary(math.sqrt(eta_d), "B")
    base = len(state.registry)
    for k, i in enumerate(detector.modes):
        grown = apply_mode_unitary(grown, u, (i, base + k))
    return grown


def _binomial_row(n: int, eta: float) -> list[float]:
    return [math.comb(n, k) * eta**k * (1.0 - eta) ** (n - k) for k in range(n + 1)]


def thin_counts(
    readings: OutcomeDistribution, eta_d: float, *, resolving: bool = True
) -> OutcomeDistribution:
    """Detector loss applied to an ideal photon-number-resolving reading distribution.

    Each photon reaching a detector is registered independently with
    probability ``eta_d``, so a count n becomes k with probability
    C(n, k) eta^k (1 - eta)^(n - k).  This equals the mode-level loss model
    of :func:`apply_detector_efficiency` followed by counting, because the
    loss sits after every interference.
    """
    if not 0.0 <= eta_d <= 1.0:
        raise ValueError(f"detector efficiency {eta_d} outside [0, 1]")
    out: dict[tuple[int, ...], float] = {}
    for reading, p in readings.items():
        branches = [((), p)]
        for n in reading:
            row = _binomial_row(n, eta_d) if eta_d != 1.0 else [0.0] * n + [1.0]
            branches = [
                (prefix + (k if resolving else min(k, 1),), q * w)
                for prefix, q in branches
                for k, w in enumerate(row)
                if w > 0.0
            ]
        for key, q in branches:
            out[key] = out.get(key, 0.0) + q
    return OutcomeDistribution(out, readings.total_probability)
