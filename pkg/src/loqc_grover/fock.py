"""Multi-mode Fock states and their evolution under passive linear optics.

A state is a sparse map from occupation tuples to complex amplitudes over an
ordered registry of (rail, polarization) modes.  Two independent engines give
transition amplitudes:

* :func:`apply_mode_unitary` expands the transformed creation-operator
  monomials directly (the engine everything else runs on);
* :func:`transition_amplitude_permanent` evaluates permanents of unitary
  submatrices and exists as a cross-check.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateStateError,
    PhotonCapError,
    RegistryConflictError,
    RegistryError,
    ValidationError,
)

DEFAULT_PHOTON_CAP = 6
DEFAULT_TOLERANCE = 1e-14
UNITARY_ATOL = 1e-10

Occupation = tuple[int, ...]


class Polarization(str, enum.Enum):
    H = "H"
    V = "V"


@dataclass(frozen=True, order=True)
class ModeLabel:
    rail: str
    pol: Polarization

    def __post_init__(self):
        object.__setattr__(self, "pol", Polarization(self.pol))

    def __str__(self):
        return f"{self.rail}{self.pol.value}"


class ModeRegistry:
    """Ordered, immutable collection of mode labels with index lookup."""

    __slots__ = ("_labels", "_index")

    def __init__(self, labels: Iterable[ModeLabel]):
        self._labels = tuple(labels)
        self._index = {}
        for i, label in enumerate(self._labels):
            if not isinstance(label, ModeLabel):
                raise TypeError(f"expected ModeLabel, got {label!r}")
            if label in self._index:
                raise RegistryConflictError(f"duplicate mode {label}")
            self._index[label] = i

    @classmethod
    def from_rails(cls, rails: Iterable[str]) -> "ModeRegistry":
        """One H and one V mode per rail, H first."""
        return cls(ModeLabel(r, p) for r in rails for p in Polarization)

    @property
    def labels(self) -> tuple[ModeLabel, ...]:
        return self._labels

    @property
    def rails(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(label.rail for label in self._labels))

    def index(self, rail, pol=None) -> int:
        label = rail if isinstance(rail, ModeLabel) else ModeLabel(rail, pol)
        try:
            return self._index[label]
        except KeyError:
            raise RegistryError(f"mode {label} is not in the registry") from None

    def rail_modes(self, rail: str) -> tuple[int, int]:
        """Indices of the (H, V) modes of ``rail``."""
        return self.index(rail, Polarization.H), self.index(rail, Polarization.V)

    def has_rail(self, rail: str) -> bool:
        return ModeLabel(rail, Polarization.H) in self._index

    def concat(self, other: "ModeRegistry") -> "ModeRegistry":
        clash = set(self._labels) & set(other._labels)
        if clash:
            names = ", ".join(sorted(str(c) for c in clash))
            raise RegistryConflictError(f"registries share modes: {names}")
        return ModeRegistry(self._labels + other._labels)

    def __len__(self):
        return len(self._labels)

    def __iter__(self) -> Iterator[ModeLabel]:
        return iter(self._labels)

    def __getitem__(self, i) -> ModeLabel:
        return self._labels[i]

    def __eq__(self, other):
        return isinstance(other, ModeRegistry) and self._labels == other._labels

    def __hash__(self):
        return hash(self._labels)

    def __repr__(self):
        return f"ModeRegistry([{', '.join(map(str, self._labels))}])"


@dataclass(frozen=True)
class StateVector:
    """Sparse pure state.  Treat ``amplitudes`` as read-only."""

    registry: ModeRegistry
    amplitudes: Mapping[Occupation, complex] = field(default_factory=dict)
    tolerance: float = DEFAULT_TOLERANCE
    photon_cap: int = DEFAULT_PHOTON_CAP

    def __post_init__(self):
        m = len(self.registry)
        cleaned = {}
        for occ, amp in self.amplitudes.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != m:
                raise ValidationError(
                    f"basis state {occ} has {len(occ)} modes, registry has {m}"
                )
            if min(occ, default=0) < 0:
                raise ValidationError(f"negative occupation in {occ}")
            if sum(occ) > self.photon_cap:
                raise PhotonCapError(
                    f"basis state {occ} holds {sum(occ)} photons, cap is {self.photon_cap}"
                )
            amp = complex(amp)
            if abs(amp) >= self.tolerance:
                cleaned[occ] = cleaned.get(occ, 0j) + amp
        object.__setattr__(self, "amplitudes", cleaned)

    def _like(self, amplitudes, registry=None) -> "StateVector":
        return StateVector(
            self.registry if registry is None else registry,
            amplitudes,
            tolerance=self.tolerance,
            photon_cap=self.photon_cap,
        )

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return self.amplitudes.get(tuple(occupation), 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def is_empty(self) -> bool:
        return not self.amplitudes

    def scaled(self, factor: complex) -> "StateVector":
        return self._like({k: factor * v for k, v in self.amplitudes.items()})

    def __add__(self, other: "StateVector") -> "StateVector":
        if other.registry != self.registry:
            raise RegistryError("cannot add states over different registries")
        out = dict(self.amplitudes)
        for k, v in other.amplitudes.items():
            out[k] = out.get(k, 0j) + v
        return self._like(out)

    def __len__(self):
        return len(self.amplitudes)

    def items(self):
        return self.amplitudes.items()

    def __str__(self):
        terms = sorted(self.amplitudes.items())
        return " + ".join(f"({a:.6g})|{','.join(map(str, k))}>" for k, a in terms) or "0"


def basis_state(
    registry: ModeRegistry,
    occupation: Sequence[int],
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    photon_cap: int = DEFAULT_PHOTON_CAP,
) -> StateVector:
    return StateVector(registry, {tuple(occupation): 1.0}, tolerance, photon_cap)


def vacuum(registry: ModeRegistry, **kwargs) -> StateVector:
    return basis_state(registry, (0,) * len(registry), **kwargs)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    registry = a.registry.concat(b.registry)
    amps = {
        ka + kb: va * vb for ka, va in a.amplitudes.items() for kb, vb in b.amplitudes.items()
    }
    return StateVector(
        registry,
        amps,
        tolerance=min(a.tolerance, b.tolerance),
        photon_cap=max(a.photon_cap, b.photon_cap),
    )


def normalize(state: StateVector) -> tuple[float, StateVector]:
    n = state.norm()
    if n == 0.0:
        raise DegenerateStateError("cannot normalize the zero vector")
    return n, state.scaled(1.0 / n)


def total_photons(state: StateVector) -> set[int]:
    return {sum(k) for k in state.amplitudes}


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.registry != b.registry:
        raise RegistryError("inner product of states over different registries")
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for k, v in small.amplitudes.items():
        w = large.amplitudes.get(k)
        if w is not None:
            total += (v.conjugate() * w) if small is a else (w.conjugate() * v)
    return total


def check_unitary(u: np.ndarray, atol: float = UNITARY_ATOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > atol:
        raise ValidationError(f"matrix is not unitary (max deviation {err:.3g})")
    return u


@lru_cache(maxsize=65536)
def _expand(u_key: bytes, m: int, occ: Occupation) -> tuple[tuple[Occupation, complex], ...]:
    """Output occupations and amplitudes for one input occupation on ``m`` modes.

    Each input photon in mode k becomes sum_j u[j, k] b_j^dagger; the product of
    those linear forms is expanded monomial by monomial and the Fock
    normalisation sqrt(prod m_j! / prod n_k!) applied at the end.
    """
    u = np.frombuffer(u_key, dtype=complex).reshape(m, m)
    poly: dict[Occupation, complex] = {(0,) * m: 1.0 + 0j}
    for k, n in enumerate(occ):
        column = u[:, k]
        support = [j for j in range(m) if column[j] != 0]
        for _ in range(n):
            nxt: dict[Occupation, complex] = {}
            for mono, c in poly.items():
                for j in support:
                    key = mono[:j] + (mono[j] + 1,) + mono[j + 1 :]
                    nxt[key] = nxt.get(key, 0j) + c * column[j]
            poly = nxt
    in_norm = math.prod(math.factorial(n) for n in occ)
    out = []
    for mono, c in poly.items():
        factor = math.sqrt(math.prod(math.factorial(n) for n in mono) / in_norm)
        out.append((mono, c * factor))
    return tuple(out)


def apply_mode_unitary(state: StateVector, u, modes: Sequence[int]) -> StateVector:
    """Apply the m x m single-particle unitary ``u`` to registry modes ``modes``.

    ``u[j, k]`` is the amplitude for a photon entering ``modes[k]`` to leave in
    ``modes[j]``.
    """
    modes = tuple(int(i) for i in modes)
    u = check_unitary(u)
    if len(set(modes)) != len(modes):
        raise ValueError(f"repeated mode index in {modes}")
    if len(modes) != u.shape[0]:
        raise ValueError(f"{u.shape[0]}x{u.shape[0]} matrix bound to {len(modes)} modes")
    size = len(state.registry)
    for i in modes:
        if not 0 <= i < size:
            raise RegistryError(f"mode index {i} outside registry of size {size}")

    m = len(modes)
    u_key = np.ascontiguousarray(u).tobytes()
    out: dict[Occupation, complex] = {}
    for occ, amp in state.amplitudes.items():
        local = tuple(occ[i] for i in modes)
        base = list(occ)
        for mono, c in _expand(u_key, m, local):
            for i, n in zip(modes, mono):
                base[i] = n
            key = tuple(base)
            out[key] = out.get(key, 0j) + amp * c
    return state._like(out)


def permute_modes(state: StateVector, mapping: Mapping[int, int]) -> StateVector:
    """Move the content of mode ``src`` to mode ``mapping[src]``; exact, no arithmetic."""
    size = len(state.registry)
    perm = list(range(size))
    for src, dst in mapping.items():
        perm[src] = dst
    if sorted(perm) != list(range(size)):
        raise ValueError(f"mapping {dict(mapping)} is not a permutation")
    out = {}
    for occ, amp in state.amplitudes.items():
        new = [0] * size
        for src, n in enumerate(occ):
            new[perm[src]] = n
        out[tuple(new)] = amp
    return state._like(out)


def permanent(matrix) -> complex:
    """Ryser's formula with a Gray-code walk over column subsets."""
    a = np.asarray(matrix, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    sign_n = (-1) ** n
    subset = [False] * n
    size = 0
    for g in range(1, 2**n):
        j = (g & -g).bit_length() - 1
        if subset[j]:
            row_sums -= a[:, j]
            size -= 1
        else:
            row_sums += a[:, j]
            size += 1
        subset[j] = not subset[j]
        total += (-1) ** size * np.prod(row_sums)
    return sign_n * total


def permanent_naive(matrix) -> complex:
    a = np.asarray(matrix, dtype=complex)
    n = a.shape[0]
    return sum(
        (math.prod(a[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n))),
        0j,
    )


def transition_amplitude_permanent(
    inp: Sequence[int], out: Sequence[int], u, *, naive: bool = False
) -> complex:
    """<out| U |inp> = per(U[out-rows, inp-cols]) / sqrt(prod n_i! prod m_j!)."""
    u = np.asarray(u, dtype=complex)
    if sum(inp) != sum(out):
        return 0j
    rows = [j for j, n in enumerate(out) for _ in range(n)]
    cols = [k for k, n in enumerate(inp) for _ in range(n)]
    sub = u[np.ix_(rows, cols)]
    per = permanent_naive(sub) if naive else permanent(sub)
    norm = math.prod(math.factorial(n) for n in inp) * math.prod(math.factorial(n) for n in out)
    return per / math.sqrt(norm)


def fock_basis(modes: int, photons: int) -> list[Occupation]:
    """All occupations of ``modes`` modes holding exactly ``photons`` photons."""
    result = []
    for combo in itertools.combinations_with_replacement(range(modes), photons):
        occ = [0] * modes
        for i in combo:
            occ[i] += 1
        result.append(tuple(occ))
    return result
