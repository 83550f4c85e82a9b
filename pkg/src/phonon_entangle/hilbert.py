"""Sparse states of a two-level cavity coupled to N truncated phonon modes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import CutoffViolation, DimensionMismatch, InvalidArgumentError

__all__ = [
    "CAVITY_LEVELS",
    "PRUNE_EPS",
    "StateVector",
    "TargetState",
    "basis_state",
    "superposition",
    "overlap_fidelity",
    "target_state",
    "default_cutoff",
    "random_state",
    "format_ket",
]

CAVITY_LEVELS = ("g", "e")
PRUNE_EPS = 1e-14
GUARD_LEVELS = 4


def default_cutoff(max_phonons):
    """Fock levels 0..max_phonons plus four guard levels."""
    return int(max_phonons) + 1 + GUARD_LEVELS


def format_ket(label):
    s, occ = label
    return "|" + ",".join([s, *map(str, occ)]) + ">"


def _check_label(label, n_modes, cutoff):
    s, occ = label
    if s not in CAVITY_LEVELS:
        raise InvalidArgumentError(f"cavity level must be 'g' or 'e', got {s!r}")
    if len(occ) != n_modes:
        raise DimensionMismatch(f"expected {n_modes} occupations, got {len(occ)}")
    for m in occ:
        if m < 0:
            raise InvalidArgumentError(f"negative occupation in {format_ket(label)}")
        if m >= cutoff:
            raise CutoffViolation(f"{format_ket(label)} reaches cutoff {cutoff}")


class StateVector:
    """Immutable sparse amplitude map ``(s, occupations) -> complex``.

    Amplitudes with modulus below ``prune_eps`` are dropped on construction,
    and iteration is always in sorted label order.
    """

    __slots__ = ("n_modes", "cutoff", "prune_eps", "_amps")

    def __init__(self, n_modes, cutoff, amplitudes: Mapping = (), prune_eps=PRUNE_EPS, _trusted=False):
        if n_modes < 0 or cutoff < 1:
            raise InvalidArgumentError("need n_modes >= 0 and cutoff >= 1")
        self.n_modes = int(n_modes)
        self.cutoff = int(cutoff)
        self.prune_eps = prune_eps
        items = amplitudes.items() if isinstance(amplitudes, Mapping) else amplitudes
        amps = {}
        for (s, occ), a in items:
            label = (s, tuple(int(m) for m in occ))
            if not _trusted:
                _check_label(label, self.n_modes, self.cutoff)
            a = complex(a)
            if abs(a) >= prune_eps:
                amps[label] = amps.get(label, 0.0) + a
        self._amps = dict(sorted((k, v) for k, v in amps.items() if abs(v) >= prune_eps))

    # mapping-like access
    def __getitem__(self, label):
        s, occ = label
        return self._amps.get((s, tuple(occ)), 0j)

    def __iter__(self):
        return iter(self._amps)

    def __len__(self):
        return len(self._amps)

    def items(self):
        return self._amps.items()

    def labels(self):
        return list(self._amps)

    def __repr__(self):
        terms = " + ".join(f"({a:.6g}){format_ket(l)}" for l, a in self._amps.items())
        return f"StateVector[{self.n_modes} modes, cutoff {self.cutoff}]: {terms or '0'}"

    def __eq__(self, other):
        return (
            isinstance(other, StateVector)
            and self.n_modes == other.n_modes
            and self.cutoff == other.cutoff
            and self._amps == other._amps
        )

    __hash__ = None

    def norm(self):
        return math.sqrt(sum(abs(a) ** 2 for a in self._amps.values()))

    def normalized(self):
        nrm = self.norm()
        if nrm == 0:
            raise InvalidArgumentError("cannot normalize the zero vector")
        return self.scaled(1.0 / nrm)

    def scaled(self, c):
        return self._new({k: c * a for k, a in self._amps.items()})

    def inner(self, other):
        """<self|other>."""
        self._check_compatible(other)
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        acc = 0j
        for k, a in small._amps.items():
            b = big._amps.get(k)
            if b is not None:
                acc += a.conjugate() * b if small is self else b.conjugate() * a
        return acc

    def _check_compatible(self, other):
        if self.n_modes != other.n_modes or self.cutoff != other.cutoff:
            raise DimensionMismatch(
                f"states differ: ({self.n_modes} modes, cutoff {self.cutoff}) vs "
                f"({other.n_modes} modes, cutoff {other.cutoff})"
            )

    def _new(self, amps):
        return StateVector(self.n_modes, self.cutoff, amps, self.prune_eps, _trusted=True)

    def with_cutoff(self, cutoff):
        return StateVector(self.n_modes, cutoff, self._amps, self.prune_eps)

    def max_occupation(self):
        return max((max(occ, default=0) for _, occ in self._amps), default=0)

    # dense conversion, used by the oracles
    def dim(self):
        return 2 * self.cutoff ** self.n_modes

    def index_of(self, label):
        s, occ = label
        idx = CAVITY_LEVELS.index(s)
        for m in occ:
            idx = idx * self.cutoff + m
        return idx

    def label_of(self, index):
        occ = []
        for _ in range(self.n_modes):
            index, m = divmod(index, self.cutoff)
            occ.append(m)
        return (CAVITY_LEVELS[index], tuple(reversed(occ)))

    def to_dense(self):
        v = np.zeros(self.dim(), dtype=complex)
        for label, a in self._amps.items():
            v[self.index_of(label)] = a
        return v

    @classmethod
    def from_dense(cls, vec, n_modes, cutoff, prune_eps=PRUNE_EPS):
        vec = np.asarray(vec)
        if vec.shape != (2 * cutoff ** n_modes,):
            raise DimensionMismatch(f"dense vector has shape {vec.shape}")
        proto = cls(n_modes, cutoff)
        amps = {proto.label_of(int(i)): vec[i] for i in np.flatnonzero(np.abs(vec) >= prune_eps)}
        return cls(n_modes, cutoff, amps, prune_eps, _trusted=True)

    # serialization
    def to_json(self):
        return [
            {"cavity": s, "occupations": list(occ), "re": a.real, "im": a.imag}
            for (s, occ), a in self._amps.items()
        ]

    @classmethod
    def from_json(cls, terms, n_modes, cutoff):
        return cls(
            n_modes,
            cutoff,
            {(t["cavity"], tuple(t["occupations"])): complex(t["re"], t["im"]) for t in terms},
        )


def basis_state(cavity, occupations, cutoff):
    occ = tuple(occupations)
    return StateVector(len(occ), cutoff, {(cavity, occ): 1.0})


def superposition(terms: Iterable, n_modes, cutoff, normalize=True):
    """State from ``(coefficient, cavity, occupations)`` triples."""
    amps = {}
    for c, s, occ in terms:
        key = (s, tuple(occ))
        amps[key] = amps.get(key, 0) + c
    st = StateVector(n_modes, cutoff, amps)
    return st.normalized() if normalize else st


def overlap_fidelity(a, b):
    """|<a|b>|^2 for normalized states; blind to global phase."""
    return min(1.0, abs(a.inner(b)) ** 2)


@dataclass(frozen=True)
class TargetState:
    kind: str
    n_modes: int
    state: StateVector
    n_phonon: int | None = None

    def describe(self):
        return {"kind": self.kind, "n_modes": self.n_modes, "n_phonon": self.n_phonon}


TARGET_KINDS = ("bell", "noon", "ghz", "w")


def target_max_phonons(kind, n_modes, n_phonon=None):
    return n_phonon if kind == "noon" else 1


def target_state(kind, n_modes, cutoff=None, n_phonon=None):
    """Named entangled target with the cavity in its ground state.

    bell: (|1,0> + |0,1>)/sqrt2; noon: (|N,0> + |0,N>)/sqrt2;
    ghz: (|0..0> + |1..1>)/sqrt2; w: single phonon shared evenly.
    """
    kind = kind.lower()
    if kind not in TARGET_KINDS:
        raise InvalidArgumentError(f"unknown target kind {kind!r}")
    if kind in ("bell", "noon") and n_modes != 2:
        raise InvalidArgumentError(f"{kind} target needs 2 modes, got {n_modes}")
    if kind in ("ghz", "w") and n_modes < 2:
        raise InvalidArgumentError(f"{kind} target needs at least 2 modes, got {n_modes}")
    if kind == "noon":
        if n_phonon is None or n_phonon < 1:
            raise InvalidArgumentError("noon target needs n_phonon >= 1")
    else:
        n_phonon = None
    if cutoff is None:
        cutoff = default_cutoff(target_max_phonons(kind, n_modes, n_phonon))
    r = 1 / math.sqrt(2)
    if kind == "bell":
        terms = [(r, "g", (1, 0)), (r, "g", (0, 1))]
    elif kind == "noon":
        terms = [(r, "g", (n_phonon, 0)), (r, "g", (0, n_phonon))]
    elif kind == "ghz":
        terms = [(r, "g", (0,) * n_modes), (r, "g", (1,) * n_modes)]
    else:
        w = 1 / math.sqrt(n_modes)
        terms = [(w, "g", tuple(int(i == j) for j in range(n_modes))) for i in range(n_modes)]
    return TargetState(kind, n_modes, superposition(terms, n_modes, cutoff, normalize=False), n_phonon)


def random_state(n_modes, cutoff, rng, max_occ=None, n_terms=None):
    """Random normalized state supported on occupations <= max_occ."""
    max_occ = cutoff - 1 if max_occ is None else max_occ
    size = 2 * (max_occ + 1) ** n_modes
    n_terms = size if n_terms is None else min(n_terms, size)
    picks = rng.choice(size, size=n_terms, replace=False)
    amps = {}
    for p in picks:
        p = int(p)
        occ = []
        for _ in range(n_modes):
            p, m = divmod(p, max_occ + 1)
            occ.append(m)
        amps[(CAVITY_LEVELS[p], tuple(occ))] = complex(rng.normal(), rng.normal())
    return StateVector(n_modes, cutoff, amps).normalized()
