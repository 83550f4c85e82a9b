"""Lamb-Dicke sideband propagators and a full-interaction integrator.

In the Lamb-Dicke regime a resonant drive couples the cavity two-level system
to one membrane at a time:

* carrier   |g,{m}>   <-> |e,{m}>      at rate Omega
* red (i)   |g,m_i>   <-> |e,m_i - 1>  at rate Omega eta_i sqrt(m_i)
* blue (i)  |g,m_i>   <-> |e,m_i + 1>  at rate Omega eta_i sqrt(m_i + 1)

Each propagator is an exact rotation on these 2-D blocks; the drive phase
enters as exp(-i phi) on the g -> e amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from ._blocks import rotate_blocks, shift
from .errors import CutoffViolation, InvalidArgumentError, NumericFailure
from .hilbert import StateVector
from .phase import OverPi, as_over_pi, unit_phase

__all__ = [
    "DriveConfig",
    "Pulse",
    "rabi_frequency",
    "apply_carrier",
    "apply_red",
    "apply_blue",
    "apply_pulse",
    "integrate_two_level",
    "ValidationCheck",
    "ValidationReport",
    "validate_params",
]

PULSE_KINDS = ("carrier", "red", "blue")


def _tuple(x, n=None):
    if np.isscalar(x):
        if n is None:
            raise InvalidArgumentError("scalar needs an explicit mode count")
        return (float(x),) * n
    return tuple(float(v) for v in x)


@dataclass(frozen=True)
class DriveConfig:
    """Drive strength, Lamb-Dicke parameters and membrane frequencies.

    ``gamma_m`` may be a scalar or one rate per membrane; decay rates only
    feed :func:`validate_params`.
    """

    omega_rabi: float
    eta: tuple[float, ...]
    omega_m: tuple[float, ...]
    gamma_c: float = 0.0
    gamma_m: tuple[float, ...] = ()

    def __post_init__(self):
        if np.isscalar(self.eta) and not np.isscalar(self.omega_m):
            eta = _tuple(self.eta, len(self.omega_m))
        else:
            eta = _tuple(self.eta)
        om = _tuple(self.omega_m, len(eta))
        gm = self.gamma_m
        if np.isscalar(gm):
            gm = (float(gm),) * len(eta)
        else:
            gm = tuple(float(g) for g in gm) or (0.0,) * len(eta)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "omega_m", om)
        object.__setattr__(self, "gamma_m", gm)
        if len(om) != len(eta) or len(gm) != len(eta):
            raise InvalidArgumentError("eta, omega_m and gamma_m need one entry per membrane")
        if any(e <= 0 for e in eta):
            raise InvalidArgumentError("Lamb-Dicke parameters must be positive")
        if any(w <= 0 for w in om):
            raise InvalidArgumentError("membrane frequencies must be positive")
        if self.omega_rabi < 0:
            raise InvalidArgumentError("drive amplitude must be non-negative")
        if self.gamma_c < 0 or any(g < 0 for g in gm):
            raise InvalidArgumentError("decay rates must be non-negative")

    @property
    def n_modes(self):
        return len(self.eta)

    @property
    def g(self):
        """Single-photon couplings g_i = eta_i * omega_i."""
        return tuple(e * w for e, w in zip(self.eta, self.omega_m))

    @property
    def delta0(self):
        """Photon-blockade nonlinearity sum_i g_i^2 / omega_i."""
        return sum(g * g / w for g, w in zip(self.g, self.omega_m))

    @classmethod
    def lamb_dicke(cls, n_modes, eta=0.1, omega_rabi=1.0, base=1000.0):
        """Well separated frequencies base*sqrt(i+1) that pass every LD check."""
        return cls(omega_rabi, (eta,) * n_modes, tuple(base * math.sqrt(i + 1) for i in range(n_modes)))

    @classmethod
    def beyond_lamb_dicke(cls, n_modes, eta=0.5, omega_rabi=1.0, base=20.0, ratio=40.0):
        """Geometric frequencies base*ratio^i: every pair obeys the
        |w_i - w_j| >> min(w_i, w_j) >> Omega chain and low-order sideband
        resonances stay apart by at least ``base``."""
        return cls(omega_rabi, (eta,) * n_modes, tuple(base * ratio**i for i in range(n_modes)))

    def with_eta(self, eta):
        return DriveConfig(self.omega_rabi, _tuple(eta, self.n_modes), self.omega_m, self.gamma_c, self.gamma_m)

    def with_omega_rabi(self, omega):
        return DriveConfig(omega, self.eta, self.omega_m, self.gamma_c, self.gamma_m)

    def to_dict(self):
        return {
            "omega_rabi": self.omega_rabi,
            "eta": list(self.eta),
            "omega_m": list(self.omega_m),
            "gamma_c": self.gamma_c,
            "gamma_m": list(self.gamma_m),
        }


def rabi_frequency(kind, membrane, ref_occ, cfg):
    """Omega for the carrier, Omega eta_i sqrt(m) for a sideband at occupation m."""
    if kind == "carrier":
        return cfg.omega_rabi
    if kind in ("red", "blue"):
        _check_membrane(membrane, cfg.n_modes)
        if ref_occ is None or ref_occ < 0:
            raise InvalidArgumentError("sideband Rabi frequency needs a reference occupation >= 0")
        return cfg.omega_rabi * cfg.eta[membrane] * math.sqrt(ref_occ)
    raise InvalidArgumentError(f"unknown pulse kind {kind!r}")


def _check_membrane(i, n):
    if i is None or not 0 <= i < n:
        raise InvalidArgumentError(f"membrane index {i} outside 0..{n - 1}")


@dataclass(frozen=True)
class Pulse:
    """Square carrier or sideband pulse.

    ``phase`` and ``angle`` are multiples of pi. ``angle`` is the rotation
    reached by the block at reference occupation ``ref_occ``; the absolute
    ``duration`` is fixed when the pulse is built against a DriveConfig.
    """

    kind: str
    membrane: int | None
    phase: OverPi
    duration: float
    angle: OverPi | None = None
    ref_occ: int | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in PULSE_KINDS:
            raise InvalidArgumentError(f"unknown pulse kind {self.kind!r}")
        if self.kind == "carrier":
            if self.membrane is not None:
                raise InvalidArgumentError("carrier pulse takes no membrane index")
        elif self.membrane is None or self.membrane < 0:
            raise InvalidArgumentError(f"{self.kind} pulse needs a membrane index")
        if not self.duration >= 0:
            raise InvalidArgumentError(f"duration must be non-negative, got {self.duration}")
        object.__setattr__(self, "phase", as_over_pi(self.phase))
        if self.angle is not None:
            object.__setattr__(self, "angle", as_over_pi(self.angle))

    @classmethod
    def from_angle(cls, kind, membrane, phase, angle, ref_occ, cfg, label=""):
        if kind == "carrier":
            membrane, ref_occ = None, 0 if ref_occ is None else ref_occ
        angle = as_over_pi(angle)
        rate = rabi_frequency(kind, membrane, ref_occ, cfg)
        if rate <= 0:
            raise InvalidArgumentError(f"{kind} pulse at occupation {ref_occ} has zero Rabi frequency")
        return cls(kind, membrane, phase, float(angle) * math.pi / rate, angle, ref_occ, label)

    @property
    def orders(self):
        return None

    def detuning(self, cfg):
        """Drive detuning from the cavity transition implied by the pulse kind."""
        if self.kind == "carrier":
            return 0.0
        w = cfg.omega_m[self.membrane]
        return w if self.kind == "blue" else -w


def _phase_factor(phase):
    return unit_phase(as_over_pi(phase))


def apply_carrier(state, phase, duration, cfg):
    rate = cfg.omega_rabi

    def partner(label):
        s, occ = label
        return (("g", occ), ("e", occ))

    return rotate_blocks(state, partner, lambda g, e: rate * duration, _phase_factor(phase))


def apply_red(state, i, phase, duration, cfg):
    """Red sideband on membrane ``i``: |g, m_i> <-> |e, m_i - 1>."""
    _check_membrane(i, state.n_modes)
    scale = cfg.omega_rabi * cfg.eta[i] * duration

    def partner(label):
        s, occ = label
        if s == "g":
            return None if occ[i] == 0 else (label, ("e", shift(occ, i, -1)))
        return (("g", shift(occ, i, 1)), label)

    return rotate_blocks(state, partner, lambda g, e: scale * math.sqrt(g[1][i]), _phase_factor(phase))


def apply_blue(state, i, phase, duration, cfg):
    """Blue sideband on membrane ``i``: |g, m_i> <-> |e, m_i + 1>."""
    _check_membrane(i, state.n_modes)
    scale = cfg.omega_rabi * cfg.eta[i] * duration

    def partner(label):
        s, occ = label
        if s == "e":
            return None if occ[i] == 0 else (("g", shift(occ, i, -1)), label)
        return (label, ("e", shift(occ, i, 1)))

    return rotate_blocks(state, partner, lambda g, e: scale * math.sqrt(e[1][i]), _phase_factor(phase))


def apply_pulse(state, pulse, cfg):
    if pulse.kind == "carrier":
        return apply_carrier(state, pulse.phase, pulse.duration, cfg)
    if pulse.kind == "red":
        return apply_red(state, pulse.membrane, pulse.phase, pulse.duration, cfg)
    return apply_blue(state, pulse.membrane, pulse.phase, pulse.duration, cfg)


# ---------------------------------------------------------------------------
# full interaction, no rotating-wave approximation


def _ladder(cutoff):
    return np.diag(np.sqrt(np.arange(1, cutoff)), 1)


def _kron_all(ops):
    out = ops[0]
    for o in ops[1:]:
        out = np.kron(out, o)
    return out


def _displacement_terms(eta, cutoff, max_order):
    """Series of exp(eta(b^dag - b)) = e^{-eta^2/2} sum (-1)^k eta^{j+k}/(j!k!) b^dag^j b^k.

    Returns {(eta power, j - k): matrix}; the Gaussian prefactor is expanded
    to the same power.
    """
    b = _ladder(cutoff)
    bd = b.T
    pw_bd = [np.linalg.matrix_power(bd, j) for j in range(max_order + 1)]
    pw_b = [np.linalg.matrix_power(b, k) for k in range(max_order + 1)]
    terms = {}
    for j in range(max_order + 1):
        for k in range(max_order + 1 - j):
            for l in range(0, (max_order - j - k) // 2 + 1):
                power = j + k + 2 * l
                coeff = (-1) ** k * eta**power / (math.factorial(j) * math.factorial(k)) * (-0.5) ** l / math.factorial(l)
                key = (power, j - k)
                mat = coeff * (pw_bd[j] @ pw_b[k])
                terms[key] = terms.get(key, 0) + mat
    return terms


def _drive_terms(pulse, cfg):
    """Drive detuning and phase (radians) used in the full Hamiltonian."""
    if isinstance(pulse, Pulse):
        phi = float(pulse.phase) * math.pi
        if pulse.kind == "red":
            # the resonant red term carries -eta b; shift the phase to match the RWA form
            phi -= math.pi
        return pulse.detuning(cfg), phi
    orders = pulse.orders
    return -sum(n * w for n, w in zip(orders, cfg.omega_m)), float(pulse.phase) * math.pi


def full_hamiltonian_terms(cfg, cutoff, order=4):
    """sigma_+ prod_i D_i(t) as {frequency: matrix on the phonon space}.

    Each displacement series is truncated at total eta power ``order``
    summed over modes. At order 1 this is the Lamb-Dicke coupling.
    """
    n = cfg.n_modes
    per_mode = [_displacement_terms(cfg.eta[i], cutoff, order) for i in range(n)]
    out = {}
    for combo in product(*[list(t.items()) for t in per_mode]):
        power = sum(key[0] for key, _ in combo)
        if power > order:
            continue
        freq = sum(key[1] * cfg.omega_m[i] for i, (key, _) in enumerate(combo))
        mat = _kron_all([m for _, m in combo])
        freq = round(freq, 9)
        out[freq] = out.get(freq, 0) + mat
    return out


def integrate_two_level(state, schedule: Sequence, cfg, tol=1e-10, order=4, method="DOP853"):
    """Propagate ``state`` through ``schedule`` with the full time-dependent coupling.

    The interaction-picture Hamiltonian is
    Omega sigma_+ e^{-i(Delta_d t + phi_d)} prod_i D_i(eta_i e^{i omega_i t}) + h.c.,
    keeping every off-resonant sideband up to the truncation ``order``. The
    drive detuning of each pulse is pinned to its resonance, and times are
    continuous across the schedule so off-resonant phases accumulate.
    """
    n, cutoff = state.n_modes, state.cutoff
    if n != cfg.n_modes:
        raise InvalidArgumentError("state and config disagree on the number of membranes")
    dim_ph = cutoff**n
    terms = full_hamiltonian_terms(cfg, cutoff, order)
    freqs = np.array(list(terms))
    mats = np.array([terms[f] for f in freqs])
    psi = state.to_dense()
    t0 = 0.0
    for pulse in schedule:
        if pulse.duration == 0 or cfg.omega_rabi == 0:
            t0 += pulse.duration
            continue
        delta, phi = _drive_terms(pulse, cfg)
        omega = cfg.omega_rabi

        def rhs(t, y, delta=delta, phi=phi):
            ph = np.exp(1j * (freqs * t - delta * t - phi))
            coupling = omega * np.tensordot(ph, mats, axes=1)
            yg, ye = y[:dim_ph], y[dim_ph:]
            # H = sigma_+ A + sigma_- A^dag with sigma_+ = |e><g|
            return np.concatenate((-1j * (coupling.conj().T @ ye), -1j * (coupling @ yg)))

        sol = solve_ivp(
            rhs,
            (t0, t0 + pulse.duration),
            psi,
            method=method,
            rtol=tol,
            atol=tol * 1e-2,
        )
        if sol.status != 0:
            raise NumericFailure(f"integrator failed: {sol.message}")
        psi = sol.y[:, -1]
        t0 += pulse.duration
    edge = _edge_weight(psi, n, cutoff)
    if edge > 1e-8:
        raise CutoffViolation(f"integrated state leaks {edge:.2e} into the top Fock level")
    return StateVector.from_dense(psi, n, cutoff)


def _edge_weight(psi, n, cutoff):
    arr = np.abs(psi.reshape((2,) + (cutoff,) * n)) ** 2
    total = 0.0
    for i in range(n):
        idx = [slice(None)] * (n + 1)
        idx[i + 1] = cutoff - 1
        total += arr[tuple(idx)].sum()
    return total


# ---------------------------------------------------------------------------
# parameter regime checks


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    description: str
    ratio: float
    threshold: float
    passed: bool

    @property
    def margin(self):
        if self.threshold == 0:
            return math.inf
        return self.ratio / self.threshold

    def to_dict(self):
        return {
            "name": self.name,
            "description": self.description,
            "ratio": self.ratio,
            "threshold": self.threshold,
            "margin": self.margin,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ValidationReport:
    model: str
    checks: tuple[ValidationCheck, ...] = field(default_factory=tuple)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"model": self.model, "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _ratio(a, b):
    if b == 0:
        return math.inf if a > 0 else 0.0
    return a / b


def validate_params(cfg, model="ld", ratio_threshold=10.0):
    """Check the resolved-sideband and two-level conditions.

    ``>>`` is read as ratio >= ratio_threshold. The check on omega_i vs the
    cavity decay is a plain inequality.
    """
    model = model.lower()
    if model not in ("ld", "bld"):
        raise InvalidArgumentError(f"model must be 'ld' or 'bld', got {model!r}")
    thr = float(ratio_threshold)
    om = cfg.omega_m
    checks = []

    r = _ratio(min(om), cfg.gamma_c)
    checks.append(ValidationCheck("i", "omega_i > gamma_c", r, 1.0, r > 1.0))

    gamma = max((cfg.gamma_c,) + tuple(cfg.gamma_m))
    r = _ratio(min(cfg.g), gamma)
    checks.append(ValidationCheck("ii", "g_i >> gamma_c, gamma_m", r, thr, r >= thr))

    anh = sum(2 * g * g / w for g, w in zip(cfg.g, om))
    r = _ratio(anh, cfg.omega_rabi)
    checks.append(ValidationCheck("iii", "sum 2 g_i^2/omega_i >> Omega", r, thr, r >= thr))

    pairs = [(i, j) for i in range(len(om)) for j in range(i + 1, len(om))]
    if model == "ld":
        r = min((_ratio(abs(om[i] - om[j]), cfg.omega_rabi) for i, j in pairs), default=math.inf)
        checks.append(ValidationCheck("iv", "|omega_i - omega_j| >> Omega", r, thr, r >= thr))
    else:
        r = min((_bld_pair_ratio(om[i], om[j], cfg.omega_rabi, gamma) for i, j in pairs), default=math.inf)
        checks.append(
            ValidationCheck(
                "iv",
                "|w_i - w_j| >> min(w_i, w_j) >> Omega >> gamma or min(w_i, w_j) >> |w_i - w_j| >> Omega >> gamma",
                r,
                thr,
                r >= thr,
            )
        )
    return ValidationReport(model, tuple(checks))


def _bld_pair_ratio(wi, wj, omega, gamma):
    """Weakest link of the better of the two separation chains."""
    diff, low = abs(wi - wj), min(wi, wj)
    tail = _ratio(omega, gamma)
    chain_a = min(_ratio(diff, low), _ratio(low, omega), tail)
    chain_b = min(_ratio(low, diff), _ratio(diff, omega), tail)
    return max(chain_a, chain_b)
