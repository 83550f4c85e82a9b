"""Multi-phonon sideband propagators beyond the Lamb-Dicke regime.

A drive detuned by -sum_i n_i omega_i from the cavity transition resonantly
couples |g, {m' + n}> to |e, {m'}>. The rate is Omega times a product of
displacement matrix elements

    xi_m^n(eta) = <m + n| exp(eta (b^dag - b)) |m>
               = e^{-eta^2/2} eta^n sqrt(m!/(m+n)!) L_m^n(eta^2)     (n >= 0)
    xi_m^n      = (-1)^|n| xi_{m-|n|}^{|n|}                          (-m <= n < 0)

Positive orders remove phonons when the cavity is excited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from scipy import special

from ._blocks import rotate_blocks
from .errors import (
    DimensionMismatch,
    InvalidArgumentError,
    ResonanceConflict,
    UnreachableTransition,
)
from .phase import OverPi, as_over_pi, unit_phase

__all__ = [
    "laguerre",
    "xi",
    "XiTable",
    "effective_rabi",
    "MultiSidebandPulse",
    "apply_multisideband",
    "check_resonance",
    "UNREACHABLE_FLOOR",
]

UNREACHABLE_FLOOR = 1e-12


def laguerre(m, alpha, x):
    """Associated Laguerre polynomial L_m^alpha(x)."""
    if m < 0 or alpha < 0:
        raise InvalidArgumentError("laguerre needs m >= 0 and alpha >= 0")
    return float(special.eval_genlaguerre(int(m), alpha, x))


@lru_cache(maxsize=65536)
def _xi_nonneg(m, n, eta):
    if eta == 0.0:
        return 1.0 if n == 0 else 0.0
    x = eta * eta
    log_ratio = 0.5 * (math.lgamma(m + 1) - math.lgamma(m + n + 1))
    # eta^n sqrt(m!/(m+n)!) in log space: large n would overflow factorials
    pref = math.exp(n * math.log(eta) + log_ratio - 0.5 * x)
    return pref * laguerre(m, n, x)


def xi(m, n, eta):
    """Displacement matrix element <m+n|D(eta)|m>; zero when m+n < 0."""
    m, n = int(m), int(n)
    if m < 0:
        raise InvalidArgumentError(f"occupation must be non-negative, got {m}")
    if eta < 0:
        raise InvalidArgumentError("eta must be non-negative")
    if m + n < 0:
        return 0.0
    if n >= 0:
        return _xi_nonneg(m, n, float(eta))
    k = -n
    return (-1) ** k * _xi_nonneg(m - k, k, float(eta))


@dataclass(frozen=True)
class XiTable:
    """xi_m^n on the grid 0 <= m <= max_m, -max_n <= n <= max_n for one eta."""

    eta: float
    max_m: int
    max_n: int

    def values(self):
        ns = range(-self.max_n, self.max_n + 1)
        return np.array([[xi(m, n, self.eta) for n in ns] for m in range(self.max_m + 1)])

    def rows(self):
        for m in range(self.max_m + 1):
            for n in range(-self.max_n, self.max_n + 1):
                yield {"eta": self.eta, "m": m, "n": n, "xi": xi(m, n, self.eta)}


def effective_rabi(occupations, orders, cfg):
    """Omega prod_i xi_{m_i}^{n_i}(eta_i), signed."""
    if len(occupations) != cfg.n_modes or len(orders) != cfg.n_modes:
        raise DimensionMismatch("one occupation and one order per membrane required")
    r = cfg.omega_rabi
    for m, n, eta in zip(occupations, orders, cfg.eta):
        f = xi(m, n, eta)
        if f == 0.0:
            return 0.0
        r *= f
    return r


@dataclass(frozen=True)
class MultiSidebandPulse:
    """Drive resonant with the order vector ``orders``.

    ``angle`` (multiple of pi) is reached by the block whose excited-state
    occupations equal ``ref_occ``; ``duration`` is absolute time.
    """

    orders: tuple[int, ...]
    phase: OverPi
    duration: float
    angle: OverPi | None = None
    ref_occ: tuple[int, ...] | None = None
    label: str = ""

    kind = "multi"
    membrane = None

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(n) for n in self.orders))
        if self.ref_occ is not None:
            object.__setattr__(self, "ref_occ", tuple(int(m) for m in self.ref_occ))
        object.__setattr__(self, "phase", as_over_pi(self.phase))
        if self.angle is not None:
            object.__setattr__(self, "angle", as_over_pi(self.angle))
        if not self.duration >= 0:
            raise InvalidArgumentError(f"duration must be non-negative, got {self.duration}")

    @classmethod
    def from_angle(cls, orders, phase, angle, ref_occ, cfg, label=""):
        angle = as_over_pi(angle)
        ref_occ = tuple(ref_occ) if ref_occ is not None else (0,) * len(orders)
        rate = effective_rabi(ref_occ, orders, cfg)
        if abs(rate) < UNREACHABLE_FLOOR * cfg.omega_rabi:
            raise UnreachableTransition(
                f"orders {tuple(orders)} from occupations {ref_occ}: effective Rabi "
                f"{rate:.3e} below {UNREACHABLE_FLOOR:g} Omega"
            )
        return cls(tuple(orders), phase, float(angle) * math.pi / abs(rate), angle, ref_occ, label)

    def detuning(self, cfg):
        return -sum(n * w for n, w in zip(self.orders, cfg.omega_m))


def check_resonance(orders, cfg, cutoff):
    """Raise ResonanceConflict if another order vector within the cutoff is
    resonant within Omega of the requested one."""
    n = len(orders)
    top = cutoff - 1
    w = np.asarray(cfg.omega_m)
    target = np.asarray(orders)
    grid = np.array(list(product(range(-top, top + 1), repeat=n)))
    gaps = np.abs((grid - target) @ w)
    other = np.any(grid != target, axis=1)
    bad = other & (gaps < cfg.omega_rabi)
    if np.any(bad):
        j = int(np.flatnonzero(bad)[np.argmin(gaps[bad])])
        raise ResonanceConflict(
            f"orders {tuple(orders)} and {tuple(int(v) for v in grid[j])} are resonant within "
            f"{gaps[j]:.3g} < Omega = {cfg.omega_rabi:g}"
        )


def apply_multisideband(state, pulse, cfg, guard=True, duration=None):
    """Rotate every |g, {m'+n}> <-> |e, {m'}> block of ``pulse``'s order vector.

    The e-branch amplitude acquires -i e^{-i phi} (-1)^{sum n} sin(Omega_eff t).
    Labels whose partner has a negative occupation are left unchanged.
    ``duration`` overrides the pulse's own; a negative value gives the inverse.
    """
    orders = pulse.orders
    if len(orders) != state.n_modes or cfg.n_modes != state.n_modes:
        raise DimensionMismatch(f"orders {orders} do not match {state.n_modes} modes")
    if guard:
        check_resonance(orders, cfg, state.cutoff)
    t = pulse.duration if duration is None else duration
    sigma = -1.0 if sum(orders) % 2 else 1.0

    def partner(label):
        s, occ = label
        if s == "g":
            e_occ = tuple(m - k for m, k in zip(occ, orders))
            if min(e_occ) < 0:
                return None
            return (label, ("e", e_occ))
        g_occ = tuple(m + k for m, k in zip(occ, orders))
        if min(g_occ) < 0:
            return None
        return (("g", g_occ), label)

    def theta(g_label, e_label):
        return effective_rabi(e_label[1], orders, cfg) * t

    return rotate_blocks(state, partner, theta, unit_phase(pulse.phase), sigma)
