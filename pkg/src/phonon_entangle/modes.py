"""Intrinsic cavity modes of a multi-membrane cavity via 2x2 transfer matrices.

Units: c = 1, so a wave vector k doubles as the angular frequency, and all
lengths are in multiples of a reference length L.

The field (E, E') is propagated from the left mirror to the right one with
free-space matrices between membranes and a delta-susceptibility jump at each
membrane. Standing-wave boundary conditions E(q0) = E(qN+1) = 0 make the
intrinsic modes the zeros of the x12 entry of the total matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .errors import InvalidArgumentError, NumericFailure, TrackingFailure

__all__ = [
    "CavityGeometry",
    "Matrix2",
    "ModeSpectrum",
    "CouplingSet",
    "zeta_from_reflectivity",
    "propagation_matrix",
    "membrane_matrix",
    "system_matrix",
    "mode_residual",
    "mode_residuals",
    "find_modes",
    "track_root",
    "coupling_coefficients",
    "sweep_branch",
]


def zeta_from_reflectivity(reflectivity):
    """Dimensionless membrane strength 2*sqrt(R/(1-R))."""
    if not 0.0 <= reflectivity < 1.0:
        raise InvalidArgumentError(f"reflectivity must lie in [0, 1), got {reflectivity}")
    return 2.0 * math.sqrt(reflectivity / (1.0 - reflectivity))


@dataclass(frozen=True)
class CavityGeometry:
    mirror_left: float
    mirror_right: float
    membranes: tuple[float, ...]
    reflectivity: float

    def __post_init__(self):
        object.__setattr__(self, "membranes", tuple(float(q) for q in self.membranes))
        pos = self.positions
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise InvalidArgumentError(f"positions must be strictly increasing, got {pos}")
        zeta_from_reflectivity(self.reflectivity)

    @property
    def zeta(self):
        return zeta_from_reflectivity(self.reflectivity)

    @property
    def n_membranes(self):
        return len(self.membranes)

    @property
    def positions(self):
        """All interfaces (q0, q1, ..., qN, qN+1)."""
        return (float(self.mirror_left),) + self.membranes + (float(self.mirror_right),)

    @property
    def length(self):
        return self.mirror_right - self.mirror_left

    def displaced(self, shifts):
        """Copy with membrane i moved by shifts[i]."""
        if len(shifts) != self.n_membranes:
            raise InvalidArgumentError("one shift per membrane required")
        return replace(self, membranes=tuple(q + d for q, d in zip(self.membranes, shifts)))

    def default_scan_step(self):
        return math.pi / (20.0 * self.length)


class Matrix2(NamedTuple):
    """Real 2x2 matrix [[x11, x12], [x21, x22]] acting on (E, E')."""

    x11: float
    x12: float
    x21: float
    x22: float

    def __matmul__(self, other):
        a, b = self, other
        return Matrix2(
            a.x11 * b.x11 + a.x12 * b.x21,
            a.x11 * b.x12 + a.x12 * b.x22,
            a.x21 * b.x11 + a.x22 * b.x21,
            a.x21 * b.x12 + a.x22 * b.x22,
        )

    def det(self):
        return self.x11 * self.x22 - self.x12 * self.x21

    def as_array(self):
        return np.array([[self.x11, self.x12], [self.x21, self.x22]])


IDENTITY = Matrix2(1.0, 0.0, 0.0, 1.0)


def _check_k(k):
    if not k > 0:
        raise InvalidArgumentError(f"wave vector must be positive, got {k}")


def propagation_matrix(k, l):
    """Free-space transfer over length ``l``."""
    _check_k(k)
    if l < 0:
        raise InvalidArgumentError(f"propagation length must be non-negative, got {l}")
    c, s = math.cos(k * l), math.sin(k * l)
    return Matrix2(c, s / k, -k * s, c)


def membrane_matrix(k, zeta):
    """Jump of E' across a delta membrane of strength ``zeta``; E is continuous."""
    _check_k(k)
    if zeta < 0:
        raise InvalidArgumentError(f"zeta must be non-negative, got {zeta}")
    return Matrix2(1.0, 0.0, -k * zeta, 1.0)


def system_matrix(geom, k):
    """Total transfer from the left mirror to the right mirror.

    The first gap q1 - q0 acts first; each membrane's jump is followed by the
    gap to its right, so membrane i+1's factor multiplies from the left of
    membrane i's.
    """
    q = geom.positions
    zeta = geom.zeta
    x = propagation_matrix(k, q[1] - q[0])
    jump = membrane_matrix(k, zeta)
    for i in range(1, geom.n_membranes + 1):
        x = propagation_matrix(k, q[i + 1] - q[i]) @ (jump @ x)
    return x


def mode_residual(geom, k):
    """x12 of the system matrix; zero exactly at intrinsic modes."""
    return system_matrix(geom, k).x12


def mode_residuals(geom, ks):
    """Vectorized x12 over an array of wave vectors."""
    ks = np.asarray(ks, dtype=float)
    if np.any(ks <= 0):
        raise InvalidArgumentError("wave vectors must be positive")
    q = geom.positions
    zeta = geom.zeta
    l0 = q[1] - q[0]
    c, s = np.cos(ks * l0), np.sin(ks * l0)
    x11, x12, x21, x22 = c, s / ks, -ks * s, c
    for i in range(1, geom.n_membranes + 1):
        # membrane jump: row 2 += -k*zeta * row 1
        x21 = x21 - ks * zeta * x11
        x22 = x22 - ks * zeta * x12
        l = q[i + 1] - q[i]
        c, s = np.cos(ks * l), np.sin(ks * l)
        x11, x12, x21, x22 = (
            c * x11 + s / ks * x21,
            c * x12 + s / ks * x22,
            -ks * s * x11 + c * x21,
            -ks * s * x12 + c * x22,
        )
    return x12


@dataclass(frozen=True)
class ModeSpectrum:
    roots: tuple[float, ...]
    scan_step: float
    residuals: tuple[float, ...]
    rel_tol: float = 1e-12

    @property
    def frequencies(self):
        # c = 1
        return self.roots

    def __len__(self):
        return len(self.roots)

    def to_rows(self):
        return [
            {"index": i, "k": k, "omega": k, "residual": r}
            for i, (k, r) in enumerate(zip(self.roots, self.residuals))
        ]


def _bisect(f, a, b, tol):
    """Bisect a sign-change bracket to width ``tol`` (0 means machine precision)."""

    def g(k):
        v = f(k)
        if not math.isfinite(v):
            raise NumericFailure(f"non-finite residual at k={k}")
        return v

    return optimize.bisect(g, a, b, xtol=max(tol, 1e-300), rtol=4 * np.finfo(float).eps, maxiter=2000)


def _sign_change_roots(geom, grid, rel_tol):
    res = mode_residuals(geom, grid)
    if not np.all(np.isfinite(res)):
        raise NumericFailure("non-finite residual in scan")
    f = lambda k: mode_residual(geom, k)
    roots = []
    for j in range(len(grid) - 1):
        ra, rb = res[j], res[j + 1]
        if ra == 0.0:
            if not roots or roots[-1] != grid[j]:
                roots.append(float(grid[j]))
            continue
        if rb != 0.0 and (ra < 0) != (rb < 0):
            a, b = float(grid[j]), float(grid[j + 1])
            roots.append(_bisect(f, a, b, rel_tol * b))
    if len(grid) and res[-1] == 0.0 and (not roots or roots[-1] != grid[-1]):
        roots.append(float(grid[-1]))
    return roots


def find_modes(geom, k_min, k_max, scan_step=None, rel_tol=1e-12):
    """Scan [k_min, k_max] uniformly and bisect every sign change of x12.

    ``scan_step`` must be small enough that adjacent modes fall in different
    scan intervals; the default is pi / (20 * cavity length).
    """
    if not 0 < k_min < k_max:
        raise InvalidArgumentError(f"need 0 < k_min < k_max, got {k_min}, {k_max}")
    step = geom.default_scan_step() if scan_step is None else float(scan_step)
    if step <= 0:
        raise InvalidArgumentError("scan_step must be positive")
    n = max(1, int(math.ceil((k_max - k_min) / step)))
    grid = k_min + step * np.arange(n + 1)
    grid[-1] = k_max
    roots = sorted(_sign_change_roots(geom, grid, rel_tol))
    residuals = tuple(mode_residual(geom, k) for k in roots)
    return ModeSpectrum(tuple(roots), step, residuals, rel_tol)


def track_root(geom, k_near, window, n_sub=40):
    """Root of ``geom`` nearest ``k_near`` inside ``k_near +- window``.

    Refined to machine precision. Raises TrackingFailure when the window holds
    no sign change.
    """
    lo = max(k_near - window, 1e-300)
    grid = np.linspace(lo, k_near + window, 2 * n_sub + 1)
    roots = _sign_change_roots(geom, grid, 0.0)
    if not roots:
        raise TrackingFailure(
            f"no root within +-{window:g} of k={k_near:.15g} "
            f"(membranes at {geom.membranes})"
        )
    return min(roots, key=lambda r: abs(r - k_near))


@dataclass(frozen=True)
class CouplingSet:
    g1: tuple[float, ...]
    g2: np.ndarray = field(repr=False)
    mode_index: int
    k: float
    fd_step: float
    fd_step2: float

    @property
    def wavelength(self):
        return 2.0 * math.pi / self.k


def coupling_coefficients(geom, spectrum, mode_index, h=None, h2=None, window=None):
    """First- and second-order frequency shifts per unit membrane displacement.

    g1[i] = d omega / d q_i and g2[i][j] = (1/2) d^2 omega / dq_i dq_j at the
    rest positions, by central differences of the tracked root. The default
    steps are 1e-6 and 1e-3 of the mode wavelength; the second derivative
    needs the larger step to stay above root round-off.
    """
    if not 0 <= mode_index < len(spectrum.roots):
        raise InvalidArgumentError(f"mode_index {mode_index} outside spectrum of {len(spectrum)} roots")
    k0 = spectrum.roots[mode_index]
    lam = 2.0 * math.pi / k0
    h = 1e-6 * lam if h is None else float(h)
    h2 = 1e-3 * lam if h2 is None else float(h2)
    win = spectrum.scan_step if window is None else window
    n = geom.n_membranes
    k0 = track_root(geom, k0, win)

    def root_at(shifts):
        return track_root(geom.displaced(shifts), k0, win)

    def unit(i, d):
        v = [0.0] * n
        v[i] = d
        return v

    g1 = tuple(
        (root_at(unit(i, h)) - root_at(unit(i, -h))) / (2.0 * h) for i in range(n)
    )
    g2 = np.zeros((n, n))
    for i in range(n):
        kp, km = root_at(unit(i, h2)), root_at(unit(i, -h2))
        g2[i, i] = 0.5 * (kp - 2.0 * k0 + km) / h2**2
        for j in range(i + 1, n):
            def shifted(a, b):
                v = [0.0] * n
                v[i], v[j] = a, b
                return root_at(v)
            d = (shifted(h2, h2) - shifted(h2, -h2) - shifted(-h2, h2) + shifted(-h2, -h2)) / (4.0 * h2**2)
            g2[i, j] = g2[j, i] = 0.5 * d
    return CouplingSet(g1, g2, mode_index, k0, h, h2)


def sweep_branch(geom, k_start, membrane, displacements, window=None):
    """Follow one mode continuously while membrane ``membrane`` moves.

    ``displacements`` must start at 0 and change in steps small enough that
    the root moves less than ``window`` per step.
    """
    win = geom.default_scan_step() if window is None else window
    k = track_root(geom, k_start, win)
    out = []
    for d in displacements:
        shifts = [0.0] * geom.n_membranes
        shifts[membrane] = d
        k = track_root(geom.displaced(shifts), k, win)
        out.append(k)
    return np.array(out)
