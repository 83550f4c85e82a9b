"""Synchronizing two Rabi rotations with frequencies in the ratio sqrt(n/m).

A pulse that must fully transfer two blocks at once needs
sin(Omega_n dt) = +-1 and sin(Omega_m dt) = +-1 simultaneously. This is only
exactly possible when sqrt(n/m) = n'/m' with n', m' both odd. Otherwise the
best achievable |sin| on the worse branch, alpha, is maximized over a finite
set of candidate durations.

All angles are handled as exact rationals of pi until the final sine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import InvalidArgumentError, SyncFailure

__all__ = [
    "RatioClass",
    "SyncSolution",
    "classify_ratio",
    "sqrt_continued_fraction",
    "odd_odd_approximants",
    "alpha_for",
    "alpha_max",
    "best_sync_duration",
    "sin_pi",
    "DEFAULT_DEPTH",
    "DEFAULT_MAX_DURATION",
]

DEFAULT_DEPTH = 8
DEFAULT_MAX_DURATION = 1e4


def sin_pi(x: Fraction):
    """(|sin(pi x)|, sign of sin(pi x)) with exact reduction of x mod 2."""
    x = Fraction(x) % 2
    sign = 1 if x < 1 else -1
    r = x % 1
    if r == 0:
        return 0.0, 0
    if r == Fraction(1, 2):
        return 1.0, sign
    # fold onto [0, 1/2] for accuracy
    r = min(r, 1 - r)
    return math.sin(math.pi * float(r)), sign


@dataclass(frozen=True)
class RatioClass:
    """Classification of sqrt(n/m).

    ``pair`` is (n', m') with gcd 1 when the ratio is rational; for irrational
    ratios ``approximants`` holds the leading odd/odd approximants.
    """

    n: int
    m: int
    variant: str
    pair: tuple[int, int] | None = None
    approximants: tuple[tuple[int, int], ...] = ()


def _isqrt_exact(x):
    r = math.isqrt(x)
    return r if r * r == x else None


def sqrt_continued_fraction(n, m) -> Iterator[int]:
    """Partial quotients of sqrt(n/m) = sqrt(n m)/m, using exact integers."""
    D = n * m
    s = math.isqrt(D)
    if s * s == D:
        # rational: plain Euclid on s/m
        a, b = s, m
        while b:
            q = a // b
            yield q
            a, b = b, a - q * b
        return
    # (P + sqrt D) / Q recurrence; Q always divides D - P^2
    P, Q = 0, m
    while True:
        a = (P + s) // Q
        yield a
        P = a * Q - P
        Q = (D - P * P) // Q


def odd_odd_approximants(n, m) -> Iterator[tuple[int, int]]:
    """Odd/odd fractions p/q approaching sqrt(n/m) with strictly shrinking error.

    Candidates are the semiconvergents (h_{j-2} + t h_{j-1}) / (k_{j-2} + t k_{j-1});
    only those with both parts odd and a better |q sqrt(n/m) - p| than every
    earlier emission are yielded. The quantity compared is q x - p, the
    phase mismatch that enters the synchronization error.
    """
    if _isqrt_exact(n * m) is not None:
        return
    h2, h1 = 0, 1
    k2, k1 = 1, 0
    best = None
    for a in sqrt_continued_fraction(n, m):
        for t in range(1, a + 1):
            p, q = h2 + t * h1, k2 + t * k1
            if q == 0 or p % 2 == 0 or q % 2 == 0:
                continue
            err = _mismatch(n, m, p, q)
            if best is None or err < best:
                best = err
                yield p, q
        h2, h1 = h1, a * h1 + h2
        k2, k1 = k1, a * k1 + k2


def _mismatch(n, m, p, q):
    """|q sqrt(n/m) - p| = |q^2 n - p^2 m| / (m (q sqrt(n/m) + p)), numerator exact."""
    num = abs(q * q * n - p * p * m)
    return num / (m * (q * math.sqrt(n / m) + p))


def classify_ratio(n, m, n_approx=DEFAULT_DEPTH):
    if not (isinstance(n, int) and isinstance(m, int)) or m < 1 or n < 1:
        raise InvalidArgumentError(f"need positive integers, got ({n}, {m})")
    g = math.gcd(n, m)
    a, b = n // g, m // g
    ra, rb = _isqrt_exact(a), _isqrt_exact(b)
    if ra is not None and rb is not None:
        variant = "rational_both_odd" if ra % 2 and rb % 2 else "rational_one_even"
        return RatioClass(n, m, variant, (ra, rb))
    approx = []
    for pq in odd_odd_approximants(a, b):
        approx.append(pq)
        if len(approx) >= n_approx:
            break
    return RatioClass(n, m, "irrational", None, tuple(approx))


def _angle_fraction(n_, m_, p, branch):
    den = n_ + m_ if branch == "+" else n_ - m_
    return Fraction(m_ * p, den)


def alpha_for(n_, m_, p, branch):
    """|sin(m' p pi / (n' +- m'))|.

    The minus branch is undefined for n' = m'; the plus branch is used instead.
    """
    if branch not in ("+", "-"):
        raise InvalidArgumentError(f"branch must be '+' or '-', got {branch!r}")
    if p < 1:
        raise InvalidArgumentError("p must be >= 1")
    if branch == "-" and n_ == m_:
        branch = "+"
    return sin_pi(_angle_fraction(n_, m_, p, branch))[0]


def _periods(n_, m_):
    out = [("+", n_ + m_)]
    if n_ != m_:
        out.append(("-", abs(n_ - m_)))
    return out


def alpha_max(n_, m_):
    """Best alpha over both branches and one full period of p."""
    return max(alpha_for(n_, m_, p, br) for br, per in _periods(n_, m_) for p in range(1, per + 1))


@dataclass(frozen=True)
class SyncSolution:
    """Chosen synchronizing pulse for a pair of blocks at occupations n and m.

    ``angle_over_pi`` is the rotation angle of the m-block (rate
    rabi_unit*sqrt(m)); ``duration`` = angle * pi / (rabi_unit sqrt(m)).
    ``alpha_n``/``alpha_m`` are the achieved |sin| and ``sign_*`` their signs.
    """

    n: int
    m: int
    duration: float
    angle_over_pi: Fraction
    ref_occ: int
    alpha_n: float
    alpha_m: float
    sign_n: int
    sign_m: int
    variant: str
    pair: tuple[int, int]
    p: int | None = None
    branch: str | None = None
    approximant_rank: int | None = None

    @property
    def alpha(self):
        return min(self.alpha_n, self.alpha_m)

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "duration": self.duration,
            "angle_over_pi": str(self.angle_over_pi),
            "ref_occ": self.ref_occ,
            "alpha_n": self.alpha_n,
            "alpha_m": self.alpha_m,
            "sign_n": self.sign_n,
            "sign_m": self.sign_m,
            "variant": self.variant,
            "pair": list(self.pair),
            "p": self.p,
            "branch": self.branch,
            "approximant_rank": self.approximant_rank,
        }


def _sin_of_rate(n, m, angle_m: Fraction):
    """Sines for the n- and m-blocks when the m-block turns by angle_m * pi.

    The n-block turns by sqrt(n/m) times as much; that angle is exact only
    when the ratio is rational.
    """
    am, sm = sin_pi(angle_m)
    g = math.gcd(n, m)
    rn, rm = _isqrt_exact(n // g), _isqrt_exact(m // g)
    if rn is not None and rm is not None:
        an, sn = sin_pi(angle_m * Fraction(rn, rm))
    else:
        v = math.sin(math.pi * float(angle_m) * math.sqrt(n / m))
        an, sn = abs(v), (v > 0) - (v < 0)
    return an, sn, am, sm


def best_sync_duration(n, m, depth=DEFAULT_DEPTH, rabi_unit=1.0, max_duration=None):
    """Duration that brings both the sqrt(n)- and sqrt(m)-rate blocks as close
    as possible to a full transfer.

    Rates are rabi_unit*sqrt(n) and rabi_unit*sqrt(m). The order of (n, m)
    is free; the solution is reported for the pair as given.
    """
    if n < 1 or m < 1 or depth < 1:
        raise InvalidArgumentError(f"need n, m, depth >= 1, got ({n}, {m}, {depth})")
    if rabi_unit <= 0:
        raise InvalidArgumentError("rabi_unit must be positive")
    cap = DEFAULT_MAX_DURATION / rabi_unit if max_duration is None else max_duration
    rate_m = rabi_unit * math.sqrt(m)
    cls = classify_ratio(n, m, n_approx=depth)

    def build(angle, variant, pair, **extra):
        an, sn, am, sm = _sin_of_rate(n, m, angle)
        dur = float(angle) * math.pi / rate_m
        return SyncSolution(n, m, dur, angle, m, an, am, sn, sm, variant, pair, **extra)

    if cls.variant == "rational_both_odd":
        n_, m_ = cls.pair
        sol = build(Fraction(m_, 2), cls.variant, cls.pair)
        if sol.duration > cap:
            raise SyncFailure(f"exact synchronizing pulse for ({n}, {m}) exceeds duration cap {cap:g}")
        return sol

    if cls.variant == "rational_one_even":
        n_, m_ = cls.pair
        best = None
        for br, per in _periods(n_, m_):
            for p in range(1, per + 1):
                ang = _angle_fraction(n_, m_, p, br)
                sol = build(ang, cls.variant, cls.pair, p=p, branch=br)
                if sol.duration > cap:
                    continue
                key = (-sol.alpha, sol.duration)
                if best is None or key < best[0]:
                    best = (key, sol)
        if best is None:
            raise SyncFailure(f"no synchronizing pulse for ({n}, {m}) within duration cap {cap:g}")
        return best[1]

    best = None
    for rank, (p_, q_) in enumerate(cls.approximants[:depth], start=1):
        sol = build(Fraction(q_, 2), cls.variant, (p_, q_), approximant_rank=rank)
        if sol.duration > cap:
            break
        key = (-sol.alpha, sol.duration)
        if best is None or key < best[0]:
            best = (key, sol)
    if best is None:
        raise SyncFailure(
            f"no odd/odd approximant of sqrt({n}/{m}) within depth {depth} and duration cap {cap:g}"
        )
    return best[1]
