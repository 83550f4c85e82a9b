"""Angles and phases stored as multiples of pi.

Exact values are ``fractions.Fraction``; anything that is not a rational
multiple of pi (e.g. the arcsin angles of the W ladder) is a plain float.
"""

from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction
from typing import Union

from .errors import InvalidArgumentError

OverPi = Union[Fraction, float]

__all__ = ["OverPi", "as_over_pi", "unit_phase", "format_over_pi", "parse_over_pi", "to_radians"]

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


def as_over_pi(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InvalidArgumentError("boolean is not an angle")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InvalidArgumentError(f"non-finite angle {x}")
        return x
    if isinstance(x, str):
        return parse_over_pi(x)
    raise InvalidArgumentError(f"cannot interpret {x!r} as a multiple of pi")


def to_radians(x):
    return float(x) * math.pi


def unit_phase(over_pi):
    """exp(i*pi*x), exact for half-integer rational x."""
    if isinstance(over_pi, Fraction) and over_pi.denominator in (1, 2):
        quarter = int(over_pi * 2) % 4
        return (1 + 0j, 1j, -1 + 0j, -1j)[quarter]
    return cmath.exp(1j * math.pi * float(over_pi))


def format_over_pi(x):
    """'3/2' for Fractions, '~<repr>' for floats."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return "~" + repr(float(x))


def parse_over_pi(text):
    t = text.strip()
    if t.endswith("pi"):
        t = t[:-2]
    if t.startswith("~"):
        try:
            return float(t[1:])
        except ValueError:
            raise InvalidArgumentError(f"bad float literal {text!r}") from None
    if not _RATIONAL.match(t):
        raise InvalidArgumentError(f"bad rational literal {text!r}")
    num, _, den = t.partition("/")
    if den and int(den) == 0:
        raise InvalidArgumentError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den else 1)
