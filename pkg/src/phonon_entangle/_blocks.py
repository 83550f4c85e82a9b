"""Shared engine for propagators that act as independent 2x2 rotations.

Every resonant drive in the two-level model couples each |g, m> to at most
one |e, m'> partner. A block evolves as

    a_g' = cos(th) a_g - i e^{+i phi} sigma sin(th) a_e
    a_e' = -i e^{-i phi} sigma sin(th) a_g + cos(th) a_e

with sigma = +-1 a block-independent sign. Labels without a physical partner
are left unchanged.
"""

from __future__ import annotations

import math

from .errors import CutoffViolation
from .hilbert import StateVector, format_ket


def rotate_blocks(state: StateVector, partner, theta, phase_factor, sigma=1.0):
    """Apply block rotations.

    partner(label) returns (g_label, e_label) for the block containing
    ``label`` or None when the label is invariant. theta(g_label, e_label)
    gives the rotation angle. ``phase_factor`` is e^{i phi}.
    """
    cutoff = state.cutoff
    eps = state.prune_eps
    out = {}
    seen = set()
    up = -1j * phase_factor * sigma
    down = -1j * phase_factor.conjugate() * sigma
    for label, a in state.items():
        blk = partner(label)
        if blk is None:
            out[label] = out.get(label, 0j) + a
            continue
        if blk in seen:
            continue
        seen.add(blk)
        gl, el = blk
        ag, ae = state[gl], state[el]
        th = theta(gl, el)
        c, s = math.cos(th), math.sin(th)
        new_g = c * ag + up * s * ae
        new_e = down * s * ag + c * ae
        for lab, amp in ((gl, new_g), (el, new_e)):
            if abs(amp) < eps:
                continue
            if max(lab[1], default=0) >= cutoff:
                raise CutoffViolation(
                    f"amplitude {abs(amp):.3g} would populate {format_ket(lab)} at cutoff {cutoff}"
                )
            out[lab] = out.get(lab, 0j) + amp
    return StateVector(state.n_modes, cutoff, out, state.prune_eps, _trusted=True)


def shift(occ, i, d):
    o = list(occ)
    o[i] += d
    return tuple(o)
