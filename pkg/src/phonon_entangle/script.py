"""Plain-text pulse scripts.

One statement per line, ``#`` starts a comment::

    model ld
    modes 2 cutoff 6
    pulse carrier phase=3/2pi angle=1/2pi
    pulse red m=1 phase=1/2pi angle=1/4pi ref_occ=1
    pulse red m=2 phase=1/2pi angle=1/2pi ref_occ=1
    target bell
    checkpoint |g,1,0> |g,0,1>

Membranes are numbered from 1. Angles are rotations reached at the reference
occupations, so durations come from the drive configuration. Rational
multiples of pi are written ``p/q`` (the ``pi`` suffix is optional); floats
need a ``~`` prefix. A ``checkpoint`` applies after the pulses seen so far;
without coefficients its kets are weighted equally. ``sync n=.. m=.. depth=..``
before a pulse records the synchronization that fixed its angle. ``modes``
may be omitted for bell and noon targets (two modes); the cutoff defaults to
the target's largest occupation plus a guard band.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from .dynamics_bld import MultiSidebandPulse
from .dynamics_ld import DriveConfig, Pulse
from .errors import InvalidArgumentError, PhononEntangleError, ScriptError
from .hilbert import StateVector, TARGET_KINDS, default_cutoff, target_max_phonons, target_state
from .phase import format_over_pi, parse_over_pi
from .sync import best_sync_duration
from .synthesis import Checkpoint, PulseProgram

__all__ = ["parse_pulse_script", "render_pulse_script", "parse_kets", "format_kets"]

_TOKEN = re.compile(r'\s*(?:(\w+)="((?:[^"\\]|\\.)*)"|(\S+))')
_KET = re.compile(r"\|\s*([ge])\s*((?:,\s*\d+\s*)*)>")


def _tokens(text):
    """(column, key, value) triples; bare words have key None."""
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        col = m.start() + len(m.group(0)) - len(m.group(0).lstrip()) + 1
        if m.group(1) is not None:
            out.append((col, m.group(1), m.group(2).replace('\\"', '"')))
        else:
            word = m.group(3)
            if "=" in word:
                k, _, v = word.partition("=")
                out.append((col, k, v))
            else:
                out.append((col, None, word))
        pos = m.end()
    return out


def _coefficient(text):
    t = text.strip()
    if t in ("", "+"):
        return 1.0
    if t == "-":
        return -1.0
    neg = t.startswith("-")
    body = t[1:] if t[0] in "+-" else t
    sign = -1.0 if neg else 1.0
    m = re.fullmatch(r"(1/)?sqrt\((\d+(?:/\d+)?)\)", body)
    if m:
        v = math.sqrt(float(Fraction(m.group(2))))
        return sign * (1.0 / v if m.group(1) else v)
    try:
        return sign * (complex(body.replace(" ", "")) if "j" in body else float(body))
    except ValueError:
        raise InvalidArgumentError(f"bad ket coefficient {text!r}") from None


def parse_kets(text, n_modes, cutoff):
    """Parse ``[coef]|s,m1,..> ...`` into a StateVector.

    Without any explicit coefficient the kets are weighted equally and
    normalized; otherwise the coefficients are used as written.
    """
    pos = 0
    terms = []
    explicit = False
    for m in _KET.finditer(text):
        coef_txt = text[pos:m.start()].strip()
        if coef_txt:
            explicit = explicit or coef_txt not in ("+",)
        c = _coefficient(coef_txt)
        occ = tuple(int(x) for x in m.group(2).replace(" ", "").split(",") if x)
        if len(occ) != n_modes:
            raise InvalidArgumentError(f"ket |{m.group(1)},...> has {len(occ)} occupations, expected {n_modes}")
        terms.append(((m.group(1), occ), c))
        pos = m.end()
    if text[pos:].strip():
        raise InvalidArgumentError(f"trailing text {text[pos:].strip()!r} in ket list")
    if not terms:
        raise InvalidArgumentError("empty ket list")
    amps = {}
    for lab, c in terms:
        amps[lab] = amps.get(lab, 0) + c
    st = StateVector(n_modes, cutoff, amps)
    if not explicit:
        return st.normalized()
    if abs(st.norm() - 1) > 1e-10:
        raise InvalidArgumentError(f"checkpoint state has norm {st.norm():.12g}, expected 1")
    return st


def format_kets(state):
    parts = []
    for (s, occ), a in state.items():
        coef = repr(a) if a.imag != 0 else repr(a.real)
        parts.append(f"{coef}|{','.join([s, *map(str, occ)])}>")
    return " ".join(parts)


def _int(val, what, line, col):
    try:
        return int(val)
    except (TypeError, ValueError):
        raise ScriptError(f"{what} must be an integer, got {val!r}", line, col) from None


def _ints(val, what, line, col):
    try:
        return tuple(int(x) for x in val.split(","))
    except (TypeError, ValueError, AttributeError):
        raise ScriptError(f"{what} must be a comma separated integer list, got {val!r}", line, col) from None


def _over_pi(val, what, line, col):
    if val is None:
        raise ScriptError(f"missing {what}=", line, col)
    try:
        return parse_over_pi(val)
    except InvalidArgumentError as exc:
        raise ScriptError(f"{what}: {exc}", line, col) from None


def parse_pulse_script(text, cfg=None):
    """Parse a pulse script into a PulseProgram.

    ``cfg`` supplies the Rabi frequencies; when omitted a default Lamb-Dicke
    or beyond-Lamb-Dicke configuration for the declared mode count is used.
    """
    model = None
    n_modes = cutoff = None
    steps = []
    checkpoints = []
    syncs = []
    pending_sync = None
    target = None
    deferred = []  # (line, col, kets, label, after_step)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        toks = _tokens(body)
        col0, _, head = toks[0]
        args = toks[1:]
        kw = {k: (c, v) for c, k, v in args if k is not None}
        bare = [(c, v) for c, k, v in args if k is None]

        def get(key, required=True):
            if key in kw:
                return kw[key]
            if required:
                raise ScriptError(f"missing {key}=", lineno, len(body.rstrip()) + 1)
            return (None, None)

        if head == "model":
            if len(bare) != 1 or bare[0][1] not in ("ld", "bld"):
                raise ScriptError("expected 'model ld' or 'model bld'", lineno, bare[0][0] if bare else col0)
            if model is not None:
                raise ScriptError("model declared twice", lineno, col0)
            model = bare[0][1]
        elif head == "modes":
            if not bare:
                raise ScriptError("expected 'modes N [cutoff C]'", lineno, col0)
            n_modes = _int(bare[0][1], "mode count", lineno, bare[0][0])
            if n_modes < 1:
                raise ScriptError("mode count must be >= 1", lineno, bare[0][0])
            rest = bare[1:]
            if rest:
                if len(rest) != 2 or rest[0][1] != "cutoff":
                    raise ScriptError("expected 'cutoff C' after the mode count", lineno, rest[0][0])
                cutoff = _int(rest[1][1], "cutoff", lineno, rest[1][0])
                if cutoff < 2:
                    raise ScriptError("cutoff must be >= 2", lineno, rest[1][0])
        elif head == "sync":
            c, n = get("n")
            _, m = get("m")
            _, depth = get("depth", required=False)
            pending_sync = (lineno, c, _int(n, "n", lineno, c), _int(m, "m", lineno, c), _int(depth or 1, "depth", lineno, c))
        elif head == "pulse":
            if not bare:
                raise ScriptError("expected a pulse kind", lineno, col0)
            kcol, kind = bare[0]
            if kind not in ("carrier", "red", "blue", "multi"):
                raise ScriptError(f"unknown pulse kind {kind!r}", lineno, kcol)
            pcol, ptxt = get("phase")
            phase = _over_pi(ptxt, "phase", lineno, pcol)
            acol, atxt = get("angle")
            angle = _over_pi(atxt, "angle", lineno, acol)
            _, label = get("label", required=False)
            label = label or ""
            steps.append((lineno, kcol, kind, kw, phase, angle, label, pending_sync))
            pending_sync = None
        elif head == "target":
            if not bare or bare[0][1] not in TARGET_KINDS:
                raise ScriptError("expected 'target bell|noon N|ghz|w'", lineno, bare[0][0] if bare else col0)
            tcol, tkind = bare[0]
            n_ph = None
            if tkind == "noon":
                if len(bare) != 2:
                    raise ScriptError("noon target needs a phonon number", lineno, tcol)
                n_ph = _int(bare[1][1], "phonon number", lineno, bare[1][0])
            elif len(bare) != 1:
                raise ScriptError(f"unexpected text after 'target {tkind}'", lineno, bare[1][0])
            target = (lineno, tcol, tkind, n_ph)
        elif head == "checkpoint":
            _, label = get("label", required=False)
            start = body.index("checkpoint") + len("checkpoint")
            kets = body[start:]
            if label is not None:
                kets = re.sub(r'label="((?:[^"\\]|\\.)*)"', "", kets, count=1)
            deferred.append((lineno, col0, kets, label or "", len(steps)))
        else:
            raise ScriptError(f"unknown statement {head!r}", lineno, col0)

    if target is None:
        raise ScriptError("script has no target", None, None)
    model = model or "ld"
    tl, tc, tkind, n_ph = target
    if n_modes is None:
        # bell and noon targets fix the mode count
        if tkind not in ("bell", "noon"):
            raise ScriptError("'modes' is required for ghz and w targets", tl, tc)
        n_modes = 2
    if cutoff is None:
        top = max(target_max_phonons(tkind, n_modes, n_ph) or 1, 1)
        cutoff = default_cutoff(top)
    try:
        tgt = target_state(tkind, n_modes, cutoff, n_ph)
    except InvalidArgumentError as exc:
        raise ScriptError(str(exc), tl, tc) from None
    if cfg is None:
        cfg = DriveConfig.lamb_dicke(n_modes) if model == "ld" else DriveConfig.beyond_lamb_dicke(n_modes)
    if cfg.n_modes != n_modes:
        raise ScriptError(f"drive configuration has {cfg.n_modes} membranes, script declares {n_modes}", None, None)

    built = []
    for idx, (lineno, kcol, kind, kw, phase, angle, label, sync) in enumerate(steps):
        try:
            if kind == "multi":
                if model != "bld":
                    raise ScriptError("multi-sideband pulse requires 'model bld'", lineno, kcol)
                ocol, otxt = kw.get("orders", (kcol, None))
                if otxt is None:
                    raise ScriptError("missing orders=", lineno, kcol)
                orders = _ints(otxt, "orders", lineno, ocol)
                rcol, rtxt = kw.get("ref_occ", (kcol, ",".join("0" * n_modes)))
                ref = _ints(rtxt, "ref_occ", lineno, rcol)
                if len(orders) != n_modes or len(ref) != n_modes:
                    raise ScriptError(f"orders and ref_occ need {n_modes} entries", lineno, ocol)
                p = MultiSidebandPulse.from_angle(orders, phase, angle, ref, cfg, label)
            else:
                if model != "ld":
                    raise ScriptError(f"{kind} pulse requires 'model ld'", lineno, kcol)
                membrane = None
                ref = 0
                if kind != "carrier":
                    mcol, mtxt = kw.get("m", (kcol, None))
                    if mtxt is None:
                        raise ScriptError("missing m=", lineno, kcol)
                    membrane = _int(mtxt, "membrane", lineno, mcol) - 1
                    if not 0 <= membrane < n_modes:
                        raise ScriptError(f"membrane {membrane + 1} outside 1..{n_modes}", lineno, mcol)
                    rcol, rtxt = kw.get("ref_occ", (kcol, None))
                    if rtxt is None:
                        raise ScriptError("missing ref_occ=", lineno, kcol)
                    ref = _int(rtxt, "ref_occ", lineno, rcol)
                    if ref < 1:
                        raise ScriptError("ref_occ must be >= 1 for a sideband", lineno, rcol)
                p = Pulse.from_angle(kind, membrane, phase, angle, ref, cfg, label)
        except ScriptError:
            raise
        except PhononEntangleError as exc:
            raise ScriptError(str(exc), lineno, kcol) from None
        if sync is not None:
            sl, sc, n, m, depth = sync
            if kind in ("multi", "carrier"):
                raise ScriptError("sync applies to red or blue pulses only", sl, sc)
            unit = cfg.omega_rabi * cfg.eta[p.membrane]
            sol = best_sync_duration(n, m, depth, unit)
            if sol.angle_over_pi != p.angle or sol.ref_occ != p.ref_occ:
                raise ScriptError(
                    f"sync ({n},{m}) gives angle {sol.angle_over_pi}pi at occupation {sol.ref_occ}, "
                    f"pulse has {format_over_pi(p.angle)}pi at {p.ref_occ}",
                    sl,
                    sc,
                )
            syncs.append((idx, sol))
        built.append(p)

    for lineno, col, kets, label, after in deferred:
        try:
            st = parse_kets(kets, n_modes, cutoff)
        except PhononEntangleError as exc:
            raise ScriptError(str(exc), lineno, col) from None
        checkpoints.append(Checkpoint(after, st, label))

    return PulseProgram(model, n_modes, cutoff, cfg, tuple(built), tgt, tuple(checkpoints), tuple(syncs))


def _quote(s):
    return '"' + s.replace('"', '\\"') + '"'


def render_pulse_script(program):
    """Inverse of :func:`parse_pulse_script` for the same drive configuration."""
    lines = [f"model {program.model}", f"modes {program.n_modes} cutoff {program.cutoff}"]
    syncs = dict(program.syncs)
    by_step = {}
    for cp in program.checkpoints:
        by_step.setdefault(cp.after_step, []).append(cp)

    def emit_checkpoints(i):
        for cp in by_step.get(i, ()):
            lab = f" label={_quote(cp.label)}" if cp.label else ""
            lines.append(f"checkpoint{lab} {format_kets(cp.state)}")

    emit_checkpoints(0)
    for i, p in enumerate(program.steps):
        sol = syncs.get(i)
        if sol is not None:
            lines.append(f"sync n={sol.n} m={sol.m} depth={sol.approximant_rank or 1}")
        ph = format_over_pi(p.phase)
        ang = format_over_pi(p.angle)
        if isinstance(p, MultiSidebandPulse):
            ref = ",".join(map(str, p.ref_occ))
            words = f"pulse multi orders={','.join(map(str, p.orders))} phase={ph}pi angle={ang}pi ref_occ={ref}"
        elif p.kind == "carrier":
            words = f"pulse carrier phase={ph}pi angle={ang}pi"
        else:
            words = f"pulse {p.kind} m={p.membrane + 1} phase={ph}pi angle={ang}pi ref_occ={p.ref_occ}"
        if p.label:
            words += f" label={_quote(p.label)}"
        lines.append(words)
        emit_checkpoints(i + 1)
    t = program.target
    lines.append(f"target {t.kind}" + (f" {t.n_phonon}" if t.kind == "noon" else ""))
    return "\n".join(lines) + "\n"
