"""Pulse programs for Bell, NOON, W and GHZ phonon states, and their execution.

Lamb-Dicke programs are assembled by a small ladder engine that tracks the
ideal two-component state. For each requested (kind, membrane) transfer it
finds the blocks the populated components sit in, picks a duration (a plain
pi transfer when all blocks share a Rabi rate, a synchronizing duration
otherwise) and a phase that keeps the relative phase of the components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .dynamics_bld import MultiSidebandPulse, apply_multisideband
from .dynamics_ld import DriveConfig, Pulse, apply_blue, apply_carrier, apply_pulse, apply_red
from .errors import InvalidArgumentError, PhononEntangleError, ProgramError
from .hilbert import (
    StateVector,
    TargetState,
    basis_state,
    default_cutoff,
    overlap_fidelity,
    target_state,
)
from .phase import unit_phase
from .sync import DEFAULT_DEPTH, SyncSolution, best_sync_duration

__all__ = [
    "Checkpoint",
    "PulseProgram",
    "RunReport",
    "synth_bell",
    "synth_noon",
    "synth_w",
    "synth_ghz",
    "synth_noon_bld",
    "synth_ghz_bld",
    "run_program",
    "program_fidelity",
    "ghz_case",
    "synthesize",
]

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


@dataclass(frozen=True)
class Checkpoint:
    after_step: int
    state: StateVector
    label: str = ""


@dataclass(frozen=True)
class PulseProgram:
    """Ordered pulses plus the target and optional checkpoint states.

    ``after_step`` of a checkpoint counts applied steps, so 0 refers to the
    initial state. ``syncs`` maps step indices to the synchronizing solution
    that fixed their duration.
    """

    model: str
    n_modes: int
    cutoff: int
    drive: DriveConfig
    steps: tuple
    target: TargetState
    checkpoints: tuple[Checkpoint, ...] = ()
    syncs: tuple[tuple[int, SyncSolution], ...] = ()

    def __post_init__(self):
        if self.model not in ("ld", "bld"):
            raise InvalidArgumentError(f"model must be 'ld' or 'bld', got {self.model!r}")
        for cp in self.checkpoints:
            if not 0 <= cp.after_step <= len(self.steps):
                raise InvalidArgumentError(f"checkpoint after step {cp.after_step} outside program")

    @property
    def total_duration(self):
        return sum(s.duration for s in self.steps)

    def initial_state(self):
        return basis_state("g", (0,) * self.n_modes, self.cutoff)

    def sync_at(self, step_index):
        return dict(self.syncs).get(step_index)


@dataclass(frozen=True)
class RunReport:
    """Outcome of a program run. ``final_state`` is None for fidelity-only runs."""

    final_state: StateVector | None
    fidelity: float
    checkpoint_fidelities: tuple[float, ...]
    total_duration: float
    syncs: tuple[tuple[int, SyncSolution], ...] = ()

    def to_dict(self):
        return {
            "fidelity": self.fidelity,
            "checkpoint_fidelities": list(self.checkpoint_fidelities),
            "total_duration": self.total_duration,
            "syncs": [dict(step=i, **s.to_dict()) for i, s in self.syncs],
            "final_state": None if self.final_state is None else self.final_state.to_json(),
        }


def _apply_step(state, step, cfg, model, inverse=False):
    """Apply one step, or its exact inverse (same pulse run for -duration)."""
    sign = -1.0 if inverse else 1.0
    if isinstance(step, MultiSidebandPulse):
        if model != "bld":
            raise InvalidArgumentError("multi-sideband pulse in a Lamb-Dicke program")
        return apply_multisideband(state, step, cfg, duration=sign * step.duration)
    t = sign * step.duration
    if step.kind == "carrier":
        return apply_carrier(state, step.phase, t, cfg)
    if step.kind == "red":
        return apply_red(state, step.membrane, step.phase, t, cfg)
    return apply_blue(state, step.membrane, step.phase, t, cfg)


def run_program(program, initial=None, cfg=None):
    """Apply every step in order and score against the target and checkpoints."""
    cfg = program.drive if cfg is None else cfg
    state = program.initial_state() if initial is None else initial
    by_step = {}
    for cp in program.checkpoints:
        by_step.setdefault(cp.after_step, []).append(cp)
    fids = {}

    def record(i, st):
        for cp in by_step.get(i, ()):
            fids[id(cp)] = overlap_fidelity(cp.state, st)

    record(0, state)
    for i, step in enumerate(program.steps):
        try:
            state = _apply_step(state, step, cfg, program.model)
        except PhononEntangleError as exc:
            raise ProgramError(i, exc) from exc
        record(i + 1, state)
    return RunReport(
        final_state=state,
        fidelity=overlap_fidelity(program.target.state, state),
        checkpoint_fidelities=tuple(fids[id(cp)] for cp in program.checkpoints),
        total_duration=program.total_duration,
        syncs=program.syncs,
    )


def program_fidelity(program, initial=None, cfg=None, max_terms=2048):
    """Target and checkpoint fidelities without materializing the final state.

    Imperfect synchronization leaves small amplitudes that later pulses keep
    splitting, so the forward state can grow like 2^steps. Every step is an
    exact block unitary, hence <T|U_K..U_1 psi> = <U_{j+1}^dag..U_K^dag T|U_j..U_1 psi>.
    The state is carried forward until it holds more than ``max_terms``
    amplitudes; the target and the remaining checkpoints are then carried
    backward to that step and overlapped there. The result is exact up to
    the usual amplitude pruning.
    """
    cfg = program.drive if cfg is None else cfg
    steps = program.steps
    fwd = program.initial_state() if initial is None else initial
    fids = {}
    j = 0

    def score_forward(i):
        for k, cp in enumerate(program.checkpoints):
            if cp.after_step == i:
                fids[k] = overlap_fidelity(cp.state, fwd)

    score_forward(0)
    while j < len(steps) and len(fwd) <= max_terms:
        try:
            fwd = _apply_step(fwd, steps[j], cfg, program.model)
        except PhononEntangleError as exc:
            raise ProgramError(j, exc) from exc
        j += 1
        score_forward(j)

    def pull_back(state, start):
        for i in range(start - 1, j - 1, -1):
            try:
                state = _apply_step(state, steps[i], cfg, program.model, inverse=True)
            except PhononEntangleError as exc:
                raise ProgramError(i, exc) from exc
        return state

    for k, cp in enumerate(program.checkpoints):
        if k not in fids:
            fids[k] = overlap_fidelity(pull_back(cp.state, cp.after_step), fwd)
    final = fwd if j == len(steps) else None
    target = program.target.state if final is not None else pull_back(program.target.state, len(steps))
    return RunReport(
        final_state=final,
        fidelity=overlap_fidelity(target, fwd),
        checkpoint_fidelities=tuple(fids[k] for k in range(len(program.checkpoints))),
        total_duration=program.total_duration,
        syncs=program.syncs,
    )


# ---------------------------------------------------------------------------
# Lamb-Dicke ladder engine


def _bump(occ, i, d):
    o = list(occ)
    o[i] += d
    return tuple(o)


class _Ladder:
    """Builds LD pulses while tracking the ideal (sync-error free) state."""

    def __init__(self, cfg, n_modes, cutoff, depth, max_duration=None):
        if cfg.n_modes != n_modes:
            raise InvalidArgumentError(f"drive config has {cfg.n_modes} membranes, protocol needs {n_modes}")
        self.cfg = cfg
        self.n_modes = n_modes
        self.cutoff = cutoff
        self.depth = depth
        self.max_duration = max_duration
        self.state = basis_state("g", (0,) * n_modes, cutoff)
        self.steps = []
        self.syncs = []
        self.checkpoints = []

    def checkpoint(self, label):
        self.checkpoints.append(Checkpoint(len(self.steps), self.state, label))

    def explicit(self, kind, membrane, phase, angle, ref_occ, label):
        """A pulse with fixed angle and phase (used for the splitting steps)."""
        p = Pulse.from_angle(kind, membrane, phase, angle, ref_occ, self.cfg, label)
        self.steps.append(p)
        self.state = apply_pulse(self.state, p, self.cfg)
        return p

    def _blocks(self, kind, i):
        """(source label, destination label, rate occupation, g_to_e) per component."""
        out = []
        for label in self.state:
            s, occ = label
            if kind == "carrier":
                dest = ("e" if s == "g" else "g", occ)
                out.append((label, dest, 0, s == "g"))
                continue
            d = -1 if (kind == "red") == (s == "g") else 1
            new = occ[i] + d
            if new < 0:
                continue
            dest = ("e" if s == "g" else "g", _bump(occ, i, d))
            g_occ = occ if s == "g" else dest[1]
            e_occ = dest[1] if s == "g" else occ
            rate_occ = g_occ[i] if kind == "red" else e_occ[i]
            out.append((label, dest, rate_occ, s == "g"))
        return out

    def transfer(self, kind, membrane=None, label=""):
        """Full transfer of every populated component that has a partner."""
        i = membrane
        blocks = self._blocks(kind, i)
        if not blocks:
            raise InvalidArgumentError(f"{kind} pulse on membrane {i} moves nothing in {self.state}")
        rates = sorted({b[2] for b in blocks})
        sync = None
        if len(rates) == 1:
            angle, ref = HALF, rates[0]
            signs = {rates[0]: 1}
        elif len(rates) == 2:
            m, n = rates
            unit = self.cfg.omega_rabi * (self.cfg.eta[i] if kind != "carrier" else 1.0)
            sync = best_sync_duration(n, m, self.depth, unit, self.max_duration)
            angle, ref = sync.angle_over_pi, m
            signs = {n: sync.sign_n, m: sync.sign_m}
        else:
            raise InvalidArgumentError(f"cannot synchronize {len(rates)} Rabi frequencies at once")
        phase = self._phase(blocks, signs)
        p = Pulse.from_angle(kind, i, phase, angle, ref, self.cfg, label)
        if sync is not None:
            self.syncs.append((len(self.steps), sync))
        self.steps.append(p)
        # ideal successor: every component moves, picking up its block factor
        e_up, e_dn = unit_phase(phase).conjugate(), unit_phase(phase)
        amps = {}
        moved = set()
        for src, dest, r, g_to_e in blocks:
            f = -1j * (e_up if g_to_e else e_dn) * signs[r]
            amps[dest] = amps.get(dest, 0) + f * self.state[src]
            moved.add(src)
        for lab, a in self.state.items():
            if lab not in moved:
                amps[lab] = amps.get(lab, 0) + a
        self.state = StateVector(self.n_modes, self.cutoff, amps)
        return p

    def _phase(self, blocks, signs):
        """Phase (over pi) keeping the components' relative phase.

        g -> e gains -i e^{-i phi} s, e -> g gains -i e^{+i phi} s. With
        untouched components every mover must gain exactly 1; otherwise all
        movers must gain the same factor.
        """
        untouched = len(self.state) > len(blocks)
        factors = []
        for cand in (Fraction(3, 2), HALF, Fraction(0), Fraction(1)):
            u = unit_phase(cand)
            fs = [(-1j * (u.conjugate() if g else u) * signs[r]) for _, _, r, g in blocks]
            same = all(abs(f - fs[0]) < 1e-12 for f in fs)
            if untouched and all(abs(f - 1) < 1e-12 for f in fs):
                return cand
            if not untouched and same:
                factors.append((abs(fs[0] - 1) > 1e-12, cand))
        if factors:
            return min(factors)[1]
        raise InvalidArgumentError("no drive phase preserves the relative phase of this transfer")


def _ld_cfg(cfg, n_modes):
    return DriveConfig.lamb_dicke(n_modes) if cfg is None else cfg


def _finish(lad, target, model="ld"):
    return PulseProgram(
        model,
        lad.n_modes,
        lad.cutoff,
        lad.cfg,
        tuple(lad.steps),
        target,
        tuple(lad.checkpoints),
        tuple(lad.syncs),
    )


def synth_bell(cfg=None):
    """Carrier, half red on membrane 1, full red on membrane 2."""
    cfg = _ld_cfg(cfg, 2)
    cutoff = default_cutoff(1)
    lad = _Ladder(cfg, 2, cutoff, DEFAULT_DEPTH)
    lad.explicit("carrier", None, Fraction(3, 2), HALF, 0, "carrier pi/2")
    lad.checkpoint("|e,0,0>")
    lad.explicit("red", 0, HALF, QUARTER, 1, "red m1 pi/4")
    lad.checkpoint("(|e,0,0> + |g,1,0>)/sqrt2")
    lad.explicit("red", 1, HALF, HALF, 1, "red m2 pi/2")
    lad.checkpoint("bell")
    return _finish(lad, target_state("bell", 2, cutoff))


def synth_noon(n_phonon, cfg=None, sync_depth=DEFAULT_DEPTH, max_duration=None):
    """(|N,0> + |0,N>)/sqrt2 by sideband ladders on two membranes.

    (i) climb to |e,h-1,h> (N = 2h) or |e,k,k> (N = 2k+1); (ii) split with a
    quarter sideband pulse; (iii) alternate reds on the two membranes, each
    moving both components, with synchronized durations; (iv) close with a
    red on membrane 1.
    """
    if n_phonon < 1:
        raise InvalidArgumentError("NOON state needs n_phonon >= 1")
    cfg = _ld_cfg(cfg, 2)
    if n_phonon == 1:
        prog = synth_bell(cfg)
        return PulseProgram("ld", 2, prog.cutoff, cfg, prog.steps, target_state("noon", 2, prog.cutoff, 1), prog.checkpoints)
    N = n_phonon
    cutoff = default_cutoff(N)
    lad = _Ladder(cfg, 2, cutoff, sync_depth, max_duration)
    M1, M2 = 0, 1
    if N % 2 == 0:
        h = N // 2
        lad.transfer("blue", M2, "i: blue m2")
        for j in range(h - 1):
            lad.transfer("red", M1, "i: red m1")
            lad.transfer("carrier", None, "i: carrier")
            lad.transfer("red", M2, "i: red m2")
            lad.transfer("carrier", None, "i: carrier")
        lad.checkpoint(f"|e,{h - 1},{h}>")
        lad.explicit("red", M1, HALF, QUARTER, h, "ii: red m1 pi/4")
        lad.checkpoint("ii")
        seq = [M2] + [M1, M2] * (h - 1)
    else:
        k = (N - 1) // 2
        lad.transfer("blue", M2, "i: blue m2")
        for j in range(k):
            lad.transfer("red", M1, "i: red m1")
            lad.transfer("carrier", None, "i: carrier")
            if j < k - 1:
                lad.transfer("red", M2, "i: red m2")
                lad.transfer("carrier", None, "i: carrier")
        lad.checkpoint(f"|e,{k},{k}>")
        lad.explicit("red", M2, HALF, QUARTER, k + 1, "ii: red m2 pi/4")
        lad.checkpoint("ii")
        seq = [M1, M2] * k
    for mem in seq:
        lad.transfer("red", mem, f"iii: red m{mem + 1}")
    lad.checkpoint("iii")
    lad.transfer("red", M1, "iv: red m1")
    lad.checkpoint("noon")
    return _finish(lad, target_state("noon", 2, cutoff, N))


def synth_w(N, cfg=None):
    """Carrier pi/2, then red sidebands splitting one phonon evenly over N membranes."""
    if N < 2:
        raise InvalidArgumentError("W state needs at least 2 membranes")
    cfg = _ld_cfg(cfg, N)
    cutoff = default_cutoff(1)
    lad = _Ladder(cfg, N, cutoff, DEFAULT_DEPTH)
    lad.explicit("carrier", None, Fraction(3, 2), HALF, 0, "carrier pi/2")
    lad.checkpoint("|e,0...>")
    for i in range(N):
        remaining = N - i
        if remaining == 1:
            angle = HALF
        else:
            angle = math.asin(1.0 / math.sqrt(remaining)) / math.pi
        lad.explicit("red", i, HALF, angle, 1, f"red m{i + 1}")
    lad.checkpoint("w")
    return _finish(lad, target_state("w", N, cutoff))


def ghz_case(N):
    """Parity case of the N-membrane GHZ protocol.

    I: N odd, (N-1)/2 odd. II: N even, N/2 even. III: N odd, (N-1)/2 even.
    IV: N even, N/2 odd.
    """
    if N < 2:
        raise InvalidArgumentError("GHZ state needs at least 2 membranes")
    if N % 2:
        return "I" if ((N - 1) // 2) % 2 else "III"
    return "II" if (N // 2) % 2 == 0 else "IV"


def synth_ghz(N, cfg=None, sync_depth=DEFAULT_DEPTH, max_duration=None):
    """(|0...0> + |1...1>)/sqrt2 over N membranes.

    (i) prepare a Fock ladder state on membrane 1; (ii) split it with a
    quarter pulse; (iii) alternate blue/red pulses on membrane 1 so the two
    components become |g,0,...> and |e,N-1,0,...>; (iv) hand one phonon to
    each of membranes N..2 with reds, walking membrane 1 down in between.
    """
    case = ghz_case(N)
    cfg = _ld_cfg(cfg, N)
    cutoff = default_cutoff(N)
    lad = _Ladder(cfg, N, cutoff, sync_depth, max_duration)
    M1 = 0
    if N % 2:
        k = (N - 1) // 2
        for _ in range(k):
            lad.transfer("carrier", None, "i: carrier")
            lad.transfer("red", M1, "i: red m1")
        lad.checkpoint(f"|g,{k},0...>")
        lad.explicit("carrier", None, Fraction(3, 2), QUARTER, 0, "ii: carrier pi/4")
        n_ladder = k
        first = "blue" if case == "I" else "red"
    else:
        h = N // 2
        for _ in range(h - 1):
            lad.transfer("carrier", None, "i: carrier")
            lad.transfer("red", M1, "i: red m1")
        if case == "II":
            lad.transfer("carrier", None, "i: carrier")
            lad.checkpoint(f"|e,{h - 1},0...>")
            lad.explicit("red", M1, HALF, QUARTER, h, "ii: red m1 pi/4")
            first = "blue"
        else:
            lad.checkpoint(f"|g,{h - 1},0...>")
            lad.explicit("blue", M1, Fraction(3, 2), QUARTER, h, "ii: blue m1 pi/4")
            first = "red"
        n_ladder = h - 1
    lad.checkpoint("ii")
    kind = first
    for _ in range(n_ladder):
        lad.transfer(kind, M1, f"iii: {kind} m1")
        kind = "red" if kind == "blue" else "blue"
    lad.checkpoint(f"(|g,0...> + |e,{N - 1},0...>)/sqrt2")
    for i in range(N - 1, 0, -1):
        lad.transfer("red", i, f"iv: red m{i + 1}")
        if i > 1:
            lad.transfer("red", M1, "iv: red m1")
    lad.checkpoint("ghz")
    return _finish(lad, target_state("ghz", N, cutoff))


# ---------------------------------------------------------------------------
# beyond Lamb-Dicke


def _bld_cfg(cfg, n_modes):
    return DriveConfig.beyond_lamb_dicke(n_modes) if cfg is None else cfg


def synth_noon_bld(n_phonon, cfg=None):
    """Carrier pi/2, then N-phonon red sidebands on membrane 1 (pi/4) and 2 (pi/2)."""
    if n_phonon < 1:
        raise InvalidArgumentError("NOON state needs n_phonon >= 1")
    cfg = _bld_cfg(cfg, 2)
    N = n_phonon
    cutoff = default_cutoff(N)
    ph = Fraction(1, 2) + N
    ph = ph - 2 * (ph // 2)
    zero = (0, 0)
    steps = (
        MultiSidebandPulse.from_angle(zero, Fraction(3, 2), HALF, zero, cfg, "carrier pi/2"),
        MultiSidebandPulse.from_angle((N, 0), ph, QUARTER, zero, cfg, f"order ({N},0) pi/4"),
        MultiSidebandPulse.from_angle((0, N), ph, HALF, zero, cfg, f"order (0,{N}) pi/2"),
    )
    r = 1 / math.sqrt(2)
    cps = (
        Checkpoint(1, basis_state("e", zero, cutoff), "|e,0,0>"),
        Checkpoint(2, StateVector(2, cutoff, {("e", zero): r, ("g", (N, 0)): r}), "split"),
    )
    return PulseProgram("bld", 2, cutoff, cfg, steps, target_state("noon", 2, cutoff, N), cps)


def synth_ghz_bld(cfg=None):
    """Carrier pi/4 and a single (1,1,1) sideband pi/2 on three membranes."""
    cfg = _bld_cfg(cfg, 3)
    cutoff = default_cutoff(1)
    zero = (0, 0, 0)
    steps = (
        MultiSidebandPulse.from_angle(zero, Fraction(3, 2), QUARTER, zero, cfg, "carrier pi/4"),
        MultiSidebandPulse.from_angle((1, 1, 1), Fraction(3, 2), HALF, zero, cfg, "order (1,1,1) pi/2"),
    )
    r = 1 / math.sqrt(2)
    cps = (Checkpoint(1, StateVector(3, cutoff, {("g", zero): r, ("e", zero): r}), "split"),)
    return PulseProgram("bld", 3, cutoff, cfg, steps, target_state("ghz", 3, cutoff), cps)


def synthesize(family, n=None, cfg=None, sync_depth=DEFAULT_DEPTH, model="ld"):
    """Dispatch by family name: bell, noon, w, ghz."""
    family = family.lower()
    model = model.lower()
    if model == "bld":
        if family == "noon":
            return synth_noon_bld(n, cfg)
        if family == "ghz":
            if n not in (None, 3):
                raise InvalidArgumentError("beyond-Lamb-Dicke GHZ protocol is defined for 3 membranes")
            return synth_ghz_bld(cfg)
        raise InvalidArgumentError(f"no beyond-Lamb-Dicke protocol for {family!r}")
    if family == "bell":
        return synth_bell(cfg)
    if family == "noon":
        return synth_noon(n, cfg, sync_depth)
    if family == "w":
        return synth_w(n, cfg)
    if family == "ghz":
        return synth_ghz(n, cfg, sync_depth)
    raise InvalidArgumentError(f"unknown state family {family!r}")
