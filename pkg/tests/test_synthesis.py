from dataclasses import replace
from fractions import Fraction

import pytest

from phonon_entangle.dynamics_bld import MultiSidebandPulse
from phonon_entangle.dynamics_ld import DriveConfig, Pulse
from phonon_entangle.errors import InvalidArgumentError, ProgramError
from phonon_entangle.hilbert import basis_state, target_state
from phonon_entangle.synthesis import (
    PulseProgram,
    ghz_case,
    program_fidelity,
    run_program,
    synth_bell,
    synth_ghz,
    synth_ghz_bld,
    synth_noon,
    synth_noon_bld,
    synth_w,
    synthesize,
)


def test_bell_protocol():
    p = synth_bell()
    assert [s.kind for s in p.steps] == ["carrier", "red", "red"]
    assert [s.angle for s in p.steps] == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 2)]
    rep = run_program(p)
    assert rep.fidelity == pytest.approx(1.0, abs=1e-12)
    assert all(f == pytest.approx(1.0, abs=1e-12) for f in rep.checkpoint_fidelities)


@pytest.mark.parametrize("n", [2, 3, 5, 10])
def test_w_states_exact(n):
    assert run_program(synth_w(n)).fidelity == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("n", range(1, 7))
def test_noon_bld_exact(n):
    p = synth_noon_bld(n)
    assert all(isinstance(s, MultiSidebandPulse) for s in p.steps[1:])
    rep = run_program(p)
    assert rep.fidelity == pytest.approx(1.0, abs=1e-10)
    assert all(f == pytest.approx(1.0, abs=1e-10) for f in rep.checkpoint_fidelities)


def test_ghz_bld_exact():
    assert run_program(synth_ghz_bld()).fidelity == pytest.approx(1.0, abs=1e-10)


def test_noon_one_is_bell():
    p = synth_noon(1)
    assert [(s.kind, s.membrane, s.phase, s.angle) for s in p.steps] == [
        (s.kind, s.membrane, s.phase, s.angle) for s in synth_bell().steps
    ]
    assert run_program(p).fidelity == pytest.approx(1.0, abs=1e-12)


def test_noon2_depth_monotone():
    fids = [run_program(synth_noon(2, sync_depth=d)).fidelity for d in range(1, 7)]
    assert all(a < b for a, b in zip(fids, fids[1:]))
    assert fids[2] > 0.999


def test_noon2_sync_uses_sqrt2_stream():
    p = synth_noon(2, sync_depth=3)
    (i, s), = p.syncs
    assert (s.n, s.m) == (2, 1)
    assert s.pair == (41, 29)
    assert p.steps[i].angle == Fraction(29, 2)


def test_checkpoints_before_sync_are_exact():
    for p in (synth_noon(4), synth_ghz(5)):
        rep = run_program(p)
        first = min(i for i, _ in p.syncs)
        for cp, f in zip(p.checkpoints, rep.checkpoint_fidelities):
            if cp.after_step <= first:
                assert f == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("prog", [lambda: synth_noon(2), lambda: synth_ghz(3)])
def test_sync_phase_absorption(prog):
    # shifting the synchronizing pulse by pi/2 and the next pulse by pi
    # only changes a global phase of the final state
    p = prog()
    i = p.syncs[0][0]
    steps = list(p.steps)
    steps[i] = replace(steps[i], phase=steps[i].phase + Fraction(1, 2))
    steps[i + 1] = replace(steps[i + 1], phase=steps[i + 1].phase + 1)
    q = replace(p, steps=tuple(steps))
    assert run_program(q).fidelity == pytest.approx(run_program(p).fidelity, abs=1e-12)


def test_ghz_exact_only_without_sync():
    assert synth_ghz(2).syncs == ()
    assert run_program(synth_ghz(2)).fidelity == pytest.approx(1.0, abs=1e-12)
    assert run_program(synth_ghz(3)).fidelity < 1 - 1e-10


def test_ghz_case_labels():
    assert [ghz_case(n) for n in range(2, 10)] == ["IV", "I", "II", "III", "IV", "I", "II", "III"]
    with pytest.raises(InvalidArgumentError):
        ghz_case(1)


@pytest.mark.parametrize("family,n", [("noon", 5), ("ghz", 6), ("ghz", 12)])
def test_split_fidelity_matches_full_run(family, n):
    p = synthesize(family, n)
    full = run_program(p)
    fast = program_fidelity(p, max_terms=8)
    assert fast.final_state is None
    assert fast.fidelity == pytest.approx(full.fidelity, abs=1e-12)
    for a, b in zip(fast.checkpoint_fidelities, full.checkpoint_fidelities):
        assert a == pytest.approx(b, abs=1e-12)


def test_fidelity_pattern_small():
    for n in range(2, 8):
        p = synth_noon(n)
        f = program_fidelity(p).fidelity
        exact = all(s.variant == "rational_both_odd" for _, s in p.syncs)
        assert (abs(f - 1) < 1e-10) == exact


def test_program_error_tags_step():
    cfg = DriveConfig.lamb_dicke(2)
    blue = Pulse.from_angle("blue", 0, 0, Fraction(1, 2), 1, cfg)
    flip = Pulse.from_angle("carrier", None, 0, Fraction(1, 2), 0, cfg)
    # the second blue pulse pushes a phonon past the cutoff
    p = PulseProgram("ld", 2, 2, cfg, (blue, flip, blue), target_state("bell", 2, 2))
    with pytest.raises(ProgramError, match="step 2"):
        run_program(p)


def test_multi_rejected_in_ld_program():
    cfg = DriveConfig.lamb_dicke(2)
    p = PulseProgram("ld", 2, 6, cfg, (MultiSidebandPulse((1, 0), 0, 1.0),), target_state("bell", 2))
    with pytest.raises(ProgramError):
        run_program(p)


def test_program_validation():
    cfg = DriveConfig.lamb_dicke(2)
    with pytest.raises(InvalidArgumentError):
        PulseProgram("xx", 2, 6, cfg, (), target_state("bell", 2))
    empty = PulseProgram("ld", 2, 6, cfg, (), target_state("bell", 2))
    assert run_program(empty).final_state == basis_state("g", (0, 0), 6)
    assert empty.total_duration == 0


def test_synthesize_dispatch():
    assert synthesize("bell").target.kind == "bell"
    assert synthesize("noon", 3, model="bld").model == "bld"
    with pytest.raises(InvalidArgumentError):
        synthesize("w", 3, model="bld")
    with pytest.raises(InvalidArgumentError):
        synthesize("cat", 2)
    with pytest.raises(InvalidArgumentError):
        synth_ghz(3, cfg=DriveConfig.lamb_dicke(2))
