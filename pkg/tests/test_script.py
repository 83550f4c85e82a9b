import json
from fractions import Fraction

import pytest

from phonon_entangle.dynamics_ld import DriveConfig
from phonon_entangle.errors import ScriptError
from phonon_entangle.script import format_kets, parse_kets, parse_pulse_script, render_pulse_script
from phonon_entangle.serialize import load_program, program_from_dict, program_to_dict, save_program
from phonon_entangle.synthesis import run_program, synth_bell, synthesize
from phonon_entangle.config import load_config, parse_config

BELL = """\
pulse carrier phase=3/2pi angle=1/2pi
pulse red m=1 phase=1/2pi angle=1/4pi ref_occ=1
pulse red m=2 phase=1/2pi angle=1/2pi ref_occ=1
target bell
"""


def pulse_tuple(p):
    return (p.kind, p.membrane, p.phase, p.angle, p.ref_occ, p.duration)


def test_bell_script_matches_synthesizer():
    prog = parse_pulse_script(BELL)
    ref = synth_bell()
    assert prog.model == ref.model and prog.n_modes == 2 and prog.cutoff == ref.cutoff
    assert [pulse_tuple(p) for p in prog.steps] == [pulse_tuple(p) for p in ref.steps]
    assert prog.target == ref.target
    assert run_program(prog).fidelity == pytest.approx(1.0, abs=1e-12)


def test_empty_script_with_target():
    prog = parse_pulse_script("target bell\n")
    assert prog.steps == ()


def test_comments_and_blank_lines():
    text = "# header\n\nmodel ld   # inline\nmodes 2 cutoff 6\n" + BELL
    assert len(parse_pulse_script(text).steps) == 3


@pytest.mark.parametrize(
    "family,n,model",
    [("bell", None, "ld"), ("noon", 2, "ld"), ("noon", 5, "ld"), ("ghz", 6, "ld"), ("w", 4, "ld"), ("noon", 3, "bld"), ("ghz", 3, "bld")],
)
def test_render_round_trip(family, n, model):
    prog = synthesize(family, n, model=model)
    assert parse_pulse_script(render_pulse_script(prog), prog.drive) == prog


def test_float_literals_round_trip():
    text = "modes 2 cutoff 4\npulse red m=1 phase=~0.1pi angle=~0.3333pi ref_occ=1\ntarget bell\n"
    prog = parse_pulse_script(text)
    assert prog.steps[0].phase == 0.1
    assert parse_pulse_script(render_pulse_script(prog)) == prog


@pytest.mark.parametrize(
    "text,line,col",
    [
        ("modes 2\npulse red m=5 phase=0 angle=1/2 ref_occ=1\ntarget bell", 2, 11),
        ("modes 2\npulse green phase=0 angle=1/2\ntarget bell", 2, 7),
        ("modes 2\npulse carrier phase=1/0 angle=1/2\ntarget bell", 2, 15),
        ("modes 2\npulse carrier phase=0\ntarget bell", 2, None),
        ("model ld\nmodes 2\npulse multi orders=1,0 phase=0 angle=1/2 ref_occ=0,0\ntarget bell", 3, 7),
        ("model bld\nmodes 2\npulse red m=1 phase=0 angle=1/2 ref_occ=1\ntarget bell", 3, 7),
        ("frobnicate\ntarget bell", 1, 1),
        ("modes 2\n", None, None),
        ("modes 2\ntarget noon", 2, 8),
    ],
)
def test_positioned_errors(text, line, col):
    with pytest.raises(ScriptError) as ei:
        parse_pulse_script(text)
    assert ei.value.line == line
    if col is not None:
        assert ei.value.column == col


def test_checkpoints():
    text = BELL.replace("target bell", "checkpoint |g,1,0> |g,0,1>\ntarget bell")
    prog = parse_pulse_script(text)
    (cp,) = prog.checkpoints
    assert cp.after_step == 3
    assert run_program(prog).checkpoint_fidelities[0] == pytest.approx(1.0, abs=1e-12)


def test_ket_coefficients():
    s = parse_kets("1/sqrt(2)|g,1,0> -1/sqrt(2)|g,0,1>", 2, 4)
    assert s["g", (0, 1)] == pytest.approx(-(0.5**0.5))
    s = parse_kets("0.6|e,0> (0+0.8j)|g,1>", 1, 3)
    assert s["g", (1,)] == 0.8j
    assert parse_kets(format_kets(s), 1, 3) == s
    with pytest.raises(Exception):
        parse_kets("0.5|g,0>", 1, 3)


def test_sync_statement_checked():
    prog = synthesize("noon", 2)
    text = render_pulse_script(prog).replace("depth=6", "depth=2")
    with pytest.raises(ScriptError, match="sync"):
        parse_pulse_script(text, prog.drive)


def test_durations_follow_drive():
    slow = DriveConfig(0.5, (0.1, 0.1), (1000.0, 1414.0))
    a = parse_pulse_script(BELL)
    b = parse_pulse_script(BELL, slow)
    assert b.steps[1].duration == pytest.approx(2 * a.steps[1].duration)


@pytest.mark.parametrize("family,n,model", [("noon", 3, "ld"), ("ghz", 4, "ld"), ("noon", 2, "bld")])
def test_json_round_trip(tmp_path, family, n, model):
    prog = synthesize(family, n, model=model)
    d = json.loads(json.dumps(program_to_dict(prog)))
    assert program_from_dict(d) == prog
    path = tmp_path / "p.json"
    save_program(prog, path)
    assert load_program(path) == prog
    assert d["steps"][0]["phase_over_pi"] in ("3/2", "1/2", "0", "1")


def test_load_script_file(tmp_path):
    path = tmp_path / "bell.pulse"
    path.write_text(BELL)
    assert len(load_program(path).steps) == 3


def test_config_file(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text(
        "[geometry]\nmirror_right = 1.0\nmembranes = [0.5]\nreflectivity = 0.3\n"
        "[scan]\nk_min = 1.0\nk_max = 10.0\n"
        "[drive]\neta = [0.1]\nomega_m = [500.0]\n"
    )
    rc = load_config(path)
    assert rc.geometry.membranes == (0.5,)
    assert rc.scan.scan_step is None
    assert rc.drive.omega_rabi == 1.0
    with pytest.raises(Exception, match="unknown keys"):
        parse_config({"drive": {"eta": [0.1], "omega_m": [1.0], "colour": 1}})
