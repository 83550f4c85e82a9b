"""JSON form of pulse programs.

Phases and angles are stored as strings in units of pi (``"3/2"`` or
``"~0.123"``) so rationals survive a round trip; durations are stored as
floats and read back verbatim.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .dynamics_bld import MultiSidebandPulse
from .dynamics_ld import DriveConfig, Pulse
from .errors import InvalidArgumentError
from .hilbert import StateVector, target_state
from .phase import format_over_pi, parse_over_pi
from .sync import SyncSolution
from .synthesis import Checkpoint, PulseProgram

__all__ = [
    "drive_from_dict",
    "step_to_dict",
    "step_from_dict",
    "program_to_dict",
    "program_from_dict",
    "save_program",
    "load_program",
]


def drive_from_dict(d):
    try:
        return DriveConfig(
            float(d["omega_rabi"]),
            d["eta"],
            d["omega_m"],
            float(d.get("gamma_c", 0.0)),
            d.get("gamma_m", ()),
        )
    except KeyError as exc:
        raise InvalidArgumentError(f"drive configuration lacks {exc.args[0]!r}") from None


def _opt_over_pi(x):
    return None if x is None else format_over_pi(x)


def step_to_dict(p):
    d = {}
    if isinstance(p, MultiSidebandPulse):
        d["orders"] = list(p.orders)
        d["ref_occ"] = None if p.ref_occ is None else list(p.ref_occ)
    else:
        d["kind"] = p.kind
        d["membrane"] = p.membrane
        d["ref_occ"] = p.ref_occ
    d["phase_over_pi"] = format_over_pi(p.phase)
    d["angle_over_pi"] = _opt_over_pi(p.angle)
    d["duration"] = p.duration
    d["label"] = p.label
    return d


def step_from_dict(d):
    angle = d.get("angle_over_pi")
    angle = None if angle is None else parse_over_pi(angle)
    phase = parse_over_pi(d["phase_over_pi"])
    if "orders" in d:
        ref = d.get("ref_occ")
        return MultiSidebandPulse(
            tuple(d["orders"]), phase, float(d["duration"]), angle, None if ref is None else tuple(ref), d.get("label", "")
        )
    return Pulse(d["kind"], d.get("membrane"), phase, float(d["duration"]), angle, d.get("ref_occ"), d.get("label", ""))


def _sync_from_dict(d):
    return SyncSolution(
        n=d["n"],
        m=d["m"],
        duration=d["duration"],
        angle_over_pi=Fraction(d["angle_over_pi"]),
        ref_occ=d["ref_occ"],
        alpha_n=d["alpha_n"],
        alpha_m=d["alpha_m"],
        sign_n=d["sign_n"],
        sign_m=d["sign_m"],
        variant=d["variant"],
        pair=tuple(d["pair"]),
        p=d.get("p"),
        branch=d.get("branch"),
        approximant_rank=d.get("approximant_rank"),
    )


def program_to_dict(program):
    return {
        "model": program.model,
        "n_modes": program.n_modes,
        "cutoff": program.cutoff,
        "drive": program.drive.to_dict(),
        "steps": [step_to_dict(p) for p in program.steps],
        "target": program.target.describe(),
        "checkpoints": [
            {"after_step": c.after_step, "label": c.label, "state": c.state.to_json()} for c in program.checkpoints
        ],
        "sync": [dict(step=i, **s.to_dict()) for i, s in program.syncs],
    }


def program_from_dict(d):
    try:
        n, cutoff = int(d["n_modes"]), int(d["cutoff"])
        t = d["target"]
        tgt = target_state(t["kind"], int(t.get("n_modes", n)), cutoff, t.get("n_phonon"))
        syncs = []
        for s in d.get("sync", ()):
            s = dict(s)
            step = s.pop("step")
            syncs.append((int(step), _sync_from_dict(s)))
        return PulseProgram(
            d["model"],
            n,
            cutoff,
            drive_from_dict(d["drive"]),
            tuple(step_from_dict(s) for s in d["steps"]),
            tgt,
            tuple(
                Checkpoint(int(c["after_step"]), StateVector.from_json(c["state"], n, cutoff), c.get("label", ""))
                for c in d.get("checkpoints", ())
            ),
            tuple(syncs),
        )
    except KeyError as exc:
        raise InvalidArgumentError(f"program JSON lacks {exc.args[0]!r}") from None


def save_program(program, path):
    Path(path).write_text(json.dumps(program_to_dict(program), indent=2) + "\n")


def load_program(path, cfg=None):
    """Load a program from ``.json`` or a pulse script (any other suffix)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        return program_from_dict(json.loads(text))
    from .script import parse_pulse_script

    return parse_pulse_script(text, cfg)
