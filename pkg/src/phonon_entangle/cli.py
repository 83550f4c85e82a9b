"""Command-line entry point: ``phonon-entangle <command> ...``.

Exit status is 0 on success, 2 when a validation check fails and 1 on any
error (including bad arguments). Tables are written as CSV, reports as JSON;
without ``-o`` they go to stdout. ``--plot`` writes a PNG next to the CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import load_config
from .dynamics_bld import xi
from .dynamics_ld import DriveConfig, integrate_two_level, validate_params
from .errors import PhononEntangleError
from .hilbert import overlap_fidelity
from .modes import coupling_coefficients, find_modes, mode_residuals
from .serialize import load_program, program_to_dict
from .script import render_pulse_script
from .sync import DEFAULT_DEPTH, alpha_max
from .synthesis import program_fidelity, run_program, synthesize

__all__ = ["main", "build_parser", "sweep_rows", "alpha_max_rows", "xi_rows"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class _CommandError(Exception):
    pass


# ---------------------------------------------------------------------------
# output helpers


def _write_text(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _csv_text(rows, columns):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def _finite(obj):
    """Non-finite floats become the strings "inf", "-inf", "nan" (strict JSON)."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _json_text(obj):
    return json.dumps(_finite(obj), indent=2, allow_nan=False) + "\n"


def _png_path(args):
    if not getattr(args, "plot", False):
        return None
    if args.output is None:
        raise _CommandError("--plot needs -o/--output so the PNG can sit next to the CSV")
    return Path(args.output).with_suffix(".png")


def _drive(args, n_modes=None, model="ld"):
    if getattr(args, "config", None):
        cfg = load_config(args.config).drive
        if cfg is not None:
            return cfg
    if n_modes is None:
        return None
    return DriveConfig.lamb_dicke(n_modes) if model == "ld" else DriveConfig.beyond_lamb_dicke(n_modes)


# ---------------------------------------------------------------------------
# table builders (also used by the tests)


def _sweep_one(job):
    family, n, depth = job
    prog = synthesize(family, n, sync_depth=depth)
    rep = program_fidelity(prog)
    variants = [s.variant for _, s in prog.syncs]
    alphas = [s.alpha for _, s in prog.syncs]
    return {
        "N": n,
        "fidelity": rep.fidelity,
        "infidelity": 1.0 - rep.fidelity,
        "steps": len(prog.steps),
        "sync_steps": len(prog.syncs),
        "min_alpha": min(alphas) if alphas else 1.0,
        "exact_sync": all(v == "rational_both_odd" for v in variants),
        "total_duration": prog.total_duration,
        "depth": depth,
    }


SWEEP_COLUMNS = ["N", "fidelity", "infidelity", "steps", "sync_steps", "min_alpha", "exact_sync", "total_duration", "depth"]


def sweep_rows(family, n_min, n_max, depth=DEFAULT_DEPTH, jobs=1):
    jobs_list = [(family, n, depth) for n in range(n_min, n_max + 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_sweep_one, jobs_list))
    return [_sweep_one(j) for j in jobs_list]


def alpha_max_rows(top):
    return [
        {"n_prime": n, "m_prime": m, "alpha_max": alpha_max(n, m), "both_odd": bool(n % 2 and m % 2)}
        for n in range(1, top + 1)
        for m in range(1, top + 1)
        if math.gcd(n, m) == 1
    ]


def xi_rows(etas, ms, n_max, negative=False):
    rows = []
    for eta in etas:
        for m in ms:
            lo = -m if negative else 0
            for n in range(lo, n_max + 1):
                rows.append({"eta": float(eta), "m": m, "n": n, "xi": xi(m, n, eta)})
    return rows


# ---------------------------------------------------------------------------
# commands


def cmd_modes(args):
    rc = load_config(args.config)
    if rc.geometry is None or rc.scan is None:
        raise _CommandError(f"{args.config}: [geometry] and [scan] sections are required")
    geom, scan = rc.geometry, rc.scan
    spec = find_modes(geom, scan.k_min, scan.k_max, scan.scan_step)
    _write_text(_csv_text(spec.to_rows(), ["index", "k", "omega", "residual"]), args.output)
    if scan.couplings:
        if args.output is None:
            raise _CommandError("coupling export needs -o/--output")
        rows = []
        for idx in scan.couplings:
            c = coupling_coefficients(geom, spec, idx)
            for i in range(geom.n_membranes):
                row = {"mode_index": idx, "k": c.k, "membrane": i + 1, "g1": c.g1[i]}
                row.update({f"g2_{j + 1}": float(c.g2[i][j]) for j in range(geom.n_membranes)})
                rows.append(row)
        cols = ["mode_index", "k", "membrane", "g1"] + [f"g2_{j + 1}" for j in range(geom.n_membranes)]
        out = Path(args.output)
        out.with_name(out.stem + "_couplings.csv").write_text(_csv_text(rows, cols))
    png = _png_path(args)
    if png is not None:
        from .plotting import plot_spectrum

        ks = np.linspace(scan.k_min, scan.k_max, 4000)
        plot_spectrum(ks, mode_residuals(geom, ks), spec.roots, png)
    return 0


def cmd_synth(args):
    n = args.n
    if args.family == "bell":
        n_modes = 2
    elif args.family == "noon":
        n_modes = 2
    elif args.family == "ghz" and args.model == "bld":
        n_modes = 3
    else:
        n_modes = n
    if args.family != "bell" and n is None:
        raise _CommandError(f"{args.family} needs N")
    cfg = _drive(args, n_modes, args.model)
    prog = synthesize(args.family, n, cfg, sync_depth=args.depth, model=args.model)
    if args.format == "script":
        _write_text(render_pulse_script(prog), args.output)
    else:
        _write_text(_json_text(program_to_dict(prog)), args.output)
    return 0


def _load(args):
    cfg = _drive(args)
    prog = load_program(args.program, cfg)
    if cfg is not None and cfg.n_modes != prog.n_modes:
        raise _CommandError(f"config has {cfg.n_modes} membranes, program needs {prog.n_modes}")
    return prog, cfg


def cmd_run(args):
    prog, cfg = _load(args)
    rep = program_fidelity(prog, cfg=cfg) if args.fidelity_only else run_program(prog, cfg=cfg)
    out = rep.to_dict()
    out["target"] = prog.target.describe()
    out["steps"] = len(prog.steps)
    _write_text(_json_text(out), args.output)
    return 0


def cmd_sweep(args, family):
    if args.n_min < 1 or args.n_max < args.n_min:
        raise _CommandError("need 1 <= N_MIN <= N_MAX")
    rows = sweep_rows(family, args.n_min, args.n_max, args.depth, args.jobs)
    png = _png_path(args)
    _write_text(_csv_text(rows, SWEEP_COLUMNS), args.output)
    if png is not None:
        from .plotting import plot_sweep

        plot_sweep(rows, family, png)
    return 0


def cmd_xi_table(args):
    rows = xi_rows(args.eta, args.m, args.n_max, args.negative)
    png = _png_path(args)
    _write_text(_csv_text(rows, ["eta", "m", "n", "xi"]), args.output)
    if png is not None:
        from .plotting import plot_xi_table

        plot_xi_table(rows, png)
    return 0


def cmd_alpha_max(args):
    if args.max < 1:
        raise _CommandError("--max must be >= 1")
    rows = alpha_max_rows(args.max)
    png = _png_path(args)
    _write_text(_csv_text(rows, ["n_prime", "m_prime", "alpha_max", "both_odd"]), args.output)
    if png is not None:
        from .plotting import plot_alpha_max

        plot_alpha_max(rows, png)
    return 0


def cmd_validate(args):
    cfg = _drive(args, args.modes, args.model)
    if cfg is None:
        raise _CommandError("give a config with a [drive] section or --modes")
    rep = validate_params(cfg, args.model, args.threshold)
    out = rep.to_dict()
    out["drive"] = cfg.to_dict()
    _write_text(_json_text(out), args.output)
    return 0 if rep.passed else 2


def cmd_integrate(args):
    prog, cfg = _load(args)
    cfg = prog.drive if cfg is None else cfg
    if prog.model != "ld":
        raise _CommandError("integrate compares against the Lamb-Dicke propagators; program is bld")
    if args.omega_ratio is not None:
        cfg = cfg.with_omega_rabi(args.omega_ratio * min(cfg.omega_m))
        # keep the pulse angles: rebuild durations at the new drive strength
        prog = load_program_with_drive(prog, cfg)
    closed = run_program(prog, cfg=cfg).final_state
    full = integrate_two_level(prog.initial_state(), prog.steps, cfg, tol=args.tol, order=args.order)
    fid = overlap_fidelity(closed, full)
    out = {
        "omega_rabi": cfg.omega_rabi,
        "omega_ratio": cfg.omega_rabi / min(cfg.omega_m),
        "order": args.order,
        "tol": args.tol,
        "steps": len(prog.steps),
        "fidelity": fid,
        "infidelity": 1.0 - fid,
        "target_fidelity_closed_form": overlap_fidelity(prog.target.state, closed),
        "target_fidelity_integrated": overlap_fidelity(prog.target.state, full),
        "validation": validate_params(cfg, "ld").to_dict(),
    }
    _write_text(_json_text(out), args.output)
    return 0


def load_program_with_drive(prog, cfg):
    """Same pulse angles, durations recomputed for ``cfg``."""
    from .script import parse_pulse_script

    return parse_pulse_script(render_pulse_script(prog), cfg)


# ---------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="phonon-entangle", description="Phonon entanglement in multi-membrane cavities.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def out(sp):
        sp.add_argument("-o", "--output", help="output file (default stdout)")

    s = sub.add_parser("modes", help="cavity mode spectrum and couplings from a TOML config")
    s.add_argument("config")
    out(s)
    s.add_argument("--plot", action="store_true")
    s.set_defaults(func=cmd_modes)

    s = sub.add_parser("synth", help="synthesize a pulse program")
    s.add_argument("family", choices=["bell", "noon", "ghz", "w"])
    s.add_argument("n", nargs="?", type=int, help="phonon number (noon) or membrane count (ghz, w)")
    s.add_argument("--model", choices=["ld", "bld"], default="ld")
    s.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="synchronization depth")
    s.add_argument("--config", help="TOML file with a [drive] section")
    s.add_argument("--format", choices=["json", "script"], default="json")
    out(s)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("run", help="run a program (JSON or pulse script)")
    s.add_argument("program")
    s.add_argument("--config", help="TOML file with a [drive] section")
    s.add_argument("--fidelity-only", action="store_true", help="skip the final state (faster for long programs)")
    out(s)
    s.set_defaults(func=cmd_run)

    for fam in ("noon", "ghz"):
        s = sub.add_parser(f"sweep-{fam}", help=f"{fam.upper()} fidelity over a range of N")
        s.add_argument("n_min", type=int)
        s.add_argument("n_max", type=int)
        s.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
        s.add_argument("--jobs", type=int, default=1)
        out(s)
        s.add_argument("--plot", action="store_true")
        s.set_defaults(func=lambda a, fam=fam: cmd_sweep(a, fam))

    s = sub.add_parser("xi-table", help="multi-phonon displacement matrix elements")
    s.add_argument("--eta", type=float, nargs="+", default=[round(0.1 * i, 1) for i in range(1, 10)])
    s.add_argument("--m", type=int, nargs="+", default=[0, 1, 10, 30])
    s.add_argument("--n-max", type=int, default=60)
    s.add_argument("--negative", action="store_true", help="include orders down to -m")
    out(s)
    s.add_argument("--plot", action="store_true")
    s.set_defaults(func=cmd_xi_table)

    s = sub.add_parser("alpha-max", help="best synchronization quality over coprime (n', m')")
    s.add_argument("--max", type=int, default=20)
    out(s)
    s.add_argument("--plot", action="store_true")
    s.set_defaults(func=cmd_alpha_max)

    s = sub.add_parser("validate", help="check the parameter regime of a drive configuration")
    s.add_argument("config", nargs="?")
    s.add_argument("--model", choices=["ld", "bld"], default="ld")
    s.add_argument("--modes", type=int, help="use the default drive for this many membranes")
    s.add_argument("--threshold", type=float, default=10.0, help="ratio read as '>>'")
    out(s)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("integrate", help="compare closed-form pulses with the full time-dependent coupling")
    s.add_argument("program")
    s.add_argument("--config", help="TOML file with a [drive] section")
    s.add_argument("--omega-ratio", type=float, help="set Omega to this fraction of the lowest membrane frequency")
    s.add_argument("--order", type=int, default=4, help="displacement series truncation")
    s.add_argument("--tol", type=float, default=1e-10)
    out(s)
    s.set_defaults(func=cmd_integrate)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PhononEntangleError, _CommandError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
