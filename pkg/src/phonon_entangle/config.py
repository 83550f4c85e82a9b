"""TOML run configuration: cavity geometry, mode scan and drive parameters.

Example::

    [geometry]
    mirror_left = 0.0
    mirror_right = 1.0
    membranes = [0.3333, 0.6667]
    reflectivity = 0.5

    [scan]
    k_min = 1.0
    k_max = 40.0
    # scan_step = 0.005      # default pi / (20 L)
    couplings = [0, 1]       # mode indices for coupling coefficients

    [drive]
    omega_rabi = 1.0
    eta = [0.1, 0.1]
    omega_m = [1000.0, 1414.2]
    gamma_c = 0.0
    gamma_m = [0.0, 0.0]

Every section is optional; missing ones fall back to defaults.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dynamics_ld import DriveConfig
from .errors import InvalidArgumentError
from .modes import CavityGeometry

__all__ = ["ScanConfig", "RunConfig", "load_config", "parse_config"]


@dataclass(frozen=True)
class ScanConfig:
    k_min: float
    k_max: float
    scan_step: float | None = None
    couplings: tuple[int, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    geometry: CavityGeometry | None = None
    scan: ScanConfig | None = None
    drive: DriveConfig | None = None
    extra: dict = field(default_factory=dict)


def _section(d, name, known):
    sec = d.get(name)
    if sec is None:
        return None
    unknown = set(sec) - set(known)
    if unknown:
        raise InvalidArgumentError(f"[{name}]: unknown keys {sorted(unknown)}")
    return sec


def parse_config(d):
    extra = {k: v for k, v in d.items() if k not in ("geometry", "scan", "drive")}
    geom = scan = drive = None
    g = _section(d, "geometry", ("mirror_left", "mirror_right", "membranes", "reflectivity"))
    if g is not None:
        try:
            geom = CavityGeometry(
                float(g.get("mirror_left", 0.0)),
                float(g["mirror_right"]),
                tuple(g["membranes"]),
                float(g["reflectivity"]),
            )
        except KeyError as exc:
            raise InvalidArgumentError(f"[geometry] lacks {exc.args[0]!r}") from None
    s = _section(d, "scan", ("k_min", "k_max", "scan_step", "couplings"))
    if s is not None:
        try:
            scan = ScanConfig(
                float(s["k_min"]),
                float(s["k_max"]),
                None if s.get("scan_step") is None else float(s["scan_step"]),
                tuple(int(i) for i in s.get("couplings", ())),
            )
        except KeyError as exc:
            raise InvalidArgumentError(f"[scan] lacks {exc.args[0]!r}") from None
    dr = _section(d, "drive", ("omega_rabi", "eta", "omega_m", "gamma_c", "gamma_m"))
    if dr is not None:
        try:
            drive = DriveConfig(
                float(dr.get("omega_rabi", 1.0)),
                dr["eta"],
                dr["omega_m"],
                float(dr.get("gamma_c", 0.0)),
                dr.get("gamma_m", ()),
            )
        except KeyError as exc:
            raise InvalidArgumentError(f"[drive] lacks {exc.args[0]!r}") from None
    return RunConfig(geom, scan, drive, extra)


def load_config(path):
    try:
        with Path(path).open("rb") as fh:
            d = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise InvalidArgumentError(f"{path}: {exc}") from None
    return parse_config(d)
