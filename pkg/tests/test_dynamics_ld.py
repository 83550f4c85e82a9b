import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from phonon_entangle.dynamics_ld import (
    DriveConfig,
    Pulse,
    apply_blue,
    apply_carrier,
    apply_pulse,
    apply_red,
    integrate_two_level,
    rabi_frequency,
    validate_params,
)
from phonon_entangle.errors import CutoffViolation, InvalidArgumentError
from phonon_entangle.hilbert import StateVector, basis_state, overlap_fidelity, random_state

SIG_P = np.array([[0, 0], [1, 0]], dtype=complex)  # |e><g| with g first


def annihilation(c):
    return np.diag(np.sqrt(np.arange(1, c)), 1).astype(complex)


def mode_op(op, i, n, c):
    mats = [np.eye(c)] * n
    mats[i] = op
    out = np.eye(1)
    for m in mats:
        out = np.kron(out, m)
    return out


def dense_hamiltonian(kind, i, phase, cfg, n, c):
    ph = np.exp(-1j * math.pi * float(phase))
    if kind == "carrier":
        up = cfg.omega_rabi * np.kron(SIG_P, np.eye(c**n))
    else:
        b = mode_op(annihilation(c), i, n, c)
        ladder = b if kind == "red" else b.conj().T
        up = cfg.omega_rabi * cfg.eta[i] * np.kron(SIG_P, ladder)
    h = ph * up
    return h + h.conj().T


def evolve_dense(state, kind, i, phase, t, cfg):
    n, c = state.n_modes, state.cutoff
    u = expm(-1j * t * dense_hamiltonian(kind, i, phase, cfg, n, c))
    return u @ state.to_dense()


APPLY = {
    "carrier": lambda s, i, ph, t, cfg: apply_carrier(s, ph, t, cfg),
    "red": apply_red,
    "blue": apply_blue,
}

CFG2 = DriveConfig(1.3, (0.1, 0.07), (1000.0, 1400.0))


@pytest.mark.parametrize("kind", ["carrier", "red", "blue"])
@pytest.mark.parametrize("phase", [Fraction(0), Fraction(1, 2), Fraction(3, 2), 0.37])
@pytest.mark.parametrize("membrane", [0, 1])
def test_matches_dense_exponential(kind, phase, membrane):
    rng = np.random.default_rng(hash((kind, membrane, str(phase))) % 2**32)
    cutoff = 6
    # keep the top level empty so the truncated dense operators are exact
    s = random_state(2, cutoff, rng, max_occ=cutoff - 2)
    for t in (0.3, 2.1, 17.0):
        got = APPLY[kind](s, membrane, phase, t, CFG2).to_dense()
        want = evolve_dense(s, kind, membrane, phase, t, CFG2)
        np.testing.assert_allclose(got, want, atol=1e-12)


def test_red_pi_pulse_moves_phonon_to_cavity():
    cfg = DriveConfig(1.0, (0.1,), (1000.0,))
    p = Pulse.from_angle("red", 0, Fraction(1, 2), Fraction(1, 2), 1, cfg)
    out = apply_pulse(basis_state("g", (1,), 4), p, cfg)
    assert abs(out["e", (0,)]) == pytest.approx(1.0, abs=1e-15)
    assert p.duration == pytest.approx(math.pi / 2 / (cfg.omega_rabi * 0.1))


def test_blue_rate_uses_excited_occupation():
    cfg = DriveConfig(1.0, (0.2,), (1000.0,))
    assert rabi_frequency("blue", 0, 3, cfg) == pytest.approx(0.2 * math.sqrt(3))
    # |g,2> -> |e,3> at rate eta sqrt(3): a pi/2-angle pulse at ref 3 empties |g,2>
    p = Pulse.from_angle("blue", 0, 0, Fraction(1, 2), 3, cfg)
    out = apply_pulse(basis_state("g", (2,), 5), p, cfg)
    assert abs(out["e", (3,)]) == pytest.approx(1.0, abs=1e-14)


def test_ground_state_is_dark_to_red():
    s = basis_state("g", (0, 0), 3)
    assert apply_red(s, 0, 0, 5.0, CFG2) == s


def test_cutoff_violation():
    s = basis_state("g", (2,), 3)
    with pytest.raises(CutoffViolation):
        apply_blue(s, 0, 0, 1.0, DriveConfig(1.0, (0.1,), (100.0,)))


def test_membrane_index_checked():
    with pytest.raises(InvalidArgumentError):
        apply_red(basis_state("g", (1, 0), 3), 2, 0, 1.0, CFG2)
    with pytest.raises(InvalidArgumentError):
        Pulse("red", None, 0, 1.0)
    with pytest.raises(InvalidArgumentError):
        Pulse("carrier", 0, 0, 1.0)


@settings(max_examples=100, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.sampled_from(["carrier", "red", "blue"]),
    st.integers(0, 1),
    st.floats(-2, 2),
    st.floats(0, 50),
)
def test_norm_preserved_and_inverse(seed, kind, i, phase, t):
    s = random_state(2, 6, np.random.default_rng(seed), max_occ=4)
    out = APPLY[kind](s, i, phase, t, CFG2)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
    back = APPLY[kind](out, i, phase, -t, CFG2)
    assert overlap_fidelity(back, s) == pytest.approx(1.0, abs=1e-12)


def test_rwa_infidelity_scales_quadratically():
    # Lamb-Dicke truncation of the full coupling (order 1) isolates the
    # rotating-wave error, which should fall like (Omega / omega)^2
    infid = []
    for ratio in (1e-3, 3e-3):
        cfg = DriveConfig(ratio * 1000.0, (0.3,), (1000.0,))
        s = basis_state("g", (1,), 6)
        p = Pulse.from_angle("red", 0, 0, Fraction(1, 2), 1, cfg)
        closed = apply_pulse(s, p, cfg)
        full = integrate_two_level(s, [p], cfg, order=1)
        infid.append(1 - overlap_fidelity(closed, full))
    assert infid[0] < 1e-4
    assert 6 <= infid[1] / infid[0] <= 12


def test_integrator_matches_closed_form_without_sidebands():
    # carrier pulses carry no off-resonant sideband at order 0
    cfg = DriveConfig(1.0, (0.1,), (50.0,))
    s = basis_state("g", (1,), 4)
    p = Pulse.from_angle("carrier", None, Fraction(1, 3), Fraction(1, 3), 0, cfg)
    full = integrate_two_level(s, [p], cfg, order=0, tol=1e-12)
    assert overlap_fidelity(apply_pulse(s, p, cfg), full) == pytest.approx(1.0, abs=1e-10)


def test_validate_defaults_pass():
    assert validate_params(DriveConfig.lamb_dicke(4)).passed
    assert validate_params(DriveConfig.beyond_lamb_dicke(3), "bld").passed


def test_validate_reports_failures():
    cfg = DriveConfig(1.0, (0.1, 0.1), (1000.0, 1003.0), gamma_c=2000.0)
    rep = validate_params(cfg)
    assert not rep.passed
    assert not rep["i"].passed
    assert not rep["iv"].passed
    assert rep["iv"].ratio == pytest.approx(3.0)
    d = rep.to_dict()
    assert {c["name"] for c in d["checks"]} == {"i", "ii", "iii", "iv"}


def test_drive_config_checks():
    with pytest.raises(InvalidArgumentError):
        DriveConfig(1.0, (0.1, 0.1), (1000.0,))
    with pytest.raises(InvalidArgumentError):
        DriveConfig(1.0, (-0.1,), (1000.0,))
    cfg = DriveConfig(1.0, 0.2, (10.0, 20.0), gamma_m=0.5)
    assert cfg.eta == (0.2, 0.2)
    assert cfg.gamma_m == (0.5, 0.5)
