import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phonon_entangle.errors import InvalidArgumentError, TrackingFailure
from phonon_entangle.modes import (
    CavityGeometry,
    coupling_coefficients,
    ModeSpectrum,
    find_modes,
    membrane_matrix,
    mode_residual,
    mode_residuals,
    propagation_matrix,
    sweep_branch,
    system_matrix,
    track_root,
    zeta_from_reflectivity,
)


def closed_form_n1(geom, k):
    q0, q1, q2 = geom.positions
    c10 = math.sin(k * (q2 - q0))
    c11 = -math.sin(k * (q1 - q0)) * math.sin(k * (q2 - q1))
    return (c10 + geom.zeta * c11) / k


def closed_form_n2(geom, k):
    q0, q1, q2, q3 = geom.positions
    s = lambda a, b: math.sin(k * (a - b))
    c20 = s(q3, q0)
    c21 = s(q1, q0) * s(q1, q3) + s(q2, q0) * s(q2, q3)
    c22 = s(q1, q0) * s(q2, q1) * s(q3, q2)
    z = geom.zeta
    return (c20 + z * c21 + z * z * c22) / k


def test_zero_length_propagation_is_identity():
    m = propagation_matrix(1.0, 0.0)
    assert m == (1.0, 0.0, -0.0, 1.0)


def test_quarter_wave():
    k = 3.7
    m = propagation_matrix(k, math.pi / (2 * k))
    np.testing.assert_allclose(m.as_array(), [[0, 1 / k], [-k, 0]], atol=1e-15)


@given(st.floats(1e-3, 1e3), st.floats(0, 10))
def test_propagation_unimodular(k, l):
    assert propagation_matrix(k, l).det() == pytest.approx(1.0, abs=1e-12)


@given(st.floats(1e-3, 1e3), st.floats(0, 50))
def test_membrane_unimodular(k, zeta):
    assert membrane_matrix(k, zeta).det() == 1.0


def test_transparent_membrane():
    assert membrane_matrix(5.0, 0.0) == (1.0, 0.0, -0.0, 1.0)


def test_zeta_value():
    assert zeta_from_reflectivity(0.7) == pytest.approx(3.055050463303893, abs=1e-12)
    assert CavityGeometry(0, 1, (0.5,), 0.7).zeta == pytest.approx(2 * math.sqrt(0.7 / 0.3), abs=1e-14)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_bad_k(bad):
    with pytest.raises(InvalidArgumentError):
        propagation_matrix(bad, 1.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(mirror_left=0, mirror_right=1, membranes=(0.6, 0.4), reflectivity=0.5),
        dict(mirror_left=0, mirror_right=1, membranes=(1.2,), reflectivity=0.5),
        dict(mirror_left=0, mirror_right=1, membranes=(0.5,), reflectivity=1.0),
    ],
)
def test_invalid_geometry(kwargs):
    with pytest.raises(InvalidArgumentError):
        CavityGeometry(**kwargs)


def test_empty_cavity_matrix():
    g = CavityGeometry(0.0, 1.3, (), 0.4)
    assert system_matrix(g, 2.1) == propagation_matrix(2.1, 1.3)


def test_closed_forms_at_random_k():
    rng = np.random.default_rng(7)
    g1 = CavityGeometry(0.0, 1.0, (0.37,), 0.7)
    g2 = CavityGeometry(0.0, 1.0, (0.29, 0.71), 0.7)
    for k in rng.uniform(0.1, 300.0, 50):
        for g, ref in ((g1, closed_form_n1), (g2, closed_form_n2)):
            expect = ref(g, k)
            got = mode_residual(g, k)
            assert got == pytest.approx(expect, rel=1e-10, abs=1e-13 / k)
            assert system_matrix(g, k).det() == pytest.approx(1.0, abs=1e-12)


def test_vectorized_residual_matches_scalar():
    g = CavityGeometry(-0.2, 1.0, (0.1, 0.3, 0.8), 0.6)
    ks = np.linspace(0.5, 80, 301)
    np.testing.assert_allclose(mode_residuals(g, ks), [mode_residual(g, k) for k in ks], rtol=1e-10, atol=1e-13)


def test_empty_cavity_roots():
    g = CavityGeometry(0.0, 1.0, (0.3, 0.55), 0.0)
    spec = find_modes(g, 1.0, 101 * math.pi - 1.0)
    expect = math.pi * np.arange(1, 101)
    assert len(spec) == 100
    np.testing.assert_allclose(spec.roots, expect, rtol=1e-9)
    assert all(abs(r) < 1e-9 for r in spec.residuals)


def test_residual_sign_change_across_empty_root():
    g = CavityGeometry(0.0, 1.0, (), 0.0)
    for n in range(1, 6):
        assert mode_residual(g, n * math.pi - 1e-3) * mode_residual(g, n * math.pi + 1e-3) < 0


def test_no_roots_is_empty_spectrum():
    g = CavityGeometry(0.0, 1.0, (), 0.0)
    assert find_modes(g, 3.2, 6.2).roots == ()


def test_midpoint_membrane_pulls_pairs_together():
    bare = CavityGeometry(0.0, 1.0, (0.5,), 0.0)
    mim = CavityGeometry(0.0, 1.0, (0.5,), 0.7)
    kmax = 20 * math.pi + 1
    r0 = np.array(find_modes(bare, 0.5, kmax).roots)
    r1 = np.array(find_modes(mim, 0.5, kmax).roots)
    assert len(r0) == len(r1) == 20
    # modes with a node at the membrane are untouched; the others are pulled
    # down toward the node mode below them, forming near-degenerate doublets
    np.testing.assert_allclose(r1[1::2], r0[1::2], rtol=1e-12)
    assert np.all(r1[0::2] < r0[0::2] - 1e-3)
    assert np.all(np.diff(r1)[1::2] < math.pi - 1e-3)
    # dense scan oracle
    ks = np.linspace(0.5, kmax, 200001)
    res = mode_residuals(mim, ks)
    crossings = ks[:-1][np.sign(res[:-1]) != np.sign(res[1:])]
    np.testing.assert_allclose(crossings, r1, atol=(ks[1] - ks[0]) * 1.01)


def test_periodicity_of_tracked_branch():
    n, L = 100_000, 1.0
    g = CavityGeometry(0.0, L, (L / 3, 2 * L / 3), 0.7)
    kn = n * math.pi / L
    spec = find_modes(g, kn - 3.2, kn + 3.2)
    assert len(spec) >= 3
    for k in spec.roots:
        lam = 2 * math.pi / k
        ds = np.linspace(0.0, lam, 201)
        for mem in (0, 1):
            branch = sweep_branch(g, k, mem, ds)
            assert abs(branch[-1] - branch[0]) <= 1e-12 * k
            assert branch.max() - branch.min() > 0.1


def test_transparent_membranes_do_not_couple():
    g = CavityGeometry(0.0, 1.0, (0.3, 0.6), 0.0)
    spec = find_modes(g, 10.0, 20.0)
    cs = coupling_coefficients(g, spec, 1)
    assert all(abs(x) < 1e-6 for x in cs.g1)
    assert np.all(np.abs(cs.g2) < 1e-3)


def test_coupling_matches_direct_difference_and_is_symmetric():
    g = CavityGeometry(0.0, 1.0, (0.27, 0.64), 0.7)
    spec = find_modes(g, 30.0, 40.0)
    cs = coupling_coefficients(g, spec, 2)
    h = cs.fd_step
    for i in range(2):
        shift = [0.0, 0.0]
        shift[i] = h
        kp = track_root(g.displaced(shift), cs.k, spec.scan_step)
        shift[i] = -h
        km = track_root(g.displaced(shift), cs.k, spec.scan_step)
        assert cs.g1[i] == (kp - km) / (2 * h)
    np.testing.assert_array_equal(cs.g2, cs.g2.T)


def test_central_difference_is_second_order():
    g = CavityGeometry(0.0, 1.0, (0.41,), 0.7)
    spec = find_modes(g, 20.0, 30.0)
    lam = 2 * math.pi / spec.roots[1]
    hs = [4e-3 * lam, 2e-3 * lam, 1e-3 * lam]
    vals = [coupling_coefficients(g, spec, 1, h=h).g1[0] for h in hs]
    d1, d2 = vals[0] - vals[1], vals[1] - vals[2]
    assert d1 / d2 == pytest.approx(4.0, rel=0.05)


def test_g1_vanishes_at_field_node():
    # one membrane swept across a node of the bare mode sin(12 pi x) at x = 0.5
    k_node = 12 * math.pi
    lam = 2 * math.pi / k_node
    geom0 = CavityGeometry(0.0, 1.0, (0.5,), 0.7)
    step = geom0.default_scan_step()
    offsets = np.linspace(0.0, lam / 4, 21)
    g1 = {}
    for sign in (1, -1):
        k = k_node
        for d in offsets:
            geom = geom0.displaced([sign * d])
            k = track_root(geom, k, step)
            spec = ModeSpectrum((k,), step, (mode_residual(geom, k),))
            g1[sign * d] = abs(coupling_coefficients(geom, spec, 0).g1[0])
    xs = sorted(g1)
    vals = np.array([g1[x] for x in xs])
    centre = xs.index(0.0)
    assert vals[centre] < 1e-6
    assert vals[centre] == vals.min()
    assert vals[centre - 1] > 1e-2 and vals[centre + 1] > 1e-2


def test_tracking_failure_is_reported():
    g = CavityGeometry(0.0, 1.0, (), 0.0)
    with pytest.raises(TrackingFailure):
        track_root(g, 1.5, 0.1)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.05, 0.95), min_size=1, max_size=4, unique=True), st.floats(0.0, 0.95))
def test_products_stay_unimodular(qs, R):
    qs = sorted(qs)
    if min(np.diff([0.0] + qs + [1.0])) < 1e-3:
        return
    g = CavityGeometry(0.0, 1.0, tuple(qs), R)
    for k in (0.3, 7.0, 55.5):
        assert system_matrix(g, k).det() == pytest.approx(1.0, abs=1e-12 * max(1.0, k * g.zeta) ** 2)
