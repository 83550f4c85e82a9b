import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from phonon_entangle.errors import InvalidArgumentError, SyncFailure
from phonon_entangle.sync import (
    alpha_for,
    alpha_max,
    best_sync_duration,
    classify_ratio,
    odd_odd_approximants,
    sin_pi,
    sqrt_continued_fraction,
)


def take(it, n):
    return [x for _, x in zip(range(n), it)]


def test_sin_pi_exact():
    assert sin_pi(Fraction(1, 2)) == (1.0, 1)
    assert sin_pi(Fraction(3, 2)) == (1.0, -1)
    assert sin_pi(Fraction(7)) == (0.0, 0)
    assert sin_pi(Fraction(5741, 2)) == (1.0, 1)
    assert sin_pi(Fraction(5739, 2)) == (1.0, -1)
    v, s = sin_pi(Fraction(1, 3))
    assert v == pytest.approx(math.sqrt(3) / 2, abs=1e-15)
    assert s == 1


def test_continued_fraction_sqrt2():
    assert take(sqrt_continued_fraction(2, 1), 6) == [1, 2, 2, 2, 2, 2]
    assert take(sqrt_continued_fraction(3, 2), 5) == [1, 4, 2, 4, 2]
    assert list(sqrt_continued_fraction(9, 4)) == [1, 2]


def test_odd_odd_sqrt2_stream():
    assert take(odd_odd_approximants(2, 1), 6) == [(1, 1), (7, 5), (41, 29), (239, 169), (1393, 985), (8119, 5741)]


def test_odd_odd_sqrt_3_2_stream():
    assert take(odd_odd_approximants(3, 2), 3) == [(1, 1), (11, 9), (109, 89)]


@given(st.integers(1, 60), st.integers(1, 60))
def test_approximants_odd_and_improving(n, m):
    cls = classify_ratio(n, m, n_approx=6)
    if cls.variant != "irrational":
        return
    g = math.gcd(n, m)
    a, b = n // g, m // g
    x = math.sqrt(a / b)
    # exact numerator: q x - p itself cancels catastrophically for large q
    errs = [abs(q * q * a - p * p * b) / (b * (q * x + p)) for p, q in cls.approximants]
    assert all(p % 2 and q % 2 for p, q in cls.approximants)
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_classify():
    assert classify_ratio(9, 1).variant == "rational_both_odd"
    assert classify_ratio(9, 1).pair == (3, 1)
    assert classify_ratio(4, 1).variant == "rational_one_even"
    assert classify_ratio(8, 2).pair == (2, 1)
    assert classify_ratio(2, 1).variant == "irrational"
    with pytest.raises(InvalidArgumentError):
        classify_ratio(0, 1)


def test_alpha_values():
    assert alpha_max(3, 1) == 1.0
    assert alpha_max(2, 1) == pytest.approx(math.sqrt(3) / 2, abs=1e-15)
    assert alpha_for(2, 1, 1, "+") == pytest.approx(math.sqrt(3) / 2)
    assert alpha_for(1, 1, 1, "-") == alpha_for(1, 1, 1, "+")


def test_alpha_max_floor_and_odd_pattern():
    vals = {}
    for n in range(1, 21):
        for m in range(1, 21):
            if math.gcd(n, m) == 1:
                vals[n, m] = alpha_max(n, m)
    assert min(vals.values()) >= 0.86
    for (n, m), a in vals.items():
        assert (abs(a - 1) < 1e-12) == bool(n % 2 and m % 2)


def test_sync_rational_both_odd_is_exact():
    s = best_sync_duration(9, 1)
    assert s.alpha == 1.0
    assert s.angle_over_pi == Fraction(1, 2)
    assert s.duration == pytest.approx(math.pi / 2)


def test_sync_rational_one_even():
    s = best_sync_duration(4, 1)
    assert s.variant == "rational_one_even"
    assert s.alpha == pytest.approx(alpha_max(2, 1))


def test_sync_irrational_improves_with_depth():
    alphas = [best_sync_duration(2, 1, depth=d).alpha for d in range(1, 7)]
    assert all(a < b for a, b in zip(alphas, alphas[1:]))
    s = best_sync_duration(2, 1, depth=3)
    assert s.pair == (41, 29)
    assert s.angle_over_pi == Fraction(29, 2)
    assert s.approximant_rank == 3


def test_sync_duration_cap():
    s = best_sync_duration(2, 1, depth=20)
    assert s.duration <= 1e4
    with pytest.raises(SyncFailure):
        best_sync_duration(2, 1, depth=3, max_duration=1.0)


def test_sync_order_free():
    a, b = best_sync_duration(3, 1), best_sync_duration(1, 3)
    assert a.alpha == pytest.approx(b.alpha)
