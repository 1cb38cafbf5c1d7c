from fractions import Fraction

import numpy as np
import pytest

from koopcert.wendland import (
    PiecewisePoly1D,
    dimension_walk,
    truncated_power,
    wendland_profile,
)

from oracles import profile_quadrature


def test_truncated_power_degenerate_cases():
    assert truncated_power(0).coeffs == (Fraction(1),)
    assert truncated_power(1).coeffs == (Fraction(1), Fraction(-1))


def test_truncated_power_matches_direct_form():
    p = truncated_power(3)
    assert p.coeffs == (Fraction(1), Fraction(-3), Fraction(3), Fraction(-1))
    for r in (0.0, 0.25, 0.5, 1.0):
        assert p(r) == pytest.approx((1 - r) ** 3, abs=1e-15)


def test_truncated_power_rejects_negative_exponent():
    with pytest.raises(ValueError):
        truncated_power(-1)


def test_dimension_walk_of_linear_profile():
    # int_r^1 t(1-t) dt, values frozen from quadrature of the defining integral
    q = dimension_walk(truncated_power(1))
    assert q.coeffs == (Fraction(1, 6), Fraction(0), Fraction(-1, 2), Fraction(1, 3))
    for r, expected in [(0.0, 1 / 6), (0.5, 1 / 12), (1.0, 0.0)]:
        assert q(r) == pytest.approx(expected, abs=1e-12)


def test_dimension_walk_of_zero_is_zero():
    zero = PiecewisePoly1D((Fraction(0),))
    q = dimension_walk(zero)
    assert q.coeffs == (Fraction(0),)


def test_dimension_walk_vanishes_at_one_and_raises_degree():
    rng = np.random.default_rng(0)
    for _ in range(20):
        deg = rng.integers(0, 6)
        coeffs = tuple(Fraction(int(c), 7) for c in rng.integers(-20, 20, deg + 1))
        p = PiecewisePoly1D(coeffs)
        q = dimension_walk(p)
        assert abs(q(1.0)) <= 1e-15
        if p.coeffs[-1] != 0:
            assert q.degree == p.degree + 2


@pytest.mark.parametrize(
    "d, k, expected",
    [
        (1, 0, (Fraction(1), Fraction(-1))),  # identity walk, ell = 1
        (2, 0, (Fraction(1), Fraction(-2), Fraction(1))),  # (1-r)^2
    ],
)
def test_profile_without_walk(d, k, expected):
    assert wendland_profile(d, k).coeffs == expected


def test_profile_d3_k1_closed_form():
    # (1-r)^4 (4r+1) / 20
    p = wendland_profile(3, 1)
    assert p.coeffs == (
        Fraction(1, 20),
        Fraction(0),
        Fraction(-1, 2),
        Fraction(1),
        Fraction(-3, 4),
        Fraction(1, 5),
    )
    assert p(0.0) == pytest.approx(0.05, abs=1e-15)
    for r in (0.0, 0.3, 0.7):
        assert p(r) == pytest.approx(
            profile_quadrature(3, 1, [r])[0], abs=1e-12
        )


def test_evaluation_outside_support_and_at_midpoint():
    p1 = truncated_power(1)
    assert p1(0.5) == 0.5
    assert p1(2.0) == 0.0
    assert wendland_profile(3, 1)(2.0) == 0.0


def test_evaluation_rejects_negative_radius():
    p = wendland_profile(2, 1)
    with pytest.raises(ValueError):
        p(-0.1)
    with pytest.raises(ValueError):
        p(np.array([0.2, -0.3]))


def test_profiles_match_quadrature_oracle():
    rng = np.random.default_rng(7)
    for d in range(1, 5):
        for k in range(0, 4):
            r = rng.uniform(0, 1, 50)
            got = wendland_profile(d, k)(r)
            want = profile_quadrature(d, k, r)
            np.testing.assert_allclose(got, want, atol=1e-9, rtol=0)


def test_profiles_nonincreasing_and_nonnegative():
    grid = np.linspace(0, 1, 501)
    for d in range(1, 5):
        for k in range(0, 4):
            vals = wendland_profile(d, k)(grid)
            assert np.all(vals >= -1e-15)  # round-off at the support boundary
            assert np.all(np.diff(vals) <= 1e-15)


def test_profiles_continuous_at_support_boundary():
    for d in range(1, 5):
        for k in range(0, 4):
            assert abs(wendland_profile(d, k)(1.0)) <= 1e-12


def test_trailing_zero_coefficients_trimmed():
    p = PiecewisePoly1D((Fraction(2), Fraction(1), Fraction(0), Fraction(0)))
    assert p.degree == 1
    assert p.coeffs == (Fraction(2), Fraction(1))
