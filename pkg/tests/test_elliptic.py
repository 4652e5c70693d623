import math

import mpmath
import numpy as np
import pytest
from cases import C2STAR, EX1, EX2, EX3, EX4
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsefam import (
    DenominatorVanishing,
    Mode,
    PoleProximity,
    QuarticPoly,
    WpSpec,
    invert_quartic,
    r1_coeffs,
    wp,
    wp_prime,
    wp_reciprocal,
)
from nlsefam.elliptic import inversion_poles
from nlsefam.verify import d1

mpmath.mp.dps = 30


def wp_oracle(x, g2, g3):
    """p via Jacobi functions: sn form for disc > 0, cn form for disc < 0."""
    x, g2, g3 = mpmath.mpf(x), mpmath.mpf(g2), mpmath.mpf(g3)
    e = sorted((mpmath.re(r) for r in mpmath.polyroots([4, 0, -g2, -g3], extraprec=80)
                if abs(mpmath.im(r)) < mpmath.mpf(10) ** -20), reverse=True)
    if g2 ** 3 - 27 * g3 ** 2 > 0:
        e1, e2, e3 = e
        m = (e2 - e3) / (e1 - e3)
        sn = mpmath.ellipfun("sn", mpmath.sqrt(e1 - e3) * x, m=m)
        return float(e3 + (e1 - e3) / sn ** 2)
    e2 = e[0]
    H2 = mpmath.sqrt(3 * e2 ** 2 - g2 / 4)
    m = mpmath.mpf(1) / 2 - 3 * e2 / (4 * H2)
    cn = mpmath.ellipfun("cn", 2 * mpmath.sqrt(H2) * x, m=m)
    return float(e2 + H2 * (1 + cn) / (1 - cn))


def ode_defect(x, spec):
    p, dp = wp(x, spec), wp_prime(x, spec)
    return abs(dp * dp - (4 * p ** 3 - spec.g2 * p - spec.g3)), max(1.0, abs(p) ** 3)


# -- point values -----------------------------------------------------------------

def test_rational_values():
    spec = WpSpec(0.0, 0.0)
    assert spec.resolved() is Mode.DEGENERATE_RATIONAL
    assert wp(2.0, spec) == 0.25
    assert wp_prime(2.0, spec) == -0.25


def test_hyperbolic_g3_negative():
    spec = WpSpec(4 / 3, -8 / 27)
    assert spec.resolved() is Mode.DEGENERATE_HYPERBOLIC
    want = (1 + 3 / math.sinh(1.0) ** 2) / 3
    assert wp(1.0, spec) == pytest.approx(want, rel=1e-14)
    assert wp(1.0, spec) == pytest.approx(1.057395, abs=1e-6)
    dwant = -2 * math.cosh(1.0) / math.sinh(1.0) ** 3
    assert wp_prime(1.0, spec) == pytest.approx(dwant, rel=1e-13)
    assert wp_prime(1.0, spec) == pytest.approx(-1.901437, abs=1e-6)
    fd = (wp(1 + 1e-5, spec) - wp(1 - 1e-5, spec)) / 2e-5
    assert wp_prime(1.0, spec) == pytest.approx(fd, rel=1e-8)


def test_hyperbolic_g3_positive_is_trigonometric():
    # (g2, g3) = (1/12, 1/216): double root -1/12, real period 2 pi
    spec = WpSpec(1 / 12, 1 / 216)
    c, k = 1 / 12, 0.5
    assert wp(math.pi, spec) == pytest.approx(-c + 3 * c / math.sin(k * math.pi) ** 2, rel=1e-14)
    assert wp(math.pi, spec) == pytest.approx(1 / 6, rel=1e-14)
    d, s = ode_defect(math.pi, spec)
    assert d <= 1e-12 * s
    with pytest.raises(PoleProximity):
        wp(2 * math.pi, spec)


@pytest.mark.parametrize("g2, g3", [(4 / 3, -8 / 27), (1 / 12, 1 / 216), (2.0, 0.3), (1.0, -0.5),
                                    (-1.0, 0.4), (0.5, 0.0), (3.0, 0.9), (12.0, -7.9)])
def test_against_jacobi_oracle(g2, g3):
    spec = WpSpec(g2, g3)
    for x in (0.05, 0.3, 0.9, 1.7, 2.6):
        ref = wp_oracle(x, g2, g3)
        if abs(ref) > 1e8:
            continue
        assert wp(x, spec) == pytest.approx(ref, rel=1e-9, abs=1e-11)


# -- properties ------------------------------------------------------------------------

def test_defining_ode_seeded_all_modes():
    rng = np.random.default_rng(1000)
    checked = 0
    for i in range(1000):
        kind = i % 3
        if kind == 0:
            spec = WpSpec(0.0, 0.0)
        elif kind == 1:
            e = float(rng.uniform(0.05, 3))
            spec = WpSpec(12 * e * e, float(rng.choice([-1, 1])) * 8 * e ** 3)
        else:
            spec = WpSpec(float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)))
        x = float(rng.uniform(0.05, 4) * rng.choice([-1, 1]))
        p = wp(x, spec, nan_poles=True)
        if not math.isfinite(p) or abs(p) > 1e6:
            continue
        d, s = ode_defect(x, spec)
        assert d <= 1e-9 * s, (spec, x)
        checked += 1
    assert checked > 900


@given(st.floats(0.1, 5.0), st.floats(0.05, 2.0))
@settings(max_examples=200, deadline=None)
def test_mode_consistency(x, e):
    # a vanishing discriminant evaluated both in closed form and by the series
    g2, g3 = 12 * e * e, -8 * e ** 3
    closed = wp(x, WpSpec(g2, g3, Mode.DEGENERATE_HYPERBOLIC))
    series = wp(x, WpSpec(g2, g3, Mode.GENERAL_SERIES))
    assert series == pytest.approx(closed, rel=1e-9)


@given(st.floats(0.1, 3.0), st.floats(0.05, 2.0))
@settings(max_examples=100, deadline=None)
def test_mode_consistency_trig_branch(x, e):
    g2, g3 = 12 * e * e, 8 * e ** 3
    k = math.sqrt(3 * e)
    if abs(math.sin(k * x)) < 0.05:
        return
    closed = wp(x, WpSpec(g2, g3, Mode.DEGENERATE_HYPERBOLIC))
    series = wp(x, WpSpec(g2, g3, Mode.GENERAL_SERIES))
    assert series == pytest.approx(closed, rel=1e-9)


@given(st.floats(0.01, 6.0), st.sampled_from([(0.0, 0.0), (4 / 3, -8 / 27), (1 / 12, 1 / 216), (1.0, 0.7)]))
@settings(max_examples=200, deadline=None)
def test_evenness(x, g):
    spec = WpSpec(*g)
    p = wp(np.array([x, -x]), spec, nan_poles=True)
    dp = wp_prime(np.array([x, -x]), spec, nan_poles=True)
    if np.isfinite(p[0]):
        assert p[0] == p[1]
        assert dp[0] == -dp[1]


def test_branch_infima():
    x = np.linspace(0.01, 40, 400001)
    e = 0.5
    neg = wp(x, WpSpec(12 * e * e, -8 * e ** 3), nan_poles=True)
    assert np.nanmin(neg) >= e and np.nanmin(neg) == pytest.approx(e, abs=1e-9)
    # trigonometric branch: -e + 3e / sin^2 never drops below the simple root 2e
    pos = wp(x, WpSpec(12 * e * e, 8 * e ** 3), nan_poles=True)
    assert np.nanmin(pos) >= 2 * e - 1e-12
    assert np.nanmin(pos) == pytest.approx(2 * e, abs=1e-9)


def test_mode_validation():
    with pytest.raises(ValueError):
        WpSpec(1.0, 0.1, Mode.DEGENERATE_RATIONAL)
    with pytest.raises(ValueError):
        WpSpec(1.0, 0.1, Mode.DEGENERATE_HYPERBOLIC)


def test_pole_handling():
    spec = WpSpec(0.0, 0.0)
    with pytest.raises(PoleProximity):
        wp(0.0, spec)
    with pytest.raises(PoleProximity):
        wp_prime(1e-8, spec)
    assert math.isnan(wp(0.0, spec, nan_poles=True))
    assert wp_reciprocal(0.0, spec) == 0.0


# -- inversion ---------------------------------------------------------------------------

def test_invert_example1():
    y = invert_quartic(r1_coeffs(EX1), 0.0, 1.0)
    assert y == pytest.approx(math.sinh(1.0) ** 2 / math.cosh(2.0), rel=1e-13)
    assert y == pytest.approx(0.36710, abs=5e-6)


def test_invert_rational():
    y = invert_quartic(r1_coeffs(C2STAR), 0.0, 1.0)
    assert y == pytest.approx(8 / 25, abs=1e-14)
    z = np.linspace(-3, 3, 61)
    assert np.max(np.abs(invert_quartic(r1_coeffs(C2STAR), 0.0, z) - 8 * z ** 2 / (9 + 16 * z ** 2))) < 1e-14


@pytest.mark.parametrize("p", [EX1, EX2, EX3, EX4, C2STAR], ids=["ex1", "ex2", "ex3", "ex4", "c2star"])
def test_invert_satisfies_ode(p):
    q = r1_coeffs(p)
    y0 = p.h0
    z = np.linspace(0.1, 2.5, 241)
    poles = inversion_poles(q, y0, -3, 3)
    z = z[np.all(np.abs(z[:, None] - poles[None, :]) > 0.05, axis=1)] if poles.size else z

    def y(x):
        return invert_quartic(q, y0, x)

    res = d1(y, z, 1e-3) ** 2 - q(y(z))
    assert np.max(np.abs(res)) <= 1e-7 * q.scale()


def test_invert_limit_at_zero():
    for p in (EX1, EX3, C2STAR):
        assert invert_quartic(r1_coeffs(p), 0.0, 0.0) == 0.0
        assert abs(invert_quartic(r1_coeffs(p), 0.0, 1e-6)) < 1e-10
    assert invert_quartic(r1_coeffs(EX2), 1.0, 0.0) == 1.0


def test_invert_example2_closed_form():
    z = np.linspace(-0.8, 0.8, 33)
    want = np.cosh(z) ** 2 / np.cosh(2 * z)
    assert np.max(np.abs(invert_quartic(r1_coeffs(EX2), 1.0, z) - want)) < 1e-13


def test_invert_rejects_bad_start():
    q = r1_coeffs(EX1)
    with pytest.raises(ValueError):
        invert_quartic(q, 0.3, 1.0)
    with pytest.raises(ValueError):
        invert_quartic(q, 0.5, 1.0)  # double root: constant solution


def test_invert_denominator_vanishing():
    from scipy.optimize import brentq
    q = QuarticPoly(1.0, 0.0, 0.0, 0.0, -1.0)  # (y')^2 = y^4 - 1 escapes from y0 = 1
    spec = WpSpec.for_quartic(q)
    shift = q.deriv(1.0, 2) / 24
    x_pole = brentq(lambda x: 1 - wp_reciprocal(x, spec) * shift, 0.5, 3.0, xtol=1e-15)
    with pytest.raises(DenominatorVanishing):
        invert_quartic(q, 1.0, x_pole)
    assert invert_quartic(q, 1.0, 0.5 * x_pole) > 1


def test_inversion_poles_example2():
    # cosh^2 z / cosh 2z is bounded, so no poles; a quartic with an escaping branch has them
    assert inversion_poles(r1_coeffs(EX2), 1.0, -3, 3).size == 0
    q = QuarticPoly(1.0, 0.0, 0.0, 0.0, -1.0)  # y'^2 = y^4 - 1 from y0 = 1 blows up
    poles = inversion_poles(q, 1.0, -3, 3)
    assert poles.size == 2 and poles[0] == pytest.approx(-poles[1], abs=1e-6)
