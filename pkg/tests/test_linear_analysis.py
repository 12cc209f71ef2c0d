import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.special import hyp2f1

from isoprofile.errors import DomainError
from isoprofile.integrator import IntegratorOptions
from isoprofile.linear_analysis import (
    LinearParams,
    blowup_reference,
    blowup_time_of_height,
    derivative_zero_in_unit_interval,
    evenness_defect,
    legendre_solve,
    legendre_taylor,
    lemma63_witness,
    linearized_field,
    lower_bound_poly,
    solve_comparison,
    solve_linearized,
    comparison_field,
    taylor_derivatives,
)

NS = range(5, 31)


def test_linearized_field_domain():
    with pytest.raises(DomainError):
        linearized_field(0.0, 1.0, 0.0, LinearParams(4, 10))


@pytest.mark.parametrize("n", [5, 10, 19])
def test_evenness_about_equator(n):
    p = LinearParams(4, n)
    assert evenness_defect(p, s_max=1.0) < 1e-8
    # the solution grows towards the ends; relative evenness holds further out
    half = 0.5 * math.pi
    scale = np.abs(solve_linearized(p, half + 1.4).sample_many(np.linspace(half, half + 1.4, 50))[:, 0]).max()
    assert evenness_defect(p, s_max=1.4) / scale < 1e-8


@pytest.mark.parametrize("n", NS)
def test_taylor_closed_forms(n):
    d = taylor_derivatives(n)
    assert d[0] == 1 and all(d[k] == 0 for k in (1, 3, 5, 7, 9))
    assert d[2] == -4 * (n - 1)
    assert d[4] == 8 * (n - 4) * (n - 1)
    assert d[6] == 160 * (n - 4) * (n - 1)
    assert d[8] == 320 * (n + 20) * (n - 4) * (n - 1)
    assert d[10] == 1280 * (n + 17) * (n + 20) * (n - 4) * (n - 1)
    assert all(isinstance(c, Fraction) for c in legendre_taylor(n))


@pytest.mark.parametrize("n", NS)
def test_taylor_matches_hypergeometric(n):
    # the even solution is 2F1(a, b; 1/2; x^2) with a + b = n/2 and a b = -(n-1)
    a, b = np.roots([1.0, -0.5 * n, -(n - 1.0)])
    x = 0.15
    series = sum(float(c) * x**k for k, c in enumerate(legendre_taylor(n, 40)))
    assert hyp2f1(a, b, 0.5, x * x) == pytest.approx(series, rel=1e-10)


@pytest.mark.parametrize("n", NS)
def test_taylor_vs_integration(n):
    sol = legendre_solve(n, x_max=0.2, n_samples=41)
    # degree 10 is off by about the first omitted term, a_12 x^12
    a12 = float(legendre_taylor(n, 12)[12])
    assert np.all(np.abs(sol.phi - sol.taylor_poly(sol.x)) <= 1.2 * abs(a12) * sol.x**12 + 1e-10)
    long = sum(float(c) * sol.x**k for k, c in enumerate(legendre_taylor(n, 40)))
    np.testing.assert_allclose(sol.phi, long, atol=1e-10)


def test_legendre_against_scipy():
    n = 19
    sol = legendre_solve(n, x_max=0.9)
    ref = solve_ivp(lambda x, y: [y[1], ((n + 1) * x * y[1] - 4 * (n - 1) * y[0]) / (1 - x * x)],
                    (0, 0.9), [1.0, 0.0], method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)
    np.testing.assert_allclose(sol.phi, ref.sol(sol.x)[0], atol=1e-8)


@pytest.mark.parametrize("n", [5, 12, 19])
def test_substitution_x_cos_r(n):
    # w(r) = phi(cos r) solves the companion equation, integrated independently in r
    r0 = math.acos(0.8)
    comp = solve_comparison(n, r0)
    leg = legendre_solve(n, x_max=0.8)
    r = np.linspace(r0, 0.5 * math.pi, 30)
    w, wp = comp.sample_many(r).T
    phi, dphi = leg(np.cos(r))
    np.testing.assert_allclose(w, phi, atol=1e-8)
    np.testing.assert_allclose(wp, -np.sin(r) * dphi, atol=1e-8)


def test_comparison_field_domain():
    with pytest.raises(DomainError):
        comparison_field(math.pi, 1.0, 0.0, 5)


@pytest.mark.parametrize("n", [5, 19])
def test_linearization_divergence_form(n):
    # (sin^{n+1} w')' + 4(n-1) sin^{n-1} w expanded, divided by sin^{n-1}
    p = LinearParams(4, n)
    for r in np.linspace(0.1, 3.0, 40):
        for w, wp in ((1.0, 0.0), (-0.3, 2.0)):
            _, w2 = linearized_field(r, w, wp, p)
            sr, cr = math.sin(r), math.cos(r)
            div = sr**2 * w2 + (n + 1) * sr * cr * wp + 4 * (n - 1) * w
            assert abs(div) < 1e-12 * max(1.0, abs(w2))


def test_linearized_field_equator():
    p = LinearParams(6, 13)
    assert linearized_field(0.5 * math.pi, 2.0, 0.7, p)[1] == pytest.approx(-6 * 12 * 2.0)


@pytest.mark.parametrize("n", NS)
def test_derivative_zero(n):
    z = derivative_zero_in_unit_interval(n)
    assert z is not None and 0 < z < 1
    assert abs(legendre_solve(n, x_max=min(z + 1e-3, 0.999))(z)[1]) < 1e-7


@pytest.mark.parametrize("n", [5, 19, 30])
def test_derivative_zero_stable_under_tolerance(n):
    a = derivative_zero_in_unit_interval(n)
    b = derivative_zero_in_unit_interval(n, IntegratorOptions(rel_tol=1e-11, abs_tol=1e-13, event_tol=1e-12))
    assert a == pytest.approx(b, abs=1e-8)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_no_zero_needed_below_five(n):
    z = derivative_zero_in_unit_interval(n)
    assert z is None or 0 < z < 1


@pytest.mark.parametrize("n", [5, 10, 19, 30])
def test_lower_bound_poly(n):
    x = np.linspace(0.01, 0.99, 50)
    sol = legendre_solve(n)
    assert np.all(lower_bound_poly(n, x) <= sol(x)[1] + 1e-9)
    # it has a positive value in (0,1), forcing a sign change of phi'
    assert lower_bound_poly(n, x).max() > 0


def test_lemma63_witness():
    c, w2 = lemma63_witness(19)
    assert math.pi / 2 < c < math.pi and w2 > 0
    assert c == pytest.approx(1.96927, abs=1e-5)
    # consecutive zero: w' keeps its sign on (pi/2, c)
    wp = solve_linearized(LinearParams(4, 19), c).sample_many(np.linspace(0.5 * math.pi + 1e-6, c - 1e-6, 500))[:, 1]
    assert np.all(wp < 0)


@pytest.mark.parametrize("n", [5, 8, 30])
def test_lemma63_witness_other_n(n):
    c, w2 = lemma63_witness(n)
    assert math.pi / 2 < c < math.pi and w2 > 0


def test_blowup_time_round_trip():
    Theta = np.array([0.01, 0.5, 2.0, 7.0])
    for m1 in (1, 2, 4):
        t = blowup_time_of_height(m1, Theta)
        back, _ = blowup_reference(m1, t)
        np.testing.assert_allclose(back, Theta, rtol=1e-9)


def test_blowup_time_m1_closed_form():
    Theta = np.linspace(0, 4, 9)
    np.testing.assert_allclose(blowup_time_of_height(1, Theta), np.sqrt((1 + Theta) ** 2 - 1), atol=1e-12)


def test_blowup_reference_rejects_negative():
    with pytest.raises(DomainError):
        blowup_reference(2, np.array([-1.0]))
