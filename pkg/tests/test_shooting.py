import math
import warnings

import numpy as np
import pytest

from isoprofile import shooting
from isoprofile.errors import BracketNotFound, ClosureError, DomainError, NonMonotoneWarning
from isoprofile.integrator import EventKind, IntegratorOptions, integrate
from isoprofile.linear_analysis import blowup_reference
from isoprofile.model import CmcField, make_params, to_spherical
from isoprofile.shooting import (
    ShootingOptions,
    Verdict,
    assemble_closed_profile,
    blowup_compare,
    blowup_profile,
    classify,
    find_delta_star,
    sweep,
)


def test_small_height_is_type1(p445):
    res = classify(p445, 0.05)
    assert res.verdict is Verdict.TYPE1
    assert res.witness_time == pytest.approx(1.8666494722, abs=1e-9)
    assert res.witness_residuals["xi"] < 1e-12
    # no vartheta' = 0 before T
    assert not [e for e in res.events if e.kind is EventKind.ALPHA_MULTIPLE_OF_PI]


def test_near_theta_star_not_type1(p445):
    res = classify(p445, 0.7)
    assert res.verdict is Verdict.TYPE2
    assert res.witness_residuals["alpha"] < 1e-12
    assert not [e for e in res.events if e.kind is EventKind.XI_ZERO]


def test_boundary_case_reports_both_residuals(p445):
    res = classify(p445, 0.341639)
    assert res.verdict in (Verdict.TYPE1, Verdict.TYPE2)
    assert set(res.witness_residuals) == {"xi", "alpha"}
    # both quantities are small near the critical height
    assert res.witness_residuals["alpha"] < 1e-2


@pytest.mark.parametrize("delta", [0.0, -0.1, math.pi / 2, 2.0])
def test_classify_rejects_outside_band(p445, delta):
    with pytest.raises(DomainError):
        classify(p445, delta)


def test_classify_refuses_separatrix(p445):
    with pytest.raises(DomainError):
        classify(p445, p445.theta_star + 5e-11)
    classify(p445, p445.theta_star - 1e-9)  # allowed


def test_short_horizon_is_undetermined(p445):
    opts = ShootingOptions(IntegratorOptions(horizon=0.5))
    res = classify(p445, 0.1, opts)
    assert res.verdict is Verdict.UNDETERMINED
    assert res.evidence is not None and not res.evidence.accepted
    assert res.evidence.end_event.kind is EventKind.HORIZON_REACHED


def test_type3_evidence_accepts_asymptotic_signature(p445):
    # A synthetic flow relaxing to (1, pi/2, pi/2) exhibits the type-3 signature.
    def relax(t, y):
        return [-(y[0] - 1.0), 0.5 * math.pi - y[1], 0.5 * math.pi - y[2]]

    tr = integrate(relax, (0.0, 0.3, 0.0), IntegratorOptions(horizon=30.0))
    ev = shooting._type3_evidence(tr, p445, ShootingOptions(), tr.events[-1])
    assert ev.accepted
    assert ev.xi_limit == pytest.approx(1.0, abs=1e-6)
    tr = integrate(relax, (0.0, 0.3, 0.0), IntegratorOptions(horizon=3.0))
    assert not shooting._type3_evidence(tr, p445, ShootingOptions(), tr.events[-1]).accepted


def test_reflected_witness_is_type1(p445):
    res = classify(p445, 0.2)
    back = integrate(CmcField(p445), (0.0, 0.2, 0.0), IntegratorOptions(),
                     shooting._shooting_events(p445, ShootingOptions()), direction=-1)
    assert back.events[-1].kind is EventKind.XI_ZERO
    assert back.events[-1].time == pytest.approx(-res.witness_time, abs=1e-12)


def test_find_delta_star_445(p445, star445):
    assert star445.delta_star == pytest.approx(0.341639, abs=5e-3)
    lo, hi = star445.bracket
    assert hi - lo <= 1e-8
    assert star445.boundary_types[0].verdict is Verdict.TYPE1
    assert star445.boundary_types[1].verdict is not Verdict.TYPE1
    widths = [b - a for a, b in star445.history]
    assert all(w2 < w1 for w1, w2 in zip(widths, widths[1:]))
    assert star445.iterations == len(star445.history) - 1


def test_witness_time_continuous_across_bracket(star445):
    lo_t, hi_t = (b.witness_time for b in star445.boundary_types)
    width = star445.bracket[1] - star445.bracket[0]
    assert abs(lo_t - hi_t) < 10 * width


@pytest.mark.parametrize("g, m1, m2", [(2, 1, 1), (1, 1, 1), (2, 1, 2), (6, 2, 2), (4, 1, 6)])
def test_find_delta_star_other_families(g, m1, m2):
    p = make_params(g, m1, m2)
    coarse = find_delta_star(p, 1e-6)
    fine = find_delta_star(p, 1e-7)
    assert 0 < coarse.delta_star < p.theta_star
    assert coarse.delta_star == pytest.approx(fine.delta_star, abs=1e-6)


@pytest.mark.parametrize("tol", [0.0, 1e-13, -1.0, float("nan")])
def test_find_delta_star_tol(p445, tol):
    with pytest.raises(ValueError):
        find_delta_star(p445, tol)


def test_bracket_not_found(p445):
    opts = ShootingOptions(IntegratorOptions(horizon=0.01))
    with pytest.raises(BracketNotFound):
        find_delta_star(p445, 1e-4, opts)


def test_non_monotone_warning(p445, monkeypatch):
    real = shooting.classify

    def patched(params, delta, opts=None):
        res = real(params, delta, opts)
        if 0.1 < delta < 0.12:
            return shooting.DeltaType(delta, Verdict.TYPE2, res.witness_time, res.terminal_state,
                                      res.witness_residuals)
        return res

    monkeypatch.setattr(shooting, "classify", patched)
    with pytest.warns(NonMonotoneWarning):
        res = find_delta_star(p445, 1e-4, spot_checks=30)
    assert res.warnings


def test_closed_profile_shape(profile445, star445, p445):
    prof = profile445
    assert prof.phase[0].tolist() == [0.0, star445.delta_star, 0.0]
    assert prof.period == 2 * prof.half_period
    assert prof.alpha_mismatch < 1e-6
    assert all(c < 1e-6 for c in prof.closure_error)
    assert prof.is_simple
    assert prof.theta_max > p445.theta_star
    assert prof.phase[:, 1].min() == pytest.approx(star445.delta_star, abs=1e-12)
    # one lobe: xi changes sign exactly twice around the loop
    sign = np.sign(prof.phase[1:-1, 0])
    assert np.count_nonzero(sign[1:] != sign[:-1]) == 1


def test_closed_profile_reflection_exact(profile445):
    ph, t = profile445.phase, profile445.t
    n = len(t)
    mirror = ph[::-1]
    n = len(t)
    keep = np.arange(n) != n // 2  # the junction sample is the event root itself
    np.testing.assert_array_equal(ph[keep, 0], -mirror[keep, 0])
    np.testing.assert_array_equal(ph[:, 1], mirror[:, 1])
    np.testing.assert_allclose(ph[keep, 2], 2 * math.pi - mirror[keep, 2], rtol=0, atol=1e-14)
    assert abs(ph[n // 2, 2] - math.pi) <= profile445.alpha_mismatch + 1e-15
    np.testing.assert_allclose(t + t[::-1], 2 * profile445.half_period, rtol=0, atol=1e-15)
    assert n == 2001 and t[n // 2] == profile445.half_period


def test_closed_profile_spherical_columns(profile445, p445):
    for row, sph in zip(profile445.phase[::100], profile445.spherical[::100]):
        s = to_spherical(row, p445)
        assert (s.r, s.theta_orig) == tuple(sph)


@pytest.mark.parametrize("n", [4, 5, 100])
def test_closed_profile_sample_count(p445, star445, n):
    prof = assemble_closed_profile(p445, star445.delta_star, n_samples=n)
    assert len(prof.t) == n == len(prof.phase) == len(prof.spherical)
    assert prof.t[0] == 0.0 and prof.t[-1] == 2 * prof.half_period


@pytest.mark.parametrize("delta", [0.2, 0.6])
def test_closure_error_off_critical(p445, delta):
    with pytest.raises(ClosureError):
        assemble_closed_profile(p445, delta)


def test_closure_improves_with_tolerance(p445):
    errs = []
    for tol in (1e-4, 1e-6, 1e-8):
        d = find_delta_star(p445, tol).delta_star
        errs.append(max(assemble_closed_profile(p445, d, closure_bound=1e-2).closure_error))
    assert errs[0] > errs[1] > errs[2]


def test_blowup_reference_initial_values():
    for m1 in (1, 2, 3, 5):
        Th, Ps = blowup_reference(m1, np.array([0.0]))
        assert Th[0] == 0.0 and Ps[0] == 0.0


def test_blowup_closed_form_m1():
    t = np.linspace(0, 5, 101)
    Th, Ps = blowup_reference(1, t)
    np.testing.assert_allclose(Th, np.sqrt(1 + t * t) - 1, atol=1e-15)
    np.testing.assert_allclose(Ps, np.arctan(t), atol=1e-12)


def test_blowup_converges():
    p = make_params(2, 1, 1)
    devs = [blowup_compare(p, d) for d in (1e-2, 1e-3, 1e-4)]
    assert devs[1] < 1e-2
    assert devs[0] > devs[1] > devs[2]


def test_blowup_profile_445(p445):
    prof = blowup_profile(p445, 1e-3)
    assert prof.deviation < 1e-2
    assert prof.Theta[0] == 0.0 and prof.Psi[0] == 0.0


def test_blowup_height_limit(p445):
    with pytest.raises(DomainError):
        blowup_compare(p445, 0.1)


def test_sweep_parallel_matches_serial(p445):
    deltas = np.linspace(0.05, 0.7, 8)
    a = [(r.delta, r.verdict, r.witness_time) for r in sweep(p445, deltas)]
    b = [(r.delta, r.verdict, r.witness_time) for r in sweep(p445, deltas, workers=2)]
    assert a == b


def test_no_warnings_on_clean_search(p445):
    with warnings.catch_warnings():
        warnings.simplefilter("error", NonMonotoneWarning)
        find_delta_star(p445, 1e-5)
