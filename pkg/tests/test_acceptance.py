"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from isoprofile.geometry import cot_sum_identity, geodesic_residual, mean_curvature_along
from isoprofile.integrator import IntegratorOptions, integrate
from isoprofile.linear_analysis import (
    derivative_zero_in_unit_interval,
    lemma63_witness,
    taylor_derivatives,
)
from isoprofile.model import (
    CmcField,
    graph_residual_theta_of_xi,
    graph_residual_xi_of_theta,
    make_params,
)
from isoprofile.shooting import (
    ShootingOptions,
    Verdict,
    assemble_closed_profile,
    blowup_profile,
    find_delta_star,
    sweep,
)
from isoprofile.verify import REPRESENTATIVES, graph_segments, random_starts, symmetry_defects

ALL = [make_params(*t) for t in REPRESENTATIVES]


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def test_1_delta_star(report, p445):
    t0 = time.perf_counter()
    res = find_delta_star(p445, 1e-6)
    took = time.perf_counter() - t0
    gap = abs(res.delta_star - 0.341639)
    report(1, gap < 5e-3 and took < 30.0,
           f"delta*={res.delta_star:.9f} |delta*-0.341639|={gap:.2e} (<5e-3), {took:.2f}s (<30s)")


def test_2_closure(report, p445, profile445):
    ce = profile445.closure_error
    errs = []
    for tol in (1e-4, 1e-5, 1e-6, 1e-7, 1e-8):
        d = find_delta_star(p445, tol).delta_star
        errs.append(max(assemble_closed_profile(p445, d, closure_bound=1e-2).closure_error))
    monotone = all(b < a for a, b in zip(errs, errs[1:]))
    ok = ce[0] < 1e-3 and ce[1] < 1e-3 and ce[2] < 1e-2 and profile445.is_simple and monotone
    report(2, ok, f"closure {ce[0]:.1e}/{ce[1]:.1e}/{ce[2]:.1e}, simple={profile445.is_simple}, "
                  f"sweep " + " > ".join(f"{e:.1e}" for e in errs))


def test_3_constant_solution(report):
    worst = 0.0
    for p in ALL:
        tr = integrate(CmcField(p), (0.0, p.theta_star, 0.0), IntegratorOptions(horizon=50.0))
        y = tr.sample_many(np.linspace(0.0, 50.0, 5001))
        worst = max(worst, np.abs(y[:, 1] - p.theta_star).max(), np.abs(y[:, 2]).max())
    report(3, worst < 1e-6, f"max drift {worst:.2e} (<1e-6) over g in 1,2,3,4,6")


def test_4_symmetries(report):
    rng = np.random.default_rng(4)
    worst, count = 0.0, 0
    for p in ALL:
        for start in random_starts(rng, 20):
            worst = max(worst, *symmetry_defects(p, tuple(start)).values())
            count += 1
    report(4, worst < 1e-6, f"sup-norm defect {worst:.2e} (<1e-6) over {count} starts")


def test_5_curvature_identities(report):
    cot = 0.0
    for p in ALL:
        thetas = (np.arange(1000) + 0.5) * (math.pi / p.g) / 1000
        for phi1 in (np.arange(10) + 0.5) * (math.pi / p.g) / 10:
            for th in thetas:
                lhs, rhs = cot_sum_identity(th, p, phi1)
                cot = max(cot, abs(lhs - rhs) / max(1.0, abs(rhs)))
    rng = np.random.default_rng(5)
    mean = 0.0
    for p in ALL:
        for H in (0.0, 1.0):
            tr = integrate(CmcField(p, H), tuple(random_starts(rng, 1)[0]), IntegratorOptions(horizon=10.0))
            s = tr.sample_many(np.linspace(*tr.domain, 200))
            mean = max(mean, float(np.abs(mean_curvature_along(s, p, H) - H).max()))
    report(5, cot < 1e-10 and mean < 1e-6,
           f"cot identity {cot:.2e} (<1e-10, relative), trace - H {mean:.2e} (<1e-6)")


def test_6_cross_formulation(report, p445, profile445):
    rising, whole = graph_segments(profile445)
    graph = max(graph_residual_theta_of_xi(rising, p445), graph_residual_xi_of_theta(whole, p445))
    geo = geodesic_residual(profile445.phase, p445)
    ok = graph < 1e-5 and geo.equation < 1e-5 and geo.unit_speed < 1e-8
    report(6, ok, f"graph {graph:.2e} (<1e-5), geodesic {geo.equation:.2e} (<1e-5), "
                  f"unit speed {geo.unit_speed:.2e} (<1e-8)")


def test_7_blowup(report):
    p = make_params(2, 1, 1)
    profs = [blowup_profile(p, d) for d in (1e-2, 1e-3, 1e-4)]
    mid = profs[1]
    closed = np.sqrt(1 + mid.t**2) - 1
    theta_dev = float(np.abs(mid.Theta - closed).max())
    devs = [b.deviation for b in profs]
    ok = theta_dev < 1e-2 and devs[0] > devs[1] > devs[2]
    report(7, ok, f"delta=1e-3 |Theta - (sqrt(1+t^2)-1)| {theta_dev:.2e} (<1e-2), "
                  f"deviations " + " > ".join(f"{d:.2e}" for d in devs))


def test_8_linear_analysis(report):
    bad = []
    for n in range(5, 31):
        d = taylor_derivatives(n)
        targets = {2: -4 * (n - 1), 4: 8 * (n - 4) * (n - 1), 6: 160 * (n - 4) * (n - 1),
                   8: 320 * (n + 20) * (n - 4) * (n - 1),
                   10: 1280 * (n + 17) * (n + 20) * (n - 4) * (n - 1)}
        if any(d[k] != v for k, v in targets.items()):
            bad.append(f"taylor n={n}")
        z = derivative_zero_in_unit_interval(n)
        if z is None or not 0 < z < 1:
            bad.append(f"zero n={n}")
    c, w2 = lemma63_witness(19)
    if not (math.pi / 2 < c < math.pi and w2 > 0):
        bad.append("witness")
    report(8, not bad, f"n=5..30 taylor+zeros ok, n=19 c={c:.6f} w''={w2:.4g}" if not bad else str(bad))


def test_9_trichotomy(report, p445, star445):
    opts = ShootingOptions(IntegratorOptions(horizon=200.0))
    deltas = np.linspace(0.01, p445.theta_star - 0.01, 200)
    res = sweep(p445, deltas, opts, workers=4)
    ds = star445.delta_star
    undetermined = [r.delta for r in res if r.verdict is Verdict.UNDETERMINED]
    below = [r for r in res if r.delta < ds - 1e-3]
    above = [r for r in res if ds + 1e-3 < r.delta < p445.theta_star - 0.01]
    bad_below = [r.delta for r in below if r.verdict is not Verdict.TYPE1]
    bad_above = [r.delta for r in above if r.verdict is Verdict.TYPE1]
    ok = not (undetermined or bad_below or bad_above)
    report(9, ok, f"{len(res)} heights: undetermined={len(undetermined)}, "
                  f"{len(below)} below all Type1={not bad_below}, "
                  f"{len(above)} above none Type1={not bad_above}")
