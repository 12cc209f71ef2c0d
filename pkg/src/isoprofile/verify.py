"""Self-check suite behind ``isoprofile verify``.

Each check returns a :class:`CheckResult`; informational results report
context (for example a hypothesis that does not apply) without failing.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import cot_sum_identity, geodesic_residual, mean_curvature_along
from .integrator import EventKind, IntegratorOptions, integrate
from .linear_analysis import (
    derivative_zero_in_unit_interval,
    lemma63_witness,
    taylor_derivatives,
)
from .model import (
    CmcField,
    FoliationParams,
    initial_field,
    make_params,
    phase_to_spherical_rates,
    reflect_hat,
    reflect_tilde,
    shift_alpha,
    symmetry_hat,
    symmetry_shift,
    symmetry_tilde,
    to_spherical,
    graph_residual_theta_of_xi,
    graph_residual_xi_of_theta,
)
from .shooting import assemble_closed_profile, blowup_compare, find_delta_star

REPRESENTATIVES = ((1, 1, 1), (2, 1, 2), (3, 2, 2), (4, 4, 5), (6, 2, 2))


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str
    informational: bool = False


@dataclass
class Context:
    params: Optional[FoliationParams] = None
    n: Optional[int] = None
    seed: int = 0

    def param_list(self):
        if self.params is not None:
            return [self.params]
        return [make_params(*t) for t in REPRESENTATIVES]


def _worst(name, value, bound, what=""):
    return CheckResult(name, bool(value < bound), f"{what}max {value:.3e} (bound {bound:g})")


def check_constant_solution(ctx):
    worst = 0.0
    for p in ctx.param_list():
        tr = integrate(CmcField(p), (0.0, p.theta_star, 0.0), IntegratorOptions(horizon=50.0))
        y = tr.sample_many(np.linspace(0.0, 50.0, 2001))
        worst = max(worst, np.abs(y[:, 1] - p.theta_star).max(), np.abs(y[:, 2]).max())
    return _worst("constant-solution", worst, 1e-6)


def random_starts(rng, count, xi_span=2.0, margin=0.1):
    xi = rng.uniform(-xi_span, xi_span, count)
    th = rng.uniform(margin, 0.5 * math.pi - margin, count)
    al = rng.uniform(-math.pi, math.pi, count)
    return np.column_stack([xi, th, al])


def symmetry_defects(params, start, t_end=10.0, opts=None):
    """Sup-norm gaps between transformed trajectories and integrations of transformed data."""
    opts = opts or IntegratorOptions(horizon=t_end)
    fwd = integrate(CmcField(params), start, opts)
    bwd = integrate(CmcField(params), start, opts, direction=-1)
    ts = np.linspace(0.0, t_end, 401)
    out = {}
    pairs = [("hat", reflect_hat, symmetry_hat(bwd))]
    if params.m1 == params.m2:
        pairs.append(("tilde", reflect_tilde, symmetry_tilde(bwd)))
    for name, state_map, image in pairs:
        direct = integrate(CmcField(params), state_map(start), opts)
        out[name] = float(np.abs(direct.sample_many(ts) - image.sample_many(ts)).max())
    direct = integrate(CmcField(params), shift_alpha(start, 1), opts)
    out["shift"] = float(np.abs(direct.sample_many(ts) - symmetry_shift(fwd, 1).sample_many(ts)).max())
    return out


def check_symmetries(ctx, count=5):
    rng = np.random.default_rng(ctx.seed)
    worst = 0.0
    for p in ctx.param_list():
        for start in random_starts(rng, count):
            worst = max(worst, *symmetry_defects(p, tuple(start)).values())
    return _worst("symmetries", worst, 1e-6)


def check_cot_identity(ctx, n_theta=1000, n_phi=10):
    worst = 0.0
    for p in ctx.param_list():
        g = p.g
        thetas = (np.arange(n_theta) + 0.5) * (math.pi / g) / n_theta
        for phi1 in (np.arange(n_phi) + 0.5) * (math.pi / g) / n_phi:
            for th in thetas:
                lhs, rhs = cot_sum_identity(th, p, phi1)
                worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return _worst("cot-identity", worst, 1e-10, "relative ")


def check_mean_curvature(ctx):
    rng = np.random.default_rng(ctx.seed + 1)
    worst = 0.0
    for p in ctx.param_list():
        for H in (0.0, 1.0):
            start = tuple(random_starts(rng, 1)[0])
            tr = integrate(CmcField(p, H), start, IntegratorOptions(horizon=10.0))
            lo, hi = tr.domain
            s = tr.sample_many(np.linspace(lo, hi, 100))
            worst = max(worst, float(np.abs(mean_curvature_along(s, p, H) - H).max()))
    return _worst("mean-curvature", worst, 1e-6)


def check_reparametrization(ctx):
    rng = np.random.default_rng(ctx.seed + 2)
    worst = 0.0
    for p in ctx.param_list():
        tr = integrate(CmcField(p), tuple(random_starts(rng, 1)[0]), IntegratorOptions(horizon=5.0))
        for y in tr.sample_many(rng.uniform(0.0, tr.t_final, 100)):
            sph = to_spherical(y, p)
            via_polar = np.array(initial_field(sph, p)[:3])
            via_phase = np.array(phase_to_spherical_rates(y, p)[:3])
            worst = max(worst, float(np.abs(via_polar - via_phase).max()))
    return _worst("reparametrization", worst, 1e-8)


def closed_profile(params, tol=1e-8):
    star = find_delta_star(params, tol)
    return assemble_closed_profile(params, star.delta_star)


def graph_segments(profile, n=400, margin=0.02):
    """Phase samples of the half curve on which ``xi`` resp. ``vartheta`` is a graph variable."""
    half = profile.half_curve
    T = profile.half_period
    turns = [e.time for e in half.events_of(EventKind.XI_TURN)]
    t_turn = turns[0] if turns else T
    rising = half.sample_many(np.linspace(margin * t_turn, (1 - margin) * t_turn, n))
    whole = half.sample_many(np.linspace(margin * T, (1 - margin) * T, n))
    return rising, whole


def check_cross_formulation(ctx):
    p = ctx.params or make_params(4, 4, 5)
    prof = closed_profile(p)
    rising, whole = graph_segments(prof)
    graph = max(graph_residual_theta_of_xi(rising, p), graph_residual_xi_of_theta(whole, p))
    geo = geodesic_residual(prof.phase, p)
    ok = graph < 1e-5 and geo.equation < 1e-5 and geo.unit_speed < 1e-8
    return CheckResult(
        "cross-formulation", ok,
        f"graph {graph:.3e}, geodesic {geo.equation:.3e}, unit speed {geo.unit_speed:.3e}",
    )


def check_blowup(ctx):
    p = make_params(2, 1, 1)
    devs = [blowup_compare(p, d) for d in (1e-2, 1e-3, 1e-4)]
    ok = devs[1] < 1e-2 and devs[0] > devs[1] > devs[2]
    return CheckResult("blowup", ok, "deviations " + ", ".join(f"{d:.3e}" for d in devs))


def _taylor_targets(n):
    return {
        2: -4 * (n - 1),
        4: 8 * (n - 4) * (n - 1),
        6: 160 * (n - 4) * (n - 1),
        8: 320 * (n + 20) * (n - 4) * (n - 1),
        10: 1280 * (n + 17) * (n + 20) * (n - 4) * (n - 1),
    }


def check_legendre(ctx):
    ns = [ctx.n] if ctx.n is not None else list(range(5, 31))
    bad = []
    notes = []
    for n in ns:
        d = taylor_derivatives(n)
        if any(d[k] != v for k, v in _taylor_targets(n).items()) or any(d[k] for k in range(1, 10, 2)):
            bad.append(f"taylor n={n}")
        zero = derivative_zero_in_unit_interval(n)
        if n >= 5:
            if zero is None or not 0 < zero < 1:
                bad.append(f"no zero n={n}")
        else:
            notes.append(f"no zero required for n={n}" + ("" if zero is None else f" (found {zero:.6g})"))
    if bad:
        return CheckResult("legendre", False, "; ".join(bad))
    if notes and len(ns) == 1:
        return CheckResult("legendre", True, "; ".join(notes), informational=True)
    return CheckResult("legendre", True, f"taylor and zero checks for n in {ns[0]}..{ns[-1]}")


def check_linear_witness(ctx):
    n = ctx.n if ctx.n is not None else 19
    if n < 5:
        return CheckResult("linear-witness", True, f"not applicable for n={n}", informational=True)
    c, w2 = lemma63_witness(n)
    ok = math.pi / 2 < c < math.pi and w2 > 0
    return CheckResult("linear-witness", ok, f"c={c:.10f}, w''(c)={w2:.6g}")


CHECKS: dict = {
    "constant-solution": check_constant_solution,
    "symmetries": check_symmetries,
    "cot-identity": check_cot_identity,
    "mean-curvature": check_mean_curvature,
    "reparametrization": check_reparametrization,
    "cross-formulation": check_cross_formulation,
    "blowup": check_blowup,
    "legendre": check_legendre,
    "linear-witness": check_linear_witness,
}


def run_checks(names=None, ctx: Optional[Context] = None):
    ctx = ctx or Context()
    names = list(names) if names else list(CHECKS)
    results = []
    for name in names:
        fn: Callable = CHECKS[name]
        try:
            results.append(fn(ctx))
        except Exception as exc:  # a crashing check is a failing check
            results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
    return results


def format_table(results):
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        status = "INFO" if r.informational else ("PASS" if r.ok else "FAIL")
        lines.append(f"{status}  {r.name:<{width}}  {r.detail}")
    return "\n".join(lines)
