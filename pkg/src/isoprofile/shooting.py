"""Shooting from ``(0, delta, 0)``: trajectory types, the critical height and closed curves.

A height ``delta`` is

* **Type1** if ``xi`` returns to zero before ``vartheta'`` vanishes,
* **Type2** if ``vartheta'`` vanishes (``alpha`` hits a multiple of pi) before
  ``xi`` returns to zero,
* **Type3** if neither ever happens. Numerically this is a horizon-limited
  verdict backed by the asymptotic signature ``alpha, vartheta -> pi/2`` with
  ``xi`` converging.

``delta_star`` is the supremum of the initial interval of Type1 heights; the
trajectory from it closes up after reflection into a periodic profile curve.
"""
import enum
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _backend
from .errors import BracketNotFound, ClosureError, DomainError, NonMonotoneWarning
from .integrator import (
    Event,
    EventKind,
    IntegratorOptions,
    Trajectory,
    alpha_multiple_of_pi_event,
    integrate,
    theta_escape_event,
    theta_star_event,
    xi_turn_event,
    xi_zero_event,
)
from .linear_analysis import blowup_reference
from .model import CmcField, FoliationParams, PhaseState, UnitSpeedField, to_spherical

HALF_PI = 0.5 * math.pi
TWO_PI = 2.0 * math.pi


class Verdict(enum.Enum):
    TYPE1 = "Type1"
    TYPE2 = "Type2"
    TYPE3 = "Type3"
    UNDETERMINED = "Undetermined"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ShootingOptions:
    integrator: IntegratorOptions = IntegratorOptions()
    eps_asym: float = 1e-3
    theta_margin: float = 1e-9
    separatrix_gap: float = 1e-10


@dataclass(frozen=True)
class Type3Evidence:
    xi_limit: float
    xi_variation: float
    xi_rate: float
    theta_gap: float
    alpha_gap: float
    end_event: Optional[Event]
    accepted: bool


@dataclass(frozen=True)
class DeltaType:
    delta: float
    verdict: Verdict
    witness_time: Optional[float]
    terminal_state: PhaseState
    witness_residuals: dict
    evidence: Optional[Type3Evidence] = None
    events: tuple = ()

    @property
    def is_type1(self):
        return self.verdict is Verdict.TYPE1


def _dist_to_pi_multiple(alpha):
    return abs(alpha - math.pi * round(alpha / math.pi))


def _shooting_events(params, opts, terminal_alpha=True):
    return [
        xi_zero_event(terminal=True),
        alpha_multiple_of_pi_event(terminal=terminal_alpha),
        theta_star_event(params.theta_star),
        theta_escape_event(opts.theta_margin),
    ]


def _check_delta(params, delta, opts):
    if not 0.0 < delta < HALF_PI:
        raise DomainError(f"delta={delta!r} is outside (0, pi/2)")
    if abs(delta - params.theta_star) <= opts.separatrix_gap:
        raise DomainError(
            f"delta={delta!r} is within {opts.separatrix_gap:g} of the constant solution "
            f"height {params.theta_star!r}"
        )


def shoot(params: FoliationParams, delta: float, opts: Optional[ShootingOptions] = None) -> Trajectory:
    """Integrate from ``(0, delta, 0)`` with the classification events armed."""
    opts = opts or ShootingOptions()
    _check_delta(params, delta, opts)
    return integrate(CmcField(params), (0.0, delta, 0.0), opts.integrator, _shooting_events(params, opts))


def classify(params: FoliationParams, delta: float, opts: Optional[ShootingOptions] = None) -> DeltaType:
    """Type of the shooting trajectory from height ``delta`` (minimal case)."""
    opts = opts or ShootingOptions()
    traj = shoot(params, delta, opts)
    end = PhaseState(*traj.end)
    residuals = {"xi": abs(end.xi), "alpha": _dist_to_pi_multiple(end.alpha)}
    last = traj.events[-1] if traj.events else None
    kind = last.kind if last else None
    if kind is EventKind.XI_ZERO:
        return DeltaType(delta, Verdict.TYPE1, last.time, end, residuals, None, tuple(traj.events))
    if kind is EventKind.ALPHA_MULTIPLE_OF_PI:
        return DeltaType(delta, Verdict.TYPE2, last.time, end, residuals, None, tuple(traj.events))
    evidence = _type3_evidence(traj, params, opts, last)
    verdict = Verdict.TYPE3 if evidence.accepted else Verdict.UNDETERMINED
    return DeltaType(delta, verdict, None, end, residuals, evidence, tuple(traj.events))


def _type3_evidence(traj, params, opts, last):
    eps = opts.eps_asym
    t_end = traj.t_final
    tail = np.linspace(0.9 * t_end, t_end, 201)
    xs = traj.sample_many(tail)[:, 0]
    end = traj.end
    rate = math.sin(2 * end[1]) * math.cos(end[2])
    alpha_gap = abs(end[2] - HALF_PI - TWO_PI * round((end[2] - HALF_PI) / TWO_PI))
    theta_gap = HALF_PI - end[1]
    variation = float(xs.max() - xs.min())
    accepted = alpha_gap < eps and 0 <= theta_gap < eps and abs(rate) < eps and variation < eps
    return Type3Evidence(end[0], variation, rate, theta_gap, alpha_gap, last, accepted)


def _classify_star(args):
    return classify(*args)


def sweep(params: FoliationParams, deltas, opts: Optional[ShootingOptions] = None, workers=None):
    """Classify every height in ``deltas``; ``workers > 1`` fans out to processes."""
    opts = opts or ShootingOptions()
    jobs = [(params, float(d), opts) for d in deltas]
    if not workers or workers <= 1 or len(jobs) < 2:
        return [classify(*job) for job in jobs]
    with ProcessPoolExecutor(
        max_workers=workers, initializer=_backend.set_backend, initargs=(_backend.name_active,)
    ) as pool:
        return list(pool.map(_classify_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


# Critical height ------------------------------------------------------------


@dataclass(frozen=True)
class DeltaStarResult:
    delta_star: float
    bracket: tuple
    iterations: int
    boundary_types: tuple
    history: tuple = ()
    warnings: tuple = ()


def find_delta_star(params: FoliationParams, tol: float = 1e-6, opts: Optional[ShootingOptions] = None,
                    spot_checks: int = 4) -> DeltaStarResult:
    """Bisection for the supremum of the initial Type1 interval.

    The lower end comes from halving ``theta_star / 2`` until the height is
    Type1; the upper end sits just below ``theta_star``, where heights are
    never Type1. After bisecting, ``spot_checks`` heights evenly spaced below
    the final lower end are re-classified; any that is not Type1 raises a
    :class:`NonMonotoneWarning` and is listed in ``warnings``.
    """
    opts = opts or ShootingOptions()
    if not (tol >= 1e-12 and math.isfinite(tol)):
        raise ValueError(f"tol must be >= 1e-12, got {tol!r}")
    ts = params.theta_star

    lo = 0.5 * ts
    lo_type = classify(params, lo, opts)
    while not lo_type.is_type1:
        lo *= 0.5
        if lo < 1e-8:
            raise BracketNotFound(f"no Type1 height above 1e-8 for {params}")
        lo_type = classify(params, lo, opts)

    hi = ts - max(tol, 10 * opts.separatrix_gap)
    hi_type = classify(params, hi, opts)
    if hi_type.is_type1:
        raise BracketNotFound(f"height {hi!r} just below theta_star is Type1 for {params}")

    history = [(lo, hi)]
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        mid_type = classify(params, mid, opts)
        if mid_type.is_type1:
            lo, lo_type = mid, mid_type
        else:
            hi, hi_type = mid, mid_type
        iterations += 1
        history.append((lo, hi))

    notes = []
    for j in range(1, spot_checks + 1):
        d = lo * j / (spot_checks + 1)
        verdict = classify(params, d, opts).verdict
        if verdict is not Verdict.TYPE1:
            msg = f"height {d:.12g} below the bracket classified {verdict}"
            warnings.warn(msg, NonMonotoneWarning, stacklevel=2)
            notes.append(msg)
    return DeltaStarResult(
        0.5 * (lo + hi), (lo, hi), iterations, (lo_type, hi_type), tuple(history), tuple(notes)
    )


# Closed profile -------------------------------------------------------------


@dataclass
class ClosedProfile:
    params: FoliationParams
    delta_star: float
    half_curve: Trajectory
    half_period: float
    alpha_mismatch: float
    closure_error: tuple
    t: np.ndarray
    phase: np.ndarray
    spherical: np.ndarray
    crossings: int
    phi1: float = field(default=0.0)

    @property
    def period(self):
        return 2.0 * self.half_period

    @property
    def is_simple(self):
        return self.crossings == 0

    @property
    def theta_max(self):
        return float(self.phase[:, 1].max())

    def rows(self):
        """``(t, xi, theta_scaled, alpha, r, theta)`` per sample."""
        return np.column_stack([self.t, self.phase, self.spherical])


def assemble_closed_profile(params: FoliationParams, delta_star: float,
                            opts: Optional[ShootingOptions] = None, n_samples: int = 2001,
                            closure_bound: float = 1e-3, phi1: Optional[float] = None) -> ClosedProfile:
    """Half-curve from ``delta_star`` to the first return of ``xi`` to zero, closed by reflection.

    The second half is the hat-reflection of the first (continued by
    ``alpha -> 2 pi - alpha``), not a further integration. ``closure_error``
    is measured independently: the true flow is continued from the junction
    for another half period and compared with the starting point.
    """
    opts = opts or ShootingOptions()
    _check_delta(params, delta_star, opts)
    if n_samples < 3:
        raise ValueError("n_samples must be at least 3")
    events = [
        xi_zero_event(terminal=True, direction=-1),
        alpha_multiple_of_pi_event(terminal=False),
        xi_turn_event(),
        theta_star_event(params.theta_star),
        theta_escape_event(opts.theta_margin),
    ]
    half = integrate(CmcField(params), (0.0, delta_star, 0.0), opts.integrator, events)
    last = half.events[-1] if half.events else None
    if last is None or last.kind is not EventKind.XI_ZERO:
        raise ClosureError(f"xi never returned to zero from delta={delta_star!r}")
    T = last.time
    mismatch = abs(last.state[2] - math.pi)
    if mismatch > closure_bound:
        raise ClosureError(
            f"|alpha(T) - pi| = {mismatch:.3e} exceeds {closure_bound:g}; refine delta_star"
        )

    check = integrate(CmcField(params), half.end, opts.integrator.replace(horizon=T))
    xe, te, ae = check.end
    closure = (abs(xe), abs(te - delta_star), abs(ae - TWO_PI))

    n_first = (n_samples - 1) // 2 + 1
    t_first = 2.0 * T * np.arange(n_first) / (n_samples - 1)
    if n_samples % 2 == 1:
        t_first[-1] = T
    first = half.sample_many(t_first)
    mirror = np.arange(n_samples - n_first)[::-1]
    second = np.column_stack([-first[mirror, 0], first[mirror, 1], TWO_PI - first[mirror, 2]])
    t = np.concatenate([t_first, 2.0 * T - t_first[mirror]])
    phase = np.vstack([first, second])

    if phi1 is None:
        phi1 = math.pi / (2 * params.g)
    sph = np.array([to_spherical(p, params, phi1)[:2] for p in phase])
    crossings = _backend.kernels.polyline_crossings(
        np.ascontiguousarray(phase[:, 0]), np.ascontiguousarray(phase[:, 1]), True
    )
    return ClosedProfile(params, delta_star, half, T, mismatch, closure, t, phase, sph, int(crossings), phi1)


# Blow-up comparison ---------------------------------------------------------


@dataclass(frozen=True)
class BlowupComparison:
    t: np.ndarray
    Theta: np.ndarray
    Psi: np.ndarray
    Theta_ref: np.ndarray
    Psi_ref: np.ndarray

    @property
    def deviation(self):
        return float(max(np.abs(self.Theta - self.Theta_ref).max(), np.abs(self.Psi - self.Psi_ref).max()))


def blowup_profile(params: FoliationParams, delta: float, opts: Optional[ShootingOptions] = None,
                   t_max: float = 5.0, n_samples: int = 501) -> BlowupComparison:
    """Rescaled unit-speed trajectory from ``(0, delta, 0)`` next to the limiting solution.

    Rescaling: ``Theta(t) = (vartheta(delta t) - delta) / delta`` and
    ``Psi(t) = alpha(delta t)``.
    """
    opts = opts or ShootingOptions()
    if not 0.0 < delta <= 0.05:
        raise DomainError(f"blow-up comparison needs 0 < delta <= 0.05, got {delta!r}")
    base = opts.integrator
    iopts = base.replace(
        horizon=delta * t_max,
        max_step=min(base.max_step, 0.05 * delta),
        abs_tol=min(base.abs_tol, 1e-3 * delta * base.rel_tol),
        event_tol=min(base.event_tol, base.rel_tol),
    )
    traj = integrate(UnitSpeedField(params), (0.0, delta, 0.0), iopts)
    t = np.linspace(0.0, t_max, n_samples)
    states = traj.sample_many(np.minimum(delta * t, traj.t_final))
    Theta = (states[:, 1] - delta) / delta
    Psi = states[:, 2]
    Theta_ref, Psi_ref = blowup_reference(params.m1, t)
    return BlowupComparison(t, Theta, Psi, Theta_ref, Psi_ref)


def blowup_compare(params: FoliationParams, delta: float, opts: Optional[ShootingOptions] = None,
                   t_max: float = 5.0, n_samples: int = 501) -> float:
    """Max deviation of the rescaled trajectory from the limiting solution on ``[0, t_max]``."""
    return blowup_profile(params, delta, opts, t_max, n_samples).deviation
