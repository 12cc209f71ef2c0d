"""Linearization at the constant solution and the limiting small-height profile.

The linearized equation in ``r`` is

    sin^2 r w'' + (n+1) cos r sin r w' + g (n-1) w = 0,

and for ``g = 4`` the substitution ``x = cos r`` turns it into the
Legendre-type equation ``(1-x^2) w'' - (n+1) x w' + 4(n-1) w = 0``.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import fixed_quad
from scipy.interpolate import CubicSpline

from .errors import DomainError, WitnessNotFound
from .integrator import EventKind, EventSpec, IntegratorOptions, integrate

UNIT_EDGE = 1.0 - 1e-6
_OPTS = IntegratorOptions(rel_tol=1e-12, abs_tol=1e-14, max_step=0.01, event_tol=1e-13)


class LinearParams(NamedTuple):
    g: int
    n: int


def _gn(params):
    return int(params.g), int(params.n)


def linearized_field(r, w, w_prime, params):
    """``(w', w'')`` for the linearized equation at angle ``r``."""
    if not 0.0 < r < math.pi:
        raise DomainError(f"r={r!r} is outside (0, pi)")
    g, n = _gn(params)
    sr, cr = math.sin(r), math.cos(r)
    return w_prime, -((n + 1) * cr * sr * w_prime + g * (n - 1) * w) / (sr * sr)


def _radial_rhs(params):
    def rhs(r, y):
        return linearized_field(r, y[0], y[1], params)

    return rhs


def _prime_zero(terminal=True):
    return EventSpec(EventKind.CUSTOM, lambda t, y: y[1], terminal, 0, "w'=0")


def solve_linearized(params, r_end, opts=None):
    """Solution with ``w(pi/2) = 1, w'(pi/2) = 0`` carried from the equator to ``r_end``."""
    opts = opts or _OPTS
    half = 0.5 * math.pi
    direction = 1 if r_end > half else -1
    return integrate(
        _radial_rhs(params), (1.0, 0.0), opts.replace(horizon=abs(r_end - half)),
        t0=half, direction=direction,
    )


def comparison_field(r, w, w_prime, n):
    """``(w', w'')`` for ``(sin^n r w')' + 4(n-1) sin^n r w = 0``.

    This is the companion of the ``g = 4`` linearization that ``x = cos r``
    carries to the Legendre-type equation.
    """
    if not 0.0 < r < math.pi:
        raise DomainError(f"r={r!r} is outside (0, pi)")
    return w_prime, -n * math.cos(r) / math.sin(r) * w_prime - 4 * (n - 1) * w


def solve_comparison(n, r_end, opts=None):
    """Companion solution with ``w(pi/2) = 1, w'(pi/2) = 0`` carried to ``r_end``."""
    n = int(n)
    half = 0.5 * math.pi
    return integrate(
        lambda r, y: comparison_field(r, y[0], y[1], n), (1.0, 0.0),
        (opts or _OPTS).replace(horizon=abs(r_end - half)), t0=half,
        direction=1 if r_end > half else -1,
    )


def evenness_defect(params, s_max=1.0, n_points=201):
    """``max |w(pi/2 + s) - w(pi/2 - s)|`` over ``s`` in ``[0, s_max]``."""
    half = 0.5 * math.pi
    up = solve_linearized(params, half + s_max)
    down = solve_linearized(params, half - s_max)
    s = np.linspace(0.0, s_max, n_points)
    return float(np.abs(up.sample_many(half + s)[:, 0] - down.sample_many(half - s)[:, 0]).max())


# Legendre-type equation -----------------------------------------------------


def legendre_taylor(n, order=10):
    """Exact Taylor coefficients ``a_0..a_order`` of the even solution at ``x = 0``.

    From the equation, ``a_{k+2} = [k(k+n) - 4(n-1)] a_k / ((k+1)(k+2))``
    with ``a_0 = 1`` and ``a_1 = 0``.
    """
    a = [Fraction(0)] * (order + 1)
    a[0] = Fraction(1)
    for k in range(order - 1):
        a[k + 2] = Fraction(k * (k + n) - 4 * (n - 1), (k + 1) * (k + 2)) * a[k]
    return tuple(a)


def taylor_derivatives(n, order=10):
    """``phi^{(k)}(0) = k! a_k`` as exact rationals."""
    return tuple(math.factorial(k) * c for k, c in enumerate(legendre_taylor(n, order)))


def _legendre_rhs(n):
    def rhs(x, y):
        return y[1], ((n + 1) * x * y[1] - 4 * (n - 1) * y[0]) / (1.0 - x * x)

    return rhs


@dataclass(frozen=True)
class LegendreSolution:
    n: int
    x: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    taylor: tuple
    trajectory: object

    def __call__(self, x):
        """``(phi, phi')`` at ``x`` from the dense output."""
        return self.trajectory.sample_many(np.atleast_1d(x)).T

    def taylor_poly(self, x):
        x = np.asarray(x, dtype=float)
        return sum(float(c) * x**k for k, c in enumerate(self.taylor))


def legendre_solve(n, x_max=UNIT_EDGE, n_samples=1001, opts=None):
    """Even solution of ``(1-x^2) w'' - (n+1) x w' + 4(n-1) w = 0`` on ``[0, x_max]``."""
    n = int(n)
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if not 0.0 < x_max <= UNIT_EDGE:
        raise DomainError(f"x_max must lie in (0, {UNIT_EDGE}], got {x_max!r}")
    opts = (opts or _OPTS).replace(horizon=x_max)
    traj = integrate(_legendre_rhs(n), (1.0, 0.0), opts)
    x = np.linspace(0.0, x_max, n_samples)
    phi, dphi = traj.sample_many(x).T
    return LegendreSolution(n, x, phi, dphi, legendre_taylor(n), traj)


def derivative_zero_in_unit_interval(n, opts=None) -> Optional[float]:
    """Smallest ``x`` in ``(0, 1)`` with ``phi'(x) = 0``, or ``None`` before ``1 - 1e-6``."""
    n = int(n)
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    traj = integrate(_legendre_rhs(n), (1.0, 0.0), (opts or _OPTS).replace(horizon=UNIT_EDGE),
                     [_prime_zero()])
    hits = traj.events_of(EventKind.CUSTOM)
    return hits[0].time if hits else None


def lower_bound_poly(n, x):
    """Polynomial minorant of ``phi'`` on ``(0, 1)`` for ``n >= 5``."""
    x = np.asarray(x, dtype=float)
    return 4 * (n - 1) * x * (-1 + (n - 4) * x**2 / 3 + (n - 4) * x**4 / 3
                              + (n + 20) * (n - 4) * x**6 / 63)


class Witness(NamedTuple):
    c: float
    w_second: float


def lemma63_witness(n, g=4, opts=None) -> Witness:
    """First zero ``c`` of ``w'`` in ``(pi/2, pi)`` and ``w''(c)``, which must be positive."""
    params = LinearParams(g, int(n))
    half = 0.5 * math.pi
    opts = (opts or _OPTS).replace(horizon=half - 1e-6)
    traj = integrate(_radial_rhs(params), (1.0, 0.0), opts, [_prime_zero()], t0=half)
    hits = traj.events_of(EventKind.CUSTOM)
    if not hits:
        raise WitnessNotFound(f"w' keeps its sign on (pi/2, pi - 1e-6) for n={n}, g={g}")
    c = hits[0].time
    w, wp = hits[0].state
    w2 = linearized_field(c, w, 0.0, params)[1]
    if not w2 > 0:
        raise WitnessNotFound(f"w''(c) = {w2!r} is not positive at c={c!r} for n={n}, g={g}")
    return Witness(c, w2)


# Limiting profile of small heights ------------------------------------------


def _blowup_integrand_u(u, m1):
    # t(Theta) with Theta = u^2; finite at u = 0 where it tends to 2 / sqrt(2 m1).
    u = np.asarray(u, dtype=float)
    lg = m1 * np.log1p(u * u)
    den = np.sqrt(np.expm1(2.0 * lg))
    with np.errstate(invalid="ignore", divide="ignore"):
        val = 2.0 * u * np.exp(lg) / den
    return np.where(u == 0.0, 2.0 / math.sqrt(2.0 * m1), val)


def blowup_time_of_height(m1, Theta):
    """``t = int_0^Theta (1+x)^m1 / sqrt((1+x)^(2 m1) - 1) dx`` by Gauss quadrature in ``u = sqrt(x)``."""
    Theta = np.atleast_1d(np.asarray(Theta, dtype=float))
    out = np.empty_like(Theta)
    for i, th in enumerate(Theta):
        u = math.sqrt(th)
        edges = np.linspace(0.0, u, 9)
        out[i] = sum(fixed_quad(_blowup_integrand_u, a, b, args=(m1,), n=30)[0]
                     for a, b in zip(edges[:-1], edges[1:]))
    return out


def blowup_reference(m1, t):
    """Limiting rescaled height ``Theta(t)`` and angle ``Psi(t)`` for ``t >= 0``.

    ``Theta`` inverts the integral in :func:`blowup_time_of_height`;
    ``Psi = arcsin Theta'`` with ``Theta' = sqrt(1 - (1+Theta)^(-2 m1))``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("blow-up time must be non-negative")
    m1 = int(m1)
    if m1 == 1:
        Theta = np.sqrt(1.0 + t * t) - 1.0
    else:
        t_max = float(t.max()) if t.size else 0.0
        u_grid = np.linspace(0.0, math.sqrt(t_max + 2.0), 2049)
        pieces = [fixed_quad(_blowup_integrand_u, a, b, args=(m1,), n=20)[0]
                  for a, b in zip(u_grid[:-1], u_grid[1:])]
        t_grid = np.concatenate([[0.0], np.cumsum(pieces)])
        u = CubicSpline(t_grid, u_grid)(t)
        # One Newton step on t(u) = t sharpens the spline inverse.
        idx = np.clip(np.searchsorted(u_grid, u, side="right") - 1, 0, len(u_grid) - 2)
        t_at = t_grid[idx] + np.array([
            fixed_quad(_blowup_integrand_u, u_grid[j], uu, args=(m1,), n=20)[0] for j, uu in zip(idx, u)
        ])
        u = u - (t_at - t) / _blowup_integrand_u(u, m1)
        Theta = u * u
    slope = np.sqrt(-np.expm1(-2.0 * m1 * np.log1p(Theta)))
    Psi = np.arcsin(np.clip(slope, -1.0, 1.0))
    return Theta, Psi
