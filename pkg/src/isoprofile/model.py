"""Parameters, states and vector fields of the profile-curve dynamics.

Three equivalent descriptions of a profile curve are used throughout:

* the arc-length system in polar coordinates ``(r, theta, alpha)``
  (:func:`initial_field`, :class:`SphericalField`);
* the transformed phase system in ``(xi, vartheta, alpha)`` with
  ``xi = (g/2) ln tan(r/2)`` and ``vartheta = (g/2) theta``
  (:func:`cmc_field`, :class:`CmcField`), whose admissible region is the band
  ``D = R x (0, pi/2) x R``;
* the unit-speed phase system used for blow-up analysis
  (:class:`UnitSpeedField`).
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from . import _backend
from .errors import (
    DomainError,
    InvalidG,
    NonPositiveMultiplicity,
    NotAGraph,
    OddGMultiplicityMismatch,
    SymmetryUnavailable,
)

ALLOWED_G = (1, 2, 3, 4, 6)
HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class FoliationParams:
    """Isoparametric data ``(g, m1, m2)``.

    ``m2`` is the multiplicity of the largest principal curvature of the
    leaf, ``m1`` that of the second largest. ``n`` and ``m`` are exact
    rationals; they are converted to float only inside field evaluations.
    """

    g: int
    m1: int
    m2: int

    def __post_init__(self):
        for name in ("g", "m1", "m2"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise TypeError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.g not in ALLOWED_G:
            raise InvalidG(f"g must be one of 1,2,3,4,6 (got {self.g})")
        if self.m1 <= 0 or self.m2 <= 0:
            raise NonPositiveMultiplicity(
                f"multiplicities must be positive (got m1={self.m1}, m2={self.m2})"
            )
        if self.g % 2 == 1 and self.m1 != self.m2:
            raise OddGMultiplicityMismatch(
                f"for odd g all multiplicities are equal (got m1={self.m1}, m2={self.m2})"
            )

    @property
    def n(self) -> Fraction:
        return Fraction(self.g * (self.m1 + self.m2), 2) + 1

    @property
    def m(self) -> Fraction:
        return 2 * self.n / self.g

    @cached_property
    def theta_star(self) -> float:
        return math.atan(math.sqrt(self.m1 / self.m2))

    @property
    def kernel_constants(self):
        """``(m, m1, m2, 2/g, theta_star)`` as floats, in kernel argument order."""
        return (float(self.m), float(self.m1), float(self.m2), 2.0 / self.g, self.theta_star)

    def __str__(self):
        return f"(g={self.g}, m1={self.m1}, m2={self.m2})"


def make_params(g, m1, m2) -> FoliationParams:
    """Validate ``(g, m1, m2)`` and return the derived parameter set."""
    return FoliationParams(g, m1, m2)


class PhaseState(NamedTuple):
    xi: float
    theta: float
    alpha: float


class SphericalState(NamedTuple):
    """Polar data of a profile point; ``theta_orig`` is the unscaled angle."""

    r: float
    theta_orig: float
    alpha: float
    phi: Optional[float] = None


@dataclass(frozen=True)
class CmcOptions:
    H: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.H):
            raise ValueError(f"H must be finite, got {self.H!r}")


_MINIMAL = CmcOptions()


def _check_band(theta):
    if not 0.0 < theta < HALF_PI:
        raise DomainError(f"vartheta={theta!r} is outside the open band (0, pi/2)")


def cmc_field(state, params: FoliationParams, opts: CmcOptions = _MINIMAL) -> PhaseState:
    """Derivative of the transformed system at ``state``."""
    xi, th, al = (float(v) for v in state)
    _check_band(th)
    m, m1, m2, c, ts = params.kernel_constants
    return PhaseState(*_backend.kernels.cmc_rhs(xi, th, al, 1.0, m, m1, m2, c, opts.H, ts))


def cmc_jacobian(state, params: FoliationParams, opts: CmcOptions = _MINIMAL) -> np.ndarray:
    """Jacobian of :func:`cmc_field` with respect to ``(xi, vartheta, alpha)``."""
    xi, th, al = (float(v) for v in state)
    m, m1, m2, c, ts = params.kernel_constants
    H = opts.H
    s, c2 = math.sin(2 * th), math.cos(2 * th)
    sa, ca = math.sin(al), math.cos(al)
    tnh = math.tanh(c * xi)
    sech = 0.0 if abs(c * xi) > 700 else 1.0 / math.cosh(c * xi)
    restoring = -2.0 * (m1 + m2) * math.sin(th + ts) * math.sin(th - ts)
    return np.array(
        [
            [0.0, 2 * c2 * ca, -s * sa],
            [0.0, 2 * c2 * sa, s * ca],
            [
                m * s * c * sech**2 * sa - c * c * H * s * sech * tnh,
                2 * m * c2 * tnh * sa - 2 * (m1 + m2) * s * ca + 2 * c * H * c2 * sech,
                m * s * tnh * ca - restoring * sa,
            ],
        ]
    )


def cmc_second_derivative(state, params, opts: CmcOptions = _MINIMAL) -> np.ndarray:
    """Second time derivative along the flow, ``J(y) f(y)``."""
    return cmc_jacobian(state, params, opts) @ np.asarray(cmc_field(state, params, opts))


def initial_field(state: SphericalState, params: FoliationParams, opts: CmcOptions = _MINIMAL):
    """Arc-length system in ``(r, theta, alpha)``; returns the derivative triple."""
    r, theta, al = float(state.r), float(state.theta_orig), float(state.alpha)
    g = params.g
    if not 0.0 < r < math.pi:
        raise DomainError(f"r={r!r} is outside (0, pi)")
    if not 0.0 < theta < math.pi / g:
        raise DomainError(f"theta={theta!r} is outside (0, pi/{g})")
    n = float(params.n)
    half = 0.5 * g * theta
    sr = math.sin(r)
    dr = math.cos(al)
    dtheta = math.sin(al) / sr
    dal = (
        -n * math.cos(r) / sr * math.sin(al)
        + 0.5 * g * (params.m1 / math.tan(half) - params.m2 * math.tan(half)) / sr * math.cos(al)
        + opts.H
    )
    return SphericalState(dr, dtheta, dal)


def to_phase(s: SphericalState, params: FoliationParams) -> PhaseState:
    r = float(s.r)
    if not 0.0 < r < math.pi:
        raise DomainError(f"r={r!r} is outside (0, pi)")
    g = params.g
    return PhaseState(0.5 * g * math.log(math.tan(0.5 * r)), 0.5 * g * s.theta_orig, s.alpha)


def default_phi1(params: FoliationParams) -> float:
    return math.pi / (2 * params.g)


def to_spherical(p, params: FoliationParams, phi1: Optional[float] = None) -> SphericalState:
    """Inverse of :func:`to_phase`; ``phi1`` places the curve in the foliation angle."""
    xi, th, al = (float(v) for v in p)
    g = params.g
    if phi1 is None:
        phi1 = default_phi1(params)
    r = 2.0 * math.atan(math.exp(2.0 * xi / g))
    theta = 2.0 * th / g
    return SphericalState(r, theta, al, phi1 - math.pi / g + theta)


def arc_length_rate(p, params: FoliationParams) -> float:
    """``ds/dt``: arc length of the polar system per unit time of the phase system.

    Equals ``(2/g) sin(2 vartheta) sin r`` with ``sin r = sech(2 xi / g)``.
    """
    xi, th = float(p[0]), float(p[1])
    c = 2.0 / params.g
    sech = 0.0 if abs(c * xi) > 700 else 1.0 / math.cosh(c * xi)
    return c * math.sin(2 * th) * sech


def phase_to_spherical_rates(p, params, opts: CmcOptions = _MINIMAL) -> SphericalState:
    """Arc-length derivatives ``(r_s, theta_s, alpha_s)`` computed from the phase field."""
    d = cmc_field(p, params, opts)
    rate = arc_length_rate(p, params)
    c = 2.0 / params.g
    sin_r = 1.0 / math.cosh(c * float(p[0]))
    return SphericalState(c * sin_r * d.xi / rate, c * d.theta / rate, d.alpha / rate)


# Integrable fields ----------------------------------------------------------


class CmcField:
    """The transformed system as an integrable field.

    Exposes ``dopri_step`` so the integrator can run the compiled kernel.
    ``sign=-1`` gives the time-reversed field.
    """

    dim = 3

    def __init__(self, params: FoliationParams, H=0.0, sign=1.0):
        self.params = params
        self.H = float(H)
        self.sign = float(sign)
        m, m1, m2, c, ts = params.kernel_constants
        self._args = (self.sign, m, m1, m2, c, self.H, ts)

    def __call__(self, t, y):
        return np.array(_backend.kernels.cmc_rhs(float(y[0]), float(y[1]), float(y[2]), *self._args))

    @property
    def kernel_args(self):
        """``(sign, m, m1, m2, c, H, ts)`` in kernel argument order."""
        return self._args

    def rhs_into(self, y, out):
        _backend.kernels.cmc_rhs_into(y, *self._args, out)

    def dopri_step(self, y, f0, h, rtol, atol, K, y_new):
        return _backend.kernels.cmc_dopri_step(y, f0, h, *self._args, rtol, atol, K, y_new)

    def reversed(self):
        return CmcField(self.params, self.H, -self.sign)

    @property
    def cmc(self):
        return CmcOptions(self.H)


class SphericalField:
    """Arc-length system in ``(r, theta, alpha)``."""

    dim = 3

    def __init__(self, params: FoliationParams, H=0.0, sign=1.0):
        self.params = params
        self.H = float(H)
        self.sign = float(sign)
        self._opts = CmcOptions(self.H)

    def __call__(self, t, y):
        d = initial_field(SphericalState(y[0], y[1], y[2]), self.params, self._opts)
        return self.sign * np.array(d[:3])

    def reversed(self):
        return SphericalField(self.params, self.H, -self.sign)


class UnitSpeedField:
    """Unit-speed minimal system in ``(xi, vartheta, alpha)``.

    Same trajectories as :class:`CmcField` at ``H = 0``, traversed with
    ``|(xi', vartheta')| = 1``.
    """

    dim = 3

    def __init__(self, params: FoliationParams, sign=1.0):
        self.params = params
        self.sign = float(sign)

    def __call__(self, t, y):
        xi, th, al = float(y[0]), float(y[1]), float(y[2])
        p = self.params
        m, c = float(p.m), 2.0 / p.g
        sa, ca = math.sin(al), math.cos(al)
        dal = m * math.tanh(c * xi) * sa + (p.m1 / math.tan(th) - p.m2 * math.tan(th)) * ca
        return self.sign * np.array([ca, sa, dal])

    def reversed(self):
        return UnitSpeedField(self.params, -self.sign)


# Symmetries -----------------------------------------------------------------


def reflect_hat(p) -> PhaseState:
    return PhaseState(-p[0], p[1], -p[2])


def reflect_tilde(p) -> PhaseState:
    return PhaseState(p[0], HALF_PI - p[1], math.pi - p[2])


def shift_alpha(p, k: int) -> PhaseState:
    return PhaseState(p[0], p[1], p[2] + 2 * k * math.pi)


class TrajectoryMap:
    """Image of a trajectory under one of the symmetries of the phase system.

    ``time_reversing`` maps read the source at ``-t``; the image domain is
    therefore the mirrored source domain.
    """

    def __init__(self, source, state_map, time_reversing: bool, name: str):
        self.source = source
        self.state_map = state_map
        self.time_reversing = time_reversing
        self.name = name

    @property
    def domain(self):
        lo, hi = self.source.domain
        return (-hi, -lo) if self.time_reversing else (lo, hi)

    def sample(self, t) -> PhaseState:
        return self.state_map(self.source.sample(-t if self.time_reversing else t))

    def sample_many(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        raw = self.source.sample_many(-ts if self.time_reversing else ts)
        return np.array([self.state_map(row) for row in raw])

    __call__ = sample


def symmetry_hat(traj) -> TrajectoryMap:
    """``t -> (-xi(-t), vartheta(-t), -alpha(-t))``."""
    return TrajectoryMap(traj, reflect_hat, True, "hat")


def symmetry_tilde(traj) -> TrajectoryMap:
    """``t -> (xi(-t), pi/2 - vartheta(-t), pi - alpha(-t))``; requires ``m1 == m2``."""
    params = getattr(traj, "params", None)
    if params is None or params.m1 != params.m2:
        raise SymmetryUnavailable("the tilde symmetry needs m1 == m2")
    return TrajectoryMap(traj, reflect_tilde, True, "tilde")


def symmetry_shift(traj, k: int) -> TrajectoryMap:
    """``t -> (xi(t), vartheta(t), alpha(t) + 2 k pi)``."""
    return TrajectoryMap(traj, lambda p: shift_alpha(p, k), False, f"shift{k:+d}")


# Graph forms ----------------------------------------------------------------


def _graph_derivatives(samples, params):
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    first = np.array([cmc_field(p, params) for p in samples])
    second = np.array([cmc_second_derivative(p, params) for p in samples])
    return samples, first, second


def _strict_sign(values):
    return bool(np.all(values > 0) or np.all(values < 0))


def graph_residual_theta_of_xi(samples, params: FoliationParams) -> float:
    """Max residual of the second-order ODE for ``vartheta`` as a graph over ``xi``.

    Derivatives along the curve come from the phase field and its first
    variation at each sample, not from differencing the samples.
    """
    y, d1, d2 = _graph_derivatives(samples, params)
    if not _strict_sign(d1[:, 0]):
        raise NotAGraph("xi is not strictly monotone on the segment")
    m, m1, m2, c, _ = params.kernel_constants
    p = d1[:, 1] / d1[:, 0]
    pp = (d2[:, 1] * d1[:, 0] - d1[:, 1] * d2[:, 0]) / d1[:, 0] ** 3
    th = y[:, 1]
    rhs = (1 + p**2) * (m * p * np.tanh(c * y[:, 0]) + m1 / np.tan(th) - m2 * np.tan(th))
    return float(np.max(np.abs(pp - rhs)))


def graph_residual_xi_of_theta(samples, params: FoliationParams) -> float:
    """Max residual of the second-order ODE for ``xi`` as a graph over ``vartheta``."""
    y, d1, d2 = _graph_derivatives(samples, params)
    if not _strict_sign(d1[:, 1]):
        raise NotAGraph("vartheta is not strictly monotone on the segment")
    m, m1, m2, c, _ = params.kernel_constants
    q = d1[:, 0] / d1[:, 1]
    qq = (d2[:, 0] * d1[:, 1] - d1[:, 0] * d2[:, 1]) / d1[:, 1] ** 3
    th = y[:, 1]
    rhs = -(1 + q**2) * (m * np.tanh(c * y[:, 0]) + (m1 / np.tan(th) - m2 * np.tan(th)) * q)
    return float(np.max(np.abs(qq - rhs)))
