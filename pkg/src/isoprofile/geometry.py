"""Principal curvatures of the swept hypersurface and curve-level identities.

Mean curvature here is the trace of the shape operator (the plain sum of
principal curvatures, with multiplicity), which is the ``H`` appearing in the
polar arc-length system.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError, PoleError
from .model import (
    CmcOptions,
    FoliationParams,
    SphericalState,
    cmc_field,
    cmc_second_derivative,
)

_POLE_GAP = 1e-12


@dataclass(frozen=True)
class CurvatureSpec:
    """Distinct curvature angles ``phi1 + j pi / g`` and their multiplicities."""

    params: FoliationParams
    phi1: Optional[float] = None

    def __post_init__(self):
        g = self.params.g
        if self.phi1 is None:
            object.__setattr__(self, "phi1", math.pi / (2 * g))
        if not 0.0 < self.phi1 < math.pi / g:
            raise DomainError(f"phi1={self.phi1!r} is outside (0, pi/{g})")

    @property
    def angles(self):
        g = self.params.g
        return tuple(self.phi1 + j * math.pi / g for j in range(g))

    @property
    def multiplicities(self):
        p = self.params
        if p.g % 2:
            return (p.m1,) * p.g
        return tuple(p.m2 if j % 2 == 0 else p.m1 for j in range(p.g))

    def phi(self, theta):
        return self.phi1 - math.pi / self.params.g + theta


@dataclass(frozen=True)
class CurvatureSet:
    kappa_tangential: tuple
    kappa_profile: float
    mean: float


def _offsets(theta, spec):
    phi = spec.phi(theta)
    gaps = []
    for a in spec.angles:
        d = a - phi
        if abs(math.sin(d)) < _POLE_GAP:
            raise PoleError(f"phi={phi!r} meets the focal angle {a!r}")
        gaps.append(d)
    return gaps


def principal_curvatures(state: SphericalState, alpha_prime: float, spec: CurvatureSpec,
                         params: Optional[FoliationParams] = None) -> CurvatureSet:
    """Curvatures of the hypersurface generated by the profile point ``state``.

    ``alpha_prime`` is the arc-length derivative of the tangent angle.
    """
    params = params or spec.params
    r, theta, al = float(state.r), float(state.theta_orig), float(state.alpha)
    if not 0.0 < r < math.pi:
        raise DomainError(f"r={r!r} is outside (0, pi)")
    gaps = _offsets(theta, spec)
    csc, cot_r = 1.0 / math.sin(r), math.cos(r) / math.sin(r)
    ca, sa = math.cos(al), math.sin(al)
    kappas = tuple(
        (csc * ca / math.tan(d) + cot_r * sa, mult) for d, mult in zip(gaps, spec.multiplicities)
    )
    k_profile = float(alpha_prime) + cot_r * sa
    mean = math.fsum(k * mult for k, mult in kappas) + k_profile
    return CurvatureSet(kappas, k_profile, mean)


def cot_sum_identity(theta, params: FoliationParams, phi1: Optional[float] = None):
    """Weighted cotangent sum over the focal angles against its closed form.

    Returns ``(lhs, rhs)`` with ``lhs = sum_j mult_j cot(phi_j - phi)`` and
    ``rhs = (g/2) [m2 tan(g theta / 2) - m1 cot(g theta / 2)]``.
    """
    g = params.g
    theta = float(theta)
    if not 0.0 < theta < math.pi / g:
        raise DomainError(f"theta={theta!r} is outside (0, pi/{g})")
    spec = CurvatureSpec(params, phi1)
    gaps = _offsets(theta, spec)
    half = 0.5 * g * theta
    if abs(math.sin(2 * half)) < _POLE_GAP:
        raise PoleError(f"theta={theta!r} is a pole of the closed form")
    lhs = math.fsum(mult / math.tan(d) for d, mult in zip(gaps, spec.multiplicities))
    rhs = 0.5 * g * (params.m2 * math.tan(half) - params.m1 / math.tan(half))
    return lhs, rhs


def mean_curvature_along(samples, params: FoliationParams, H=0.0, phi1=None) -> np.ndarray:
    """Trace of the curvatures at phase-space samples of an ``H`` trajectory.

    ``alpha'`` in arc length is taken from the phase field divided by the
    arc-length rate, so the result checks the curvature formula, the
    cotangent identity and the field against each other.
    """
    opts = CmcOptions(H)
    spec = CurvatureSpec(params, phi1)
    c = 2.0 / params.g
    out = []
    for p in np.atleast_2d(samples):
        xi, th, al = (float(v) for v in p)
        rate = c * math.sin(2 * th) / math.cosh(c * xi)
        a_s = cmc_field(p, params, opts).alpha / rate
        r = 2.0 * math.atan(math.exp(c * xi))
        out.append(principal_curvatures(SphericalState(r, c * th, al), a_s, spec, params).mean)
    return np.array(out)


# Geodesic form --------------------------------------------------------------


class GeodesicResidual(NamedTuple):
    equation: float
    unit_speed: float

    @property
    def worst(self):
        return max(self.equation, self.unit_speed)


def _samples_of(traj, n_samples):
    if hasattr(traj, "sample_many"):
        lo, hi = traj.domain
        return traj.sample_many(np.linspace(lo, hi, n_samples))
    return np.atleast_2d(np.asarray(traj, dtype=float))


def arc_length_jets(samples, params: FoliationParams, H=0.0):
    """``(r, theta, r_s, theta_s, r_ss, theta_ss)`` per sample from the phase field.

    Phase-time derivatives come from the field and ``J f``; the chain rule
    through ``r = 2 atan(exp(c xi))``, ``theta = c vartheta`` (``c = 2/g``) and
    ``ds/dt = c sin(2 vartheta) sech(c xi)`` converts them to arc length.
    """
    opts = CmcOptions(H)
    c = 2.0 / params.g
    rows = []
    for p in samples:
        xi, th = float(p[0]), float(p[1])
        d1 = np.asarray(cmc_field(p, params, opts))
        d2 = cmc_second_derivative(p, params, opts)
        sech, tnh = 1.0 / math.cosh(c * xi), math.tanh(c * xi)
        r = 2.0 * math.atan(math.exp(c * xi))
        r_t = c * sech * d1[0]
        r_tt = c * sech * d2[0] - c * c * sech * tnh * d1[0] ** 2
        q_t, q_tt = c * d1[1], c * d2[1]
        s2, c2 = math.sin(2 * th), math.cos(2 * th)
        v = c * s2 * sech
        v_t = c * sech * (2 * c2 * d1[1] - c * s2 * tnh * d1[0])
        r_s, q_s = r_t / v, q_t / v
        r_ss = (r_tt * v - r_t * v_t) / v**3
        q_ss = (q_tt * v - q_t * v_t) / v**3
        rows.append((r, c * th, r_s, q_s, r_ss, q_ss))
    return np.array(rows)


def geodesic_residual(traj, params: FoliationParams, n_samples: int = 1001) -> GeodesicResidual:
    """Residuals of the conformal-geodesic equation and of the unit-speed constraint.

    ``traj`` is a trajectory of the minimal phase system (or an array of
    phase samples). Returns the max absolute value over the samples of

    ``(r' theta'' - r'' theta') sin r + r'^2 theta' cos r + n theta' cos r
    - (g/2)(m1 cot(g theta/2) - m2 tan(g theta/2)) r' csc r``

    and of ``r'^2 + theta'^2 sin^2 r - 1``, primes being arc length.
    """
    jets = arc_length_jets(_samples_of(traj, n_samples), params)
    r, q, r1, q1, r2, q2 = jets.T
    g, n = params.g, float(params.n)
    half = 0.5 * g * q
    sr, cr = np.sin(r), np.cos(r)
    eq = ((r1 * q2 - r2 * q1) * sr + r1**2 * q1 * cr + n * q1 * cr
          - 0.5 * g * (params.m1 / np.tan(half) - params.m2 * np.tan(half)) * r1 / sr)
    speed = r1**2 + (q1 * sr) ** 2 - 1.0
    return GeodesicResidual(float(np.abs(eq).max()), float(np.abs(speed).max()))
