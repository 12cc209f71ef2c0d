"""Adaptive Dormand-Prince 5(4) integration with dense output and events.

Fields are callables ``f(t, y) -> ndarray``. A field that also provides
``dopri_step`` and ``rhs_into`` (see :class:`isoprofile.model.CmcField`) is
stepped by the compiled kernel; anything else goes through the NumPy step
below. Both use the same tableau, so results agree to rounding.
"""
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from . import _backend
from .errors import EventNotConverged, IsoprofileError, OutOfRange, StepSizeUnderflow

# Butcher tableau (Dormand & Prince 1980) and the order-4 continuous extension.
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = np.array(
    [
        [0, 0, 0, 0, 0],
        [1 / 5, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    ]
)
B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)
ORDER = 5


class StepBudgetExhausted(IsoprofileError):
    pass


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.05
    horizon: float = 200.0
    event_tol: float = 1e-12
    min_step: float = 1e-14
    max_steps: int = 2_000_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "horizon", "event_tol", "min_step"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if self.event_tol > self.rel_tol:
            raise ValueError("event_tol must not exceed rel_tol")

    def replace(self, **changes):
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return IntegratorOptions(**values)


class EventKind(enum.Enum):
    XI_ZERO = "XiZero"
    ALPHA_MULTIPLE_OF_PI = "AlphaMultipleOfPi"
    THETA_STAR_CROSS = "ThetaStarCross"
    THETA_BOUNDARY_ESCAPE = "ThetaBoundaryEscape"
    XI_TURN = "XiTurn"
    HORIZON_REACHED = "HorizonReached"
    CUSTOM = "Custom"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class EventSpec:
    """An event function ``g(t, y)`` watched for sign changes.

    ``direction`` filters crossings: +1 rising, -1 falling, 0 both (in
    physical time). Roots at the initial time are never reported.
    ``code`` names the equivalent built-in kernel function ``(id, parameter)``
    so the compiled stepper can watch the event without calling back.
    """

    kind: EventKind
    function: Callable
    terminal: bool = False
    direction: int = 0
    name: Optional[str] = None
    code: Optional[tuple] = None

    @property
    def label(self):
        return self.name or self.kind.value


@dataclass(frozen=True)
class Event:
    kind: EventKind
    time: float
    state: tuple
    direction: int
    name: Optional[str] = None


# Standard events of the phase system ----------------------------------------


def xi_zero_event(terminal=True, direction=0):
    return EventSpec(EventKind.XI_ZERO, lambda t, y: y[0], terminal, direction, code=(0, 0.0))


def alpha_multiple_of_pi_event(terminal=True, direction=0):
    # vartheta' = sin(2 vartheta) sin(alpha) vanishes with sin(alpha) inside D.
    return EventSpec(
        EventKind.ALPHA_MULTIPLE_OF_PI, lambda t, y: math.sin(y[2]), terminal, direction, code=(1, 0.0)
    )


def theta_star_event(theta_star, terminal=False, direction=0):
    return EventSpec(
        EventKind.THETA_STAR_CROSS, lambda t, y: y[1] - theta_star, terminal, direction,
        code=(2, float(theta_star)),
    )


def theta_escape_event(margin=1e-9, terminal=True):
    upper = 0.5 * math.pi - margin
    return EventSpec(
        EventKind.THETA_BOUNDARY_ESCAPE,
        lambda t, y: min(y[1] - margin, upper - y[1]),
        terminal,
        -1,
        code=(4, float(margin)),
    )


def xi_turn_event(terminal=False, direction=0):
    # xi' = sin(2 vartheta) cos(alpha) vanishes with cos(alpha) inside D.
    return EventSpec(EventKind.XI_TURN, lambda t, y: math.cos(y[2]), terminal, direction, code=(3, 0.0))


# Trajectory -----------------------------------------------------------------


@dataclass
class Trajectory:
    """Accepted steps of one integration plus the located events.

    ``s`` holds the elapsed integration time at each node (strictly
    increasing); physical time is ``t0 + direction * s``. ``h[i]`` is the
    step length of the interpolant on step ``i``; the last step may be cut
    short by a terminal event, in which case ``s[-1] - s[-2] < h[-1]``.
    """

    s: np.ndarray
    y: np.ndarray
    K: np.ndarray
    h: np.ndarray
    t0: float = 0.0
    direction: int = 1
    events: list = field(default_factory=list)
    params: object = None
    cmc: object = None

    @property
    def times(self):
        return self.t0 + self.direction * self.s

    @property
    def t_final(self):
        return self.t0 + self.direction * self.s[-1]

    @property
    def domain(self):
        a, b = self.t0, self.t_final
        return (min(a, b), max(a, b))

    @property
    def start(self):
        return tuple(self.y[0])

    @property
    def end(self):
        return tuple(self.y[-1])

    def events_of(self, kind):
        return [e for e in self.events if e.kind == kind]

    def _elapsed(self, t):
        s = (t - self.t0) * self.direction
        span = self.s[-1]
        slack = 4 * np.finfo(float).eps * max(1.0, abs(self.t0), span)
        if s < -slack or s > span + slack:
            raise OutOfRange(f"t={t!r} is outside the trajectory domain {self.domain}")
        return min(max(s, 0.0), span)

    def _interp(self, i, s):
        if s == self.s[i]:
            return self.y[i]
        if s == self.s[i + 1]:
            return self.y[i + 1]
        theta = (s - self.s[i]) / self.h[i]
        powers = np.array([theta, theta**2, theta**3, theta**4])
        return self.y[i] + self.h[i] * (self.K[i].T @ (P @ powers))

    def sample(self, t):
        """State at physical time ``t`` from the dense output."""
        s = self._elapsed(float(t))
        if not len(self.h):
            return self._as_state(self.y[0])
        i = int(np.searchsorted(self.s, s, side="right")) - 1
        i = min(max(i, 0), len(self.h) - 1)
        return self._as_state(self._interp(i, s))

    def sample_many(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if not len(self.h):
            return np.repeat(self.y[:1], len(ts), axis=0)
        s = np.array([self._elapsed(t) for t in ts])
        idx = np.clip(np.searchsorted(self.s, s, side="right") - 1, 0, len(self.h) - 1)
        theta = (s - self.s[idx]) / self.h[idx]
        powers = np.stack([theta, theta**2, theta**3, theta**4], axis=1)
        Q = np.einsum("nkd,kp->ndp", self.K[idx], P)
        out = self.y[idx] + self.h[idx, None] * np.einsum("ndp,np->nd", Q, powers)
        exact = s == self.s[idx + 1]
        out[exact] = self.y[idx[exact] + 1]
        exact = s == self.s[idx]
        out[exact] = self.y[idx[exact]]
        return out

    def _as_state(self, y):
        if self.params is not None and len(y) == 3:
            from .model import PhaseState

            return PhaseState(float(y[0]), float(y[1]), float(y[2]))
        return tuple(float(v) for v in y)


def sample(traj: Trajectory, t):
    return traj.sample(t)


# Integration ----------------------------------------------------------------


def _rms(x):
    return math.sqrt(float(np.dot(x, x)) / len(x))


class _GenericStepper:
    def __init__(self, fun, t0, direction):
        self.fun = fun
        self.t0 = t0
        self.direction = direction

    def f(self, s, y):
        d = self.direction
        return d * np.asarray(self.fun(self.t0 + d * s, y), dtype=float)

    def step(self, s, y, f0, h, rtol, atol):
        dim = len(y)
        K = np.empty((7, dim))
        K[0] = f0
        for i in range(1, 6):
            K[i] = self.f(s + C[i] * h, y + h * (A[i, :i] @ K[:i]))
        y_new = y + h * (B @ K[:6])
        K[6] = self.f(s + h, y_new)
        err = h * (E @ K)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        return _rms(err / scale), K, y_new


class _KernelStepper:
    def __init__(self, field_obj, direction):
        self.field = field_obj if direction > 0 else field_obj.reversed()

    def f(self, s, y):
        out = np.empty(3)
        self.field.rhs_into(np.ascontiguousarray(y, dtype=float), out)
        return out

    def step(self, s, y, f0, h, rtol, atol):
        K = np.empty((7, 3))
        y_new = np.empty(3)
        err = self.field.dopri_step(y, f0, h, rtol, atol, K, y_new)
        return err, K, y_new


def _initial_step(stepper, s0, y0, f0, opts):
    scale = opts.abs_tol + opts.rel_tol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, opts.max_step, opts.horizon)
    f1 = stepper.f(s0 + h0, y0 + h0 * f0)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1, opts.max_step, opts.horizon)


def integrate(field_fn, start, opts: Optional[IntegratorOptions] = None, events=(), *,
              t0: float = 0.0, direction: int = 1, params=None, cmc=None,
              fast: bool = True) -> Trajectory:
    """Integrate ``field_fn`` from ``start`` over ``horizon`` time units.

    Integration runs from ``t0`` towards ``t0 + direction * horizon`` and
    stops early at the first terminal event. Each event is bracketed by a
    sign change between accepted nodes and refined on the dense output.

    With ``fast`` (the default), a kernel-backed field whose events are all
    built-in runs its adaptive loop inside the kernel between sign changes;
    the accepted steps are the same as on the step-by-step path.
    """
    opts = opts or IntegratorOptions()
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    if params is None:
        params = getattr(field_fn, "params", None)
    if cmc is None:
        cmc = getattr(field_fn, "cmc", None)
    y = np.array(start, dtype=float)
    if hasattr(field_fn, "dopri_step") and len(y) == 3:
        stepper = _KernelStepper(field_fn, direction)
    else:
        stepper = _GenericStepper(field_fn, t0, direction)

    rtol, atol, horizon = opts.rel_tol, opts.abs_tol, opts.horizon
    events = list(events)
    bulk = fast and isinstance(stepper, _KernelStepper) and all(ev.code for ev in events)

    def phys(s):
        return t0 + direction * s

    s_nodes, y_nodes, K_list, h_list, found = [0.0], [y.copy()], [], [], []

    def accept(s, y, s_new, y_new, K, h, last, prev_vals):
        """Record one accepted step and its events; return ``(stop, new values)``."""
        i_step = len(h_list)
        s_nodes.append(s_new)
        y_nodes.append(y_new)
        K_list.append(K)
        h_list.append(h)
        step_events = []
        new_vals = []
        for j, ev in enumerate(events):
            val = ev.function(phys(s_new), y_new)
            new_vals.append(val)
            prev = prev_vals[j]
            if prev == 0 or not (val == 0 or (prev < 0) != (val < 0)):
                continue
            crossing = 1 if val > prev else -1
            if ev.direction and crossing * direction != ev.direction:
                continue
            if val == 0:
                s_root, y_root = s_new, y_new
            else:
                s_root, y_root = _locate(ev, i_step, s, s_new, h, y, y_new, K, t0, direction, opts)
            step_events.append((s_root, j, crossing * direction, y_root))

        step_events.sort(key=lambda item: (item[0], item[1]))
        for s_root, j, crossing, y_root in step_events:
            ev = events[j]
            found.append(Event(ev.kind, phys(s_root), tuple(map(float, y_root)), crossing, ev.name))
            if ev.terminal:
                if s_root > s:
                    s_nodes[-1] = s_root
                    y_nodes[-1] = np.array(y_root, dtype=float)
                else:
                    s_nodes.pop()
                    y_nodes.pop()
                    K_list.pop()
                    h_list.pop()
                return True, new_vals
        if last:
            found.append(Event(EventKind.HORIZON_REACHED, phys(s_new), tuple(map(float, y_new)), 0))
            return True, new_vals
        return False, new_vals

    def underflow(s, y, h):
        return StepSizeUnderflow(
            f"step size {h:.3e} below {opts.min_step:.0e} at t={phys(s):.17g}, state={y.tolist()}",
            t=phys(s),
            state=tuple(y),
        )

    prev_vals = [ev.function(t0, y) for ev in events]
    s = 0.0
    f0 = stepper.f(0.0, y)
    h = _initial_step(stepper, 0.0, y, f0, opts)
    n_steps = 0

    if bulk:
        kernel = _backend.kernels
        codes = np.array([ev.code[0] for ev in events], dtype=np.intc)
        pars = np.array([ev.code[1] for ev in events], dtype=float)
        cap = 1024
        S, Y, KK, HH = np.empty(cap), np.empty((cap, 3)), np.empty((cap, 7, 3)), np.empty(cap)
        args = stepper.field.kernel_args
        while True:
            budget = min(cap, opts.max_steps - n_steps)
            if budget <= 0:
                raise StepBudgetExhausted(f"more than {opts.max_steps} steps at t={phys(s)}")
            n, status, h_next = kernel.cmc_advance(
                y, f0, s, h, horizon, opts.max_step, opts.min_step, rtol, atol, *args,
                codes, pars, S, Y, KK, HH, budget,
            )
            n_steps += n
            plain = n - 1 if status in (0, 2) else n
            if plain > 0:
                s_nodes.extend(S[:plain].tolist())
                y_nodes.extend(Y[:plain].copy())
                K_list.extend(KK[:plain].copy())
                h_list.extend(HH[:plain].tolist())
            if status == 3:
                y_end = Y[n - 1].copy() if n else y
                raise underflow(S[n - 1] if n else s, y_end, h_next)
            if status in (0, 2):
                s_prev = S[n - 2] if n > 1 else s
                y_prev = Y[n - 2].copy() if n > 1 else y
                if n > 1:
                    prev_vals = [ev.function(phys(s_prev), y_prev) for ev in events]
                y_new, K = Y[n - 1].copy(), KK[n - 1].copy()
                stop, prev_vals = accept(s_prev, y_prev, S[n - 1], y_new, K, HH[n - 1], status == 2,
                                         prev_vals)
                if stop:
                    break
                s, y, f0 = S[n - 1], y_new, K[6]
            else:
                s, y, f0 = S[n - 1], Y[n - 1].copy(), KK[n - 1, 6].copy()
                prev_vals = [ev.function(phys(s), y) for ev in events]
            s = float(s)
            h = h_next
    else:
        while True:
            if n_steps >= opts.max_steps:
                raise StepBudgetExhausted(f"more than {opts.max_steps} steps at t={phys(s)}")
            h = min(h, opts.max_step)
            last = False
            if horizon - (s + h) < opts.min_step:
                h = horizon - s
                last = True
            if h < opts.min_step:
                raise underflow(s, y, h)
            err, K, y_new = stepper.step(s, y, f0, h, rtol, atol)
            if not math.isfinite(err) or err > 1.0:
                factor = 0.2 if not math.isfinite(err) else max(0.2, 0.9 * err ** (-1.0 / ORDER))
                h *= factor
                continue
            n_steps += 1
            s_new = horizon if last else s + h
            stop, prev_vals = accept(s, y, s_new, y_new, K, h, last, prev_vals)
            if stop:
                break
            s, y = s_new, y_new
            f0 = K[6]
            if err == 0.0:
                h *= 5.0
            else:
                h *= min(5.0, max(0.2, 0.9 * err ** (-1.0 / ORDER)))

    dim = len(y_nodes[0])
    return Trajectory(
        s=np.array(s_nodes, dtype=float),
        y=np.array(y_nodes, dtype=float),
        K=np.array(K_list) if K_list else np.empty((0, 7, dim)),
        h=np.array(h_list, dtype=float),
        t0=float(t0),
        direction=direction,
        events=found,
        params=params,
        cmc=cmc,
    )


def _locate(ev, i_step, s0, s1, h, y0, y1, K, t0, direction, opts):
    Q = K.T @ P

    def state(s):
        if s == s0:
            return y0
        if s == s1:
            return y1
        th = (s - s0) / h
        return y0 + h * (Q @ np.array([th, th**2, th**3, th**4]))

    def g(s):
        return ev.function(t0 + direction * s, state(s))

    ga, gb = g(s0), g(s1)
    if ga == 0:
        return s0, y0
    if (ga < 0) == (gb < 0):
        # Interpolant and node disagree in the last bits; fall back to the node.
        return s1, y1
    try:
        root = brentq(g, s0, s1, xtol=opts.event_tol, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (RuntimeError, ValueError) as exc:  # pragma: no cover - brentq guarantees bracketing
        raise EventNotConverged(f"event {ev.label} failed to converge near t={t0 + direction * s0}") from exc
    return root, state(root)
