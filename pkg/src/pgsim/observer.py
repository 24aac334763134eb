"""Two-step predictor observer for a scalar signal.

Step one is a high-gain differentiator chain that estimates the current
signal and its first three derivatives.  Step two re-injects the same
tracking error through Taylor-weighted gains so that its states converge
to the signal and derivatives evaluated a fixed horizon ahead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "ObserverGains",
    "ObserverConfig",
    "ObserverState",
    "Prediction",
    "DivergenceError",
    "validate_gains",
    "second_step_injection_gains",
    "observer_rhs",
    "observer_step",
    "prediction",
    "reset",
]

_STATE_NAMES = (
    "x11", "x21", "x31", "x41",
    "x12", "x22", "x32", "x42",
)


class DivergenceError(RuntimeError):
    """Raised when an observer state goes non-finite."""


def _is_hurwitz(k1: float, k2: float, k3: float, k4: float) -> bool:
    # Routh-Hurwitz conditions for s^4 + k1 s^3 + k2 s^2 + k3 s + k4
    if k1 <= 0.0 or k4 <= 0.0:
        return False
    a = k1 * k2 - k3
    if a <= 0.0:
        return False
    return a * k3 - k1 * k1 * k4 > 0.0


@dataclass(frozen=True)
class ObserverGains:
    """Tuning gains of the error-injection chain.

    The quartic s^4 + k1 s^3 + k2 s^2 + k3 s + k4 must be Hurwitz;
    construction fails otherwise.
    """

    k1: float
    k2: float
    k3: float
    k4: float

    def __post_init__(self):
        if not _is_hurwitz(self.k1, self.k2, self.k3, self.k4):
            raise ValueError(
                "observer gains (%g, %g, %g, %g) fail the Hurwitz stability "
                "conditions" % (self.k1, self.k2, self.k3, self.k4)
            )


def validate_gains(k1: float, k2: float, k3: float, k4: float) -> bool:
    """True iff the gain quartic has all roots in the open left half plane."""
    return _is_hurwitz(k1, k2, k3, k4)


@dataclass(frozen=True)
class ObserverConfig:
    gains: ObserverGains
    epsilon: float = 0.05   # bandwidth parameter; injection gains scale as k_i / eps^i
    delta: float = 0.0      # prediction horizon, seconds
    coupled_step1: bool = False  # keep the alternate x31 cross-term in the x41 equation

    def __post_init__(self):
        if not (self.epsilon > 0.0) or not math.isfinite(self.epsilon):
            raise ValueError("epsilon must be a positive finite number")
        if self.delta < 0.0 or not math.isfinite(self.delta):
            raise ValueError("delta must be finite and >= 0")

    def coefficients(self) -> tuple:
        """Precomputed (b1..b4, g1..g4) injection gains for the fast stepper."""
        g = self.gains
        e = self.epsilon
        b1 = g.k1 / e
        b2 = g.k2 / e ** 2
        b3 = g.k3 / e ** 3
        b4 = g.k4 / e ** 4
        return (b1, b2, b3, b4) + second_step_injection_gains(self)


def second_step_injection_gains(config: ObserverConfig) -> tuple:
    """Taylor-weighted injection gains (g1, g2, g3, g4) of the second step.

    With horizon 0 they collapse to the step-one gains k_i / eps^i.
    """
    k = config.gains
    e = config.epsilon
    d = config.delta
    b1 = k.k1 / e
    b2 = k.k2 / e ** 2
    b3 = k.k3 / e ** 3
    b4 = k.k4 / e ** 4
    g1 = b4 * d ** 3 / 6.0 + b3 * d ** 2 / 2.0 + b2 * d + b1
    g2 = b4 * d ** 2 / 2.0 + b3 * d + b2
    g3 = b4 * d + b3
    g4 = b4
    return (g1, g2, g3, g4)


@dataclass
class ObserverState:
    """Eight observer states: step-one chain then step-two chain."""

    step1: tuple  # (x11, x21, x31, x41)
    step2: tuple  # (x12, x22, x32, x42)
    t: float = 0.0

    def __post_init__(self):
        for v in (*self.step1, *self.step2, self.t):
            if not math.isfinite(v):
                raise ValueError("observer state entries must be finite")

    def as_tuple(self) -> tuple:
        return self.step1 + self.step2


@dataclass(frozen=True)
class Prediction:
    """Signal value and first three derivatives at the prediction horizon."""

    value: float
    d1: float
    d2: float
    d3: float


def rhs8(x: tuple, v: float, coeffs: tuple, coupled_step1: bool = False) -> tuple:
    """Time derivatives of the eight states for input sample ``v``.

    ``x`` is (x11, x21, x31, x41, x12, x22, x32, x42); ``coeffs`` is the
    tuple from :meth:`ObserverConfig.coefficients`.
    """
    x11, x21, x31, x41, x12, x22, x32, x42 = x
    b1, b2, b3, b4, g1, g2, g3, g4 = coeffs
    e = v - x11
    d41 = b4 * e
    if coupled_step1:
        d41 = x31 + d41
    return (
        x21 + b1 * e,
        x31 + b2 * e,
        x41 + b3 * e,
        d41,
        x22 + g1 * e,
        x32 + g2 * e,
        x42 + g3 * e,
        g4 * e,
    )


def observer_rhs(state: ObserverState, v: float, config: ObserverConfig) -> tuple:
    """Right-hand side of the full eight-state observer ODE."""
    if not math.isfinite(v):
        raise ValueError("observer input must be finite, got %r" % (v,))
    return rhs8(state.as_tuple(), v, config.coefficients(), config.coupled_step1)


def rk4_step8(x: tuple, v, dt: float, coeffs: tuple,
              coupled_step1: bool = False) -> tuple:
    """One classical RK4 step of the eight-state chain.

    ``v`` is either a single held sample (zero-order hold) or a
    (start, midpoint, end) triple of stage samples; stage sampling makes
    the step fourth-order accurate in the input as well.
    """
    if isinstance(v, tuple):
        v0, vm, v1 = v
    else:
        v0 = vm = v1 = v
    h2 = dt * 0.5
    h6 = dt / 6.0
    a1, a2, a3, a4, a5, a6, a7, a8 = rhs8(x, v0, coeffs, coupled_step1)
    x2 = (x[0] + h2 * a1, x[1] + h2 * a2, x[2] + h2 * a3, x[3] + h2 * a4,
          x[4] + h2 * a5, x[5] + h2 * a6, x[6] + h2 * a7, x[7] + h2 * a8)
    b1, b2, b3, b4, b5, b6, b7, b8 = rhs8(x2, vm, coeffs, coupled_step1)
    x3 = (x[0] + h2 * b1, x[1] + h2 * b2, x[2] + h2 * b3, x[3] + h2 * b4,
          x[4] + h2 * b5, x[5] + h2 * b6, x[6] + h2 * b7, x[7] + h2 * b8)
    c1, c2, c3, c4, c5, c6, c7, c8 = rhs8(x3, vm, coeffs, coupled_step1)
    x4 = (x[0] + dt * c1, x[1] + dt * c2, x[2] + dt * c3, x[3] + dt * c4,
          x[4] + dt * c5, x[5] + dt * c6, x[6] + dt * c7, x[7] + dt * c8)
    d1, d2, d3, d4, d5, d6, d7, d8 = rhs8(x4, v1, coeffs, coupled_step1)
    return (
        x[0] + h6 * (a1 + 2.0 * (b1 + c1) + d1),
        x[1] + h6 * (a2 + 2.0 * (b2 + c2) + d2),
        x[2] + h6 * (a3 + 2.0 * (b3 + c3) + d3),
        x[3] + h6 * (a4 + 2.0 * (b4 + c4) + d4),
        x[4] + h6 * (a5 + 2.0 * (b5 + c5) + d5),
        x[5] + h6 * (a6 + 2.0 * (b6 + c6) + d6),
        x[6] + h6 * (a7 + 2.0 * (b7 + c7) + d7),
        x[7] + h6 * (a8 + 2.0 * (b8 + c8) + d8),
    )


def observer_step(state: ObserverState, v, dt: float,
                  config: ObserverConfig) -> ObserverState:
    """Advance the observer one fixed RK4 step.

    A scalar ``v`` is held constant over the step (zero-order hold, the
    in-loop case where only samples exist); a callable ``v(t)`` is
    evaluated at the RK4 stage times, which removes the hold-induced
    tracking bias.  The step must satisfy dt <= epsilon / 4; larger
    steps would put the stiff injection eigenvalues outside the RK4
    stability region.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if dt > config.epsilon / 4.0:
        raise ValueError(
            "dt=%g exceeds the stiffness guard epsilon/4=%g"
            % (dt, config.epsilon / 4.0)
        )
    if callable(v):
        v = (v(state.t), v(state.t + dt * 0.5), v(state.t + dt))
    samples = v if isinstance(v, tuple) else (v,)
    for s in samples:
        if not math.isfinite(s):
            raise ValueError("observer input must be finite, got %r" % (s,))
    x = rk4_step8(state.as_tuple(), v, dt, config.coefficients(),
                  config.coupled_step1)
    for name, xi in zip(_STATE_NAMES, x):
        if not math.isfinite(xi):
            raise DivergenceError(
                "observer diverged at t=%g: state %s is %r"
                % (state.t + dt, name, xi)
            )
    return ObserverState(step1=x[:4], step2=x[4:], t=state.t + dt)


def prediction(state: ObserverState) -> Prediction:
    """Read out the second-step states as the horizon-ahead estimate."""
    x12, x22, x32, x42 = state.step2
    return Prediction(value=x12, d1=x22, d2=x32, d3=x42)


def reset(config: ObserverConfig, v0: float) -> ObserverState:
    """Fresh state seeded with the current signal sample.

    Seeding x11 = x12 = v0 removes the initial error spike that drives
    the peaking transient.
    """
    if not math.isfinite(v0):
        raise ValueError("initial sample must be finite")
    return ObserverState(step1=(v0, 0.0, 0.0, 0.0),
                         step2=(v0, 0.0, 0.0, 0.0), t=0.0)
