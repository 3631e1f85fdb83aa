"""Classical forced oscillator: exact solution, integration constants,
the constant of motion K = K0 + W and an independent Newton integrator.

Functions are written for SI inputs but never assume a unit system; any
consistent set works.  ``case`` is ``"resonant"`` or ``"nonresonant"``; when
omitted it follows ``params.is_resonant``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import OscillatorParams

RESONANT = "resonant"
NONRESONANT = "nonresonant"


@dataclass(frozen=True)
class ClassicalState:
    x: float
    v: float
    t: float


@dataclass(frozen=True)
class IntegrationConstants:
    C1: float
    C2: float


@dataclass(frozen=True)
class DriveShapeConstants:
    """Amplitudes of the particular solution.

    ``A`` and ``B`` belong to the non-resonant branch (``None`` at resonance),
    ``a_of_t`` and ``b`` to the resonant one.
    """

    A: float | None
    B: float | None
    a_of_t: float
    b: float


def resolve_case(params: OscillatorParams, case: str | None = None) -> str:
    if case is None:
        return RESONANT if params.is_resonant else NONRESONANT
    if case == NONRESONANT and params.is_resonant:
        raise ValueError("non-resonant formulas need drive_frequency != natural_frequency")
    if case == RESONANT and not params.is_resonant:
        raise ValueError("resonant formulas need drive_frequency == natural_frequency")
    if case not in (RESONANT, NONRESONANT):
        raise ValueError(f"unknown case {case!r}")
    return case


def drive_shape_constants(params: OscillatorParams, t=0.0) -> DriveShapeConstants:
    m, w0, alpha = params.mass, params.natural_frequency, params.drive_amplitude
    if params.is_resonant:
        A = B = None
    else:
        w = params.drive_frequency
        A = alpha / (m * (w0**2 - w**2))
        B = alpha * w / (m * w0 * (w0**2 - w**2))
    return DriveShapeConstants(A=A, B=B, a_of_t=alpha * t / (2.0 * m * w0), b=alpha / (2.0 * m * w0**2))


def trajectory(params: OscillatorParams, C1, C2, t, case: str | None = None) -> ClassicalState:
    """Exact x(t) and its analytic derivative v(t) for the requested branch."""
    case = resolve_case(params, case)
    m, w0, alpha, phi = params.mass, params.natural_frequency, params.drive_amplitude, params.drive_phase
    t = np.asarray(t, dtype=float)
    c0, s0 = np.cos(w0 * t), np.sin(w0 * t)
    x = C1 * c0 + C2 * s0
    v = -C1 * w0 * s0 + C2 * w0 * c0
    if case == NONRESONANT:
        w = params.drive_frequency
        A = alpha / (m * (w0**2 - w**2))
        th = w * t + phi
        x = x + A * np.cos(th)
        v = v - A * w * np.sin(th)
    else:
        k = alpha / (2.0 * m * w0)
        th = w0 * t + phi
        x = x + k * t * np.sin(th)
        v = v + k * np.sin(th) + k * t * w0 * np.cos(th)
    if x.ndim == 0:
        return ClassicalState(float(x), float(v), float(t))
    return ClassicalState(x, v, t)


def integration_constants(params: OscillatorParams, state: ClassicalState, case: str | None = None) -> IntegrationConstants:
    case = resolve_case(params, case)
    m, w0, alpha, phi = params.mass, params.natural_frequency, params.drive_amplitude, params.drive_phase
    x, v, t = state.x, state.v, state.t
    c0, s0 = np.cos(w0 * t), np.sin(w0 * t)
    C1 = x * c0 - v / w0 * s0
    C2 = x * s0 + v / w0 * c0
    if case == NONRESONANT:
        w = params.drive_frequency
        th = w * t + phi
        pre = alpha / (m * (w0**2 - w**2))
        C1 = C1 - pre * (np.cos(th) * c0 + w / w0 * np.sin(th) * s0)
        C2 = C2 - pre * (np.cos(th) * s0 - w / w0 * np.sin(th) * c0)
    else:
        th = w0 * t + phi
        pre = alpha / (2.0 * m * w0)
        C1 = C1 + pre * (-t * np.sin(th) * c0 + t * np.cos(th) * s0 + np.sin(th) * s0 / w0)
        C2 = C2 - pre * (t * np.sin(th) * s0 + t * np.cos(th) * c0 + np.sin(th) * c0 / w0)
    return IntegrationConstants(C1, C2)


def oscillator_energy(params: OscillatorParams, x, v):
    """K0 = m v^2 / 2 + m w0^2 x^2 / 2."""
    m, w0 = params.mass, params.natural_frequency
    return 0.5 * m * np.square(v) + 0.5 * m * w0**2 * np.square(x)


def constant_of_motion(params: OscillatorParams, state: ClassicalState, case: str | None = None):
    c = integration_constants(params, state, case)
    return 0.5 * params.mass * params.natural_frequency**2 * (np.square(c.C1) + np.square(c.C2))


def perturbation_W(params: OscillatorParams, state: ClassicalState, case: str | None = None):
    """Drive-dependent part W = K - K0, written out term by term."""
    case = resolve_case(params, case)
    m, w0, phi = params.mass, params.natural_frequency, params.drive_phase
    x, v, t = state.x, state.v, state.t
    shape = drive_shape_constants(params, t)
    if case == NONRESONANT:
        A, B = shape.A, shape.B
        th = params.drive_frequency * t + phi
        cth, sth = np.cos(th), np.sin(th)
        bracket = A**2 * cth**2 - 2.0 * A * x * cth + B**2 * sth**2 + 2.0 * B * v / w0 * sth
    else:
        a, b = shape.a_of_t, shape.b
        th = w0 * t + phi
        cth, sth = np.cos(th), np.sin(th)
        bracket = (
            a**2
            - 2.0 * a * v / w0 * cth
            - 2.0 * b * v / w0 * sth
            + 2.0 * a * b * cth * sth
            - 2.0 * a * x * sth
            + b**2 * sth**2
        )
    return 0.5 * m * w0**2 * bracket


@njit(cache=True)
def _newton_rk4(x0, v0, w0sq, f_over_m, w, phi, dt, n_steps, stride):
    n_out = n_steps // stride + 1
    out = np.empty((n_out, 3))
    x, v, t = x0, v0, 0.0
    out[0, 0], out[0, 1], out[0, 2] = t, x, v
    j = 1
    for i in range(1, n_steps + 1):
        a1 = -w0sq * x + f_over_m * math.cos(w * t + phi)
        k1x, k1v = v, a1
        th = w * (t + 0.5 * dt) + phi
        k2x, k2v = v + 0.5 * dt * k1v, -w0sq * (x + 0.5 * dt * k1x) + f_over_m * math.cos(th)
        k3x, k3v = v + 0.5 * dt * k2v, -w0sq * (x + 0.5 * dt * k2x) + f_over_m * math.cos(th)
        k4x = v + dt * k3v
        k4v = -w0sq * (x + dt * k3x) + f_over_m * math.cos(w * (t + dt) + phi)
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        t = i * dt
        if i % stride == 0:
            out[j, 0], out[j, 1], out[j, 2] = t, x, v
            j += 1
    return out[:j]


def integrate_newton(params: OscillatorParams, x0: float, v0: float, t_end: float, dt: float, stride: int = 1) -> ClassicalState:
    """RK4 integration of m x'' = -m w0^2 x + alpha cos(w t + phi).

    Uses only the equation of motion, so it can check the closed forms above.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    n_steps = int(round(t_end / dt))
    out = _newton_rk4(
        float(x0), float(v0), params.natural_frequency**2, params.drive_amplitude / params.mass,
        float(params.drive_frequency), float(params.drive_phase), float(dt), n_steps, int(stride),
    )
    return ClassicalState(x=out[:, 1], v=out[:, 2], t=out[:, 0])
