"""Independent reconstructions used to check the hand-derived equations.

``oracle_rhs`` assembles the truncated perturbation matrix W_mn(t) in SI
units from ladder-operator representations of x and v and the classical
drive amplitudes, applies the interaction-picture phases exp(i w_mn t) and
returns -(i/hbar) W D rescaled to dimensionless time.  It shares no coupling
formula with :mod:`kvquant.dynamics`.

``coherent_populations`` is the untruncated closed-form answer for the
Hamiltonian scheme started in the ground state.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .classical import drive_shape_constants
from .dynamics import CoefficientState, SchemeKind, check_scheme
from .model import OscillatorParams, ScaledParams, eigen_energy, scale_to_dimensionless

MAX_ORACLE_STATES = 64


def lowering_operator(n_states: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_states, dtype=float)), 1)


def position_operator(params: OscillatorParams, n_states: int) -> np.ndarray:
    a = lowering_operator(n_states)
    return math.sqrt(params.hbar / (2.0 * params.mass * params.natural_frequency)) * (a + a.T)


def velocity_operator(params: OscillatorParams, n_states: int) -> np.ndarray:
    a = lowering_operator(n_states)
    return 1j * math.sqrt(params.hbar * params.natural_frequency / (2.0 * params.mass)) * (a.T - a)


def _perturbation_terms(params: OscillatorParams, t: float, scheme: SchemeKind):
    """Coefficients (scalar, of x, of v) of the perturbation at SI time t, in J, J/m, J s/m."""
    m, w0, phi = params.mass, params.natural_frequency, params.drive_phase
    k = 0.5 * m * w0**2
    shape = drive_shape_constants(params, t)
    if scheme is SchemeKind.HAMILTONIAN:
        # H0 - alpha x cos(w t + phi): the potential whose force drives m x'' = ... + alpha cos
        return 0.0, -params.drive_amplitude * math.cos(params.drive_frequency * t + phi), 0.0
    if scheme is SchemeKind.K_NONRESONANT:
        A, B = shape.A, shape.B
        th = params.drive_frequency * t + phi
        c, s = math.cos(th), math.sin(th)
        return k * (A**2 * c**2 + B**2 * s**2), -2.0 * k * A * c, 2.0 * k * B * s / w0
    a, b = shape.a_of_t, shape.b
    th = w0 * t + phi
    c, s = math.cos(th), math.sin(th)
    # the a(t)^2 term is carried by the resonant phase transform, so it is left out
    scalar = k * (2.0 * a * b * c * s + b**2 * s**2)
    return scalar, -2.0 * k * a * s, -2.0 * k * (a * c + b * s) / w0


def coupling_matrix(params: OscillatorParams, t: float, scheme: SchemeKind, n_states: int,
                    keep_scalar_phase: bool = True) -> np.ndarray:
    """Truncated <m|W|n> at SI time ``t`` in joules (Schroedinger picture)."""
    scheme = SchemeKind(scheme)
    if n_states > MAX_ORACLE_STATES:
        raise ValueError(f"oracle limited to {MAX_ORACLE_STATES} states")
    check_scheme(scale_to_dimensionless(params), scheme)
    scalar, cx, cv = _perturbation_terms(params, t, scheme)
    W = cx * position_operator(params, n_states) + cv * velocity_operator(params, n_states)
    if keep_scalar_phase:
        W = W + scalar * np.eye(n_states)
    return W


def interaction_phases(params: OscillatorParams, t: float, n_states: int) -> np.ndarray:
    E = np.array([eigen_energy(n, params) for n in range(n_states)])
    return np.exp(1j * np.subtract.outer(E, E) / params.hbar * t)


def oracle_rhs(state: CoefficientState, params: OscillatorParams, scheme: SchemeKind,
               keep_scalar_phase: bool = True) -> np.ndarray:
    """dD/dtau rebuilt from the operator algebra; ``state.tau`` is w0 t."""
    if isinstance(params, ScaledParams):
        params = params.to_si()
    n = state.n_states
    t = state.tau / params.natural_frequency
    W = coupling_matrix(params, t, scheme, n, keep_scalar_phase) * interaction_phases(params, t, n)
    return (-1j / params.hbar) * (W @ state.coeffs) / params.natural_frequency


def relative_error(candidate: np.ndarray, reference: np.ndarray) -> float:
    scale = float(np.max(np.abs(reference)))
    diff = float(np.max(np.abs(np.asarray(candidate) - np.asarray(reference))))
    if scale == 0.0:
        return diff
    return diff / scale


def displacement(scaled: ScaledParams, tau) -> np.ndarray:
    """eta(tau) = -i eps int_0^tau cos(nu s + phi) exp(i s) ds, in closed form."""
    tau = np.asarray(tau, dtype=float)
    eps, nu, phi = scaled.drive_strength, scaled.frequency_ratio, scaled.phase
    # cos(nu s + phi) e^{is} = (e^{i((1+nu)s + phi)} + e^{i((1-nu)s - phi)}) / 2
    def _int_exp(rate, shift):
        if rate == 0.0:
            return np.exp(1j * shift) * tau
        return np.exp(1j * shift) * (np.exp(1j * rate * tau) - 1.0) / (1j * rate)

    integral = 0.5 * (_int_exp(1.0 + nu, phi) + _int_exp(1.0 - nu, -phi))
    return -1j * eps * integral


def coherent_populations(scaled: ScaledParams, tau, n_states: int) -> np.ndarray:
    """Poisson populations exp(-|eta|^2) |eta|^(2n) / n! for levels 0..n_states-1."""
    mean = np.abs(displacement(scaled, tau)) ** 2
    n = np.arange(n_states)
    mean = np.atleast_1d(mean)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = -mean + n * np.log(mean) - gammaln(n + 1)
    logp = np.where((mean == 0) & (n == 0), 0.0, logp)
    out = np.exp(logp)
    return out if np.ndim(tau) else out[0]
