"""Populations, Boltzmann-Shannon entropy and mean energy of coefficient runs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import OscillatorParams


def probabilities(coeffs) -> np.ndarray:
    """|D_k|^2 along the last axis (accepts a state, a vector or a run)."""
    coeffs = getattr(coeffs, "coeffs", coeffs)
    return np.abs(np.asarray(coeffs)) ** 2


def entropy(p) -> np.ndarray:
    """-sum p ln p in nats over the last axis, with 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    safe = np.where(p > 0, p, 1.0)
    return -np.sum(np.where(p > 0, p * np.log(safe), 0.0), axis=-1)


def mean_level(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return p @ np.arange(p.shape[-1], dtype=float)


def energy_expectation(p, params: OscillatorParams) -> np.ndarray:
    """<E> = hbar w0 (sum n p_n + 1/2) in joules."""
    return params.hbar * params.natural_frequency * (mean_level(p) + 0.5)


def time_average(values, times) -> float:
    """Trapezoid estimate of (1/T) int_0^T f dt on a uniform sample grid."""
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("time_average needs at least two samples")
    if times.shape != values.shape:
        raise ValueError("times and values differ in length")
    steps = np.diff(times)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ValueError("sample grid must be uniform and increasing")
    T = times[-1] - times[0]
    return float(np.trapezoid(values, times) / T)


@dataclass
class ObservableSeries:
    """Observables of one run.

    ``t`` is in seconds, ``tau`` the same grid in units of 1/w0, ``energy`` in
    joules.  ``diagnostics`` carries integrator facts such as the norm drift.
    """

    t: np.ndarray
    tau: np.ndarray
    probabilities: np.ndarray
    entropy: np.ndarray
    energy: np.ndarray
    norm: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_coefficients(cls, tau, coeffs, params: OscillatorParams) -> "ObservableSeries":
        p = probabilities(coeffs)
        tau = np.asarray(tau, dtype=float)
        return cls(
            t=tau / params.natural_frequency,
            tau=tau,
            probabilities=p,
            entropy=entropy(p),
            energy=energy_expectation(p, params),
            norm=p.sum(axis=-1),
        )

    @property
    def n_states(self) -> int:
        return self.probabilities.shape[1]

    def average_entropy(self) -> float:
        return time_average(self.entropy, self.tau)

    def average_energy(self) -> float:
        return time_average(self.energy, self.tau)
