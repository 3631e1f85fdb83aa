"""Physical parameters, truncation and the unperturbed oscillator basis.

All quantum dynamics run in dimensionless units: time in 1/omega0, energy in
hbar*omega0 and length in the oscillator length sqrt(hbar/(m*omega0)).  SI
values only enter and leave through :func:`scale_to_dimensionless` and
:meth:`ScaledParams.to_si`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants

HBAR = constants.hbar

PROTON_MASS = 1.6726219e-27
TRAP_FREQUENCY = 2.0 * math.pi * 1e9
REFERENCE_DRIVE = 1e-13

MAX_EIGENFUNCTION_LEVEL = 20


@dataclass(frozen=True)
class OscillatorParams:
    """Forced oscillator ``m x'' = -m w0^2 x + alpha cos(w t + phi)`` in SI units.

    ``drive_frequency`` defaults to the natural frequency (resonant drive).
    """

    mass: float
    natural_frequency: float
    drive_amplitude: float = 0.0
    drive_frequency: float | None = None
    drive_phase: float = 0.0
    hbar: float = HBAR

    def __post_init__(self):
        for name in ("mass", "natural_frequency", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not (math.isfinite(self.drive_amplitude) and self.drive_amplitude >= 0):
            raise ValueError(f"drive_amplitude must be >= 0, got {self.drive_amplitude!r}")
        if self.drive_frequency is None:
            object.__setattr__(self, "drive_frequency", self.natural_frequency)
        if not (math.isfinite(self.drive_frequency) and self.drive_frequency >= 0):
            raise ValueError(f"drive_frequency must be >= 0, got {self.drive_frequency!r}")
        if not math.isfinite(self.drive_phase):
            raise ValueError("drive_phase must be finite")

    @property
    def is_resonant(self) -> bool:
        # exact comparison of configured values, never a tolerance test
        return self.drive_frequency == self.natural_frequency

    @property
    def oscillator_length(self) -> float:
        """sqrt(hbar / (m w0)) in metres."""
        return math.sqrt(self.hbar / (self.mass * self.natural_frequency))

    @property
    def energy_quantum(self) -> float:
        """hbar * w0 in joules."""
        return self.hbar * self.natural_frequency

    def with_(self, **changes) -> "OscillatorParams":
        return replace(self, **changes)


def proton_params(drive_frequency: float | None = None, drive_amplitude: float = REFERENCE_DRIVE) -> OscillatorParams:
    """Proton in a 1 GHz trap driven by a 1e-13 N force with zero phase."""
    return OscillatorParams(
        mass=PROTON_MASS,
        natural_frequency=TRAP_FREQUENCY,
        drive_amplitude=drive_amplitude,
        drive_frequency=TRAP_FREQUENCY if drive_frequency is None else drive_frequency,
        drive_phase=0.0,
    )


@dataclass(frozen=True)
class Truncation:
    """Number of retained basis states, levels ``0 .. n_states - 1``."""

    n_states: int = 12

    def __post_init__(self):
        if int(self.n_states) != self.n_states or self.n_states < 2:
            raise ValueError(f"n_states must be an integer >= 2, got {self.n_states!r}")

    @property
    def max_entropy(self) -> float:
        return math.log(self.n_states)

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.n_states)


@dataclass(frozen=True)
class Basis:
    level: int
    energy: float


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless view of :class:`OscillatorParams`.

    ``drive_strength`` is lambda / (hbar w0) = alpha * sqrt(hbar / (2 m w0)) / (hbar w0),
    the only combination of m, hbar and alpha that survives scaling.
    ``frequency_ratio`` is w / w0.
    """

    drive_strength: float
    frequency_ratio: float
    phase: float
    # SI units kept for the way back
    mass: float
    natural_frequency: float
    hbar: float
    is_resonant: bool = field(default=False)

    @property
    def time_unit(self) -> float:
        return 1.0 / self.natural_frequency

    @property
    def energy_unit(self) -> float:
        return self.hbar * self.natural_frequency

    @property
    def length_unit(self) -> float:
        return math.sqrt(self.hbar / (self.mass * self.natural_frequency))

    # couplings of the hand-derived ODE blocks, all divided by w0

    def _detuning(self) -> float:
        if self.is_resonant:
            raise ValueError("non-resonant couplings are undefined at resonance")
        return 1.0 - self.frequency_ratio**2

    @property
    def a1(self) -> float:
        return self.drive_strength**2 / self._detuning() ** 2

    @property
    def b1(self) -> float:
        return (self.drive_strength * self.frequency_ratio) ** 2 / self._detuning() ** 2

    @property
    def c(self) -> float:
        return self.drive_strength / self._detuning()

    @property
    def d(self) -> float:
        return self.drive_strength * self.frequency_ratio / self._detuning()

    @property
    def lam(self) -> float:
        return self.drive_strength

    def to_si(self) -> OscillatorParams:
        """Inverse of :func:`scale_to_dimensionless`."""
        w0 = self.natural_frequency
        half_length = math.sqrt(self.hbar / (2.0 * self.mass * w0))
        alpha = self.drive_strength * self.hbar * w0 / half_length
        omega = w0 if self.is_resonant else self.frequency_ratio * w0
        return OscillatorParams(
            mass=self.mass,
            natural_frequency=w0,
            drive_amplitude=alpha,
            drive_frequency=omega,
            drive_phase=self.phase,
            hbar=self.hbar,
        )


def scale_to_dimensionless(params: OscillatorParams) -> ScaledParams:
    if not isinstance(params, OscillatorParams):
        raise TypeError("expected OscillatorParams")
    w0 = params.natural_frequency
    half_length = math.sqrt(params.hbar / (2.0 * params.mass * w0))
    return ScaledParams(
        drive_strength=params.drive_amplitude * half_length / (params.hbar * w0),
        frequency_ratio=1.0 if params.is_resonant else params.drive_frequency / w0,
        phase=params.drive_phase,
        mass=params.mass,
        natural_frequency=w0,
        hbar=params.hbar,
        is_resonant=params.is_resonant,
    )


def eigen_energy(n: int, params: OscillatorParams) -> float:
    """E_n = hbar w0 (n + 1/2)."""
    if n < 0:
        raise ValueError("level must be non-negative")
    return params.hbar * params.natural_frequency * (n + 0.5)


def transition_frequency(m: int, n: int, params: OscillatorParams) -> float:
    """(E_m - E_n) / hbar."""
    return (m - n) * params.natural_frequency


def basis(n_states: int, params: OscillatorParams) -> list[Basis]:
    return [Basis(n, eigen_energy(n, params)) for n in range(n_states)]


def hermite(n: int, xi):
    """Physicists' Hermite polynomial H_n(xi) by upward recurrence."""
    xi = np.asarray(xi, dtype=float)
    h_prev = np.ones_like(xi)
    if n == 0:
        return h_prev
    h = 2.0 * xi
    for k in range(1, n):
        h_prev, h = h, 2.0 * xi * h - 2.0 * k * h_prev
    return h


def eigenfunction(n: int, x, params: OscillatorParams):
    """Position-space eigenfunction Phi_n(x) in m^-1/2, with x in metres.

    The Hermite polynomial is evaluated at the scaled coordinate
    xi = sqrt(m w0 / hbar) x.
    """
    if n < 0 or n > MAX_EIGENFUNCTION_LEVEL:
        raise ValueError(f"level {n} outside supported range 0..{MAX_EIGENFUNCTION_LEVEL}")
    mw = params.mass * params.natural_frequency / params.hbar
    xi = math.sqrt(mw) * np.asarray(x, dtype=float)
    norm = (mw / math.pi) ** 0.25 / math.sqrt(2.0**n * math.factorial(n))
    return norm * np.exp(-0.5 * xi**2) * hermite(n, xi)


def natural_params(drive_strength: float, frequency_ratio: float | None = None, phase: float = 0.0) -> OscillatorParams:
    """Parameters in units m = w0 = hbar = 1 with a given lambda / (hbar w0).

    ``frequency_ratio=None`` gives the resonant case.
    """
    return OscillatorParams(
        mass=1.0,
        natural_frequency=1.0,
        drive_amplitude=drive_strength * math.sqrt(2.0),
        drive_frequency=1.0 if frequency_ratio is None else frequency_ratio,
        drive_phase=phase,
        hbar=1.0,
    )
