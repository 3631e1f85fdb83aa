"""Coefficient equations for the K- and H-quantized forced oscillator and the
fixed-step RK4 integrator that solves them.

Time is dimensionless throughout (``tau = w0 t``) and every coupling is
divided by ``w0``.  A state is the complex vector ``D_k = X_k + i Y_k`` of
interaction-picture coefficients; for the resonant K scheme it holds the
phase-shifted ``D~_k`` instead (same populations).

The three right-hand sides are written out row by row in numba kernels so
they can be checked line by line against the hand-derived equations.  The
ladder-operator construction in :mod:`kvquant.oracle` rebuilds the same
right-hand sides independently.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
from numba import njit

from .model import OscillatorParams, ScaledParams, scale_to_dimensionless

DEFAULT_DT = 1e-3
DEFAULT_PERIODS = 50
DEFAULT_STRIDE = 10
MAX_NORM_DRIFT = 1e-6


class SchemeKind(str, enum.Enum):
    K_NONRESONANT = "K-nonresonant"
    K_RESONANT = "K-resonant"
    HAMILTONIAN = "H"

    @property
    def is_k(self) -> bool:
        return self is not SchemeKind.HAMILTONIAN


def select_scheme(scheme: str, resonant: bool) -> SchemeKind:
    """Map a ``K``/``H`` choice and the case flag onto a :class:`SchemeKind`."""
    scheme = scheme.upper()
    if scheme == "H":
        return SchemeKind.HAMILTONIAN
    if scheme == "K":
        return SchemeKind.K_RESONANT if resonant else SchemeKind.K_NONRESONANT
    raise ValueError(f"scheme must be 'K' or 'H', got {scheme!r}")


class NormDriftError(RuntimeError):
    """Integration abandoned because sum |D_k|^2 left 1 by more than allowed."""

    def __init__(self, drift: float, tau: float, dt: float, suggested_dt: float | None = None):
        self.drift = drift
        self.tau = tau
        self.dt = dt
        self.suggested_dt = suggested_dt
        msg = f"norm drift {drift:.3e} at tau={tau:.6g} with dt={dt:.3e}"
        if suggested_dt is not None:
            msg += f"; try dt <= {suggested_dt:.3e}"
        super().__init__(msg)


@dataclass
class CoefficientState:
    tau: float
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 1 or self.coeffs.size < 2:
            raise ValueError("coefficients must be a 1-D vector with at least two levels")

    @property
    def n_states(self) -> int:
        return self.coeffs.size

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


def ground_state(n_states: int) -> CoefficientState:
    c = np.zeros(n_states, dtype=complex)
    c[0] = 1.0
    return CoefficientState(0.0, c)


# ---------------------------------------------------------------------------
# couplings in SI (rad/s, J)


@dataclass(frozen=True)
class NonresonantCouplings:
    a1: float
    b1: float
    c: float
    d: float


@dataclass(frozen=True)
class ResonantCouplings:
    f: float
    g: float
    h: float


@dataclass(frozen=True)
class HamiltonianCoupling:
    lam: float


def couplings_nonresonant(params: OscillatorParams) -> NonresonantCouplings:
    if params.is_resonant:
        raise ValueError("non-resonant couplings diverge at w == w0")
    m, w0, w, alpha, hbar = params.mass, params.natural_frequency, params.drive_frequency, params.drive_amplitude, params.hbar
    det = w0**2 - w**2
    return NonresonantCouplings(
        a1=alpha**2 * w0**2 / (2.0 * m * hbar * det**2),
        b1=alpha**2 * w**2 / (2.0 * m * hbar * det**2),
        c=alpha * w0**2 / det / math.sqrt(2.0 * m * hbar * w0),
        d=alpha * w / det * math.sqrt(w0 / (2.0 * m * hbar)),
    )


def resonant_fgh(params: OscillatorParams, t: float) -> ResonantCouplings:
    """f, g, h of the resonant system at SI time ``t``, in rad/s.

    g and h carry the ladder length sqrt(hbar / (2 m w0)) that makes them
    rates; f uses w0^2 and the driven phase in its first term.
    """
    m, w0, alpha, hbar, phi = params.mass, params.natural_frequency, params.drive_amplitude, params.hbar, params.drive_phase
    th = w0 * t + phi
    half_length = math.sqrt(hbar / (2.0 * m * w0))
    f = alpha**2 / (8.0 * m * hbar * w0**2) * math.sin(th) ** 2 + alpha**2 * t / (4.0 * m * w0 * hbar) * math.cos(th) * math.sin(th)
    g = half_length * w0 * alpha / (2.0 * hbar) * (math.sin(th) / w0 + t * math.cos(th))
    h = half_length * alpha * w0 * t / (2.0 * hbar) * math.sin(th)
    return ResonantCouplings(f, g, h)


def hamiltonian_coupling(params: OscillatorParams) -> HamiltonianCoupling:
    return HamiltonianCoupling(params.drive_amplitude * math.sqrt(params.hbar / (2.0 * params.mass * params.natural_frequency)))


def resonant_phase(scaled: ScaledParams, tau) -> float:
    """alpha^2 t^3 / (24 m hbar) in dimensionless form, eps^2 tau^3 / 12."""
    return scaled.drive_strength**2 * np.asarray(tau) ** 3 / 12.0


def resonant_phase_transform(coeffs, scaled: ScaledParams, tau: float, direction: str = "forward") -> np.ndarray:
    """``forward``: D -> D~ = exp(+i phase) D.  ``backward`` undoes it."""
    sign = {"forward": 1.0, "backward": -1.0}.get(direction)
    if sign is None:
        raise ValueError("direction must be 'forward' or 'backward'")
    return np.exp(1j * sign * resonant_phase(scaled, tau)) * np.asarray(coeffs, dtype=complex)


# ---------------------------------------------------------------------------
# right-hand sides.  ``p`` packs the scalar constants; ``diag`` is 1.0 to keep
# the level-independent phase terms and 0.0 to drop them.


@njit(cache=True)
def _rhs_k_nonresonant(tau, D, p, out):
    a1, b1, c, d, nu, phi, diag = p[0], p[1], p[2], p[3], p[4], p[5], p[6]
    n = D.size
    cw = math.cos(nu * tau + phi)
    sw = math.sin(nu * tau + phi)
    c0 = math.cos(tau)
    s0 = math.sin(tau)
    s_diag = diag * (a1 * cw * cw + b1 * sw * sw)
    for k in range(n):
        Xk, Yk = D[k].real, D[k].imag
        Xm = Ym = Xp = Yp = 0.0
        if k > 0:
            Xm, Ym = D[k - 1].real, D[k - 1].imag
        if k < n - 1:
            Xp, Yp = D[k + 1].real, D[k + 1].imag
        sk = math.sqrt(k)
        sk1 = math.sqrt(k + 1)
        dX = (
            -c * sk * (cw * c0 * Ym + cw * s0 * Xm)
            - c * sk1 * (cw * c0 * Yp - cw * s0 * Xp)
            + d * sk * (sw * c0 * Xm - sw * s0 * Ym)
            - d * sk1 * (sw * c0 * Xp + sw * s0 * Yp)
            + s_diag * Yk
        )
        dY = (
            c * sk * (cw * c0 * Xm - cw * s0 * Ym)
            + c * sk1 * (cw * c0 * Xp + cw * s0 * Yp)
            + d * sk * (sw * c0 * Ym + sw * s0 * Xm)
            - d * sk1 * (sw * c0 * Yp - sw * s0 * Xp)
            - s_diag * Xk
        )
        out[k] = complex(dX, dY)


@njit(cache=True)
def _rhs_k_resonant(tau, D, p, out):
    eps, phi, diag = p[0], p[1], p[2]
    n = D.size
    th = tau + phi
    sth = math.sin(th)
    cth = math.cos(th)
    c0 = math.cos(tau)
    s0 = math.sin(tau)
    f = diag * (0.25 * eps * eps * sth * sth + 0.5 * eps * eps * tau * cth * sth)
    g = 0.5 * eps * (sth + tau * cth)
    h = 0.5 * eps * tau * sth
    for k in range(n):
        Xk, Yk = D[k].real, D[k].imag
        Xm = Ym = Xp = Yp = 0.0
        if k > 0:
            Xm, Ym = D[k - 1].real, D[k - 1].imag
        if k < n - 1:
            Xp, Yp = D[k + 1].real, D[k + 1].imag
        sk = math.sqrt(k)
        sk1 = math.sqrt(k + 1)
        dX = (
            f * Yk
            - sk * ((h * Xm - g * Ym) * s0 + (h * Ym + g * Xm) * c0)
            + sk1 * ((h * Xp + g * Yp) * s0 - (h * Yp - g * Xp) * c0)
        )
        dY = (
            -f * Xk
            + sk * ((h * Xm - g * Ym) * c0 - (h * Ym + g * Xm) * s0)
            + sk1 * ((h * Xp + g * Yp) * c0 + (h * Yp - g * Xp) * s0)
        )
        out[k] = complex(dX, dY)


@njit(cache=True)
def _rhs_hamiltonian(tau, D, p, out):
    lam, nu, phi = p[0], p[1], p[2]
    n = D.size
    cw = math.cos(nu * tau + phi)
    c0 = math.cos(tau)
    s0 = math.sin(tau)
    for k in range(n):
        xm = ym = xp = yp = 0.0
        if k > 0:
            xm, ym = D[k - 1].real, D[k - 1].imag
        if k < n - 1:
            xp, yp = D[k + 1].real, D[k + 1].imag
        sk = math.sqrt(k)
        sk1 = math.sqrt(k + 1)
        dx = -lam * (sk * xm - sk1 * xp) * cw * s0 - lam * (sk * ym + sk1 * yp) * cw * c0
        dy = -lam * (sk * ym - sk1 * yp) * cw * s0 + lam * (sk * xm + sk1 * xp) * cw * c0
        out[k] = complex(dx, dy)


_KERNELS = {
    SchemeKind.K_NONRESONANT: _rhs_k_nonresonant,
    SchemeKind.K_RESONANT: _rhs_k_resonant,
    SchemeKind.HAMILTONIAN: _rhs_hamiltonian,
}


def _as_scaled(params) -> ScaledParams:
    return params if isinstance(params, ScaledParams) else scale_to_dimensionless(params)


def check_scheme(scaled: ScaledParams, scheme: SchemeKind) -> None:
    if scheme is SchemeKind.K_NONRESONANT and scaled.is_resonant:
        raise ValueError("K-nonresonant scheme requested with w == w0")
    if scheme is SchemeKind.K_RESONANT and not scaled.is_resonant:
        raise ValueError("K-resonant scheme requested with w != w0")


def kernel_constants(scaled: ScaledParams, scheme: SchemeKind, keep_scalar_phase: bool = True) -> np.ndarray:
    scheme = SchemeKind(scheme)
    check_scheme(scaled, scheme)
    diag = 1.0 if keep_scalar_phase else 0.0
    if scheme is SchemeKind.K_NONRESONANT:
        vals = [scaled.a1, scaled.b1, scaled.c, scaled.d, scaled.frequency_ratio, scaled.phase, diag]
    elif scheme is SchemeKind.K_RESONANT:
        vals = [scaled.drive_strength, scaled.phase, diag]
    else:
        vals = [scaled.lam, scaled.frequency_ratio, scaled.phase]
    return np.array(vals, dtype=float)


def _evaluate(scheme, state: CoefficientState, params, keep_scalar_phase=True) -> np.ndarray:
    scaled = _as_scaled(params)
    p = kernel_constants(scaled, scheme, keep_scalar_phase)
    out = np.empty_like(state.coeffs)
    _KERNELS[SchemeKind(scheme)](float(state.tau), state.coeffs, p, out)
    return out


def rhs_k_nonresonant(state: CoefficientState, params, keep_scalar_phase: bool = True) -> np.ndarray:
    """dD/dtau of the non-resonant K system (real rows X, imaginary rows Y)."""
    return _evaluate(SchemeKind.K_NONRESONANT, state, params, keep_scalar_phase)


def rhs_k_resonant(state: CoefficientState, params, keep_scalar_phase: bool = True) -> np.ndarray:
    """dD~/dtau of the resonant K system."""
    return _evaluate(SchemeKind.K_RESONANT, state, params, keep_scalar_phase)


def rhs_hamiltonian(state: CoefficientState, params) -> np.ndarray:
    """dD/dtau of the Hamiltonian system."""
    return _evaluate(SchemeKind.HAMILTONIAN, state, params)


def rhs_for(scheme: SchemeKind, params, keep_scalar_phase: bool = True) -> Callable[[float, np.ndarray], np.ndarray]:
    """Plain ``f(tau, D) -> dD/dtau`` closure for :func:`rk4_step`."""
    scheme = SchemeKind(scheme)
    p = kernel_constants(_as_scaled(params), scheme, keep_scalar_phase)
    kernel = _KERNELS[scheme]

    def rhs(tau, D):
        D = np.asarray(D, dtype=complex)
        out = np.empty_like(D)
        kernel(float(tau), D, p, out)
        return out

    return rhs


# ---------------------------------------------------------------------------
# integration


def rk4_step(state: CoefficientState, rhs: Callable[[float, np.ndarray], np.ndarray], dt: float) -> CoefficientState:
    if not dt > 0:
        raise ValueError("dt must be positive")
    t, y = state.tau, state.coeffs
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    y_new = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y_new)):
        raise FloatingPointError(f"non-finite coefficients after step at tau={t + dt:.6g}")
    return CoefficientState(t + dt, y_new)


@njit
def _rk4_run(kernel, p, y0, tau0, dt, n_steps, stride, max_drift):
    n = y0.size
    n_out = n_steps // stride + 1
    samples = np.empty((n_out, n), dtype=np.complex128)
    taus = np.empty(n_out)
    y = y0.copy()
    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty(n, dtype=np.complex128)
    k3 = np.empty(n, dtype=np.complex128)
    k4 = np.empty(n, dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)
    samples[0] = y
    taus[0] = tau0
    j = 1
    worst = 0.0
    for i in range(n_steps):
        t = tau0 + i * dt
        kernel(t, y, p, k1)
        for q in range(n):
            tmp[q] = y[q] + 0.5 * dt * k1[q]
        kernel(t + 0.5 * dt, tmp, p, k2)
        for q in range(n):
            tmp[q] = y[q] + 0.5 * dt * k2[q]
        kernel(t + 0.5 * dt, tmp, p, k3)
        for q in range(n):
            tmp[q] = y[q] + dt * k3[q]
        kernel(t + dt, tmp, p, k4)
        for q in range(n):
            y[q] = y[q] + dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q])
        if (i + 1) % stride == 0:
            norm = 0.0
            for q in range(n):
                norm += y[q].real * y[q].real + y[q].imag * y[q].imag
            drift = abs(norm - 1.0)
            if not drift < max_drift:  # also catches NaN
                samples[j] = y
                taus[j] = tau0 + (i + 1) * dt
                return taus[: j + 1], samples[: j + 1], drift, 1
            worst = max(worst, drift)
            samples[j] = y
            taus[j] = tau0 + (i + 1) * dt
            j += 1
    return taus[:j], samples[:j], worst, 0


@dataclass
class TimeSeries:
    """Sampled coefficients of one integration run."""

    tau: np.ndarray
    coeffs: np.ndarray
    scheme: SchemeKind
    scaled: ScaledParams
    dt: float
    stride: int
    keep_scalar_phase: bool = True
    norm_drift: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        """Sample times in seconds."""
        return self.tau * self.scaled.time_unit

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    @property
    def norms(self) -> np.ndarray:
        return self.probabilities.sum(axis=1)

    @property
    def n_states(self) -> int:
        return self.coeffs.shape[1]


def ladder_norm(n_states: int) -> float:
    """Spectral norm of a + a^dagger truncated to ``n_states`` levels."""
    off = np.sqrt(np.arange(1, n_states, dtype=float))
    return float(np.max(np.abs(scipy.linalg.eigvalsh_tridiagonal(np.zeros(n_states), off))))


def coupling_bound(scaled: ScaledParams, scheme: SchemeKind, tau_end: float, n_states: int, keep_scalar_phase: bool = True) -> float:
    """Upper bound on the spectral radius of the coupling matrix over [0, tau_end]."""
    scheme = SchemeKind(scheme)
    ladder = ladder_norm(n_states)
    eps = scaled.drive_strength
    if scheme is SchemeKind.HAMILTONIAN:
        return eps * ladder
    if scheme is SchemeKind.K_NONRESONANT:
        scalar = max(scaled.a1, scaled.b1) if keep_scalar_phase else 0.0
        return scalar + math.hypot(scaled.c, scaled.d) * ladder
    # g and h grow with tau; sample their envelope rather than bound it loosely
    tau = np.linspace(0.0, tau_end, 4097)
    th = tau + scaled.phase
    g = 0.5 * eps * (np.sin(th) + tau * np.cos(th))
    h = 0.5 * eps * tau * np.sin(th)
    offdiag = 1.01 * float(np.max(np.hypot(g, h))) + 0.5 * eps * tau_end / 4096
    scalar = 0.25 * eps**2 * (1.0 + tau_end) if keep_scalar_phase else 0.0
    return scalar + offdiag * ladder


def suggest_dt(scaled: ScaledParams, scheme: SchemeKind, tau_end: float, n_states: int,
               keep_scalar_phase: bool = True, target_drift: float = 1e-8) -> float:
    """Largest fixed step whose worst-case RK4 norm loss stays near ``target_drift``.

    RK4 shrinks a rotation of angle z per step by about z^6 / 72, so over
    tau_end / dt steps the loss is tau_end * bound^6 * dt^5 / 72.
    """
    bound = coupling_bound(scaled, scheme, tau_end, n_states, keep_scalar_phase)
    if bound == 0:
        return DEFAULT_DT
    dt = (72.0 * target_drift / (tau_end * bound**6)) ** 0.2
    return min(DEFAULT_DT, dt)


def integrate(initial: CoefficientState, params, scheme: SchemeKind, tau_end: float, dt: float = DEFAULT_DT,
              sample_every: int = DEFAULT_STRIDE, keep_scalar_phase: bool = True,
              max_drift: float = MAX_NORM_DRIFT) -> TimeSeries:
    """Fixed-step RK4 from ``initial.tau`` to ``tau_end`` (units of 1/w0).

    The step count is ``round((tau_end - tau0) / dt)``, so the last step lands
    within dt / 2 of ``tau_end``.

    Samples every ``sample_every`` steps.  The state is never renormalised;
    if the norm leaves 1 by more than ``max_drift`` a :class:`NormDriftError`
    is raised.
    """
    scheme = SchemeKind(scheme)
    scaled = _as_scaled(params)
    if not tau_end > initial.tau:
        raise ValueError("tau_end must exceed the initial time")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if int(sample_every) != sample_every or sample_every < 1:
        raise ValueError("sample_every must be a positive integer")
    if abs(initial.norm - 1.0) > 1e-10:
        raise ValueError(f"initial state must be normalised, norm = {initial.norm!r}")
    span = tau_end - initial.tau
    n_steps = int(round(span / dt))
    if n_steps < 1:
        raise ValueError(f"dt={dt!r} exceeds the horizon {span!r}")
    p = kernel_constants(scaled, scheme, keep_scalar_phase)
    taus, samples, drift, status = _rk4_run(
        _KERNELS[scheme], p, initial.coeffs.copy(), float(initial.tau), float(dt), n_steps, int(sample_every), float(max_drift)
    )
    if status:
        suggestion = suggest_dt(scaled, scheme, tau_end, initial.n_states, keep_scalar_phase)
        raise NormDriftError(float(drift), float(taus[-1]), dt, suggestion)
    return TimeSeries(
        tau=taus, coeffs=samples, scheme=scheme, scaled=scaled, dt=float(dt), stride=int(sample_every),
        keep_scalar_phase=keep_scalar_phase, norm_drift=float(drift),
    )
